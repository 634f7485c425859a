// Copyright polystore contributors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace polystore {

enum class BackendKind { Memory, LogStructured };

// Per-node storage behind the replication layer. Absent is a value, not an
// error; acknowledgment means the write reached the log stream (flushed).
class StorageBackend {
 public:
  virtual ~StorageBackend() = default;

  virtual void put(std::string_view bucket, std::string_view key,
                   std::string_view payload) = 0;
  virtual std::optional<std::string> get(std::string_view bucket,
                                         std::string_view key) const = 0;
  virtual void del(std::string_view bucket, std::string_view key) = 0;

  // Keys currently live in a bucket, in sorted order.
  virtual std::vector<std::string> scan(std::string_view bucket) const = 0;
  virtual std::vector<std::string> buckets() const = 0;

  virtual BackendKind kind() const = 0;
};

class MemoryBackend final : public StorageBackend {
 public:
  void put(std::string_view bucket, std::string_view key,
           std::string_view payload) override;
  std::optional<std::string> get(std::string_view bucket,
                                 std::string_view key) const override;
  void del(std::string_view bucket, std::string_view key) override;
  std::vector<std::string> scan(std::string_view bucket) const override;
  std::vector<std::string> buckets() const override;
  BackendKind kind() const override { return BackendKind::Memory; }

 private:
  std::map<std::string, std::map<std::string, std::string>> tables_;
};

struct LogRecord {
  enum class Kind : std::uint8_t { Put = 0, Del = 1 };
  Kind kind = Kind::Put;
  std::uint64_t sequence = 0;
  std::string bucket;
  std::string key;
  std::string payload;
};

// Append-only log with an in-memory hash index, bitcask style. One active
// file; sealed files rotate at size_threshold and are merged by compact().
// Recovery replays every record with a valid checksum in sequence order,
// discarding a torn tail; a checksum failure that is not at the tail of the
// newest file refuses to open (CorruptInterior).
class LogBackend final : public StorageBackend {
 public:
  explicit LogBackend(std::filesystem::path dir,
                      std::uint64_t size_threshold = kDefaultSizeThreshold);
  ~LogBackend() override;

  void put(std::string_view bucket, std::string_view key,
           std::string_view payload) override;
  std::optional<std::string> get(std::string_view bucket,
                                 std::string_view key) const override;
  void del(std::string_view bucket, std::string_view key) override;
  std::vector<std::string> scan(std::string_view bucket) const override;
  std::vector<std::string> buckets() const override;
  BackendKind kind() const override { return BackendKind::LogStructured; }

  // Rewrites the log keeping only the newest record per key; keys whose
  // newest record is a deletion vanish entirely.
  void compact();

  std::uint64_t next_sequence() const { return next_sequence_; }
  std::vector<std::filesystem::path> log_files() const;

  static constexpr std::uint64_t kDefaultSizeThreshold = 64ull << 20;

  // Scans the records of every log file under dir (valid prefix only) as
  // tab-separated text: sequence, put|del, bucket, key, payload_size.
  static void dump(const std::filesystem::path& dir, std::ostream& out);

 private:
  struct Location {
    std::uint32_t file_no = 0;
    std::uint64_t offset = 0;  // offset of the payload inside the file
    std::uint32_t size = 0;
    std::uint64_t sequence = 0;
  };

  void open_active(std::uint32_t file_no);
  void append(LogRecord::Kind kind, std::string_view bucket,
              std::string_view key, std::string_view payload);
  void recover();
  std::string read_payload(const Location& loc) const;

  std::filesystem::path dir_;
  std::uint64_t size_threshold_;
  std::uint64_t next_sequence_ = 1;
  std::uint32_t active_file_ = 0;
  std::uint64_t active_size_ = 0;
  mutable std::ofstream active_;
  std::map<std::string, std::map<std::string, Location>> index_;
};

std::unique_ptr<StorageBackend> make_backend(BackendKind kind,
                                             const std::filesystem::path& dir);

namespace logfile {

// Frame: u32 body_len | body | u32 crc32(body). Little-endian integers.
// Body: u8 kind, u64 sequence, u16 bucket_len, u32 key_len, u32 payload_len,
// bucket, key, payload. The checksum covers the whole body.
std::string encode_record(const LogRecord& record);

struct ScanResult {
  std::vector<LogRecord> records;
  std::uint64_t valid_bytes = 0;  // prefix length ending at the last good record
  bool torn_tail = false;
};

// may_truncate selects torn-tail tolerance (only the newest file gets it).
ScanResult scan_file(const std::filesystem::path& file, bool may_truncate);

}  // namespace logfile

}  // namespace polystore
