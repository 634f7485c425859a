// Copyright polystore contributors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "polystore/storage.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <ostream>

#include "polystore/errors.hpp"

namespace polystore {

namespace {

constexpr std::string_view kLogSuffix = ".pslog";

template <typename T>
void append_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <typename T>
T read_le(const char* data) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(data[i])) << (8 * i);
  }
  return value;
}

std::uint32_t checksum(std::string_view body) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
            static_cast<uInt>(body.size())));
}

std::filesystem::path log_path(const std::filesystem::path& dir,
                               std::uint32_t file_no) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06u", file_no);
  return dir / (std::string(name) + std::string(kLogSuffix));
}

std::vector<std::pair<std::uint32_t, std::filesystem::path>> list_logs(
    const std::filesystem::path& dir) {
  std::vector<std::pair<std::uint32_t, std::filesystem::path>> files;
  if (!std::filesystem::exists(dir)) return files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.size() > kLogSuffix.size() &&
        name.ends_with(kLogSuffix)) {
      files.emplace_back(
          static_cast<std::uint32_t>(
              std::stoul(name.substr(0, name.size() - kLogSuffix.size()))),
          entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

constexpr std::size_t kHeaderSize = 4;                       // body_len
constexpr std::size_t kBodyFixed = 1 + 8 + 2 + 4 + 4;        // kind..payload_len
constexpr std::uint32_t kMaxBody = 256u << 20;

}  // namespace

void MemoryBackend::put(std::string_view bucket, std::string_view key,
                        std::string_view payload) {
  tables_[std::string(bucket)][std::string(key)] = std::string(payload);
}

std::optional<std::string> MemoryBackend::get(std::string_view bucket,
                                              std::string_view key) const {
  auto table = tables_.find(std::string(bucket));
  if (table == tables_.end()) return std::nullopt;
  auto it = table->second.find(std::string(key));
  if (it == table->second.end()) return std::nullopt;
  return it->second;
}

void MemoryBackend::del(std::string_view bucket, std::string_view key) {
  auto table = tables_.find(std::string(bucket));
  if (table == tables_.end()) return;
  table->second.erase(std::string(key));
}

std::vector<std::string> MemoryBackend::scan(std::string_view bucket) const {
  std::vector<std::string> keys;
  auto table = tables_.find(std::string(bucket));
  if (table == tables_.end()) return keys;
  for (const auto& [key, value] : table->second) keys.push_back(key);
  return keys;
}

std::vector<std::string> MemoryBackend::buckets() const {
  std::vector<std::string> out;
  for (const auto& [bucket, table] : tables_) {
    if (!table.empty()) out.push_back(bucket);
  }
  return out;
}

namespace logfile {

std::string encode_record(const LogRecord& record) {
  std::string body;
  body.reserve(kBodyFixed + record.bucket.size() + record.key.size() +
               record.payload.size());
  body.push_back(static_cast<char>(record.kind));
  append_le<std::uint64_t>(body, record.sequence);
  append_le<std::uint16_t>(body, static_cast<std::uint16_t>(record.bucket.size()));
  append_le<std::uint32_t>(body, static_cast<std::uint32_t>(record.key.size()));
  append_le<std::uint32_t>(body, static_cast<std::uint32_t>(record.payload.size()));
  body += record.bucket;
  body += record.key;
  body += record.payload;

  std::string frame;
  frame.reserve(kHeaderSize + body.size() + 4);
  append_le<std::uint32_t>(frame, static_cast<std::uint32_t>(body.size()));
  frame += body;
  append_le<std::uint32_t>(frame, checksum(body));
  return frame;
}

ScanResult scan_file(const std::filesystem::path& file, bool may_truncate) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoFailure("cannot open log file: " + file.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  ScanResult result;
  std::size_t pos = 0;
  while (pos < data.size()) {
    auto fail = [&](const std::string& reason, bool possibly_torn) {
      if (may_truncate && possibly_torn) {
        result.torn_tail = true;
        return true;  // stop scanning, keep the valid prefix
      }
      throw CorruptInterior(file.string() + ": " + reason);
    };

    if (pos + kHeaderSize > data.size()) {
      if (fail("truncated frame header", true)) break;
    }
    std::uint32_t body_len = read_le<std::uint32_t>(data.data() + pos);
    if (body_len < kBodyFixed || body_len > kMaxBody) {
      if (fail("implausible record length", pos + kHeaderSize + body_len >= data.size())) break;
    }
    std::size_t body_at = pos + kHeaderSize;
    std::size_t crc_at = body_at + body_len;
    if (crc_at + 4 > data.size()) {
      if (fail("truncated record body", true)) break;
    }
    std::string_view body(data.data() + body_at, body_len);
    std::uint32_t stored_crc = read_le<std::uint32_t>(data.data() + crc_at);
    if (stored_crc != checksum(body)) {
      if (fail("checksum mismatch", crc_at + 4 == data.size())) break;
    }

    LogRecord record;
    record.kind = static_cast<LogRecord::Kind>(body[0]);
    record.sequence = read_le<std::uint64_t>(body.data() + 1);
    std::uint16_t bucket_len = read_le<std::uint16_t>(body.data() + 9);
    std::uint32_t key_len = read_le<std::uint32_t>(body.data() + 11);
    std::uint32_t payload_len = read_le<std::uint32_t>(body.data() + 15);
    if (kBodyFixed + bucket_len + key_len + payload_len != body_len) {
      if (fail("inconsistent record lengths", crc_at + 4 == data.size())) break;
    }
    const char* cursor = body.data() + kBodyFixed;
    record.bucket.assign(cursor, bucket_len);
    cursor += bucket_len;
    record.key.assign(cursor, key_len);
    cursor += key_len;
    record.payload.assign(cursor, payload_len);

    result.records.push_back(std::move(record));
    pos = crc_at + 4;
    result.valid_bytes = pos;
  }
  return result;
}

}  // namespace logfile

LogBackend::LogBackend(std::filesystem::path dir, std::uint64_t size_threshold)
    : dir_(std::move(dir)), size_threshold_(size_threshold) {
  std::filesystem::create_directories(dir_);
  recover();
}

LogBackend::~LogBackend() {
  if (active_.is_open()) active_.flush();
}

void LogBackend::recover() {
  index_.clear();
  next_sequence_ = 1;
  auto files = list_logs(dir_);
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto& [file_no, path] = files[i];
    bool newest = i + 1 == files.size();
    logfile::ScanResult scanned = logfile::scan_file(path, newest);
    if (scanned.torn_tail) {
      std::filesystem::resize_file(path, scanned.valid_bytes);
    }
    std::uint64_t offset = 0;
    for (const LogRecord& record : scanned.records) {
      std::uint64_t frame_size =
          kHeaderSize + kBodyFixed + record.bucket.size() + record.key.size() +
          record.payload.size() + 4;
      if (record.kind == LogRecord::Kind::Put) {
        std::uint64_t payload_at = offset + kHeaderSize + kBodyFixed +
                                   record.bucket.size() + record.key.size();
        index_[record.bucket][record.key] =
            Location{file_no, payload_at,
                     static_cast<std::uint32_t>(record.payload.size()),
                     record.sequence};
      } else {
        auto table = index_.find(record.bucket);
        if (table != index_.end()) table->second.erase(record.key);
      }
      next_sequence_ = std::max(next_sequence_, record.sequence + 1);
      offset += frame_size;
    }
  }
  std::uint32_t active_no = files.empty() ? 0 : files.back().first;
  open_active(active_no);
}

void LogBackend::open_active(std::uint32_t file_no) {
  if (active_.is_open()) active_.close();
  active_file_ = file_no;
  std::filesystem::path path = log_path(dir_, file_no);
  active_.open(path, std::ios::binary | std::ios::app);
  if (!active_) throw IoFailure("cannot open log for append: " + path.string());
  active_size_ = std::filesystem::exists(path) ? std::filesystem::file_size(path) : 0;
}

void LogBackend::append(LogRecord::Kind kind, std::string_view bucket,
                        std::string_view key, std::string_view payload) {
  if (active_size_ >= size_threshold_) {
    open_active(active_file_ + 1);
  }
  LogRecord record{kind, next_sequence_++, std::string(bucket), std::string(key),
                   std::string(payload)};
  std::string frame = logfile::encode_record(record);
  std::uint64_t payload_at = active_size_ + kHeaderSize + kBodyFixed +
                             bucket.size() + key.size();
  active_.write(frame.data(), static_cast<std::streamsize>(frame.size()));
  active_.flush();
  if (!active_) throw IoFailure("log append failed");
  active_size_ += frame.size();

  if (kind == LogRecord::Kind::Put) {
    index_[record.bucket][record.key] =
        Location{active_file_, payload_at,
                 static_cast<std::uint32_t>(payload.size()), record.sequence};
  } else {
    auto table = index_.find(record.bucket);
    if (table != index_.end()) table->second.erase(record.key);
  }
}

void LogBackend::put(std::string_view bucket, std::string_view key,
                     std::string_view payload) {
  append(LogRecord::Kind::Put, bucket, key, payload);
}

void LogBackend::del(std::string_view bucket, std::string_view key) {
  append(LogRecord::Kind::Del, bucket, key, "");
}

std::string LogBackend::read_payload(const Location& loc) const {
  std::ifstream in(log_path(dir_, loc.file_no), std::ios::binary);
  if (!in) throw IoFailure("cannot open log file for read");
  in.seekg(static_cast<std::streamoff>(loc.offset));
  std::string out(loc.size, '\0');
  in.read(out.data(), loc.size);
  if (!in) throw IoFailure("short payload read");
  return out;
}

std::optional<std::string> LogBackend::get(std::string_view bucket,
                                           std::string_view key) const {
  active_.flush();
  auto table = index_.find(std::string(bucket));
  if (table == index_.end()) return std::nullopt;
  auto it = table->second.find(std::string(key));
  if (it == table->second.end()) return std::nullopt;
  return read_payload(it->second);
}

std::vector<std::string> LogBackend::scan(std::string_view bucket) const {
  std::vector<std::string> keys;
  auto table = index_.find(std::string(bucket));
  if (table == index_.end()) return keys;
  for (const auto& [key, loc] : table->second) keys.push_back(key);
  return keys;
}

std::vector<std::string> LogBackend::buckets() const {
  std::vector<std::string> out;
  for (const auto& [bucket, table] : index_) {
    if (!table.empty()) out.push_back(bucket);
  }
  return out;
}

std::vector<std::filesystem::path> LogBackend::log_files() const {
  std::vector<std::filesystem::path> out;
  for (const auto& [no, path] : list_logs(dir_)) out.push_back(path);
  return out;
}

void LogBackend::compact() {
  active_.flush();
  // Newest surviving record per key, in original sequence order.
  std::vector<LogRecord> survivors;
  for (const auto& [bucket, table] : index_) {
    for (const auto& [key, loc] : table) {
      LogRecord record;
      record.kind = LogRecord::Kind::Put;
      record.sequence = loc.sequence;
      record.bucket = bucket;
      record.key = key;
      record.payload = read_payload(loc);
      survivors.push_back(std::move(record));
    }
  }
  std::sort(survivors.begin(), survivors.end(),
            [](const LogRecord& a, const LogRecord& b) { return a.sequence < b.sequence; });
  auto files = list_logs(dir_);

  if (active_.is_open()) active_.close();
  std::uint32_t new_no = files.empty() ? 0 : files.back().first + 1;
  std::filesystem::path fresh = log_path(dir_, new_no);
  {
    std::ofstream out(fresh, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open compaction target");
    for (const LogRecord& r : survivors) {
      std::string frame = logfile::encode_record(r);
      out.write(frame.data(), static_cast<std::streamsize>(frame.size()));
    }
    out.flush();
    if (!out) throw IoFailure("compaction write failed");
  }
  for (const auto& [no, path] : files) std::filesystem::remove(path);
  recover();
}

void LogBackend::dump(const std::filesystem::path& dir, std::ostream& out) {
  auto files = list_logs(dir);
  for (std::size_t i = 0; i < files.size(); ++i) {
    logfile::ScanResult scanned =
        logfile::scan_file(files[i].second, i + 1 == files.size());
    for (const LogRecord& r : scanned.records) {
      out << r.sequence << '\t'
          << (r.kind == LogRecord::Kind::Put ? "put" : "del") << '\t'
          << r.bucket << '\t' << r.key << '\t' << r.payload.size() << '\n';
    }
  }
}

std::unique_ptr<StorageBackend> make_backend(BackendKind kind,
                                             const std::filesystem::path& dir) {
  if (kind == BackendKind::Memory) return std::make_unique<MemoryBackend>();
  return std::make_unique<LogBackend>(dir);
}

}  // namespace polystore
