#include "mavkit/capture.hpp"

#include "mavkit/errors.hpp"

namespace mavkit {

namespace {

void append_record(Bytes& out, const CaptureRecord& rec) {
  for (int i = 0; i < 8; ++i) out.push_back(uint8_t(rec.ts_us >> (8 * i)));
  out.push_back(rec.dir);
  const uint16_t len = uint16_t(rec.bytes.size());
  out.push_back(uint8_t(len & 0xFF));
  out.push_back(uint8_t(len >> 8));
  out.insert(out.end(), rec.bytes.begin(), rec.bytes.end());
}

}  // namespace

void capture_write(const std::filesystem::path& path,
                   std::span<const CaptureRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CaptureCorrupt("cannot write " + path.string());
  Bytes buf;
  for (const auto& rec : records) {
    buf.clear();
    append_record(buf, rec);
    out.write(reinterpret_cast<const char*>(buf.data()),
              std::streamsize(buf.size()));
  }
  if (!out) throw CaptureCorrupt("write failed for " + path.string());
}

std::vector<CaptureRecord> capture_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CaptureCorrupt("cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)),
             std::istreambuf_iterator<char>());

  std::vector<CaptureRecord> out;
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t record_start = pos;
    auto truncated = [&] {
      return CaptureCorrupt(path.string() + ": truncated record at byte offset " +
                            std::to_string(record_start));
    };
    if (data.size() - pos < 11) throw truncated();
    CaptureRecord rec;
    for (int i = 0; i < 8; ++i)
      rec.ts_us |= uint64_t(data[pos + std::size_t(i)]) << (8 * i);
    rec.dir = data[pos + 8];
    const uint16_t len = uint16_t(data[pos + 9] | (data[pos + 10] << 8));
    pos += 11;
    if (data.size() - pos < len) throw truncated();
    rec.bytes.assign(data.begin() + std::ptrdiff_t(pos),
                     data.begin() + std::ptrdiff_t(pos + len));
    pos += len;
    out.push_back(std::move(rec));
  }
  return out;
}

CaptureWriter::CaptureWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw CaptureCorrupt("cannot write " + path.string());
}

void CaptureWriter::append(const CaptureRecord& rec) {
  Bytes buf;
  append_record(buf, rec);
  out_.write(reinterpret_cast<const char*>(buf.data()),
             std::streamsize(buf.size()));
  if (!out_) throw CaptureCorrupt("write failed for " + path_.string());
}

}  // namespace mavkit
