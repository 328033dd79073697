#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gafx {

// Append-only little-endian encoder. All on-disk containers go through this so
// that a load -> save cycle is byte-identical.
class ByteWriter {
 public:
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v);
  void f64(double v);
  void raw(std::string_view bytes);
  // u32 length prefix followed by the bytes.
  void str(std::string_view s);

  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

// Bounds-checked little-endian decoder; throws FormatError on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes, std::string context = "input")
      : data_(bytes), context_(std::move(context)) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64();
  double f64();
  std::string_view raw(std::size_t n);
  std::string str();

  // Consumes `magic` or throws FormatError naming the mismatch.
  void expect_magic(std::string_view magic);
  bool at_end() const { return pos_ == data_.size(); }
  void expect_end();

 private:
  void need(std::size_t n);

  std::string_view data_;
  std::size_t pos_ = 0;
  std::string context_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace gafx
