#include "gafx/binary_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <sstream>

#include "gafx/errors.hpp"

namespace gafx {

namespace {

template <class T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFFu));
  }
}

template <class T>
T get_le(std::string_view in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  }
  return static_cast<T>(v);
}

}  // namespace

void ByteWriter::u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
void ByteWriter::u32(std::uint32_t v) { put_le(buf_, v); }
void ByteWriter::u64(std::uint64_t v) { put_le(buf_, v); }
void ByteWriter::i64(std::int64_t v) { put_le(buf_, static_cast<std::uint64_t>(v)); }
void ByteWriter::f64(double v) { put_le(buf_, std::bit_cast<std::uint64_t>(v)); }
void ByteWriter::raw(std::string_view bytes) { buf_.append(bytes); }

void ByteWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  raw(s);
}

void ByteReader::need(std::size_t n) {
  if (data_.size() - pos_ < n) {
    throw FormatError(context_ + ": truncated at byte " + std::to_string(pos_) + " (need " +
                      std::to_string(n) + " more)");
  }
}

std::uint8_t ByteReader::u8() {
  need(1);
  return static_cast<std::uint8_t>(data_[pos_++]);
}

std::uint32_t ByteReader::u32() {
  need(4);
  auto v = get_le<std::uint32_t>(data_.substr(pos_, 4));
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  auto v = get_le<std::uint64_t>(data_.substr(pos_, 8));
  pos_ += 8;
  return v;
}

std::int64_t ByteReader::i64() { return static_cast<std::int64_t>(u64()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string_view ByteReader::raw(std::size_t n) {
  need(n);
  auto v = data_.substr(pos_, n);
  pos_ += n;
  return v;
}

std::string ByteReader::str() {
  auto n = u32();
  return std::string(raw(n));
}

void ByteReader::expect_magic(std::string_view magic) {
  if (data_.size() - pos_ < magic.size() || data_.substr(pos_, magic.size()) != magic) {
    auto got = data_.substr(pos_, std::min(magic.size(), data_.size() - pos_));
    std::ostringstream msg;
    msg << context_ << ": magic string mismatch (expected \"" << magic << "\", found \"";
    for (char c : got) {
      msg << (c >= 0x20 && c < 0x7f ? c : '?');
    }
    msg << "\")";
    throw FormatError(msg.str());
  }
  pos_ += magic.size();
}

void ByteReader::expect_end() {
  if (!at_end()) {
    throw FormatError(context_ + ": " + std::to_string(data_.size() - pos_) +
                      " trailing bytes");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path.string());
  }
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw InputError("cannot write " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw InputError("write failed for " + path.string());
  }
}

}  // namespace gafx
