#pragma once

// Little-endian binary primitives and the file-format errors shared by the
// model and dataset formats.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace backstep {

class FileFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BadMagicError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};
class VersionMismatchError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};
class TruncatedFileError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};
class ChecksumError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};

/// Appends little-endian encodings to a byte buffer.
class ByteWriter {
 public:
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> v);
  void raw(std::string_view bytes);

  const std::vector<unsigned char>& bytes() const { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

/// Reads little-endian values from a byte span; throws TruncatedFileError on overrun.
class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void f64s(std::span<double> out);
  std::string raw(std::size_t n);

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const;
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const unsigned char> bytes);

}  // namespace backstep
