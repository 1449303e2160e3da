#ifndef ZPD_BINARY_IO_H_
#define ZPD_BINARY_IO_H_

// Little-endian fixed-width encoding for the parameter and dataset files.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace zpd::io {

class ByteWriter {
 public:
  void PutU8(std::uint8_t v) { bytes_.push_back(v); }
  void PutU32(std::uint32_t v);
  void PutU64(std::uint64_t v);
  void PutF64(double v);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

// Reads from an owned byte buffer. Running past the end throws LoadError
// naming `field` of the failing read.
class ByteReader {
 public:
  explicit ByteReader(std::vector<std::uint8_t> bytes)
      : bytes_(std::move(bytes)) {}

  std::uint8_t GetU8(std::string_view field);
  std::uint32_t GetU32(std::string_view field);
  std::uint64_t GetU64(std::string_view field);
  double GetF64(std::string_view field);

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void Need(std::size_t n, std::string_view field) const;

  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path,
               const std::vector<std::uint8_t>& bytes);

// CRC-32 (zlib polynomial) of a byte buffer.
std::uint32_t Crc32(const std::vector<std::uint8_t>& bytes);

}  // namespace zpd::io

#endif  // ZPD_BINARY_IO_H_
