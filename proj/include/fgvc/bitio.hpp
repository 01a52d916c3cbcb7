#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fgvc {

// MSB-first bit packing.
class BitWriter {
 public:
  void put_bit(bool bit);
  void put_bits(std::uint64_t value, unsigned count);
  std::size_t bit_count() const { return bits_; }
  // Zero-pads the final byte.
  std::vector<std::uint8_t> finish() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes)
      : bytes_(bytes), limit_(bytes.size() * 8) {}
  BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_limit)
      : bytes_(bytes), limit_(bit_limit) {}
  bool get_bit();
  std::uint64_t get_bits(unsigned count);
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return limit_ - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

// Elias-delta code for n >= 1.
void write_elias_delta(BitWriter& out, std::uint64_t n);
std::uint64_t read_elias_delta(BitReader& in);
unsigned elias_delta_length(std::uint64_t n);

// '0'/'1' string forms of the same code.
std::string code_seed_index(std::uint64_t n);
std::uint64_t decode_seed_index(std::string_view bits);

}  // namespace fgvc
