#include "fgvc/bitio.hpp"

#include <bit>

#include "fgvc/error.hpp"

namespace fgvc {

void BitWriter::put_bit(bool bit) {
  if (bits_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
  ++bits_;
}

void BitWriter::put_bits(std::uint64_t value, unsigned count) {
  for (unsigned i = count; i-- > 0;) put_bit((value >> i) & 1u);
}

bool BitReader::get_bit() {
  if (pos_ >= limit_) fail(Errc::MalformedCode, "read past end of bit stream");
  const bool bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
  ++pos_;
  return bit;
}

std::uint64_t BitReader::get_bits(unsigned count) {
  std::uint64_t v = 0;
  for (unsigned i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint64_t>(get_bit());
  return v;
}

namespace {

unsigned floor_log2(std::uint64_t n) { return 63u - static_cast<unsigned>(std::countl_zero(n)); }

}  // namespace

void write_elias_delta(BitWriter& out, std::uint64_t n) {
  if (n == 0) fail(Errc::SeedOutOfRange, "Elias-delta codes positive integers only");
  const unsigned body = floor_log2(n);
  const std::uint64_t len = body + 1;
  const unsigned len_bits = floor_log2(len);
  out.put_bits(0, len_bits);
  out.put_bits(len, len_bits + 1);
  out.put_bits(n, body);
}

std::uint64_t read_elias_delta(BitReader& in) {
  unsigned zeros = 0;
  while (!in.get_bit()) {
    if (++zeros > 6) fail(Errc::MalformedCode, "Elias-delta length prefix too long");
  }
  const std::uint64_t len = (std::uint64_t{1} << zeros) | in.get_bits(zeros);
  if (len > 64) fail(Errc::MalformedCode, "Elias-delta value exceeds 64 bits");
  const unsigned body = static_cast<unsigned>(len - 1);
  return (std::uint64_t{1} << body) | in.get_bits(body);
}

unsigned elias_delta_length(std::uint64_t n) {
  const unsigned body = floor_log2(n);
  return body + 2 * floor_log2(body + 1) + 1;
}

std::string code_seed_index(std::uint64_t n) {
  BitWriter w;
  write_elias_delta(w, n);
  const auto bytes = w.finish();
  std::string s;
  BitReader r(bytes);
  for (std::size_t i = 0; i < w.bit_count(); ++i) s.push_back(r.get_bit() ? '1' : '0');
  return s;
}

std::uint64_t decode_seed_index(std::string_view bits) {
  BitWriter w;
  for (char c : bits) {
    if (c != '0' && c != '1') fail(Errc::MalformedCode, "bit strings hold only '0' and '1'");
    w.put_bit(c == '1');
  }
  const auto bytes = w.finish();
  BitReader r(bytes, w.bit_count());
  const std::uint64_t n = read_elias_delta(r);
  if (r.position() != bits.size()) fail(Errc::MalformedCode, "trailing bits after code word");
  return n;
}

}  // namespace fgvc
