#include "fgvc/rng.hpp"

#include <cmath>
#include <numbers>

namespace fgvc {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

KeyedStream KeyedStream::derive(std::uint64_t base_seed, std::uint64_t gop, std::uint64_t step,
                                std::uint64_t chunk) {
  std::uint64_t h = mix64(base_seed);
  h = mix64(h ^ mix64(gop + 0x1000));
  h = mix64(h ^ mix64(step + 0x2000000));
  h = mix64(h ^ mix64(chunk + 0x30000000000ull));
  return KeyedStream(h);
}

std::uint64_t KeyedStream::bits(Purpose purpose, std::uint64_t index, std::uint32_t word) const {
  const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(index),
                                         static_cast<std::uint32_t>(index >> 32), word >> 1,
                                         static_cast<std::uint32_t>(purpose)};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(key_),
                                         static_cast<std::uint32_t>(key_ >> 32)};
  const auto out = philox4x32(ctr, key);
  const std::size_t half = (word & 1u) * 2;
  return (static_cast<std::uint64_t>(out[half]) << 32) | out[half + 1];
}

namespace {

inline double to_open_unit(std::uint64_t b) {
  return (static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double KeyedStream::uniform(Purpose purpose, std::uint64_t index, std::uint32_t word) const {
  return to_open_unit(bits(purpose, index, word));
}

double KeyedStream::exponential(Purpose purpose, std::uint64_t index) const {
  return -std::log(uniform(purpose, index, 0));
}

void KeyedStream::normals(Purpose purpose, std::uint64_t index, std::span<double> out) const {
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(key_),
                                         static_cast<std::uint32_t>(key_ >> 32)};
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const std::size_t n = out.size();
  for (std::size_t i = 0, block = 0; i < n; i += 2, ++block) {
    const auto r = philox4x32({static_cast<std::uint32_t>(index),
                               static_cast<std::uint32_t>(index >> 32),
                               static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(purpose)},
                              key);
    const double u1 = to_open_unit((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
    const double u2 = to_open_unit((static_cast<std::uint64_t>(r[2]) << 32) | r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = two_pi * u2;
    out[i] = radius * std::cos(angle);
    if (i + 1 < n) out[i + 1] = radius * std::sin(angle);
  }
}

}  // namespace fgvc
