#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace fgvc {

// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t mix64(std::uint64_t x);

// Stream purposes; part of the counter so streams never overlap.
enum class Purpose : std::uint32_t {
  Candidate = 1,
  PoissonTime = 2,
  InitialNoise = 3,
  DecoderNoise = 4,
  Synthetic = 5,
  Discrete = 6,
};

// Counter-based stream. No state: every draw is a pure function of
// (key, purpose, index, block), so encoder and decoder can address any
// candidate directly.
class KeyedStream {
 public:
  KeyedStream() = default;
  explicit KeyedStream(std::uint64_t key) : key_(key) {}

  // Key for (base seed, gop, step, chunk) and any further coordinates.
  static KeyedStream derive(std::uint64_t base_seed, std::uint64_t gop, std::uint64_t step,
                            std::uint64_t chunk);

  std::uint64_t key() const { return key_; }

  // 64 random bits for (purpose, index, word).
  std::uint64_t bits(Purpose purpose, std::uint64_t index, std::uint32_t word) const;

  // Uniform in the open interval (0, 1).
  double uniform(Purpose purpose, std::uint64_t index, std::uint32_t word = 0) const;

  // Unit-rate exponential.
  double exponential(Purpose purpose, std::uint64_t index) const;

  // Standard normals for draw `index` (Box-Muller, two per Philox block).
  void normals(Purpose purpose, std::uint64_t index, std::span<double> out) const;

 private:
  std::uint64_t key_ = 0;
};

}  // namespace fgvc
