#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fgvc/rcc.hpp"
#include "fgvc/tensor.hpp"
#include "fgvc/transform.hpp"

namespace fgvc {

struct Gop {
  std::uint32_t index = 0;
  std::size_t start = 0;
  std::size_t length = 0;
  std::size_t overlap = 0;  // frames shared with the predecessor
  std::size_t end() const { return start + length; }
};

// GOP k starts at k*(l - m); the last GOP is shortened to end exactly at
// L (never below 2s frames, which may widen its overlap).
std::vector<Gop> segment_gops(std::size_t frames, std::size_t length, std::size_t overlap,
                              std::size_t temporal);

// Distinct frames covered by a segmentation.
std::size_t distinct_frames(std::span<const Gop> gops);

// R_f = R * l*K / (l + (K-1)(l-m)).
double effective_bitrate(double rate, std::size_t length, std::size_t overlap, std::size_t gops);

// Fusion weight for overlap index i in [1, m'].
using FusionWeight = std::function<double(std::size_t)>;
FusionWeight constant_weight(double gamma);

// Blends the first m' latent frames of `current` with the last m' of
// `previous`: frame i (1-based) of the result is
//   gamma(i) * current[i] + (1 - gamma(i)) * previous[l'_prev - m' + i].
LatentTensor fuse_overlap(const LatentTensor& previous, const LatentTensor& current,
                          std::size_t overlap_latent, const FusionWeight& gamma);

// Output of one GOP trajectory encode.
struct GopEncoding {
  int t_star = 0;
  std::vector<std::vector<std::uint64_t>> seeds;  // seeds[T-1-t] for t = T-1 .. t_star
  std::vector<double> rate_table;  // rate_table[t] = code bits for steps T-1..t, 0 above T-1
  std::vector<double> kl_table;    // kl_table[t] = analytic KL bits of step t alone
  std::size_t exhausted_chunks = 0;
  std::vector<double> z_final;     // encoder state z_{t_star}, coefficient space

  std::vector<std::uint8_t> payload(int t_star) const;
  std::size_t payload_bits(int t_star) const;  // before byte padding
};

// Incremental trajectory encoder: steps can be extended downward on demand.
class GopEncoder {
 public:
  GopEncoder(const StepContext& ctx, const LatentTensor& target);

  void encode_down_to(int t_star);
  int lowest_step() const { return lowest_; }
  const GopEncoding& encoding() const { return enc_; }
  const std::vector<double>& state() const { return z_; }

 private:
  StepContext ctx_;
  std::vector<double> y_;
  std::vector<double> z_;
  int lowest_;
  GopEncoding enc_;
};

// Smallest t whose steps T-1..t all chunk under the KL cap (no coefficient
// alone exceeds it); steps below it raise ChunkTooHot.
int lowest_codable_step(const StepContext& ctx);

std::vector<double> initial_state(const StepContext& ctx, std::size_t dim);

GopEncoding encode_gop(const StepContext& ctx, const LatentTensor& target, int t_star);

// Keyed by the header seed unless overridden (fresh randomness).
struct DecodeNoise {
  std::optional<std::uint64_t> seed;
};

// Replays seeds to recover z_{t_star} in coefficient space.
std::vector<double> replay_gop(const StepContext& ctx, std::span<const std::uint8_t> payload,
                               int t_star, std::size_t dim);

// Full decode: replay, then ancestral steps t_star -> 1 with keyed noise;
// returns the final mean in latent coordinates.
LatentTensor decode_gop(const StepContext& ctx, std::span<const std::uint8_t> payload, int t_star,
                        const LatentShape& shape, DecodeNoise noise = {});

// Ancestral refinement from a known z_{t_star}.
LatentTensor denoise_from(const StepContext& ctx, std::vector<double> z, int t_star,
                          const LatentShape& shape, DecodeNoise noise = {});

}  // namespace fgvc
