#include "fgvc/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "fgvc/bitio.hpp"
#include "fgvc/error.hpp"
#include "fgvc/kernels.hpp"

namespace fgvc {

std::vector<Gop> segment_gops(std::size_t frames, std::size_t length, std::size_t overlap,
                              std::size_t temporal) {
  if (temporal == 0 || length <= overlap)
    fail(Errc::BadGopParams, "need l > m >= 0 and s > 0");
  if (length % temporal || overlap % temporal)
    fail(Errc::BadGopParams, "l and m must be multiples of s = " + std::to_string(temporal));
  if (length < 2 * temporal)
    fail(Errc::BadGopParams, "l must cover at least 2s frames");
  if (frames % temporal)
    fail(Errc::BadGopParams, "frame count must be padded to a multiple of s");
  const std::size_t min_len = 2 * temporal;
  if (frames < min_len)
    fail(Errc::VideoTooShort, std::to_string(frames) + " frames, need at least " +
                                  std::to_string(min_len));
  std::vector<Gop> gops;
  const std::size_t stride = length - overlap;
  std::size_t prev_end = 0;
  for (std::uint32_t k = 0;; ++k) {
    std::size_t start = static_cast<std::size_t>(k) * stride;
    std::size_t len = std::min(length, frames - start);
    if (len < min_len) {
      start = frames - min_len;
      len = min_len;
    }
    gops.push_back({k, start, len, k == 0 ? 0 : prev_end - start});
    prev_end = start + len;
    if (prev_end >= frames) break;
  }
  return gops;
}

std::size_t distinct_frames(std::span<const Gop> gops) {
  std::size_t total = 0;
  for (const Gop& g : gops) total += g.length - g.overlap;
  return total;
}

double effective_bitrate(double rate, std::size_t length, std::size_t overlap, std::size_t gops) {
  if (length <= overlap || gops < 1) fail(Errc::BadGopParams, "need l > m >= 0 and K >= 1");
  const double l = static_cast<double>(length);
  const double k = static_cast<double>(gops);
  return rate * l * k / (l + (k - 1.0) * (l - static_cast<double>(overlap)));
}

FusionWeight constant_weight(double gamma) {
  return [gamma](std::size_t) { return gamma; };
}

LatentTensor fuse_overlap(const LatentTensor& previous, const LatentTensor& current,
                          std::size_t overlap_latent, const FusionWeight& gamma) {
  const LatentShape& ps = previous.shape();
  const LatentShape& cs = current.shape();
  if (ps.frame_size() != cs.frame_size())
    fail(Errc::ShapeMismatch, "fusion needs equal latent frame geometry");
  if (overlap_latent < 1 || overlap_latent > ps.frames || overlap_latent > cs.frames)
    fail(Errc::OverlapTooLarge, "overlap of " + std::to_string(overlap_latent) +
                                    " latent frames exceeds a GOP of " +
                                    std::to_string(std::min(ps.frames, cs.frames)));
  LatentTensor out = current;
  for (std::size_t i = 1; i <= overlap_latent; ++i) {
    const double g = gamma(i);
    const auto prev = previous.frame(ps.frames - overlap_latent + i - 1);
    kernels::axpby(g, current.frame(i - 1), 1.0 - g, prev, out.frame(i - 1));
  }
  return out;
}

std::vector<std::uint8_t> GopEncoding::payload(int t) const {
  if (t < t_star) fail(Errc::InvalidSchedule, "payload below the encoded trajectory");
  BitWriter w;
  const std::size_t steps = seeds.size() - static_cast<std::size_t>(t - t_star);
  for (std::size_t i = 0; i < steps; ++i)
    for (std::uint64_t n : seeds[i]) write_elias_delta(w, n);
  return w.finish();
}

std::size_t GopEncoding::payload_bits(int t) const {
  if (t < t_star) fail(Errc::InvalidSchedule, "payload below the encoded trajectory");
  std::size_t bits = 0;
  const std::size_t steps = seeds.size() - static_cast<std::size_t>(t - t_star);
  for (std::size_t i = 0; i < steps; ++i)
    for (std::uint64_t n : seeds[i]) bits += elias_delta_length(n);
  return bits;
}

int lowest_codable_step(const StepContext& ctx) {
  std::vector<double> kl(ctx.prior.dimensionality());
  int lowest = ctx.sched.steps();
  for (int t = ctx.sched.steps() - 1; t >= 1; --t) {
    ctx.prior.expected_step_kl_bits(t + 1, ctx.sched, ctx.mode, kl);
    if (*std::max_element(kl.begin(), kl.end()) > ctx.kl_cap) break;
    lowest = t;
  }
  if (lowest == ctx.sched.steps())
    fail(Errc::ChunkTooHot, "step T-1 already exceeds the KL cap of " + std::to_string(ctx.kl_cap));
  return lowest;
}

std::vector<double> initial_state(const StepContext& ctx, std::size_t dim) {
  std::vector<double> z(dim);
  KeyedStream::derive(ctx.base_seed, ctx.gop, static_cast<std::uint64_t>(ctx.sched.steps()), 0)
      .normals(Purpose::InitialNoise, 0, z);
  return z;
}

GopEncoder::GopEncoder(const StepContext& ctx, const LatentTensor& target)
    : ctx_(ctx), y_(target.size()), lowest_(ctx.sched.steps()) {
  if (target.size() != ctx.prior.dimensionality())
    fail(Errc::ProfileMismatch, "target latent " + to_string(target.shape()) +
                                    " does not match prior of dimension " +
                                    std::to_string(ctx.prior.dimensionality()));
  if (ctx.sched.steps() < 2) fail(Errc::InvalidSchedule, "trajectory coding needs T >= 2");
  ctx.prior.to_coefficients(target.values(), y_);
  z_ = initial_state(ctx, y_.size());
  enc_.t_star = lowest_;
  enc_.rate_table.assign(static_cast<std::size_t>(ctx.sched.steps()) + 1, 0.0);
  enc_.kl_table.assign(static_cast<std::size_t>(ctx.sched.steps()) + 1, 0.0);
}

void GopEncoder::encode_down_to(int t_star) {
  if (t_star < 1 || t_star > ctx_.sched.steps() - 1)
    fail(Errc::InvalidSchedule, "t* = " + std::to_string(t_star) + " outside [1, T-1]");
  double cumulative = lowest_ < ctx_.sched.steps() ? enc_.rate_table[lowest_] : 0.0;
  for (int t = lowest_ - 1; t >= t_star; --t) {
    const ChunkSpec chunks = plan_step_chunks(ctx_, t);
    StepEncoding step = encode_step(ctx_, t, z_, y_, chunks);
    z_ = std::move(step.z_t);
    std::vector<std::uint64_t> seeds;
    seeds.reserve(step.records.size());
    for (const SeedRecord& r : step.records) seeds.push_back(r.seed);
    enc_.seeds.push_back(std::move(seeds));
    cumulative += step.coded_bits;
    enc_.rate_table[t] = cumulative;
    enc_.kl_table[t] = step.kl_bits;
    enc_.exhausted_chunks += step.exhausted;
    lowest_ = t;
  }
  enc_.t_star = lowest_;
  enc_.z_final = z_;
}

GopEncoding encode_gop(const StepContext& ctx, const LatentTensor& target, int t_star) {
  GopEncoder enc(ctx, target);
  enc.encode_down_to(t_star);
  return enc.encoding();
}

std::vector<double> replay_gop(const StepContext& ctx, std::span<const std::uint8_t> payload,
                               int t_star, std::size_t dim) {
  if (t_star < 1 || t_star > ctx.sched.steps() - 1)
    fail(Errc::MalformedBitstream, "t* = " + std::to_string(t_star) + " outside [1, T-1]");
  std::vector<double> z = initial_state(ctx, dim);
  BitReader reader(payload);
  std::vector<std::uint64_t> seeds;
  for (int t = ctx.sched.steps() - 1; t >= t_star; --t) {
    const ChunkSpec chunks = plan_step_chunks(ctx, t);
    seeds.resize(chunks.chunks.size());
    try {
      for (auto& s : seeds) s = read_elias_delta(reader);
    } catch (const Error& e) {
      fail(Errc::MalformedBitstream, "GOP " + std::to_string(ctx.gop) + ", step " +
                                         std::to_string(t) + ": " + e.what());
    }
    z = decode_step(ctx, t, z, seeds, chunks);
  }
  if (reader.remaining() >= 8)
    fail(Errc::MalformedBitstream, "GOP " + std::to_string(ctx.gop) + ": " +
                                       std::to_string(reader.remaining()) + " unread payload bits");
  if (reader.remaining() && reader.get_bits(static_cast<unsigned>(reader.remaining())) != 0)
    fail(Errc::MalformedBitstream, "GOP " + std::to_string(ctx.gop) + ": nonzero padding bits");
  return z;
}

LatentTensor denoise_from(const StepContext& ctx, std::vector<double> z, int t_star,
                          const LatentShape& shape, DecodeNoise noise) {
  const std::size_t n = z.size();
  std::vector<double> mean(n), sd(n), draw(n);
  const std::uint64_t seed = noise.seed.value_or(ctx.base_seed);
  for (int s = t_star; s >= 1; --s) {
    reverse_distribution(ctx, s - 1, z, mean, sd);
    if (s == 1) {
      z = mean;
      break;
    }
    KeyedStream::derive(seed, ctx.gop, static_cast<std::uint64_t>(s), 0)
        .normals(Purpose::DecoderNoise, 0, draw);
    kernels::mul(sd, draw, draw);
    kernels::axpby(1.0, mean, 1.0, draw, z);
  }
  LatentTensor out(shape);
  ctx.prior.from_coefficients(z, out.values());
  return out;
}

LatentTensor decode_gop(const StepContext& ctx, std::span<const std::uint8_t> payload, int t_star,
                        const LatentShape& shape, DecodeNoise noise) {
  return denoise_from(ctx, replay_gop(ctx, payload, t_star, shape.size()), t_star, shape, noise);
}

}  // namespace fgvc
