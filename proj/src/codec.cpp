#include "fgvc/codec.hpp"

#include <algorithm>
#include <cmath>

#include "fgvc/error.hpp"
#include "fgvc/metrics.hpp"

namespace fgvc {

namespace {

// Samples are mapped from [0, 1] to [-1, 1] before coding.
constexpr double kOffset = 0.5;
constexpr double kScale = 2.0;

LatentTensor to_latent(const VideoTensor& clip, const TransformSpec& spec) {
  LatentTensor lat = transform_forward(clip, spec, kOffset);
  for (double& v : lat.values()) v *= kScale;
  return lat;
}

VideoTensor from_latent(LatentTensor lat, const TransformSpec& spec, std::size_t planes) {
  for (double& v : lat.values()) v /= kScale;
  return transform_inverse(lat, spec, planes, kOffset);
}

std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

TransformSpec transform_of(const BitstreamHeader& h) { return {h.temporal, h.spatial, {}}; }

StepContext context(const PriorModel& prior, const NoiseSchedule& sched, const BitstreamHeader& h,
                    std::uint32_t gop) {
  return {prior, sched, h.marginal() ? ReverseVariance::Marginal : ReverseVariance::Posterior,
          h.base_seed, gop, h.chunk_size, h.kl_cap};
}

std::vector<std::uint8_t> sidecar_bytes(std::span<const double> profile) {
  return serialize_profile(profile);
}

}  // namespace

void CodecConfig::validate() const {
  if (temporal == 0 || spatial == 0) fail(Errc::BadGopParams, "s and d must be positive");
  if (gop_length > 0xffff || overlap > 0xffff || temporal > 0xff || spatial > 0xff)
    fail(Errc::BadGopParams, "GOP parameters exceed header field widths");
  if (overlap >= gop_length) fail(Errc::OverlapTooLarge, "m must be smaller than l");
  if (steps < 2) fail(Errc::InvalidSchedule, "T must be at least 2");
  const int ts = fixed_t_star();
  if (!control && (ts < 1 || ts > steps - 1))
    fail(Errc::InvalidSchedule, "t* = " + std::to_string(ts) + " outside [1, T-1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail(Errc::BadConfig, "gamma must lie in [0, 1]");
  if (chunk_size == 0 || chunk_size > 0xffff || !(kl_cap > 0.0))
    fail(Errc::BadConfig, "chunk size and KL cap must be positive");
  if (prior == PriorId::Sidecar && sidecar.empty())
    fail(Errc::BadConfig, "sidecar prior needs a variance profile");
  if (control) control->validate();
}

VideoTensor pad_video(const VideoTensor& v, std::size_t temporal, std::size_t spatial) {
  const std::size_t f = round_up(v.frames, temporal), h = round_up(v.height, spatial),
                    w = round_up(v.width, spatial);
  if (f == v.frames && h == v.height && w == v.width) return v;
  VideoTensor out(f, h, w, v.channels);
  out.color = v.color;
  out.fps_num = v.fps_num;
  out.fps_den = v.fps_den;
  for (std::size_t t = 0; t < f; ++t)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        for (std::size_t c = 0; c < v.channels; ++c)
          out.at(t, y, x, c) = v.at(std::min(t, v.frames - 1), std::min(y, v.height - 1),
                                    std::min(x, v.width - 1), c);
  return out;
}

VideoTensor crop_video(const VideoTensor& v, std::size_t frames, std::size_t height, std::size_t width) {
  if (frames > v.frames || height > v.height || width > v.width)
    fail(Errc::SizeMismatch, "crop exceeds the decoded volume");
  VideoTensor out(frames, height, width, v.channels);
  out.color = v.color;
  out.fps_num = v.fps_num;
  out.fps_den = v.fps_den;
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x)
        for (std::size_t c = 0; c < v.channels; ++c) out.at(t, y, x, c) = v.at(t, y, x, c);
  return out;
}

BitstreamHeader make_header(const VideoTensor& input, const CodecConfig& cfg) {
  cfg.validate();
  if (input.frames == 0 || input.height == 0 || input.width == 0)
    fail(Errc::ZeroDims, "empty input video");
  if (input.channels > 0xff) fail(Errc::BadDims, "too many channels");
  BitstreamHeader h;
  h.flags = cfg.mode == ReverseVariance::Marginal ? 1 : 0;
  h.frames = static_cast<std::uint32_t>(input.frames);
  h.height = static_cast<std::uint32_t>(input.height);
  h.width = static_cast<std::uint32_t>(input.width);
  h.channels = static_cast<std::uint8_t>(input.channels);
  h.color = static_cast<std::uint8_t>(input.color);
  h.fps_num = static_cast<std::uint32_t>(input.fps_num);
  h.fps_den = static_cast<std::uint32_t>(input.fps_den);
  h.gop_length = static_cast<std::uint16_t>(cfg.gop_length);
  h.overlap = static_cast<std::uint16_t>(cfg.overlap);
  h.temporal = static_cast<std::uint8_t>(cfg.temporal);
  h.spatial = static_cast<std::uint8_t>(cfg.spatial);
  h.steps = static_cast<std::uint32_t>(cfg.steps);
  h.beta_start = cfg.beta_start;
  h.beta_end = cfg.beta_end;
  h.chunk_size = static_cast<std::uint16_t>(cfg.chunk_size);
  h.kl_cap = cfg.kl_cap;
  h.prior = cfg.prior;
  h.amplitude = cfg.law.amplitude;
  h.exponent = cfg.law.exponent;
  if (cfg.prior == PriorId::Sidecar) {
    h.sidecar_hash = profile_hash(sidecar_bytes(cfg.sidecar));
    h.sidecar_count = cfg.sidecar.size();
  }
  h.base_seed = cfg.base_seed;
  h.gamma = cfg.gamma;
  return h;
}

NoiseSchedule header_schedule(const BitstreamHeader& h) {
  return build_schedule(static_cast<int>(h.steps), h.beta_start, h.beta_end);
}

std::vector<Gop> header_gops(const BitstreamHeader& h) {
  return segment_gops(round_up(h.frames, h.temporal), h.gop_length, h.overlap, h.temporal);
}

std::unique_ptr<PriorModel> build_prior(const BitstreamHeader& h, const LatentShape& shape,
                                        std::span<const double> sidecar) {
  const BlockLayout layout{h.channels, h.temporal, h.spatial};
  const PowerLaw law{h.amplitude, h.exponent};
  switch (h.prior) {
    case PriorId::PowerLaw:
      return std::make_unique<SpectralGaussianPrior>(power_law_profile(shape, layout, law), "powerlaw");
    case PriorId::FramewisePowerLaw:
      return std::make_unique<FramewisePrior>(shape.frames, shape.frame_size(),
                                              framewise_power_law_profile(shape, layout, law),
                                              "framewise");
    case PriorId::ChannelProfile: {
      const std::vector<double> prof(h.channel_profile.begin(), h.channel_profile.end());
      return std::make_unique<SpectralGaussianPrior>(broadcast_channel_profile(shape, prof), "channel");
    }
    case PriorId::Sidecar: {
      if (sidecar.empty()) fail(Errc::ProfileMismatch, "bitstream needs its variance-profile sidecar");
      if (profile_hash(sidecar_bytes(sidecar)) != h.sidecar_hash || sidecar.size() != h.sidecar_count)
        fail(Errc::ProfileMismatch, "sidecar does not match the hash in the header");
      std::vector<double> var;
      if (sidecar.size() == shape.channels) {
        var.reserve(shape.size());
        for (std::size_t i = 0; i < shape.size() / shape.channels; ++i)
          var.insert(var.end(), sidecar.begin(), sidecar.end());
      } else if (sidecar.size() == shape.size()) {
        var.assign(sidecar.begin(), sidecar.end());
      } else {
        fail(Errc::ProfileMismatch, "sidecar has " + std::to_string(sidecar.size()) +
                                        " values; need " + std::to_string(shape.channels) +
                                        " per channel or " + std::to_string(shape.size()));
      }
      return std::make_unique<SpectralGaussianPrior>(std::move(var), "sidecar");
    }
  }
  fail(Errc::MalformedBitstream, "unknown prior id");
}

EncodeResult encode_video(const VideoTensor& input, const CodecConfig& cfg_in) {
  CodecConfig cfg = cfg_in;
  const VideoTensor padded = pad_video(input, cfg.temporal, cfg.spatial);
  const TransformSpec spec{cfg.temporal, cfg.spatial, {}};
  const std::vector<Gop> gops = segment_gops(padded.frames, cfg.gop_length, cfg.overlap, cfg.temporal);

  std::vector<LatentTensor> targets;
  for (const Gop& g : gops)
    targets.push_back(to_latent(padded.slice(g.start, g.length), spec));
  if ((cfg.prior == PriorId::PowerLaw || cfg.prior == PriorId::FramewisePowerLaw) && cfg.fit_prior)
    cfg.law = fit_power_law_profile(targets, spec.layout(padded.channels));

  EncodeResult res;
  BitstreamHeader h = make_header(input, cfg);
  if (cfg.prior == PriorId::ChannelProfile) {
    // Rounded to f32 first so encoder and decoder share the exact values.
    for (double v : fit_channel_profile(targets, spec.layout(padded.channels)))
      h.channel_profile.push_back(static_cast<float>(v));
  }
  const NoiseSchedule sched = header_schedule(h);
  std::vector<RpSample> history;
  std::optional<int> prev_t;
  for (std::size_t k = 0; k < gops.size(); ++k) {
    const Gop& g = gops[k];
    const LatentTensor& y = targets[k];
    const auto prior = build_prior(h, y.shape(), cfg.sidecar);
    const StepContext ctx = context(*prior, sched, h, static_cast<std::uint32_t>(k));
    const VideoTensor original = padded.slice(g.start, g.length);
    const double pixels = static_cast<double>(g.length * padded.height * padded.width);

    auto quality_at = [&](const GopEncoding& enc, int t) {
      const LatentTensor rec = decode_gop(ctx, enc.payload(t), t, y.shape());
      VideoTensor frames = from_latent(rec, spec, padded.channels);
      frames.color = padded.color;
      return mean_ms_ssim(original, frames);
    };

    GopEncoder encoder(ctx, y);
    GopReport rep;
    rep.index = k;
    if (cfg.control) {
      const int t_lo = lowest_codable_step(ctx);
      encoder.encode_down_to(t_lo);
      const GopEncoding& enc = encoder.encoding();
      RateTable table{t_lo, {}};
      for (int t = t_lo; t <= cfg.steps - 1; ++t) table.bpp.push_back(enc.rate_table[static_cast<std::size_t>(t)] / pixels);
      QualityOracle oracle([&](int t) { return quality_at(enc, t); });
      const GopControl ctl = control_gop(oracle, table, *cfg.control, history, prev_t);
      rep.t_star = ctl.result.t_star;
      rep.quality = ctl.result.P;
      rep.decodes = ctl.decodes;
      rep.control_decodes = ctl.control_decodes;
      rep.warm = ctl.warm;
      rep.converged = ctl.result.converged;
      rep.trace = ctl.result.trace;
      history = ctl.result.phi;
      // Keep the chosen point available as the next alignment anchor.
      if (std::none_of(history.begin(), history.end(), [&](const RpSample& s) { return s.t == rep.t_star; }))
        history.push_back({table.at(rep.t_star), rep.quality, rep.t_star, false});
      prev_t = rep.t_star;
    } else {
      rep.t_star = cfg.fixed_t_star();
      encoder.encode_down_to(rep.t_star);
      rep.quality = quality_at(encoder.encoding(), rep.t_star);
      rep.decodes = 1;
    }
    const GopEncoding& enc = encoder.encoding();
    auto payload = enc.payload(rep.t_star);
    rep.bits = enc.payload_bits(rep.t_star);
    rep.bpp = static_cast<double>(rep.bits) / pixels;
    rep.exhausted_chunks = enc.exhausted_chunks;
    h.gops.push_back({static_cast<std::uint32_t>(rep.t_star), static_cast<std::uint32_t>(g.length),
                      static_cast<std::uint32_t>(payload.size())});
    res.stream.payloads.push_back(std::move(payload));
    res.total_payload_bits += static_cast<double>(rep.bits);
    res.gops.push_back(std::move(rep));
  }
  res.stream.header = h;
  res.bpp = res.total_payload_bits /
            static_cast<double>(distinct_frames(gops) * padded.height * padded.width);
  return res;
}

VideoTensor decode_video(const Bitstream& stream, const DecodeOptions& options) {
  const BitstreamHeader& h = stream.header;
  const std::vector<Gop> gops = header_gops(h);
  if (gops.size() != h.gops.size())
    fail(Errc::MalformedBitstream, "header lists " + std::to_string(h.gops.size()) +
                                       " GOPs, segmentation implies " + std::to_string(gops.size()));
  if (stream.payloads.size() != gops.size())
    fail(Errc::MalformedBitstream, "missing GOP payloads");
  const NoiseSchedule sched = header_schedule(h);
  const TransformSpec spec = transform_of(h);
  const std::size_t hp = round_up(h.height, h.spatial), wp = round_up(h.width, h.spatial);
  VideoTensor out(round_up(h.frames, h.temporal), hp, wp, h.channels);
  out.color = static_cast<ColorSpace>(h.color);
  out.fps_num = static_cast<int>(h.fps_num);
  out.fps_den = static_cast<int>(h.fps_den);

  LatentTensor prev;
  for (std::size_t k = 0; k < gops.size(); ++k) {
    const Gop& g = gops[k];
    if (h.gops[k].coded_frames != g.length)
      fail(Errc::MalformedBitstream, "GOP " + std::to_string(k) + " frame count disagrees with segmentation");
    VideoTensor probe(g.length, hp, wp, h.channels);
    const LatentShape shape = latent_shape_for(probe, spec);
    const auto prior = build_prior(h, shape, options.sidecar);
    const StepContext ctx = context(*prior, sched, h, static_cast<std::uint32_t>(k));
    LatentTensor lat = decode_gop(ctx, stream.payloads[k], static_cast<int>(h.gops[k].t_star), shape,
                                  DecodeNoise{options.noise_seed});
    if (options.fusion && k > 0 && g.overlap > 0 && h.gamma != 1.0)
      lat = fuse_overlap(prev, lat, g.overlap / h.temporal, constant_weight(h.gamma));
    VideoTensor frames = from_latent(lat, spec, h.channels);
    for (std::size_t f = 0; f < g.length; ++f) {
      const auto src = frames.frame(f);
      std::copy(src.begin(), src.end(), out.frame(g.start + f).begin());
    }
    prev = std::move(lat);
  }
  return crop_video(out, h.frames, h.height, h.width);
}

}  // namespace fgvc
