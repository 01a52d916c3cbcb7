#include "fgvc/rcc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fgvc/kernels.hpp"

namespace fgvc {

double kl_bits(const GaussianPair& pair) {
  if (!(pair.var > 0.0)) fail(Errc::NonpositiveVariance, "Gaussian pair variance must be > 0");
  if (pair.mu_q.size() != pair.mu_p.size())
    fail(Errc::ShapeMismatch, "Gaussian pair means differ in length");
  return kernels::sum_sq_diff(pair.mu_q, pair.mu_p) / (2.0 * pair.var) * std::numbers::log2e;
}

double kl_bits_diag(std::span<const double> mu_q, double var_q, std::span<const double> mu_p,
                    std::span<const double> var_p) {
  if (!(var_q > 0.0)) fail(Errc::NonpositiveVariance, "target variance must be > 0");
  double nats = 0.0;
  for (std::size_t i = 0; i < mu_q.size(); ++i) {
    const double vp = var_p[i];
    if (!(vp > 0.0)) fail(Errc::NonpositiveVariance, "prior variance must be > 0");
    const double d = mu_q[i] - mu_p[i];
    nats += 0.5 * ((var_q + d * d) / vp - 1.0 + std::log(vp / var_q));
  }
  return nats * std::numbers::log2e;
}

std::uint64_t candidate_budget(double kl) {
  const double exponent = std::max(kl, 0.0) + 5.0;
  if (exponent >= 20.0) return kMaxCandidateBudget;
  return static_cast<std::uint64_t>(std::ceil(std::exp2(exponent)));
}

std::size_t simulate_discrete(const KeyedStream& key, std::uint64_t n, std::span<const double> p) {
  const double u = key.uniform(Purpose::Discrete, n);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  // Rounding in the cumulative sum: fall back to the last outcome with mass.
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] > 0.0) return i;
  return 0;
}

DiscretePfrResult pfr_encode_discrete(std::span<const double> p, std::span<const double> q,
                                      const KeyedStream& key, std::uint64_t budget) {
  if (p.size() != q.size() || p.empty())
    fail(Errc::ShapeMismatch, "discrete p and q must share a non-empty outcome set");
  double w_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i)
    if (q[i] > 0.0) w_min = std::min(w_min, p[i] / q[i]);
  if (!(w_min > 0.0))
    fail(Errc::ZeroDensity, "p vanishes where q has mass; inf p/q = 0");
  const auto res = pfr_encode([&](std::uint64_t n) { return simulate_discrete(key, n, p); },
                              [&](std::size_t z) { return std::log(p[z]); },
                              [&](std::size_t z) { return std::log(q[z]); }, key, budget,
                              std::log(w_min));
  return {res.index, res.sample, res.exhausted};
}

void simulate_gaussian(const KeyedStream& key, std::uint64_t n, std::span<const double> mu_p,
                       std::span<const double> sd_p, std::span<double> out) {
  key.normals(Purpose::Candidate, n, out);
  kernels::mul(sd_p, out, out);
  kernels::axpy(1.0, mu_p, out);
}

GaussianPfrResult pfr_encode_gaussian(const GaussianChunk& chunk, const KeyedStream& key,
                                      std::uint64_t budget) {
  const std::size_t n = chunk.mu_p.size();
  if (chunk.mu_q.size() != n || chunk.sd_p.size() != n)
    fail(Errc::ShapeMismatch, "Gaussian chunk vectors differ in length");
  if (!(chunk.var_q > 0.0)) fail(Errc::NonpositiveVariance, "target variance must be > 0");

  // log p(z) - log q(z) for z = mu_p + sd_p * g:
  //   -|g|^2/2 - sum log sd_p + (n/2) log var_q + |sd_p*g + mu_p - mu_q|^2 / (2 var_q)
  std::vector<double> offset(n);  // mu_q - mu_p
  kernels::axpby(1.0, chunk.mu_q, -1.0, chunk.mu_p, offset);
  double log_norm = 0.5 * static_cast<double>(n) * std::log(chunk.var_q);
  for (double s : chunk.sd_p) log_norm -= std::log(s);
  const double inv_two_var_q = 0.5 / chunk.var_q;

  std::vector<double> g(n), scaled(n);
  const auto sel = pfr_select(
      [&](std::uint64_t idx) {
        key.normals(Purpose::Candidate, idx, g);
        kernels::mul(chunk.sd_p, g, scaled);
        return -0.5 * kernels::sum_sq(g) + log_norm +
               kernels::sum_sq_diff(scaled, offset) * inv_two_var_q;
      },
      key, budget);

  GaussianPfrResult out;
  out.index = sel.index;
  out.exhausted = sel.exhausted;
  out.sample.resize(n);
  simulate_gaussian(key, sel.index, chunk.mu_p, chunk.sd_p, out.sample);
  return out;
}

std::vector<double> pfr_decode_gaussian(std::uint64_t index, std::span<const double> mu_p,
                                        std::span<const double> sd_p, const KeyedStream& key) {
  if (index == 0) fail(Errc::SeedOutOfRange, "seed indices start at 1");
  std::vector<double> out(mu_p.size());
  simulate_gaussian(key, index, mu_p, sd_p, out);
  return out;
}

ChunkSpec plan_chunks(std::span<const double> expected_kl_bits, std::size_t chunk_size,
                      double kl_cap) {
  if (chunk_size == 0) fail(Errc::BadGopParams, "chunk size must be positive");
  ChunkSpec spec;
  spec.kl_cap = kl_cap;
  Chunk cur;
  for (std::size_t i = 0; i < expected_kl_bits.size(); ++i) {
    const double e = expected_kl_bits[i];
    if (e > kl_cap)
      fail(Errc::ChunkTooHot, "coefficient " + std::to_string(i) + " alone expects " +
                                  std::to_string(e) + " bits, above the cap of " +
                                  std::to_string(kl_cap));
    if (cur.size() > 0 && (cur.size() == chunk_size || cur.expected_kl_bits + e > kl_cap)) {
      spec.chunks.push_back(cur);
      cur = Chunk{i, i, 0.0};
    }
    cur.end = i + 1;
    cur.expected_kl_bits += e;
  }
  if (cur.size() > 0) spec.chunks.push_back(cur);
  return spec;
}

namespace {

void check_step_range(const StepContext& ctx, int t, int lowest) {
  if (t < lowest || t > ctx.sched.steps() - 1)
    fail(Errc::InvalidSchedule, "step " + std::to_string(t) + " outside [" +
                                    std::to_string(lowest) + ", " +
                                    std::to_string(ctx.sched.steps() - 1) + "]");
}

void check_coded_step(const StepContext& ctx, int t) { check_step_range(ctx, t, 1); }

}  // namespace

ChunkSpec plan_step_chunks(const StepContext& ctx, int t) {
  check_coded_step(ctx, t);
  std::vector<double> expected(ctx.prior.dimensionality());
  ctx.prior.expected_step_kl_bits(t + 1, ctx.sched, ctx.mode, expected);
  return plan_chunks(expected, ctx.chunk_size, ctx.kl_cap);
}

void reverse_distribution(const StepContext& ctx, int t, std::span<const double> z_next,
                          std::span<double> mean, std::span<double> sd) {
  check_step_range(ctx, t, 0);
  std::vector<double> eps(z_next.size());
  ctx.prior.predict_eps_coefficients(z_next, t + 1, ctx.sched, eps);
  reverse_mean_into(ctx.sched, t + 1, z_next, eps, mean);
  ctx.prior.reverse_variances(t + 1, ctx.sched, ctx.mode, sd);
  for (double& s : sd) s = std::sqrt(s);
}

StepEncoding encode_step(const StepContext& ctx, int t, std::span<const double> z_next,
                         std::span<const double> y, const ChunkSpec& chunks) {
  check_coded_step(ctx, t);
  const std::size_t n = ctx.prior.dimensionality();
  if (z_next.size() != n || y.size() != n)
    fail(Errc::ShapeMismatch, "encode_step: state and target must match the prior dimension");
  std::vector<double> mean_p(n), sd_p(n), mean_q(n), var_p(n);
  reverse_distribution(ctx, t, z_next, mean_p, sd_p);
  posterior_mean_into(ctx.sched, t + 1, z_next, y, mean_q);
  const double var_q = ctx.sched.beta_tilde(t + 1);
  for (std::size_t i = 0; i < n; ++i) var_p[i] = sd_p[i] * sd_p[i];

  StepEncoding enc;
  enc.z_t.resize(n);
  enc.records.reserve(chunks.chunks.size());
  const std::span<const double> mq(mean_q), mp(mean_p), sp(sd_p), vp(var_p);
  for (std::size_t j = 0; j < chunks.chunks.size(); ++j) {
    const Chunk& c = chunks.chunks[j];
    const auto key = KeyedStream::derive(ctx.base_seed, ctx.gop, static_cast<std::uint64_t>(t), j);
    const GaussianChunk g{mq.subspan(c.begin, c.size()), var_q, mp.subspan(c.begin, c.size()),
                          sp.subspan(c.begin, c.size())};
    const double kl = kl_bits_diag(g.mu_q, var_q, g.mu_p, vp.subspan(c.begin, c.size()));
    const auto res = pfr_encode_gaussian(g, key, candidate_budget(kl));
    std::copy(res.sample.begin(), res.sample.end(), enc.z_t.begin() + static_cast<std::ptrdiff_t>(c.begin));
    enc.records.push_back({ctx.gop, static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(j),
                           res.index});
    enc.coded_bits += elias_delta_length(res.index);
    enc.kl_bits += kl;
    // Without exact termination every search runs its full budget; only a
    // budget truncated by the global cap is worth reporting.
    enc.exhausted += res.exhausted && kl + 5.0 > std::log2(double(kMaxCandidateBudget)) ? 1 : 0;
  }
  return enc;
}

std::vector<double> decode_step(const StepContext& ctx, int t, std::span<const double> z_next,
                                std::span<const std::uint64_t> seeds, const ChunkSpec& chunks) {
  check_coded_step(ctx, t);
  const std::size_t n = ctx.prior.dimensionality();
  if (z_next.size() != n) fail(Errc::ShapeMismatch, "decode_step: state size mismatch");
  if (seeds.size() != chunks.chunks.size())
    fail(Errc::MalformedBitstream, "step " + std::to_string(t) + " carries " +
                                       std::to_string(seeds.size()) + " seeds for " +
                                       std::to_string(chunks.chunks.size()) + " chunks");
  std::vector<double> mean_p(n), sd_p(n), z(n);
  reverse_distribution(ctx, t, z_next, mean_p, sd_p);
  const std::span<const double> mp(mean_p), sp(sd_p);
  for (std::size_t j = 0; j < chunks.chunks.size(); ++j) {
    const Chunk& c = chunks.chunks[j];
    if (seeds[j] == 0) fail(Errc::SeedOutOfRange, "seed index 0 at step " + std::to_string(t));
    const auto key = KeyedStream::derive(ctx.base_seed, ctx.gop, static_cast<std::uint64_t>(t), j);
    simulate_gaussian(key, seeds[j], mp.subspan(c.begin, c.size()), sp.subspan(c.begin, c.size()),
                      std::span<double>(z).subspan(c.begin, c.size()));
  }
  return z;
}

}  // namespace fgvc
