// Acceptance suite: one PASS/FAIL line per criterion.
//   fgvc_acceptance               run all criteria
//   fgvc_acceptance --criterion N run one (exit status 0 iff it passes)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "bd_oracle.hpp"
#include "fgvc/analysis.hpp"
#include "fgvc/bitio.hpp"
#include "fgvc/codec.hpp"
#include "fgvc/metrics.hpp"
#include "fgvc/qctrl.hpp"
#include "fgvc/rcc.hpp"
#include "fgvc/rng.hpp"
#include "fgvc/synth.hpp"
#include "fgvc/video_io.hpp"

using namespace fgvc;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// 1. Decoder reproduces the encoder's selected sample bit for bit.
Verdict pfr_round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  int ok = 0;
  const int pairs = 1000;
  for (int i = 0; i < pairs; ++i) {
    // Random diagonal pairs at chunk-like KLs (0-6 bits, as the planner allows).
    std::vector<double> mu_p, sd_p, mu_q, var_p;
    double var_q = 0.0, kl = 1e9;
    while (kl > 6.0) {
      const std::size_t n = 1 + rng() % 16;
      mu_p.assign(n, 0.0), sd_p.assign(n, 0.0), mu_q.assign(n, 0.0), var_p.assign(n, 0.0);
      double min_sd = 1e9;
      for (std::size_t k = 0; k < n; ++k) {
        mu_p[k] = 2.0 * u(rng) - 1.0;
        sd_p[k] = 0.5 + u(rng);
        min_sd = std::min(min_sd, sd_p[k]);
      }
      var_q = min_sd * min_sd * (0.7 + 0.3 * u(rng));
      const double spread = 0.05 + 0.3 * u(rng);
      for (std::size_t k = 0; k < n; ++k) {
        mu_q[k] = mu_p[k] + spread * sd_p[k] * g(rng);
        var_p[k] = sd_p[k] * sd_p[k];
      }
      kl = kl_bits_diag(mu_q, var_q, mu_p, var_p);
    }
    const auto key = KeyedStream::derive(77, 0, static_cast<std::uint64_t>(i), 0);
    const auto enc = pfr_encode_gaussian({mu_q, var_q, mu_p, sd_p}, key, candidate_budget(kl));
    const auto dec = pfr_decode_gaussian(enc.index, mu_p, sd_p, key);
    ok += enc.index >= 1 && dec == enc.sample;
  }
  const double secs = seconds_since(t0);
  return {ok == pairs && secs < 10.0,
          std::to_string(ok) + "/" + std::to_string(pairs) + " bit-identical, " + fmt(secs, 3) +
              " s (limit 10 s)"};
}

// 2. Exact-termination PFR samples q on 8 outcomes.
Verdict pfr_distribution() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2002);
  std::gamma_distribution<double> gam(1.0);
  const int trials = 50000;
  bool pass = true;
  std::ostringstream detail;
  for (int pair = 0; pair < 3; ++pair) {
    std::vector<double> p(8), q(8);
    for (int i = 0; i < 8; ++i) p[i] = 0.02 + gam(rng), q[i] = 0.02 + gam(rng);
    const double sp = std::accumulate(p.begin(), p.end(), 0.0), sq = std::accumulate(q.begin(), q.end(), 0.0);
    for (int i = 0; i < 8; ++i) p[i] /= sp, q[i] /= sq;
    std::vector<double> counts(8, 0.0);
    std::size_t exhausted = 0;
    for (int n = 0; n < trials; ++n) {
      const auto r = pfr_encode_discrete(p, q, KeyedStream::derive(31, pair, 0, n));
      exhausted += r.exhausted;
      counts[r.outcome] += 1.0;
    }
    double tv = 0.0, chi2 = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double expect = q[i] * trials;
      tv += 0.5 * std::abs(counts[i] / trials - q[i]);
      chi2 += (counts[i] - expect) * (counts[i] - expect) / expect;
    }
    const double pval = boost::math::cdf(boost::math::complement(boost::math::chi_squared(7), chi2));
    pass = pass && tv <= 0.02 && pval > 0.01 && exhausted == 0;
    detail << "pair " << pair << ": TV " << fmt(tv, 3) << " p " << fmt(pval, 3) << "; ";
  }
  const double secs = seconds_since(t0);
  detail << fmt(secs, 3) << " s (limit 60 s)";
  return {pass && secs < 60.0, detail.str()};
}

// 3. Mean Elias-delta index length tracks the chunk KL.
Verdict rate_law() {
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> u(0.95, 1.05);
  std::normal_distribution<double> g;
  const std::size_t n = 16;
  bool pass = true;
  std::ostringstream detail;
  for (double target : {0.5, 1.0, 2.0, 4.0}) {
    // Random diagonal prior; q slightly narrower with its mean offset scaled
    // so that KL(q || p) equals the target exactly.
    std::vector<double> mu_p(n, 0.0), sd_p(n), var_p(n), dir(n), mu_q(n);
    double min_var = 1e9;
    for (std::size_t k = 0; k < n; ++k) {
      sd_p[k] = u(rng);
      var_p[k] = sd_p[k] * sd_p[k];
      min_var = std::min(min_var, var_p[k]);
      dir[k] = g(rng);
    }
    const double var_q = 0.98 * min_var;
    double var_nats = 0.0, dir_norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = var_q / var_p[k];
      var_nats += 0.5 * (r - 1.0 - std::log(r));
      dir_norm += dir[k] * dir[k] / var_p[k];
    }
    const double mean_nats = target * std::log(2.0) - var_nats;
    const double scale = std::sqrt(2.0 * mean_nats / dir_norm);
    for (std::size_t k = 0; k < n; ++k) mu_q[k] = scale * dir[k];
    const double kl = kl_bits_diag(mu_q, var_q, mu_p, var_p);

    const int trials = 10000;
    double bits = 0.0;
    for (int i = 0; i < trials; ++i) {
      const auto key = KeyedStream::derive(41, static_cast<std::uint32_t>(target * 8), 0, i);
      bits += elias_delta_length(pfr_encode_gaussian({mu_q, var_q, mu_p, sd_p}, key, candidate_budget(kl)).index);
    }
    const double mean = bits / trials;
    const double hi = kl + std::log2(kl + 1.0) + 6.0;
    pass = pass && std::abs(kl - target) < 1e-9 && mean >= kl && mean <= hi;
    detail << "KL " << target << ": " << fmt(mean, 4) << " in [" << fmt(kl, 4) << ", " << fmt(hi, 4) << "]; ";
  }
  return {pass, detail.str()};
}

CodecConfig base_config(std::size_t l, std::size_t m, int steps, double beta_end) {
  CodecConfig c;
  c.gop_length = l;
  c.overlap = m;
  c.temporal = 4;
  c.spatial = 8;
  c.steps = steps;
  c.beta_end = beta_end;
  c.base_seed = 2024;
  return c;
}

// 4. Reconstruction MSE falls strictly along a t* sweep.
Verdict progressive_scaling() {
  const auto t0 = Clock::now();
  const VideoTensor v = gaussian_ar1_video(48, 32, 32, 0.9, 0.8, 0.15, 404);
  CodecConfig c = base_config(48, 0, 64, 0.1);
  std::vector<double> mses;
  std::ostringstream detail;
  for (int t : {60, 50, 40, 30, 20, 12}) {
    c.t_star = t;
    const EncodeResult r = encode_video(v, c);
    mses.push_back(mse(v, decode_video(r.stream)));
    detail << "t*=" << t << " bpp " << fmt(r.bpp, 3) << " mse " << fmt(mses.back(), 4) << "; ";
  }
  bool strictly = true;
  for (std::size_t i = 1; i < mses.size(); ++i) strictly = strictly && mses[i] < mses[i - 1];
  const double secs = seconds_since(t0);
  detail << fmt(secs, 3) << " s (limit 300 s)";
  return {strictly && secs < 300.0, detail.str()};
}

// 5. Joint vs frame-wise prior gap on 4-frame 4x4 AR(1) sources.
Verdict theory_gap() {
  const NoiseSchedule sched = build_schedule(200, 1e-4, 0.05);
  const int t_star = 1;
  double worst_identity = 0.0, min_gap = std::numeric_limits<double>::infinity();
  double analytic_09 = 0.0;
  for (double rho : {0.0, 0.5, 0.9}) {
    const auto spec = GaussianSourceSpec::ar1(4, 4, 4, rho, 0.5);
    for (int t = t_star; t <= sched.steps() - 1; ++t) {
      const double gap = kl_framewise_step(spec, sched, t) - kl_joint_step(spec, sched, t);
      worst_identity = std::max(worst_identity, std::abs(gap - conditional_mi_gap(spec, sched, t)));
      min_gap = std::min(min_gap, gap);
    }
    if (rho == 0.9) analytic_09 = accumulate_gap(spec, sched, t_star);
  }
  const auto spec = GaussianSourceSpec::ar1(4, 4, 4, 0.9, 0.5);
  const MeasuredGap measured = measure_coded_gap(spec, sched, t_star, 20, 5005, 64, 8.0);
  const double rel = std::abs(measured.total - analytic_09) / analytic_09;
  const bool a = worst_identity <= 1e-9;
  const bool b = min_gap >= -1e-12;
  const bool c = rel <= 0.15;
  std::ostringstream detail;
  detail << "(a) max |gap - MI| " << fmt(worst_identity, 3) << (a ? " ok" : " FAIL") << "; (b) min gap "
         << fmt(min_gap, 3) << (b ? " ok" : " FAIL") << "; (c) rho 0.9 analytic " << fmt(analytic_09, 5)
         << " bits, measured " << fmt(measured.total, 5) << " +- " << fmt(measured.total_sd / std::sqrt(20.0), 3)
         << " (20 runs), rel err " << fmt(rel, 3) << " (limit 0.15)" << (c ? " ok" : " FAIL");
  return {a && b && c, detail.str()};
}

// 6. Bits per distinct pixel vs bits per coded pixel with l=48, m=4, K=2.
Verdict overlap_overhead() {
  const VideoTensor v = gaussian_ar1_video(92, 16, 16, 0.9, 0.8, 0.15, 606);
  CodecConfig c = base_config(48, 4, 32, 0.15);
  c.t_star = 24;
  const EncodeResult r = encode_video(v, c);
  double per_gop = 0.0;
  for (const GopReport& g : r.gops) per_gop += g.bpp;
  per_gop /= static_cast<double>(r.gops.size());
  const double factor = r.bpp / per_gop;
  const double expect = 96.0 / 92.0;
  const double dev = std::abs(factor / expect - 1.0);
  return {r.gops.size() == 2 && dev <= 0.005,
          "K=" + std::to_string(r.gops.size()) + ", inflation " + fmt(factor, 6) + " vs 96/92 = " +
              fmt(expect, 6) + " (+" + fmt(100.0 * (factor - 1.0), 4) + "%), deviation " +
              fmt(100.0 * dev, 3) + "% (limit 0.5%)"};
}

// 7. Quality control convergence, cold and warm.
Verdict quality_control() {
  const auto t0 = Clock::now();
  int good = 0;
  std::ostringstream detail;
  for (int s = 0; s < 10; ++s) {
    // Texture variance grows 30% over the sequence, so each GOP needs a new t*.
    // 64x64 keeps MS-SSIM jitter per step well below eps.
    const double sd0 = 0.10 + 0.005 * s, sd1 = 1.3 * sd0;
    const VideoTensor v = drifting_variance_video(24, 64, 64, 0.9, 0.8, sd0, sd1, 700 + s);
    CodecConfig c = base_config(8, 0, 256, 0.025);
    c.control = ControlConfig{};
    c.control->eps = 0.005;
    c.control->P_tar = 0.7;
    const EncodeResult r = encode_video(v, c);
    bool ok = true;
    detail << "seq " << s << " [";
    for (const GopReport& g : r.gops) {
      const bool within = std::abs(g.quality - c.control->P_tar) <= c.control->eps;
      const bool budget = g.index == 0 ? (!g.warm && g.control_decodes <= 7) : (g.warm && g.control_decodes <= 3);
      ok = ok && within && budget;
      detail << (g.index ? " " : "") << (g.warm ? "w" : "c") << g.control_decodes << ":" << fmt(g.quality, 4);
    }
    detail << "]" << (ok ? "" : "x") << "; ";
    good += ok;
  }
  detail << good << "/10 sequences (need 8), " << fmt(seconds_since(t0), 3) << " s";
  return {good >= 8, detail.str()};
}

// 8. Power law fits measured anchors at least as well as linear and log fits.
Verdict surrogate_superiority() {
  int wins = 0;
  std::ostringstream detail;
  for (int s = 0; s < 10; ++s) {
    const double rho_t = 0.5 + 0.05 * s, sd = 0.08 + 0.012 * s;
    const VideoTensor v = gaussian_ar1_video(8, 32, 32, rho_t, 0.8, sd, 800 + s);
    CodecConfig c = base_config(8, 0, 64, 0.1);
    RateTable grid{1, std::vector<double>(63, 1.0)};
    std::vector<RpSample> phi;
    for (int t : anchor_timesteps(grid, 5)) {
      c.t_star = t;
      const EncodeResult r = encode_video(v, c);
      phi.push_back({r.bpp, mean_ms_ssim(v, decode_video(r.stream)), t, false});
    }
    const double pw = fit_power_law(phi).fit_r2, li = fit_linear(phi).fit_r2, lg = fit_logarithmic(phi).fit_r2;
    const bool win = pw >= li && pw >= lg;
    wins += win;
    detail << "set " << s << " R2 pow " << fmt(pw, 4) << " lin " << fmt(li, 4) << " log " << fmt(lg, 4)
           << (win ? "" : " x") << "; ";
  }
  detail << wins << "/10 sets (need 8)";
  return {wins >= 8, detail.str()};
}

// 9. Overlap plus fusion smooths GOP boundaries relative to no overlap.
Verdict fusion_ablation() {
  int better = 0;
  std::ostringstream detail;
  auto boundaries = [](const Bitstream& s, std::size_t m) {
    std::vector<std::size_t> b;
    for (const Gop& g : header_gops(s.header)) {
      if (g.index == 0) continue;
      b.push_back(g.start);
      if (m > 0 && g.start + m < s.header.frames) b.push_back(g.start + m);
    }
    return b;
  };
  // Context only: the same m=4 stream decoded with fusion switched off.
  int fusion_helps = 0;
  for (int s = 0; s < 5; ++s) {
    const VideoTensor v = moving_texture_video(40, 32, 32, 0.5 + 0.25 * s, 0.25 * s, 900 + s);
    double disc[2];
    for (int arm = 0; arm < 2; ++arm) {
      const std::size_t m = arm == 0 ? 4 : 0;
      CodecConfig c = base_config(16, m, 64, 0.1);
      c.gamma = 0.5;
      c.t_star = 24;
      const Bitstream stream = encode_video(v, c).stream;
      const auto b = boundaries(stream, m);
      disc[arm] = boundary_discontinuity(decode_video(stream), b);
      if (m > 0) {
        DecodeOptions off;
        off.fusion = false;
        fusion_helps += disc[arm] <= boundary_discontinuity(decode_video(stream, off), b);
      }
    }
    better += disc[0] <= disc[1];
    detail << "clip " << s << " m4 " << fmt(disc[0], 4) << " m0 " << fmt(disc[1], 4) << "; ";
  }
  detail << better << "/5 clips (need 5); same-stream fusion on <= off: " << fusion_helps << "/5";
  return {better == 5, detail.str()};
}

RateQualityCurve random_curve(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RateQualityCurve c;
  double r = 0.01 + 0.3 * u(rng), q = 0.5 + 0.2 * u(rng);
  const int n = 4 + static_cast<int>(rng() % 3);
  for (int i = 0; i < n; ++i) {
    c.points.emplace_back(r, q);
    r *= 1.1 + 1.5 * u(rng);
    q += 0.01 + 0.08 * u(rng);
  }
  return c;
}

// 10. BD-rate against a dense numerical-integration oracle.
Verdict bd_oracle() {
  std::mt19937_64 rng(1010);
  double worst = 0.0;
  int compared = 0;
  while (compared < 100) {
    const RateQualityCurve a = random_curve(rng), b = random_curve(rng);
    const auto got = bd_rate(a, b);
    const double lo = std::max(a.points.front().second, b.points.front().second);
    const double hi = std::min(a.points.back().second, b.points.back().second);
    if (!(hi > lo)) {
      if (got) return {false, "overlap-free pair returned a value"};
      continue;
    }
    if (!got) return {false, "overlapping pair returned N/A"};
    const double want = test::bd_rate_oracle(a, b);
    worst = std::max(worst, std::abs(*got - want) / std::max(std::abs(want), 1.0));
    ++compared;
  }
  const RateQualityCurve a = random_curve(rng);
  RateQualityCurve half = a;
  for (auto& [r, q] : half.points) r *= 0.5;
  const auto self = bd_rate(a, a), shifted = bd_rate(a, half);
  const bool pass = worst <= 1e-3 && self && *self == 0.0 && shifted && std::abs(*shifted + 50.0) <= 0.1;
  return {pass, "max rel err " + fmt(worst, 3) + " over 100 pairs (limit 1e-3); bd_rate(A,A) = " +
                    format_bd(self) + "; half rate " + format_bd(shifted)};
}

// 11. Two full encode+decode passes over a corpus are byte-identical.
Verdict determinism() {
  const std::vector<VideoTensor> corpus{
      gaussian_ar1_video(20, 24, 24, 0.9, 0.7, 0.12, 1101),
      drifting_variance_video(16, 16, 32, 0.8, 0.6, 0.05, 0.2, 1102),
      moving_texture_video(24, 32, 16, 1.0, 0.5, 1103),
  };
  auto pass_once = [&](std::vector<std::vector<std::uint8_t>>& streams,
                       std::vector<std::vector<std::uint8_t>>& videos) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      CodecConfig c = base_config(8, 4, 64, 0.1);
      c.t_star = 30;
      if (i == 1) {
        c.control = ControlConfig{};
        c.control->P_tar = 0.8;
      }
      const auto bytes = serialize_bitstream(encode_video(corpus[i], c).stream);
      streams.push_back(bytes);
      videos.push_back(serialize_y4m(make_y4m(decode_video(parse_bitstream(bytes)))));
    }
  };
  std::vector<std::vector<std::uint8_t>> s1, v1, s2, v2;
  pass_once(s1, v1);
  pass_once(s2, v2);
  std::size_t bytes = 0;
  for (const auto& s : s1) bytes += s.size();
  return {s1 == s2 && v1 == v2, std::to_string(corpus.size()) + " clips, " + std::to_string(bytes) +
                                    " bitstream bytes; bitstreams " + (s1 == s2 ? "identical" : "DIFFER") +
                                    ", reconstructions " + (v1 == v2 ? "identical" : "DIFFER")};
}

struct Criterion {
  const char* name;
  std::function<Verdict()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"PFR round trip", pfr_round_trip},
      {"PFR distribution (discrete oracle)", pfr_distribution},
      {"rate law", rate_law},
      {"progressive scaling", progressive_scaling},
      {"theory gap", theory_gap},
      {"overlap overhead", overlap_overhead},
      {"quality control", quality_control},
      {"surrogate superiority", surrogate_superiority},
      {"fusion ablation", fusion_ablation},
      {"BD-rate oracle", bd_oracle},
      {"determinism", determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: fgvc_acceptance [--criterion N]\n";
      return 2;
    }
  }
  const auto& all = criteria();
  if (only < 0 || only > static_cast<int>(all.size())) {
    std::cerr << "criterion must be in 1.." << all.size() << '\n';
    return 2;
  }
  bool ok = true;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = all[i].run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    ok = ok && v.pass;
    std::cout << "criterion " << i + 1 << " " << (v.pass ? "PASS" : "FAIL") << " " << all[i].name << ": "
              << v.detail << " [" << fmt(seconds_since(t0), 3) << " s]" << std::endl;
  }
  return ok ? 0 : 1;
}
