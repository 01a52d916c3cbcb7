#include "fgvc/qctrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fgvc/error.hpp"

namespace fgvc {

namespace {

void check_fit_input(std::span<const RpSample> phi, bool need_positive_p) {
  if (phi.size() < 2) fail(Errc::DegenerateFit, "need at least 2 samples, got " +
                                                    std::to_string(phi.size()));
  for (const RpSample& s : phi) {
    if (!(s.R > 0.0) || !std::isfinite(s.R) || !std::isfinite(s.P))
      fail(Errc::DegenerateFit, "sample at t=" + std::to_string(s.t) + " has R <= 0 or non-finite");
    if (need_positive_p && !(s.P > 0.0))
      fail(Errc::DegenerateFit, "power-law fit needs P > 0 (t=" + std::to_string(s.t) + ")");
  }
  const bool same = std::all_of(phi.begin(), phi.end(),
                                [&](const RpSample& s) { return s.R == phi[0].R; });
  if (same) fail(Errc::DegenerateFit, "all sample rates are equal");
}

double r_squared(double sse, std::span<const RpSample> phi) {
  double mean = 0.0;
  for (const RpSample& s : phi) mean += s.P;
  mean /= static_cast<double>(phi.size());
  double sst = 0.0;
  for (const RpSample& s : phi) sst += (s.P - mean) * (s.P - mean);
  if (sst <= 0.0) return sse <= 0.0 ? 1.0 : 0.0;
  return 1.0 - sse / sst;
}

// Ordinary least squares y = a + b x.
std::pair<double, double> ols(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double b = sxy / sxx;
  return {my - b * mx, b};
}

double power_sse(std::span<const RpSample> phi, double alpha, double beta) {
  double sse = 0.0;
  for (const RpSample& s : phi) {
    const double r = s.P - alpha * std::pow(s.R, beta);
    sse += r * r;
  }
  return sse;
}

AffineFit affine_fit(std::span<const RpSample> phi, bool log_rate) {
  check_fit_input(phi, false);
  std::vector<double> x, y;
  for (const RpSample& s : phi) {
    x.push_back(log_rate ? std::log(s.R) : s.R);
    y.push_back(s.P);
  }
  const auto [a, b] = ols(x, y);
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sse += (y[i] - a - b * x[i]) * (y[i] - a - b * x[i]);
  return {a, b, r_squared(sse, phi)};
}

}  // namespace

double SurrogateParams::predict(double rate) const { return alpha * std::pow(rate, beta); }

void ControlConfig::validate() const {
  if (M < 2) fail(Errc::BadConfig, "qctrl needs M >= 2");
  if (!(eps > 0.0)) fail(Errc::BadConfig, "qctrl needs eps > 0");
  if (!std::isfinite(P_tar)) fail(Errc::BadConfig, "P_tar must be finite");
}

SurrogateParams fit_power_law(std::span<const RpSample> phi) {
  check_fit_input(phi, true);
  std::vector<double> lr, lp;
  for (const RpSample& s : phi) {
    lr.push_back(std::log(s.R));
    lp.push_back(std::log(s.P));
  }
  const auto [la, b0] = ols(lr, lp);
  double alpha = std::exp(la), beta = b0;
  double sse = power_sse(phi, alpha, beta);

  // Levenberg-Marquardt on (alpha, beta).
  double lambda = 1e-3;
  for (int it = 0; it < 200 && sse > 0.0; ++it) {
    double jaa = 0.0, jab = 0.0, jbb = 0.0, ga = 0.0, gb = 0.0;
    for (const RpSample& s : phi) {
      const double rb = std::pow(s.R, beta);
      const double da = rb, db = alpha * rb * std::log(s.R);
      const double r = s.P - alpha * rb;
      jaa += da * da;
      jab += da * db;
      jbb += db * db;
      ga += da * r;
      gb += db * r;
    }
    bool accepted = false;
    while (lambda < 1e12) {
      const double a11 = jaa * (1.0 + lambda), a22 = jbb * (1.0 + lambda);
      const double det = a11 * a22 - jab * jab;
      if (!(std::abs(det) > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const double d_alpha = (a22 * ga - jab * gb) / det;
      const double d_beta = (a11 * gb - jab * ga) / det;
      const double na = alpha + d_alpha, nb = beta + d_beta;
      const double nsse = na > 0.0 ? power_sse(phi, na, nb) : std::numeric_limits<double>::infinity();
      if (nsse < sse) {
        const bool tiny = std::abs(d_alpha) <= 1e-15 * std::abs(alpha) &&
                          std::abs(d_beta) <= 1e-15 * (1.0 + std::abs(beta));
        alpha = na;
        beta = nb;
        sse = nsse;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = !tiny;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
  }
  return {alpha, beta, r_squared(sse, phi)};
}

AffineFit fit_linear(std::span<const RpSample> phi) { return affine_fit(phi, false); }
AffineFit fit_logarithmic(std::span<const RpSample> phi) { return affine_fit(phi, true); }

double predict_target_rate(const SurrogateParams& params, double p_tar) {
  if (params.beta == 0.0 || !std::isfinite(params.beta))
    fail(Errc::NonInvertibleSurrogate, "surrogate exponent is zero");
  if (!(params.alpha > 0.0) || !(p_tar > 0.0))
    fail(Errc::NonInvertibleSurrogate, "need alpha > 0 and P_tar > 0");
  return std::pow(p_tar / params.alpha, 1.0 / params.beta);
}

int select_timestep(const RateTable& table, double target_rate) {
  if (table.bpp.empty()) fail(Errc::InvalidSchedule, "empty rate table");
  int best = table.t_lo;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int t = table.t_lo; t <= table.t_hi(); ++t) {
    const double gap = std::abs(table.at(t) - target_rate);
    if (gap <= best_gap) {
      best_gap = gap;
      best = t;
    }
  }
  return best;
}

std::vector<int> anchor_timesteps(const RateTable& table, std::size_t M) {
  // With t_lo = 1 this is round(j*(T-1)/(M+1)).
  const int span = table.t_hi() - table.t_lo + 1;
  std::vector<int> ts;
  for (std::size_t j = 1; j <= M; ++j) {
    int t = table.t_lo - 1 +
            static_cast<int>(std::lround(static_cast<double>(j) * span / static_cast<double>(M + 1)));
    t = std::clamp(t, table.t_lo, table.t_hi());
    if (std::find(ts.begin(), ts.end(), t) == ts.end()) ts.push_back(t);
  }
  return ts;
}

double QualityOracle::operator()(int t) {
  auto it = memo_.find(t);
  if (it != memo_.end()) return it->second;
  const double p = measure_(t);
  memo_.emplace(t, p);
  return p;
}

std::vector<RpSample> sparse_sample(QualityOracle& oracle, const RateTable& table, std::size_t M) {
  if (M < 2) fail(Errc::BadConfig, "sparse sampling needs M >= 2");
  std::vector<RpSample> phi;
  for (int t : anchor_timesteps(table, M)) {
    if (!(table.at(t) > 0.0)) continue;  // zero-rate points are not fitted
    phi.push_back({table.at(t), oracle(t), t, false});
  }
  return phi;
}

RefineResult refine(QualityOracle& oracle, std::vector<RpSample> phi, const ControlConfig& config,
                    const RateTable& table) {
  config.validate();
  RefineResult res;
  double best_gap = std::numeric_limits<double>::infinity();
  auto consider = [&](const RpSample& s) {
    if (s.reused) return;
    const double gap = std::abs(s.P - config.P_tar);
    if (gap < best_gap) {
      best_gap = gap;
      res.t_star = s.t;
      res.R = s.R;
      res.P = s.P;
    }
  };
  for (const RpSample& s : phi) consider(s);

  for (std::size_t iter = 1; best_gap > config.eps && iter <= config.max_iters; ++iter) {
    std::optional<SurrogateParams> fit;
    try {
      fit = fit_power_law(phi);
    } catch (const Error&) {
    }
    int t = res.t_star ? res.t_star : table.t_hi();
    if (fit && fit->beta != 0.0 && fit->alpha > 0.0 && config.P_tar > 0.0) {
      const double r_star = predict_target_rate(*fit, config.P_tar);
      if (std::isfinite(r_star)) t = select_timestep(table, r_star);
    }
    // Quality falls with t, so measured points bracket the target: keep the
    // candidate strictly between the last t above P_tar and the first below it.
    int above = std::numeric_limits<int>::min(), below = std::numeric_limits<int>::max();
    for (const auto& [te, pe] : oracle.evaluations()) {
      if (!table.contains(te)) continue;
      if (pe >= config.P_tar) above = std::max(above, te);
      else below = std::min(below, te);
    }
    if (above < below && above != std::numeric_limits<int>::min() &&
        below != std::numeric_limits<int>::max()) {
      if (below - above < 2) break;  // adjacent steps straddle the target
      if (t <= above || t >= below) {
        // The surrogate points outside the bracket: fall back to linear
        // interpolation of P between its ends (no step inside is measured yet).
        const double pa = oracle.evaluations().at(above), pb = oracle.evaluations().at(below);
        const double frac = (pa - config.P_tar) / (pa - pb);
        t = std::clamp(above + static_cast<int>(std::lround(frac * (below - above))), above + 1, below - 1);
      }
    }
    if (oracle.evaluated(t)) {
      // Already measured: move toward the target along the trajectory.
      const int dir = oracle(t) < config.P_tar ? -1 : 1;
      int next = t + dir;
      while (table.contains(next) && oracle.evaluated(next)) next += dir;
      if (!table.contains(next)) break;  // resolution limit of the rate table
      t = next;
    }
    const RpSample s{table.at(t), oracle(t), t, false};
    phi.push_back(s);
    res.trace.push_back({iter, t, s.R, s.P, fit ? fit->alpha : 0.0, fit ? fit->beta : 0.0});
    res.iterations = iter;
    consider(s);
    if (phi.size() > 2) {
      auto far = std::max_element(phi.begin(), phi.end(), [&](const RpSample& a, const RpSample& b) {
        return std::abs(a.P - config.P_tar) < std::abs(b.P - config.P_tar);
      });
      phi.erase(far);
    }
  }
  res.converged = best_gap <= config.eps;
  res.phi = std::move(phi);
  return res;
}

std::vector<RpSample> reuse_history(std::span<const RpSample> previous, const RpSample& alignment) {
  if (previous.empty()) fail(Errc::MissingAlignmentAnchor, "no history to align");
  auto it = std::find_if(previous.begin(), previous.end(),
                         [&](const RpSample& s) { return s.t == alignment.t; });
  if (it == previous.end())
    fail(Errc::MissingAlignmentAnchor,
         "timestep " + std::to_string(alignment.t) + " is not in the previous sample set");
  if (!(it->R > 0.0) || it->P == 0.0)
    fail(Errc::MissingAlignmentAnchor, "historical anchor has zero rate or quality");
  const double c_r = alignment.R / it->R;
  const double c_p = alignment.P / it->P;
  std::vector<RpSample> out;
  for (const RpSample& s : previous) {
    if (s.t == alignment.t) continue;  // superseded by the measured alignment
    out.push_back({c_r * s.R, c_p * s.P, s.t, true});
  }
  RpSample a = alignment;
  a.reused = false;
  out.push_back(a);
  return out;
}

GopControl control_gop(QualityOracle& oracle, const RateTable& table, const ControlConfig& config,
                       std::span<const RpSample> history, std::optional<int> align_t) {
  config.validate();
  GopControl out;
  const std::size_t before = oracle.decodes();
  std::vector<RpSample> phi;
  if (!history.empty()) {
    int t = -1;
    if (align_t && std::any_of(history.begin(), history.end(),
                               [&](const RpSample& s) { return s.t == *align_t; }))
      t = *align_t;
    else
      t = std::min_element(history.begin(), history.end(), [&](const RpSample& a, const RpSample& b) {
            return std::abs(a.P - config.P_tar) < std::abs(b.P - config.P_tar);
          })->t;
    if (table.contains(t) && table.at(t) > 0.0) {
      phi = reuse_history(history, {table.at(t), oracle(t), t, false});
      out.warm = true;
    }
  }
  if (!out.warm) phi = sparse_sample(oracle, table, config.M);
  out.result = refine(oracle, std::move(phi), config, table);
  out.decodes = oracle.decodes() - before;
  out.control_decodes = out.result.iterations + (out.warm ? 1 : 0);
  return out;
}

std::string trace_csv(std::span<const TraceRow> trace) {
  std::ostringstream os;
  os.precision(10);
  os << "iteration,t,R,P,alpha,beta\n";
  for (const TraceRow& r : trace)
    os << r.iteration << ',' << r.t << ',' << r.R << ',' << r.P << ',' << r.alpha << ',' << r.beta
       << '\n';
  return os.str();
}

}  // namespace fgvc
