#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fgvc {

struct RpSample {
  double R = 0.0;  // bpp
  double P = 0.0;
  int t = 0;
  bool reused = false;  // carried over from a previous GOP, not measured here
};

struct SurrogateParams {
  double alpha = 1.0;
  double beta = 0.0;
  double fit_r2 = 0.0;
  double predict(double rate) const;
};

// P ~ a + b*R and P ~ a + b*ln R, for goodness-of-fit comparisons.
struct AffineFit {
  double a = 0.0;
  double b = 0.0;
  double fit_r2 = 0.0;
};

struct ControlConfig {
  std::size_t M = 4;
  double eps = 0.005;
  std::size_t max_iters = 10;
  double P_tar = 0.95;
  std::string quality_metric = "ms-ssim";
  void validate() const;
};

SurrogateParams fit_power_law(std::span<const RpSample> phi);
AffineFit fit_linear(std::span<const RpSample> phi);
AffineFit fit_logarithmic(std::span<const RpSample> phi);

double predict_target_rate(const SurrogateParams& params, double p_tar);

// Rates (bpp) for t in [t_lo, t_lo + size).
struct RateTable {
  int t_lo = 1;
  std::vector<double> bpp;
  int t_hi() const { return t_lo + static_cast<int>(bpp.size()) - 1; }
  double at(int t) const { return bpp.at(static_cast<std::size_t>(t - t_lo)); }
  bool contains(int t) const { return t >= t_lo && t <= t_hi(); }
};

// argmin_t |R_t - R*|, ties toward larger t.
int select_timestep(const RateTable& table, double target_rate);

// Uniform anchor grid over the table, j = 1..M: t_j = round(j*(T-1)/(M+1)) for a
// table starting at t = 1.
std::vector<int> anchor_timesteps(const RateTable& table, std::size_t M);

// Measures P at a timestep at most once.
class QualityOracle {
 public:
  explicit QualityOracle(std::function<double(int)> measure) : measure_(std::move(measure)) {}
  double operator()(int t);
  bool evaluated(int t) const { return memo_.count(t) != 0; }
  std::size_t decodes() const { return memo_.size(); }
  const std::map<int, double>& evaluations() const { return memo_; }

 private:
  std::function<double(int)> measure_;
  std::map<int, double> memo_;
};

std::vector<RpSample> sparse_sample(QualityOracle& oracle, const RateTable& table, std::size_t M);

struct TraceRow {
  std::size_t iteration = 0;
  int t = 0;
  double R = 0.0;
  double P = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct RefineResult {
  int t_star = 0;
  double R = 0.0;
  double P = 0.0;
  bool converged = false;
  std::size_t iterations = 0;  // decode-and-measure rounds inside the loop
  std::vector<RpSample> phi;
  std::vector<TraceRow> trace;
};

RefineResult refine(QualityOracle& oracle, std::vector<RpSample> phi, const ControlConfig& config,
                    const RateTable& table);

std::vector<RpSample> reuse_history(std::span<const RpSample> previous, const RpSample& alignment);

// Per-GOP driver: cold start (sparse anchors) when history is empty,
// otherwise one alignment decode at `align_t` followed by refinement.
struct GopControl {
  RefineResult result;
  std::size_t decodes = 0;         // total oracle decodes for this GOP
  std::size_t control_decodes = 0; // refinement decodes (+ alignment when warm)
  bool warm = false;
};

GopControl control_gop(QualityOracle& oracle, const RateTable& table, const ControlConfig& config,
                       std::span<const RpSample> history, std::optional<int> align_t);

std::string trace_csv(std::span<const TraceRow> trace);

}  // namespace fgvc
