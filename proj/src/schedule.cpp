#include "fgvc/schedule.hpp"

#include <cmath>
#include <string>

#include "fgvc/error.hpp"
#include "fgvc/kernels.hpp"

namespace fgvc {

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start, double beta_end) {
  if (steps < 1) fail(Errc::InvalidSchedule, "step count must be >= 1");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
    fail(Errc::InvalidSchedule, "require 0 < beta_start <= beta_end < 1");
  if (steps > 1 && !(beta_start < beta_end))
    fail(Errc::InvalidSchedule, "beta must be strictly increasing for T > 1");
  NoiseSchedule s;
  s.steps_ = steps;
  s.beta_start_ = beta_start;
  s.beta_end_ = beta_end;
  s.beta_.assign(steps + 1, 0.0);
  for (int t = 1; t <= steps; ++t) {
    const long double frac =
        steps == 1 ? 0.0L : static_cast<long double>(t - 1) / static_cast<long double>(steps - 1);
    s.beta_[t] = static_cast<double>(beta_start + frac * (static_cast<long double>(beta_end) -
                                                          beta_start));
  }
  s.derive();
  return s;
}

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas) {
  if (betas.empty()) fail(Errc::InvalidSchedule, "empty beta list");
  NoiseSchedule s;
  s.steps_ = static_cast<int>(betas.size());
  s.beta_start_ = betas.front();
  s.beta_end_ = betas.back();
  s.beta_.assign(betas.size() + 1, 0.0);
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0 && betas[i] < 1.0))
      fail(Errc::InvalidSchedule, "beta_" + std::to_string(i + 1) + " outside (0,1)");
    if (i > 0 && !(betas[i] > betas[i - 1]))
      fail(Errc::InvalidSchedule, "beta must be strictly increasing");
    s.beta_[i + 1] = betas[i];
  }
  s.derive();
  return s;
}

void NoiseSchedule::derive() {
  const int T = steps_;
  alpha_.assign(T + 1, 1.0);
  alpha_bar_.assign(T + 1, 1.0);
  beta_tilde_.assign(T + 1, 0.0);
  long double cumulative = 1.0L;
  long double prev = 1.0L;
  for (int t = 1; t <= T; ++t) {
    const long double a = 1.0L - static_cast<long double>(beta_[t]);
    cumulative *= a;
    alpha_[t] = static_cast<double>(a);
    alpha_bar_[t] = static_cast<double>(cumulative);
    beta_tilde_[t] = static_cast<double>((1.0L - prev) / (1.0L - cumulative) * beta_[t]);
    prev = cumulative;
    if (!(alpha_bar_[t] > 0.0 && alpha_bar_[t] < 1.0))
      fail(Errc::InvalidSchedule, "alpha_bar_" + std::to_string(t) + " left (0,1)");
  }
}

NoiseSchedule build_schedule(int steps, double beta_start, double beta_end) {
  return NoiseSchedule::linear(steps, beta_start, beta_end);
}

namespace {

void check_step(const NoiseSchedule& sched, int t) {
  if (t < 1 || t > sched.steps())
    fail(Errc::InvalidSchedule,
         "step " + std::to_string(t) + " outside [1, " + std::to_string(sched.steps()) + "]");
}

}  // namespace

PosteriorCoeffs posterior_coeffs(const NoiseSchedule& sched, int t) {
  check_step(sched, t);
  const double ab = sched.alpha_bar(t);
  const double ab_prev = sched.alpha_bar(t - 1);
  return {std::sqrt(ab_prev) * sched.beta(t) / (1.0 - ab),
          std::sqrt(sched.alpha(t)) * (1.0 - ab_prev) / (1.0 - ab), sched.beta_tilde(t)};
}

void posterior_mean_into(const NoiseSchedule& sched, int t, std::span<const double> z_t,
                         std::span<const double> y, std::span<double> out) {
  const PosteriorCoeffs c = posterior_coeffs(sched, t);
  kernels::axpby(c.on_clean, y, c.on_noisy, z_t, out);
}

void reverse_mean_into(const NoiseSchedule& sched, int t, std::span<const double> z_t,
                       std::span<const double> eps_hat, std::span<double> out) {
  check_step(sched, t);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha(t));
  const double eps_coeff = -sched.beta(t) / std::sqrt(1.0 - sched.alpha_bar(t)) * inv_sqrt_alpha;
  kernels::axpby(inv_sqrt_alpha, z_t, eps_coeff, eps_hat, out);
}

GaussianMean posterior_params(const NoiseSchedule& sched, int t, const LatentTensor& z_t,
                              const LatentTensor& y) {
  require_same_shape(z_t, y, "posterior_params");
  LatentTensor mean(z_t.shape());
  posterior_mean_into(sched, t, z_t.values(), y.values(), mean.values());
  return {std::move(mean), sched.beta_tilde(t)};
}

LatentTensor estimate_x0(const NoiseSchedule& sched, int t, const LatentTensor& z_t,
                         const LatentTensor& eps_hat) {
  require_same_shape(z_t, eps_hat, "estimate_x0");
  check_step(sched, t);
  const double inv_sqrt_ab = 1.0 / std::sqrt(sched.alpha_bar(t));
  const double eps_coeff = -std::sqrt(1.0 - sched.alpha_bar(t)) * inv_sqrt_ab;
  LatentTensor out(z_t.shape());
  kernels::axpby(inv_sqrt_ab, z_t.values(), eps_coeff, eps_hat.values(), out.values());
  return out;
}

GaussianMean reverse_mean(const NoiseSchedule& sched, int t, const LatentTensor& z_t,
                          const LatentTensor& eps_hat) {
  require_same_shape(z_t, eps_hat, "reverse_mean");
  LatentTensor mean(z_t.shape());
  reverse_mean_into(sched, t, z_t.values(), eps_hat.values(), mean.values());
  return {std::move(mean), sched.beta_tilde(t)};
}

}  // namespace fgvc
