#pragma once

#include <span>
#include <vector>

#include "fgvc/tensor.hpp"

namespace fgvc {

// DDPM coefficients indexed directly by step t in [0, T]; entry 0 holds the
// clean-signal boundary (alpha_bar[0] = 1) and beta[0] is unused.
class NoiseSchedule {
 public:
  static NoiseSchedule linear(int steps, double beta_start, double beta_end);
  static NoiseSchedule from_betas(std::vector<double> betas);

  int steps() const { return steps_; }
  double beta_start() const { return beta_start_; }
  double beta_end() const { return beta_end_; }

  double beta(int t) const { return beta_[t]; }
  double alpha(int t) const { return alpha_[t]; }
  double alpha_bar(int t) const { return alpha_bar_[t]; }
  double beta_tilde(int t) const { return beta_tilde_[t]; }

 private:
  NoiseSchedule() = default;
  void derive();

  int steps_ = 0;
  double beta_start_ = 0.0;
  double beta_end_ = 0.0;
  std::vector<double> beta_, alpha_, alpha_bar_, beta_tilde_;
};

NoiseSchedule build_schedule(int steps, double beta_start, double beta_end);

// Coefficients of the forward posterior q(z_{t-1} | z_t, y):
// mean = on_clean * y + on_noisy * z_t, variance = var.
struct PosteriorCoeffs {
  double on_clean;
  double on_noisy;
  double var;
};

PosteriorCoeffs posterior_coeffs(const NoiseSchedule& sched, int t);

struct GaussianMean {
  LatentTensor mean;
  double var;
};

GaussianMean posterior_params(const NoiseSchedule& sched, int t, const LatentTensor& z_t,
                              const LatentTensor& y);

LatentTensor estimate_x0(const NoiseSchedule& sched, int t, const LatentTensor& z_t,
                         const LatentTensor& eps_hat);

GaussianMean reverse_mean(const NoiseSchedule& sched, int t, const LatentTensor& z_t,
                          const LatentTensor& eps_hat);

// Span forms used by the coder's inner loop.
void posterior_mean_into(const NoiseSchedule& sched, int t, std::span<const double> z_t,
                         std::span<const double> y, std::span<double> out);
void reverse_mean_into(const NoiseSchedule& sched, int t, std::span<const double> z_t,
                       std::span<const double> eps_hat, std::span<double> out);

}  // namespace fgvc
