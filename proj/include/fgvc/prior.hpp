#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fgvc/schedule.hpp"
#include "fgvc/tensor.hpp"

namespace fgvc {

inline constexpr double kDefaultVarianceFloor = 1e-6;

// Variance of the reverse model p(z_{t-1} | z_t). Posterior reuses the
// forward-posterior variance beta_tilde_t; Marginal is the exact reverse
// conditional of a Gaussian source, beta_tilde_t + c^2 Var(y | z_t).
enum class ReverseVariance : std::uint8_t { Posterior = 0, Marginal = 1 };

// Gaussian source model that is diagonal in some orthonormal basis. The
// coder works in that basis ("coefficient space"); forward noise is
// isotropic so the change of basis leaves the posterior unchanged.
class PriorModel {
 public:
  virtual ~PriorModel() = default;

  virtual std::string name() const = 0;
  std::size_t dimensionality() const { return variances().size(); }

  virtual std::span<const double> variances() const = 0;
  virtual void to_coefficients(std::span<const double> latent, std::span<double> coeffs) const = 0;
  virtual void from_coefficients(std::span<const double> coeffs,
                                 std::span<double> latent) const = 0;

  // Scalar Wiener noise estimate per coefficient.
  void predict_eps_coefficients(std::span<const double> z_t, int t, const NoiseSchedule& sched,
                                std::span<double> eps) const;

  // Same estimate in latent coordinates.
  LatentTensor predict_eps(const LatentTensor& z_t, int t, const NoiseSchedule& sched) const;

  // Per-coefficient variance of p(z_{t-1} | z_t).
  void reverse_variances(int t, const NoiseSchedule& sched, ReverseVariance mode,
                         std::span<double> out) const;

  // Expected KL(q || p) in bits per coefficient at step t, averaged over a
  // source drawn from this model. Depends only on decoder-side knowledge.
  void expected_step_kl_bits(int t, const NoiseSchedule& sched, ReverseVariance mode,
                             std::span<double> out) const;
};

// Wiener eps estimate for one coefficient.
double mmse_eps(double z, double variance, double alpha_bar);

// Diagonal Gaussian in an orthonormal basis: identity (coefficients are the
// latent entries themselves) or a dense matrix whose columns are the basis.
class SpectralGaussianPrior : public PriorModel {
 public:
  explicit SpectralGaussianPrior(std::vector<double> variances, std::string name = "spectral");
  SpectralGaussianPrior(Eigen::MatrixXd basis, std::vector<double> variances,
                        std::string name = "spectral-dense");

  std::string name() const override { return name_; }
  std::span<const double> variances() const override { return variances_; }
  void to_coefficients(std::span<const double> latent, std::span<double> coeffs) const override;
  void from_coefficients(std::span<const double> coeffs, std::span<double> latent) const override;

  bool has_dense_basis() const { return basis_.has_value(); }

 private:
  std::string name_;
  std::optional<Eigen::MatrixXd> basis_;
  std::vector<double> variances_;
};

// Frames are modeled independently: each frame of `frame_dim` entries uses
// the same per-frame basis (identity when absent) and its own variances.
// Nothing couples one frame's coefficients to another's.
class FramewisePrior : public PriorModel {
 public:
  FramewisePrior(std::size_t frames, std::size_t frame_dim, std::vector<double> variances,
                 std::string name = "framewise");
  FramewisePrior(std::size_t frames, Eigen::MatrixXd frame_basis, std::vector<double> variances,
                 std::string name = "framewise-dense");

  std::string name() const override { return name_; }
  std::span<const double> variances() const override { return variances_; }
  void to_coefficients(std::span<const double> latent, std::span<double> coeffs) const override;
  void from_coefficients(std::span<const double> coeffs, std::span<double> latent) const override;

  std::size_t frames() const { return frames_; }
  std::size_t frame_dim() const { return frame_dim_; }

 private:
  std::string name_;
  std::size_t frames_;
  std::size_t frame_dim_;
  std::optional<Eigen::MatrixXd> basis_;
  std::vector<double> variances_;
};

LatentTensor mmse_predict_eps(const PriorModel& prior, const LatentTensor& z_t, int t,
                              const NoiseSchedule& sched);

// Per-coefficient second moment over the corpus, floored at `floor`.
std::vector<double> fit_variance_profile(std::span<const LatentTensor> corpus,
                                         double floor = kDefaultVarianceFloor);

// Block-transform latents: channel c of a (s x d x d)-block transform of
// `planes` colour planes carries frequency (ft, fy, fx).
struct BlockLayout {
  std::size_t planes = 1;
  std::size_t temporal = 4;
  std::size_t spatial = 8;

  std::size_t channels() const { return planes * temporal * spatial * spatial; }
  double frequency_norm(std::size_t channel) const;
};

struct PowerLaw {
  double amplitude = 1.0;
  double exponent = 2.0;
};

// sigma^2(f) = A / (1 + |f|)^p, broadcast over every latent position.
std::vector<double> power_law_profile(const LatentShape& shape, const BlockLayout& layout,
                                      PowerLaw law, double floor = kDefaultVarianceFloor);

// Frame-wise restriction of the same law: variances averaged over temporal
// frequency, so the model carries no cross-frame statistics.
std::vector<double> framewise_power_law_profile(const LatentShape& shape, const BlockLayout& layout,
                                                PowerLaw law,
                                                double floor = kDefaultVarianceFloor);

// Per-channel second moments pooled over positions and latents.
std::vector<double> fit_channel_profile(std::span<const LatentTensor> corpus,
                                        const BlockLayout& layout,
                                        double floor = kDefaultVarianceFloor);
// Repeats a per-channel profile over every latent position.
std::vector<double> broadcast_channel_profile(const LatentShape& shape,
                                              std::span<const double> profile);

// Least-squares fit of log sigma^2 = log A - p log(1 + |f|) to per-channel
// second moments pooled over positions.
PowerLaw fit_power_law_profile(std::span<const LatentTensor> corpus, const BlockLayout& layout);

// Little-endian sidecar: u64 count, then count f64 values.
std::vector<std::uint8_t> serialize_profile(std::span<const double> profile);
std::vector<double> parse_profile(std::span<const std::uint8_t> bytes);
std::uint64_t profile_hash(std::span<const std::uint8_t> bytes);

}  // namespace fgvc
