#include "fgvc/prior.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "fgvc/error.hpp"

namespace fgvc {

double mmse_eps(double z, double variance, double alpha_bar) {
  const double noise = 1.0 - alpha_bar;
  return z * std::sqrt(noise) / (alpha_bar * variance + noise);
}

void PriorModel::predict_eps_coefficients(std::span<const double> z_t, int t,
                                          const NoiseSchedule& sched, std::span<double> eps) const {
  const auto var = variances();
  if (z_t.size() != var.size() || eps.size() != var.size())
    fail(Errc::ProfileMismatch, name() + ": " + std::to_string(z_t.size()) +
                                    " coefficients vs profile of " + std::to_string(var.size()));
  const double ab = sched.alpha_bar(t);
  const double noise = 1.0 - ab;
  const double root_noise = std::sqrt(noise);
  for (std::size_t i = 0; i < var.size(); ++i)
    eps[i] = z_t[i] * root_noise / (ab * var[i] + noise);
}

LatentTensor PriorModel::predict_eps(const LatentTensor& z_t, int t,
                                     const NoiseSchedule& sched) const {
  if (z_t.size() != dimensionality())
    fail(Errc::ProfileMismatch, name() + ": latent " + to_string(z_t.shape()) +
                                    " vs profile of " + std::to_string(dimensionality()));
  std::vector<double> coeffs(z_t.size()), eps(z_t.size());
  to_coefficients(z_t.values(), coeffs);
  predict_eps_coefficients(coeffs, t, sched, eps);
  LatentTensor out(z_t.shape());
  from_coefficients(eps, out.values());
  return out;
}

void PriorModel::reverse_variances(int t, const NoiseSchedule& sched, ReverseVariance mode,
                                   std::span<double> out) const {
  const auto var = variances();
  const PosteriorCoeffs c = posterior_coeffs(sched, t);
  if (mode == ReverseVariance::Posterior) {
    std::fill(out.begin(), out.end(), c.var);
    return;
  }
  const double ab = sched.alpha_bar(t);
  const double noise = 1.0 - ab;
  for (std::size_t i = 0; i < var.size(); ++i) {
    const double residual = var[i] * noise / (ab * var[i] + noise);
    out[i] = c.var + c.on_clean * c.on_clean * residual;
  }
}

void PriorModel::expected_step_kl_bits(int t, const NoiseSchedule& sched, ReverseVariance mode,
                                       std::span<double> out) const {
  const auto var = variances();
  const PosteriorCoeffs c = posterior_coeffs(sched, t);
  const double ab = sched.alpha_bar(t);
  const double noise = 1.0 - ab;
  const double gain = c.on_clean * c.on_clean / c.var;
  for (std::size_t i = 0; i < var.size(); ++i) {
    const double residual = var[i] * noise / (ab * var[i] + noise);
    out[i] = mode == ReverseVariance::Posterior ? 0.5 * gain * residual * std::numbers::log2e
                                                : 0.5 * std::log2(1.0 + gain * residual);
  }
}

namespace {

void check_variances(const std::vector<double>& v, const std::string& who) {
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x))
      fail(Errc::ProfileMismatch, who + ": variances must be positive and finite");
}

}  // namespace

SpectralGaussianPrior::SpectralGaussianPrior(std::vector<double> variances, std::string name)
    : name_(std::move(name)), variances_(std::move(variances)) {
  check_variances(variances_, name_);
}

SpectralGaussianPrior::SpectralGaussianPrior(Eigen::MatrixXd basis, std::vector<double> variances,
                                             std::string name)
    : name_(std::move(name)), basis_(std::move(basis)), variances_(std::move(variances)) {
  check_variances(variances_, name_);
  if (basis_->rows() != basis_->cols() ||
      static_cast<std::size_t>(basis_->rows()) != variances_.size())
    fail(Errc::ProfileMismatch, name_ + ": basis and profile sizes differ");
}

void SpectralGaussianPrior::to_coefficients(std::span<const double> latent,
                                            std::span<double> coeffs) const {
  if (!basis_) {
    std::copy(latent.begin(), latent.end(), coeffs.begin());
    return;
  }
  const Eigen::Map<const Eigen::VectorXd> x(latent.data(), static_cast<Eigen::Index>(latent.size()));
  Eigen::Map<Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size())) =
      basis_->transpose() * x;
}

void SpectralGaussianPrior::from_coefficients(std::span<const double> coeffs,
                                              std::span<double> latent) const {
  if (!basis_) {
    std::copy(coeffs.begin(), coeffs.end(), latent.begin());
    return;
  }
  const Eigen::Map<const Eigen::VectorXd> c(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  Eigen::Map<Eigen::VectorXd>(latent.data(), static_cast<Eigen::Index>(latent.size())) =
      (*basis_) * c;
}

FramewisePrior::FramewisePrior(std::size_t frames, std::size_t frame_dim,
                               std::vector<double> variances, std::string name)
    : name_(std::move(name)), frames_(frames), frame_dim_(frame_dim),
      variances_(std::move(variances)) {
  check_variances(variances_, name_);
  if (frames_ * frame_dim_ != variances_.size())
    fail(Errc::ProfileMismatch, name_ + ": frames x frame_dim != profile length");
}

FramewisePrior::FramewisePrior(std::size_t frames, Eigen::MatrixXd frame_basis,
                               std::vector<double> variances, std::string name)
    : name_(std::move(name)), frames_(frames),
      frame_dim_(static_cast<std::size_t>(frame_basis.rows())), basis_(std::move(frame_basis)),
      variances_(std::move(variances)) {
  check_variances(variances_, name_);
  if (basis_->rows() != basis_->cols() || frames_ * frame_dim_ != variances_.size())
    fail(Errc::ProfileMismatch, name_ + ": basis and profile sizes differ");
}

void FramewisePrior::to_coefficients(std::span<const double> latent,
                                     std::span<double> coeffs) const {
  if (!basis_) {
    std::copy(latent.begin(), latent.end(), coeffs.begin());
    return;
  }
  const auto n = static_cast<Eigen::Index>(frame_dim_);
  for (std::size_t f = 0; f < frames_; ++f) {
    const Eigen::Map<const Eigen::VectorXd> x(latent.data() + f * frame_dim_, n);
    Eigen::Map<Eigen::VectorXd>(coeffs.data() + f * frame_dim_, n) = basis_->transpose() * x;
  }
}

void FramewisePrior::from_coefficients(std::span<const double> coeffs,
                                       std::span<double> latent) const {
  if (!basis_) {
    std::copy(coeffs.begin(), coeffs.end(), latent.begin());
    return;
  }
  const auto n = static_cast<Eigen::Index>(frame_dim_);
  for (std::size_t f = 0; f < frames_; ++f) {
    const Eigen::Map<const Eigen::VectorXd> c(coeffs.data() + f * frame_dim_, n);
    Eigen::Map<Eigen::VectorXd>(latent.data() + f * frame_dim_, n) = (*basis_) * c;
  }
}

LatentTensor mmse_predict_eps(const PriorModel& prior, const LatentTensor& z_t, int t,
                              const NoiseSchedule& sched) {
  return prior.predict_eps(z_t, t, sched);
}

std::vector<double> fit_variance_profile(std::span<const LatentTensor> corpus, double floor) {
  if (corpus.empty()) fail(Errc::EmptyCorpus, "variance profile needs at least one latent");
  const LatentShape shape = corpus.front().shape();
  std::vector<double> acc(shape.size(), 0.0);
  for (const auto& latent : corpus) {
    if (!(latent.shape() == shape))
      fail(Errc::ShapeMismatch, "corpus latents differ in shape");
    const auto v = latent.values();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i] * v[i];
  }
  const double n = static_cast<double>(corpus.size());
  for (double& a : acc) a = std::max(a / n, floor);
  return acc;
}

double BlockLayout::frequency_norm(std::size_t channel) const {
  const std::size_t per_plane = temporal * spatial * spatial;
  const std::size_t r = channel % per_plane;
  const double ft = static_cast<double>(r / (spatial * spatial));
  const double fy = static_cast<double>((r / spatial) % spatial);
  const double fx = static_cast<double>(r % spatial);
  return std::sqrt(ft * ft + fy * fy + fx * fx);
}

namespace {

void require_layout(const LatentShape& shape, const BlockLayout& layout) {
  if (shape.channels != layout.channels())
    fail(Errc::ProfileMismatch, "latent has " + std::to_string(shape.channels) +
                                    " channels, block layout expects " +
                                    std::to_string(layout.channels()));
}

std::vector<double> broadcast(const LatentShape& shape, const std::vector<double>& per_channel) {
  std::vector<double> out(shape.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = per_channel[i % shape.channels];
  return out;
}

}  // namespace

std::vector<double> power_law_profile(const LatentShape& shape, const BlockLayout& layout,
                                      PowerLaw law, double floor) {
  require_layout(shape, layout);
  std::vector<double> per_channel(shape.channels);
  for (std::size_t c = 0; c < shape.channels; ++c)
    per_channel[c] =
        std::max(law.amplitude / std::pow(1.0 + layout.frequency_norm(c), law.exponent), floor);
  return broadcast(shape, per_channel);
}

std::vector<double> framewise_power_law_profile(const LatentShape& shape,
                                                const BlockLayout& layout, PowerLaw law,
                                                double floor) {
  require_layout(shape, layout);
  const std::size_t spatial_count = layout.spatial * layout.spatial;
  const std::size_t per_plane = layout.temporal * spatial_count;
  std::vector<double> per_channel(shape.channels);
  for (std::size_t c = 0; c < shape.channels; ++c) {
    const std::size_t plane_base = (c / per_plane) * per_plane;
    const std::size_t spatial_index = (c % per_plane) % spatial_count;
    double sum = 0.0;
    for (std::size_t ft = 0; ft < layout.temporal; ++ft) {
      const std::size_t sibling = plane_base + ft * spatial_count + spatial_index;
      sum += law.amplitude / std::pow(1.0 + layout.frequency_norm(sibling), law.exponent);
    }
    per_channel[c] = std::max(sum / static_cast<double>(layout.temporal), floor);
  }
  return broadcast(shape, per_channel);
}

std::vector<double> fit_channel_profile(std::span<const LatentTensor> corpus,
                                        const BlockLayout& layout, double floor) {
  if (corpus.empty()) fail(Errc::EmptyCorpus, "channel profile needs at least one latent");
  const std::size_t channels = layout.channels();
  std::vector<double> moment(channels, 0.0);
  std::vector<double> count(channels, 0.0);
  for (const auto& latent : corpus) {
    require_layout(latent.shape(), layout);
    const auto v = latent.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      moment[i % channels] += v[i] * v[i];
      count[i % channels] += 1.0;
    }
  }
  for (std::size_t c = 0; c < channels; ++c) moment[c] = std::max(moment[c] / count[c], floor);
  return moment;
}

std::vector<double> broadcast_channel_profile(const LatentShape& shape,
                                              std::span<const double> profile) {
  if (profile.size() != shape.channels)
    fail(Errc::ProfileMismatch, "profile has " + std::to_string(profile.size()) +
                                    " entries for " + std::to_string(shape.channels) + " channels");
  std::vector<double> out;
  out.reserve(shape.size());
  for (std::size_t i = 0; i < shape.size() / shape.channels; ++i)
    out.insert(out.end(), profile.begin(), profile.end());
  return out;
}

PowerLaw fit_power_law_profile(std::span<const LatentTensor> corpus, const BlockLayout& layout) {
  const std::vector<double> moment = fit_channel_profile(corpus, layout, kDefaultVarianceFloor);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t c = 0; c < moment.size(); ++c) {
    const double x = std::log(1.0 + layout.frequency_norm(c));
    const double y = std::log(moment[c]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1.0;
  }
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0.0)) return PowerLaw{std::exp(sy / n), 0.0};
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  return PowerLaw{std::exp(intercept), -slope};
}

std::vector<std::uint8_t> serialize_profile(std::span<const double> profile) {
  std::vector<std::uint8_t> out(8 + 8 * profile.size());
  const std::uint64_t n = profile.size();
  for (int b = 0; b < 8; ++b) out[b] = static_cast<std::uint8_t>(n >> (8 * b));
  for (std::size_t i = 0; i < profile.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &profile[i], 8);
    for (int b = 0; b < 8; ++b) out[8 + 8 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return out;
}

std::vector<double> parse_profile(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) fail(Errc::ProfileMismatch, "profile sidecar shorter than its length prefix");
  std::uint64_t n = 0;
  for (int b = 0; b < 8; ++b) n |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  if (bytes.size() != 8 + 8 * n)
    fail(Errc::ProfileMismatch, "profile sidecar length prefix says " + std::to_string(n) +
                                    " values, file holds " + std::to_string((bytes.size() - 8) / 8));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[8 + 8 * i + b]) << (8 * b);
    std::memcpy(&out[i], &bits, 8);
  }
  return out;
}

std::uint64_t profile_hash(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace fgvc
