#include "fgvc/analysis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fgvc/error.hpp"
#include "fgvc/pipeline.hpp"
#include "fgvc/rng.hpp"

namespace fgvc {

namespace {

using Eigen::MatrixXd;

double log_det_spd(const MatrixXd& m, const char* what) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) fail(Errc::NotPositiveDefinite, std::string(what) + " is not positive definite");
  double s = 0.0;
  const MatrixXd& l = llt.matrixL();
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

void check_step(const NoiseSchedule& sched, int t) {
  if (t < 1 || t > sched.steps() - 1)
    fail(Errc::InvalidSchedule, "step " + std::to_string(t) + " outside [1, T-1]");
}

// Cov(y | z) for z = sqrt(ab) y + sqrt(1 - ab) eps.
MatrixXd residual_cov(const MatrixXd& sigma, double ab) {
  const Eigen::Index n = sigma.rows();
  const MatrixXd cz = ab * sigma + (1.0 - ab) * MatrixXd::Identity(n, n);
  return sigma - ab * sigma * cz.ldlt().solve(sigma);
}

// E[y | z] = A z.
MatrixXd wiener_gain(const MatrixXd& sigma, double ab) {
  const Eigen::Index n = sigma.rows();
  const MatrixXd cz = ab * sigma + (1.0 - ab) * MatrixXd::Identity(n, n);
  return std::sqrt(ab) * cz.ldlt().solve(sigma).transpose();
}

// Conditional covariance of block X given block Y from a joint covariance.
MatrixXd schur(const MatrixXd& xx, const MatrixXd& xy, const MatrixXd& yy) {
  if (yy.rows() == 0) return xx;
  return xx - xy * yy.ldlt().solve(xy.transpose());
}

}  // namespace

GaussianSourceSpec GaussianSourceSpec::ar1(std::size_t frames, std::size_t height,
                                           std::size_t width, double rho_time, double rho_space) {
  if (frames == 0 || height == 0 || width == 0) fail(Errc::ZeroDims, "empty AR(1) source");
  if (!(std::abs(rho_time) < 1.0) || !(std::abs(rho_space) < 1.0))
    fail(Errc::NotPositiveDefinite, "AR(1) needs |rho| < 1");
  const std::size_t fd = height * width;
  MatrixXd tm(frames, frames), sm(fd, fd);
  for (std::size_t i = 0; i < frames; ++i)
    for (std::size_t j = 0; j < frames; ++j)
      tm(i, j) = std::pow(rho_time, std::abs(static_cast<double>(i) - static_cast<double>(j)));
  for (std::size_t a = 0; a < fd; ++a)
    for (std::size_t b = 0; b < fd; ++b) {
      const double dy = std::abs(static_cast<double>(a / width) - static_cast<double>(b / width));
      const double dx = std::abs(static_cast<double>(a % width) - static_cast<double>(b % width));
      sm(a, b) = std::pow(rho_space, dy + dx);
    }
  GaussianSourceSpec spec{frames, fd, MatrixXd(frames * fd, frames * fd)};
  for (std::size_t i = 0; i < frames; ++i)
    for (std::size_t j = 0; j < frames; ++j)
      spec.sigma.block(i * fd, j * fd, fd, fd) = tm(i, j) * sm;
  return spec;
}

void GaussianSourceSpec::validate() const {
  if (frames == 0 || frame_dim == 0) fail(Errc::ZeroDims, "empty Gaussian source");
  if (dim() > kMaxAnalysisDims)
    fail(Errc::ShapeMismatch, std::to_string(dim()) + " dims exceeds the analysis cap of " +
                                  std::to_string(kMaxAnalysisDims));
  if (sigma.rows() != static_cast<Eigen::Index>(dim()) || sigma.cols() != sigma.rows())
    fail(Errc::ShapeMismatch, "covariance does not match frames x frame_dim");
  if (!sigma.isApprox(sigma.transpose(), 1e-12))
    fail(Errc::NotPositiveDefinite, "covariance is not symmetric");
  log_det_spd(sigma, "source covariance");
}

MatrixXd GaussianSourceSpec::frame_block(std::size_t i, std::size_t j) const {
  const auto fd = static_cast<Eigen::Index>(frame_dim);
  return sigma.block(static_cast<Eigen::Index>(i) * fd, static_cast<Eigen::Index>(j) * fd, fd, fd);
}

MatrixXd GaussianSourceSpec::block_diagonal() const {
  MatrixXd bd = MatrixXd::Zero(sigma.rows(), sigma.cols());
  const auto fd = static_cast<Eigen::Index>(frame_dim);
  for (std::size_t i = 0; i < frames; ++i) {
    const auto o = static_cast<Eigen::Index>(i) * fd;
    bd.block(o, o, fd, fd) = sigma.block(o, o, fd, fd);
  }
  return bd;
}

double kl_joint_step(const GaussianSourceSpec& spec, const NoiseSchedule& sched, int t) {
  spec.validate();
  check_step(sched, t);
  const PosteriorCoeffs c = posterior_coeffs(sched, t + 1);
  const MatrixXd p = residual_cov(spec.sigma, sched.alpha_bar(t + 1));
  const auto n = static_cast<Eigen::Index>(spec.dim());
  const MatrixXd m = MatrixXd::Identity(n, n) + (c.on_clean * c.on_clean / c.var) * p;
  return 0.5 * log_det_spd(m, "joint reverse covariance") * std::numbers::log2e;
}

double kl_framewise_step(const GaussianSourceSpec& spec, const NoiseSchedule& sched, int t) {
  spec.validate();
  check_step(sched, t);
  const PosteriorCoeffs c = posterior_coeffs(sched, t + 1);
  const double ab = sched.alpha_bar(t + 1);
  const MatrixXd bd = spec.block_diagonal();
  const auto n = static_cast<Eigen::Index>(spec.dim());
  const MatrixXd id = MatrixXd::Identity(n, n);
  // Block-diagonal gain and residual: each frame conditions on itself only.
  const MatrixXd a = wiener_gain(bd, ab);
  const MatrixXd cov = c.var * id + c.on_clean * c.on_clean * residual_cov(bd, ab);
  // E[(y - A z)(y - A z)^T] under the true joint source.
  const MatrixXd g = id - std::sqrt(ab) * a;
  const MatrixXd e = g * spec.sigma * g.transpose() + (1.0 - ab) * a * a.transpose();
  const MatrixXd target = c.var * id + c.on_clean * c.on_clean * e;
  const double tr = cov.ldlt().solve(target).trace();
  const double nats = 0.5 * (tr - static_cast<double>(n) + log_det_spd(cov, "frame-wise reverse covariance") -
                             static_cast<double>(n) * std::log(c.var));
  return nats * std::numbers::log2e;
}

double conditional_mi_gap(const GaussianSourceSpec& spec, const NoiseSchedule& sched, int t) {
  spec.validate();
  check_step(sched, t);
  const auto n = static_cast<Eigen::Index>(spec.dim());
  const auto fd = static_cast<Eigen::Index>(spec.frame_dim);
  const MatrixXd id = MatrixXd::Identity(n, n);
  const double ab_t = sched.alpha_bar(t), ab_n = sched.alpha_bar(t + 1);
  // Joint covariance of (z_t, z_{t+1}).
  const MatrixXd c_t = ab_t * spec.sigma + (1.0 - ab_t) * id;
  const MatrixXd c_n = ab_n * spec.sigma + (1.0 - ab_n) * id;
  const MatrixXd c_nt = std::sqrt(sched.alpha(t + 1)) * c_t;  // Cov(z_{t+1}, z_t)

  double nats = 0.0;
  for (std::size_t i = 0; i < spec.frames; ++i) {
    const Eigen::Index o = static_cast<Eigen::Index>(i) * fd;
    const MatrixXd xx = c_t.block(o, o, fd, fd);
    // Own-frame conditioning: z_{t+1}^(i).
    const MatrixXd own = schur(xx, c_nt.block(o, o, fd, fd).transpose(), c_n.block(o, o, fd, fd));
    // Full conditioning: z_t^(<i) and all of z_{t+1}.
    const Eigen::Index k = o + n;
    MatrixXd yy(k, k), xy(fd, k);
    yy.topLeftCorner(o, o) = c_t.topLeftCorner(o, o);
    yy.topRightCorner(o, n) = c_nt.leftCols(o).transpose();
    yy.bottomLeftCorner(n, o) = c_nt.leftCols(o);
    yy.bottomRightCorner(n, n) = c_n;
    xy.leftCols(o) = c_t.block(o, 0, fd, o);
    xy.rightCols(n) = c_nt.middleCols(o, fd).transpose();
    const MatrixXd full = schur(xx, xy, yy);
    nats += 0.5 * (log_det_spd(own, "own-frame conditional") - log_det_spd(full, "full conditional"));
  }
  return nats * std::numbers::log2e;
}

double accumulate_gap(const GaussianSourceSpec& spec, const NoiseSchedule& sched, int t_star) {
  check_step(sched, t_star);
  double total = 0.0;
  for (int t = t_star; t <= sched.steps() - 1; ++t)
    total += kl_framewise_step(spec, sched, t) - kl_joint_step(spec, sched, t);
  return total;
}

SpectralGaussianPrior joint_prior(const GaussianSourceSpec& spec) {
  spec.validate();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(spec.sigma);
  const auto ev = es.eigenvalues();
  return SpectralGaussianPrior(es.eigenvectors(), std::vector<double>(ev.data(), ev.data() + ev.size()),
                               "joint");
}

FramewisePrior framewise_prior(const GaussianSourceSpec& spec) {
  spec.validate();
  const MatrixXd b0 = spec.frame_block(0, 0);
  for (std::size_t i = 1; i < spec.frames; ++i)
    if (!spec.frame_block(i, i).isApprox(b0, 1e-12))
      fail(Errc::ShapeMismatch, "frame-wise prior needs identical per-frame covariance blocks");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(b0);
  std::vector<double> var;
  for (std::size_t i = 0; i < spec.frames; ++i)
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) var.push_back(es.eigenvalues()(j));
  return FramewisePrior(spec.frames, es.eigenvectors(), std::move(var), "framewise");
}

std::vector<double> sample_source(const GaussianSourceSpec& spec, std::uint64_t seed,
                                  std::uint64_t index) {
  Eigen::LLT<MatrixXd> llt(spec.sigma);
  if (llt.info() != Eigen::Success) fail(Errc::NotPositiveDefinite, "source covariance");
  Eigen::VectorXd n(static_cast<Eigen::Index>(spec.dim()));
  KeyedStream::derive(seed, 0, 0, 0).normals(Purpose::Synthetic, index,
                                             std::span<double>(n.data(), spec.dim()));
  const Eigen::VectorXd y = llt.matrixL() * n;
  return {y.data(), y.data() + y.size()};
}

MeasuredGap measure_coded_gap(const GaussianSourceSpec& spec, const NoiseSchedule& sched,
                              int t_star, std::size_t runs, std::uint64_t base_seed,
                              std::size_t chunk_size, double kl_cap) {
  check_step(sched, t_star);
  if (runs == 0) fail(Errc::BadConfig, "measured gap needs at least one run");
  const SpectralGaussianPrior joint = joint_prior(spec);
  const FramewisePrior fw = framewise_prior(spec);
  const LatentShape shape{spec.frames, 1, spec.frame_dim, 1};
  MeasuredGap out;
  out.runs = runs;
  out.step_diff.assign(static_cast<std::size_t>(sched.steps()) + 1, 0.0);
  std::vector<double> totals;
  for (std::size_t r = 0; r < runs; ++r) {
    const LatentTensor y(shape, sample_source(spec, base_seed, r));
    const std::uint64_t seed = base_seed + r;
    const StepContext cj{joint, sched, ReverseVariance::Marginal, seed, 0, chunk_size, kl_cap};
    const StepContext cf{fw, sched, ReverseVariance::Marginal, seed, 0, chunk_size, kl_cap};
    const GopEncoding ej = encode_gop(cj, y, t_star);
    const GopEncoding ef = encode_gop(cf, y, t_star);
    for (int t = t_star; t <= sched.steps() - 1; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      const double dj = ej.rate_table[ti] - ej.rate_table[ti + 1];
      const double df = ef.rate_table[ti] - ef.rate_table[ti + 1];
      out.step_diff[ti] += (df - dj) / static_cast<double>(runs);
    }
    totals.push_back(ef.rate_table[static_cast<std::size_t>(t_star)] -
                     ej.rate_table[static_cast<std::size_t>(t_star)]);
  }
  for (double d : totals) out.total += d / static_cast<double>(runs);
  if (runs > 1) {
    double ss = 0.0;
    for (double d : totals) ss += (d - out.total) * (d - out.total);
    out.total_sd = std::sqrt(ss / static_cast<double>(runs - 1));
  }
  return out;
}

std::string theory_csv(const std::vector<TheoryRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "rho,t,L_fw,L_joint,gap,MI,measured_diff\n";
  for (const TheoryRow& r : rows)
    os << r.rho << ',' << r.t << ',' << r.l_fw << ',' << r.l_joint << ',' << r.gap << ',' << r.mi
       << ',' << r.measured_diff << '\n';
  return os.str();
}

}  // namespace fgvc
