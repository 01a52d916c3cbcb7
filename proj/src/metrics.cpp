#include "fgvc/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "fgvc/error.hpp"
#include "fgvc/kernels.hpp"

namespace fgvc {

double bpp(double total_bits, std::size_t frames, std::size_t height, std::size_t width) {
  if (frames == 0 || height == 0 || width == 0) fail(Errc::ZeroDims, "bpp over an empty volume");
  return total_bits / (static_cast<double>(frames) * static_cast<double>(height) *
                       static_cast<double>(width));
}

double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(Errc::ShapeMismatch, "mse of unequal sizes");
  if (a.empty()) fail(Errc::ZeroDims, "mse of empty inputs");
  return kernels::sum_sq_diff(a, b) / static_cast<double>(a.size());
}

double mse(const VideoTensor& a, const VideoTensor& b) {
  if (!a.same_geometry(b)) fail(Errc::ShapeMismatch, "mse of videos with different geometry");
  return mse(std::span<const double>(a.data), std::span<const double>(b.data));
}

double psnr(double mse_value, double peak) {
  if (mse_value <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse_value);
}

namespace {

constexpr std::size_t kWin = 11;
constexpr std::array<double, 5> kScaleWeights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

const std::array<double, kWin>& gaussian_window() {
  static const std::array<double, kWin> w = [] {
    std::array<double, kWin> g{};
    double sum = 0.0;
    for (std::size_t i = 0; i < kWin; ++i) {
      const double x = static_cast<double>(i) - 5.0;
      g[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
      sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
  }();
  return w;
}

struct Plane {
  std::size_t h = 0, w = 0;
  std::vector<double> v;
};

// Separable "valid" Gaussian filter: output (h-10) x (w-10).
Plane filter_valid(const Plane& in) {
  const auto& g = gaussian_window();
  const auto& k = kernels::active();
  const std::size_t ow = in.w - kWin + 1, oh = in.h - kWin + 1;
  // Rows, written transposed so the second pass is contiguous too.
  std::vector<double> row(ow), tmp(ow * in.h);
  for (std::size_t y = 0; y < in.h; ++y) {
    k.correlate(in.v.data() + y * in.w, g.data(), kWin, row.data(), ow);
    for (std::size_t x = 0; x < ow; ++x) tmp[x * in.h + y] = row[x];
  }
  Plane out{oh, ow, std::vector<double>(oh * ow)};
  std::vector<double> col(oh);
  for (std::size_t x = 0; x < ow; ++x) {
    k.correlate(tmp.data() + x * in.h, g.data(), kWin, col.data(), oh);
    for (std::size_t y = 0; y < oh; ++y) out.v[y * ow + x] = col[y];
  }
  return out;
}

Plane downsample(const Plane& p) {
  Plane out{p.h / 2, p.w / 2, {}};
  out.v.resize(out.h * out.w);
  for (std::size_t y = 0; y < out.h; ++y)
    for (std::size_t x = 0; x < out.w; ++x) {
      const double* r0 = p.v.data() + 2 * y * p.w + 2 * x;
      const double* r1 = r0 + p.w;
      out.v[y * out.w + x] = ((r0[0] + r0[1]) + (r1[0] + r1[1])) * 0.25;
    }
  return out;
}

// Mean luminance and contrast-structure terms at one scale.
std::pair<double, double> ssim_terms(const Plane& a, const Plane& b) {
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const std::size_t n = a.v.size();
  Plane aa{a.h, a.w, std::vector<double>(n)}, bb = aa, ab = aa;
  kernels::mul(a.v, a.v, aa.v);
  kernels::mul(b.v, b.v, bb.v);
  kernels::mul(a.v, b.v, ab.v);
  const Plane mu_a = filter_valid(a), mu_b = filter_valid(b);
  const Plane s_aa = filter_valid(aa), s_bb = filter_valid(bb), s_ab = filter_valid(ab);
  double l_sum = 0.0, cs_sum = 0.0;
  for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i], mb = mu_b.v[i];
    const double va = s_aa.v[i] - ma * ma, vb = s_bb.v[i] - mb * mb, cov = s_ab.v[i] - ma * mb;
    const double cs = (2.0 * cov + c2) / (va + vb + c2);
    l_sum += (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1) * cs;
    cs_sum += cs;
  }
  const double count = static_cast<double>(mu_a.v.size());
  return {l_sum / count, cs_sum / count};
}

}  // namespace

std::size_t max_ms_ssim_scales(std::size_t height, std::size_t width) {
  std::size_t s = 0;
  while (s < kScaleWeights.size() && std::min(height, width) >= (std::size_t{1} << s) * kWin) ++s;
  return s;
}

double ms_ssim(std::span<const double> a, std::span<const double> b, std::size_t height,
               std::size_t width, std::size_t scales) {
  if (height == 0 || width == 0) fail(Errc::ZeroDims, "ms_ssim of an empty plane");
  if (a.size() != height * width || b.size() != height * width)
    fail(Errc::ShapeMismatch, "ms_ssim planes do not match " + std::to_string(height) + "x" +
                                  std::to_string(width));
  const std::size_t fit = max_ms_ssim_scales(height, width);
  if (fit == 0 || scales > fit || scales > kScaleWeights.size())
    fail(Errc::TooSmallForScales,
         std::to_string(height) + "x" + std::to_string(width) + " supports " +
             std::to_string(fit) + " scale(s), " + std::to_string(scales ? scales : 1) + " requested");
  const std::size_t m = scales ? scales : fit;
  double wsum = 0.0;
  for (std::size_t j = 0; j < m; ++j) wsum += kScaleWeights[j];

  Plane pa{height, width, {a.begin(), a.end()}}, pb{height, width, {b.begin(), b.end()}};
  double result = 1.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto [ssim, cs] = ssim_terms(pa, pb);
    const double term = j + 1 == m ? ssim : cs;
    result *= std::pow(std::max(term, 0.0), kScaleWeights[j] / wsum);
    if (j + 1 < m) {
      pa = downsample(pa);
      pb = downsample(pb);
    }
  }
  return result;
}

double ms_ssim(const VideoTensor& a, std::size_t fa, const VideoTensor& b, std::size_t fb,
               std::size_t scales) {
  if (a.height != b.height || a.width != b.width)
    fail(Errc::ShapeMismatch, "ms_ssim frames differ in size");
  return ms_ssim(a.luma(fa), b.luma(fb), a.height, a.width, scales);
}

double mean_ms_ssim(const VideoTensor& a, const VideoTensor& b, std::size_t first,
                    std::size_t count) {
  if (!a.same_geometry(b)) fail(Errc::ShapeMismatch, "mean_ms_ssim of videos with different geometry");
  if (count == 0) count = a.frames - std::min(first, a.frames);
  if (count == 0 || first + count > a.frames) fail(Errc::ZeroDims, "empty frame range for ms_ssim");
  double sum = 0.0;
  for (std::size_t f = first; f < first + count; ++f) sum += ms_ssim(a, f, b, f);
  return sum / static_cast<double>(count);
}

bool RateQualityCurve::monotone() const {
  auto p = points;
  std::sort(p.begin(), p.end());
  for (std::size_t i = 1; i < p.size(); ++i)
    if (!(p[i].first > p[i - 1].first) || !(p[i].second > p[i - 1].second)) return false;
  return true;
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) fail(Errc::DegenerateFit, "interpolation needs >= 2 points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) fail(Errc::DegenerateFit, "interpolation abscissae must increase");
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (delta[k - 1] * delta[k] <= 0.0) continue;
    const double w1 = 2.0 * h[k] + h[k - 1], w2 = h[k] + 2.0 * h[k - 1];
    d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
  }
  auto edge = [](double h0, double h1, double m0, double m1) {
    double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (std::signbit(d) != std::signbit(m0) || m0 == 0.0) return 0.0;
    if (std::signbit(m0) != std::signbit(m1) && std::abs(d) > 3.0 * std::abs(m0)) return 3.0 * m0;
    return d;
  };
  d_[0] = edge(h[0], h[1], delta[0], delta[1]);
  d_[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

namespace {

std::size_t segment_of(const std::vector<double>& x, double v) {
  auto it = std::upper_bound(x.begin(), x.end(), v);
  std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  return std::min(k, x.size() - 2);
}

}  // namespace

double Pchip::operator()(double x) const {
  const std::size_t k = segment_of(x_, x);
  const double h = x_[k + 1] - x_[k], s = (x - x_[k]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y_[k] + (s3 - 2 * s2 + s) * h * d_[k] + (-2 * s3 + 3 * s2) * y_[k + 1] +
         (s3 - s2) * h * d_[k + 1];
}

double Pchip::integrate(double a, double b) const {
  if (a > b) return -integrate(b, a);
  // Antiderivatives of the Hermite basis in s in [0, 1].
  auto prim = [&](std::size_t k, double s) {
    const double h = x_[k + 1] - x_[k];
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    return h * ((s - s3 + s4 / 2) * y_[k] + (s2 / 2 - 2 * s3 / 3 + s4 / 4) * h * d_[k] +
                (s3 - s4 / 2) * y_[k + 1] + (-s3 / 3 + s4 / 4) * h * d_[k + 1]);
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
    const double lo = std::max(a, x_[k]), hi = std::min(b, x_[k + 1]);
    if (lo >= hi) continue;
    const double h = x_[k + 1] - x_[k];
    total += prim(k, (hi - x_[k]) / h) - prim(k, (lo - x_[k]) / h);
  }
  return total;
}

namespace {

// Sorted (x, y) columns; x must be strictly increasing.
std::pair<std::vector<double>, std::vector<double>> columns(const RateQualityCurve& c, bool rate_as_x) {
  if (c.points.size() < 2) fail(Errc::DegenerateFit, "BD computation needs >= 2 points per curve");
  std::vector<std::pair<double, double>> p;
  for (auto [r, q] : c.points) {
    if (!(r > 0.0) || !std::isfinite(q)) fail(Errc::DegenerateFit, "BD curve needs positive rates");
    p.emplace_back(rate_as_x ? std::log(r) : q, rate_as_x ? q : std::log(r));
  }
  std::sort(p.begin(), p.end());
  std::vector<double> x, y;
  for (auto [a, b] : p) {
    x.push_back(a);
    y.push_back(b);
  }
  return {x, y};
}

std::optional<double> bd_average(const RateQualityCurve& anchor, const RateQualityCurve& test,
                                 bool rate_as_x) {
  auto [xa, ya] = columns(anchor, rate_as_x);
  auto [xt, yt] = columns(test, rate_as_x);
  const Pchip pa(xa, ya), pt(xt, yt);
  const double lo = std::max(pa.lo(), pt.lo()), hi = std::min(pa.hi(), pt.hi());
  if (!(hi > lo)) return std::nullopt;
  return (pt.integrate(lo, hi) - pa.integrate(lo, hi)) / (hi - lo);
}

}  // namespace

std::optional<double> bd_rate(const RateQualityCurve& anchor, const RateQualityCurve& test) {
  const auto avg = bd_average(anchor, test, false);
  if (!avg) return std::nullopt;
  return std::expm1(*avg) * 100.0;
}

std::optional<double> bd_metric(const RateQualityCurve& anchor, const RateQualityCurve& test) {
  return bd_average(anchor, test, true);
}

double boundary_discontinuity(const VideoTensor& video, std::span<const std::size_t> boundaries) {
  std::vector<bool> is_boundary(video.frames, false);
  std::size_t nb = 0;
  for (std::size_t b : boundaries)
    if (b >= 1 && b < video.frames && !is_boundary[b]) is_boundary[b] = true, ++nb;
  if (nb == 0) fail(Errc::NoBoundaries, "no boundary falls inside the video");
  double bsum = 0.0, isum = 0.0;
  std::size_t ni = 0;
  const double n = static_cast<double>(video.frame_size());
  for (std::size_t f = 1; f < video.frames; ++f) {
    const auto a = video.frame(f - 1), b = video.frame(f);
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(b[i] - a[i]);
    d /= n;
    if (is_boundary[f]) bsum += d;
    else isum += d, ++ni;
  }
  const double bmean = bsum / static_cast<double>(nb);
  const double imean = ni ? isum / static_cast<double>(ni) : 0.0;
  if (imean == 0.0) return bmean == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return bmean / imean;
}

std::string curve_csv(const RateQualityCurve& curve) {
  std::ostringstream os;
  os.precision(12);
  os << "bpp," << curve.metric << '\n';
  for (auto [r, q] : curve.points) os << r << ',' << q << '\n';
  return os.str();
}

RateQualityCurve parse_curve_csv(const std::string& text) {
  RateQualityCurve c;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      fail(Errc::BadConfig, "curve line " + std::to_string(lineno) + ": expected bpp,metric");
    const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
    if (lineno == 1 && a == "bpp") {
      c.metric = b;
      continue;
    }
    if (a == "N/A") continue;
    try {
      c.points.emplace_back(std::stod(a), std::stod(b));
    } catch (const std::exception&) {
      fail(Errc::BadConfig, "curve line " + std::to_string(lineno) + ": not a number");
    }
  }
  return c;
}

std::string format_bd(const std::optional<double>& value) {
  if (!value) return "N/A";
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << *value;
  return os.str();
}

}  // namespace fgvc
