#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fgvc/tensor.hpp"

namespace fgvc {

double bpp(double total_bits, std::size_t frames, std::size_t height, std::size_t width);

double mse(std::span<const double> a, std::span<const double> b);
double mse(const VideoTensor& a, const VideoTensor& b);
double psnr(double mse_value, double peak = 1.0);

// Largest usable scale count for an h x w plane (0 if below one window).
std::size_t max_ms_ssim_scales(std::size_t height, std::size_t width);

// MS-SSIM of two luma planes. scales == 0 picks the largest count (up to 5)
// the resolution allows; an explicit count that does not fit is an error.
double ms_ssim(std::span<const double> a, std::span<const double> b, std::size_t height,
               std::size_t width, std::size_t scales = 0);
double ms_ssim(const VideoTensor& a, std::size_t fa, const VideoTensor& b, std::size_t fb,
               std::size_t scales = 0);
// Mean frame MS-SSIM over frames [first, first + count).
double mean_ms_ssim(const VideoTensor& a, const VideoTensor& b, std::size_t first = 0,
                    std::size_t count = 0);

struct RateQualityCurve {
  std::vector<std::pair<double, double>> points;  // (bpp, metric)
  std::string metric = "ms-ssim";
  bool monotone() const;
};

// Bjontegaard deltas with monotone piecewise-cubic interpolation.
// nullopt when the curves do not overlap (reported as N/A).
std::optional<double> bd_rate(const RateQualityCurve& anchor, const RateQualityCurve& test);
std::optional<double> bd_metric(const RateQualityCurve& anchor, const RateQualityCurve& test);

// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes).
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;
  double integrate(double a, double b) const;
  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }

 private:
  std::vector<double> x_, y_, d_;
};

// Mean |frame_b - frame_{b-1}| at boundaries over the mean at interior pairs.
double boundary_discontinuity(const VideoTensor& video, std::span<const std::size_t> boundaries);

std::string curve_csv(const RateQualityCurve& curve);
RateQualityCurve parse_curve_csv(const std::string& text);
std::string format_bd(const std::optional<double>& value);

}  // namespace fgvc
