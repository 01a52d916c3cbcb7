#include "fgvc/synth.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "fgvc/error.hpp"
#include "fgvc/rng.hpp"

namespace fgvc {

namespace {

// Unit-variance field with correlation rho^|d| along both axes.
std::vector<double> correlated_field(std::size_t h, std::size_t w, double rho,
                                     const KeyedStream& key, std::uint64_t index) {
  std::vector<double> f(h * w);
  key.normals(Purpose::Synthetic, index, f);
  const double c = std::sqrt(1.0 - rho * rho);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 1; x < w; ++x) f[y * w + x] = rho * f[y * w + x - 1] + c * f[y * w + x];
  for (std::size_t y = 1; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) f[y * w + x] = rho * f[(y - 1) * w + x] + c * f[y * w + x];
  return f;
}

void check_dims(std::size_t frames, std::size_t h, std::size_t w) {
  if (!frames || !h || !w) fail(Errc::ZeroDims, "synthetic video needs positive dimensions");
}

}  // namespace

VideoTensor drifting_variance_video(std::size_t frames, std::size_t height, std::size_t width,
                                    double rho_t, double rho_s, double sd_start, double sd_end,
                                    std::uint64_t seed) {
  check_dims(frames, height, width);
  const auto key = KeyedStream::derive(seed, 0, 0, 0);
  VideoTensor v(frames, height, width, 1);
  std::vector<double> state = correlated_field(height, width, rho_s, key, 0);
  const double c = std::sqrt(1.0 - rho_t * rho_t);
  for (std::size_t f = 0; f < frames; ++f) {
    if (f > 0) {
      const auto innov = correlated_field(height, width, rho_s, key, f);
      for (std::size_t i = 0; i < state.size(); ++i) state[i] = rho_t * state[i] + c * innov[i];
    }
    const double u = frames > 1 ? static_cast<double>(f) / static_cast<double>(frames - 1) : 0.0;
    const double sd = sd_start + (sd_end - sd_start) * u;
    auto fr = v.frame(f);
    for (std::size_t i = 0; i < state.size(); ++i) fr[i] = 0.5 + sd * state[i];
  }
  return v;
}

VideoTensor gaussian_ar1_video(std::size_t frames, std::size_t height, std::size_t width,
                               double rho_t, double rho_s, double sd, std::uint64_t seed) {
  return drifting_variance_video(frames, height, width, rho_t, rho_s, sd, sd, seed);
}

VideoTensor moving_texture_video(std::size_t frames, std::size_t height, std::size_t width,
                                 double vx, double vy, std::uint64_t seed) {
  check_dims(frames, height, width);
  const auto key = KeyedStream::derive(seed, 1, 0, 0);
  // A handful of random plane waves give a smooth periodic texture.
  constexpr int kWaves = 6;
  double amp[kWaves], kx[kWaves], ky[kWaves], phase[kWaves];
  for (int i = 0; i < kWaves; ++i) {
    amp[i] = 0.05 + 0.05 * key.uniform(Purpose::Synthetic, static_cast<std::uint64_t>(i), 0);
    kx[i] = std::floor(1.0 + 3.0 * key.uniform(Purpose::Synthetic, static_cast<std::uint64_t>(i), 1));
    ky[i] = std::floor(1.0 + 3.0 * key.uniform(Purpose::Synthetic, static_cast<std::uint64_t>(i), 2));
    phase[i] = 2.0 * std::numbers::pi * key.uniform(Purpose::Synthetic, static_cast<std::uint64_t>(i), 3);
  }
  VideoTensor v(frames, height, width, 1);
  std::vector<double> noise(height * width);
  for (std::size_t f = 0; f < frames; ++f) {
    key.normals(Purpose::Synthetic, 1000 + f, noise);
    const double ox = vx * static_cast<double>(f), oy = vy * static_cast<double>(f);
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        const double px = 2.0 * std::numbers::pi * (static_cast<double>(x) - ox) / static_cast<double>(width);
        const double py = 2.0 * std::numbers::pi * (static_cast<double>(y) - oy) / static_cast<double>(height);
        double s = 0.5;
        for (int i = 0; i < kWaves; ++i) s += amp[i] * std::sin(kx[i] * px + ky[i] * py + phase[i]);
        v.at(f, y, x) = s + 0.01 * noise[y * width + x];
      }
  }
  return v;
}

}  // namespace fgvc
