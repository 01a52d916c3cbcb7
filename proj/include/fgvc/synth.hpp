#pragma once

#include <cstdint>

#include "fgvc/tensor.hpp"

namespace fgvc {

// Gray videos for tests and benches; all draws come from the Synthetic stream.

// Separable AR(1) Gaussian field around mid-gray: temporal correlation
// rho_t, spatial rho_s, marginal standard deviation `sd`.
VideoTensor gaussian_ar1_video(std::size_t frames, std::size_t height, std::size_t width,
                               double rho_t, double rho_s, double sd, std::uint64_t seed);

// Like gaussian_ar1_video, but the standard deviation drifts linearly from
// sd_start to sd_end over the clip.
VideoTensor drifting_variance_video(std::size_t frames, std::size_t height, std::size_t width,
                                    double rho_t, double rho_s, double sd_start, double sd_end,
                                    std::uint64_t seed);

// A smooth random texture translating by (vx, vy) pixels per frame with
// wrap-around, plus light sensor noise.
VideoTensor moving_texture_video(std::size_t frames, std::size_t height, std::size_t width,
                                 double vx, double vy, std::uint64_t seed);

}  // namespace fgvc
