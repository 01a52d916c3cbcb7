#pragma once

#include <cstddef>
#include <vector>

#include "fgvc/prior.hpp"
#include "fgvc/tensor.hpp"

namespace fgvc {

// Separable orthonormal DCT-II over (s frames) x (d x d pixels) blocks.
// Block coefficients become latent channels, so a clip of L x H x W x P
// maps to (L/s) x (H/d) x (W/d) x (P*s*d*d) with no loss of dimension.
struct TransformSpec {
  std::size_t temporal = 4;
  std::size_t spatial = 8;
  // Optional per-channel keep mask; dropped channels are zeroed forward.
  std::vector<bool> keep;

  BlockLayout layout(std::size_t planes) const { return {planes, temporal, spatial}; }
};

// Orthonormal DCT-II matrix, row k = k-th basis vector.
std::vector<double> dct_matrix(std::size_t n);

LatentShape latent_shape_for(const VideoTensor& clip, const TransformSpec& spec);

// `offset` is subtracted from every sample first (0.5 centres [0,1] data).
LatentTensor transform_forward(const VideoTensor& clip, const TransformSpec& spec,
                               double offset = 0.0);

// Inverse; `offset` is added back. Geometry of `like` (colour, fps) is kept.
VideoTensor transform_inverse(const LatentTensor& latent, const TransformSpec& spec,
                              std::size_t planes, double offset = 0.0);

}  // namespace fgvc
