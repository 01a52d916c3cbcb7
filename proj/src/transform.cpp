#include "fgvc/transform.hpp"

#include <cmath>
#include <numbers>

#include "fgvc/error.hpp"
#include "fgvc/kernels.hpp"

namespace fgvc {

std::vector<double> dct_matrix(std::size_t n) {
  std::vector<double> m(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j)
      m[k * n + j] = scale * std::cos(std::numbers::pi * (2.0 * static_cast<double>(j) + 1.0) *
                                      static_cast<double>(k) / (2.0 * static_cast<double>(n)));
  }
  return m;
}

LatentShape latent_shape_for(const VideoTensor& clip, const TransformSpec& spec) {
  if (spec.temporal == 0 || spec.spatial == 0)
    fail(Errc::BadDims, "transform factors must be positive");
  if (clip.frames % spec.temporal || clip.height % spec.spatial || clip.width % spec.spatial)
    fail(Errc::BadDims, "clip " + std::to_string(clip.frames) + "x" + std::to_string(clip.height) +
                            "x" + std::to_string(clip.width) + " not divisible by (" +
                            std::to_string(spec.temporal) + "," + std::to_string(spec.spatial) +
                            "," + std::to_string(spec.spatial) + ")");
  return {clip.frames / spec.temporal, clip.height / spec.spatial, clip.width / spec.spatial,
          clip.channels * spec.temporal * spec.spatial * spec.spatial};
}

namespace {

// In-place separable transform of one s x d x d block. `forward` applies
// the DCT matrix, otherwise its transpose.
class BlockKernel {
 public:
  BlockKernel(std::size_t s, std::size_t d)
      : s_(s), d_(d), ct_(dct_matrix(s)), cs_(dct_matrix(d)), tmp_(s * d * d), row_(d) {}

  void apply(std::vector<double>& block, bool forward) {
    const std::size_t plane = d_ * d_;
    // temporal axis: rows of d*d contiguous values
    std::fill(tmp_.begin(), tmp_.end(), 0.0);
    for (std::size_t k = 0; k < s_; ++k)
      for (std::size_t j = 0; j < s_; ++j) {
        const double c = forward ? ct_[k * s_ + j] : ct_[j * s_ + k];
        kernels::axpy(c, std::span<const double>(block).subspan(j * plane, plane),
                      std::span<double>(tmp_).subspan(k * plane, plane));
      }
    // vertical axis: rows of d contiguous values
    std::fill(block.begin(), block.end(), 0.0);
    for (std::size_t f = 0; f < s_; ++f)
      for (std::size_t k = 0; k < d_; ++k)
        for (std::size_t j = 0; j < d_; ++j) {
          const double c = forward ? cs_[k * d_ + j] : cs_[j * d_ + k];
          kernels::axpy(c, std::span<const double>(tmp_).subspan(f * plane + j * d_, d_),
                        std::span<double>(block).subspan(f * plane + k * d_, d_));
        }
    // horizontal axis: dot with basis rows (forward) or columns (inverse)
    std::vector<double>& basis = forward ? cs_ : cs_t();
    for (std::size_t r = 0; r < s_ * d_; ++r) {
      double* row = block.data() + r * d_;
      std::copy(row, row + d_, row_.begin());
      for (std::size_t k = 0; k < d_; ++k)
        row[k] = kernels::active().dot(basis.data() + k * d_, row_.data(), d_);
    }
  }

 private:
  std::vector<double>& cs_t() {
    if (cs_transposed_.empty()) {
      cs_transposed_.resize(d_ * d_);
      for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t j = 0; j < d_; ++j) cs_transposed_[i * d_ + j] = cs_[j * d_ + i];
    }
    return cs_transposed_;
  }

  std::size_t s_, d_;
  std::vector<double> ct_, cs_, cs_transposed_, tmp_, row_;
};

}  // namespace

LatentTensor transform_forward(const VideoTensor& clip, const TransformSpec& spec, double offset) {
  const LatentShape shape = latent_shape_for(clip, spec);
  if (!spec.keep.empty() && spec.keep.size() != shape.channels)
    fail(Errc::BadDims, "truncation mask length differs from channel count");
  const std::size_t s = spec.temporal, d = spec.spatial;
  const std::size_t block_size = s * d * d;
  LatentTensor out(shape);
  BlockKernel kernel(s, d);
  std::vector<double> block(block_size);
  for (std::size_t bt = 0; bt < shape.frames; ++bt)
    for (std::size_t by = 0; by < shape.height; ++by)
      for (std::size_t bx = 0; bx < shape.width; ++bx)
        for (std::size_t p = 0; p < clip.channels; ++p) {
          for (std::size_t f = 0; f < s; ++f)
            for (std::size_t y = 0; y < d; ++y)
              for (std::size_t x = 0; x < d; ++x)
                block[(f * d + y) * d + x] =
                    clip.at(bt * s + f, by * d + y, bx * d + x, p) - offset;
          kernel.apply(block, true);
          for (std::size_t k = 0; k < block_size; ++k) {
            const std::size_t c = p * block_size + k;
            out.at(bt, by, bx, c) = spec.keep.empty() || spec.keep[c] ? block[k] : 0.0;
          }
        }
  return out;
}

VideoTensor transform_inverse(const LatentTensor& latent, const TransformSpec& spec,
                              std::size_t planes, double offset) {
  const LatentShape& shape = latent.shape();
  const std::size_t s = spec.temporal, d = spec.spatial;
  const std::size_t block_size = s * d * d;
  if (shape.channels != planes * block_size)
    fail(Errc::BadDims, "latent channels " + std::to_string(shape.channels) +
                            " do not match planes x s x d x d");
  VideoTensor out(shape.frames * s, shape.height * d, shape.width * d, planes);
  BlockKernel kernel(s, d);
  std::vector<double> block(block_size);
  for (std::size_t bt = 0; bt < shape.frames; ++bt)
    for (std::size_t by = 0; by < shape.height; ++by)
      for (std::size_t bx = 0; bx < shape.width; ++bx)
        for (std::size_t p = 0; p < planes; ++p) {
          for (std::size_t k = 0; k < block_size; ++k) block[k] = latent.at(bt, by, bx, p * block_size + k);
          kernel.apply(block, false);
          for (std::size_t f = 0; f < s; ++f)
            for (std::size_t y = 0; y < d; ++y)
              for (std::size_t x = 0; x < d; ++x)
                out.at(bt * s + f, by * d + y, bx * d + x, p) = block[(f * d + y) * d + x] + offset;
        }
  return out;
}

}  // namespace fgvc
