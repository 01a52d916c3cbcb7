#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fgvc {

struct LatentShape {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const { return frames * height * width * channels; }
  std::size_t frame_size() const { return height * width * channels; }
  friend bool operator==(const LatentShape&, const LatentShape&) = default;
};

std::string to_string(const LatentShape& s);

// Row-major (frame, y, x, channel) array of reals.
class LatentTensor {
 public:
  LatentTensor() = default;
  explicit LatentTensor(LatentShape shape, double fill = 0.0);
  LatentTensor(LatentShape shape, std::vector<double> values);

  const LatentShape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> frame(std::size_t f);
  std::span<const double> frame(std::size_t f) const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t f, std::size_t y, std::size_t x, std::size_t c);
  double at(std::size_t f, std::size_t y, std::size_t x, std::size_t c) const;

  bool all_finite() const;

 private:
  LatentShape shape_;
  std::vector<double> data_;
};

void require_same_shape(const LatentTensor& a, const LatentTensor& b, const char* where);

enum class ColorSpace { Gray, YUV, RGB };

// Frames x height x width x channels, samples in [0, 1].
struct VideoTensor {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  ColorSpace color = ColorSpace::Gray;
  int fps_num = 25;
  int fps_den = 1;
  std::vector<double> data;

  VideoTensor() = default;
  VideoTensor(std::size_t frames, std::size_t height, std::size_t width, std::size_t channels,
              double fill = 0.0);

  std::size_t frame_size() const { return height * width * channels; }
  std::size_t pixels_per_frame() const { return height * width; }
  std::span<double> frame(std::size_t f);
  std::span<const double> frame(std::size_t f) const;
  double& at(std::size_t f, std::size_t y, std::size_t x, std::size_t c = 0);
  double at(std::size_t f, std::size_t y, std::size_t x, std::size_t c = 0) const;

  // Luma plane of frame f (channel 0 for gray/YUV, BT.601 weights for RGB).
  std::vector<double> luma(std::size_t f) const;

  VideoTensor slice(std::size_t first, std::size_t count) const;
  bool same_geometry(const VideoTensor& o) const;
};

}  // namespace fgvc
