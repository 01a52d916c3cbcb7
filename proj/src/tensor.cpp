#include "fgvc/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "fgvc/error.hpp"

namespace fgvc {

std::string to_string(const LatentShape& s) {
  return "(" + std::to_string(s.frames) + "," + std::to_string(s.height) + "," +
         std::to_string(s.width) + "," + std::to_string(s.channels) + ")";
}

LatentTensor::LatentTensor(LatentShape shape, double fill)
    : shape_(shape), data_(shape.size(), fill) {}

LatentTensor::LatentTensor(LatentShape shape, std::vector<double> values)
    : shape_(shape), data_(std::move(values)) {
  if (data_.size() != shape_.size())
    fail(Errc::ShapeMismatch, "value count " + std::to_string(data_.size()) +
                                  " does not match shape " + to_string(shape_));
}

std::span<double> LatentTensor::frame(std::size_t f) {
  return std::span<double>(data_).subspan(f * shape_.frame_size(), shape_.frame_size());
}

std::span<const double> LatentTensor::frame(std::size_t f) const {
  return std::span<const double>(data_).subspan(f * shape_.frame_size(), shape_.frame_size());
}

double& LatentTensor::at(std::size_t f, std::size_t y, std::size_t x, std::size_t c) {
  return data_[((f * shape_.height + y) * shape_.width + x) * shape_.channels + c];
}

double LatentTensor::at(std::size_t f, std::size_t y, std::size_t x, std::size_t c) const {
  return data_[((f * shape_.height + y) * shape_.width + x) * shape_.channels + c];
}

bool LatentTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const LatentTensor& a, const LatentTensor& b, const char* where) {
  if (!(a.shape() == b.shape()))
    fail(Errc::ShapeMismatch,
         std::string(where) + ": " + to_string(a.shape()) + " vs " + to_string(b.shape()));
}

VideoTensor::VideoTensor(std::size_t frames_, std::size_t height_, std::size_t width_,
                         std::size_t channels_, double fill)
    : frames(frames_), height(height_), width(width_), channels(channels_),
      color(channels_ == 3 ? ColorSpace::YUV : ColorSpace::Gray),
      data(frames_ * height_ * width_ * channels_, fill) {}

std::span<double> VideoTensor::frame(std::size_t f) {
  return std::span<double>(data).subspan(f * frame_size(), frame_size());
}

std::span<const double> VideoTensor::frame(std::size_t f) const {
  return std::span<const double>(data).subspan(f * frame_size(), frame_size());
}

double& VideoTensor::at(std::size_t f, std::size_t y, std::size_t x, std::size_t c) {
  return data[((f * height + y) * width + x) * channels + c];
}

double VideoTensor::at(std::size_t f, std::size_t y, std::size_t x, std::size_t c) const {
  return data[((f * height + y) * width + x) * channels + c];
}

std::vector<double> VideoTensor::luma(std::size_t f) const {
  std::vector<double> out(pixels_per_frame());
  const auto src = frame(f);
  for (std::size_t p = 0; p < out.size(); ++p) {
    if (color == ColorSpace::RGB && channels == 3)
      out[p] = 0.299 * src[3 * p] + 0.587 * src[3 * p + 1] + 0.114 * src[3 * p + 2];
    else
      out[p] = src[p * channels];
  }
  return out;
}

VideoTensor VideoTensor::slice(std::size_t first, std::size_t count) const {
  if (first + count > frames)
    fail(Errc::SizeMismatch, "slice [" + std::to_string(first) + ", " +
                                 std::to_string(first + count) + ") exceeds " +
                                 std::to_string(frames) + " frames");
  VideoTensor out(count, height, width, channels);
  out.color = color;
  out.fps_num = fps_num;
  out.fps_den = fps_den;
  std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(first * frame_size()),
              count * frame_size(), out.data.begin());
  return out;
}

bool VideoTensor::same_geometry(const VideoTensor& o) const {
  return frames == o.frames && height == o.height && width == o.width && channels == o.channels;
}

}  // namespace fgvc
