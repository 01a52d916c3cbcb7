#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fgvc/tensor.hpp"

namespace fgvc {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// Temp file in the same directory, then rename: readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

// Header lines are kept verbatim so an unmodified file writes back byte-exact.
struct Y4mVideo {
  VideoTensor video;
  std::string header;                      // "YUV4MPEG2 ..." without newline
  std::vector<std::string> frame_headers;  // "FRAME..." lines
};

Y4mVideo parse_y4m(const std::vector<std::uint8_t>& bytes);
Y4mVideo read_y4m(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_y4m(const Y4mVideo& y4m);
// Fresh header for a tensor (mono or 444).
Y4mVideo make_y4m(const VideoTensor& video);
void write_y4m(const std::filesystem::path& path, const VideoTensor& video);

// 8-bit planar raw with a key=value sidecar (width, height, frames,
// channels, fps) at <path>.dims.
struct RawDims {
  std::size_t width = 0, height = 0, frames = 0, channels = 1;
  int fps_num = 25, fps_den = 1;
};
RawDims parse_dims(const std::string& text);
std::string format_dims(const RawDims& dims);
std::filesystem::path dims_path(const std::filesystem::path& raw);

VideoTensor read_raw(const std::filesystem::path& path, const RawDims& dims);
VideoTensor read_raw(const std::filesystem::path& path);  // sidecar next to the file
void write_raw(const std::filesystem::path& path, const VideoTensor& video);  // + sidecar

// Dispatch on extension: .y4m, otherwise raw.
VideoTensor read_video(const std::filesystem::path& path);
void write_video(const std::filesystem::path& path, const VideoTensor& video);

std::uint8_t to_byte(double v);

}  // namespace fgvc
