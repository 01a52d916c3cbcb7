#include "fgvc/video_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "fgvc/error.hpp"

namespace fgvc {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::FileNotFound, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoError, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      fail(Errc::IoError, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(Errc::IoError, "cannot rename onto " + path.string());
  }
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

namespace {

// Splits a header line into tokens, tracking byte offsets for errors.
std::vector<std::pair<std::string, std::size_t>> tokens(const std::string& line, std::size_t base) {
  std::vector<std::pair<std::string, std::size_t>> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start), base + start);
  }
  return out;
}

[[noreturn]] void bad_y4m(std::size_t offset, const std::string& what) {
  fail(Errc::MalformedY4M, "byte " + std::to_string(offset) + ": " + what);
}

std::size_t parse_positive(const std::string& s, std::size_t offset, const char* what) {
  std::size_t v = 0;
  if (s.empty()) bad_y4m(offset, std::string("empty ") + what);
  for (char c : s) {
    if (c < '0' || c > '9') bad_y4m(offset, std::string("bad ") + what + " '" + s + "'");
    v = v * 10 + static_cast<std::size_t>(c - '0');
    if (v > (std::size_t{1} << 31)) bad_y4m(offset, std::string(what) + " too large");
  }
  if (v == 0) bad_y4m(offset, std::string(what) + " must be positive");
  return v;
}

}  // namespace

Y4mVideo parse_y4m(const std::vector<std::uint8_t>& bytes) {
  auto line_at = [&](std::size_t pos, std::size_t& next) {
    const auto nl = std::find(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end(), '\n');
    if (nl == bytes.end()) bad_y4m(pos, "unterminated header line");
    next = static_cast<std::size_t>(nl - bytes.begin()) + 1;
    return std::string(bytes.begin() + static_cast<std::ptrdiff_t>(pos), nl);
  };
  Y4mVideo out;
  std::size_t pos = 0;
  out.header = line_at(0, pos);
  const auto toks = tokens(out.header, 0);
  if (toks.empty() || toks[0].first != "YUV4MPEG2") bad_y4m(0, "missing YUV4MPEG2 signature");
  std::size_t w = 0, h = 0;
  std::string chroma;
  int fn = 25, fd = 1;
  for (std::size_t i = 1; i < toks.size(); ++i) {
    const auto& [tok, off] = toks[i];
    const std::string val = tok.substr(1);
    switch (tok[0]) {
      case 'W': w = parse_positive(val, off, "width"); break;
      case 'H': h = parse_positive(val, off, "height"); break;
      case 'C': chroma = val; break;
      case 'F': {
        const auto colon = val.find(':');
        if (colon == std::string::npos) bad_y4m(off, "frame rate needs num:den");
        fn = static_cast<int>(parse_positive(val.substr(0, colon), off, "frame rate"));
        fd = static_cast<int>(parse_positive(val.substr(colon + 1), off, "frame rate"));
        break;
      }
      case 'I': case 'A': case 'X': break;
      default: bad_y4m(off, "unknown header token '" + tok + "'");
    }
  }
  if (w == 0 || h == 0) bad_y4m(0, "header lacks W or H");
  std::size_t channels = 0;
  ColorSpace color = ColorSpace::Gray;
  if (chroma == "mono") channels = 1;
  else if (chroma == "444") channels = 3, color = ColorSpace::YUV;
  else
    fail(Errc::UnsupportedChroma, "chroma '" + (chroma.empty() ? std::string("420 (default)") : chroma) +
                                      "' is not supported; use mono or 444");

  const std::size_t plane = w * h, frame_bytes = plane * channels;
  std::vector<std::uint8_t> samples;
  while (pos < bytes.size()) {
    std::size_t next = 0;
    const std::string fl = line_at(pos, next);
    if (fl.rfind("FRAME", 0) != 0) bad_y4m(pos, "expected FRAME marker");
    if (bytes.size() - next < frame_bytes)
      fail(Errc::SizeMismatch, "frame " + std::to_string(out.frame_headers.size()) + " at byte " +
                                   std::to_string(next) + " is truncated");
    out.frame_headers.push_back(fl);
    samples.insert(samples.end(), bytes.begin() + static_cast<std::ptrdiff_t>(next),
                   bytes.begin() + static_cast<std::ptrdiff_t>(next + frame_bytes));
    pos = next + frame_bytes;
  }
  const std::size_t frames = out.frame_headers.size();
  if (frames == 0) bad_y4m(pos, "no frames");
  VideoTensor v(frames, h, w, channels);
  v.color = color;
  v.fps_num = fn;
  v.fps_den = fd;
  for (std::size_t f = 0; f < frames; ++f)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t i = 0; i < plane; ++i)
        v.data[f * frame_bytes + i * channels + c] = samples[f * frame_bytes + c * plane + i] / 255.0;
  out.video = std::move(v);
  return out;
}

Y4mVideo read_y4m(const fs::path& path) { return parse_y4m(read_file(path)); }

std::vector<std::uint8_t> serialize_y4m(const Y4mVideo& y4m) {
  const VideoTensor& v = y4m.video;
  if (v.channels != 1 && v.channels != 3)
    fail(Errc::UnsupportedChroma, "Y4M output needs 1 or 3 channels");
  std::vector<std::uint8_t> out(y4m.header.begin(), y4m.header.end());
  out.push_back('\n');
  const std::size_t plane = v.pixels_per_frame();
  for (std::size_t f = 0; f < v.frames; ++f) {
    const std::string fh = f < y4m.frame_headers.size() ? y4m.frame_headers[f] : "FRAME";
    out.insert(out.end(), fh.begin(), fh.end());
    out.push_back('\n');
    const auto fr = v.frame(f);
    for (std::size_t c = 0; c < v.channels; ++c)
      for (std::size_t i = 0; i < plane; ++i) out.push_back(to_byte(fr[i * v.channels + c]));
  }
  return out;
}

Y4mVideo make_y4m(const VideoTensor& video) {
  Y4mVideo y;
  y.video = video;
  y.header = "YUV4MPEG2 W" + std::to_string(video.width) + " H" + std::to_string(video.height) +
             " F" + std::to_string(video.fps_num) + ":" + std::to_string(video.fps_den) +
             " Ip A1:1 C" + (video.channels == 1 ? "mono" : "444");
  return y;
}

void write_y4m(const fs::path& path, const VideoTensor& video) {
  write_file_atomic(path, serialize_y4m(make_y4m(video)));
}

RawDims parse_dims(const std::string& text) {
  RawDims d;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::BadConfig, "dims line '" + line + "' lacks '='");
    const std::string k = line.substr(0, eq), v = line.substr(eq + 1);
    try {
      if (k == "width") d.width = std::stoul(v);
      else if (k == "height") d.height = std::stoul(v);
      else if (k == "frames") d.frames = std::stoul(v);
      else if (k == "channels") d.channels = std::stoul(v);
      else if (k == "fps") {
        const auto slash = v.find('/');
        d.fps_num = std::stoi(v.substr(0, slash));
        d.fps_den = slash == std::string::npos ? 1 : std::stoi(v.substr(slash + 1));
      } else fail(Errc::BadConfig, "unknown dims key '" + k + "'");
    } catch (const std::logic_error&) {
      fail(Errc::BadConfig, "dims value for '" + k + "' is not a number");
    }
  }
  if (!d.width || !d.height || !d.frames || !d.channels)
    fail(Errc::BadConfig, "dims need positive width, height, frames and channels");
  return d;
}

std::string format_dims(const RawDims& d) {
  return "width=" + std::to_string(d.width) + "\nheight=" + std::to_string(d.height) +
         "\nframes=" + std::to_string(d.frames) + "\nchannels=" + std::to_string(d.channels) +
         "\nfps=" + std::to_string(d.fps_num) + "/" + std::to_string(d.fps_den) + "\n";
}

fs::path dims_path(const fs::path& raw) {
  fs::path p = raw;
  p += ".dims";
  return p;
}

VideoTensor read_raw(const fs::path& path, const RawDims& dims) {
  const auto bytes = read_file(path);
  const std::size_t plane = dims.width * dims.height, frame_bytes = plane * dims.channels;
  if (bytes.size() != frame_bytes * dims.frames)
    fail(Errc::SizeMismatch, path.string() + " has " + std::to_string(bytes.size()) +
                                 " bytes, dims imply " + std::to_string(frame_bytes * dims.frames));
  VideoTensor v(dims.frames, dims.height, dims.width, dims.channels);
  v.color = dims.channels == 1 ? ColorSpace::Gray : ColorSpace::YUV;
  v.fps_num = dims.fps_num;
  v.fps_den = dims.fps_den;
  for (std::size_t f = 0; f < dims.frames; ++f)
    for (std::size_t c = 0; c < dims.channels; ++c)
      for (std::size_t i = 0; i < plane; ++i)
        v.data[f * frame_bytes + i * dims.channels + c] = bytes[f * frame_bytes + c * plane + i] / 255.0;
  return v;
}

VideoTensor read_raw(const fs::path& path) {
  const auto side = read_file(dims_path(path));
  return read_raw(path, parse_dims(std::string(side.begin(), side.end())));
}

void write_raw(const fs::path& path, const VideoTensor& v) {
  std::vector<std::uint8_t> out;
  out.reserve(v.data.size());
  const std::size_t plane = v.pixels_per_frame();
  for (std::size_t f = 0; f < v.frames; ++f) {
    const auto fr = v.frame(f);
    for (std::size_t c = 0; c < v.channels; ++c)
      for (std::size_t i = 0; i < plane; ++i) out.push_back(to_byte(fr[i * v.channels + c]));
  }
  const std::string dims = format_dims({v.width, v.height, v.frames, v.channels, v.fps_num, v.fps_den});
  write_file_atomic(dims_path(path), {dims.begin(), dims.end()});
  write_file_atomic(path, out);
}

VideoTensor read_video(const fs::path& path) {
  if (!fs::exists(path)) fail(Errc::FileNotFound, "no such file: " + path.string());
  if (path.extension() == ".y4m") return read_y4m(path).video;
  return read_raw(path);
}

void write_video(const fs::path& path, const VideoTensor& video) {
  if (path.extension() == ".y4m") write_y4m(path, video);
  else write_raw(path, video);
}

}  // namespace fgvc
