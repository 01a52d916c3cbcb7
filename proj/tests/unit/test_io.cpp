#include <fstream>
#include <random>

#include "doctest.h"
#include "fgvc/container.hpp"
#include "fgvc/error.hpp"
#include "fgvc/video_io.hpp"
#include "support.hpp"

using namespace fgvc;

namespace {

const std::filesystem::path kData = FGVC_TEST_DATA;

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::IoError;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

BitstreamHeader random_header(std::mt19937_64& rng) {
  auto u32 = [&] { return static_cast<std::uint32_t>(rng()); };
  std::uniform_real_distribution<double> ur(-1e6, 1e6);
  BitstreamHeader h;
  h.flags = rng() & 1;
  h.frames = 1 + u32() % 100000;
  h.height = 1 + u32() % 10000;
  h.width = 1 + u32() % 10000;
  h.channels = static_cast<std::uint8_t>(1 + rng() % 3);
  h.color = static_cast<std::uint8_t>(rng() % 3);
  h.fps_num = u32();
  h.fps_den = 1 + u32() % 1000;
  h.gop_length = static_cast<std::uint16_t>(rng());
  h.overlap = static_cast<std::uint16_t>(rng());
  h.temporal = static_cast<std::uint8_t>(1 + rng() % 254);
  h.spatial = static_cast<std::uint8_t>(1 + rng() % 254);
  h.steps = 2 + u32() % 100000;
  h.beta_start = ur(rng);
  h.beta_end = ur(rng);
  h.chunk_size = static_cast<std::uint16_t>(1 + rng() % 60000);
  h.kl_cap = ur(rng);
  h.prior = static_cast<PriorId>(rng() % 4);
  if (h.prior == PriorId::Sidecar) {
    h.sidecar_hash = rng();
    h.sidecar_count = rng();
  } else if (h.prior == PriorId::ChannelProfile) {
    h.channel_profile.resize(1 + rng() % 300);
    for (float& v : h.channel_profile) v = static_cast<float>(1e-6 + (rng() % 100000) / 997.0);
  } else {
    h.amplitude = ur(rng);
    h.exponent = ur(rng);
  }
  h.base_seed = rng();
  h.gamma = ur(rng);
  h.gops.resize(1 + rng() % 5);
  for (auto& g : h.gops) g = {u32(), u32(), static_cast<std::uint32_t>(rng() % 64)};
  return h;
}

}  // namespace

TEST_CASE("Y4M fixture parses to exact values") {
  const auto y = read_y4m(kData / "mono_2x2x2.y4m");
  CHECK(y.video.frames == 2);
  CHECK(y.video.height == 2);
  CHECK(y.video.width == 2);
  CHECK(y.video.channels == 1);
  CHECK(y.video.color == ColorSpace::Gray);
  CHECK(y.video.fps_num == 25);
  CHECK(y.video.at(0, 0, 0) == 0.0);
  CHECK(y.video.at(0, 0, 1) == 64.0 / 255.0);
  CHECK(y.video.at(0, 1, 0) == 128.0 / 255.0);
  CHECK(y.video.at(0, 1, 1) == 1.0);
  CHECK(y.video.at(1, 1, 1) == 64.0 / 255.0);
  // Writing an unmodified file back is byte exact.
  CHECK(serialize_y4m(y) == read_file(kData / "mono_2x2x2.y4m"));
}

TEST_CASE("Y4M policy and malformed input") {
  CHECK(code_of([] { read_y4m(kData / "c420.y4m"); }) == Errc::UnsupportedChroma);
  CHECK(code_of([] { parse_y4m(bytes_of("YUV4MPEG2 W2 H2\nFRAME\n1234")); }) == Errc::UnsupportedChroma);
  CHECK(code_of([] { parse_y4m(bytes_of("YUV4MPEG3 W2 H2 Cmono\n")); }) == Errc::MalformedY4M);
  CHECK(code_of([] { parse_y4m(bytes_of("YUV4MPEG2 W2 Hx Cmono\n")); }) == Errc::MalformedY4M);
  CHECK(code_of([] { parse_y4m(bytes_of("YUV4MPEG2 W2 H2 Cmono\nFRAME\n12")); }) == Errc::SizeMismatch);
  CHECK(code_of([] { parse_y4m(bytes_of("YUV4MPEG2 W2 H2 Cmono\nFRAMX\n1234")); }) == Errc::MalformedY4M);
  try {
    parse_y4m(bytes_of("YUV4MPEG2 W2 Hx Cmono\n"));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("byte 13") != std::string::npos);
  }
  CHECK(code_of([] { read_y4m("/nonexistent/clip.y4m"); }) == Errc::FileNotFound);
}

TEST_CASE("Y4M and raw write-read round trips") {
  test::TempDir dir;
  std::mt19937_64 rng(5);
  for (std::size_t c : {1u, 3u}) {
    auto v = test::byte_video(rng, 3, 5, 7, c);
    v.color = c == 1 ? ColorSpace::Gray : ColorSpace::YUV;
    v.fps_num = 30000;
    v.fps_den = 1001;
    const auto y4m = dir / ("clip" + std::to_string(c) + ".y4m");
    write_y4m(y4m, v);
    const auto back = read_y4m(y4m);
    CHECK(back.video.data == v.data);
    CHECK(back.video.fps_num == 30000);
    CHECK(back.video.fps_den == 1001);
    CHECK(serialize_y4m(back) == read_file(y4m));

    const auto raw = dir / ("clip" + std::to_string(c) + ".raw");
    write_raw(raw, v);
    CHECK(std::filesystem::exists(dims_path(raw)));
    const auto rb = read_video(raw);
    CHECK(rb.data == v.data);
    CHECK(rb.channels == c);
  }
}

TEST_CASE("raw dims sidecar") {
  const auto d = parse_dims("width=4\nheight=2\nframes=3\nchannels=1\nfps=24/1\n");
  CHECK(d.width == 4);
  CHECK(d.height == 2);
  CHECK(d.frames == 3);
  CHECK(d.fps_num == 24);
  CHECK(parse_dims(format_dims(d)).frames == 3);
  CHECK(code_of([] { parse_dims("width=4\nbogus=1\n"); }) == Errc::BadConfig);
  test::TempDir dir;
  const auto raw = dir / "short.raw";
  write_file_atomic(raw, std::vector<std::uint8_t>(10));
  CHECK(code_of([&] { read_raw(raw, d); }) == Errc::SizeMismatch);
  CHECK(code_of([&] { read_raw(dir / "missing.raw"); }) == Errc::FileNotFound);
}

TEST_CASE("atomic writes leave no temporaries") {
  test::TempDir dir;
  write_file_atomic(dir / "a.bin", {1, 2, 3});
  write_file_atomic(dir / "a.bin", {4});
  CHECK(read_file(dir / "a.bin") == std::vector<std::uint8_t>{4});
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path)) ++n;
  CHECK(n == 1);
}

TEST_CASE("bitstream header round trip over random fields") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 2000; ++i) {
    const auto h = random_header(rng);
    const auto bytes = serialize_header(h);
    std::size_t used = 0;
    const auto back = parse_header(bytes, &used);
    REQUIRE(back == h);
    CHECK(used == bytes.size());
  }
}

TEST_CASE("header layout is little-endian with a magic") {
  BitstreamHeader h;
  h.frames = 0x01020304;
  h.height = h.width = 8;
  h.gops = {{1, 8, 0}};
  const auto b = serialize_header(h);
  CHECK(std::string(b.begin(), b.begin() + 4) == "FGVC");
  CHECK(b[4] == kBitstreamVersion);
  CHECK(b[6] == 0x04);  // frames, least significant byte first
  CHECK(b[9] == 0x01);
}

TEST_CASE("bitstream framing errors") {
  Bitstream s;
  s.header.frames = s.header.height = s.header.width = 16;
  s.header.prior = PriorId::PowerLaw;
  s.header.gops = {{10, 8, 3}, {12, 8, 2}};
  s.payloads = {{1, 2, 3}, {4, 5}};
  const auto bytes = serialize_bitstream(s);
  const auto back = parse_bitstream(bytes);
  CHECK(back.payloads == s.payloads);
  CHECK(back.header == s.header);

  auto truncated = bytes;
  truncated.pop_back();
  try {
    parse_bitstream(truncated);
    FAIL("truncated stream accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedBitstream);
    CHECK(std::string(e.what()).find("GOP 1") != std::string::npos);
  }
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK(code_of([&] { parse_bitstream(trailing); }) == Errc::MalformedBitstream);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  try {
    parse_bitstream(bad_magic);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("byte 0") != std::string::npos);
  }
  CHECK(code_of([&] { parse_header(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 20)); }) ==
        Errc::MalformedBitstream);
  CHECK(describe_header(s.header).find("gops") != std::string::npos);
}
