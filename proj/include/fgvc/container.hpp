#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fgvc {

inline constexpr std::uint8_t kBitstreamVersion = 1;

enum class PriorId : std::uint8_t {
  PowerLaw = 0,           // joint, diagonal in the 3D block DCT
  FramewisePowerLaw = 1,  // same law averaged over temporal frequency
  Sidecar = 2,            // external variance profile, referenced by hash
  ChannelProfile = 3,     // fitted per-channel variances carried as f32
};

std::string prior_name(PriorId id);

struct GopRecord {
  std::uint32_t t_star = 0;
  std::uint32_t coded_frames = 0;
  std::uint32_t payload_bytes = 0;
  friend bool operator==(const GopRecord&, const GopRecord&) = default;
};

// All multi-byte fields little-endian.
struct BitstreamHeader {
  std::uint8_t version = kBitstreamVersion;
  std::uint8_t flags = 0;  // bit 0: marginal reverse variances
  std::uint32_t frames = 0, height = 0, width = 0;
  std::uint8_t channels = 1;
  std::uint8_t color = 0;
  std::uint32_t fps_num = 25, fps_den = 1;
  std::uint16_t gop_length = 48, overlap = 4;
  std::uint8_t temporal = 4, spatial = 8;
  std::uint32_t steps = 512;
  double beta_start = 1e-4, beta_end = 0.02;
  std::uint16_t chunk_size = 16;
  double kl_cap = 4.0;
  PriorId prior = PriorId::PowerLaw;
  double amplitude = 1.0, exponent = 2.0;  // power-law priors
  std::uint64_t sidecar_hash = 0;          // sidecar prior
  std::uint64_t sidecar_count = 0;
  std::vector<float> channel_profile;      // channel-profile prior
  std::uint64_t base_seed = 0;
  double gamma = 0.5;
  std::vector<GopRecord> gops;

  bool marginal() const { return flags & 1u; }
  friend bool operator==(const BitstreamHeader&, const BitstreamHeader&) = default;
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<std::vector<std::uint8_t>> payloads;
};

std::vector<std::uint8_t> serialize_header(const BitstreamHeader& h);
// Parses a header; `consumed` receives its byte length.
BitstreamHeader parse_header(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);

std::vector<std::uint8_t> serialize_bitstream(const Bitstream& b);
Bitstream parse_bitstream(std::span<const std::uint8_t> bytes);

std::string describe_header(const BitstreamHeader& h);

}  // namespace fgvc
