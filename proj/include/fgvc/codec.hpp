#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "fgvc/container.hpp"
#include "fgvc/pipeline.hpp"
#include "fgvc/prior.hpp"
#include "fgvc/qctrl.hpp"
#include "fgvc/schedule.hpp"
#include "fgvc/tensor.hpp"
#include "fgvc/transform.hpp"

namespace fgvc {

struct CodecConfig {
  std::size_t gop_length = 48;
  std::size_t overlap = 4;
  std::size_t temporal = 4;
  std::size_t spatial = 8;
  int steps = 512;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  std::size_t chunk_size = kDefaultChunkSize;
  double kl_cap = kDefaultKlCap;
  ReverseVariance mode = ReverseVariance::Posterior;
  PriorId prior = PriorId::ChannelProfile;
  bool fit_prior = true;  // power-law priors: fit (A, p) to the input; otherwise use `law`
  PowerLaw law;
  std::vector<double> sidecar;  // per-channel or full-length profile
  std::uint64_t base_seed = 0;
  double gamma = 0.5;
  int t_star = 0;  // fixed operating point when control is absent; 0 = T - 8
  std::optional<ControlConfig> control;

  int fixed_t_star() const { return t_star > 0 ? t_star : steps - 8; }
  void validate() const;
};

struct GopReport {
  std::size_t index = 0;
  int t_star = 0;
  std::size_t bits = 0;
  double bpp = 0.0;
  double quality = 0.0;
  std::size_t decodes = 0;
  std::size_t control_decodes = 0;
  bool warm = false;
  bool converged = true;
  std::size_t exhausted_chunks = 0;
  std::vector<TraceRow> trace;
};

struct EncodeResult {
  Bitstream stream;
  std::vector<GopReport> gops;
  double total_payload_bits = 0.0;
  double bpp = 0.0;  // payload bits per distinct coded pixel
};

struct DecodeOptions {
  bool fusion = true;
  std::optional<std::uint64_t> noise_seed;  // fresh decoder randomness
  std::vector<double> sidecar;
};

// Edge replication to multiples of d spatially and s temporally.
VideoTensor pad_video(const VideoTensor& v, std::size_t temporal, std::size_t spatial);
VideoTensor crop_video(const VideoTensor& v, std::size_t frames, std::size_t height, std::size_t width);

BitstreamHeader make_header(const VideoTensor& input, const CodecConfig& cfg);
NoiseSchedule header_schedule(const BitstreamHeader& h);
std::vector<Gop> header_gops(const BitstreamHeader& h);
std::unique_ptr<PriorModel> build_prior(const BitstreamHeader& h, const LatentShape& shape,
                                        std::span<const double> sidecar);

EncodeResult encode_video(const VideoTensor& input, const CodecConfig& cfg);
VideoTensor decode_video(const Bitstream& stream, const DecodeOptions& options = {});

}  // namespace fgvc
