#include "fgvc/container.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "fgvc/error.hpp"

namespace fgvc {

std::string prior_name(PriorId id) {
  switch (id) {
    case PriorId::PowerLaw: return "powerlaw";
    case PriorId::FramewisePowerLaw: return "framewise";
    case PriorId::Sidecar: return "sidecar";
    case PriorId::ChannelProfile: return "channel";
  }
  return "unknown";
}

namespace {

class Writer {
 public:
  template <class T>
  void put(T v) {
    std::uint64_t u = 0;
    if constexpr (std::is_same_v<T, double>) u = std::bit_cast<std::uint64_t>(v);
    else u = static_cast<std::uint64_t>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes(b) {}
  template <class T>
  T get(const char* field) {
    if (bytes.size() - pos < sizeof(T))
      fail(Errc::MalformedBitstream, "byte " + std::to_string(pos) + ": header ends inside " + field);
    std::uint64_t u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= std::uint64_t{bytes[pos + i]} << (8 * i);
    pos += sizeof(T);
    if constexpr (std::is_same_v<T, double>) return std::bit_cast<double>(u);
    else return static_cast<T>(u);
  }
  [[noreturn]] void bad(std::size_t at, const std::string& what) const {
    fail(Errc::MalformedBitstream, "byte " + std::to_string(at) + ": " + what);
  }
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_header(const BitstreamHeader& h) {
  Writer w;
  for (char c : {'F', 'G', 'V', 'C'}) w.put(static_cast<std::uint8_t>(c));
  w.put(h.version);
  w.put(h.flags);
  w.put(h.frames);
  w.put(h.height);
  w.put(h.width);
  w.put(h.channels);
  w.put(h.color);
  w.put(h.fps_num);
  w.put(h.fps_den);
  w.put(h.gop_length);
  w.put(h.overlap);
  w.put(h.temporal);
  w.put(h.spatial);
  w.put(h.steps);
  w.put(h.beta_start);
  w.put(h.beta_end);
  w.put(h.chunk_size);
  w.put(h.kl_cap);
  w.put(static_cast<std::uint8_t>(h.prior));
  switch (h.prior) {
    case PriorId::PowerLaw:
    case PriorId::FramewisePowerLaw:
      w.put(h.amplitude);
      w.put(h.exponent);
      break;
    case PriorId::Sidecar:
      w.put(h.sidecar_hash);
      w.put(h.sidecar_count);
      break;
    case PriorId::ChannelProfile:
      w.put(static_cast<std::uint32_t>(h.channel_profile.size()));
      for (float v : h.channel_profile) w.put(std::bit_cast<std::uint32_t>(v));
      break;
  }
  w.put(h.base_seed);
  w.put(h.gamma);
  w.put(static_cast<std::uint32_t>(h.gops.size()));
  for (const GopRecord& g : h.gops) {
    w.put(g.t_star);
    w.put(g.coded_frames);
    w.put(g.payload_bytes);
  }
  return std::move(w.out);
}

BitstreamHeader parse_header(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  Reader r(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "FGVC", 4) != 0) r.bad(0, "missing FGVC magic");
  r.pos = 4;
  BitstreamHeader h;
  const std::size_t vpos = r.pos;
  h.version = r.get<std::uint8_t>("version");
  if (h.version != kBitstreamVersion)
    r.bad(vpos, "unsupported version " + std::to_string(h.version));
  const std::size_t fpos = r.pos;
  h.flags = r.get<std::uint8_t>("flags");
  if (h.flags & ~1u) r.bad(fpos, "unknown flag bits");
  h.frames = r.get<std::uint32_t>("frames");
  h.height = r.get<std::uint32_t>("height");
  h.width = r.get<std::uint32_t>("width");
  h.channels = r.get<std::uint8_t>("channels");
  h.color = r.get<std::uint8_t>("color");
  h.fps_num = r.get<std::uint32_t>("fps");
  h.fps_den = r.get<std::uint32_t>("fps");
  h.gop_length = r.get<std::uint16_t>("l");
  h.overlap = r.get<std::uint16_t>("m");
  h.temporal = r.get<std::uint8_t>("s");
  h.spatial = r.get<std::uint8_t>("d");
  h.steps = r.get<std::uint32_t>("T");
  h.beta_start = r.get<double>("beta_start");
  h.beta_end = r.get<double>("beta_end");
  h.chunk_size = r.get<std::uint16_t>("chunk_size");
  h.kl_cap = r.get<double>("kl_cap");
  const std::size_t ppos = r.pos;
  const auto prior = r.get<std::uint8_t>("prior id");
  if (prior > 3) r.bad(ppos, "unknown prior id " + std::to_string(prior));
  h.prior = static_cast<PriorId>(prior);
  if (h.prior == PriorId::Sidecar) {
    h.sidecar_hash = r.get<std::uint64_t>("sidecar hash");
    h.sidecar_count = r.get<std::uint64_t>("sidecar count");
  } else if (h.prior == PriorId::ChannelProfile) {
    const std::size_t cpos = r.pos;
    const auto n = r.get<std::uint32_t>("profile length");
    if (n == 0 || n > (bytes.size() - r.pos) / 4) r.bad(cpos, "implausible profile length " + std::to_string(n));
    h.channel_profile.resize(n);
    for (float& v : h.channel_profile) {
      const std::size_t vpos2 = r.pos;
      v = std::bit_cast<float>(r.get<std::uint32_t>("profile"));
      if (!(v > 0.0f) || !std::isfinite(v)) r.bad(vpos2, "profile variance must be positive");
    }
  } else {
    h.amplitude = r.get<double>("amplitude");
    h.exponent = r.get<double>("exponent");
  }
  h.base_seed = r.get<std::uint64_t>("base_seed");
  h.gamma = r.get<double>("gamma");
  const std::size_t kpos = r.pos;
  const auto k = r.get<std::uint32_t>("GOP count");
  if (k == 0 || k > (bytes.size() - r.pos) / 12) r.bad(kpos, "implausible GOP count " + std::to_string(k));
  h.gops.resize(k);
  for (GopRecord& g : h.gops) {
    g.t_star = r.get<std::uint32_t>("GOP t*");
    g.coded_frames = r.get<std::uint32_t>("GOP frame count");
    g.payload_bytes = r.get<std::uint32_t>("GOP payload length");
  }
  if (!h.frames || !h.height || !h.width || !h.channels) r.bad(6, "zero video dimension");
  if (!h.temporal || !h.spatial || !h.chunk_size || h.steps < 2 || !h.fps_den)
    r.bad(28, "zero coding parameter");
  if (consumed) *consumed = r.pos;
  return h;
}

std::vector<std::uint8_t> serialize_bitstream(const Bitstream& b) {
  if (b.payloads.size() != b.header.gops.size())
    fail(Errc::MalformedBitstream, "payload count does not match GOP records");
  auto out = serialize_header(b.header);
  for (std::size_t k = 0; k < b.payloads.size(); ++k) {
    if (b.payloads[k].size() != b.header.gops[k].payload_bytes)
      fail(Errc::MalformedBitstream, "GOP " + std::to_string(k) + " payload length mismatch");
    out.insert(out.end(), b.payloads[k].begin(), b.payloads[k].end());
  }
  return out;
}

Bitstream parse_bitstream(std::span<const std::uint8_t> bytes) {
  Bitstream b;
  std::size_t pos = 0;
  b.header = parse_header(bytes, &pos);
  for (std::size_t k = 0; k < b.header.gops.size(); ++k) {
    const std::size_t n = b.header.gops[k].payload_bytes;
    if (bytes.size() - pos < n)
      fail(Errc::MalformedBitstream, "byte " + std::to_string(pos) + ": payload of GOP " +
                                         std::to_string(k) + " truncated (" +
                                         std::to_string(bytes.size() - pos) + " of " +
                                         std::to_string(n) + " bytes)");
    b.payloads.emplace_back(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                            bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  }
  if (pos != bytes.size())
    fail(Errc::MalformedBitstream, "byte " + std::to_string(pos) + ": " +
                                       std::to_string(bytes.size() - pos) + " trailing bytes");
  return b;
}

std::string describe_header(const BitstreamHeader& h) {
  std::ostringstream os;
  os.precision(10);
  os << "version " << int(h.version) << "\nflags " << int(h.flags)
     << (h.marginal() ? " (marginal)" : "") << "\nvideo " << h.frames << "x" << h.height << "x"
     << h.width << "x" << int(h.channels) << " @ " << h.fps_num << "/" << h.fps_den
     << "\ngop l=" << h.gop_length << " m=" << h.overlap << " s=" << int(h.temporal)
     << " d=" << int(h.spatial) << "\nschedule T=" << h.steps << " beta=[" << h.beta_start << ", "
     << h.beta_end << "]\nchunks size=" << h.chunk_size << " kl_cap=" << h.kl_cap
     << "\nprior " << prior_name(h.prior);
  if (h.prior == PriorId::Sidecar)
    os << " hash=" << std::hex << h.sidecar_hash << std::dec << " count=" << h.sidecar_count;
  else if (h.prior == PriorId::ChannelProfile)
    os << " channels=" << h.channel_profile.size();
  else
    os << " A=" << h.amplitude << " p=" << h.exponent;
  os << "\nbase_seed " << h.base_seed << "\ngamma " << h.gamma << "\ngops " << h.gops.size() << '\n';
  for (std::size_t k = 0; k < h.gops.size(); ++k)
    os << "  gop " << k << " t*=" << h.gops[k].t_star << " frames=" << h.gops[k].coded_frames
       << " bytes=" << h.gops[k].payload_bytes << '\n';
  return os.str();
}

}  // namespace fgvc
