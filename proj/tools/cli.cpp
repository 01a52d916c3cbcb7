#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "fgvc/analysis.hpp"
#include "fgvc/codec.hpp"
#include "fgvc/error.hpp"
#include "fgvc/kernels.hpp"
#include "fgvc/metrics.hpp"
#include "fgvc/plot.hpp"
#include "fgvc/video_io.hpp"

namespace fgvc::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kUsageExit = 2;
constexpr int kInternalExit = 1;

std::string exit_code_table() {
  std::ostringstream os;
  os << "Exit codes:\n  0  success\n  " << kInternalExit << "  unexpected internal error\n  "
     << kUsageExit << "  invalid command line\n";
  for (Errc e : all_errcs()) os << "  " << static_cast<int>(e) << " " << errc_name(e) << '\n';
  os << "Environment: FGVC_SEED overrides --seed; FGVC_SIMD=scalar disables AVX2 kernels.";
  return os.str();
}

std::string read_text(const fs::path& p) {
  const auto bytes = read_file(p);
  return {bytes.begin(), bytes.end()};
}

void write_text(const fs::path& p, const std::string& s) { write_file_atomic(p, {s.begin(), s.end()}); }

// Options shared by encode, bench and qctrl-trace.
struct CodecOptions {
  CodecConfig cfg;
  std::string prior = "channel";
  std::string sidecar;
  bool no_fit = false;
  bool marginal = false;
  double target_quality = 0.0;
  ControlConfig control;
  bool print_config = false;

  void add(CLI::App* app) {
    app->add_option("--gop-length,-l", cfg.gop_length, "GOP length l in frames")->capture_default_str();
    app->add_option("--overlap,-m", cfg.overlap, "GOP overlap m in frames")->capture_default_str();
    app->add_option("--temporal,-s", cfg.temporal, "temporal block size s")->capture_default_str();
    app->add_option("--spatial,-d", cfg.spatial, "spatial block size d")->capture_default_str();
    app->add_option("--steps,-T", cfg.steps, "diffusion steps T")->capture_default_str();
    app->add_option("--beta-start", cfg.beta_start)->capture_default_str();
    app->add_option("--beta-end", cfg.beta_end)->capture_default_str();
    app->add_option("--chunk-size", cfg.chunk_size, "coefficients per PFR chunk")->capture_default_str();
    app->add_option("--kl-cap", cfg.kl_cap, "max expected KL bits per chunk")->capture_default_str();
    app->add_option("--prior", prior, "channel | powerlaw | framewise | sidecar")
        ->check(CLI::IsMember({"channel", "powerlaw", "framewise", "sidecar"}))
        ->capture_default_str();
    app->add_option("--sidecar", sidecar, "variance profile file (sidecar prior)");
    app->add_flag("--no-fit", no_fit, "use --amplitude/--exponent instead of fitting the input");
    app->add_option("--amplitude", cfg.law.amplitude, "power-law amplitude A")->capture_default_str();
    app->add_option("--exponent", cfg.law.exponent, "power-law exponent p")->capture_default_str();
    app->add_flag("--marginal", marginal, "exact reverse-conditional variances");
    app->add_option("--seed", cfg.base_seed, "base seed of the keyed generator")->capture_default_str();
    app->add_option("--gamma", cfg.gamma, "fusion weight of the current GOP")->capture_default_str();
    app->add_option("--t-star", cfg.t_star, "fixed stopping step (default T-8)");
    app->add_option("--target-quality", target_quality, "enable quality control toward this MS-SSIM");
    app->add_option("--eps", control.eps, "quality tolerance")->capture_default_str();
    app->add_option("--anchors,-M", control.M, "sparse anchor count")->capture_default_str();
    app->add_option("--max-iters", control.max_iters, "refinement iteration limit")->capture_default_str();
    app->add_flag("--print-config", print_config, "print the effective configuration and exit");
  }

  CodecConfig finalize() {
    CodecConfig c = cfg;
    c.mode = marginal ? ReverseVariance::Marginal : ReverseVariance::Posterior;
    c.prior = prior == "framewise" ? PriorId::FramewisePowerLaw
              : prior == "sidecar"  ? PriorId::Sidecar
              : prior == "powerlaw" ? PriorId::PowerLaw
                                    : PriorId::ChannelProfile;
    c.fit_prior = !no_fit;
    if (const char* env = std::getenv("FGVC_SEED")) {
      try {
        c.base_seed = std::stoull(env);
      } catch (const std::exception&) {
        fail(Errc::BadConfig, std::string("FGVC_SEED is not an unsigned integer: ") + env);
      }
    }
    if (target_quality > 0.0) {
      control.P_tar = target_quality;
      c.control = control;
    }
    if (!sidecar.empty()) {
      const auto bytes = read_file(sidecar);
      c.sidecar = parse_profile(bytes);
    }
    c.validate();
    return c;
  }

  static std::string describe(const CodecConfig& c) {
    std::ostringstream os;
    os.precision(10);
    os << "gop-length=" << c.gop_length << "\noverlap=" << c.overlap << "\ntemporal=" << c.temporal
       << "\nspatial=" << c.spatial << "\nsteps=" << c.steps << "\nbeta-start=" << c.beta_start
       << "\nbeta-end=" << c.beta_end << "\nchunk-size=" << c.chunk_size << "\nkl-cap=" << c.kl_cap
       << "\nprior=" << prior_name(c.prior) << "\nfit=" << (c.fit_prior ? "true" : "false")
       << "\namplitude=" << c.law.amplitude << "\nexponent=" << c.law.exponent
       << "\nmarginal=" << (c.mode == ReverseVariance::Marginal ? "true" : "false")
       << "\nseed=" << c.base_seed << "\ngamma=" << c.gamma << "\nt-star=" << c.fixed_t_star();
    if (c.control)
      os << "\ntarget-quality=" << c.control->P_tar << "\neps=" << c.control->eps
         << "\nanchors=" << c.control->M << "\nmax-iters=" << c.control->max_iters;
    os << '\n';
    return os.str();
  }
};

void report_gops(const EncodeResult& res, std::ostream& out, std::ostream& err) {
  out.setf(std::ios::fixed);
  for (const GopReport& g : res.gops) {
    out << "gop " << g.index << " t*=" << g.t_star << " bits=" << g.bits << " bpp="
        << std::setprecision(5) << g.bpp << " P=" << std::setprecision(5) << g.quality
        << " decodes=" << g.decodes << '\n';
    if (!g.converged)
      err << "warning: gop " << g.index << " stopped at |P - P_tar| > eps (best P=" << g.quality
          << ")\n";
    if (g.exhausted_chunks)
      err << "note: gop " << g.index << " hit the candidate budget in " << g.exhausted_chunks
          << " chunk(s)\n";
  }
  out << "total bits=" << static_cast<std::size_t>(res.total_payload_bits)
      << " bpp=" << std::setprecision(5) << res.bpp << '\n';
  out.unsetf(std::ios::fixed);
}

int cmd_encode(const std::string& input, const std::string& output, CodecOptions& opts,
               const std::string& trace_path, std::ostream& out, std::ostream& err) {
  const CodecConfig cfg = opts.finalize();
  if (opts.print_config) {
    out << CodecOptions::describe(cfg);
    return 0;
  }
  if (output.empty()) fail(Errc::BadConfig, "encode needs an output path (-o)");
  const VideoTensor video = read_video(input);
  const EncodeResult res = encode_video(video, cfg);
  write_file_atomic(output, serialize_bitstream(res.stream));
  report_gops(res, out, err);
  if (!trace_path.empty()) {
    std::ostringstream os;
    os << "gop," << trace_csv({});
    std::string body = os.str();
    for (const GopReport& g : res.gops) {
      std::istringstream rows(trace_csv(g.trace));
      std::string line;
      std::getline(rows, line);
      while (std::getline(rows, line)) body += std::to_string(g.index) + "," + line + "\n";
    }
    write_text(trace_path, body);
  }
  return 0;
}

int cmd_decode(const std::string& input, const std::string& output, bool no_fusion, bool fresh,
               const std::string& sidecar, std::ostream& out) {
  if (output.empty()) fail(Errc::BadConfig, "decode needs an output path (-o)");
  const auto bytes = read_file(input);
  const Bitstream stream = parse_bitstream(bytes);
  DecodeOptions opts;
  opts.fusion = !no_fusion;
  if (fresh) opts.noise_seed = (std::uint64_t{std::random_device{}()} << 32) | std::random_device{}();
  if (!sidecar.empty()) opts.sidecar = parse_profile(read_file(sidecar));
  const VideoTensor video = decode_video(stream, opts);
  write_video(output, video);
  out << "decoded " << video.frames << "x" << video.height << "x" << video.width << " from "
      << stream.header.gops.size() << " GOP(s)\n";
  return 0;
}

std::vector<fs::path> corpus_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(Errc::FileNotFound, "corpus directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto& p = e.path();
    if (p.extension() == ".y4m" || fs::exists(dims_path(p))) files.push_back(p);
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(Errc::EmptyCorpus, "no .y4m or raw+.dims sequences in " + dir.string());
  return files;
}

struct BenchArgs {
  std::string corpus;
  std::vector<int> t_stars;
  std::vector<double> qualities;
  std::string csv, svg, anchor, curve;
};

int cmd_bench(const BenchArgs& a, CodecOptions& opts, std::ostream& out) {
  if (a.t_stars.empty() == a.qualities.empty())
    fail(Errc::BadConfig, "bench needs exactly one of --t-stars or --qualities");
  const auto files = corpus_files(a.corpus);
  const std::size_t points = std::max(a.t_stars.size(), a.qualities.size());
  std::ostringstream rows;
  rows.precision(10);
  rows << "sequence,point,bpp,ms_ssim,psnr\n";
  std::vector<PlotSeries> series;
  std::vector<double> sum_bpp(points, 0.0), sum_q(points, 0.0);
  for (const auto& f : files) {
    const VideoTensor video = read_video(f);
    PlotSeries s{f.filename().string(), {}};
    for (std::size_t i = 0; i < points; ++i) {
      CodecOptions o = opts;
      if (!a.t_stars.empty()) {
        o.cfg.t_star = a.t_stars[i];
        o.target_quality = 0.0;
      } else {
        o.target_quality = a.qualities[i];
      }
      const CodecConfig cfg = o.finalize();
      const EncodeResult res = encode_video(video, cfg);
      const VideoTensor rec = decode_video(res.stream);
      const double q = mean_ms_ssim(video, rec);
      const double p = psnr(mse(video, rec));
      rows << f.filename().string() << ',' << i << ',' << res.bpp << ',' << q << ',' << p << '\n';
      s.points.emplace_back(res.bpp, q);
      sum_bpp[i] += res.bpp;
      sum_q[i] += q;
    }
    series.push_back(std::move(s));
  }
  RateQualityCurve aggregate;
  for (std::size_t i = 0; i < points; ++i)
    aggregate.points.emplace_back(sum_bpp[i] / static_cast<double>(files.size()),
                                  sum_q[i] / static_cast<double>(files.size()));
  std::sort(aggregate.points.begin(), aggregate.points.end());
  if (a.csv.empty()) out << rows.str();
  else write_text(a.csv, rows.str());
  if (!a.curve.empty()) write_text(a.curve, curve_csv(aggregate));
  if (!a.svg.empty()) {
    series.push_back({"mean", aggregate.points});
    write_text(a.svg, svg_line_plot(series, "Rate-quality", "bpp", "MS-SSIM"));
  }
  if (!a.anchor.empty()) {
    const RateQualityCurve anchor = parse_curve_csv(read_text(a.anchor));
    out << "bd_rate=" << format_bd(bd_rate(anchor, aggregate))
        << " bd_metric=" << format_bd(bd_metric(anchor, aggregate)) << '\n';
  }
  return 0;
}

int cmd_qctrl_trace(const std::string& input, CodecOptions& opts, const std::string& csv,
                    std::ostream& out, std::ostream& err) {
  if (!(opts.target_quality > 0.0)) fail(Errc::BadConfig, "qctrl-trace needs --target-quality");
  const CodecConfig cfg = opts.finalize();
  const VideoTensor video = read_video(input);
  const EncodeResult res = encode_video(video, cfg);
  std::string body = "gop,warm,decodes,iteration,t,R,P,alpha,beta\n";
  for (const GopReport& g : res.gops) {
    std::istringstream rows(trace_csv(g.trace));
    std::string line;
    std::getline(rows, line);
    const std::string prefix = std::to_string(g.index) + "," + (g.warm ? "1" : "0") + "," +
                               std::to_string(g.control_decodes) + ",";
    while (std::getline(rows, line)) body += prefix + line + "\n";
  }
  if (csv.empty()) out << body;
  else write_text(csv, body);
  report_gops(res, csv.empty() ? err : out, err);
  return 0;
}

struct TheoryArgs {
  std::vector<double> rhos{0.0, 0.5, 0.9};
  double rho_space = 0.5;
  std::size_t frames = 4, height = 4, width = 4;
  int steps = 200;
  double beta_start = 1e-4, beta_end = 0.05;
  int t_star = 1;
  std::size_t runs = 0;
  std::size_t chunk_size = 64;
  double kl_cap = 8.0;
  std::uint64_t seed = 7;
  std::string csv;
};

int cmd_theory(const TheoryArgs& a, std::ostream& out) {
  const NoiseSchedule sched = build_schedule(a.steps, a.beta_start, a.beta_end);
  std::vector<TheoryRow> rows;
  std::ostringstream summary;
  summary.precision(6);
  for (double rho : a.rhos) {
    const auto spec = GaussianSourceSpec::ar1(a.frames, a.height, a.width, rho, a.rho_space);
    MeasuredGap measured;
    if (a.runs > 0)
      measured = measure_coded_gap(spec, sched, a.t_star, a.runs, a.seed, a.chunk_size, a.kl_cap);
    for (int t = a.t_star; t <= a.steps - 1; ++t) {
      TheoryRow r;
      r.rho = rho;
      r.t = t;
      r.l_fw = kl_framewise_step(spec, sched, t);
      r.l_joint = kl_joint_step(spec, sched, t);
      r.gap = r.l_fw - r.l_joint;
      r.mi = conditional_mi_gap(spec, sched, t);
      r.measured_diff = a.runs ? measured.step_diff[static_cast<std::size_t>(t)] : std::nan("");
      rows.push_back(r);
    }
    summary << "rho=" << rho << " accumulated_gap_bits=" << accumulate_gap(spec, sched, a.t_star);
    if (a.runs) summary << " measured_bits=" << measured.total << " sd=" << measured.total_sd;
    summary << '\n';
  }
  if (a.csv.empty()) {
    out << theory_csv(rows);
  } else {
    write_text(a.csv, theory_csv(rows));
  }
  out << summary.str();
  return 0;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config.empty()) return args;
  if (rest.empty() || rest[0].empty() || rest[0][0] == '-')
    fail(Errc::BadConfig, "--config must follow a subcommand");
  std::vector<std::string> out{rest[0]};
  std::istringstream is(read_text(config));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(Errc::BadConfig, config + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    out.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
  }
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fgvc: progressive video coding along a diffusion trajectory"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.footer(exit_code_table());
  app.require_subcommand(1);
  app.add_flag_callback("--scalar", [] { kernels::force(kernels::Isa::Scalar); },
                        "force the scalar reference kernels");

  std::string input, output, trace, sidecar;
  bool no_fusion = false, fresh = false;

  CodecOptions enc_opts;
  auto* enc = app.add_subcommand("encode", "encode a .y4m or raw video (--config FILE for key=value defaults)");
  enc->add_option("input", input, "input video")->required();
  enc->add_option("-o,--output", output, "output bitstream");
  enc->add_option("--trace", trace, "write the quality-control trace as CSV");
  enc_opts.add(enc);

  auto* dec = app.add_subcommand("decode", "decode a bitstream to .y4m or raw");
  dec->add_option("input", input, "bitstream")->required();
  dec->add_option("-o,--output", output, "output video (.y4m or raw + .dims)");
  dec->add_flag("--no-fusion", no_fusion, "skip inter-GOP latent fusion");
  dec->add_flag("--fresh-noise", fresh, "draw decoder noise from the OS instead of the header seed");
  dec->add_option("--sidecar", sidecar, "variance profile referenced by the header");

  auto* probe = app.add_subcommand("probe", "print a bitstream header");
  probe->add_option("input", input, "bitstream")->required();

  BenchArgs bench_args;
  CodecOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "sweep operating points over a corpus directory");
  bench->add_option("corpus", bench_args.corpus, "directory of sequences")->required();
  bench->add_option("--t-stars", bench_args.t_stars, "comma-separated stopping steps")->delimiter(',');
  bench->add_option("--qualities", bench_args.qualities, "comma-separated target qualities")->delimiter(',');
  bench->add_option("--csv", bench_args.csv, "per-sequence rows");
  bench->add_option("--curve", bench_args.curve, "aggregate bpp,metric curve");
  bench->add_option("--svg", bench_args.svg, "rate-quality plot");
  bench->add_option("--anchor", bench_args.anchor, "anchor curve CSV for BD deltas");
  bench_opts.add(bench);

  CodecOptions trace_opts;
  std::string trace_csv_path;
  auto* qt = app.add_subcommand("qctrl-trace", "run quality control and print its iterations");
  qt->add_option("input", input, "input video")->required();
  qt->add_option("--csv", trace_csv_path, "write the trace here");
  trace_opts.add(qt);

  TheoryArgs th;
  auto* theory = app.add_subcommand("theory", "joint vs frame-wise coding cost on Gaussian AR(1) sources");
  theory->add_option("--rho", th.rhos, "temporal correlations")->delimiter(',');
  theory->add_option("--rho-space", th.rho_space)->capture_default_str();
  theory->add_option("--frames", th.frames)->capture_default_str();
  theory->add_option("--height", th.height)->capture_default_str();
  theory->add_option("--width", th.width)->capture_default_str();
  theory->add_option("--steps,-T", th.steps)->capture_default_str();
  theory->add_option("--beta-start", th.beta_start)->capture_default_str();
  theory->add_option("--beta-end", th.beta_end)->capture_default_str();
  theory->add_option("--t-star", th.t_star)->capture_default_str();
  theory->add_option("--runs", th.runs, "coded runs per rho for the measured gap (0 = analytic only)")
      ->capture_default_str();
  theory->add_option("--chunk-size", th.chunk_size)->capture_default_str();
  theory->add_option("--kl-cap", th.kl_cap)->capture_default_str();
  theory->add_option("--seed", th.seed)->capture_default_str();
  theory->add_option("--csv", th.csv, "write the table here");

  std::string anchor_csv, test_csv;
  auto* bd = app.add_subcommand("bdrate", "BD-rate and BD-metric between two bpp,metric curves");
  bd->add_option("anchor", anchor_csv)->required();
  bd->add_option("test", test_csv)->required();

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : kUsageExit;
    }
    if (const char* env = std::getenv("FGVC_SEED")) th.seed = std::strtoull(env, nullptr, 10);

    if (*enc) return cmd_encode(input, output, enc_opts, trace, out, err);
    if (*dec) return cmd_decode(input, output, no_fusion, fresh, sidecar, out);
    if (*probe) {
      out << describe_header(parse_header(read_file(input)));
      return 0;
    }
    if (*bench) return cmd_bench(bench_args, bench_opts, out);
    if (*qt) return cmd_qctrl_trace(input, trace_opts, trace_csv_path, out, err);
    if (*theory) return cmd_theory(th, out);
    if (*bd) {
      const auto a = parse_curve_csv(read_text(anchor_csv));
      const auto b = parse_curve_csv(read_text(test_csv));
      out << "bd_rate=" << format_bd(bd_rate(a, b)) << " bd_metric=" << format_bd(bd_metric(a, b))
          << '\n';
      return 0;
    }
  } catch (const Error& e) {
    err << "error: code=" << e.exit_code() << " name=" << errc_name(e.code()) << ": " << e.what()
        << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: code=" << kInternalExit << " name=Internal: " << e.what() << '\n';
    return kInternalExit;
  }
  return kUsageExit;
}

}  // namespace fgvc::cli
