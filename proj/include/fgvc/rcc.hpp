#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fgvc/bitio.hpp"
#include "fgvc/error.hpp"
#include "fgvc/prior.hpp"
#include "fgvc/rng.hpp"
#include "fgvc/schedule.hpp"

namespace fgvc {

// Equal-variance Gaussian pair q = N(mu_q, var I), p = N(mu_p, var I).
struct GaussianPair {
  std::vector<double> mu_q;
  std::vector<double> mu_p;
  double var = 1.0;
};

double kl_bits(const GaussianPair& pair);

// KL(N(mu_q, var_q I) || N(mu_p, diag(var_p))) in bits.
double kl_bits_diag(std::span<const double> mu_q, double var_q, std::span<const double> mu_p,
                    std::span<const double> var_p);

inline constexpr std::uint64_t kMaxCandidateBudget = std::uint64_t{1} << 20;

// 2^(kl + 5) candidates, capped at 2^20.
std::uint64_t candidate_budget(double kl_bits);

struct PfrSelection {
  std::uint64_t index = 0;  // n*, 1-based
  bool exhausted = false;   // budget ran out before the termination test fired
  std::uint64_t tried = 0;
};

// Poisson functional representation over candidates n = 1, 2, ...
// `log_ratio(n)` returns log p(z_n) - log q(z_n) for the n-th candidate
// z_n = simulate(n, p). Arrival times come from the PoissonTime stream of
// `key`. With `log_w_min` (log of inf p/q) the search stops exactly;
// without it the best of `budget` candidates is returned.
template <class LogRatio>
PfrSelection pfr_select(const LogRatio& log_ratio, const KeyedStream& key, std::uint64_t budget,
                        std::optional<double> log_w_min = std::nullopt) {
  double time = 0.0;
  double best = std::numeric_limits<double>::infinity();
  PfrSelection sel;
  for (std::uint64_t n = 1; n <= budget; ++n) {
    time += key.exponential(Purpose::PoissonTime, n);
    const double lr = log_ratio(n);
    if (std::isnan(lr) || lr == std::numeric_limits<double>::infinity())
      fail(Errc::ZeroDensity, "target density vanishes at candidate " + std::to_string(n));
    const double log_score = std::log(time) + lr;
    if (log_score <= best) {
      best = log_score;
      sel.index = n;
    }
    sel.tried = n;
    if (log_w_min && best <= std::log(time) + *log_w_min) return sel;
  }
  sel.exhausted = true;
  return sel;
}

template <class Sample>
struct PfrResult {
  std::uint64_t index = 0;
  Sample sample{};
  bool exhausted = false;
};

// Generic encoder: simulate(n) draws the n-th candidate from p; log_p and
// log_q are log densities (or masses).
template <class Simulate, class LogP, class LogQ>
auto pfr_encode(const Simulate& simulate, const LogP& log_p, const LogQ& log_q,
                const KeyedStream& key, std::uint64_t budget,
                std::optional<double> log_w_min = std::nullopt)
    -> PfrResult<decltype(simulate(std::uint64_t{1}))> {
  const auto sel = pfr_select(
      [&](std::uint64_t n) {
        const auto z = simulate(n);
        const double lq = log_q(z);
        if (lq == -std::numeric_limits<double>::infinity())
          fail(Errc::ZeroDensity, "q(z) = 0 at candidate " + std::to_string(n));
        return log_p(z) - lq;
      },
      key, budget, log_w_min);
  return {sel.index, simulate(sel.index), sel.exhausted};
}

template <class Simulate>
auto pfr_decode(std::uint64_t index, const Simulate& simulate) {
  return simulate(index);
}

// Discrete outcome sets: candidates are draws from `p` and termination
// uses the exact bound w_min = min_i p_i / q_i.
struct DiscretePfrResult {
  std::uint64_t index = 0;
  std::size_t outcome = 0;
  bool exhausted = false;
};

std::size_t simulate_discrete(const KeyedStream& key, std::uint64_t n, std::span<const double> p);
DiscretePfrResult pfr_encode_discrete(std::span<const double> p, std::span<const double> q,
                                      const KeyedStream& key,
                                      std::uint64_t budget = kMaxCandidateBudget);

// Diagonal-Gaussian chunk: q = N(mu_q, var_q I), p = N(mu_p, diag(sd_p^2)).
struct GaussianChunk {
  std::span<const double> mu_q;
  double var_q;
  std::span<const double> mu_p;
  std::span<const double> sd_p;
};

void simulate_gaussian(const KeyedStream& key, std::uint64_t n, std::span<const double> mu_p,
                       std::span<const double> sd_p, std::span<double> out);

struct GaussianPfrResult {
  std::uint64_t index = 0;
  std::vector<double> sample;
  bool exhausted = false;
};

GaussianPfrResult pfr_encode_gaussian(const GaussianChunk& chunk, const KeyedStream& key,
                                      std::uint64_t budget);
std::vector<double> pfr_decode_gaussian(std::uint64_t index, std::span<const double> mu_p,
                                        std::span<const double> sd_p, const KeyedStream& key);

struct Chunk {
  std::size_t begin = 0;
  std::size_t end = 0;
  double expected_kl_bits = 0.0;
  std::size_t size() const { return end - begin; }
};

struct ChunkSpec {
  std::vector<Chunk> chunks;
  double kl_cap = 4.0;
};

inline constexpr std::size_t kDefaultChunkSize = 16;
inline constexpr double kDefaultKlCap = 4.0;

// Contiguous runs of at most `chunk_size` coefficients, cut early whenever
// the expected KL would pass `kl_cap`.
ChunkSpec plan_chunks(std::span<const double> expected_kl_bits,
                      std::size_t chunk_size = kDefaultChunkSize, double kl_cap = kDefaultKlCap);

struct SeedRecord {
  std::uint32_t gop = 0;
  std::uint32_t t = 0;
  std::uint32_t chunk = 0;
  std::uint64_t seed = 0;
};

// Everything encoder and decoder share for one GOP trajectory.
struct StepContext {
  const PriorModel& prior;
  const NoiseSchedule& sched;
  ReverseVariance mode = ReverseVariance::Posterior;
  std::uint64_t base_seed = 0;
  std::uint32_t gop = 0;
  std::size_t chunk_size = kDefaultChunkSize;
  double kl_cap = kDefaultKlCap;
};

// Chunking for coding z_t from z_{t+1}.
ChunkSpec plan_step_chunks(const StepContext& ctx, int t);

struct StepEncoding {
  std::vector<double> z_t;
  std::vector<SeedRecord> records;
  double coded_bits = 0.0;
  double kl_bits = 0.0;
  std::size_t exhausted = 0;  // chunks whose budget was truncated by the 2^20 cap
};

// Codes z_t ~ q(z_t | z_{t+1}, y) against p(z_t | z_{t+1}); all vectors are
// in the prior's coefficient space.
StepEncoding encode_step(const StepContext& ctx, int t, std::span<const double> z_next,
                         std::span<const double> y, const ChunkSpec& chunks);

std::vector<double> decode_step(const StepContext& ctx, int t, std::span<const double> z_next,
                                std::span<const std::uint64_t> seeds, const ChunkSpec& chunks);

// Mean and standard deviation of p(z_t | z_{t+1}), t in [0, T-1].
void reverse_distribution(const StepContext& ctx, int t, std::span<const double> z_next,
                          std::span<double> mean, std::span<double> sd);

}  // namespace fgvc
