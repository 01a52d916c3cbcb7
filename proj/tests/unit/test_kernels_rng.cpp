#include <bit>
#include <cstring>
#include <random>

#include "doctest.h"
#include "fgvc/kernels.hpp"
#include "fgvc/rng.hpp"
#include "support.hpp"

using namespace fgvc;

namespace {

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("AVX2 kernels reproduce the scalar reference bit for bit") {
  const kernels::KernelTable& s = kernels::scalar_table();
  const kernels::KernelTable* v = kernels::avx2_table();
  if (!v) {
    MESSAGE("AVX2 variant unavailable on this machine; equivalence test skipped");
    return;
  }
  std::mt19937_64 rng(11);
  // Lengths straddle the 4-wide and 16-element unrolled paths.
  for (std::size_t n : {0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 31, 64, 100, 1023}) {
    CAPTURE(n);
    const auto a = test::random_vector(rng, n, -1e3, 1e3);
    const auto b = test::random_vector(rng, n, -1e-3, 1e-3);
    CHECK(same_bits(s.dot(a.data(), b.data(), n), v->dot(a.data(), b.data(), n)));
    CHECK(same_bits(s.sum_sq(a.data(), n), v->sum_sq(a.data(), n)));
    CHECK(same_bits(s.sum_sq_diff(a.data(), b.data(), n), v->sum_sq_diff(a.data(), b.data(), n)));

    std::vector<double> o1(n), o2(n);
    s.axpby(0.3, a.data(), -1.7, b.data(), o1.data(), n);
    v->axpby(0.3, a.data(), -1.7, b.data(), o2.data(), n);
    CHECK(same_bits(o1, o2));

    o1 = b;
    o2 = b;
    s.axpy(2.5, a.data(), o1.data(), n);
    v->axpy(2.5, a.data(), o2.data(), n);
    CHECK(same_bits(o1, o2));

    s.mul(a.data(), b.data(), o1.data(), n);
    v->mul(a.data(), b.data(), o2.data(), n);
    CHECK(same_bits(o1, o2));

    const auto w = test::random_vector(rng, 11);
    if (n >= 11) {
      std::vector<double> c1(n - 10), c2(n - 10);
      s.correlate(a.data(), w.data(), 11, c1.data(), n - 10);
      v->correlate(a.data(), w.data(), 11, c2.data(), n - 10);
      CHECK(same_bits(c1, c2));
    }
  }
}

TEST_CASE("scalar reductions follow the documented summation order") {
  const double a[] = {1e16, 1.0, -1e16, 1.0, 3.0};
  // ((a0 + a1) + (a2 + a3)) + a4, with a0 + a1 and a2 + a3 rounding away the ones.
  const double expected = ((1e16 + 1.0) + (-1e16 + 1.0)) + 3.0;
  const double ones[] = {1, 1, 1, 1, 1};
  CHECK(same_bits(kernels::scalar_table().dot(a, ones, 5), expected));
}

TEST_CASE("correlate computes a valid-mode sliding dot product") {
  const double in[] = {1, 2, 3, 4, 5};
  const double w[] = {1, 0, -1};
  double out[3];
  kernels::scalar_table().correlate(in, w, 3, out, 3);
  CHECK(out[0] == -2.0);
  CHECK(out[1] == -2.0);
  CHECK(out[2] == -2.0);
}

TEST_CASE("kernel selection can be forced") {
  kernels::force(kernels::Isa::Scalar);
  CHECK(kernels::active().isa == kernels::Isa::Scalar);
  kernels::force(kernels::Isa::Avx2);
  CHECK(kernels::active().isa == (kernels::avx2_table() ? kernels::Isa::Avx2 : kernels::Isa::Scalar));
  kernels::force(std::getenv("FGVC_SIMD") ? kernels::Isa::Scalar : kernels::Isa::Avx2);
}

TEST_CASE("Philox4x32-10 known-answer vectors") {
  // Random123 kat_vectors.
  using A = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("keyed streams are pure functions of their coordinates") {
  const auto k1 = KeyedStream::derive(7, 1, 100, 3);
  const auto k2 = KeyedStream::derive(7, 1, 100, 3);
  CHECK(k1.key() == k2.key());
  CHECK(k1.bits(Purpose::Candidate, 5, 0) == k2.bits(Purpose::Candidate, 5, 0));
  // Every coordinate changes the key.
  CHECK(KeyedStream::derive(8, 1, 100, 3).key() != k1.key());
  CHECK(KeyedStream::derive(7, 2, 100, 3).key() != k1.key());
  CHECK(KeyedStream::derive(7, 1, 101, 3).key() != k1.key());
  CHECK(KeyedStream::derive(7, 1, 100, 4).key() != k1.key());
  // Purposes and words address disjoint streams.
  CHECK(k1.bits(Purpose::Candidate, 5, 0) != k1.bits(Purpose::PoissonTime, 5, 0));
  CHECK(k1.bits(Purpose::Candidate, 5, 0) != k1.bits(Purpose::Candidate, 5, 1));
  CHECK(k1.bits(Purpose::Candidate, 5, 0) != k1.bits(Purpose::Candidate, 6, 0));
}

TEST_CASE("uniform, exponential and normal draws have the right moments") {
  const KeyedStream k(12345);
  const int n = 200000;
  double su = 0, se = 0, sn = 0, sn2 = 0;
  double umin = 1, umax = 0;
  std::vector<double> g(3);
  for (int i = 0; i < n; ++i) {
    const double u = k.uniform(Purpose::Synthetic, i);
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    se += k.exponential(Purpose::PoissonTime, i);
    k.normals(Purpose::Candidate, i, g);
    sn += g[2];
    sn2 += g[2] * g[2];
  }
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.005));
  CHECK(se / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("normals for a draw do not depend on the requested length prefix") {
  const KeyedStream k(99);
  std::vector<double> a(5), b(9);
  k.normals(Purpose::Candidate, 3, a);
  k.normals(Purpose::Candidate, 3, b);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_bits(a[i], b[i]));
}
