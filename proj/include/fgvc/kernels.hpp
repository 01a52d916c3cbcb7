#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner loops. Every variant reproduces the scalar reference
// bit for bit: reductions use four interleaved partial sums combined as
// (s0 + s1) + (s2 + s3), then the tail in order, and no variant fuses
// multiply-add.
namespace fgvc::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_sq)(const double* a, std::size_t n);
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  // out = a*x + b*y
  void (*axpby)(double a, const double* x, double b, const double* y, double* out, std::size_t n);
  // y += a*x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out = x .* y
  void (*mul)(const double* x, const double* y, double* out, std::size_t n);
  // out[i] = sum_j w[j] * in[i + j], j ascending, for i < n_out
  void (*correlate)(const double* in, const double* w, std::size_t taps, double* out, std::size_t n_out);
};

const KernelTable& scalar_table();
// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_table();

// Selected once from CPU features; FGVC_SIMD=scalar forces the reference.
const KernelTable& active();
void force(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double sum_sq(std::span<const double> a) { return active().sum_sq(a.data(), a.size()); }
inline double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  return active().sum_sq_diff(a.data(), b.data(), a.size());
}
inline void axpby(double a, std::span<const double> x, double b, std::span<const double> y,
                  std::span<double> out) {
  active().axpby(a, x.data(), b, y.data(), out.data(), out.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), y.size());
}
inline void mul(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  active().mul(x.data(), y.data(), out.data(), out.size());
}

}  // namespace fgvc::kernels
