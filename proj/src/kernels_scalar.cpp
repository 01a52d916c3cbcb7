#include "fgvc/kernels.hpp"

namespace fgvc::kernels {
namespace {

double dot_ref(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = s0 + a[i] * b[i];
    s1 = s1 + a[i + 1] * b[i + 1];
    s2 = s2 + a[i + 2] * b[i + 2];
    s3 = s3 + a[i + 3] * b[i + 3];
  }
  double r = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) r = r + a[i] * b[i];
  return r;
}

double sum_sq_ref(const double* a, std::size_t n) { return dot_ref(a, a, n); }

double sum_sq_diff_ref(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double d0 = a[i] - b[i];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    s0 = s0 + d0 * d0;
    s1 = s1 + d1 * d1;
    s2 = s2 + d2 * d2;
    s3 = s3 + d3 * d3;
  }
  double r = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    r = r + d * d;
  }
  return r;
}

void axpby_ref(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpy_ref(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void mul_ref(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void correlate_ref(const double* in, const double* w, std::size_t taps, double* out,
                   std::size_t n_out) {
  for (std::size_t i = 0; i < n_out; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < taps; ++j) acc = acc + w[j] * in[i + j];
    out[i] = acc;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar, "scalar", dot_ref,  sum_sq_ref, sum_sq_diff_ref,
                                 axpby_ref,   axpy_ref, mul_ref,  correlate_ref};
  return table;
}

}  // namespace fgvc::kernels
