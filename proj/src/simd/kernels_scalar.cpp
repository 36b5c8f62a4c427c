// Reference kernels. Plain loops, libm sine/cosine.

#include <cmath>

#include "pinnweigh/simd/kernels.hpp"

namespace pinnweigh::simd {
namespace {

void gemm(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
          int ldc, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<std::size_t>(i) * ldc;
    if (!accumulate)
      for (int j = 0; j < n; ++j) crow[j] = 0.0;
    const double* arow = a + static_cast<std::size_t>(i) * lda;
    for (int p = 0; p < k; ++p) {
      const double aip = arow[p];
      const double* brow = b + static_cast<std::size_t>(p) * ldb;
      for (int j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void sincos(std::size_t count, const double* x, double* s, double* c) {
  for (std::size_t i = 0; i < count; ++i) {
    s[i] = std::sin(x[i]);
    c[i] = std::cos(x[i]);
  }
}

void multiply(std::size_t count, const double* factor, double* inout) {
  for (std::size_t i = 0; i < count; ++i) inout[i] *= factor[i];
}

void column_sum(int m, int n, const double* a, int lda, double* out) {
  for (int j = 0; j < n; ++j) out[j] = 0.0;
  for (int i = 0; i < m; ++i) {
    const double* row = a + static_cast<std::size_t>(i) * lda;
    for (int j = 0; j < n; ++j) out[j] += row[j];
  }
}

}  // namespace

namespace detail {
const KernelSet& scalar_kernels() {
  static const KernelSet set{Backend::Scalar, "scalar", &gemm, &sincos, &multiply, &column_sum};
  return set;
}
}  // namespace detail

}  // namespace pinnweigh::simd
