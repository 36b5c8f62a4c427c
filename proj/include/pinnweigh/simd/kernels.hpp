#pragma once

// Dense inner loops of the network: matrix products and the sine/cosine
// activation. Each backend provides the same table; the active one is picked
// at startup from CPU features and can be overridden with
// PINNWEIGH_SIMD=scalar|avx2 or set_backend().

#include <cstddef>
#include <string_view>

namespace pinnweigh::simd {

enum class Backend { Scalar, Avx2 };

struct KernelSet {
  Backend backend;
  const char* name;

  /// C[m x n] (+)= A[m x k] * B[k x n], all row-major with leading dimensions.
  void (*gemm)(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
               int ldc, bool accumulate);

  /// s[i] = sin(x[i]), c[i] = cos(x[i]).
  void (*sincos)(std::size_t count, const double* x, double* s, double* c);

  /// inout[i] *= factor[i].
  void (*multiply)(std::size_t count, const double* factor, double* inout);

  /// out[j] = sum_i a[i * lda + j] for an m x n block.
  void (*column_sum)(int m, int n, const double* a, int lda, double* out);
};

namespace detail {
const KernelSet& scalar_kernels();
#if defined(PINNWEIGH_HAVE_AVX2)
const KernelSet& avx2_kernels();
#endif
}  // namespace detail

bool backend_supported(Backend b);
const KernelSet& kernels(Backend b);  // throws std::runtime_error when unsupported
const KernelSet& kernels();           // active backend
Backend active_backend();
void set_backend(Backend b);
Backend parse_backend(std::string_view name);
std::string_view backend_name(Backend b);

/// Cache-friendly transpose of a rows x cols row-major block.
void transpose(int rows, int cols, const double* src, int lds, double* dst, int ldd);

}  // namespace pinnweigh::simd
