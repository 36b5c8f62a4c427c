// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// is only entered after the dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "pinnweigh/simd/kernels.hpp"

namespace pinnweigh::simd {
namespace {

constexpr int kDepthBlock = 256;

// Register tile of Rows x (4 * Vecs) outputs accumulated over a depth block.
template <int Rows, int Vecs>
inline void gemm_tile(int depth, const double* a, int lda, const double* b, int ldb, double* c,
                      int ldc, bool accumulate) {
  __m256d acc[Rows][Vecs];
  for (int r = 0; r < Rows; ++r)
    for (int v = 0; v < Vecs; ++v) acc[r][v] = _mm256_setzero_pd();

  for (int p = 0; p < depth; ++p) {
    const double* brow = b + static_cast<std::size_t>(p) * ldb;
    __m256d bv[Vecs];
    for (int v = 0; v < Vecs; ++v) bv[v] = _mm256_loadu_pd(brow + 4 * v);
    for (int r = 0; r < Rows; ++r) {
      const __m256d av = _mm256_broadcast_sd(a + static_cast<std::size_t>(r) * lda + p);
      for (int v = 0; v < Vecs; ++v) acc[r][v] = _mm256_fmadd_pd(av, bv[v], acc[r][v]);
    }
  }

  for (int r = 0; r < Rows; ++r) {
    double* crow = c + static_cast<std::size_t>(r) * ldc;
    for (int v = 0; v < Vecs; ++v) {
      __m256d out = acc[r][v];
      if (accumulate) out = _mm256_add_pd(_mm256_loadu_pd(crow + 4 * v), out);
      _mm256_storeu_pd(crow + 4 * v, out);
    }
  }
}

inline void gemm_scalar_column(int rows, int depth, const double* a, int lda, const double* b,
                               int ldb, double* c, int ldc, bool accumulate) {
  for (int r = 0; r < rows; ++r) {
    double sum = 0.0;
    const double* arow = a + static_cast<std::size_t>(r) * lda;
    for (int p = 0; p < depth; ++p) sum = std::fma(arow[p], b[static_cast<std::size_t>(p) * ldb], sum);
    double& out = c[static_cast<std::size_t>(r) * ldc];
    out = accumulate ? out + sum : sum;
  }
}

template <int Rows>
inline void gemm_row_band(int n, int depth, const double* a, int lda, const double* b, int ldb,
                          double* c, int ldc, bool accumulate) {
  int j = 0;
  for (; j + 8 <= n; j += 8) gemm_tile<Rows, 2>(depth, a, lda, b + j, ldb, c + j, ldc, accumulate);
  for (; j + 4 <= n; j += 4) gemm_tile<Rows, 1>(depth, a, lda, b + j, ldb, c + j, ldc, accumulate);
  for (; j < n; ++j) gemm_scalar_column(Rows, depth, a, lda, b + j, ldb, c + j, ldc, accumulate);
}

void gemm(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
          int ldc, bool accumulate) {
  if (k == 0) {
    if (!accumulate)
      for (int i = 0; i < m; ++i) std::fill_n(c + static_cast<std::size_t>(i) * ldc, n, 0.0);
    return;
  }
  for (int p0 = 0; p0 < k; p0 += kDepthBlock) {
    const int depth = std::min(kDepthBlock, k - p0);
    const bool acc = accumulate || p0 > 0;
    const double* bblk = b + static_cast<std::size_t>(p0) * ldb;
    int i = 0;
    for (; i + 4 <= m; i += 4)
      gemm_row_band<4>(n, depth, a + static_cast<std::size_t>(i) * lda + p0, lda, bblk, ldb,
                       c + static_cast<std::size_t>(i) * ldc, ldc, acc);
    for (; i < m; ++i)
      gemm_row_band<1>(n, depth, a + static_cast<std::size_t>(i) * lda + p0, lda, bblk, ldb,
                       c + static_cast<std::size_t>(i) * ldc, ldc, acc);
  }
}

// sin/cos: reduce by multiples of pi/2 (three-part Cody-Waite with FMA), then
// minimax polynomials on [-pi/4, pi/4] and a quadrant select.
constexpr double kTwoOverPi = 0.6366197723675814;
constexpr double kPio2Hi = 1.5707963267948966;
constexpr double kPio2Mid = 6.123233995736766e-17;
constexpr double kPio2Lo = -1.4973849048591698e-33;
constexpr double kReductionLimit = 1.0e7;

constexpr double kS1 = -1.66666666666666324348e-01;
constexpr double kS2 = 8.33333333332248946124e-03;
constexpr double kS3 = -1.98412698298579493134e-04;
constexpr double kS4 = 2.75573137070700676789e-06;
constexpr double kS5 = -2.50507602534068634195e-08;
constexpr double kS6 = 1.58969099521155010221e-10;

constexpr double kC1 = 4.16666666666666019037e-02;
constexpr double kC2 = -1.38888888888741095749e-03;
constexpr double kC3 = 2.48015872894767294178e-05;
constexpr double kC4 = -2.75573143513906633035e-07;
constexpr double kC5 = 2.08757232129817482790e-09;
constexpr double kC6 = -1.13596475577881948265e-11;

inline void sincos4(__m256d x, __m256d& s_out, __m256d& c_out) {
  const __m256d q = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Hi), x);
  r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Mid), r);
  r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Lo), r);
  const __m256d z = _mm256_mul_pd(r, r);

  __m256d ps = _mm256_fmadd_pd(z, _mm256_set1_pd(kS6), _mm256_set1_pd(kS5));
  ps = _mm256_fmadd_pd(z, ps, _mm256_set1_pd(kS4));
  ps = _mm256_fmadd_pd(z, ps, _mm256_set1_pd(kS3));
  ps = _mm256_fmadd_pd(z, ps, _mm256_set1_pd(kS2));
  ps = _mm256_fmadd_pd(z, ps, _mm256_set1_pd(kS1));
  const __m256d sin_r = _mm256_fmadd_pd(_mm256_mul_pd(r, z), ps, r);

  __m256d pc = _mm256_fmadd_pd(z, _mm256_set1_pd(kC6), _mm256_set1_pd(kC5));
  pc = _mm256_fmadd_pd(z, pc, _mm256_set1_pd(kC4));
  pc = _mm256_fmadd_pd(z, pc, _mm256_set1_pd(kC3));
  pc = _mm256_fmadd_pd(z, pc, _mm256_set1_pd(kC2));
  pc = _mm256_fmadd_pd(z, pc, _mm256_set1_pd(kC1));
  const __m256d cos_r = _mm256_fmadd_pd(_mm256_mul_pd(z, z), pc,
                                        _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, _mm256_set1_pd(1.0)));

  const __m256i quadrant = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(q));
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256d swap = _mm256_castsi256_pd(
      _mm256_cmpeq_epi64(_mm256_and_si256(quadrant, one), one));
  const __m256i sin_sign = _mm256_slli_epi64(_mm256_and_si256(quadrant, two), 62);
  const __m256i cos_sign = _mm256_slli_epi64(_mm256_and_si256(_mm256_add_epi64(quadrant, one), two), 62);

  const __m256d s = _mm256_blendv_pd(sin_r, cos_r, swap);
  const __m256d c = _mm256_blendv_pd(cos_r, sin_r, swap);
  s_out = _mm256_xor_pd(s, _mm256_castsi256_pd(sin_sign));
  c_out = _mm256_xor_pd(c, _mm256_castsi256_pd(cos_sign));
}

void sincos(std::size_t count, const double* x, double* s, double* c) {
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  const __m256d limit = _mm256_set1_pd(kReductionLimit);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    // NaN compares false with _CMP_LE_OQ, so non-finite lanes also take the libm path.
    const __m256d in_range = _mm256_cmp_pd(_mm256_and_pd(xv, abs_mask), limit, _CMP_LE_OQ);
    if (_mm256_movemask_pd(in_range) != 0xF) {
      for (std::size_t l = i; l < i + 4; ++l) {
        s[l] = std::sin(x[l]);
        c[l] = std::cos(x[l]);
      }
      continue;
    }
    __m256d sv, cv;
    sincos4(xv, sv, cv);
    _mm256_storeu_pd(s + i, sv);
    _mm256_storeu_pd(c + i, cv);
  }
  if (i < count) {
    alignas(32) double xin[4] = {0.0, 0.0, 0.0, 0.0};
    alignas(32) double sout[4], cout[4];
    const std::size_t rest = count - i;
    for (std::size_t l = 0; l < rest; ++l) xin[l] = x[i + l];
    sincos(4, xin, sout, cout);
    for (std::size_t l = 0; l < rest; ++l) {
      s[i + l] = sout[l];
      c[i + l] = cout[l];
    }
  }
}

void multiply(std::size_t count, const double* factor, double* inout) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4)
    _mm256_storeu_pd(inout + i, _mm256_mul_pd(_mm256_loadu_pd(inout + i), _mm256_loadu_pd(factor + i)));
  for (; i < count; ++i) inout[i] *= factor[i];
}

void column_sum(int m, int n, const double* a, int lda, double* out) {
  int j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (int i = 0; i < m; ++i)
      acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + static_cast<std::size_t>(i) * lda + j));
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < n; ++j) {
    double sum = 0.0;
    for (int i = 0; i < m; ++i) sum += a[static_cast<std::size_t>(i) * lda + j];
    out[j] = sum;
  }
}

}  // namespace

namespace detail {
const KernelSet& avx2_kernels() {
  static const KernelSet set{Backend::Avx2, "avx2", &gemm, &sincos, &multiply, &column_sum};
  return set;
}
}  // namespace detail

}  // namespace pinnweigh::simd
