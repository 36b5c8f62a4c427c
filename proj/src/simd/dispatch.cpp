#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "pinnweigh/simd/kernels.hpp"

namespace pinnweigh::simd {

namespace {

bool cpu_has_avx2_fma() {
#if defined(PINNWEIGH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("PINNWEIGH_SIMD")) {
    const Backend requested = parse_backend(env);
    if (backend_supported(requested)) return requested;
  }
  return cpu_has_avx2_fma() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const KernelSet*>& active_slot() {
  static std::atomic<const KernelSet*> slot{&kernels(initial_backend())};
  return slot;
}

}  // namespace

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return cpu_has_avx2_fma();
  }
  return false;
}

const KernelSet& kernels(Backend b) {
  if (!backend_supported(b))
    throw std::runtime_error("SIMD backend " + std::string(backend_name(b)) +
                             " is not supported on this CPU/build");
  switch (b) {
    case Backend::Scalar:
      return detail::scalar_kernels();
    case Backend::Avx2:
#if defined(PINNWEIGH_HAVE_AVX2)
      return detail::avx2_kernels();
#else
      break;
#endif
  }
  throw std::runtime_error("unreachable backend");
}

const KernelSet& kernels() { return *active_slot().load(std::memory_order_acquire); }

Backend active_backend() { return kernels().backend; }

void set_backend(Backend b) { active_slot().store(&kernels(b), std::memory_order_release); }

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  throw std::invalid_argument("unknown SIMD backend '" + std::string(name) + "'");
}

std::string_view backend_name(Backend b) {
  return b == Backend::Scalar ? "scalar" : "avx2";
}

void transpose(int rows, int cols, const double* src, int lds, double* dst, int ldd) {
  constexpr int kBlock = 16;
  for (int r0 = 0; r0 < rows; r0 += kBlock)
    for (int c0 = 0; c0 < cols; c0 += kBlock) {
      const int r1 = r0 + kBlock < rows ? r0 + kBlock : rows;
      const int c1 = c0 + kBlock < cols ? c0 + kBlock : cols;
      for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) dst[static_cast<std::size_t>(c) * ldd + r] =
            src[static_cast<std::size_t>(r) * lds + c];
    }
}

}  // namespace pinnweigh::simd
