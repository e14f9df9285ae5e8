#include "cicdsc/kernels.hpp"

namespace cicdsc::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sumsq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace detail

namespace {

struct Vtable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sumsq_diff)(const double*, const double*, std::size_t);
};

constexpr Vtable kScalar{detail::dot_scalar, detail::sum_scalar,
                         detail::axpy_scalar, detail::sumsq_diff_scalar};

#if defined(__x86_64__)
constexpr Vtable kAvx2{detail::dot_avx2, detail::sum_avx2, detail::axpy_avx2,
                       detail::sumsq_diff_avx2};
#endif
#if defined(__aarch64__)
constexpr Vtable kNeon{detail::dot_neon, detail::sum_neon, detail::axpy_neon,
                       detail::sumsq_diff_neon};
#endif

bool backend_available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(__x86_64__)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend pick_default() {
#if defined(__x86_64__)
  if (backend_available(Backend::Avx2)) return Backend::Avx2;
#endif
#if defined(__aarch64__)
  return Backend::Neon;
#endif
  return Backend::Scalar;
}

const Vtable& table_for(Backend b) {
  switch (b) {
#if defined(__x86_64__)
    case Backend::Avx2:
      return kAvx2;
#endif
#if defined(__aarch64__)
    case Backend::Neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

Backend g_backend = pick_default();
const Vtable* g_vt = &table_for(g_backend);

}  // namespace

Backend active_backend() { return g_backend; }

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

bool force_backend(Backend b) {
  if (!backend_available(b)) return false;
  g_backend = b;
  g_vt = &table_for(b);
  return true;
}

double dot(const double* a, const double* b, std::size_t n) {
  return g_vt->dot(a, b, n);
}

double sum(const double* a, std::size_t n) { return g_vt->sum(a, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  g_vt->axpy(alpha, x, y, n);
}

double sumsq_diff(const double* a, const double* b, std::size_t n) {
  return g_vt->sumsq_diff(a, b, n);
}

}  // namespace cicdsc::kernels
