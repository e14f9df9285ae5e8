#pragma once

#include <cstddef>

// Small dense kernels used by the simplex least-squares solver and the grid
// reductions. A scalar reference implementation always exists; on x86-64 an
// AVX2 variant is selected at runtime when the CPU supports it, on AArch64 a
// NEON variant is compiled in. The variants are equivalence-tested against
// the scalar kernels.

namespace cicdsc::kernels {

enum class Backend { Scalar, Avx2, Neon };

// Currently active backend (picked once at startup, overridable for tests).
Backend active_backend();
const char* backend_name(Backend b);

// Force a backend. Returns false if the requested backend is unavailable on
// this machine (the active backend is left unchanged).
bool force_backend(Backend b);

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// sum((a - b)^2)
double sumsq_diff(const double* a, const double* b, std::size_t n);

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
double sum_scalar(const double* a, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
double sumsq_diff_scalar(const double* a, const double* b, std::size_t n);

#if defined(__x86_64__)
double dot_avx2(const double* a, const double* b, std::size_t n);
double sum_avx2(const double* a, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
double sumsq_diff_avx2(const double* a, const double* b, std::size_t n);
#endif
#if defined(__aarch64__)
double dot_neon(const double* a, const double* b, std::size_t n);
double sum_neon(const double* a, std::size_t n);
void axpy_neon(double alpha, const double* x, double* y, std::size_t n);
double sumsq_diff_neon(const double* a, const double* b, std::size_t n);
#endif
}  // namespace detail

}  // namespace cicdsc::kernels
