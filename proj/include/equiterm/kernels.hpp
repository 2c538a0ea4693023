#pragma once

#include <cstddef>
#include <string_view>

// Flat double kernels used by the solvers' inner loops. Each variant computes
// the same quantities; the AVX2 table reassociates sums, so results agree with
// the scalar reference only up to rounding.
namespace equiterm::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  double (*dot)(const double* x, const double* y, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = A x with A row-major (rows x cols).
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // C += w x x^T over the full row-major n x n matrix.
  void (*syr)(double w, const double* x, double* c, std::size_t n);
};

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void syr(double w, const double* x, double* c, std::size_t n);
}  // namespace scalar

#if defined(EQUITERM_HAVE_AVX2)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void syr(double w, const double* x, double* c, std::size_t n);
}  // namespace avx2
#endif

bool isa_supported(Isa isa);
std::string_view isa_name(Isa isa);

// Table picked once per process: the best supported ISA unless
// EQUITERM_SIMD=scalar forces the reference path.
const KernelTable& active();
// Throws std::invalid_argument when the ISA is unavailable on this machine.
const KernelTable& table_for(Isa isa);

inline double dot(const double* x, const double* y, std::size_t n) { return active().dot(x, y, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  active().gemv(a, rows, cols, x, y);
}
inline void syr(double w, const double* x, double* c, std::size_t n) { active().syr(w, x, c, n); }

}  // namespace equiterm::kernels
