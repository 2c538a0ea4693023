#include "equiterm/kernels.hpp"

namespace equiterm::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(a + r * cols, x, cols);
}

void syr(double w, const double* x, double* c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w * x[i];
    double* row = c + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += wi * x[j];
  }
}

}  // namespace equiterm::kernels::scalar
