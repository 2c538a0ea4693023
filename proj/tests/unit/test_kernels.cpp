#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "equiterm/kernels.hpp"

using namespace equiterm;

namespace {

std::vector<double> noise(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

}  // namespace

TEST_CASE("scalar and vector kernels agree") {
  const kernels::KernelTable& ref = kernels::table_for(kernels::Isa::Scalar);
  for (kernels::Isa isa : {kernels::Isa::Scalar, kernels::Isa::Avx2}) {
    if (!kernels::isa_supported(isa)) continue;
    const kernels::KernelTable& t = kernels::table_for(isa);
    CAPTURE(kernels::isa_name(isa));
    std::mt19937_64 rng(3);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 33u, 100u}) {
      const std::vector<double> x = noise(n, rng), y = noise(n, rng);
      CHECK(t.dot(x.data(), y.data(), n) == doctest::Approx(ref.dot(x.data(), y.data(), n)).epsilon(1e-13));

      std::vector<double> a = y, b = y;
      t.axpy(0.7, x.data(), a.data(), n);
      ref.axpy(0.7, x.data(), b.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));

      const std::size_t rows = n / 2 + 1;
      const std::vector<double> m = noise(rows * n, rng);
      std::vector<double> ga(rows), gb(rows);
      t.gemv(m.data(), rows, n, x.data(), ga.data());
      ref.gemv(m.data(), rows, n, x.data(), gb.data());
      for (std::size_t i = 0; i < rows; ++i) CHECK(ga[i] == doctest::Approx(gb[i]).epsilon(1e-12));

      std::vector<double> ca(n * n, 0.5), cb(n * n, 0.5);
      t.syr(0.3, x.data(), ca.data(), n);
      ref.syr(0.3, x.data(), cb.data(), n);
      for (std::size_t i = 0; i < n * n; ++i) CHECK(ca[i] == doctest::Approx(cb[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("scalar kernels match hand results") {
  const kernels::KernelTable& t = kernels::table_for(kernels::Isa::Scalar);
  const double x[3] = {1, 2, 3}, y[3] = {4, 5, 6};
  CHECK(t.dot(x, y, 3) == 32.0);
  double c[4] = {0, 0, 0, 0};
  t.syr(2.0, x, c, 2);
  CHECK(c[0] == 2.0);
  CHECK(c[1] == 4.0);
  CHECK(c[2] == 4.0);
  CHECK(c[3] == 8.0);
  const double m[6] = {1, 0, 1, 0, 1, 0};
  double out[2];
  t.gemv(m, 2, 3, x, out);
  CHECK(out[0] == 4.0);
  CHECK(out[1] == 2.0);
}

TEST_CASE("active table is a supported one") {
  CHECK(kernels::isa_supported(kernels::active().isa));
  if (!kernels::isa_supported(kernels::Isa::Avx2)) CHECK_THROWS_AS(kernels::table_for(kernels::Isa::Avx2), std::invalid_argument);
}
