#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "vlf/numerics.hpp"

using namespace vlf;

namespace {

// Simpson oracle over [a, b]; n must be even.
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("normal cdf basics") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(norm_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
  CHECK(norm_cdf_c(1.0) == doctest::Approx(1.0 - 0.8413447460685429).epsilon(1e-12));
  CHECK(norm_cdf(-40.0) > 0.0);
}

TEST_CASE("log_norm_cdf_c agrees with direct log and handles deep tails") {
  for (double x : {0.0, 1.0, 5.0, 20.0, 34.0}) {
    CHECK(log_norm_cdf_c(x) == doctest::Approx(std::log(norm_cdf_c(x))).epsilon(1e-12));
  }
  // Beyond erfc underflow the asymptotic branch must still be finite and
  // monotone decreasing.
  double a = log_norm_cdf_c(40.0), b = log_norm_cdf_c(50.0);
  CHECK(std::isfinite(a));
  CHECK(b < a);
  // Continuity across the branch switch at 35.
  CHECK(log_norm_cdf_c(35.0 + 1e-9) == doctest::Approx(log_norm_cdf_c(35.0 - 1e-9)).epsilon(1e-8));
}

TEST_CASE("gauss_mass matches quadrature of the normal density") {
  auto phi = [](double t) { return norm_pdf(t); };
  for (auto [a, b] : std::vector<std::pair<double, double>>{
           {-1.0, 2.0}, {0.5, 0.9}, {3.0, 9.0}, {-9.0, -3.0}, {-0.1, 0.1}}) {
    double oracle = simpson(phi, a, b, 200000);
    CHECK(gauss_mass(a, b) == doctest::Approx(oracle).epsilon(1e-10));
  }
  CHECK(gauss_mass(-std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity()) == doctest::Approx(1.0));
  // Tiny interval deep in the tail: relative accuracy must survive.
  double lm = log_gauss_mass(12.0, 12.0 + 1e-9);
  double approx = std::log(norm_pdf(12.0) * 1e-9);
  CHECK(lm == doctest::Approx(approx).epsilon(1e-6));
}

TEST_CASE("gauss-hermite recovers normal moments") {
  for (int n : {64, 128, 301}) {
    CHECK(gh_expect([](double) { return 1.0; }, n) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(gh_expect([](double g) { return g * g; }, n) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gh_expect([](double g) { return g * g * g * g; }, n) ==
          doctest::Approx(3.0).epsilon(1e-12));
  }
  CHECK(gh_expect_adaptive([](double g) { return std::exp(g); }) ==
        doctest::Approx(std::exp(0.5)).epsilon(1e-11));
}

TEST_CASE("bms_g endpoints") {
  CHECK(bms_g(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(bms_g(50.0) == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
  CHECK(bms_g(-5.0) < 0.0);
}

TEST_CASE("golden section finds the peak of a concave function") {
  auto [x, fx] = golden_max([](double t) { return -(t - 1.3) * (t - 1.3); }, 0.0, 4.0, 1e-10);
  CHECK(x == doctest::Approx(1.3).epsilon(1e-7));
  CHECK(fx == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fit_slope on an exact line") {
  std::vector<double> xs{1, 2, 3, 4}, ys{2.5, 4.5, 6.5, 8.5};
  CHECK(fit_slope(xs, ys) == doctest::Approx(2.0).epsilon(1e-12));
}
