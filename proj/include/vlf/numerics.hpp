#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace vlf {

double norm_pdf(double x);
double norm_cdf(double x);
double norm_cdf_c(double x);

// log(1 - Phi(x)), valid for all x including deep tails where erfc underflows.
double log_norm_cdf_c(double x);

// log P(a <= G < b) for standard normal G; b may be +inf, a may be -inf.
// Tail intervals are evaluated as log-CDF differences so masses far beyond
// 8 sigma keep full relative accuracy.
double log_gauss_mass(double a, double b);
double gauss_mass(double a, double b);

double logsumexp(std::span<const double> v);

// g(lambda) = log(2 e^lambda / (1 + e^lambda)); the symmetric capacity of a
// BMS channel is E[g(Lambda)] under the input-plus LLR law.
double bms_g(double llr);

struct QuadratureError : std::runtime_error {
  double achieved_residual;
  explicit QuadratureError(double residual);
};

// Gauss-Hermite nodes/weights for integral e^{-x^2} f(x) dx (physicists'
// convention), nodes in descending order. Cached per n, thread-safe.
const std::vector<std::pair<double, double>>& gauss_hermite(int n);

// E[f(G)], G ~ N(0,1), with n-node Gauss-Hermite.
double gh_expect(const std::function<double(double)>& f, int n);

// Node doubling 64 -> 1024 until successive estimates differ by < tol.
// Throws QuadratureError with the achieved residual if nodes run out.
double gh_expect_adaptive(const std::function<double(double)>& f, double tol = 1e-10);

// Maximize a unimodal f on [lo, hi] by golden-section search; returns (x, f(x)).
// f may return -inf for infeasible points.
std::pair<double, double> golden_max(const std::function<double(double)>& f, double lo,
                                     double hi, double xtol);

// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace vlf
