#include "vlf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace vlf {

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr double kLn2Const = std::numbers::ln2;
}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_cdf_c(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double log_norm_cdf_c(double x) {
  if (x < 35.0) {
    // erfc stays normal up to roughly x = 37, so the direct log is exact here.
    return std::log(norm_cdf_c(x));
  }
  // Asymptotic expansion Phi_c(x) = phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...).
  double x2 = x * x;
  double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

namespace {
// log(1 - e^x) for x < 0 without cancellation on either side.
double log1mexp(double x) {
  return x < -kLn2Const ? std::log1p(-std::exp(x)) : std::log(-std::expm1(x));
}
}  // namespace

double log_gauss_mass(double a, double b) {
  if (!(a < b)) throw std::invalid_argument("log_gauss_mass: requires a < b");
  if (a >= 0.0) {
    // Right tail: Phi_c(a) - Phi_c(b).
    double la = log_norm_cdf_c(a);
    if (std::isinf(b)) return la;
    double lb = log_norm_cdf_c(b);
    return la + log1mexp(lb - la);
  }
  if (b <= 0.0) return log_gauss_mass(-b, -a);
  // Interval straddles 0: erf difference is a true addition, no cancellation.
  double mass = 0.5 * (std::erf(b / kSqrt2) + std::erf(-a / kSqrt2));
  return std::log(mass);
}

double gauss_mass(double a, double b) { return std::exp(log_gauss_mass(a, b)); }

double bms_g(double llr) {
  if (llr > 0) return kLn2Const - std::log1p(std::exp(-llr));
  return kLn2Const + llr - std::log1p(std::exp(llr));
}

double logsumexp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

QuadratureError::QuadratureError(double residual)
    : std::runtime_error("quadrature did not converge, residual " + std::to_string(residual)),
      achieved_residual(residual) {}

namespace {

std::vector<std::pair<double, double>> compute_gauss_hermite(int n) {
  constexpr double kEps = 1e-14;
  constexpr int kMaxIter = 200;
  const double pim4 = 0.7511255444649424828587030;  // pi^{-1/4}
  std::vector<std::pair<double, double>> nw(n);
  int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * nw[0].first;
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * nw[1].first;
    } else {
      z = 2.0 * z - nw[i - 2].first;
    }
    double pp = 0.0;
    for (int it = 0; it < kMaxIter; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (k + 1)) * p2 - std::sqrt(static_cast<double>(k) / (k + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= kEps) break;
    }
    nw[i] = {z, 2.0 / (pp * pp)};
    nw[n - 1 - i] = {-z, nw[i].second};
  }
  return nw;
}

}  // namespace

const std::vector<std::pair<double, double>>& gauss_hermite(int n) {
  static std::map<int, std::vector<std::pair<double, double>>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_hermite(n)).first;
  return it->second;
}

double gh_expect(const std::function<double(double)>& f, int n) {
  const auto& nw = gauss_hermite(n);
  double s = 0.0;
  for (const auto& [x, w] : nw) s += w * f(kSqrt2 * x);
  return s / std::sqrt(std::numbers::pi);
}

double gh_expect_adaptive(const std::function<double(double)>& f, double tol) {
  double prev = gh_expect(f, 64);
  for (int n = 128; n <= 1024; n *= 2) {
    double cur = gh_expect(f, n);
    if (std::abs(cur - prev) < tol) return cur;
    prev = cur;
  }
  double residual = std::abs(gh_expect(f, 1024) - gh_expect(f, 512));
  throw QuadratureError(residual);
}

std::pair<double, double> golden_max(const std::function<double(double)>& f, double lo,
                                     double hi, double xtol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  double xm = 0.5 * (a + b);
  double fm = f(xm);
  if (fc > fm && fc >= fd) return {c, fc};
  if (fd > fm) return {d, fd};
  return {xm, fm};
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope: bad input");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace vlf
