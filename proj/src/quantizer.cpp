#include "vlf/quantizer.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>

#include "vlf/numerics.hpp"

namespace vlf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Solved {
  std::vector<double> thresholds;
  double capacity;
};

// Root of an increasing function by bisection to |f| < ytol.
double bisect_increasing(const std::function<double(double)>& f, double lo, double hi,
                         double ytol) {
  double flo = f(lo), fhi = f(hi);
  if (!(flo < 0.0 && fhi > 0.0)) throw NoBracketError("bisection bracket lost");
  for (int it = 0; it < 300; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (std::abs(fm) < ytol) return mid;
    if (fm > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  throw NoBracketError("bisection did not reach tolerance");
}

}  // namespace

double bin_llr(double sigma2, double u, double v) {
  if (!(sigma2 > 0.0)) throw std::domain_error("bin_llr: sigma2 must be positive");
  if (!(u < v)) throw std::domain_error("bin_llr: degenerate interval (u >= v)");
  double sigma = std::sqrt(sigma2);
  double lp = log_gauss_mass((u - 1.0) / sigma, (v - 1.0) / sigma);
  double lm = log_gauss_mass((u + 1.0) / sigma, (v + 1.0) / sigma);
  return lp - lm;
}

double tail_llr(double sigma2, double u) { return bin_llr(sigma2, u, kInf); }

std::vector<double> solve_thresholds(double sigma2, double delta, int tail_label, int levels) {
  if (levels < 3 || levels % 2 == 0)
    throw std::domain_error("solve_thresholds: levels must be odd and >= 3");
  if (!(delta > 0.0)) throw std::domain_error("solve_thresholds: delta must be positive");
  const int half = (levels - 1) / 2;
  if (tail_label < half) throw std::domain_error("solve_thresholds: L_tail must be >= L");
  const double sigma = std::sqrt(sigma2);
  const double ytol = 1e-11;

  std::vector<double> b(half);

  // Tail equation: ell_tail is increasing from 0 at -inf, so a positive target
  // always brackets.
  {
    double target = tail_label * delta;
    auto f = [&](double u) { return tail_llr(sigma2, u) - target; };
    double guess = target * sigma2 / 2.0;
    double lo = guess, hi = guess;
    double step = std::max(sigma, 0.25);
    int tries = 0;
    while (f(lo) > 0.0) {
      lo -= step;
      step *= 2.0;
      if (++tries > 200) throw NoBracketError("tail threshold: no lower bracket");
    }
    step = std::max(sigma, 0.25);
    tries = 0;
    while (f(hi) < 0.0) {
      hi += step;
      step *= 2.0;
      if (++tries > 200) throw NoBracketError("tail threshold: no upper bracket");
    }
    b[half - 1] = bisect_increasing(f, lo, hi, ytol);
  }

  // Backwards recursion: ell(u, b_{k+1/2}) = k delta, increasing in u with
  // supremum Lambda(v) = 2v/sigma2 as u -> v.
  for (int k = half - 1; k >= 1; --k) {
    double v = b[k];
    double target = k * delta;
    if (2.0 * v / sigma2 <= target)
      throw NoBracketError("interior threshold: target LLR unreachable below next threshold");
    auto f = [&](double u) { return bin_llr(sigma2, u, v) - target; };
    double w = sigma;
    int tries = 0;
    while (f(v - w) < 0.0) {
      w *= 0.5;
      if (++tries > 120) throw NoBracketError("interior threshold: no upper bracket");
    }
    double hi = v - w;
    double lo = hi;
    double step = std::max(sigma, 0.25);
    tries = 0;
    while (f(lo) > 0.0) {
      lo -= step;
      step *= 2.0;
      if (++tries > 200) throw NoBracketError("interior threshold: no lower bracket");
    }
    b[k - 1] = bisect_increasing(f, lo, hi, ytol);
  }

  for (int k = 0; k < half; ++k) {
    if (b[k] <= 0.0 || (k + 1 < half && b[k] >= b[k + 1]))
      throw NonMonotoneError("solved thresholds are not positive strictly increasing");
  }
  return b;
}

namespace {

// Bin masses under P+ for all labels, given thresholds; positions follow the
// antisymmetric bin layout.
std::vector<std::pair<int, double>> bin_masses(double sigma2, int levels, int tail_label,
                                               std::span<const double> b) {
  const int half = (levels - 1) / 2;
  const double sigma = std::sqrt(sigma2);
  auto mass_plus = [&](double u, double v) {
    return gauss_mass((u - 1.0) / sigma, (v - 1.0) / sigma);
  };
  std::vector<std::pair<int, double>> probs;
  probs.reserve(2 * half + 1);
  probs.push_back({-tail_label, mass_plus(-kInf, -b[half - 1])});
  for (int k = half - 1; k >= 1; --k) probs.push_back({-k, mass_plus(-b[k], -b[k - 1])});
  probs.push_back({0, mass_plus(-b[0], b[0])});
  for (int k = 1; k <= half - 1; ++k) probs.push_back({k, mass_plus(b[k - 1], b[k])});
  probs.push_back({tail_label, mass_plus(b[half - 1], kInf)});
  return probs;
}

double induced_capacity_of(double delta, std::span<const std::pair<int, double>> probs) {
  double c = 0.0;
  for (const auto& [k, p] : probs) c += p * bms_g(k * delta);
  return c;
}

std::optional<Solved> try_design(double sigma2, double delta, int tail_label, int levels) {
  try {
    Solved s;
    s.thresholds = solve_thresholds(sigma2, delta, tail_label, levels);
    auto probs = bin_masses(sigma2, levels, tail_label, s.thresholds);
    s.capacity = induced_capacity_of(delta, probs);
    return s;
  } catch (const NoBracketError&) {
    return std::nullopt;
  } catch (const NonMonotoneError&) {
    return std::nullopt;
  }
}

}  // namespace

QuantizerDesign design_quantizer(double sigma2, int levels, int search_radius,
                                 std::optional<std::pair<double, double>> delta_window) {
  if (levels < 3 || levels % 2 == 0)
    throw std::domain_error("design_quantizer: levels must be odd and >= 3");
  if (!(sigma2 > 0.0)) throw std::domain_error("design_quantizer: sigma2 must be positive");
  const int half = (levels - 1) / 2;
  const double sigma = std::sqrt(sigma2);
  const double mu = 2.0 / sigma2;

  const double tb_star = mu + (4.0 / sigma) * std::sqrt(std::log(static_cast<double>(levels)));
  // Lambda-space tail LLR evaluated through the Y-space bin function.
  const double ltail_at_tb = tail_llr(sigma2, tb_star * sigma2 / 2.0);
  const int ltail_star =
      static_cast<int>(std::lround((half - 0.5) * ltail_at_tb / tb_star));

  double d_lo, d_hi;
  if (delta_window) {
    d_lo = delta_window->first;
    d_hi = delta_window->second;
  } else {
    d_lo = 0.1 * tb_star / (half - 0.5);
    d_hi = 3.0 * tb_star / (half - 0.5);
  }

  QuantizerDesign best;
  best.induced_capacity = -kInf;
  bool any = false;

  for (int lt = std::max(half, ltail_star - search_radius); lt <= ltail_star + search_radius;
       ++lt) {
    auto objective = [&](double delta) {
      auto s = try_design(sigma2, delta, lt, levels);
      return s ? s->capacity : -kInf;
    };

    constexpr int kGrid = 33;
    int best_i = -1;
    double best_grid = -kInf;
    std::vector<double> grid(kGrid), val(kGrid);
    for (int i = 0; i < kGrid; ++i) {
      grid[i] = d_lo + (d_hi - d_lo) * i / (kGrid - 1);
      val[i] = objective(grid[i]);
      if (val[i] > best_grid) {
        best_grid = val[i];
        best_i = i;
      }
    }
    if (best_i < 0 || std::isinf(best_grid)) continue;

    double xtol = 1e-6 * grid[best_i];
    double lo = grid[std::max(0, best_i - 1)];
    double hi = grid[std::min(kGrid - 1, best_i + 1)];
    auto [d_local, c_local] = golden_max(objective, lo, hi, xtol);
    // Second start over the whole window; unimodality in delta is unproven.
    auto [d_full, c_full] = golden_max(objective, d_lo, d_hi, xtol);
    if (std::abs(c_full - c_local) > 1e-9 * std::max(1.0, std::abs(c_local))) {
      std::cerr << "design_quantizer: golden-section multistart disagreement at B=" << levels
                << " L_tail=" << lt << " (" << c_local << " vs " << c_full << ")\n";
    }
    double d_opt = c_full > c_local ? d_full : d_local;
    double c_opt = std::max(c_full, c_local);

    if (c_opt > best.induced_capacity) {
      auto s = try_design(sigma2, d_opt, lt, levels);
      if (!s) continue;
      any = true;
      best.sigma2 = sigma2;
      best.levels = levels;
      best.half_range = half;
      best.tail_label = lt;
      best.delta = d_opt;
      best.y_thresholds = std::move(s->thresholds);
      best.induced_capacity = s->capacity;
    }
  }
  if (!any) throw NoBracketError("design_quantizer: all (delta, L_tail) candidates infeasible");

  double tb = (half - 0.5) * best.delta;
  best.tb_window_ok = (tb >= tb_star && tb <= tb_star + 1.0);
  return best;
}

DiscreteBmsChannel induced_channel(const QuantizerDesign& d) {
  DiscreteBmsChannel ch;
  ch.delta = d.delta;
  ch.interior_half_range = d.half_range;
  ch.tail_label = d.tail_label;
  ch.probs_plus = bin_masses(d.sigma2, d.levels, d.tail_label, d.y_thresholds);
  double sum = 0.0;
  for (const auto& [k, p] : ch.probs_plus) sum += p;
  for (auto& [k, p] : ch.probs_plus) p /= sum;  // ratio-preserving, keeps labels exact
  ch.validate();
  return ch;
}

double awgn_kappa(double sigma2) {
  const double mu = 2.0 / sigma2;
  const double sd = 2.0 / std::sqrt(sigma2);
  return gh_expect_adaptive([&](double g) {
    double lam = mu + sd * g;
    double log1pe = lam > 0 ? lam + std::log1p(std::exp(-lam)) : std::log1p(std::exp(lam));
    return std::exp(-2.0 * log1pe);
  });
}

CapacityLossReport capacity_loss_report(const QuantizerDesign& d) {
  CapacityLossReport rep;
  rep.unquantized_capacity = channel_params(AwgnChannel{d.sigma2}).capacity;
  rep.exact_loss = rep.unquantized_capacity - d.induced_capacity;
  rep.kappa = awgn_kappa(d.sigma2);
  rep.leading_term = rep.kappa * d.delta * d.delta / 24.0;
  double b = d.levels;
  rep.asymptotic_term = (8.0 * rep.kappa / (3.0 * d.sigma2)) * std::log(b) / (b * b);
  return rep;
}

}  // namespace vlf
