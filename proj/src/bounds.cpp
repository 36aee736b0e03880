#include "vlf/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vlf/numerics.hpp"

namespace vlf {

namespace {
constexpr double kLn2 = std::numbers::ln2;

// log(M - 1) for M = 2^bits, stable for bits up to several hundred.
double log_m_minus_1(double bits) {
  if (!(bits >= 1.0)) throw std::domain_error("bounds: need M >= 2 (bits >= 1)");
  return bits * kLn2 + std::log1p(-std::exp2(-bits));
}

void check_eps_prime(double eps_prime) {
  if (!(eps_prime > 0.0 && eps_prime < 0.5))
    throw std::domain_error("bounds: eps' must lie in (0, 1/2)");
}
}  // namespace

double alpha_of(double eps_prime, double psi0) {
  check_eps_prime(eps_prime);
  if (!(psi0 > 0.0 && psi0 < 1.0)) throw std::domain_error("alpha_of: psi0 must lie in (0,1)");
  double a = std::log((1.0 - eps_prime) / eps_prime);
  double half = std::exp(-0.5 * a);
  return std::max(psi0 / (1.0 - half), half);
}

PhaseBreakdown n0_phases(const ChannelParams& p, double bits, double eps_prime,
                         const Refinements& r) {
  check_eps_prime(eps_prime);
  if (!std::isfinite(p.kl_divergence))
    throw std::domain_error("bounds: C1 is infinite for this channel");
  if (!std::isfinite(p.eta)) throw std::domain_error("bounds: eta is infinite for this channel");
  const double l2 = r.log2_term.value_or(kLn2);
  const double chi_eff = r.use_psi0 ? p.psi0 : p.ruin_chi;
  const double a = std::log((1.0 - eps_prime) / eps_prime);

  PhaseBreakdown ph;
  ph.communication = (log_m_minus_1(bits) + l2) / p.capacity;
  ph.confirmation = (a + p.eta) / p.kl_divergence;
  const double alpha = alpha_of(eps_prime, chi_eff);
  ph.recovery = (std::min(alpha * p.eta, chi_eff * p.eta0_minus) + chi_eff * l2) /
                ((1.0 - chi_eff) * p.capacity);
  return ph;
}

double n0_bound(const ChannelParams& p, double bits, double eps_prime, const Refinements& r) {
  return n0_phases(p, bits, eps_prime, r).total();
}

std::pair<double, double> optimize_stop_at_zero(const ChannelParams& p, double bits, double eps,
                                                const Refinements& r) {
  check_eps_prime(eps);
  auto objective = [&](double eps0) {
    double eps_prime = (eps - eps0) / (1.0 - eps0);
    if (!(eps_prime > 0.0)) return std::numeric_limits<double>::infinity();
    return (1.0 - eps0) * n0_bound(p, bits, eps_prime, r);
  };

  constexpr int kGrid = 1024;
  int best = 0;
  double best_val = objective(0.0);
  for (int i = 1; i < kGrid; ++i) {
    double e0 = eps * i / kGrid;
    double v = objective(e0);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = eps * std::max(0, best - 1) / kGrid;
  double hi = eps * std::min(kGrid - 1, best + 1) / kGrid;
  auto [x, negv] = golden_max([&](double e0) { return -objective(e0); }, lo, hi, 1e-10);
  double eps0 = x;
  double val = -negv;
  // The boundary eps0 = 0 is a common argmin; snap to it when it is not worse.
  double at_zero = objective(0.0);
  if (at_zero <= val) {
    eps0 = 0.0;
    val = at_zero;
  }
  return {eps0, val};
}

BoundReport evaluate_bound(const ChannelParams& p, double bits, double eps,
                           const Refinements& r) {
  BoundReport rep;
  rep.bits = bits;
  rep.eps = eps;
  rep.params = p;
  rep.refined = r.use_psi0 || r.log2_term.has_value();
  rep.log2_term_used = r.log2_term.value_or(kLn2);
  rep.psi0_used = r.use_psi0 ? p.psi0 : p.ruin_chi;

  rep.alpha_eps = alpha_of(eps, rep.psi0_used);
  rep.phases = n0_phases(p, bits, eps, r);
  rep.n0 = rep.phases.total();
  auto [eps0, nstar] = optimize_stop_at_zero(p, bits, eps, r);
  rep.eps0_opt = eps0;
  rep.n_star_upper = nstar;
  double cf = eps - (1.0 - eps) * (1.0 - eps) / (nstar * p.kl_divergence);
  rep.eps0_closed_form = std::clamp(cf, 0.0, eps);

  rep.n0_baseline = n0_bound(p, bits, eps, Refinements{});
  rep.n0_refined = n0_bound(p, bits, eps, Refinements{true, r.log2_term});
  return rep;
}

AsymptoticReport asymptotic_logM(const ChannelParams& p, double n, double eps) {
  if (!(n > 0.0)) throw std::domain_error("asymptotic_logM: N must be positive");
  check_eps_prime(eps);
  AsymptoticReport rep;
  rep.n = n;
  const double ratio = p.capacity / p.kl_divergence;
  rep.second_order = -ratio * std::log(n);
  const double chi = p.ruin_chi;
  rep.k_eps = -ratio * (1.0 + std::log(p.kl_divergence / (1.0 - eps))) - ratio * p.eta -
              chi * std::min(p.eta, p.eta0_minus) / (1.0 - chi) - kLn2 / (1.0 - chi);
  rep.log_m_lower = n * p.capacity / (1.0 - eps) + rep.second_order + rep.k_eps;
  return rep;
}

Log2Refinement remark2_log2_refinement(const DiscreteBmsChannel& ch) {
  std::vector<std::pair<int, double>> support;
  for (const auto& [k, p] : ch.probs_plus)
    if (p > 0.0) support.push_back({k, p});
  if (support.size() == 2 && support[0].first == -support[1].first) {
    double p = support[0].second;  // crossover probability of the BSC-like pair
    return {std::log(2.0 * (1.0 - p)) / (1.0 - p), true};
  }
  return {kLn2, false};
}

Log2Refinement remark2_log2_refinement(const AwgnChannel& ch) {
  double inv_sigma = 1.0 / std::sqrt(ch.sigma2);
  double r = norm_cdf(-inv_sigma) / norm_cdf(inv_sigma);
  return {(1.0 + r) * std::log(2.0 / (1.0 + r)), true};
}

Log2Refinement remark2_log2_refinement(const ChannelSpec& spec) {
  if (spec.is_lattice()) return remark2_log2_refinement(spec.lattice());
  return remark2_log2_refinement(spec.awgn());
}

SpitzerResult spitzer_psi0(const std::function<double(int)>& p_sn_negative, double bhattacharyya,
                           const SpitzerControl& ctl) {
  const double z = bhattacharyya;
  if (!(z > 0.0 && z < 1.0))
    throw std::domain_error("spitzer_psi0: tail not certifiable (Z must lie in (0,1))");
  double s = 0.0;
  SpitzerResult res;
  for (int n = 1; n <= ctl.n_max; ++n) {
    double pn = p_sn_negative(n);
    if (std::isnan(pn)) break;  // provider ran out of budget
    s += pn / n;
    res.terms = n;
    // sum_{m>n} Z^m/(2m) <= Z^{n+1} / (2 (n+1) (1-Z))
    double tail_sum = std::pow(z, n + 1) / (2.0 * (n + 1) * (1.0 - z));
    res.psi0 = -std::expm1(-s);
    res.tail_bound = std::exp(-s) * tail_sum;
    if (res.tail_bound < ctl.target_tail) {
      res.certified = true;
      break;
    }
  }
  return res;
}

std::function<double(int)> bsc_pn_provider(double p) {
  if (!(p > 0.0 && p < 0.5)) throw std::domain_error("bsc_pn_provider: p must lie in (0, 1/2)");
  // P(Bin(n, p) > n/2): strict majority of flips drives the LLR walk negative.
  return [p](int n) {
    int kmin = n / 2 + 1;
    if (kmin > n) return 0.0;
    double logp = std::log(p), logq = std::log1p(-p);
    double lt = std::lgamma(n + 1.0) - std::lgamma(kmin + 1.0) - std::lgamma(n - kmin + 1.0) +
                kmin * logp + (n - kmin) * logq;
    double term = std::exp(lt);
    double sum = term;
    for (int k = kmin + 1; k <= n; ++k) {
      term *= (static_cast<double>(n - k + 1) / k) * (p / (1.0 - p));
      sum += term;
      if (term < sum * 1e-18) break;
    }
    return sum;
  };
}

std::function<double(int)> awgn_pn_provider(double sigma2) {
  double sigma = std::sqrt(sigma2);
  // S_n ~ N(2n/sigma^2, 4n/sigma^2), so P[S_n < 0] = Phi(-sqrt(n)/sigma).
  return [sigma](int n) { return norm_cdf(-std::sqrt(static_cast<double>(n)) / sigma); };
}

namespace {
struct LatticeConv {
  std::vector<std::pair<int, double>> step;  // positive-mass symbols
  std::vector<double> dist;                  // P(S_n = offset + idx)
  long long offset = 0;
  int n_done = 0;
  std::uint64_t ops = 0;
  std::uint64_t max_ops;
  int span;  // max |label| in one step
};
}  // namespace

std::function<double(int)> lattice_pn_provider(const DiscreteBmsChannel& ch) {
  auto st = std::make_shared<LatticeConv>();
  for (const auto& [k, p] : ch.probs_plus)
    if (p > 0.0) st->step.push_back({k, p});
  st->span = ch.tail_label;
  st->dist = {1.0};
  st->offset = 0;
  st->max_ops = SpitzerControl{}.max_ops;
  return [st](int n) -> double {
    if (n != st->n_done + 1)
      throw std::logic_error("lattice_pn_provider: must be called with n = 1, 2, ...");
    if (st->ops > st->max_ops) return std::numeric_limits<double>::quiet_NaN();
    long long new_offset = st->offset - st->span;
    std::vector<double> next(st->dist.size() + 2 * st->span, 0.0);
    for (size_t i = 0; i < st->dist.size(); ++i) {
      double mass = st->dist[i];
      if (mass <= 0.0) continue;
      long long base = st->offset + static_cast<long long>(i) - new_offset;
      for (const auto& [k, p] : st->step) next[base + k] += mass * p;
    }
    st->ops += st->dist.size() * st->step.size();
    // Trim negligible edges; the certified Spitzer tail dwarfs what is dropped.
    size_t lo = 0, hi = next.size();
    while (lo < hi && next[lo] < 1e-300) ++lo;
    while (hi > lo && next[hi - 1] < 1e-300) --hi;
    st->dist.assign(next.begin() + lo, next.begin() + hi);
    st->offset = new_offset + static_cast<long long>(lo);
    st->n_done = n;
    double below = 0.0;
    for (size_t i = 0; i < st->dist.size(); ++i) {
      if (st->offset + static_cast<long long>(i) < 0) below += st->dist[i];
    }
    return below;
  };
}

}  // namespace vlf
