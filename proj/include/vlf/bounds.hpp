#pragma once

#include <functional>
#include <optional>

#include "vlf/channel.hpp"

namespace vlf {

// alpha(eps') = max{ psi0 / (1 - e^{-A/2}), e^{-A/2} } with A = log((1-eps')/eps').
double alpha_of(double eps_prime, double psi0);

struct Refinements {
  // Substitute psi0 for chi throughout the bound (valid since psi(0) <= chi is
  // the only property of chi the proof uses).
  bool use_psi0 = false;
  // Channel-specific improvement of the log 2 constant; absent means log 2.
  std::optional<double> log2_term;
};

struct PhaseBreakdown {
  double communication = 0.0;
  double confirmation = 0.0;
  double recovery = 0.0;
  double total() const { return communication + confirmation + recovery; }
};

struct BoundReport {
  double bits = 0.0;       // K = log2 M
  double eps = 0.0;        // target error probability
  ChannelParams params;
  double log2_term_used = 0.0;
  double psi0_used = 0.0;  // chi or tighter psi(0)
  bool refined = false;

  double alpha_eps = 0.0;      // alpha(eps) at eps' = eps
  PhaseBreakdown phases;       // N0(M, eps) decomposition at eps' = eps
  double n0 = 0.0;             // phases.total()
  double n_star_upper = 0.0;   // min over eps0 of (1-eps0) N0(M, (eps-eps0)/(1-eps0))
  double eps0_opt = 0.0;
  double eps0_closed_form = 0.0;

  double n0_baseline = 0.0;  // chi + log 2 variant, for side-by-side reporting
  double n0_refined = 0.0;   // psi0 + refined-constant variant
};

// N0(M, eps') with the three-phase decomposition; bits = log2 M.
PhaseBreakdown n0_phases(const ChannelParams& p, double bits, double eps_prime,
                         const Refinements& r = {});
double n0_bound(const ChannelParams& p, double bits, double eps_prime,
                const Refinements& r = {});

// Stop-at-time-zero optimization: 1024-point grid over [0, eps) then golden
// refinement to 1e-10. Returns (eps0_opt, n_star_upper).
std::pair<double, double> optimize_stop_at_zero(const ChannelParams& p, double bits, double eps,
                                                const Refinements& r = {});

// Full report including both baseline and refined N0 variants.
BoundReport evaluate_bound(const ChannelParams& p, double bits, double eps,
                           const Refinements& r = {});

struct AsymptoticReport {
  double n = 0.0;
  double second_order = 0.0;  // -(C/C1) log N
  double k_eps = 0.0;
  double log_m_lower = 0.0;   // NC/(1-eps) + second_order + k_eps
};

AsymptoticReport asymptotic_logM(const ChannelParams& p, double n, double eps);

// Remark-2 constants: log(2(1-p))/(1-p) for a two-point (BSC-like) lattice,
// (1+r) log(2/(1+r)) with r = Phi(-1/sigma)/Phi(1/sigma) for BI-AWGN.
// Generic lattice channels fall back to log 2 (refined = false).
struct Log2Refinement {
  double value;
  bool refined;
};
Log2Refinement remark2_log2_refinement(const DiscreteBmsChannel& ch);
Log2Refinement remark2_log2_refinement(const AwgnChannel& ch);
Log2Refinement remark2_log2_refinement(const ChannelSpec& spec);

struct SpitzerControl {
  double target_tail = 1e-10;
  int n_max = 10000;
  // Budget for the lattice convolution provider; past it the result is
  // returned uncertified.
  std::uint64_t max_ops = 1u << 30;
};

struct SpitzerResult {
  double psi0 = 0.0;
  double tail_bound = 0.0;  // certified bound on |psi0_true - psi0|
  int terms = 0;
  bool certified = false;
};

// psi(0) = 1 - exp(-sum_n (1/n) P0[S_n < 0]) with tail certified via
// P[S_n < 0] <= Z^n / 2. Throws std::domain_error if Z >= 1.
SpitzerResult spitzer_psi0(const std::function<double(int)>& p_sn_negative, double bhattacharyya,
                           const SpitzerControl& ctl = {});

// Providers for P0[S_n < 0].
std::function<double(int)> bsc_pn_provider(double p);
std::function<double(int)> awgn_pn_provider(double sigma2);
// n-fold lattice convolution; stateful and incremental, call with n = 1, 2, ...
std::function<double(int)> lattice_pn_provider(const DiscreteBmsChannel& ch);

}  // namespace vlf
