#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "vlf/channel.hpp"

namespace vlf {

struct NoBracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonMonotoneError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// LLR of the Y-space output bin [u, v) under BI-AWGN with noise power sigma2:
// log P+(u,v) / P-(u,v) with Gaussian bin probabilities. v may be +inf.
double bin_llr(double sigma2, double u, double v);
double tail_llr(double sigma2, double u);

// Sequential bisection at fixed (delta, L_tail): solves the tail equation for
// b_{L-1/2}, then backwards ell(u, b_{k+1/2}) = k delta for k = L-1..1.
// Returns [b_{1/2}, ..., b_{L-1/2}]. Throws NoBracketError when a target LLR
// is unreachable (infeasible pair) and NonMonotoneError if ordering breaks.
std::vector<double> solve_thresholds(double sigma2, double delta, int tail_label, int levels);

struct QuantizerDesign {
  double sigma2 = 0.0;
  int levels = 0;      // B, odd
  int half_range = 0;  // L = (B-1)/2
  int tail_label = 0;  // L_tail
  double delta = 0.0;
  std::vector<double> y_thresholds;  // positive thresholds, ascending
  double induced_capacity = 0.0;     // nats
  bool tb_window_ok = true;          // (L-1/2) delta within [T_B*, T_B*+1]
};

// Joint optimization: enumerates L_tail in [max(L, L_tail*-r), L_tail*+r] and
// golden-section maximizes the induced capacity over delta for each.
QuantizerDesign design_quantizer(double sigma2, int levels, int search_radius = 3,
                                 std::optional<std::pair<double, double>> delta_window = {});

// Lattice channel induced by the design; labels are exact by construction.
DiscreteBmsChannel induced_channel(const QuantizerDesign& d);

struct CapacityLossReport {
  double unquantized_capacity = 0.0;  // quadrature C of the BI-AWGN channel
  double exact_loss = 0.0;            // C - C_{B,delta}
  double kappa = 0.0;                 // E[(1+e^Lambda)^-2]
  double leading_term = 0.0;          // kappa delta^2 / 24
  double asymptotic_term = 0.0;       // (8 kappa / 3 sigma^2) log B / B^2
};

CapacityLossReport capacity_loss_report(const QuantizerDesign& d);

// Channel constant kappa for BI-AWGN with the given noise power.
double awgn_kappa(double sigma2);

}  // namespace vlf
