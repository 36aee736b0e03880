#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vlf/rng.hpp"

#include <nlohmann/json_fwd.hpp>

namespace vlf {

// Binary-input channel whose LLR lives on the integer lattice
// {0, +-delta, ..., +-(L-1)delta, +-L_tail*delta}. probs_plus holds the output
// law under input +, keyed by lattice index and sorted ascending; the law
// under input - is the mirror image.
struct DiscreteBmsChannel {
  double delta = 0.0;           // lattice spacing, nats
  int interior_half_range = 0;  // L >= 1
  int tail_label = 0;           // L_tail >= L
  std::vector<std::pair<int, double>> probs_plus;

  int num_levels() const { return 2 * interior_half_range + 1; }
  double prob_plus(int k) const;

  // Enforces: probabilities sum to 1 (1e-12), mirror consistency
  // mu+(-k) = mu+(k) e^{-k delta} (1e-10), and the key set matches the
  // lattice. Throws std::domain_error on violation.
  void validate() const;
};

struct AwgnChannel {
  double sigma2 = 0.0;  // noise power, unit signal amplitude
};

enum class Psi0Source { analytic, spitzer, chi_surrogate };

const char* to_string(Psi0Source s);

struct ChannelParams {
  double capacity = 0.0;        // C, nats
  double kl_divergence = 0.0;   // C1 = D(P+ || P-), nats
  double bhattacharyya = 0.0;   // Z in (0,1)
  double ruin_chi = 0.0;        // chi = 1 - sqrt(1-Z)
  double eta = 0.0;             // overshoot parameter (min of three bounds)
  double eta0_plus = 0.0;       // positive mean-excess overshoot
  double eta0_minus = 0.0;      // negative mean-excess overshoot
  double psi0 = 0.0;            // ruin probability at 0
  Psi0Source psi0_source = Psi0Source::chi_surrogate;
};

// Two-point lattice for crossover probability p in (0, 1/2):
// delta = log((1-p)/p), mu+(+1) = 1-p, mu+(-1) = p, mu+(0) = 0.
DiscreteBmsChannel bsc_channel(double p);

ChannelParams channel_params(const DiscreteBmsChannel& ch);
ChannelParams channel_params(const AwgnChannel& ch);

// sup_{x>=0} E[X - x | X >= x] and sup_{x>=0} E[-(X+x) | X < -x] for a finite
// discrete law given as (value, prob) pairs. The supremum is attained at a
// support point or just past one; both variants are evaluated.
double mean_excess_sup_pos(std::span<const std::pair<double, double>> dist);
double mean_excess_sup_neg(std::span<const std::pair<double, double>> dist);

// Lattice index drawn from P_input; input is +1 or -1. The u01 overload maps
// one uniform draw through the inverse CDF, so codecs sharing a noise stream
// see identical outputs.
int sample_lattice(const DiscreteBmsChannel& ch, int input, Rng& rng);
int sample_lattice_u(const DiscreteBmsChannel& ch, int input, double u01);
double sample_awgn(const AwgnChannel& ch, int input, Rng& rng);

// Channel spec files: {"kind": "bsc"|"awgn"|"lattice", ...}.
struct ChannelSpec {
  std::variant<DiscreteBmsChannel, AwgnChannel> channel;
  std::string kind;  // as read/written

  bool is_lattice() const { return std::holds_alternative<DiscreteBmsChannel>(channel); }
  const DiscreteBmsChannel& lattice() const { return std::get<DiscreteBmsChannel>(channel); }
  const AwgnChannel& awgn() const { return std::get<AwgnChannel>(channel); }
};

nlohmann::json to_spec_json(const DiscreteBmsChannel& ch);
nlohmann::json to_spec_json(const AwgnChannel& ch);
ChannelSpec channel_from_spec_json(const nlohmann::json& j);
ChannelSpec load_channel_spec(const std::string& path);

ChannelParams channel_params(const ChannelSpec& spec);

}  // namespace vlf
