#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vlf/bounds.hpp"
#include "vlf/channel.hpp"
#include "vlf/lattice_codec.hpp"
#include "vlf/sed_reference.hpp"

namespace vlf {

enum class EncoderKind { lattice, reference, both_verify };

struct ExperimentConfig {
  ChannelSpec channel;
  std::vector<int> bits;
  double epsilon = 1e-3;
  std::int64_t trials = 1;
  std::uint64_t base_seed = 1;
  EncoderKind encoder = EncoderKind::lattice;
  int workers = 1;
  bool refined_bounds = true;  // overlay columns use psi0 + Remark-2 constant
  bool audit = true;
};

struct CurvePoint {
  int bits = 0;
  std::int64_t trials = 0;
  double mean_tau = 0.0;
  double ci_tau = 0.0;  // 95% normal half-width
  double err_rate = 0.0;
  double err_upper = 0.0;  // Clopper-Pearson 95% upper bound
  double rate_bits_per_use = 0.0;
  double n0_bound = 0.0;
  double n_star_bound = 0.0;
  std::int64_t censored = 0;
};

// One-sided exact binomial upper confidence bound.
double clopper_pearson_upper(std::int64_t errors, std::int64_t trials, double confidence = 0.95);

std::vector<CurvePoint> run_experiment(const ExperimentConfig& cfg);

// CSV with a provenance header; identical bytes for identical configs
// regardless of worker count.
void write_curve_csv(std::ostream& os, const ExperimentConfig& cfg,
                     const std::vector<CurvePoint>& points);
std::string curve_csv_string(const ExperimentConfig& cfg, const std::vector<CurvePoint>& points);

struct DivergenceDetail {
  std::int64_t trial = 0;
  std::int64_t round = 0;
  std::string what;
};

struct EquivalenceReport {
  std::int64_t trials = 0;
  std::int64_t rounds = 0;
  std::int64_t divergences = 0;
  std::optional<DivergenceDetail> first;
  double max_posterior_gap = 0.0;  // max |grouped r - direct Bayes rho| at the top
  std::int64_t sed_violations = 0;
  std::int64_t structural_violations = 0;  // G_t or F_t bound breaches
};

// Runs both codecs in lockstep on shared noise; asserts per-round equality of
// the true message's bin bit and Delta, closeness of the max posterior, and
// final (tau, W-hat). The per-round hook, when set, sees both codecs after
// each partition.
using RoundHook = std::function<void(std::int64_t trial, std::int64_t round,
                                     const LatticeCodec&, const ReferenceCodec&)>;

EquivalenceReport verify_equivalence(const DiscreteBmsChannel& ch, int bits, double epsilon,
                                     std::int64_t trials, std::uint64_t base_seed,
                                     const RoundHook& hook = {});

}  // namespace vlf
