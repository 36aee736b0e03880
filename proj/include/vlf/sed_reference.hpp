#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "vlf/lattice_codec.hpp"

namespace vlf {

// Per-message mirror of the grouped encoder. Posteriors are tracked directly
// by Bayes updates in the log domain; the partition reuses the group-level
// TOP + repair path on cumulative labels, so partitions agree with the
// grouped encoder bit for bit. Memory and time are O(M) per round.
class ReferenceCodec {
 public:
  ReferenceCodec(const DiscreteBmsChannel& ch, std::uint32_t message_count,
                 const CodecConfig& cfg);

  const PartitionOutcome& compute_partition();
  bool message_in_plus(std::uint32_t w) const;
  void observe(int lattice_index);

  double max_posterior() const;
  std::uint32_t decode() const;  // lowest index among the posterior argmax
  bool stopped() const { return max_posterior() >= 1.0 - cfg_.epsilon; }
  std::int64_t round() const { return round_; }
  std::int64_t group_count() const { return static_cast<std::int64_t>(groups_.size()); }

  const std::vector<double>& log_posteriors() const { return log_post_; }
  const std::vector<std::int64_t>& labels() const { return labels_; }
  const std::vector<GroupSlot>& slots() const { return slots_; }
  int renormalize_warnings() const { return renormalize_warnings_; }
  const CodecConfig& config() const { return cfg_; }

  // One Bayes step: rho_m <- rho_m P_{x_m}(y) / sum_j rho_j P_{x_j}(y) in the
  // log domain with a max-shift normalizer.
  static std::vector<double> bayes_update(const std::vector<double>& log_post,
                                          const std::vector<bool>& in_plus,
                                          const DiscreteBmsChannel& ch, int lattice_index);

 private:
  void refresh_slots();
  void audit_state() const;
  double log_prob(int side, int lattice_index) const;

  DiscreteBmsChannel channel_;
  CodecConfig cfg_;
  std::uint32_t message_count_;
  std::vector<double> log_post_;        // index 0 unused; messages are 1..M
  std::vector<std::int64_t> labels_;
  std::vector<bool> in_plus_;           // valid after compute_partition
  std::map<std::int64_t, std::vector<std::uint32_t>> groups_;  // label -> ordered members
  std::vector<GroupSlot> slots_;
  PartitionOutcome part_;
  bool partition_valid_ = false;
  std::int64_t round_ = 0;
  int renormalize_warnings_ = 0;
  std::vector<double> logp_plus_;  // log mu+(k) indexed by k + L_tail
};

TrialRecord run_reference_trial(const DiscreteBmsChannel& ch, const CodecConfig& cfg,
                                std::uint32_t true_message, Rng& rng, int bits,
                                bool keep_trace = false);

}  // namespace vlf
