#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlf/channel.hpp"
#include "vlf/rng.hpp"

namespace vlf {

// Signals an internal bookkeeping bug (a prefix larger than its group).
struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

// Message indices and group counts; wide enough for M = 2^120.
using u128 = unsigned __int128;

std::string u128_to_string(u128 v);
u128 u128_from_string(const std::string& s);

struct Interval {
  u128 start;   // first message index, >= 1
  u128 length;  // >= 1
};

// Ordered list of disjoint index intervals. Order is maintenance order, not
// sorted order; the prefix of the list is the prefix of the group.
class IntervalList {
 public:
  IntervalList() = default;
  static IntervalList single(u128 start, u128 length);

  u128 total() const;
  std::size_t fragment_count() const { return frags_.size(); }
  bool empty() const { return frags_.empty(); }
  u128 first_index() const;

  // First n indices in list order and the remainder; splits at most one
  // interval. n must not exceed total().
  std::pair<IntervalList, IntervalList> split_prefix(u128 n) const;

  // Appends other, merging at the seam and between other's fragments:
  // (s, l), (s+l, r) -> (s, l+r).
  void append_coalesce(IntervalList&& other);

  // 0-based position of index within list order, or npos if absent.
  static constexpr u128 npos = ~static_cast<u128>(0);
  u128 position_of(u128 index) const;

  std::span<const Interval> fragments() const { return frags_; }

 private:
  std::vector<Interval> frags_;
};

struct CodecConfig {
  double epsilon = 1e-3;
  std::int64_t max_rounds = 0;  // 0 means 64 * bits
  std::uint64_t seed = 0;
  bool audit = true;  // per-round invariant checks (SED, counts, structure)

  static CodecConfig for_bits(int bits, double epsilon, std::uint64_t seed = 0);
};

// One active label during partitioning: per-message posterior r and count.
struct GroupSlot {
  std::int64_t label;
  u128 count;
  double r;
};

struct PartitionOutcome {
  std::vector<u128> n_minus;  // parallel to the slot array (labels descending)
  double pi_minus = 0.0;
  double delta = 0.0;  // pi_minus - pi_plus, tracked as 2 pi_minus - 1
  int repair_iterations = 0;
  bool singleton_safeguard = false;
};

enum class MinLookup { linear_scan, ordered };

// r_k = e^{delta k} / sum_g N_g e^{delta g}, evaluated with a max-label shift.
// Slots must be sorted by descending label; fills the r fields.
void compute_group_posteriors(std::span<GroupSlot> slots, double delta);

// TOP rule over sorted groups: singleton safeguard if r_max >= 1/2, otherwise
// fill the minus bin in decreasing-label order and split the crossing group by
// the overshoot rule.
PartitionOutcome top_init(std::span<const GroupSlot> slots);

// Batched repair: while the two-sided SED inequality fails, move
// a = min{n, ceil((-r - delta)/(2r))} messages from the minimum-posterior
// group on the violating side (mirrored for the upper side).
void sed_repair(std::span<const GroupSlot> slots, PartitionOutcome& part,
                MinLookup lookup = MinLookup::linear_scan);

// SED check used by repair, audits, and tests: -min{r : n+ > 0} <= delta <=
// min{r : n- > 0} with ulp-scale slack.
bool sed_satisfied(std::span<const GroupSlot> slots, const PartitionOutcome& part);

struct TraceRow {
  std::int64_t t;
  int n_t;
  std::int64_t groups;
  std::int64_t fragments;
  double delta;
  int repair_iterations;
  double max_posterior;
};

struct TrialRecord {
  std::int64_t tau = 0;
  u128 decoded = 0;
  bool error = false;
  bool censored = false;
  std::vector<TraceRow> trace;  // filled only when tracing is enabled
};

// Grouped encoder/decoder state (Algorithms 1-4). Stepwise interface so the
// Monte Carlo driver can run it in lockstep with the reference codec.
class LatticeCodec {
 public:
  LatticeCodec(const DiscreteBmsChannel& ch, u128 message_count, const CodecConfig& cfg);

  // Runs grouped-state refresh + TOP + repair for the next round.
  const PartitionOutcome& compute_partition();
  bool message_in_plus(u128 w) const;  // valid after compute_partition
  void observe(int lattice_index);     // materialize, update, coalesce

  double max_posterior() const;
  std::int64_t round() const { return round_; }
  std::int64_t group_count() const { return static_cast<std::int64_t>(groups_.size()); }
  std::int64_t fragment_count() const;
  bool stopped() const { return max_posterior() >= 1.0 - cfg_.epsilon; }
  u128 decode() const;  // first index of the argmax-label group

  const std::vector<GroupSlot>& slots() const { return slots_; }
  const DiscreteBmsChannel& channel() const { return channel_; }
  const CodecConfig& config() const { return cfg_; }
  MinLookup min_lookup = MinLookup::linear_scan;

 private:
  struct Group {
    std::int64_t label;
    u128 count;
    IntervalList members;
  };

  void refresh_slots();
  void audit_state() const;

  DiscreteBmsChannel channel_;
  CodecConfig cfg_;
  u128 message_count_;
  std::vector<Group> groups_;  // ascending label
  std::vector<GroupSlot> slots_;  // descending label, refreshed per round
  PartitionOutcome part_;
  bool partition_valid_ = false;
  std::int64_t round_ = 0;
};

// Full Algorithm-1 loop: partition, transmit the side of w, sample, update,
// stop at max posterior >= 1 - epsilon or at the round cap (censored).
TrialRecord run_trial(const DiscreteBmsChannel& ch, const CodecConfig& cfg, u128 true_message,
                      Rng& rng, int bits, bool keep_trace = false);

}  // namespace vlf
