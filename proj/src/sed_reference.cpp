#include "vlf/sed_reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vlf {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ReferenceCodec::ReferenceCodec(const DiscreteBmsChannel& ch, std::uint32_t message_count,
                               const CodecConfig& cfg)
    : channel_(ch), cfg_(cfg), message_count_(message_count) {
  if (message_count < 2) throw std::domain_error("ReferenceCodec: need at least 2 messages");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5))
    throw std::domain_error("ReferenceCodec: epsilon must lie in (0, 1/2)");
  channel_.validate();

  log_post_.assign(message_count + 1, -std::log(static_cast<double>(message_count)));
  log_post_[0] = kNegInf;
  labels_.assign(message_count + 1, 0);
  in_plus_.assign(message_count + 1, false);
  std::vector<std::uint32_t> all(message_count);
  for (std::uint32_t m = 1; m <= message_count; ++m) all[m - 1] = m;
  groups_[0] = std::move(all);

  logp_plus_.assign(2 * channel_.tail_label + 1, kNegInf);
  for (const auto& [k, p] : channel_.probs_plus)
    if (p > 0.0) logp_plus_[k + channel_.tail_label] = std::log(p);
}

double ReferenceCodec::log_prob(int side, int lattice_index) const {
  int k = side > 0 ? lattice_index : -lattice_index;
  return logp_plus_[k + channel_.tail_label];
}

void ReferenceCodec::refresh_slots() {
  slots_.clear();
  slots_.reserve(groups_.size());
  for (auto it = groups_.rbegin(); it != groups_.rend(); ++it)
    slots_.push_back({it->first, static_cast<u128>(it->second.size()), 0.0});
  compute_group_posteriors(slots_, channel_.delta);
}

const PartitionOutcome& ReferenceCodec::compute_partition() {
  refresh_slots();
  part_ = top_init(slots_);
  sed_repair(slots_, part_);
  // Materialize per-message membership from group-order prefixes.
  auto it = groups_.rbegin();
  for (std::size_t j = 0; j < slots_.size(); ++j, ++it) {
    const auto& members = it->second;
    u128 n_minus = part_.n_minus[j];
    for (std::size_t pos = 0; pos < members.size(); ++pos)
      in_plus_[members[pos]] = static_cast<u128>(pos) >= n_minus;
  }
  if (cfg_.audit && !sed_satisfied(slots_, part_))
    throw std::logic_error("audit: SED condition violated after repair (reference)");
  partition_valid_ = true;
  return part_;
}

bool ReferenceCodec::message_in_plus(std::uint32_t w) const {
  if (!partition_valid_) throw std::logic_error("message_in_plus before compute_partition");
  if (w < 1 || w > message_count_) throw std::domain_error("message index outside [1, M]");
  return in_plus_[w];
}

std::vector<double> ReferenceCodec::bayes_update(const std::vector<double>& log_post,
                                                 const std::vector<bool>& in_plus,
                                                 const DiscreteBmsChannel& ch,
                                                 int lattice_index) {
  std::vector<double> out(log_post.size());
  std::vector<double> terms;
  terms.reserve(log_post.size());
  auto log_mu = [&](int k) {
    double p = ch.prob_plus(k);
    return p > 0.0 ? std::log(p) : kNegInf;
  };
  double lp_plus = log_mu(lattice_index);
  double lp_minus = log_mu(-lattice_index);
  for (std::size_t m = 1; m < log_post.size(); ++m)
    terms.push_back(log_post[m] + (in_plus[m] ? lp_plus : lp_minus));
  double log_z = logsumexp(terms);
  out[0] = kNegInf;
  for (std::size_t m = 1; m < log_post.size(); ++m) out[m] = terms[m - 1] - log_z;
  return out;
}

void ReferenceCodec::observe(int lattice_index) {
  if (!partition_valid_) throw std::logic_error("observe before compute_partition");
  int mag = std::abs(lattice_index);
  if (!(mag < channel_.interior_half_range || mag == channel_.tail_label))
    throw std::domain_error("observe: lattice index outside the channel alphabet");

  // Direct Bayes step on every message.
  double lp_plus = log_prob(+1, lattice_index);
  double lp_minus = log_prob(-1, lattice_index);
  std::vector<double> terms(message_count_);
  for (std::uint32_t m = 1; m <= message_count_; ++m)
    terms[m - 1] = log_post_[m] + (in_plus_[m] ? lp_plus : lp_minus);
  double log_z = logsumexp(terms);
  for (std::uint32_t m = 1; m <= message_count_; ++m) log_post_[m] = terms[m - 1] - log_z;

  // Label shift for the plus bin, with group lists rebuilt in Alg.-4 order:
  // the minus part of a label precedes the shifted plus part.
  std::map<std::int64_t, std::vector<std::uint32_t>> next;
  auto slot_it = groups_.rbegin();
  for (std::size_t j = 0; j < slots_.size(); ++j, ++slot_it) {
    auto& members = slot_it->second;
    u128 n_minus = part_.n_minus[j];
    if (n_minus > members.size()) throw ConsistencyError("reference: prefix exceeds group size");
    if (n_minus > 0) {
      auto& dst = next[slot_it->first];
      dst.insert(dst.end(), members.begin(), members.begin() + static_cast<std::size_t>(n_minus));
    }
  }
  slot_it = groups_.rbegin();
  for (std::size_t j = 0; j < slots_.size(); ++j, ++slot_it) {
    auto& members = slot_it->second;
    u128 n_minus = part_.n_minus[j];
    if (n_minus < members.size()) {
      auto& dst = next[slot_it->first + lattice_index];
      dst.insert(dst.end(), members.begin() + static_cast<std::size_t>(n_minus), members.end());
    }
  }
  groups_ = std::move(next);
  for (std::uint32_t m = 1; m <= message_count_; ++m)
    if (in_plus_[m]) labels_[m] += lattice_index;

  // Drift guard on the normalization.
  std::vector<double> body(log_post_.begin() + 1, log_post_.end());
  double s = logsumexp(body);
  if (std::abs(s) > 1e-7) {
    for (std::uint32_t m = 1; m <= message_count_; ++m) log_post_[m] -= s;
    ++renormalize_warnings_;
  }

  ++round_;
  partition_valid_ = false;
  if (cfg_.audit) audit_state();
}

void ReferenceCodec::audit_state() const {
  std::vector<double> body(log_post_.begin() + 1, log_post_.end());
  if (std::abs(std::expm1(logsumexp(body))) > 1e-9)
    throw std::logic_error("audit: reference posteriors do not sum to 1 within 1e-9");
  std::size_t total = 0;
  for (const auto& [label, members] : groups_) {
    if (members.empty()) throw std::logic_error("audit: empty reference group");
    total += members.size();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::uint32_t m : members) {
      if (labels_[m] != label) throw std::logic_error("audit: label/group mismatch");
      lo = std::min(lo, log_post_[m]);
      hi = std::max(hi, log_post_[m]);
    }
    if (hi - lo > 1e-10)
      throw std::logic_error("audit: equal-label messages have unequal posteriors");
  }
  if (total != message_count_) throw std::logic_error("audit: reference lost messages");
}

double ReferenceCodec::max_posterior() const {
  double best = kNegInf;
  for (std::uint32_t m = 1; m <= message_count_; ++m) best = std::max(best, log_post_[m]);
  return std::exp(best);
}

std::uint32_t ReferenceCodec::decode() const {
  std::uint32_t best = 1;
  for (std::uint32_t m = 2; m <= message_count_; ++m)
    if (log_post_[m] > log_post_[best]) best = m;
  return best;
}

TrialRecord run_reference_trial(const DiscreteBmsChannel& ch, const CodecConfig& cfg,
                                std::uint32_t true_message, Rng& rng, int bits,
                                bool keep_trace) {
  TrialRecord rec;
  std::int64_t cap = cfg.max_rounds > 0 ? cfg.max_rounds : 64LL * bits;
  ReferenceCodec codec(ch, static_cast<std::uint32_t>(1) << bits, cfg);
  while (!codec.stopped()) {
    if (codec.round() >= cap) {
      rec.censored = true;
      break;
    }
    const PartitionOutcome& part = codec.compute_partition();
    bool plus = codec.message_in_plus(true_message);
    int n_t = sample_lattice(ch, plus ? +1 : -1, rng);
    double delta_now = part.delta;
    int iters = part.repair_iterations;
    codec.observe(n_t);
    if (keep_trace) {
      // The reference stores explicit member lists, so fragments are not a
      // tracked quantity; the column is 0 in reference traces.
      rec.trace.push_back({codec.round(), n_t, codec.group_count(), 0, delta_now, iters,
                           codec.max_posterior()});
    }
  }
  rec.tau = codec.round();
  rec.decoded = codec.decode();
  rec.error = !rec.censored && rec.decoded != true_message;
  return rec;
}

}  // namespace vlf
