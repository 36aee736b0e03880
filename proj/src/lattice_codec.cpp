#include "vlf/lattice_codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace vlf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Ulp-scale slack for the SED comparison; repair overshoot margins are far
// above this by construction.
constexpr double kSedSlack = 16.0 * std::numeric_limits<double>::epsilon();

u128 batch_from_double(double need, u128 n) {
  if (!(need > 0.0)) return 0;
  if (need >= 0x1p126 || need >= static_cast<double>(n)) return n;
  u128 a = static_cast<u128>(need);
  return a > n ? n : a;
}
}  // namespace

std::string u128_to_string(u128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

u128 u128_from_string(const std::string& s) {
  u128 v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw std::invalid_argument("u128_from_string: bad digit");
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  return v;
}

IntervalList IntervalList::single(u128 start, u128 length) {
  IntervalList out;
  if (length > 0) out.frags_.push_back({start, length});
  return out;
}

u128 IntervalList::total() const {
  u128 t = 0;
  for (const auto& f : frags_) t += f.length;
  return t;
}

u128 IntervalList::first_index() const {
  if (frags_.empty()) throw std::logic_error("IntervalList::first_index on empty list");
  return frags_[0].start;
}

std::pair<IntervalList, IntervalList> IntervalList::split_prefix(u128 n) const {
  IntervalList head, tail;
  u128 remaining = n;
  std::size_t i = 0;
  for (; i < frags_.size() && remaining > 0; ++i) {
    const auto& f = frags_[i];
    if (f.length <= remaining) {
      head.frags_.push_back(f);
      remaining -= f.length;
    } else {
      head.frags_.push_back({f.start, remaining});
      tail.frags_.push_back({f.start + remaining, f.length - remaining});
      remaining = 0;
    }
  }
  if (remaining > 0) throw std::logic_error("IntervalList::split_prefix: n exceeds total");
  for (; i < frags_.size(); ++i) tail.frags_.push_back(frags_[i]);
  return {std::move(head), std::move(tail)};
}

void IntervalList::append_coalesce(IntervalList&& other) {
  for (const auto& f : other.frags_) {
    if (!frags_.empty() && frags_.back().start + frags_.back().length == f.start) {
      frags_.back().length += f.length;
    } else {
      frags_.push_back(f);
    }
  }
  other.frags_.clear();
}

u128 IntervalList::position_of(u128 index) const {
  u128 acc = 0;
  for (const auto& f : frags_) {
    if (index >= f.start && index < f.start + f.length) return acc + (index - f.start);
    acc += f.length;
  }
  return npos;
}

CodecConfig CodecConfig::for_bits(int bits, double epsilon, std::uint64_t seed) {
  CodecConfig cfg;
  cfg.epsilon = epsilon;
  cfg.max_rounds = 64LL * bits;
  cfg.seed = seed;
  return cfg;
}

void compute_group_posteriors(std::span<GroupSlot> slots, double delta) {
  if (slots.empty()) throw std::logic_error("compute_group_posteriors: no active groups");
  const std::int64_t kmax = slots[0].label;
  double sum = 0.0;
  for (auto& s : slots) {
    s.r = std::exp(delta * static_cast<double>(s.label - kmax));
    sum += static_cast<double>(s.count) * s.r;
  }
  for (auto& s : slots) s.r /= sum;
}

PartitionOutcome top_init(std::span<const GroupSlot> slots) {
  PartitionOutcome part;
  part.n_minus.assign(slots.size(), 0);

  if (slots[0].r >= 0.5) {
    part.singleton_safeguard = true;
    part.n_minus[0] = 1;
    part.pi_minus = slots[0].r;
    part.delta = 2.0 * part.pi_minus - 1.0;
    return part;
  }

  double cum = 0.0;
  std::size_t cross = slots.size();  // index of the crossing group
  for (std::size_t j = 0; j < slots.size(); ++j) {
    double q = static_cast<double>(slots[j].count) * slots[j].r;
    if (cum + q < 0.5) {
      part.n_minus[j] = slots[j].count;
      cum += q;
    } else {
      cross = j;
      break;
    }
  }
  if (cross == slots.size()) cross = slots.size() - 1;  // rounding guard

  const double r_star = slots[cross].r;
  u128 a_star = batch_from_double(std::ceil((0.5 - cum) / r_star), slots[cross].count);
  if (a_star == 0) a_star = 1;
  double d = cum + static_cast<double>(a_star) * r_star - 0.5;
  part.n_minus[cross] = (d <= r_star / 2.0) ? a_star : a_star - 1;

  part.pi_minus = 0.0;
  for (std::size_t j = 0; j < slots.size(); ++j)
    part.pi_minus += static_cast<double>(part.n_minus[j]) * slots[j].r;
  part.delta = 2.0 * part.pi_minus - 1.0;
  return part;
}

namespace {

struct SideMins {
  double rho_minus = kInf;
  double rho_plus = kInf;
  std::size_t idx_minus = 0;
  std::size_t idx_plus = 0;
};

// Minimum posterior per side; on equal r the smaller label wins. Slots are
// sorted by descending label, so the reverse scan visits labels ascending.
SideMins side_minima(std::span<const GroupSlot> slots, const PartitionOutcome& part) {
  SideMins m;
  for (std::size_t j = slots.size(); j-- > 0;) {
    double r = slots[j].r;
    if (part.n_minus[j] > 0 && r < m.rho_minus) {
      m.rho_minus = r;
      m.idx_minus = j;
    }
    if (slots[j].count - part.n_minus[j] > 0 && r < m.rho_plus) {
      m.rho_plus = r;
      m.idx_plus = j;
    }
  }
  return m;
}

double recompute_delta(std::span<const GroupSlot> slots, PartitionOutcome& part) {
  double pi = 0.0;
  for (std::size_t j = 0; j < slots.size(); ++j)
    pi += static_cast<double>(part.n_minus[j]) * slots[j].r;
  part.pi_minus = pi;
  part.delta = 2.0 * pi - 1.0;
  return part.delta;
}

bool sed_ok(double delta, const SideMins& m) {
  return delta >= -m.rho_plus - kSedSlack && delta <= m.rho_minus + kSedSlack;
}

}  // namespace

bool sed_satisfied(std::span<const GroupSlot> slots, const PartitionOutcome& part) {
  return sed_ok(part.delta, side_minima(slots, part));
}

void sed_repair(std::span<const GroupSlot> slots, PartitionOutcome& part, MinLookup lookup) {
  const std::int64_t limit = 4 * static_cast<std::int64_t>(slots.size()) + 16;

  // Ordered variant: (r, label) sets per side, kept in sync with the counts.
  struct Cmp {
    bool operator()(const std::pair<double, std::int64_t>& a,
                    const std::pair<double, std::int64_t>& b) const {
      return a < b;
    }
  };
  std::set<std::pair<double, std::int64_t>, Cmp> minus_set, plus_set;
  std::vector<std::size_t> label_to_idx;
  auto key_of = [&](std::size_t j) { return std::make_pair(slots[j].r, slots[j].label); };
  if (lookup == MinLookup::ordered) {
    for (std::size_t j = 0; j < slots.size(); ++j) {
      if (part.n_minus[j] > 0) minus_set.insert(key_of(j));
      if (slots[j].count - part.n_minus[j] > 0) plus_set.insert(key_of(j));
    }
  }
  auto idx_of_label = [&](std::int64_t label) {
    // slots are sorted by descending label
    auto it = std::lower_bound(slots.begin(), slots.end(), label,
                               [](const GroupSlot& s, std::int64_t l) { return s.label > l; });
    return static_cast<std::size_t>(it - slots.begin());
  };

  int iterations = 0;
  while (true) {
    SideMins m;
    if (lookup == MinLookup::linear_scan) {
      m = side_minima(slots, part);
    } else {
      if (!minus_set.empty()) {
        m.rho_minus = minus_set.begin()->first;
        m.idx_minus = idx_of_label(minus_set.begin()->second);
      }
      if (!plus_set.empty()) {
        m.rho_plus = plus_set.begin()->first;
        m.idx_plus = idx_of_label(plus_set.begin()->second);
      }
    }
    if (sed_ok(part.delta, m)) break;
    if (++iterations > limit)
      throw std::logic_error("sed_repair: iteration limit exceeded (termination bug)");

    if (part.delta < -m.rho_plus) {
      std::size_t j = m.idx_plus;
      double r = slots[j].r;
      u128 n = slots[j].count - part.n_minus[j];
      u128 a = r > 0.0 ? batch_from_double(std::ceil((-r - part.delta) / (2.0 * r)), n) : n;
      if (a == 0) a = 1;
      part.n_minus[j] += a;
      if (lookup == MinLookup::ordered) {
        minus_set.insert(key_of(j));
        if (slots[j].count - part.n_minus[j] == 0) plus_set.erase(key_of(j));
      }
    } else {
      std::size_t j = m.idx_minus;
      double r = slots[j].r;
      u128 n = part.n_minus[j];
      u128 a = r > 0.0 ? batch_from_double(std::ceil((part.delta - r) / (2.0 * r)), n) : n;
      if (a == 0) a = 1;
      part.n_minus[j] -= a;
      if (lookup == MinLookup::ordered) {
        plus_set.insert(key_of(j));
        if (part.n_minus[j] == 0) minus_set.erase(key_of(j));
      }
    }
    recompute_delta(slots, part);
  }
  part.repair_iterations += iterations;
}

LatticeCodec::LatticeCodec(const DiscreteBmsChannel& ch, u128 message_count,
                           const CodecConfig& cfg)
    : channel_(ch), cfg_(cfg), message_count_(message_count) {
  if (message_count < 2) throw std::domain_error("LatticeCodec: need at least 2 messages");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5))
    throw std::domain_error("LatticeCodec: epsilon must lie in (0, 1/2)");
  channel_.validate();
  groups_.push_back({0, message_count, IntervalList::single(1, message_count)});
}

void LatticeCodec::refresh_slots() {
  slots_.clear();
  slots_.reserve(groups_.size());
  for (auto it = groups_.rbegin(); it != groups_.rend(); ++it)
    slots_.push_back({it->label, it->count, 0.0});
  compute_group_posteriors(slots_, channel_.delta);
}

const PartitionOutcome& LatticeCodec::compute_partition() {
  refresh_slots();
  part_ = top_init(slots_);
  sed_repair(slots_, part_, min_lookup);
  if (cfg_.audit) {
    double q_sum = 0.0;
    for (const auto& s : slots_) q_sum += static_cast<double>(s.count) * s.r;
    if (std::abs(q_sum - 1.0) > 1e-12)
      throw std::logic_error("audit: group masses do not sum to 1");
    if (!sed_satisfied(slots_, part_))
      throw std::logic_error("audit: SED condition violated after repair");
    if (part_.repair_iterations > static_cast<int>(slots_.size()))
      throw std::logic_error("audit: repair iterations exceeded group count");
  }
  partition_valid_ = true;
  return part_;
}

bool LatticeCodec::message_in_plus(u128 w) const {
  if (!partition_valid_) throw std::logic_error("message_in_plus before compute_partition");
  for (std::size_t j = 0; j < slots_.size(); ++j) {
    const Group& g = groups_[groups_.size() - 1 - j];
    u128 pos = g.members.position_of(w);
    if (pos != IntervalList::npos) return pos >= part_.n_minus[j];
  }
  throw std::domain_error("message_in_plus: message index outside [1, M]");
}

void LatticeCodec::observe(int lattice_index) {
  if (!partition_valid_) throw std::logic_error("observe before compute_partition");
  int mag = std::abs(lattice_index);
  if (!(mag < channel_.interior_half_range || mag == channel_.tail_label))
    throw std::domain_error("observe: lattice index outside the channel alphabet");

  const std::size_t g_count = groups_.size();
  std::vector<std::pair<std::int64_t, IntervalList>> minus_parts, plus_parts;
  minus_parts.reserve(g_count);
  plus_parts.reserve(g_count);
  for (std::size_t gi = 0; gi < g_count; ++gi) {
    Group& g = groups_[gi];
    u128 n_minus = part_.n_minus[g_count - 1 - gi];
    if (n_minus > g.count) throw ConsistencyError("observe: prefix exceeds group size");
    auto [head, tail] = g.members.split_prefix(n_minus);
    if (!head.empty()) minus_parts.push_back({g.label, std::move(head)});
    if (!tail.empty()) plus_parts.push_back({g.label + lattice_index, std::move(tail)});
  }

  // Merge the two label-ascending streams; on a shared label the minus part
  // precedes the shifted plus part.
  std::vector<Group> next;
  next.reserve(g_count + 1);
  std::size_t i = 0, j = 0;
  auto push_group = [&next](std::int64_t label, IntervalList&& list) {
    if (!next.empty() && next.back().label == label) {
      next.back().members.append_coalesce(std::move(list));
    } else {
      next.push_back({label, 0, {}});
      next.back().members.append_coalesce(std::move(list));
    }
  };
  while (i < minus_parts.size() || j < plus_parts.size()) {
    bool take_minus;
    if (i >= minus_parts.size())
      take_minus = false;
    else if (j >= plus_parts.size())
      take_minus = true;
    else
      take_minus = minus_parts[i].first <= plus_parts[j].first;
    if (take_minus) {
      push_group(minus_parts[i].first, std::move(minus_parts[i].second));
      ++i;
    } else {
      push_group(plus_parts[j].first, std::move(plus_parts[j].second));
      ++j;
    }
  }
  for (auto& g : next) g.count = g.members.total();
  groups_ = std::move(next);
  ++round_;
  partition_valid_ = false;
  if (cfg_.audit) audit_state();
}

void LatticeCodec::audit_state() const {
  u128 total = 0;
  std::int64_t frags = 0;
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const Group& g = groups_[gi];
    if (g.members.empty()) throw std::logic_error("audit: empty group retained");
    if (g.count != g.members.total()) throw std::logic_error("audit: stale group count");
    if (gi > 0 && groups_[gi - 1].label >= g.label)
      throw std::logic_error("audit: group labels not strictly ascending");
    auto fr = g.members.fragments();
    for (std::size_t fi = 1; fi < fr.size(); ++fi) {
      if (fr[fi - 1].start + fr[fi - 1].length == fr[fi].start)
        throw std::logic_error("audit: uncoalesced adjacent fragments");
    }
    total += g.count;
    frags += static_cast<std::int64_t>(g.members.fragment_count());
  }
  if (total != message_count_) throw std::logic_error("audit: message count not conserved");
  if (group_count() > 1 + channel_.tail_label * round_)
    throw std::logic_error("audit: group count bound G_t <= 1 + L_tail t violated");
  if (frags > 1 + 2 * round_)
    throw std::logic_error("audit: fragment bound F_t <= 1 + 2t violated");
}

std::int64_t LatticeCodec::fragment_count() const {
  std::int64_t frags = 0;
  for (const auto& g : groups_) frags += static_cast<std::int64_t>(g.members.fragment_count());
  return frags;
}

double LatticeCodec::max_posterior() const {
  const std::int64_t kmax = groups_.back().label;
  double sum = 0.0;
  for (auto it = groups_.rbegin(); it != groups_.rend(); ++it)
    sum += static_cast<double>(it->count) *
           std::exp(channel_.delta * static_cast<double>(it->label - kmax));
  return 1.0 / sum;
}

u128 LatticeCodec::decode() const { return groups_.back().members.first_index(); }

TrialRecord run_trial(const DiscreteBmsChannel& ch, const CodecConfig& cfg, u128 true_message,
                      Rng& rng, int bits, bool keep_trace) {
  TrialRecord rec;
  std::int64_t cap = cfg.max_rounds > 0 ? cfg.max_rounds : 64LL * bits;
  LatticeCodec codec(ch, static_cast<u128>(1) << bits, cfg);
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
      rec.trace.push_back({codec.round(), n_t, codec.group_count(), codec.fragment_count(),
                           delta_now, iters, codec.max_posterior()});
    }
  }
  rec.tau = codec.round();
  rec.decoded = codec.decode();
  rec.error = !rec.censored && rec.decoded != true_message;
  return rec;
}

}  // namespace vlf
