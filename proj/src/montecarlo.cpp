#include "vlf/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "vlf/version.hpp"

namespace vlf {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double binom_cdf(std::int64_t x, std::int64_t n, double p) {
  // P(X <= x), summed in log space from k = 0.
  double logp = std::log(p), logq = std::log1p(-p);
  double sum = 0.0;
  double lterm = n * logq;  // k = 0
  sum += std::exp(lterm);
  for (std::int64_t k = 1; k <= x; ++k) {
    lterm += std::log(static_cast<double>(n - k + 1) / k) + logp - logq;
    sum += std::exp(lterm);
  }
  return std::min(sum, 1.0);
}

u128 draw_message(int bits, Rng& rng) {
  if (bits <= 63) return (rng.next_u64() & ((1ULL << bits) - 1)) + 1;
  u128 hi = rng.next_u64();
  u128 lo = rng.next_u64();
  u128 v = (hi << 64) | lo;
  u128 mask = (static_cast<u128>(1) << bits) - 1;
  return (v & mask) + 1;
}

}  // namespace

double clopper_pearson_upper(std::int64_t errors, std::int64_t trials, double confidence) {
  if (trials <= 0) throw std::domain_error("clopper_pearson_upper: trials must be positive");
  if (errors >= trials) return 1.0;
  double alpha = 1.0 - confidence;
  double lo = static_cast<double>(errors) / trials, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (binom_cdf(errors, trials, mid) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

std::vector<CurvePoint> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw std::domain_error("run_experiment: trials must be >= 1");
  if (!cfg.channel.is_lattice())
    throw std::domain_error(
        "run_experiment: simulation needs a lattice channel; design a quantizer for AWGN first");
  if (cfg.encoder == EncoderKind::both_verify)
    throw std::domain_error("run_experiment: use verify_equivalence for both-verify runs");
  const DiscreteBmsChannel& ch = cfg.channel.lattice();
  ch.validate();

  ChannelParams params = channel_params(ch);
  Refinements refs;
  if (cfg.refined_bounds) {
    refs.use_psi0 = true;
    auto l2 = remark2_log2_refinement(ch);
    if (l2.refined) refs.log2_term = l2.value;
  }

  std::vector<CurvePoint> points;
  for (int bits : cfg.bits) {
    if (bits < 1) throw std::domain_error("run_experiment: bits must be >= 1");
    if (cfg.encoder == EncoderKind::reference && bits > 16)
      throw std::domain_error("run_experiment: reference encoder is limited to bits <= 16");

    std::vector<std::int64_t> taus(cfg.trials);
    std::vector<std::uint8_t> errs(cfg.trials), cens(cfg.trials);

    auto run_one = [&](std::int64_t trial) {
      Rng rng = Rng::for_trial(cfg.base_seed, static_cast<std::uint64_t>(bits),
                               static_cast<std::uint64_t>(trial));
      CodecConfig cc = CodecConfig::for_bits(bits, cfg.epsilon, cfg.base_seed);
      cc.audit = cfg.audit;
      u128 w = draw_message(bits, rng);
      TrialRecord rec;
      if (cfg.encoder == EncoderKind::lattice) {
        rec = run_trial(ch, cc, w, rng, bits);
      } else {
        rec = run_reference_trial(ch, cc, static_cast<std::uint32_t>(w), rng, bits);
      }
      taus[trial] = rec.tau;
      errs[trial] = rec.error ? 1 : 0;
      cens[trial] = rec.censored ? 1 : 0;
    };

    int workers = std::max(1, cfg.workers);
    if (workers == 1) {
      for (std::int64_t t = 0; t < cfg.trials; ++t) run_one(t);
    } else {
      std::atomic<std::int64_t> next{0};
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int wk = 0; wk < workers; ++wk) {
        pool.emplace_back([&]() {
          while (true) {
            std::int64_t t = next.fetch_add(1);
            if (t >= cfg.trials) break;
            run_one(t);
          }
        });
      }
      for (auto& th : pool) th.join();
    }

    CurvePoint pt;
    pt.bits = bits;
    pt.trials = cfg.trials;
    double sum = 0.0, sum2 = 0.0;
    std::int64_t kept = 0, errors = 0;
    for (std::int64_t t = 0; t < cfg.trials; ++t) {
      if (cens[t]) {
        ++pt.censored;
        continue;
      }
      ++kept;
      sum += static_cast<double>(taus[t]);
      sum2 += static_cast<double>(taus[t]) * static_cast<double>(taus[t]);
      errors += errs[t];
    }
    if (pt.censored > cfg.trials / 1000)
      throw std::runtime_error("run_experiment: censoring rate exceeded 0.1%");
    if (kept == 0) throw std::runtime_error("run_experiment: all trials censored");
    pt.mean_tau = sum / kept;
    double var = kept > 1 ? (sum2 - sum * sum / kept) / (kept - 1) : 0.0;
    pt.ci_tau = 1.96 * std::sqrt(std::max(0.0, var) / kept);
    pt.err_rate = static_cast<double>(errors) / kept;
    pt.err_upper = clopper_pearson_upper(errors, kept);
    pt.rate_bits_per_use = bits / pt.mean_tau;
    pt.n0_bound = n0_bound(params, bits, cfg.epsilon, refs);
    pt.n_star_bound = optimize_stop_at_zero(params, bits, cfg.epsilon, refs).second;
    points.push_back(pt);
  }
  return points;
}

void write_curve_csv(std::ostream& os, const ExperimentConfig& cfg,
                     const std::vector<CurvePoint>& points) {
  // Worker count is deliberately omitted: identical configs must produce
  // identical bytes at any parallelism.
  nlohmann::json prov;
  prov["tool"] = std::string("vlf ") + kVersion;
  prov["channel"] = cfg.channel.is_lattice() ? to_spec_json(cfg.channel.lattice())
                                             : to_spec_json(cfg.channel.awgn());
  prov["bits"] = cfg.bits;
  prov["epsilon"] = cfg.epsilon;
  prov["trials"] = cfg.trials;
  prov["seed"] = cfg.base_seed;
  prov["encoder"] = cfg.encoder == EncoderKind::lattice ? "lattice" : "reference";
  prov["refined_bounds"] = cfg.refined_bounds;
  os << "# " << prov.dump() << "\n";
  os << "K,M,trials,mean_tau,ci_tau,err_rate,err_upper,rate_bits_per_use,n0_bound,n_star_bound,"
        "censored\n";
  for (const auto& p : points) {
    u128 m = static_cast<u128>(1) << p.bits;
    os << p.bits << ',' << u128_to_string(m) << ',' << p.trials << ',' << fmt17(p.mean_tau)
       << ',' << fmt17(p.ci_tau) << ',' << fmt17(p.err_rate) << ',' << fmt17(p.err_upper) << ','
       << fmt17(p.rate_bits_per_use) << ',' << fmt17(p.n0_bound) << ',' << fmt17(p.n_star_bound)
       << ',' << p.censored << '\n';
  }
}

std::string curve_csv_string(const ExperimentConfig& cfg, const std::vector<CurvePoint>& points) {
  std::ostringstream oss;
  write_curve_csv(oss, cfg, points);
  return oss.str();
}

EquivalenceReport verify_equivalence(const DiscreteBmsChannel& ch, int bits, double epsilon,
                                     std::int64_t trials, std::uint64_t base_seed,
                                     const RoundHook& hook) {
  if (bits > 16) throw std::domain_error("verify_equivalence: bits must be <= 16 (memory guard)");
  EquivalenceReport rep;
  rep.trials = trials;
  const std::uint32_t m_count = 1u << bits;

  bool diverged_this_trial = false;
  auto diverge = [&](std::int64_t trial, std::int64_t round, const std::string& what) {
    ++rep.divergences;
    diverged_this_trial = true;
    if (!rep.first) rep.first = DivergenceDetail{trial, round, what};
  };

  for (std::int64_t trial = 0; trial < trials; ++trial) {
    diverged_this_trial = false;
    Rng rng = Rng::for_trial(base_seed, static_cast<std::uint64_t>(bits),
                             static_cast<std::uint64_t>(trial));
    std::uint32_t w = static_cast<std::uint32_t>(draw_message(bits, rng));
    CodecConfig cc = CodecConfig::for_bits(bits, epsilon, base_seed);
    cc.audit = true;
    LatticeCodec enc(ch, m_count, cc);
    ReferenceCodec ref(ch, m_count, cc);
    std::int64_t cap = cc.max_rounds;

    while (true) {
      bool enc_stop = enc.stopped();
      bool ref_stop = ref.stopped();
      if (enc_stop != ref_stop) {
        diverge(trial, enc.round(), "stopping decision differs");
        break;
      }
      if (enc_stop) break;
      if (enc.round() >= cap) break;  // censored on both sides

      const PartitionOutcome& pe = enc.compute_partition();
      const PartitionOutcome& pr = ref.compute_partition();
      ++rep.rounds;

      if (pe.delta != pr.delta) {
        diverge(trial, enc.round(), "partition imbalance differs");
        break;
      }
      bool be = enc.message_in_plus(w);
      bool br = ref.message_in_plus(w);
      if (be != br) {
        diverge(trial, enc.round(), "true-message bin bit differs");
        break;
      }
      if (!sed_satisfied(enc.slots(), pe)) ++rep.sed_violations;
      if (hook) hook(trial, enc.round(), enc, ref);

      int n_t = sample_lattice(ch, be ? +1 : -1, rng);
      enc.observe(n_t);
      ref.observe(n_t);

      if (enc.group_count() > 1 + ch.tail_label * enc.round() ||
          enc.fragment_count() > 1 + 2 * enc.round())
        ++rep.structural_violations;
      double gap = std::abs(enc.max_posterior() - ref.max_posterior());
      rep.max_posterior_gap = std::max(rep.max_posterior_gap, gap);
      if (gap > 1e-9) {
        diverge(trial, enc.round(), "max posterior differs beyond 1e-9");
        break;
      }
    }
    if (diverged_this_trial) continue;

    bool censored = enc.round() >= cap && !enc.stopped();
    if (enc.round() != ref.round()) {
      diverge(trial, enc.round(), "stopping time differs");
    } else if (!censored && enc.decode() != static_cast<u128>(ref.decode())) {
      diverge(trial, enc.round(), "decoded message differs");
    }
  }
  return rep;
}

}  // namespace vlf
