#include "vlf/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "vlf/bounds.hpp"
#include "vlf/numerics.hpp"

namespace vlf {

namespace {
constexpr double kLn2 = std::numbers::ln2;
}  // namespace

const char* to_string(Psi0Source s) {
  switch (s) {
    case Psi0Source::analytic: return "analytic";
    case Psi0Source::spitzer: return "spitzer";
    case Psi0Source::chi_surrogate: return "chi-surrogate";
  }
  return "?";
}

double DiscreteBmsChannel::prob_plus(int k) const {
  for (const auto& [label, p] : probs_plus)
    if (label == k) return p;
  return 0.0;
}

void DiscreteBmsChannel::validate() const {
  if (delta <= 0) throw std::domain_error("lattice channel: delta must be positive");
  if (interior_half_range < 1) throw std::domain_error("lattice channel: L must be >= 1");
  if (tail_label < interior_half_range)
    throw std::domain_error("lattice channel: L_tail must be >= L");

  // Key set must be exactly K_B = {0, +-1, ..., +-(L-1), +-L_tail}.
  std::vector<int> expected;
  expected.push_back(-tail_label);
  for (int k = -(interior_half_range - 1); k <= interior_half_range - 1; ++k)
    expected.push_back(k);
  expected.push_back(tail_label);
  if (probs_plus.size() != expected.size())
    throw std::domain_error("lattice channel: symbol count does not match B = 2L+1");
  for (size_t i = 0; i < expected.size(); ++i) {
    if (probs_plus[i].first != expected[i])
      throw std::domain_error("lattice channel: labels do not match the lattice key set");
  }

  double sum = 0.0;
  for (const auto& [k, p] : probs_plus) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("lattice channel: probability out of range");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::domain_error("lattice channel: probabilities do not sum to 1");

  for (const auto& [k, p] : probs_plus) {
    if (k <= 0) continue;
    double mirrored = prob_plus(-k);
    if (std::abs(mirrored - p * std::exp(-k * delta)) > 1e-10)
      throw std::domain_error("lattice channel: mirror consistency mu+(-k) = mu+(k) e^{-k delta} fails");
  }
}

DiscreteBmsChannel bsc_channel(double p) {
  if (!(p > 0.0 && p < 0.5)) throw std::domain_error("bsc_channel: p must lie in (0, 1/2)");
  DiscreteBmsChannel ch;
  ch.delta = std::log((1.0 - p) / p);
  ch.interior_half_range = 1;
  ch.tail_label = 1;
  ch.probs_plus = {{-1, p}, {0, 0.0}, {+1, 1.0 - p}};
  return ch;
}

double mean_excess_sup_pos(std::span<const std::pair<double, double>> dist) {
  auto excess_at = [&](double x, bool strict) {
    double num = 0.0, den = 0.0;
    for (const auto& [v, p] : dist) {
      bool in = strict ? (v > x) : (v >= x);
      if (in) {
        num += (v - x) * p;
        den += p;
      }
    }
    return den > 0.0 ? num / den : -std::numeric_limits<double>::infinity();
  };
  double best = excess_at(0.0, false);
  for (const auto& [v, p] : dist) {
    if (v < 0.0) continue;
    best = std::max(best, excess_at(v, false));
    best = std::max(best, excess_at(v, true));
  }
  return best;
}

double mean_excess_sup_neg(std::span<const std::pair<double, double>> dist) {
  // sup_{x>=0} E[-(X+x) | X < -x]; mirror of the positive case applied to -X,
  // with strict exceedance matching the strict inequality in the definition.
  std::vector<std::pair<double, double>> mirrored(dist.begin(), dist.end());
  for (auto& [v, p] : mirrored) v = -v;
  auto excess_at = [&](double x, bool strict) {
    double num = 0.0, den = 0.0;
    for (const auto& [v, p] : mirrored) {
      bool in = strict ? (v > x) : (v >= x);
      if (in) {
        num += (v - x) * p;
        den += p;
      }
    }
    return den > 0.0 ? num / den : -std::numeric_limits<double>::infinity();
  };
  double best = excess_at(0.0, true);
  for (const auto& [v, p] : mirrored) {
    if (v <= 0.0) continue;
    best = std::max(best, excess_at(v, true));
    best = std::max(best, excess_at(v, false));
  }
  return best;
}

namespace {

ChannelParams discrete_params(const DiscreteBmsChannel& ch) {
  ch.validate();
  ChannelParams out;
  std::vector<std::pair<double, double>> llr_dist;  // (value, prob) of Lambda under P+
  double c = 0.0, c1 = 0.0, z = 0.0;
  for (const auto& [k, p] : ch.probs_plus) {
    double lam = k * ch.delta;
    c += p * bms_g(lam);
    c1 += p * lam;
    z += p * std::exp(-0.5 * lam);
    if (p > 0.0) llr_dist.push_back({lam, p});
  }
  out.capacity = c;
  out.kl_divergence = c1;
  out.bhattacharyya = z;
  if (!(z > 0.0 && z < 1.0))
    throw std::domain_error("channel_params: degenerate channel (Z outside (0,1))");
  if (!(c > 0.0 && c1 > c))
    throw std::domain_error("channel_params: requires C1 > C > 0 (non-trivial channel)");
  out.ruin_chi = 1.0 - std::sqrt(1.0 - z);

  out.eta0_plus = mean_excess_sup_pos(llr_dist);
  out.eta0_minus = mean_excess_sup_neg(llr_dist);
  double e_x = c1, e_x2 = 0.0, e_abs3 = 0.0, e_pos2 = 0.0;
  for (const auto& [v, p] : llr_dist) {
    e_x2 += p * v * v;
    e_abs3 += p * std::abs(v) * v * v;
    if (v > 0.0) e_pos2 += p * v * v;
  }
  out.eta = std::min({e_pos2 / e_x, 3.0 * e_abs3 / e_x2, out.eta0_plus});

  // Two-point lattice is a scaled simple random walk: classical gambler's ruin
  // gives psi(0) = q/(1-q) exactly.
  std::vector<std::pair<double, double>> support;
  for (const auto& [k, p] : ch.probs_plus)
    if (p > 0.0) support.push_back({static_cast<double>(k), p});
  if (support.size() == 2 && support[0].first == -support[1].first) {
    out.psi0 = support[0].second / support[1].second;
    out.psi0_source = Psi0Source::analytic;
  } else {
    SpitzerResult sr = spitzer_psi0(lattice_pn_provider(ch), z);
    if (sr.certified || sr.tail_bound < 1e-8) {
      out.psi0 = sr.psi0;
      out.psi0_source = Psi0Source::spitzer;
    } else {
      out.psi0 = out.ruin_chi;
      out.psi0_source = Psi0Source::chi_surrogate;
    }
  }
  return out;
}

ChannelParams awgn_params(const AwgnChannel& ch) {
  if (!(ch.sigma2 > 0.0) || !std::isfinite(ch.sigma2))
    throw std::domain_error("channel_params: sigma2 must be positive and finite");
  ChannelParams out;
  const double s2 = ch.sigma2;
  const double sigma = std::sqrt(s2);
  const double mu = 2.0 / s2;   // E[Lambda]
  const double sd = 2.0 / sigma;  // sd of Lambda

  out.capacity =
      kLn2 - gh_expect_adaptive([&](double g) {
        double lam = mu + sd * g;
        return lam > 0 ? std::log1p(std::exp(-lam)) : -lam + std::log1p(std::exp(lam));
      });
  out.kl_divergence = mu;
  out.bhattacharyya = std::exp(-1.0 / (2.0 * s2));
  out.ruin_chi = 1.0 - std::sqrt(1.0 - out.bhattacharyya);

  // Gaussian mean residual life is decreasing, so both mean-excess suprema are
  // attained at x = 0 and reduce to truncated-normal moments.
  double inv_sigma = 1.0 / sigma;
  out.eta0_plus = mu + sd * norm_pdf(inv_sigma) / norm_cdf(inv_sigma);
  out.eta0_minus = -mu + sd * norm_pdf(inv_sigma) / norm_cdf(-inv_sigma);

  double e_pos2 = (mu * mu + sd * sd) * norm_cdf(mu / sd) + mu * sd * norm_pdf(mu / sd);
  double e_x2 = mu * mu + sd * sd;
  double e_abs3 = gh_expect_adaptive([&](double g) {
    double lam = mu + sd * g;
    return std::abs(lam) * lam * lam;
  });
  out.eta = std::min({e_pos2 / mu, 3.0 * e_abs3 / e_x2, out.eta0_plus});

  SpitzerResult sr = spitzer_psi0(awgn_pn_provider(s2), out.bhattacharyya);
  if (sr.certified || sr.tail_bound < 1e-8) {
    out.psi0 = sr.psi0;
    out.psi0_source = Psi0Source::spitzer;
  } else {
    out.psi0 = out.ruin_chi;
    out.psi0_source = Psi0Source::chi_surrogate;
  }
  return out;
}

}  // namespace

ChannelParams channel_params(const DiscreteBmsChannel& ch) { return discrete_params(ch); }
ChannelParams channel_params(const AwgnChannel& ch) { return awgn_params(ch); }

ChannelParams channel_params(const ChannelSpec& spec) {
  if (spec.is_lattice()) return channel_params(spec.lattice());
  return channel_params(spec.awgn());
}

int sample_lattice_u(const DiscreteBmsChannel& ch, int input, double u01) {
  // Inverse CDF under P+; BMS symmetry maps an input-minus draw to the
  // mirrored label.
  double cum = 0.0;
  int drawn = ch.probs_plus.back().first;
  for (const auto& [k, p] : ch.probs_plus) {
    cum += p;
    if (u01 < cum) {
      drawn = k;
      break;
    }
  }
  return input > 0 ? drawn : -drawn;
}

int sample_lattice(const DiscreteBmsChannel& ch, int input, Rng& rng) {
  return sample_lattice_u(ch, input, rng.next_unit());
}

double sample_awgn(const AwgnChannel& ch, int input, Rng& rng) {
  return (input > 0 ? 1.0 : -1.0) + std::sqrt(ch.sigma2) * rng.next_normal();
}

nlohmann::json to_spec_json(const DiscreteBmsChannel& ch) {
  nlohmann::json j;
  j["kind"] = "lattice";
  j["delta"] = ch.delta;
  j["L"] = ch.interior_half_range;
  j["L_tail"] = ch.tail_label;
  nlohmann::json probs = nlohmann::json::array();
  for (const auto& [k, p] : ch.probs_plus) probs.push_back({k, p});
  j["probs_plus"] = probs;
  return j;
}

nlohmann::json to_spec_json(const AwgnChannel& ch) {
  return nlohmann::json{{"kind", "awgn"}, {"sigma2", ch.sigma2}};
}

ChannelSpec channel_from_spec_json(const nlohmann::json& j) {
  ChannelSpec spec;
  std::string kind = j.at("kind").get<std::string>();
  spec.kind = kind;
  if (kind == "bsc") {
    spec.channel = bsc_channel(j.at("p").get<double>());
  } else if (kind == "awgn") {
    AwgnChannel ch{j.at("sigma2").get<double>()};
    if (!(ch.sigma2 > 0.0)) throw std::domain_error("awgn spec: sigma2 must be positive");
    spec.channel = ch;
  } else if (kind == "lattice") {
    DiscreteBmsChannel ch;
    ch.delta = j.at("delta").get<double>();
    ch.interior_half_range = j.at("L").get<int>();
    ch.tail_label = j.at("L_tail").get<int>();
    for (const auto& item : j.at("probs_plus"))
      ch.probs_plus.push_back({item.at(0).get<int>(), item.at(1).get<double>()});
    std::sort(ch.probs_plus.begin(), ch.probs_plus.end());
    ch.validate();
    spec.channel = ch;
  } else {
    throw std::domain_error("channel spec: unknown kind '" + kind + "'");
  }
  return spec;
}

ChannelSpec load_channel_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open channel spec: " + path);
  nlohmann::json j;
  in >> j;
  return channel_from_spec_json(j);
}

}  // namespace vlf
