#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nlohmann/json.hpp"
#include "vlf/channel.hpp"
#include "vlf/numerics.hpp"

using namespace vlf;

namespace {
constexpr double kLn2 = std::numbers::ln2;

double binary_entropy(double p) { return -p * std::log(p) - (1 - p) * std::log(1 - p); }

// Simpson oracle for the BI-AWGN capacity: C = D(P+ || P_Y).
double awgn_capacity_oracle(double sigma2) {
  double sigma = std::sqrt(sigma2);
  auto f = [&](double y) {
    double pp = norm_pdf((y - 1) / sigma) / sigma;
    double pm = norm_pdf((y + 1) / sigma) / sigma;
    double py = 0.5 * (pp + pm);
    return pp > 0 ? pp * std::log(pp / py) : 0.0;
  };
  double a = 1 - 45 * sigma, b = 1 + 45 * sigma;
  int n = 400000;
  double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}
}  // namespace

TEST_CASE("bsc_channel construction and domain errors") {
  auto ch = bsc_channel(0.11);
  CHECK(ch.delta == doctest::Approx(std::log(0.89 / 0.11)).epsilon(1e-15));
  CHECK(ch.prob_plus(+1) == doctest::Approx(0.89));
  CHECK(ch.prob_plus(-1) == doctest::Approx(0.11));
  CHECK(ch.prob_plus(0) == 0.0);
  ch.validate();
  CHECK_THROWS_AS(bsc_channel(0.0), std::domain_error);
  CHECK_THROWS_AS(bsc_channel(0.5), std::domain_error);
  CHECK_THROWS_AS(bsc_channel(0.7), std::domain_error);
}

TEST_CASE("bsc parameters match the closed forms") {
  double p = 0.11;
  auto params = channel_params(bsc_channel(p));
  double delta = std::log((1 - p) / p);
  CHECK(params.capacity == doctest::Approx(kLn2 - binary_entropy(p)).epsilon(1e-12));
  CHECK(params.kl_divergence == doctest::Approx((1 - 2 * p) * delta).epsilon(1e-12));
  CHECK(params.bhattacharyya == doctest::Approx(2 * std::sqrt(p * (1 - p))).epsilon(1e-12));
  CHECK(params.bhattacharyya == doctest::Approx(0.625780).epsilon(1e-5));
  CHECK(params.ruin_chi ==
        doctest::Approx(1 - std::sqrt(1 - 2 * std::sqrt(p * (1 - p)))).epsilon(1e-12));
  CHECK(params.eta == doctest::Approx(delta).epsilon(1e-12));
  CHECK(params.eta0_minus == doctest::Approx(delta).epsilon(1e-12));
  CHECK(params.eta0_plus == doctest::Approx(delta).epsilon(1e-12));
  CHECK(params.psi0 == doctest::Approx(p / (1 - p)).epsilon(1e-12));
  CHECK(params.psi0_source == Psi0Source::analytic);
  CHECK(params.psi0 <= params.ruin_chi);
  CHECK(params.kl_divergence > params.capacity);
}

TEST_CASE("bsc limit p -> 1/2 degrades to zero capacity") {
  auto params = channel_params(bsc_channel(0.499999));
  CHECK(params.capacity < 1e-9);
  CHECK(params.capacity > 0.0);
  auto ch = bsc_channel(0.499999);
  CHECK(ch.delta < 1e-5);
}

TEST_CASE("awgn parameters: closed forms and quadrature cross-check") {
  AwgnChannel ch{1.0};
  auto params = channel_params(ch);
  CHECK(params.kl_divergence == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(params.bhattacharyya == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  // Independent Simpson integral of D(P+ || P_Y).
  CHECK(params.capacity == doctest::Approx(awgn_capacity_oracle(1.0)).epsilon(1e-8));
  // Remark-3 expressions for the mean-excess parameters.
  double sigma = 1.0, mu = 2.0, s = 2.0;
  CHECK(params.eta0_plus ==
        doctest::Approx(mu + s * norm_pdf(1 / sigma) / norm_cdf(1 / sigma)).epsilon(1e-12));
  CHECK(params.eta0_minus ==
        doctest::Approx(-mu + s * norm_pdf(1 / sigma) / norm_cdf(-1 / sigma)).epsilon(1e-12));
  CHECK(params.eta <= params.eta0_plus + 1e-15);
  CHECK(params.psi0_source == Psi0Source::spitzer);
  CHECK(params.psi0 <= params.ruin_chi);
  CHECK_THROWS_AS(channel_params(AwgnChannel{0.0}), std::domain_error);
}

TEST_CASE("awgn capacity decreases in noise power") {
  double prev = 1e9;
  for (double s2 : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    double c = channel_params(AwgnChannel{s2}).capacity;
    CHECK(c < prev);
    CHECK(c > 0.0);
    prev = c;
  }
}

TEST_CASE("overshoot parameter is the minimum of three valid bounds") {
  auto ch = bsc_channel(0.2);
  auto params = channel_params(ch);
  double delta = ch.delta;
  double p = 0.2;
  double lorden = delta * (1 - p) / (1 - 2 * p);
  double mogulskii = 3 * delta;
  CHECK(params.eta <= lorden + 1e-15);
  CHECK(params.eta <= mogulskii + 1e-15);
  CHECK(params.eta <= params.eta0_plus + 1e-15);
  CHECK(params.eta == doctest::Approx(std::min({lorden, mogulskii, params.eta0_plus})));
}

TEST_CASE("mean excess suprema on a hand-computed discrete law") {
  // X in {-2, 1, 3} with probs {0.2, 0.5, 0.3}.
  std::vector<std::pair<double, double>> dist{{-2, 0.2}, {1, 0.5}, {3, 0.3}};
  // x=0: E[X|X>=0] = (0.5 + 0.9)/0.8 = 1.75; x=1: 0.75 (weak), strict: 2
  // (only {3} remains -> 3-1=2); x=3: 0. Supremum = 2 at x = 1+.
  CHECK(mean_excess_sup_pos(dist) == doctest::Approx(2.0).epsilon(1e-12));
  // Mirror: -X in {2, -1, -3}; sup_x E[-X - x | X < -x]: x=0 -> 2, x=2
  // (strict) -> 0. Supremum = 2.
  CHECK(mean_excess_sup_neg(dist) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lattice sampling matches the symbol law") {
  auto ch = bsc_channel(0.11);
  SUBCASE("exhaustive unit mass for input +") {
    int hits = 0;
    for (double u : {0.0, 0.05, 0.10999, 0.111, 0.5, 0.99999}) {
      int k = sample_lattice_u(ch, +1, u);
      CHECK((k == -1 || k == 1));
      if (k == 1) ++hits;
    }
    CHECK(hits == 3);  // u >= 0.11 lands on +1 via the CDF order (-1, 0, +1)
  }
  SUBCASE("empirical frequencies under input - within 4 sigma") {
    Rng rng(42);
    int n = 1000000;
    int plus = 0;
    for (int i = 0; i < n; ++i)
      if (sample_lattice(ch, -1, rng) == +1) ++plus;
    double expect = 0.11;  // mu+(-k) mirrored
    double sd = std::sqrt(expect * (1 - expect) * n);
    CHECK(std::abs(plus - expect * n) < 4 * sd);
  }
}

TEST_CASE("awgn sampling has the right mean") {
  AwgnChannel ch{1.0};
  Rng rng(7);
  int n = 1000000;
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += sample_awgn(ch, +1, rng);
  CHECK(std::abs(sum / n - 1.0) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("channel spec json round-trips exactly") {
  auto ch = bsc_channel(0.11);
  auto j = to_spec_json(ch);
  auto spec = channel_from_spec_json(j);
  REQUIRE(spec.is_lattice());
  CHECK(spec.lattice().delta == ch.delta);
  CHECK(spec.lattice().prob_plus(1) == ch.prob_plus(1));

  nlohmann::json jb{{"kind", "bsc"}, {"p", 0.11}};
  auto sb = channel_from_spec_json(jb);
  CHECK(sb.lattice().delta == ch.delta);

  nlohmann::json ja{{"kind", "awgn"}, {"sigma2", 1.0}};
  auto sa = channel_from_spec_json(ja);
  CHECK(!sa.is_lattice());
  CHECK(sa.awgn().sigma2 == 1.0);

  CHECK_THROWS(channel_from_spec_json(nlohmann::json{{"kind", "bec"}}));
}

TEST_CASE("validate rejects broken lattices") {
  auto ch = bsc_channel(0.11);
  auto bad = ch;
  bad.probs_plus[0].second = 0.2;  // breaks both sum and mirror symmetry
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = ch;
  bad.tail_label = 0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}
