#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>

#include "etcnet/bandwidth.hpp"
#include "etcnet/rng.hpp"

using namespace etcnet;

TEST_SUITE("bandwidth") {

// Reference values computed with a 30-digit evaluation of ln(2 pi e s^2).
TEST_CASE("gaussian entropy bound") {
  CHECK(gaussian_entropy_bound(1.0 / (2.0 * std::numbers::pi * std::numbers::e)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gaussian_entropy_bound(0.69) == doctest::Approx(2.46681338501851350).epsilon(1e-12));
  CHECK(gaussian_entropy_bound(0.330) == doctest::Approx(1.72921444188773435).epsilon(1e-12));
  CHECK_THROWS_AS(gaussian_entropy_bound(0.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_entropy_bound(-1.0), std::invalid_argument);
}

TEST_CASE("sending probability bound reproduces the published configurations") {
  // 2 agents, B=170 bit/s, K=2, L=6, F=45 Hz, sigma^2=0.69: "about 50%".
  const double p1 = sending_probability_bound(170, 2, 6, 45, 2, 0.69);
  CHECK(p1 == doctest::Approx(0.51048014694058768).epsilon(1e-12));
  CHECK(p1 >= 0.49);
  CHECK(p1 <= 0.52);
  // 3 agents, B=580 bit/s, K=2, L=15, F=45 Hz, sigma^2=0.330: "about 33.3%".
  const double p2 = sending_probability_bound(580, 2, 15, 45, 3, 0.330);
  CHECK(p2 == doctest::Approx(0.33127152555323727).epsilon(1e-12));
  CHECK(p2 >= 0.325);
  CHECK(p2 <= 0.34);
}

TEST_CASE("huge bandwidth clips to one") {
  CHECK(sending_probability_bound(1e12, 2, 6, 45, 2, 0.69) == 1.0);
}

TEST_CASE("degenerate entropy bound clips to one") {
  const double tiny = 0.5 / (2.0 * std::numbers::pi * std::numbers::e);
  CHECK(sending_probability_bound(170, 2, 6, 45, 2, tiny) == 1.0);
}

TEST_CASE("penalty threshold") {
  CHECK(penalty_threshold(0.5, 0.95) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(penalty_threshold(0.0, 0.95) == 0.0);
  CHECK(penalty_threshold(1.0, 0.9) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(penalty_threshold(0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(penalty_threshold(1.5, 0.9), std::invalid_argument);
}

TEST_CASE("penalty threshold inverts exactly") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform();
    const double gamma = rng.uniform() * 0.999;
    CHECK(penalty_threshold(p, gamma) * (1.0 - gamma) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("p_sup is monotone in every budget input") {
  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const double b = rng.uniform(5.0, 400.0);
    const int k = 2 + rng.uniform_int(6);
    const int l = 1 + rng.uniform_int(20);
    const double f = rng.uniform(1.0, 60.0);
    const int n = 2 + rng.uniform_int(3);
    const double s2 = rng.uniform(0.2, 3.0);
    const double p = sending_probability_bound(b, k, l, f, n, s2);
    if (p <= 0.0 || p >= 1.0) continue;  // clipped regions are flat
    CHECK(sending_probability_bound(b * 1.1, k, l, f, n, s2) >= p);
    CHECK(sending_probability_bound(b, k, l + 1, f, n, s2) <= p);
    CHECK(sending_probability_bound(b, k, l, f * 1.1, n, s2) <= p);
    CHECK(sending_probability_bound(b, k, l, f, n + 1, s2) <= p);
    CHECK(sending_probability_bound(b, k, l, f, n, s2 * 1.1) <= p);
  }
}

TEST_CASE("variance estimator") {
  VarianceEstimator est(100, 1.0);

  SUBCASE("fewer than two components keeps the previous estimate") {
    CHECK(est.update(std::vector<double>{3.0}) == 1.0);
  }
  SUBCASE("identical components give zero variance") {
    CHECK(est.update(std::vector<double>(10, 2.5)) == doctest::Approx(0.0));
  }
  SUBCASE("alternating plus/minus one gives unit variance") {
    std::vector<double> comps;
    for (int i = 0; i < 50; ++i) comps.push_back(i % 2 ? 1.0 : -1.0);
    CHECK(est.update(comps) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("window eviction tracks a new distribution") {
    std::vector<double> wide;
    for (int i = 0; i < 100; ++i) wide.push_back(i % 2 ? 10.0 : -10.0);
    est.update(wide);
    CHECK(est.sigma2() == doctest::Approx(100.0).epsilon(1e-9));
    std::vector<double> narrow;
    for (int i = 0; i < 100; ++i) narrow.push_back(i % 2 ? 0.5 : -0.5);
    est.update(narrow);  // fills the whole window
    CHECK(est.sigma2() == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(est.window_size() == 100);
  }
}

TEST_CASE("channel stats") {
  const BandwidthBudget budget = derive_budget(170, 2, 6, 45, 2, 0.69, 0.95);

  SUBCASE("all gates open") {
    const ChannelStats s = channel_stats(2 * 1000, 1000, budget);
    CHECK(s.p_hat == doctest::Approx(1.0));
    CHECK(s.symbol_rate == doctest::Approx(2 * 1 * 6 * 45.0));
  }
  SUBCASE("no gates open") {
    const ChannelStats s = channel_stats(0, 1000, budget);
    CHECK(s.p_hat == 0.0);
    CHECK(s.symbol_rate == 0.0);
    CHECK(s.within_budget);
  }
  SUBCASE("46 percent gating") {
    const ChannelStats s = channel_stats(920, 1000, budget);  // 920/(2*1000) = 0.46
    CHECK(s.p_hat == doctest::Approx(0.46));
    CHECK(s.symbol_rate == doctest::Approx(248.4));
    CHECK(s.within_budget);  // n_max ~ 275.7 symbols/s
  }
  SUBCASE("rejects zero steps") { CHECK_THROWS_AS(channel_stats(0, 0, budget), std::invalid_argument); }
}

TEST_CASE("discounted penalty of an always-open trace") {
  const double gamma = 0.95;
  for (const int T : {1, 10, 100}) {
    double discounted = 0.0;
    for (int t = 0; t < T; ++t) discounted += std::pow(gamma, t);
    CHECK(discounted == doctest::Approx((1.0 - std::pow(gamma, T)) / (1.0 - gamma)).epsilon(1e-12));
    CHECK(discounted <= 1.0 / (1.0 - gamma) + 1e-12);
  }
}

TEST_CASE("derive_budget fills the dependent fields consistently") {
  const BandwidthBudget b = derive_budget(170, 2, 6, 45, 2, 0.69, 0.95);
  CHECK(b.c_sup == doctest::Approx(b.p_sup / 0.05).epsilon(1e-12));
  CHECK(b.entropy_bound == doctest::Approx(gaussian_entropy_bound(0.69)));
  CHECK(b.n_max == doctest::Approx(4.0 * 170 / b.entropy_bound));
}

}  // TEST_SUITE
