#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "grid_oracle.hpp"
#include "rrdps/bound.hpp"
#include "rrdps/entropy.hpp"

using namespace rrdps;

namespace {

SimplexWeights weights(std::initializer_list<double> xs) {
  SimplexWeights w;
  w.x = xs;
  return w;
}

BoundResult bound_at(int L, int N, BoundMode mode,
                     std::optional<double> error = std::nullopt) {
  BoundQuery q;
  q.pulses_per_packet = L;
  q.photon_number = N;
  q.mode = mode;
  q.error_rate = error;
  return iae_bound(q);
}

// Independent 1-D scan for the single-photon unconstrained maximum.
double single_photon_scan(int L) {
  double best = 0.0;
  for (int k = 0; k <= 400000; ++k) {
    const double x1 = static_cast<double>(k) / 400000;
    best = std::max(best, phi_entropy((L - 1.0) * x1, 1.0 - x1) / (L - 1));
  }
  return best;
}

}  // namespace

TEST_CASE("leakage objective anchors") {
  CHECK(leakage_objective(3, weights({1.0, 0.0})) == 0.0);
  // phi(0.9, 0.55)/2, direct evaluation via integer logs
  CHECK(leakage_objective(3, weights({0.45, 0.55})) ==
        doctest::Approx(0.6942262756).epsilon(1e-9));
  // single-term collapse at the opposite corner, several L and N
  CHECK(leakage_objective(6, weights({0.0, 1.0})) == 0.0);
  CHECK(leakage_objective(6, weights({0.0, 0.0, 1.0})) == 0.0);
  CHECK(leakage_objective(6, weights({0.0, 0.0, 0.0, 1.0})) == 0.0);
}

TEST_CASE("leakage objective rejects dimension mismatch") {
  CHECK_THROWS_AS(
      leakage_objective(3, weights({0.2, 0.2, 0.2, 0.2, 0.2})),
      std::invalid_argument);
  CHECK_THROWS_AS(leakage_objective(2, weights({1.0})), std::invalid_argument);
  CHECK_THROWS_AS(error_rate_floor(3, 3, weights({0.5, 0.3, 0.1, 0.1})),
                  std::invalid_argument);
}

TEST_CASE("error rate floor anchors") {
  // N=1 closed form (L-2) x2 / (2(L-1))
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int L : {2, 3, 5, 9, 64}) {
    for (int rep = 0; rep < 50; ++rep) {
      const double x2 = uni(rng);
      const auto w = weights({1.0 - x2, x2});
      CHECK(error_rate_floor(L, 1, w) ==
            doctest::Approx((L - 2) * x2 / (2.0 * (L - 1))).epsilon(1e-13));
    }
  }
  CHECK(error_rate_floor(7, 1, weights({1.0, 0.0})) == 0.0);
  // even branch, direct evaluation: ((sqrt(4*0.2)-sqrt(0.5))^2 + 2*0.3/2)/4
  CHECK(error_rate_floor(5, 2, weights({0.2, 0.5, 0.3})) ==
        doctest::Approx(0.0837722339831620).epsilon(1e-12));
  // odd branch N=3: ((sqrt((L-2)x2)-sqrt(2x3))^2 + (L-4)x4/2)/(L-1)
  {
    const auto w = weights({0.1, 0.4, 0.3, 0.2});
    const double sa = std::sqrt(4 * 0.4), sb = std::sqrt(2 * 0.3);
    const double expect = ((sa - sb) * (sa - sb) + 2 * 0.2 / 2.0) / 5.0;
    CHECK(error_rate_floor(6, 3, w) == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("query validation") {
  BoundQuery q;
  q.pulses_per_packet = 3;
  q.photon_number = 4;
  q.mode = BoundMode::Unconstrained;
  CHECK_THROWS_AS(iae_bound(q), std::invalid_argument);
  q.photon_number = 1;
  q.error_rate = 0.1;  // error without constrained mode
  CHECK_THROWS_AS(iae_bound(q), std::invalid_argument);
  q.mode = BoundMode::Constrained;
  q.error_rate.reset();
  CHECK_THROWS_AS(iae_bound(q), std::invalid_argument);
  q.error_rate = 0.7;
  CHECK_THROWS_AS(iae_bound(q), std::invalid_argument);
}

TEST_CASE("unconstrained bound matches independent 1-D scan for N=1") {
  for (int L : {3, 5, 16}) {
    const double scan = single_photon_scan(L);
    const double solved = bound_at(L, 1, BoundMode::Unconstrained).iae;
    CHECK(solved == doctest::Approx(scan).epsilon(2e-6));
  }
  CHECK(std::abs(bound_at(3, 1, BoundMode::Unconstrained).iae - 0.6944) <=
        5e-4);
}

TEST_CASE("original bound closed form") {
  CHECK(bound_at(5, 1, BoundMode::Original).iae ==
        doctest::Approx(0.8112781244591328).epsilon(1e-12));
  CHECK(bound_at(3, 1, BoundMode::Original).iae == 1.0);  // ratio 1/2 clamps
  CHECK(bound_at(2, 1, BoundMode::Original).iae == 1.0);
  CHECK(bound_at(65, 10, BoundMode::Original).iae ==
        doctest::Approx(binary_entropy(10.0 / 64.0)).epsilon(1e-12));
}

TEST_CASE("constrained bound at E=0") {
  CHECK(bound_at(3, 1, BoundMode::Constrained, 0.0).iae <= 1e-9);
  // even N=2 at E=0 collapses to x = (1/L, (L-1)/L, 0): value 2/L
  for (int L : {4, 5, 8}) {
    CHECK(bound_at(L, 2, BoundMode::Constrained, 0.0).iae ==
          doctest::Approx(2.0 / L).epsilon(1e-7));
  }
}

TEST_CASE("constrained bound, single photon, matches closed-form cap") {
  // For N=1 the constraint is linear (x2 <= 2E(L-1)/(L-2)) and the objective
  // increases in x2 up to the unconstrained argmax.
  for (int L : {3, 5, 16}) {
    for (double E : {0.01, 0.03, 0.08, 0.2}) {
      double best = 0.0;
      const double cap = std::min(1.0, 2.0 * E * (L - 1) / (L - 2));
      for (int k = 0; k <= 200000; ++k) {
        const double x2 = cap * k / 200000;
        best = std::max(best,
                        phi_entropy((L - 1.0) * (1.0 - x2), x2) / (L - 1));
      }
      const double solved = bound_at(L, 1, BoundMode::Constrained, E).iae;
      CHECK(solved == doctest::Approx(best).epsilon(2e-6));
    }
  }
}

TEST_CASE("bound result self-consistency and argmax validity") {
  for (auto [L, N] : {std::pair{5, 2}, std::pair{8, 3}, std::pair{16, 4}}) {
    const auto res = bound_at(L, N, BoundMode::Unconstrained);
    CHECK(res.converged);
    res.argmax.validate();
    CHECK(leakage_objective(L, res.argmax) ==
          doctest::Approx(res.iae).epsilon(1e-9));
    const auto con = bound_at(L, N, BoundMode::Constrained, 0.05);
    con.argmax.validate();
    CHECK(leakage_objective(L, con.argmax) ==
          doctest::Approx(con.iae).epsilon(1e-9));
    CHECK(error_rate_floor(L, N, con.argmax) <= 0.05 + 1e-9);
  }
}

TEST_CASE("constrained bound is monotone in E and below unconstrained") {
  for (auto [L, N] : {std::pair{4, 1}, std::pair{6, 2}, std::pair{7, 3}}) {
    const double uncon = bound_at(L, N, BoundMode::Unconstrained).iae;
    double prev = -1.0;
    for (double E = 0.0; E <= 0.5 + 1e-9; E += 0.05) {
      const double value = bound_at(L, N, BoundMode::Constrained, E).iae;
      CHECK(value >= prev - 1e-9);
      CHECK(value <= uncon + 1e-9);
      prev = value;
    }
  }
}

TEST_CASE("constrained bound saturates once the floor of the argmax is met") {
  for (auto [L, N] : {std::pair{3, 1}, std::pair{6, 2}}) {
    const auto uncon = bound_at(L, N, BoundMode::Unconstrained);
    const double sat = error_rate_floor(L, N, uncon.argmax);
    if (sat <= 0.5) {
      const double at_sat =
          bound_at(L, N, BoundMode::Constrained, std::min(0.5, sat + 1e-6)).iae;
      CHECK(std::abs(at_sat - uncon.iae) <= 1e-6);
    }
  }
}

TEST_CASE("grid oracle equivalence on small cases") {
  // Full coverage (all L <= 8, N <= 3, E grid) runs in the acceptance suite;
  // spot-check here to keep the unit test fast.
  for (auto [L, N] : {std::pair{4, 1}, std::pair{5, 2}, std::pair{5, 3}}) {
    const auto uncon = rrdps_oracle::grid_max(L, N, std::nullopt, 400,
                                              Exec::Parallel);
    CHECK(std::abs(bound_at(L, N, BoundMode::Unconstrained).iae - uncon.value) <=
          2e-4);
    for (double E : {0.0, 0.05, 0.2}) {
      const auto oracle =
          rrdps_oracle::grid_max(L, N, E, 400, Exec::Parallel);
      const double solved = bound_at(L, N, BoundMode::Constrained, E).iae;
      CHECK(std::abs(solved - oracle.value) <= 2e-4);
    }
  }
}

TEST_CASE("tolerant error anchors") {
  CHECK(!tolerant_error_rate(3, 1, BoundMode::Original).has_value());
  const auto orig5 = tolerant_error_rate(5, 1, BoundMode::Original);
  REQUIRE(orig5.has_value());
  CHECK(*orig5 == doctest::Approx(0.0289).epsilon(0.0173));  // +-0.0005
  // independent route: h2^{-1}(1 - h2(1/4))
  CHECK(*orig5 ==
        doctest::Approx(binary_entropy_inverse(1.0 - binary_entropy(0.25)))
            .epsilon(1e-4));
  const auto uncon3 = tolerant_error_rate(3, 1, BoundMode::Unconstrained);
  REQUIRE(uncon3.has_value());
  CHECK(std::abs(*uncon3 - 0.0546) <= 5e-4);
  const auto con3 = tolerant_error_rate(3, 1, BoundMode::Constrained);
  REQUIRE(con3.has_value());
  CHECK(std::abs(*con3 - 0.0811) <= 5e-4);
  const auto con16 = tolerant_error_rate(16, 1, BoundMode::Constrained);
  REQUIRE(con16.has_value());
  CHECK(std::abs(*con16 - 0.252) <= 1e-3);
}

TEST_CASE("corollary on a reduced grid") {
  // The full L in [3,16] grid runs in the acceptance suite.
  for (int L : {3, 4, 8, 16}) {
    for (int N : {1, L - 2}) {
      CHECK(leakage_below_one(L, N));
    }
  }
  CHECK_THROWS_AS(leakage_below_one(4, 3), std::invalid_argument);
}

TEST_CASE("paper anchor: L=65 N=10 unconstrained bound") {
  CHECK(std::abs(bound_at(65, 10, BoundMode::Unconstrained).iae - 0.513) <=
        0.002);
}

TEST_CASE("serial and parallel optimizer agree exactly") {
  OptimizerOptions serial;
  serial.exec = Exec::Serial;
  OptimizerOptions parallel;
  parallel.exec = Exec::Parallel;
  BoundQuery q;
  q.pulses_per_packet = 8;
  q.photon_number = 3;
  q.mode = BoundMode::Constrained;
  q.error_rate = 0.07;
  CHECK(iae_bound(q, serial).iae == iae_bound(q, parallel).iae);
  q.mode = BoundMode::Unconstrained;
  q.error_rate.reset();
  CHECK(iae_bound(q, serial).iae == iae_bound(q, parallel).iae);
}
