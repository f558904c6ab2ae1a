#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "rrdps/entropy.hpp"
#include "rrdps/rates.hpp"

using namespace rrdps;

namespace {

ChannelModel channel(double loss_db, double dark, double emis) {
  ChannelModel ch;
  ch.loss_db = loss_db;
  ch.dark_rate = dark;
  ch.misalignment = emis;
  return ch;
}

ProtocolConfig config(int L, double mu, int nu = 1, double f = 1.0) {
  ProtocolConfig cfg;
  cfg.pulses_per_packet = L;
  cfg.mu = mu;
  cfg.nu_th = nu;
  cfg.ec_efficiency = f;
  return cfg;
}

// Second implementation of the gain/error sums in extended precision.
std::pair<double, double> gain_error_oracle(int L, double eta, double mu,
                                            double d, double emis) {
  long double gain = 0.0L, err = 0.0L;
  for (int r = 1; r <= L - 1; ++r) {
    const long double w = L - r;
    const long double surv = std::pow(1.0L - static_cast<long double>(d),
                                      2.0L * w - 1.0L);
    const long double atten = std::exp(-w * static_cast<long double>(eta) * mu);
    gain += surv * atten * (w * eta * mu + 2.0L * w * d);
    err += surv * atten * (w * eta * mu * emis + w * d);
  }
  return {static_cast<double>(gain / (L - 1)),
          static_cast<double>(err / gain)};
}

// Second implementation of the monitored i-photon yield sums.
std::pair<double, double> yield_oracle(int L, double eta, double d,
                                       double emis, int photons) {
  long double ysum = 0.0L, esum = 0.0L;
  for (int r = 1; r <= L - 1; ++r) {
    const long double w = L - r;
    const long double q = w * static_cast<long double>(eta) / L;
    const long double surv = std::pow(1.0L - static_cast<long double>(d),
                                      2.0L * w - 1.0L);
    const long double keep = std::pow(1.0L - q, photons - 1.0L);
    ysum += keep * surv * (photons * q + (1.0L - q) * 2.0L * w * d);
    esum += keep * surv * (photons * q * emis + (1.0L - q) * w * d);
  }
  return {static_cast<double>(ysum / (L - 1)),
          static_cast<double>(esum / ysum)};
}

}  // namespace

TEST_CASE("delay counting rate anchors") {
  // single-window case: e^{-0.1} * 0.1
  CHECK(delay_counting_rate(channel(0.0, 0.0, 0.0), config(3, 0.1), 2) ==
        doctest::Approx(0.090483741803596).epsilon(1e-12));
  // no photons, no dark counts
  CHECK(delay_counting_rate(channel(300.0, 0.0, 0.0), config(3, 1e-4), 1) <=
        1e-25);
  // dark-count-only limit: (1-d)^{2w-1} * 2 w d ~ 2 w d
  {
    ChannelModel ch = channel(0.0, 1e-6, 0.0);
    ProtocolConfig cfg = config(5, 1e-300);
    for (int r = 1; r <= 4; ++r) {
      const int w = 5 - r;
      CHECK(delay_counting_rate(ch, cfg, r) ==
            doctest::Approx(2.0 * w * 1e-6).epsilon(1e-4));
    }
  }
  CHECK_THROWS_AS(delay_counting_rate(channel(0, 0, 0), config(3, 0.1), 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(delay_counting_rate(channel(0, 0, 0), config(3, 0.1), 0),
                  std::invalid_argument);
}

TEST_CASE("gain and error without monitoring") {
  // no error sources
  {
    const auto ge = packet_gain_error(channel(10.0, 0.0, 0.0), config(8, 0.2));
    REQUIRE(ge.error.has_value());
    CHECK(*ge.error == 0.0);
  }
  // d = 0 makes E equal the misalignment exactly
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> loss(0.0, 40.0);
  std::uniform_real_distribution<double> emis(0.0, 0.4);
  for (int rep = 0; rep < 50; ++rep) {
    const double e = emis(rng);
    const auto ge =
        packet_gain_error(channel(loss(rng), 0.0, e), config(16, 0.07));
    REQUIRE(ge.error.has_value());
    CHECK(*ge.error == doctest::Approx(e).epsilon(1e-14));
  }
  // extended-precision re-derivation as oracle, frozen reference point
  {
    const auto ge = packet_gain_error(channel(20.0, 1e-6, 0.015),
                                      config(16, 0.05));
    const auto [q, e] = gain_error_oracle(16, std::pow(10.0, -2.0), 0.05,
                                          1e-6, 0.015);
    REQUIRE(ge.error.has_value());
    CHECK(ge.gain == doctest::Approx(q).epsilon(1e-13));
    CHECK(*ge.error == doctest::Approx(e).epsilon(1e-13));
    CHECK(ge.gain == doctest::Approx(3.9952322617905697e-03).epsilon(1e-12));
    CHECK(*ge.error == doctest::Approx(1.6932270916334667e-02).epsilon(1e-12));
  }
  for (int rep = 0; rep < 30; ++rep) {
    const double lo = loss(rng);
    const double em = emis(rng);
    const auto ge = packet_gain_error(channel(lo, 2e-6, em), config(12, 0.09));
    const auto [q, e] =
        gain_error_oracle(12, std::pow(10.0, -lo / 10.0), 0.09, 2e-6, em);
    CHECK(ge.gain == doctest::Approx(q).epsilon(1e-12));
    CHECK(*ge.error == doctest::Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("monitored yields") {
  // i = 1, d = 0 collapses to Y_1 = eta/2
  for (double loss_db : {0.0, 13.0, 31.0}) {
    const auto ye = photon_number_yield(channel(loss_db, 0.0, 0.0), 9, 1);
    const double eta = std::pow(10.0, -loss_db / 10.0);
    CHECK(ye.yield == doctest::Approx(eta / 2.0).epsilon(1e-13));
    REQUIRE(ye.error.has_value());
    CHECK(*ye.error == 0.0);
  }
  // extended-precision oracle at the reference point
  {
    const auto ye = photon_number_yield(channel(20.0, 1e-6, 0.015), 16, 2);
    const auto [y, e] = yield_oracle(16, 0.01, 1e-6, 0.015, 2);
    CHECK(ye.yield == doctest::Approx(y).epsilon(1e-12));
    REQUIRE(ye.error.has_value());
    CHECK(*ye.error == doctest::Approx(e).epsilon(1e-12));
    CHECK(ye.yield == doctest::Approx(9.9510152107457391e-03).epsilon(1e-12));
    CHECK(*ye.error == doctest::Approx(1.5769768698151301e-02).epsilon(1e-12));
  }
  // Poisson mixture over i reproduces the packet gain (model consistency)
  for (double mu : {0.02, 0.2}) {
    const ChannelModel ch = channel(12.0, 1e-6, 0.015);
    const int L = 8;
    const double lambda = L * mu;
    long double q_mix = 0.0L;
    double term = std::exp(-lambda);
    for (int i = 0; i < 200; ++i) {
      if (i > 0) term *= lambda / i;
      q_mix += term * photon_number_yield(ch, L, i).yield;
    }
    const auto ge = packet_gain_error(ch, config(L, mu));
    CHECK(static_cast<double>(q_mix) ==
          doctest::Approx(ge.gain).epsilon(1e-12));
  }
}

TEST_CASE("unmonitored key rate limits") {
  const ThresholdLeakage zero = [](int, int) { return 0.0; };
  const ThresholdLeakage full = [](int, int) { return 1.0; };
  // total leakage kills the rate
  {
    const auto pt = key_rate_unmonitored(channel(10.0, 1e-6, 0.02),
                                         config(8, 0.1, 3), full, false);
    CHECK(pt.key_rate == 0.0);
    CHECK(pt.clamped);
  }
  // effectively no detections at absurd loss
  {
    const auto pt = key_rate_unmonitored(channel(200.0, 0.0, 0.0),
                                         config(8, 1e-4, 3), zero, false);
    CHECK(pt.key_rate == 0.0);
  }
  // leakage-free, error-free: RL = Q - e_src
  {
    const auto pt = key_rate_unmonitored(channel(5.0, 0.0, 0.0),
                                         config(6, 0.05, 4), zero, false);
    const auto ge = packet_gain_error(channel(5.0, 0.0, 0.0), config(6, 0.05));
    CHECK(pt.key_rate <= ge.gain / 6.0);
    CHECK(pt.key_rate > 0.0);
  }
}

TEST_CASE("proposed bound dominates original at the leakage level") {
  const auto proposed = make_threshold_leakage(BoundMode::Unconstrained);
  const auto original = make_threshold_leakage(BoundMode::Original);
  for (int L : {8, 16, 32}) {
    for (int N = 1; N <= (L - 1) / 2; ++N) {
      CHECK(proposed(L, N) <= original(L, N) + 1e-9);
    }
  }
}

TEST_CASE("optimized proposed rate dominates optimized original rate") {
  const auto proposed = make_threshold_leakage(BoundMode::Unconstrained);
  const auto original = make_threshold_leakage(BoundMode::Original);
  const ChannelModel ch = channel(30.0, 1e-6, 0.015);
  const auto rp = key_rate_unmonitored(ch, config(32, 0.1), proposed, true);
  const auto ro = key_rate_unmonitored(ch, config(32, 0.1), original, true);
  CHECK(rp.key_rate >= ro.key_rate - 1e-12);
  CHECK(rp.key_rate > 0.0);
}

TEST_CASE("optimal mu beats a dense grid scan") {
  const auto original = make_threshold_leakage(BoundMode::Original);
  const ChannelModel ch = channel(25.0, 1e-6, 0.015);
  const auto pt = key_rate_unmonitored(ch, config(16, 0.1), original, true);
  REQUIRE(pt.nu_th.has_value());
  double grid_best = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double mu =
        std::exp(std::log(1e-4) + (std::log(1.0) - std::log(1e-4)) * k / 199);
    ProtocolConfig cfg = config(16, mu, *pt.nu_th);
    grid_best = std::max(
        grid_best, key_rate_unmonitored(ch, cfg, original, false).key_rate);
  }
  CHECK(pt.key_rate >= grid_best - 1e-10);
}

TEST_CASE("rate is non-increasing in loss for fixed mu and nu_th") {
  const auto original = make_threshold_leakage(BoundMode::Original);
  double prev = 1.0;
  for (double loss = 0.0; loss <= 40.0; loss += 2.0) {
    const auto pt = key_rate_unmonitored(channel(loss, 1e-6, 0.015),
                                         config(16, 0.06, 5), original, false);
    CHECK(pt.key_rate <= prev + 1e-15);
    prev = pt.key_rate;
  }
}

TEST_CASE("monitored key rate limits") {
  const PhotonLeakage none = [](int, int, double) { return 0.0; };
  // leakage-free, error-free limit: RL = Q
  {
    const ChannelModel ch = channel(8.0, 0.0, 0.0);
    const auto pt = key_rate_monitored(ch, config(6, 0.08), none, false);
    const auto ge = packet_gain_error(ch, config(6, 0.08));
    CHECK(pt.key_rate == doctest::Approx(ge.gain / 6.0).epsilon(1e-9));
  }
  // vanishing source
  {
    const auto pt = key_rate_monitored(channel(8.0, 0.0, 0.01),
                                       config(6, 1e-4), none, false);
    CHECK(pt.key_rate <= 2e-4);
  }
}

TEST_CASE("monitoring with decoys reaches farther than no monitoring") {
  const auto proposed = make_threshold_leakage(BoundMode::Unconstrained);
  const auto photon = make_photon_leakage();
  double last_positive_plain = -1.0;
  double last_positive_decoy = -1.0;
  for (double loss = 10.0; loss <= 60.0; loss += 10.0) {
    const ChannelModel ch = channel(loss, 1e-6, 0.015);
    if (key_rate_unmonitored(ch, config(16, 0.1), proposed, true).key_rate >
        0.0) {
      last_positive_plain = loss;
    }
    if (key_rate_monitored(ch, config(16, 0.1), photon, true).key_rate > 0.0) {
      last_positive_decoy = loss;
    }
  }
  CHECK(last_positive_decoy > last_positive_plain);
}

TEST_CASE("bb84 closed forms and limits") {
  // aggregate gain/error against the independently derived closed forms
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> loss(0.0, 35.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double lo = loss(rng);
    const double eta = std::pow(10.0, -lo / 10.0);
    const double mu = 0.3;
    const auto pt = bb84_key_rate(channel(lo, 1e-6, 0.02), mu, false);
    const double q_closed = (1.0 - 1e-6) * std::exp(-eta * mu) *
                            (eta * mu + 2e-6);
    const double eq_closed = (1.0 - 1e-6) * std::exp(-eta * mu) *
                             (eta * mu * 0.02 + 1e-6);
    CHECK(pt.gain == doctest::Approx(q_closed).epsilon(1e-10));
    REQUIRE(pt.error_rate.has_value());
    CHECK(*pt.error_rate == doctest::Approx(eq_closed / q_closed).epsilon(1e-10));
  }
  // error-free collapse: R = e^{-2mu} mu eta / 2
  {
    const double eta = std::pow(10.0, -1.5);
    const auto pt = bb84_key_rate(channel(15.0, 0.0, 0.0), 0.25, false);
    CHECK(pt.key_rate ==
          doctest::Approx(std::exp(-0.5) * 0.25 * eta / 2.0).epsilon(1e-10));
  }
  // heavy misalignment kills BB84 at any loss and mu
  for (double lo : {0.0, 10.0, 25.0, 40.0}) {
    const auto pt = bb84_key_rate(channel(lo, 1e-6, 0.15), 0.0, true);
    CHECK(pt.key_rate == 0.0);
  }
  // mild misalignment keeps it alive
  CHECK(bb84_key_rate(channel(20.0, 1e-6, 0.015), 0.0, true).key_rate > 0.0);
}

TEST_CASE("sweep composition and ordering") {
  SweepRequest req;
  req.channel = channel(0.0, 1e-6, 0.015);
  req.config = config(16, 0.05, 5);
  req.loss_grid_db = {12.0};
  req.packet_lengths = {16};
  req.variants = {};
  CHECK(sweep(req).empty());

  req.variants = {RateVariant::Proposed};
  req.optimize = false;
  const auto rows = sweep(req);
  REQUIRE(rows.size() == 1);
  const auto direct = key_rate_unmonitored(
      channel(12.0, 1e-6, 0.015), req.config,
      make_threshold_leakage(BoundMode::Unconstrained), false);
  CHECK(rows[0].point.key_rate == direct.key_rate);
  CHECK(rows[0].point.gain == direct.gain);

  SweepRequest bad = req;
  bad.loss_grid_db = {};
  CHECK_THROWS_AS(sweep(bad), std::invalid_argument);
}

TEST_CASE("sweep dominance on a small grid") {
  SweepRequest req;
  req.channel = channel(0.0, 1e-6, 0.015);
  req.config = config(16, 0.05);
  for (double loss = 0.0; loss <= 30.0; loss += 6.0) {
    req.loss_grid_db.push_back(loss);
  }
  req.packet_lengths = {16, 32};
  req.variants = {RateVariant::Original, RateVariant::Proposed};
  const auto rows = sweep(req);
  REQUIRE(rows.size() == 2 * req.loss_grid_db.size() * 2);
  for (std::size_t i = 0; i < rows.size(); i += 2) {
    CHECK(rows[i].variant == RateVariant::Original);
    CHECK(rows[i + 1].variant == RateVariant::Proposed);
    CHECK(rows[i + 1].loss_db == rows[i].loss_db);
    CHECK(rows[i + 1].point.key_rate >= rows[i].point.key_rate - 1e-12);
  }
}
