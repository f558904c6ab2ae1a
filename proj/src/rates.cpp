#include "rrdps/rates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "rrdps/entropy.hpp"

namespace rrdps {
namespace {

constexpr double kPoissonTail = 1e-12;
constexpr double kMuLo = 1e-4;
constexpr double kMuHi = 1.0;

// Probability that a Poisson(lambda) variable exceeds cutoff.
double poisson_tail_above(double lambda, int cutoff) {
  double term = std::exp(-lambda);
  double cum = term;
  for (int i = 1; i <= cutoff; ++i) {
    term *= lambda / i;
    cum += term;
  }
  return std::max(0.0, 1.0 - cum);
}

double h2_or_zero(const std::optional<double>& e) {
  return e ? binary_entropy(std::min(*e, 1.0)) : 0.0;
}

// Coarse log-spaced scan followed by golden-section refinement; f must be
// unimodal in mu over [kMuLo, kMuHi] (checked against a grid oracle in the
// test suite).
template <typename F>
std::pair<double, double> maximize_over_mu(F&& f) {
  constexpr int kScan = 17;
  const double llo = std::log(kMuLo);
  const double lhi = std::log(kMuHi);
  int best = 0;
  double best_val = -1.0;
  for (int k = 0; k < kScan; ++k) {
    const double mu = std::exp(llo + (lhi - llo) * k / (kScan - 1));
    const double val = f(mu);
    if (val > best_val) {
      best_val = val;
      best = k;
    }
  }
  double a = llo + (lhi - llo) * std::max(0, best - 1) / (kScan - 1);
  double b = llo + (lhi - llo) * std::min(kScan - 1, best + 1) / (kScan - 1);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(std::exp(c));
  double fd = f(std::exp(d));
  while (b - a > 1e-6) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(std::exp(d));
    }
  }
  const double mu = std::exp(0.5 * (a + b));
  return {mu, f(mu)};
}

struct RawRate {
  double rate = 0.0;  // already clamped, per pulse
  bool clamped = false;
  GainError gain_error;
};

RawRate unmonitored_rate_at(const ChannelModel& ch, const ProtocolConfig& cfg,
                            double iae) {
  RawRate out;
  out.gain_error = packet_gain_error(ch, cfg);
  const double q = out.gain_error.gain;
  const double e_src = poisson_tail_above(cfg.pulses_per_packet * cfg.mu,
                                          cfg.nu_th);
  const double rl = q * (1.0 - cfg.ec_efficiency * h2_or_zero(out.gain_error.error)) -
                    e_src - (q - e_src) * iae;
  out.clamped = rl < 0.0;
  out.rate = std::max(0.0, rl) / cfg.pulses_per_packet;
  return out;
}

RawRate monitored_rate_at(const ChannelModel& ch, const ProtocolConfig& cfg,
                          const std::vector<double>& leakage_by_photons) {
  RawRate out;
  out.gain_error = packet_gain_error(ch, cfg);
  const int L = cfg.pulses_per_packet;
  const double lambda = L * cfg.mu;
  double term = std::exp(-lambda);
  double cum = term;
  double leak = 0.0;
  for (int i = 1; i < 8192; ++i) {
    term *= lambda / i;
    cum += term;
    const double yield = photon_number_yield(ch, L, i).yield;
    const double iae_i =
        i < static_cast<int>(leakage_by_photons.size()) ? leakage_by_photons[i]
                                                        : 1.0;
    leak += term * yield * iae_i;
    if (1.0 - cum < kPoissonTail && i >= L) break;
  }
  leak += std::max(0.0, 1.0 - cum);  // tail counted as fully leaked
  const double q = out.gain_error.gain;
  const double rl =
      q * (1.0 - cfg.ec_efficiency * h2_or_zero(out.gain_error.error)) - leak;
  out.clamped = rl < 0.0;
  out.rate = std::max(0.0, rl) / L;
  return out;
}

struct Bb84Point {
  double rate = 0.0;
  bool clamped = false;
  double gain = 0.0;
  std::optional<double> error;
};

Bb84Point bb84_rate_at(const ChannelModel& ch, double mu) {
  const double eta = ch.transmittance();
  const double d = ch.dark_rate;
  const double q = 0.5 * eta;
  auto yield = [&](int i) {
    const double thru = i > 0 ? i * q * std::pow(1.0 - q, i - 1) : 0.0;
    return (1.0 - d) * (thru + std::pow(1.0 - q, i) * 2.0 * d);
  };
  auto error_yield = [&](int i) {
    const double thru = i > 0 ? i * q * std::pow(1.0 - q, i - 1) : 0.0;
    return (1.0 - d) * (thru * ch.misalignment + std::pow(1.0 - q, i) * d);
  };
  const double lambda = 2.0 * mu;
  double term = std::exp(-lambda);
  double gain = term * yield(0);
  double err = term * error_yield(0);
  double cum = term;
  for (int i = 1; i < 4096; ++i) {
    term *= lambda / i;
    cum += term;
    gain += term * yield(i);
    err += term * error_yield(i);
    if (1.0 - cum < 1e-15 && i >= 4) break;
  }
  Bb84Point out;
  out.gain = gain;
  if (gain > 0.0) out.error = err / gain;
  const double y1 = yield(1);
  const double e1 = y1 > 0.0 ? error_yield(1) / y1 : 0.0;
  const double rhs = -gain * h2_or_zero(out.error) +
                     std::exp(-lambda) * lambda * y1 * (1.0 - binary_entropy(e1));
  out.clamped = rhs < 0.0;
  out.rate = std::max(0.0, rhs) / 2.0;
  return out;
}

}  // namespace

double ChannelModel::transmittance() const {
  return std::pow(10.0, -loss_db / 10.0);
}

void ChannelModel::validate() const {
  if (loss_db < 0.0) throw std::invalid_argument("negative channel loss");
  if (dark_rate < 0.0 || dark_rate >= 1.0) {
    throw std::invalid_argument("dark rate outside [0,1)");
  }
  if (misalignment < 0.0 || misalignment > 0.5) {
    throw std::invalid_argument("misalignment outside [0, 0.5]");
  }
}

void ProtocolConfig::validate() const {
  if (pulses_per_packet < 2) throw std::invalid_argument("L must be >= 2");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (nu_th < 1 || nu_th > kNuThCap) {
    throw std::invalid_argument("nu_th outside [1, cap]");
  }
  if (ec_efficiency < 1.0) {
    throw std::invalid_argument("error-correction efficiency below 1");
  }
}

ThresholdLeakage make_threshold_leakage(BoundMode mode,
                                        const OptimizerOptions& opt) {
  auto cache = std::make_shared<std::map<std::pair<int, int>, double>>();
  auto mtx = std::make_shared<std::mutex>();
  return [mode, opt, cache, mtx](int L, int nu_th) {
    {
      std::lock_guard<std::mutex> lock(*mtx);
      auto it = cache->find({L, nu_th});
      if (it != cache->end()) return it->second;
    }
    BoundQuery q;
    q.pulses_per_packet = L;
    q.photon_number = nu_th;
    q.mode = mode;
    const double value = iae_bound(q, opt).iae;
    std::lock_guard<std::mutex> lock(*mtx);
    (*cache)[{L, nu_th}] = value;
    return value;
  };
}

PhotonLeakage make_photon_leakage(const OptimizerOptions& opt) {
  return [opt](int L, int photons, double error) {
    if (photons >= L - 1) return 1.0;
    BoundQuery q;
    q.pulses_per_packet = L;
    q.photon_number = photons;
    q.mode = BoundMode::Constrained;
    q.error_rate = std::clamp(error, 0.0, 0.5);
    return iae_bound(q, opt).iae;
  };
}

double delay_counting_rate(const ChannelModel& ch, const ProtocolConfig& cfg,
                           int delay) {
  ch.validate();
  if (delay < 1 || delay > cfg.pulses_per_packet - 1) {
    throw std::invalid_argument("delay outside [1, L-1]");
  }
  const int w = cfg.pulses_per_packet - delay;  // open time-windows
  const double d = ch.dark_rate;
  const double em = w * ch.transmittance() * cfg.mu;
  return std::pow(1.0 - d, 2 * w - 1) * std::exp(-em) * (em + 2.0 * w * d);
}

GainError packet_gain_error(const ChannelModel& ch,
                            const ProtocolConfig& cfg) {
  ch.validate();
  const int L = cfg.pulses_per_packet;
  const double d = ch.dark_rate;
  const double eta_mu = ch.transmittance() * cfg.mu;
  double gain = 0.0;
  double err = 0.0;
  for (int r = 1; r <= L - 1; ++r) {
    const int w = L - r;
    const double att = std::pow(1.0 - d, 2 * w - 1) * std::exp(-w * eta_mu);
    gain += att * (w * eta_mu + 2.0 * w * d);
    err += att * (w * eta_mu * ch.misalignment + w * d);
  }
  gain /= (L - 1);
  err /= (L - 1);
  GainError out;
  out.gain = gain;
  if (gain > 0.0) out.error = err / gain;
  return out;
}

YieldError photon_number_yield(const ChannelModel& ch, int pulses_per_packet,
                               int photons) {
  ch.validate();
  if (photons < 0) throw std::invalid_argument("negative photon number");
  const int L = pulses_per_packet;
  const double d = ch.dark_rate;
  const double eta = ch.transmittance();
  double yield = 0.0;
  double err = 0.0;
  for (int r = 1; r <= L - 1; ++r) {
    const int w = L - r;
    const double q = static_cast<double>(w) * eta / L;
    const double dark = std::pow(1.0 - d, 2 * w - 1);
    const double thru =
        photons > 0 ? photons * q * std::pow(1.0 - q, photons - 1) : 0.0;
    const double miss = std::pow(1.0 - q, photons);
    yield += dark * (thru + miss * 2.0 * w * d);
    err += dark * (thru * ch.misalignment + miss * w * d);
  }
  yield /= (L - 1);
  err /= (L - 1);
  YieldError out;
  out.yield = yield;
  if (yield > 0.0) out.error = err / yield;
  return out;
}

RatePoint key_rate_unmonitored(const ChannelModel& ch,
                               const ProtocolConfig& cfg,
                               const ThresholdLeakage& leakage,
                               bool optimize) {
  cfg.validate();
  const int L = cfg.pulses_per_packet;
  RatePoint pt;
  pt.loss_db = ch.loss_db;
  if (!optimize) {
    const RawRate raw = unmonitored_rate_at(ch, cfg, leakage(L, cfg.nu_th));
    pt.gain = raw.gain_error.gain;
    pt.error_rate = raw.gain_error.error;
    pt.key_rate = raw.rate;
    pt.clamped = raw.clamped;
    pt.mu = cfg.mu;
    pt.nu_th = cfg.nu_th;
    return pt;
  }
  const int nu_max = std::min(ProtocolConfig::kNuThCap, L - 1);
  double best_rate = -1.0;
  for (int nu = 1; nu <= nu_max; ++nu) {
    const double iae = leakage(L, nu);
    ProtocolConfig probe = cfg;
    probe.nu_th = nu;
    auto [mu, rate] = maximize_over_mu([&](double m) {
      probe.mu = m;
      return unmonitored_rate_at(ch, probe, iae).rate;
    });
    if (rate > best_rate) {
      best_rate = rate;
      probe.mu = mu;
      const RawRate raw = unmonitored_rate_at(ch, probe, iae);
      pt.gain = raw.gain_error.gain;
      pt.error_rate = raw.gain_error.error;
      pt.key_rate = raw.rate;
      pt.clamped = raw.clamped;
      pt.mu = mu;
      pt.nu_th = nu;
    }
  }
  return pt;
}

RatePoint key_rate_monitored(const ChannelModel& ch, const ProtocolConfig& cfg,
                             const PhotonLeakage& leakage, bool optimize_mu) {
  cfg.validate();
  const int L = cfg.pulses_per_packet;
  // E_i does not depend on mu, so the per-photon leakage is fixed per point.
  // Precompute it out to where the Poisson mass at the largest mu considered
  // is exhausted; beyond that the sum counts the tail as fully leaked.
  const double lambda_max = L * std::max(optimize_mu ? kMuHi : cfg.mu, cfg.mu);
  int cap = L + 2;
  while (poisson_tail_above(lambda_max, cap) > 1e-13 && cap < 8192) ++cap;
  std::vector<double> leak(cap + 1, 0.0);
  for (int i = 1; i <= cap; ++i) {
    const YieldError ye = photon_number_yield(ch, L, i);
    leak[i] = leakage(L, i, ye.error.value_or(0.0));
  }
  RatePoint pt;
  pt.loss_db = ch.loss_db;
  ProtocolConfig probe = cfg;
  if (optimize_mu) {
    auto [mu, rate] = maximize_over_mu([&](double m) {
      probe.mu = m;
      return monitored_rate_at(ch, probe, leak).rate;
    });
    (void)rate;
    probe.mu = mu;
  }
  const RawRate raw = monitored_rate_at(ch, probe, leak);
  pt.gain = raw.gain_error.gain;
  pt.error_rate = raw.gain_error.error;
  pt.key_rate = raw.rate;
  pt.clamped = raw.clamped;
  pt.mu = probe.mu;
  return pt;
}

RatePoint bb84_key_rate(const ChannelModel& ch, double mu, bool optimize_mu) {
  ch.validate();
  if (optimize_mu) {
    auto [best_mu, rate] = maximize_over_mu(
        [&](double m) { return bb84_rate_at(ch, m).rate; });
    (void)rate;
    mu = best_mu;
  } else if (!(mu > 0.0)) {
    throw std::invalid_argument("mu must be positive");
  }
  const Bb84Point p = bb84_rate_at(ch, mu);
  RatePoint pt;
  pt.loss_db = ch.loss_db;
  pt.gain = p.gain;
  pt.error_rate = p.error;
  pt.key_rate = p.rate;
  pt.clamped = p.clamped;
  pt.mu = mu;
  return pt;
}

const char* variant_name(RateVariant v) {
  switch (v) {
    case RateVariant::Original:
      return "original";
    case RateVariant::Proposed:
      return "proposed";
    case RateVariant::Bb84:
      return "bb84";
    case RateVariant::Decoy:
      return "decoy";
  }
  return "?";
}

std::optional<RateVariant> variant_from_name(const std::string& name) {
  if (name == "original") return RateVariant::Original;
  if (name == "proposed") return RateVariant::Proposed;
  if (name == "bb84") return RateVariant::Bb84;
  if (name == "decoy") return RateVariant::Decoy;
  return std::nullopt;
}

std::vector<SweepRow> sweep(const SweepRequest& req) {
  if (req.loss_grid_db.empty() || req.packet_lengths.empty()) {
    throw std::invalid_argument("sweep: empty grid");
  }
  if (req.variants.empty()) return {};

  // Threshold leakage is loss-independent; warm the caches serially so the
  // parallel section only reads.
  ThresholdLeakage proposed = make_threshold_leakage(BoundMode::Unconstrained,
                                                     req.bound_options);
  ThresholdLeakage original = make_threshold_leakage(BoundMode::Original,
                                                     req.bound_options);
  for (RateVariant v : req.variants) {
    if (v != RateVariant::Original && v != RateVariant::Proposed) continue;
    const ThresholdLeakage& fn = v == RateVariant::Original ? original
                                                            : proposed;
    for (int L : req.packet_lengths) {
      if (req.optimize) {
        const int nu_max = std::min(ProtocolConfig::kNuThCap, L - 1);
        for (int nu = 1; nu <= nu_max; ++nu) fn(L, nu);
      } else {
        fn(L, req.config.nu_th);
      }
    }
  }
  PhotonLeakage photon = make_photon_leakage(req.bound_options);

  const std::size_t n_loss = req.loss_grid_db.size();
  const std::size_t n_var = req.variants.size();
  const std::size_t total = req.packet_lengths.size() * n_loss * n_var;
  std::vector<SweepRow> rows(total);
  for_each_index(total, req.exec, [&](std::size_t idx) {
    const std::size_t li = idx / (n_loss * n_var);
    const std::size_t gi = (idx / n_var) % n_loss;
    const std::size_t vi = idx % n_var;
    const int L = req.packet_lengths[li];
    ChannelModel ch = req.channel;
    ch.loss_db = req.loss_grid_db[gi];
    ProtocolConfig cfg = req.config;
    cfg.pulses_per_packet = L;
    cfg.nu_th = std::min(cfg.nu_th, std::min(ProtocolConfig::kNuThCap, L - 1));
    SweepRow row;
    row.loss_db = ch.loss_db;
    row.variant = req.variants[vi];
    row.pulses_per_packet = L;
    switch (row.variant) {
      case RateVariant::Original:
        row.point = key_rate_unmonitored(ch, cfg, original, req.optimize);
        break;
      case RateVariant::Proposed:
        row.point = key_rate_unmonitored(ch, cfg, proposed, req.optimize);
        break;
      case RateVariant::Bb84:
        row.point = bb84_key_rate(ch, req.optimize ? 0.0 : cfg.mu,
                                  req.optimize);
        break;
      case RateVariant::Decoy:
        row.point = key_rate_monitored(ch, cfg, photon, req.optimize);
        break;
    }
    rows[idx] = std::move(row);
  });
  return rows;
}

}  // namespace rrdps
