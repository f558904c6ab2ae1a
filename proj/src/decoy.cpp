#include "rrdps/decoy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rrdps/entropy.hpp"

namespace rrdps {
namespace {

double poisson_tail_above(double lambda, int cutoff) {
  double term = std::exp(-lambda);
  double cum = term;
  for (int i = 1; i <= cutoff; ++i) {
    term *= lambda / i;
    cum += term;
  }
  return std::max(0.0, 1.0 - cum);
}

void check_unit(double v, const char* what) {
  if (v < 0.0 || v > 1.0) throw std::invalid_argument(what);
}

}  // namespace

void DecoyIntensities::validate() const {
  if (pulses_per_packet < 2) throw std::invalid_argument("L must be >= 2");
  if (!(mu_signal > mu_decoy && mu_decoy > mu_vacuum && mu_vacuum >= 0.0)) {
    throw std::invalid_argument(
        "intensities must satisfy signal > decoy > vacuum >= 0");
  }
}

void DecoyObservations::validate() const {
  check_unit(gain_signal, "signal gain outside [0,1]");
  check_unit(gain_decoy, "decoy gain outside [0,1]");
  check_unit(gain_vacuum, "vacuum gain outside [0,1]");
  check_unit(error_signal, "signal error outside [0,1]");
  check_unit(error_decoy, "decoy error outside [0,1]");
}

DecoyEstimateResult estimate_single_photon(const DecoyIntensities& in,
                                           const DecoyObservations& obs,
                                           ExponentConvention convention) {
  in.validate();
  obs.validate();
  const int L = in.pulses_per_packet;
  const double ls = L * in.mu_signal;
  const double ld = L * in.mu_decoy;
  const double lv = L * in.mu_vacuum;

  DecoyEstimateResult out;
  if (ld - lv < 1e-300 || ls - ld < 1e-300) {
    out.failure = "degenerate intensity spacing";
    return out;
  }

  const double y0 = std::max(
      (ld * obs.gain_vacuum * std::exp(lv) - lv * obs.gain_decoy * std::exp(ld)) /
          (ld - lv),
      0.0);

  const double denom = ls * ld - ls * lv - ld * ld + lv * lv;
  if (denom < 1e-300) {
    out.failure = "degenerate intensity configuration (signal <= decoy + vacuum)";
    return out;
  }
  const bool packet = convention == ExponentConvention::PerPacket;
  const double es = std::exp(packet ? ls : in.mu_signal);
  const double ed = std::exp(packet ? ld : in.mu_decoy);
  const double ev = std::exp(packet ? lv : in.mu_vacuum);
  const double y1 =
      (ls / denom) *
      (obs.gain_decoy * ed - obs.gain_vacuum * ev -
       (ld * ld - lv * lv) / (ls * ls) * (obs.gain_signal * es - y0));
  if (!(y1 > 0.0)) {
    out.failure = "single-photon yield estimate is nonpositive";
    return out;
  }

  double e1 = (obs.error_signal * obs.gain_signal * std::exp(ls) -
               obs.error_decoy * obs.gain_decoy * std::exp(ld)) /
              ((ls - ld) * y1);
  DecoyEstimates est;
  est.yield_vacuum = y0;
  est.yield_single = y1;
  est.error_clipped = e1 < 0.0 || e1 > 0.5;
  est.error_single = std::clamp(e1, 0.0, 0.5);
  out.estimates = est;
  return out;
}

std::optional<double> experimental_key_rate(const DecoyIntensities& in,
                                            const DecoyObservations& obs,
                                            const DecoyEstimates& est,
                                            ExperimentalRateMode mode,
                                            double ec_efficiency,
                                            const OptimizerOptions& opt) {
  in.validate();
  if (!(est.yield_single > 0.0)) return std::nullopt;
  const int L = in.pulses_per_packet;
  const double ls = L * in.mu_signal;

  BoundQuery q;
  q.pulses_per_packet = L;
  q.photon_number = 1;
  if (mode == ExperimentalRateMode::WithoutErrorRate) {
    q.mode = BoundMode::Unconstrained;
  } else {
    q.mode = BoundMode::Constrained;
    q.error_rate = est.error_single;
  }
  const double iae = iae_bound(q, opt).iae;
  const double rate = (ls * std::exp(-ls) * est.yield_single * (1.0 - iae) -
                       ec_efficiency * obs.gain_signal *
                           binary_entropy(obs.error_signal)) /
                      L;
  if (rate < 0.0) return std::nullopt;
  return rate;
}

L65Result recompute_l65(const OptimizerOptions& opt) {
  constexpr int kL = 65;
  constexpr double kMu = 0.037;         // per pulse
  constexpr double kGain = 8.435e-4;    // per packet
  constexpr double kError = 0.058;
  constexpr int kNuTh = 10;
  constexpr double kEcEff = 1.1;

  L65Result out;
  out.e_src = poisson_tail_above(kL * kMu, kNuTh);
  const double common =
      kGain * (1.0 - kEcEff * binary_entropy(kError)) - out.e_src;
  const double original = binary_entropy(static_cast<double>(kNuTh) / (kL - 1));
  out.r1 = (common - (kGain - out.e_src) * original) / kL;

  BoundQuery q;
  q.pulses_per_packet = kL;
  q.photon_number = kNuTh;
  q.mode = BoundMode::Unconstrained;
  out.iae_10photon = iae_bound(q, opt).iae;
  out.r2 = (common - (kGain - out.e_src) * out.iae_10photon) / kL;
  return out;
}

}  // namespace rrdps
