#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rrdps/bound.hpp"
#include "rrdps/exec.hpp"

namespace rrdps {

struct ChannelModel {
  double loss_db = 0.0;       // total channel loss, dB
  double dark_rate = 0.0;     // dark-count probability per pulse
  double misalignment = 0.0;  // wrong-detector click probability
  double transmittance() const;  // 10^(-loss_db/10)
  void validate() const;
};

struct ProtocolConfig {
  int pulses_per_packet = 2;   // L
  double mu = 0.1;             // mean photon number per pulse
  int nu_th = 1;               // tagging threshold (unmonitored mode)
  double ec_efficiency = 1.0;  // factor f multiplying h2(E)
  static constexpr int kNuThCap = 40;
  void validate() const;
};

struct RatePoint {
  double loss_db = 0.0;
  double gain = 0.0;                 // Q per packet
  std::optional<double> error_rate;  // absent when gain == 0
  double key_rate = 0.0;             // R per pulse, clamped at 0
  bool clamped = false;              // raw rate was negative
  double mu = 0.0;
  std::optional<int> nu_th;
};

// Leakage providers decouple the rate formulas from the bound solver.
using ThresholdLeakage = std::function<double(int L, int nu_th)>;
using PhotonLeakage = std::function<double(int L, int photons, double error)>;

ThresholdLeakage make_threshold_leakage(BoundMode mode,
                                        const OptimizerOptions& = {});
PhotonLeakage make_photon_leakage(const OptimizerOptions& = {});

// Counting rate for delay value r (1 <= r <= L-1), per packet.
double delay_counting_rate(const ChannelModel&, const ProtocolConfig&,
                           int delay);

struct GainError {
  double gain = 0.0;
  std::optional<double> error;
};
// Overall gain Q and QBER E of the unmonitored protocol.
GainError packet_gain_error(const ChannelModel&, const ProtocolConfig&);

struct YieldError {
  double yield = 0.0;
  std::optional<double> error;
};
// Yield and error of i-photon packets under signal-disturbance monitoring.
// photons == 0 evaluates the same formulas in the dark-count-only limit.
YieldError photon_number_yield(const ChannelModel&, int pulses_per_packet,
                               int photons);

// Key rate without monitoring: RL = Q(1 - f h2(E)) - e_src - (Q - e_src) I_AE
// with I_AE evaluated at N = nu_th. When optimize is set, mu (golden section
// on log mu in [1e-4, 1]) and nu_th (integer scan) are tuned.
RatePoint key_rate_unmonitored(const ChannelModel&, const ProtocolConfig&,
                               const ThresholdLeakage&, bool optimize);

// Key rate with monitoring and infinite decoy states:
// RL = Q(1 - f h2(E)) - sum_i Pois(L mu, i) Y_i I_AE(i, E_i), leakage set to
// 1 for i >= L-1 and the Poisson tail below 1e-12 mass counted as leaked.
RatePoint key_rate_monitored(const ChannelModel&, const ProtocolConfig&,
                             const PhotonLeakage&, bool optimize_mu);

// Phase-coding BB84 with infinite decoy states, per pulse.
RatePoint bb84_key_rate(const ChannelModel&, double mu, bool optimize_mu);

enum class RateVariant { Original, Proposed, Bb84, Decoy };
const char* variant_name(RateVariant);
std::optional<RateVariant> variant_from_name(const std::string&);

struct SweepRequest {
  ChannelModel channel;  // loss_db ignored; the grid supplies it
  ProtocolConfig config;
  std::vector<double> loss_grid_db;
  std::vector<int> packet_lengths;
  std::vector<RateVariant> variants;
  bool optimize = true;
  Exec exec = Exec::Parallel;
  OptimizerOptions bound_options;
};

struct SweepRow {
  double loss_db = 0.0;
  RateVariant variant = RateVariant::Proposed;
  int pulses_per_packet = 0;
  RatePoint point;
};

// One row per (L, loss, variant), in that nesting order.
std::vector<SweepRow> sweep(const SweepRequest&);

}  // namespace rrdps
