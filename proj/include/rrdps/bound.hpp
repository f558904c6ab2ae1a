#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rrdps/exec.hpp"

namespace rrdps {

// How the eavesdropper-information bound is evaluated:
//   Original      - h2(N/(L-1)), clamped to 1 once N/(L-1) >= 1/2,
//   Unconstrained - maximum of the leakage objective over the simplex,
//   Constrained   - same maximum restricted to weights whose error-rate
//                   floor does not exceed the observed QBER.
enum class BoundMode { Original, Unconstrained, Constrained };

struct BoundQuery {
  int pulses_per_packet = 0;  // L
  int photon_number = 0;      // N
  BoundMode mode = BoundMode::Unconstrained;
  std::optional<double> error_rate;  // QBER; present iff mode == Constrained
  void validate() const;             // throws std::invalid_argument
};

// Nonnegative weights x_1..x_{N+1} summing to 1.
struct SimplexWeights {
  std::vector<double> x;
  void validate() const;  // sum within 1e-12 of 1, entries >= 0
  bool empty() const { return x.empty(); }
};

struct OptimizerOptions {
  int unconstrained_restarts = 10;
  int constrained_restarts = 20;
  double objective_tol = 1e-12;  // stop on objective change below this
  int max_iterations = 20000;
  std::uint64_t seed = 0;
  Exec exec = Exec::Parallel;  // restarts run in parallel; result identical
};

struct BoundResult {
  double iae = 0.0;        // bits per sifted key bit, in [0,1]
  SimplexWeights argmax;   // empty in Original mode
  bool converged = false;
  double objective_gap_estimate = 0.0;  // heuristic optimality indicator
};

// sum_{n=1}^{N} phi((L-n) x_n, n x_{n+1}) / (L-1); weights hold x_1..x_{N+1}.
double leakage_objective(int pulses_per_packet, const SimplexWeights& weights);

// Smallest QBER compatible with the given weights. Parity of photon_number
// selects the branch:
//   odd N:  [sum_n (sqrt((L-2n)x_{2n}) - sqrt(2n x_{2n+1}))^2
//            + (L-N-1)x_{N+1}/2] / (L-1)
//   even N: [sum_n (sqrt((L-2n+1)x_{2n-1}) - sqrt((2n-1)x_{2n}))^2
//            + (L-N-1)x_{N+1}/2] / (L-1)
double error_rate_floor(int pulses_per_packet, int photon_number,
                        const SimplexWeights& weights);

// Upper bound on the eavesdropper's information per sifted key bit.
BoundResult iae_bound(const BoundQuery& query, const OptimizerOptions& = {});

// Largest E in [0, 0.5] with 1 - h2(E) - I_AE(E) = 0; absent when even E = 0
// leaves no positive key rate.
std::optional<double> tolerant_error_rate(int pulses_per_packet,
                                          int photon_number, BoundMode mode,
                                          const OptimizerOptions& = {});

// True iff the unconstrained bound stays strictly below 1. Requires
// photon_number <= pulses_per_packet - 2.
bool leakage_below_one(int pulses_per_packet, int photon_number,
                       const OptimizerOptions& = {});

const char* bound_mode_name(BoundMode mode);
std::optional<BoundMode> bound_mode_from_name(const std::string& name);

}  // namespace rrdps
