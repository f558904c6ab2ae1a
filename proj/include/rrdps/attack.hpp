#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rrdps/bound.hpp"
#include "rrdps/exec.hpp"

namespace rrdps {

// A single-photon collective attack: Eve maps time-bin i to time-bin j with
// amplitude c_ij >= 0 while keeping an ancilla whose state is labeled by
// ancilla[i][j]. Equal labels mean identical ancilla states, distinct labels
// orthogonal ones; partial overlaps are out of scope.
struct AttackSpec {
  int pulses_per_packet = 0;
  std::vector<double> amplitudes;  // L*L row-major, c[i*L + j]
  std::vector<int> ancilla;        // L*L row-major labels
  double amplitude(int i, int j) const {
    return amplitudes[static_cast<std::size_t>(i) * pulses_per_packet + j];
  }
  int label(int i, int j) const {
    return ancilla[static_cast<std::size_t>(i) * pulses_per_packet + j];
  }
  void validate() const;  // c_ij >= 0 and row norms <= 1
};

struct PairMetrics {
  int a = 0;
  int b = 0;
  double yield = 0.0;   // Q^{(a,b)}
  double error = 0.0;   // E^{(a,b)}
  double holevo = 0.0;  // I^{(a,b)}
};

struct AttackMetrics {
  std::vector<PairMetrics> per_pair;
  double aggregate_error = 0.0;
  double aggregate_info = 0.0;
  double x1 = 0.0;  // sum of diagonal |c|^2
  double x2 = 0.0;  // sum of off-diagonal |c|^2
};

// Non-normalized conditional ancilla states for announcement (a,b), a < b,
// 0-based; even key parity first. Matrices live in the compacted basis of
// ancilla labels touched by columns a and b (dimension <= 2L).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> eve_states(const AttackSpec&,
                                                       int a, int b);

// Exact per-pair and aggregate leakage/error figures of the attack.
AttackMetrics attack_metrics(const AttackSpec&);

struct BoundCheckReport {
  bool jensen_ok = false;      // summed pair terms vs phi((L-1)x1, x2)
  double jensen_slack = 0.0;
  bool pairwise_ok = false;    // exact Holevo vs per-pair phi form
  double pairwise_worst_slack = 0.0;
  bool constraint_ok = false;  // x2/(x1+x2) vs 2(L-1)E/(L-2); skipped at L=2
  double constraint_slack = 0.0;
  bool bound_ok = false;       // aggregate info vs constrained bound at E
  double bound_slack = 0.0;
  double bound_value = 0.0;
  double aggregate_error = 0.0;
  double aggregate_info = 0.0;
  bool all_ok() const {
    return jensen_ok && pairwise_ok && constraint_ok && bound_ok;
  }
};

BoundCheckReport verify_bound(const AttackSpec&, const OptimizerOptions& = {});

// Reproducible random attack (rows are squared-Dirichlet weights scaled by a
// uniform row norm in [0.5, 1]; ancilla labels injective, constant, or
// random-with-collisions).
AttackSpec random_attack(int pulses_per_packet, std::uint64_t seed);

struct ScatterPoint {
  std::uint64_t trial = 0;
  double error = 0.0;
  double info = 0.0;
  double bound = 0.0;  // staircase lower bound of the constrained-bound curve at E
};

struct OracleRunResult {
  std::uint64_t violations = 0;
  double worst_slack = 0.0;  // min over trials of bound - info
  std::vector<ScatterPoint> scatter;
};

// Monte Carlo sweep of random attacks against the constrained bound at each
// attack's own error rate. Violations indicate implementation bugs.
OracleRunResult run_attack_trials(int pulses_per_packet, std::uint64_t trials,
                                  std::uint64_t seed, Exec exec,
                                  const OptimizerOptions& = {});

struct BruteForceResult {
  double best_info = 0.0;
  double bound = 0.0;
  bool searched = false;
  std::uint64_t evaluations = 0;
};

// Randomized local search for the most informative attack whose error rate
// stays at or below target_error; budget counts metric evaluations.
BruteForceResult search_max_leakage(int pulses_per_packet, double target_error,
                                    std::uint64_t budget, std::uint64_t seed,
                                    const OptimizerOptions& = {});

}  // namespace rrdps
