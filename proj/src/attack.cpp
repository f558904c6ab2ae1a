#include "rrdps/attack.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "rrdps/entropy.hpp"

namespace rrdps {
namespace {

constexpr double kEigenFloor = 1e-14;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double von_neumann_entropy(const Eigen::MatrixXd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      rho, Eigen::EigenvaluesOnly);
  const auto& vals = solver.eigenvalues();
  double total = 0.0;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals[i] > kEigenFloor) total += vals[i];
  }
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    const double lam = vals[i] / total;
    if (lam > kEigenFloor) s -= lam * std::log2(lam);
  }
  return s;
}

// Compacted ancilla basis for the pair (a, b): the 2L slots (i,a), (i,b)
// mapped to dense indices.
struct PairBasis {
  std::unordered_map<int, int> index;
  int dim = 0;
  int at(int label) {
    auto [it, inserted] = index.try_emplace(label, dim);
    if (inserted) ++dim;
    return it->second;
  }
};

struct PairData {
  Eigen::MatrixXd rho0;
  Eigen::MatrixXd rho1;
  double yield = 0.0;  // Q^{(a,b)} = sum_i c_ia^2 + c_ib^2
  double error = 0.0;
  bool detectable = false;
};

PairData build_pair(const AttackSpec& spec, int a, int b) {
  const int L = spec.pulses_per_packet;
  PairBasis basis;
  for (int i = 0; i < L; ++i) {
    basis.at(spec.label(i, a));
    basis.at(spec.label(i, b));
  }
  const int dim = basis.dim;

  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd v1 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd w1 = Eigen::VectorXd::Zero(dim);
  v0[basis.at(spec.label(a, a))] += spec.amplitude(a, a);
  v0[basis.at(spec.label(b, a))] += spec.amplitude(b, a);
  w0[basis.at(spec.label(b, b))] += spec.amplitude(b, b);
  w0[basis.at(spec.label(a, b))] += spec.amplitude(a, b);
  v1[basis.at(spec.label(a, a))] += spec.amplitude(a, a);
  v1[basis.at(spec.label(b, a))] -= spec.amplitude(b, a);
  w1[basis.at(spec.label(b, b))] += spec.amplitude(b, b);
  w1[basis.at(spec.label(a, b))] -= spec.amplitude(a, b);

  PairData out;
  out.rho0 = v0 * v0.transpose() + w0 * w0.transpose();
  out.rho1 = v1 * v1.transpose() + w1 * w1.transpose();
  double q = 0.0;
  double p_err_even = 0.5 * (v0 - w0).squaredNorm();
  double p_err_odd = 0.5 * (v1 - w1).squaredNorm();
  for (int i = 0; i < L; ++i) {
    const double cia = spec.amplitude(i, a);
    const double cib = spec.amplitude(i, b);
    q += cia * cia + cib * cib;
    if (i == a || i == b) continue;
    const int ka = basis.at(spec.label(i, a));
    const int kb = basis.at(spec.label(i, b));
    out.rho0(ka, ka) += cia * cia;
    out.rho0(kb, kb) += cib * cib;
    out.rho1(ka, ka) += cia * cia;
    out.rho1(kb, kb) += cib * cib;
    const double cross = ka == kb ? 2.0 * cia * cib : 0.0;
    p_err_even += 0.5 * (cia * cia + cib * cib - cross);
    p_err_odd += 0.5 * (cia * cia + cib * cib + cross);
  }
  out.yield = q;
  out.detectable = q > 1e-300;
  if (out.detectable) out.error = (p_err_even + p_err_odd) / (2.0 * q);
  return out;
}

double pair_holevo(const PairData& pd) {
  const double t0 = pd.rho0.trace();
  const double t1 = pd.rho1.trace();
  if (t0 <= 1e-300 || t1 <= 1e-300) {
    // One parity never detected; the prior-weighted Holevo limit vanishes.
    return 0.0;
  }
  const Eigen::MatrixXd n0 = pd.rho0 / t0;
  const Eigen::MatrixXd n1 = pd.rho1 / t1;
  const Eigen::MatrixXd avg = 0.5 * (n0 + n1);
  const double chi = von_neumann_entropy(avg) -
                     0.5 * von_neumann_entropy(n0) -
                     0.5 * von_neumann_entropy(n1);
  return std::clamp(chi, 0.0, 1.0);
}

// Staircase of the constrained single-photon bound for fast Monte Carlo
// lookups; entry k is the bound at E = k/kCurveSteps * 0.5, a lower bound of
// the curve on [E_k, E_{k+1}) by monotonicity.
constexpr int kCurveSteps = 512;

std::vector<double> bound_curve(int L, const OptimizerOptions& opt) {
  std::vector<double> curve(kCurveSteps + 1, 0.0);
  for_each_index(curve.size(), opt.exec, [&](std::size_t k) {
    BoundQuery q;
    q.pulses_per_packet = L;
    q.photon_number = 1;
    q.mode = BoundMode::Constrained;
    q.error_rate = 0.5 * static_cast<double>(k) / kCurveSteps;
    OptimizerOptions inner = opt;
    inner.exec = Exec::Serial;
    curve[k] = iae_bound(q, inner).iae;
  });
  return curve;
}

double exact_bound_at(int L, double error, const OptimizerOptions& opt) {
  BoundQuery q;
  q.pulses_per_packet = L;
  q.photon_number = 1;
  q.mode = BoundMode::Constrained;
  q.error_rate = std::clamp(error, 0.0, 0.5);
  OptimizerOptions inner = opt;
  inner.exec = Exec::Serial;
  return iae_bound(q, inner).iae;
}

AttackSpec perturb_attack(const AttackSpec& spec, double sigma,
                          std::mt19937_64& rng) {
  AttackSpec out = spec;
  std::normal_distribution<double> gauss(0.0, sigma);
  const int L = spec.pulses_per_packet;
  for (auto& c : out.amplitudes) c = std::max(0.0, c + gauss(rng));
  for (int i = 0; i < L; ++i) {
    double norm2 = 0.0;
    for (int j = 0; j < L; ++j) {
      norm2 += out.amplitude(i, j) * out.amplitude(i, j);
    }
    if (norm2 > 1.0) {
      const double scale = 1.0 / std::sqrt(norm2);
      for (int j = 0; j < L; ++j) {
        out.amplitudes[static_cast<std::size_t>(i) * L + j] *= scale;
      }
    }
  }
  return out;
}

}  // namespace

void AttackSpec::validate() const {
  const int L = pulses_per_packet;
  if (L < 2) throw std::invalid_argument("attack requires L >= 2");
  const std::size_t n = static_cast<std::size_t>(L) * L;
  if (amplitudes.size() != n || ancilla.size() != n) {
    throw std::invalid_argument("attack matrices must be L x L");
  }
  for (int i = 0; i < L; ++i) {
    double norm2 = 0.0;
    for (int j = 0; j < L; ++j) {
      const double c = amplitude(i, j);
      if (c < 0.0) throw std::invalid_argument("negative attack amplitude");
      norm2 += c * c;
    }
    if (norm2 > 1.0 + 1e-12) {
      throw std::invalid_argument("attack row norm exceeds 1");
    }
  }
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> eve_states(const AttackSpec& spec,
                                                       int a, int b) {
  spec.validate();
  if (a < 0 || b <= a || b >= spec.pulses_per_packet) {
    throw std::invalid_argument("eve_states: need 0 <= a < b < L");
  }
  PairData pd = build_pair(spec, a, b);
  return {std::move(pd.rho0), std::move(pd.rho1)};
}

AttackMetrics attack_metrics(const AttackSpec& spec) {
  spec.validate();
  const int L = spec.pulses_per_packet;
  AttackMetrics m;
  double yield_sum = 0.0;
  double err_sum = 0.0;
  double info_sum = 0.0;
  for (int a = 0; a < L; ++a) {
    for (int b = a + 1; b < L; ++b) {
      PairData pd = build_pair(spec, a, b);
      if (!pd.detectable) continue;
      PairMetrics pm;
      pm.a = a;
      pm.b = b;
      pm.yield = pd.yield;
      pm.error = pd.error;
      pm.holevo = pair_holevo(pd);
      yield_sum += pm.yield;
      err_sum += pm.yield * pm.error;
      info_sum += pm.yield * pm.holevo;
      m.per_pair.push_back(pm);
    }
  }
  if (yield_sum <= 0.0) {
    throw std::invalid_argument("attack blocks every pair; metrics undefined");
  }
  m.aggregate_error = err_sum / yield_sum;
  m.aggregate_info = info_sum / yield_sum;
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      const double c2 = spec.amplitude(i, j) * spec.amplitude(i, j);
      (i == j ? m.x1 : m.x2) += c2;
    }
  }
  return m;
}

BoundCheckReport verify_bound(const AttackSpec& spec,
                              const OptimizerOptions& opt) {
  const AttackMetrics m = attack_metrics(spec);
  const int L = spec.pulses_per_packet;
  BoundCheckReport rep;
  rep.aggregate_error = m.aggregate_error;
  rep.aggregate_info = m.aggregate_info;

  double pair_phi_sum = 0.0;
  rep.pairwise_worst_slack = 1e300;
  rep.pairwise_ok = true;
  for (const auto& pm : m.per_pair) {
    const double caa = spec.amplitude(pm.a, pm.a);
    const double cba = spec.amplitude(pm.b, pm.a);
    const double cbb = spec.amplitude(pm.b, pm.b);
    const double cab = spec.amplitude(pm.a, pm.b);
    const double phi_form =
        phi_entropy(cba * cba, caa * caa) + phi_entropy(cab * cab, cbb * cbb);
    pair_phi_sum += phi_form;
    const double slack = phi_form / pm.yield - pm.holevo;
    rep.pairwise_worst_slack = std::min(rep.pairwise_worst_slack, slack);
    if (slack < -1e-9) rep.pairwise_ok = false;
  }

  const double jensen_rhs = phi_entropy((L - 1) * m.x1, m.x2);
  rep.jensen_slack = jensen_rhs - pair_phi_sum;
  rep.jensen_ok = rep.jensen_slack > -1e-9;

  if (L >= 3 && m.x1 + m.x2 > 0.0) {
    rep.constraint_slack = 2.0 * (L - 1) * m.aggregate_error / (L - 2) -
                           m.x2 / (m.x1 + m.x2);
    rep.constraint_ok = rep.constraint_slack > -1e-9;
  } else {
    rep.constraint_slack = 0.0;  // degenerate at L = 2; nothing to check
    rep.constraint_ok = true;
  }

  rep.bound_value = exact_bound_at(L, m.aggregate_error, opt);
  rep.bound_slack = rep.bound_value - m.aggregate_info;
  rep.bound_ok = rep.bound_slack > -1e-9;
  return rep;
}

AttackSpec random_attack(int pulses_per_packet, std::uint64_t seed) {
  const int L = pulses_per_packet;
  if (L < 2) throw std::invalid_argument("attack requires L >= 2");
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::exponential_distribution<double> exp1(1.0);

  AttackSpec spec;
  spec.pulses_per_packet = L;
  spec.amplitudes.resize(static_cast<std::size_t>(L) * L);
  spec.ancilla.resize(static_cast<std::size_t>(L) * L);
  for (int i = 0; i < L; ++i) {
    std::vector<double> g(L);
    double sum = 0.0;
    for (auto& gj : g) {
      gj = exp1(rng);
      sum += gj;
    }
    const double norm = 0.5 + 0.5 * uni(rng);  // row 2-norm in [0.5, 1]
    for (int j = 0; j < L; ++j) {
      spec.amplitudes[static_cast<std::size_t>(i) * L + j] =
          norm * std::sqrt(g[j] / sum);
    }
  }
  std::uniform_int_distribution<int> style_pick(0, 2);
  const int style = style_pick(rng);
  if (style == 0) {  // injective (orthonormal family)
    for (std::size_t k = 0; k < spec.ancilla.size(); ++k) {
      spec.ancilla[k] = static_cast<int>(k);
    }
  } else if (style == 1) {  // constant
    std::fill(spec.ancilla.begin(), spec.ancilla.end(), 0);
  } else {  // random with collisions
    const int labels = std::max(2, L * L / 4);
    std::uniform_int_distribution<int> label_pick(0, labels - 1);
    for (auto& a : spec.ancilla) a = label_pick(rng);
  }
  return spec;
}

OracleRunResult run_attack_trials(int pulses_per_packet, std::uint64_t trials,
                                  std::uint64_t seed, Exec exec,
                                  const OptimizerOptions& opt) {
  OracleRunResult out;
  out.scatter.resize(trials);
  if (trials == 0) return out;
  const std::vector<double> curve = bound_curve(pulses_per_packet, opt);

  std::vector<std::uint8_t> violated(trials, 0);
  for_each_index(trials, exec, [&](std::size_t t) {
    const AttackSpec spec =
        random_attack(pulses_per_packet, splitmix64(seed) ^ splitmix64(t + 1));
    const AttackMetrics m = attack_metrics(spec);
    const double e = m.aggregate_error;
    const int k = std::clamp(
        static_cast<int>(std::floor(std::min(e, 0.5) / 0.5 * kCurveSteps)), 0,
        kCurveSteps);
    double bound = curve[k];
    if (m.aggregate_info > bound + 1e-9) {
      // Staircase is conservative; settle with the exact bound at E.
      bound = exact_bound_at(pulses_per_packet, e, opt);
      if (m.aggregate_info > bound + 1e-9) violated[t] = 1;
    }
    out.scatter[t] = {t, e, m.aggregate_info, bound};
  });

  out.worst_slack = 1e300;
  for (std::uint64_t t = 0; t < trials; ++t) {
    out.violations += violated[t];
    out.worst_slack =
        std::min(out.worst_slack, out.scatter[t].bound - out.scatter[t].info);
  }
  return out;
}

BruteForceResult search_max_leakage(int pulses_per_packet, double target_error,
                                    std::uint64_t budget, std::uint64_t seed,
                                    const OptimizerOptions& opt) {
  if (target_error < 0.0) {
    throw std::invalid_argument("target error rate must be nonnegative");
  }
  BruteForceResult out;
  out.bound = exact_bound_at(pulses_per_packet, target_error, opt);
  if (budget == 0) return out;  // searched stays false
  out.searched = true;

  const int L = pulses_per_packet;
  std::mt19937_64 rng(splitmix64(seed ^ 0xB07Dull));
  auto penalized = [&](const AttackMetrics& m) {
    const double over = std::max(0.0, m.aggregate_error - target_error);
    return m.aggregate_info - 1e3 * over * over;
  };
  auto consider = [&](const AttackMetrics& m) {
    if (m.aggregate_error <= target_error) {
      out.best_info = std::max(out.best_info, m.aggregate_info);
    }
  };

  while (out.evaluations < budget) {
    AttackSpec current = random_attack(L, rng());
    // local search stays on the orthonormal-ancilla family
    for (std::size_t k = 0; k < current.ancilla.size(); ++k) {
      current.ancilla[k] = static_cast<int>(k);
    }
    AttackMetrics cm = attack_metrics(current);
    ++out.evaluations;
    consider(cm);
    double score = penalized(cm);
    double sigma = 0.1;
    int stale = 0;
    while (out.evaluations < budget && stale < 60) {
      AttackSpec cand = perturb_attack(current, sigma, rng);
      AttackMetrics candm = attack_metrics(cand);
      ++out.evaluations;
      consider(candm);
      const double cand_score = penalized(candm);
      if (cand_score > score) {
        current = std::move(cand);
        score = cand_score;
        stale = 0;
      } else {
        ++stale;
        if (stale % 10 == 0) sigma *= 0.7;
      }
    }
  }
  return out;
}

}  // namespace rrdps
