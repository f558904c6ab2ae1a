#include "rrdps/bound.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rrdps/entropy.hpp"

namespace rrdps {
namespace {

constexpr double kGradCap = 64.0;  // bits; caps the log singularities at 0

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// ---- objective and constraint on raw weight vectors ----------------------

double raw_objective(int L, const std::vector<double>& x) {
  const int terms = static_cast<int>(x.size()) - 1;
  double acc = 0.0;
  for (int n = 1; n <= terms; ++n) {
    acc += phi_entropy((L - n) * x[n - 1], n * x[n]);
  }
  return acc / (L - 1);
}

void raw_gradient(int L, const std::vector<double>& x,
                  std::vector<double>& g) {
  std::fill(g.begin(), g.end(), 0.0);
  const int terms = static_cast<int>(x.size()) - 1;
  for (int n = 1; n <= terms; ++n) {
    const double u = (L - n) * x[n - 1];
    const double v = n * x[n];
    const double s = u + v;
    if (s <= 0.0) continue;
    const double du = u > 0.0 ? std::min(std::log2(s / u), kGradCap) : kGradCap;
    const double dv = v > 0.0 ? std::min(std::log2(s / v), kGradCap) : kGradCap;
    g[n - 1] += (L - n) * du / (L - 1);
    g[n] += n * dv / (L - 1);
  }
}

double raw_floor(int L, int N, const std::vector<double>& x) {
  double acc = 0.0;
  if (N % 2 == 1) {
    for (int n = 1; n <= (N - 1) / 2; ++n) {
      const double sa = std::sqrt((L - 2 * n) * x[2 * n - 1]);
      const double sb = std::sqrt(2.0 * n * x[2 * n]);
      acc += (sa - sb) * (sa - sb);
    }
  } else {
    for (int n = 1; n <= N / 2; ++n) {
      const double sa = std::sqrt((L - 2 * n + 1) * x[2 * n - 2]);
      const double sb = std::sqrt((2.0 * n - 1) * x[2 * n - 1]);
      acc += (sa - sb) * (sa - sb);
    }
  }
  acc += (L - N - 1) * x[N] / 2.0;
  return acc / (L - 1);
}

void floor_gradient(int L, int N, const std::vector<double>& x,
                    std::vector<double>& g) {
  std::fill(g.begin(), g.end(), 0.0);
  const double cap = kGradCap * L;
  auto add_pair = [&](int ia, int ib, double A, double B) {
    double da, db;
    if (x[ia] > 0.0) {
      da = A - std::sqrt(A * B * x[ib] / x[ia]);
    } else {
      da = x[ib] > 0.0 ? -cap : A;
    }
    if (x[ib] > 0.0) {
      db = B - std::sqrt(A * B * x[ia] / x[ib]);
    } else {
      db = x[ia] > 0.0 ? -cap : B;
    }
    g[ia] += std::clamp(da, -cap, cap) / (L - 1);
    g[ib] += std::clamp(db, -cap, cap) / (L - 1);
  };
  if (N % 2 == 1) {
    for (int n = 1; n <= (N - 1) / 2; ++n) {
      add_pair(2 * n - 1, 2 * n, L - 2.0 * n, 2.0 * n);
    }
  } else {
    for (int n = 1; n <= N / 2; ++n) {
      add_pair(2 * n - 2, 2 * n - 1, L - 2.0 * n + 1.0, 2.0 * n - 1.0);
    }
  }
  g[N] += 0.5 * (L - N - 1) / (L - 1);
}

// ---- simplex machinery ----------------------------------------------------

void project_simplex(std::vector<double>& v) {
  std::vector<double> u(v);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  for (auto& vi : v) vi = std::max(vi - tau, 0.0);
}

std::vector<double> dirichlet_point(std::size_t dim, std::mt19937_64& rng) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> x(dim);
  double sum = 0.0;
  for (auto& xi : x) {
    xi = exp1(rng);
    sum += xi;
  }
  if (sum <= 0.0) return std::vector<double>(dim, 1.0 / dim);
  for (auto& xi : x) xi /= sum;
  return x;
}

struct Ascent {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
};

using ObjFn = std::function<double(const std::vector<double>&)>;
using GradFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

// Monotone projected-gradient ascent with backtracking line search.
Ascent ascend_projected(const ObjFn& obj, const GradFn& grad,
                        std::vector<double> x, double tol, int max_iter) {
  project_simplex(x);
  double f = obj(x);
  std::vector<double> g(x.size()), trial(x.size());
  double step = 0.5;
  Ascent out;
  for (int it = 0; it < max_iter; ++it) {
    grad(x, g);
    double t = step;
    bool moved = false;
    double fn = f;
    for (int bt = 0; bt < 64; ++bt) {
      for (std::size_t k = 0; k < x.size(); ++k) trial[k] = x[k] + t * g[k];
      project_simplex(trial);
      const double fv = obj(trial);
      if (fv > f) {
        x.swap(trial);
        fn = fv;
        moved = true;
        step = std::min(t * 1.3, 1e3);
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      out.converged = true;
      break;
    }
    const bool small = (fn - f) < tol;
    f = fn;
    if (small) {
      out.converged = true;
      break;
    }
  }
  out.x = std::move(x);
  out.value = f;
  return out;
}

double linearization_gap(int L, const std::vector<double>& x) {
  std::vector<double> g(x.size());
  raw_gradient(L, x, g);
  const double gmax = *std::max_element(g.begin(), g.end());
  const double gdotx = std::inner_product(g.begin(), g.end(), x.begin(), 0.0);
  return std::max(0.0, gmax - gdotx);
}

// ---- unconstrained maximization -------------------------------------------
// The objective is concave with a tridiagonal Hessian (each phi term couples
// neighbouring weights only) and its maximizer is interior, since the
// directional derivative into any vanished coordinate diverges. Entropic
// mirror steps keep iterates strictly positive and a simplex-constrained
// Newton polish then converges quadratically.

void raw_hessian_tridiag(int L, const std::vector<double>& x,
                         std::vector<double>& diag, std::vector<double>& off) {
  const double inv_ln2 = 1.0 / std::log(2.0);
  std::fill(diag.begin(), diag.end(), 0.0);
  std::fill(off.begin(), off.end(), 0.0);
  const int terms = static_cast<int>(x.size()) - 1;
  for (int n = 1; n <= terms; ++n) {
    const double a = L - n;
    const double b = n;
    const double u = a * x[n - 1];
    const double v = b * x[n];
    const double s = u + v;
    if (s <= 0.0 || u <= 0.0 || v <= 0.0) continue;
    diag[n - 1] += -a * a * inv_ln2 * v / (u * s) / (L - 1);
    diag[n] += -b * b * inv_ln2 * u / (v * s) / (L - 1);
    off[n - 1] += a * b * inv_ln2 / s / (L - 1);
  }
}

// Solve T y = rhs for symmetric tridiagonal T (Thomas algorithm).
bool tridiag_solve(std::vector<double> diag, const std::vector<double>& off,
                   std::vector<double> rhs, std::vector<double>& y) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0) return false;
    const double w = off[i - 1] / diag[i - 1];
    diag[i] -= w * off[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  if (diag[n - 1] == 0.0) return false;
  y.resize(n);
  y[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    y[i] = (rhs[i] - off[i] * y[i + 1]) / diag[i];
  }
  for (double v : y) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Ascent maximize_interior(int L, std::vector<double> x, double tol,
                         int max_iter) {
  const std::size_t dim = x.size();
  project_simplex(x);
  // keep strictly interior for the mirror steps
  {
    double sum = 0.0;
    for (auto& xi : x) {
      xi = std::max(xi, 1e-9 / static_cast<double>(dim));
      sum += xi;
    }
    for (auto& xi : x) xi /= sum;
  }
  double f = raw_objective(L, x);
  std::vector<double> g(dim), trial(dim);

  // entropic mirror ascent warm start
  double eta = 1.0;
  for (int it = 0; it < 400; ++it) {
    raw_gradient(L, x, g);
    const double gmax = *std::max_element(g.begin(), g.end());
    bool moved = false;
    double fn = f;
    double step = eta;
    for (int bt = 0; bt < 40; ++bt) {
      double sum = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        trial[i] = x[i] * std::exp(step * (g[i] - gmax));
        sum += trial[i];
      }
      if (sum > 0.0) {
        for (auto& ti : trial) ti /= sum;
        const double fv = raw_objective(L, trial);
        if (fv > f) {
          x.swap(trial);
          fn = fv;
          moved = true;
          eta = std::min(step * 1.5, 64.0);
          break;
        }
      }
      step *= 0.5;
    }
    if (!moved) break;
    const bool small = (fn - f) < tol;
    f = fn;
    if (small) break;
  }

  // simplex-constrained Newton polish: solve H d = lambda 1 - g with
  // 1^T d = 0 using two tridiagonal solves.
  Ascent out;
  std::vector<double> diag(dim), off(dim > 0 ? dim - 1 : 0), a, b, d(dim);
  for (int it = 0; it < std::min(200, max_iter); ++it) {
    raw_gradient(L, x, g);
    raw_hessian_tridiag(L, x, diag, off);
    bool solved = tridiag_solve(diag, off, g, a);
    if (solved) {
      solved = tridiag_solve(diag, off, std::vector<double>(dim, 1.0), b);
    }
    double denom = 0.0, numer = 0.0;
    if (solved) {
      for (std::size_t i = 0; i < dim; ++i) {
        numer += a[i];
        denom += b[i];
      }
      solved = std::abs(denom) > 1e-300;
    }
    if (!solved) break;
    const double lambda = numer / denom;
    double ascent = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      d[i] = lambda * b[i] - a[i];
      ascent += d[i] * g[i];
    }
    if (ascent <= 0.0) break;  // fall back to the mirror result
    // largest step keeping the iterate strictly positive
    double tmax = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      if (d[i] < 0.0) tmax = std::min(tmax, -0.995 * x[i] / d[i]);
    }
    double t = tmax;
    bool moved = false;
    double fn = f;
    for (int bt = 0; bt < 60; ++bt) {
      double sum = 0.0;
      bool ok = true;
      for (std::size_t i = 0; i < dim; ++i) {
        trial[i] = x[i] + t * d[i];
        if (trial[i] < 0.0) {
          ok = false;
          break;
        }
        sum += trial[i];
      }
      // 1^T d = 0 only holds up to the conditioning of the solve; renormalize
      if (ok && sum > 0.5 && sum < 2.0) {
        for (auto& ti : trial) ti /= sum;
        const double fv = raw_objective(L, trial);
        if (fv > f) {
          x.swap(trial);
          fn = fv;
          moved = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!moved) break;
    const bool small = (fn - f) < tol * 1e-2;
    f = fn;
    if (small) break;
  }
  out.x = std::move(x);
  out.value = f;
  out.converged = linearization_gap(L, out.x) < 1e-6;
  return out;
}

BoundResult solve_unconstrained(int L, int N, const OptimizerOptions& opt) {
  const std::size_t dim = static_cast<std::size_t>(N) + 1;
  const int restarts = std::max(1, opt.unconstrained_restarts);
  std::vector<Ascent> runs(restarts);
  for_each_index(restarts, opt.exec, [&](std::size_t r) {
    std::vector<double> x0(dim, 1.0 / static_cast<double>(dim));
    if (r > 0) {
      std::mt19937_64 rng(splitmix64(opt.seed ^ splitmix64(0xA11CEull + r)));
      x0 = dirichlet_point(dim, rng);
    }
    runs[r] = maximize_interior(L, std::move(x0), opt.objective_tol,
                                opt.max_iterations);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].value > runs[best].value) best = r;
  }
  BoundResult res;
  res.iae = clamp01(runs[best].value);
  res.argmax.x = runs[best].x;
  res.converged = runs[best].converged;
  res.objective_gap_estimate = linearization_gap(L, runs[best].x);
  return res;
}

// ---- the zero-floor family -------------------------------------------------
// Weights with error_rate_floor == 0 form a linear family: the trailing
// coordinate vanishes (unless L == N+1, where its coefficient is already 0)
// and the square-root pairs cancel exactly. Columns below map free weights z
// onto full weight vectors; each column is normalized to unit coordinate sum
// so the z-simplex maps onto the zero-floor slice of the x-simplex.
std::vector<std::vector<double>> zero_floor_columns(int L, int N) {
  const std::size_t dim = static_cast<std::size_t>(N) + 1;
  std::vector<std::vector<double>> cols;
  auto push = [&](std::vector<double> col) {
    double s = std::accumulate(col.begin(), col.end(), 0.0);
    for (auto& c : col) c /= s;
    cols.push_back(std::move(col));
  };
  if (N % 2 == 1) {
    std::vector<double> c1(dim, 0.0);
    c1[0] = 1.0;
    push(std::move(c1));
    for (int n = 1; n <= (N - 1) / 2; ++n) {
      std::vector<double> c(dim, 0.0);
      c[2 * n - 1] = 1.0;                            // x_{2n}
      c[2 * n] = (L - 2.0 * n) / (2.0 * n);          // x_{2n+1}
      push(std::move(c));
    }
  } else {
    for (int n = 1; n <= N / 2; ++n) {
      std::vector<double> c(dim, 0.0);
      c[2 * n - 2] = 1.0;                            // x_{2n-1}
      c[2 * n - 1] = (L - 2.0 * n + 1) / (2.0 * n - 1);  // x_{2n}
      push(std::move(c));
    }
  }
  if (L == N + 1) {
    std::vector<double> c(dim, 0.0);
    c[N] = 1.0;
    push(std::move(c));
  }
  return cols;
}

std::vector<double> columns_apply(const std::vector<std::vector<double>>& cols,
                                  const std::vector<double>& z) {
  std::vector<double> x(cols.front().size(), 0.0);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += cols[k][i] * z[k];
  }
  return x;
}

// Maximize the objective over the zero-floor family (exact E = 0 optimum).
Ascent solve_zero_floor(int L, int N, const OptimizerOptions& opt) {
  const auto cols = zero_floor_columns(L, N);
  const std::size_t zdim = cols.size();
  ObjFn obj = [&](const std::vector<double>& z) {
    return raw_objective(L, columns_apply(cols, z));
  };
  GradFn grad = [&](const std::vector<double>& z, std::vector<double>& g) {
    const auto x = columns_apply(cols, z);
    std::vector<double> gx(x.size());
    raw_gradient(L, x, gx);
    for (std::size_t k = 0; k < zdim; ++k) {
      g[k] = std::inner_product(cols[k].begin(), cols[k].end(), gx.begin(), 0.0);
    }
  };
  Ascent best;
  best.value = -1.0;
  const int restarts = std::max(1, opt.unconstrained_restarts);
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> z0(zdim, 1.0 / static_cast<double>(zdim));
    if (r > 0) {
      std::mt19937_64 rng(splitmix64(opt.seed ^ splitmix64(0xF00Dull + r)));
      z0 = dirichlet_point(zdim, rng);
    }
    Ascent a = ascend_projected(obj, grad, std::move(z0), opt.objective_tol,
                                opt.max_iterations);
    if (a.value > best.value) {
      best.value = a.value;
      best.converged = a.converged;
      best.x = columns_apply(cols, a.x);
    }
  }
  return best;
}

// ---- constrained maximization ----------------------------------------------

std::vector<double> feasible_anchor(int L, int N) {
  const std::size_t dim = static_cast<std::size_t>(N) + 1;
  std::vector<double> x(dim, 0.0);
  if (N % 2 == 1) {
    x[0] = 1.0;
  } else {
    x[0] = 1.0 / L;
    x[1] = (L - 1.0) / L;
  }
  return x;
}

// The feasible set {floor <= E} is convex, so its intersection with the
// segment toward the anchor is an interval ending at the anchor; bisect for
// the near end.
std::vector<double> bisect_feasible(int L, int N, double E,
                                    const std::vector<double>& from,
                                    const std::vector<double>& anchor) {
  if (raw_floor(L, N, from) <= E) return from;
  double lo = 0.0, hi = 1.0;
  std::vector<double> mid(from.size());
  for (int it = 0; it < 90; ++it) {
    const double t = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < mid.size(); ++i) {
      mid[i] = (1.0 - t) * from[i] + t * anchor[i];
    }
    (raw_floor(L, N, mid) <= E ? hi : lo) = t;
  }
  for (std::size_t i = 0; i < mid.size(); ++i) {
    mid[i] = (1.0 - hi) * from[i] + hi * anchor[i];
  }
  return mid;
}

void y_to_x(const std::vector<double>& y, std::vector<double>& x) {
  double s = 0.0;
  for (double yi : y) s += yi * yi;
  if (s <= 0.0) {
    std::fill(x.begin(), x.end(), 1.0 / static_cast<double>(x.size()));
    return;
  }
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i] * y[i] / s;
}

struct PenaltyRun {
  std::vector<double> x;
  double value = -1.0;
  bool converged = false;
};

// Gradient ascent in y-space (x_i = y_i^2 / |y|^2 keeps the simplex built in)
// on f(x) - w * max(0, floor(x) - E)^2.
PenaltyRun penalty_start(int L, int N, double E, std::vector<double> x0,
                         const std::vector<double>& anchor) {
  const std::size_t dim = x0.size();
  std::vector<double> y(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    y[i] = std::sqrt(std::max(x0[i], 1e-6 / static_cast<double>(dim)));
  }
  std::vector<double> x(dim), gx(dim), gf(dim);
  auto eval = [&](const std::vector<double>& yy, double w) {
    y_to_x(yy, x);
    const double f = raw_objective(L, x);
    const double viol = std::max(0.0, raw_floor(L, N, x) - E);
    return f - w * viol * viol;
  };
  auto gradient = [&](const std::vector<double>& yy, double w,
                      std::vector<double>& gy) {
    y_to_x(yy, x);
    raw_gradient(L, x, gx);
    const double viol = std::max(0.0, raw_floor(L, N, x) - E);
    if (viol > 0.0) {
      floor_gradient(L, N, x, gf);
      for (std::size_t i = 0; i < dim; ++i) gx[i] -= 2.0 * w * viol * gf[i];
    }
    double s = 0.0, dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      s += yy[i] * yy[i];
      dot += x[i] * gx[i];
    }
    for (std::size_t i = 0; i < dim; ++i) {
      gy[i] = 2.0 * yy[i] * (gx[i] - dot) / s;
    }
  };

  bool converged = true;
  std::vector<double> gy(dim), trial(dim);
  for (double w = 16.0; w <= 1.1e12; w *= 4.0) {
    double f = eval(y, w);
    double step = 0.25;
    bool level_converged = false;
    for (int it = 0; it < 2500; ++it) {
      gradient(y, w, gy);
      double t = step;
      bool moved = false;
      double fn = f;
      for (int bt = 0; bt < 60; ++bt) {
        double norm = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          trial[i] = y[i] + t * gy[i];
          norm += trial[i] * trial[i];
        }
        norm = std::sqrt(norm);
        if (norm > 0.0) {
          for (auto& ti : trial) ti /= norm;
        }
        const double fv = eval(trial, w);
        if (fv > f) {
          y.swap(trial);
          fn = fv;
          moved = true;
          step = std::min(t * 1.3, 64.0);
          break;
        }
        t *= 0.5;
      }
      if (!moved) {
        level_converged = true;
        break;
      }
      const bool small = (fn - f) < 1e-13;
      f = fn;
      if (small) {
        level_converged = true;
        break;
      }
    }
    converged = converged && level_converged;
  }

  y_to_x(y, x);
  PenaltyRun run;
  run.x = bisect_feasible(L, N, E, x, anchor);
  run.value = raw_objective(L, run.x);
  run.converged = converged;
  return run;
}

BoundResult solve_constrained(int L, int N, double E,
                              const OptimizerOptions& opt) {
  // Saturated constraint: the unconstrained argmax is already feasible.
  BoundResult uncon = solve_unconstrained(L, N, opt);
  if (raw_floor(L, N, uncon.argmax.x) <= E + 1e-15) return uncon;

  const std::size_t dim = static_cast<std::size_t>(N) + 1;
  const auto anchor = feasible_anchor(L, N);

  // E == 0 pins the weights to the zero-floor family exactly; the penalty
  // path cannot reach its relative interior, so optimize the family itself.
  Ascent zero = solve_zero_floor(L, N, opt);
  if (E <= 0.0) {
    BoundResult res;
    res.iae = clamp01(zero.value);
    res.argmax.x = zero.x;
    res.converged = zero.converged;
    res.objective_gap_estimate = 0.0;
    return res;
  }

  const int restarts = std::max(2, opt.constrained_restarts);
  std::vector<PenaltyRun> runs(restarts);
  for_each_index(restarts, opt.exec, [&](std::size_t r) {
    std::vector<double> x0;
    if (r == 0) {
      x0 = bisect_feasible(L, N, E, uncon.argmax.x, anchor);
    } else if (r == 1) {
      x0 = anchor;
    } else {
      std::mt19937_64 rng(splitmix64(opt.seed ^ splitmix64(0xC0FFEEull + r)));
      x0 = dirichlet_point(dim, rng);
      const double blend = (r % 2 == 0) ? 0.3 : 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        x0[i] = (1.0 - blend) * x0[i] + blend * anchor[i];
      }
    }
    runs[r] = penalty_start(L, N, E, std::move(x0), anchor);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].value > runs[best].value) best = r;
  }
  double value = runs[best].value;
  std::vector<double> xbest = runs[best].x;
  bool converged = runs[best].converged;
  if (zero.value > value) {
    value = zero.value;
    xbest = zero.x;
    converged = zero.converged;
  }

  // Agreement spread across the top runs as a gap indicator.
  std::vector<double> vals;
  vals.reserve(runs.size());
  for (const auto& run : runs) vals.push_back(run.value);
  std::sort(vals.begin(), vals.end(), std::greater<double>());
  const std::size_t k = std::min<std::size_t>(vals.size(), 5);
  double spread = 0.0;
  for (std::size_t i = 0; i < k; ++i) spread = std::max(spread, value - vals[i]);

  BoundResult res;
  res.iae = clamp01(value);
  res.argmax.x = std::move(xbest);
  res.converged = converged;
  res.objective_gap_estimate = spread;
  return res;
}

}  // namespace

void BoundQuery::validate() const {
  if (pulses_per_packet < 2) {
    throw std::invalid_argument("bound query requires L >= 2");
  }
  if (photon_number < 1) {
    throw std::invalid_argument("bound query requires N >= 1");
  }
  if (mode != BoundMode::Original &&
      pulses_per_packet < photon_number + 1) {
    throw std::invalid_argument("simplex bound modes require L >= N+1");
  }
  if ((mode == BoundMode::Constrained) != error_rate.has_value()) {
    throw std::invalid_argument(
        "error_rate must be present exactly for the constrained mode");
  }
  if (error_rate && (*error_rate < 0.0 || *error_rate > 0.5)) {
    throw std::invalid_argument("error_rate outside [0, 0.5]");
  }
}

void SimplexWeights::validate() const {
  if (x.empty()) throw std::invalid_argument("empty simplex weights");
  double sum = 0.0;
  for (double xi : x) {
    if (xi < 0.0) throw std::invalid_argument("negative simplex weight");
    sum += xi;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("simplex weights do not sum to 1");
  }
}

double leakage_objective(int pulses_per_packet, const SimplexWeights& weights) {
  const int N = static_cast<int>(weights.x.size()) - 1;
  if (N < 1 || pulses_per_packet < N + 1) {
    throw std::invalid_argument(
        "leakage_objective: weights length incompatible with L");
  }
  weights.validate();
  return raw_objective(pulses_per_packet, weights.x);
}

double error_rate_floor(int pulses_per_packet, int photon_number,
                        const SimplexWeights& weights) {
  if (static_cast<int>(weights.x.size()) != photon_number + 1) {
    throw std::invalid_argument("error_rate_floor: weights length != N+1");
  }
  if (pulses_per_packet < photon_number + 1) {
    throw std::invalid_argument("error_rate_floor: requires L >= N+1");
  }
  weights.validate();
  return raw_floor(pulses_per_packet, photon_number, weights.x);
}

BoundResult iae_bound(const BoundQuery& query, const OptimizerOptions& opt) {
  query.validate();
  const int L = query.pulses_per_packet;
  const int N = query.photon_number;
  switch (query.mode) {
    case BoundMode::Original: {
      BoundResult res;
      const double ratio = static_cast<double>(N) / (L - 1);
      res.iae = ratio < 0.5 ? binary_entropy(ratio) : 1.0;
      res.converged = true;
      return res;
    }
    case BoundMode::Unconstrained:
      return solve_unconstrained(L, N, opt);
    case BoundMode::Constrained:
      return solve_constrained(L, N, *query.error_rate, opt);
  }
  throw std::logic_error("unreachable bound mode");
}

std::optional<double> tolerant_error_rate(int pulses_per_packet,
                                          int photon_number, BoundMode mode,
                                          const OptimizerOptions& opt) {
  BoundQuery probe;
  probe.pulses_per_packet = pulses_per_packet;
  probe.photon_number = photon_number;
  probe.mode = mode;
  if (mode == BoundMode::Constrained) probe.error_rate = 0.0;
  probe.validate();

  double fixed_info = 0.0;
  if (mode != BoundMode::Constrained) {
    fixed_info = iae_bound(probe, opt).iae;
  }
  auto info_at = [&](double E) {
    if (mode != BoundMode::Constrained) return fixed_info;
    BoundQuery q = probe;
    q.error_rate = E;
    return iae_bound(q, opt).iae;
  };
  auto rate = [&](double E) { return 1.0 - binary_entropy(E) - info_at(E); };

  if (rate(0.0) <= 0.0) return std::nullopt;
  double lo = 0.0, hi = 0.5;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (rate(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool leakage_below_one(int pulses_per_packet, int photon_number,
                       const OptimizerOptions& opt) {
  if (photon_number > pulses_per_packet - 2) {
    throw std::invalid_argument("leakage_below_one: requires N <= L-2");
  }
  BoundQuery q;
  q.pulses_per_packet = pulses_per_packet;
  q.photon_number = photon_number;
  q.mode = BoundMode::Unconstrained;
  return iae_bound(q, opt).iae < 1.0 - 1e-6;
}

const char* bound_mode_name(BoundMode mode) {
  switch (mode) {
    case BoundMode::Original:
      return "original";
    case BoundMode::Unconstrained:
      return "unconstrained";
    case BoundMode::Constrained:
      return "constrained";
  }
  return "?";
}

std::optional<BoundMode> bound_mode_from_name(const std::string& name) {
  if (name == "original") return BoundMode::Original;
  if (name == "unconstrained") return BoundMode::Unconstrained;
  if (name == "constrained") return BoundMode::Constrained;
  return std::nullopt;
}

}  // namespace rrdps
