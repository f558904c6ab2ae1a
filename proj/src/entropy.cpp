#include "rrdps/entropy.hpp"

#include <cmath>
#include <stdexcept>

namespace rrdps {
namespace {

constexpr double kDust = 1e-15;

double clamp_unit(double v) {
  if (v < 0.0) {
    if (v > -kDust) return 0.0;
    throw std::domain_error("probability below 0");
  }
  if (v > 1.0) {
    if (v - 1.0 < kDust) return 1.0;
    throw std::domain_error("probability above 1");
  }
  return v;
}

double clamp_nonneg(double v, const char* what) {
  if (v < 0.0) {
    if (v > -kDust) return 0.0;
    throw std::domain_error(what);
  }
  return v;
}

double plog2p(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

}  // namespace

Probability::Probability(double value) : value_(clamp_unit(value)) {}

double binary_entropy(Probability p) {
  const double v = p.value();
  return plog2p(v) + plog2p(1.0 - v);
}

double binary_entropy(double p) { return binary_entropy(Probability(p)); }

double phi_entropy(double x, double y) {
  x = clamp_nonneg(x, "phi_entropy: negative first argument");
  y = clamp_nonneg(y, "phi_entropy: negative second argument");
  return plog2p(x) + plog2p(y) - plog2p(x + y);
}

double binary_entropy_inverse(double target) {
  if (target < 0.0 || target > 1.0) {
    throw std::domain_error("binary_entropy_inverse: target outside [0,1]");
  }
  double lo = 0.0, hi = 0.5;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    (binary_entropy(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace rrdps
