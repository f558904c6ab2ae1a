#pragma once

namespace rrdps {

// Probability validated to [0,1]. Negative dust below 1e-15 in magnitude
// (simplex projections routinely produce -1e-17-scale values) is clamped to
// 0, and the mirrored dust above 1 is clamped to 1; anything further out of
// range throws std::domain_error.
class Probability {
 public:
  explicit Probability(double value);
  double value() const { return value_; }

 private:
  double value_;
};

// Binary entropy in bits, 0*log2(0) = 0.
double binary_entropy(Probability p);
double binary_entropy(double p);

// phi(x,y) = -x log2 x - y log2 y + (x+y) log2(x+y) for x,y >= 0, in bits.
// Equals (x+y) * binary_entropy(x/(x+y)) when x+y > 0. Jointly concave,
// 1-homogeneous, symmetric, and 0 <= phi(x,y) <= x+y.
double phi_entropy(double x, double y);

// Largest p in [0, 1/2] with binary_entropy(p) == target, target in [0,1].
double binary_entropy_inverse(double target);

}  // namespace rrdps
