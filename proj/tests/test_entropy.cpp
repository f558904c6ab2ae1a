#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "rrdps/entropy.hpp"

using namespace rrdps;

TEST_CASE("binary entropy anchor values") {
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  // 2 - 0.75*log2(3), evaluated independently
  CHECK(binary_entropy(0.25) ==
        doctest::Approx(0.8112781244591328).epsilon(1e-14));
}

TEST_CASE("binary entropy domain handling") {
  CHECK_THROWS_AS(binary_entropy(-0.01), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(1.01), std::domain_error);
  CHECK(binary_entropy(-1e-17) == 0.0);       // projection dust
  CHECK(binary_entropy(1.0 + 1e-16) == 0.0);  // mirrored dust
}

TEST_CASE("phi anchor values") {
  CHECK(phi_entropy(0.7, 0.0) == 0.0);
  CHECK(phi_entropy(0.0, 0.7) == 0.0);
  CHECK(phi_entropy(0.5, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(phi_entropy(0.3, 0.3) == doctest::Approx(0.6).epsilon(1e-14));
  // 1.4 * h2(4/7), evaluated independently
  CHECK(phi_entropy(0.8, 0.6) ==
        doctest::Approx(1.3793193904479514).epsilon(1e-12));
  CHECK_THROWS_AS(phi_entropy(-0.1, 0.2), std::domain_error);
  CHECK_THROWS_AS(phi_entropy(0.2, -0.1), std::domain_error);
  CHECK(phi_entropy(-1e-16, 0.4) == 0.0 + phi_entropy(0.0, 0.4));
}

TEST_CASE("phi equals (x+y) h2(x/(x+y)) on random pairs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(1e-9, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = uni(rng);
    const double y = uni(rng);
    const double direct = phi_entropy(x, y);
    const double via_h2 = (x + y) * binary_entropy(x / (x + y));
    CHECK(std::abs(direct - via_h2) <= 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("phi is jointly concave") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uni(0.0, 5.0);
  std::uniform_real_distribution<double> tdist(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double a1 = uni(rng), b1 = uni(rng);
    const double a2 = uni(rng), b2 = uni(rng);
    const double t = tdist(rng);
    const double mixed =
        phi_entropy(t * a1 + (1 - t) * a2, t * b1 + (1 - t) * b2);
    const double split = t * phi_entropy(a1, b1) + (1 - t) * phi_entropy(a2, b2);
    CHECK(mixed >= split - 1e-12);
  }
}

TEST_CASE("phi is 1-homogeneous and bounded by x+y") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uni(0.0, 3.0);
  std::uniform_real_distribution<double> cdist(0.01, 8.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = uni(rng), y = uni(rng), c = cdist(rng);
    const double lhs = phi_entropy(c * x, c * y);
    const double rhs = c * phi_entropy(x, y);
    CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max(1.0, std::abs(rhs)));
    const double p = phi_entropy(x, y);
    CHECK(p >= 0.0);
    CHECK(p <= x + y + 1e-12);
  }
  // equality on the right iff x == y
  CHECK(phi_entropy(1.3, 1.3) == doctest::Approx(2.6).epsilon(1e-13));
  CHECK(phi_entropy(1.3, 1.2) < 2.5);
}

TEST_CASE("binary entropy inverse") {
  for (double p : {0.0, 0.05, 0.11, 0.25, 0.4}) {
    CHECK(binary_entropy_inverse(binary_entropy(p)) ==
          doctest::Approx(p).epsilon(1e-9));
  }
  // h2 is flat at its apex, so the inverse near 1/2 is only sqrt(ulp)-sharp
  CHECK(std::abs(binary_entropy_inverse(1.0) - 0.5) <= 1e-7);
  CHECK_THROWS_AS(binary_entropy_inverse(1.5), std::domain_error);
}
