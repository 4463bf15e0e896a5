#pragma once

// Discrete Hoelder norms and a computable negative-regularity seminorm on
// the period-2 lattice circle.

#include <functional>
#include <vector>

#include "wasep/lattice.hpp"

namespace wasep::norms {

// sup |f| + sup_{0 < |x - y| <= 1} |f(x) - f(y)| / |x - y|^alpha for values at
// x_i = i * h. With periodic = true the points wrap with period size * h.
double holder_norm(const std::vector<double>& f, double h, double alpha, bool periodic = false);
double holder_norm(const LatticeField& f, double alpha);

// A test function supported in [-1, 1] with its first r derivatives.
struct TestFunction {
  std::function<double(double)> f;
  double value_at_zero = 0;
};

// Bumps (1 - y^2)^{r+1} and y (1 - y^2)^{r+1}, each divided by its C^r norm.
std::vector<TestFunction> bump_family(int r);

struct BesovOptions {
  std::vector<TestFunction> family;  // empty: bump_family(r) with r the smallest integer > -alpha
  std::vector<double> scales;        // empty: dyadic 2^-n down to eps, plus eps itself
};

struct BesovValue {
  double value = 0;
  double scale = 0;  // lambda of the maximiser
  long center = 0;   // site offset of the maximiser
};

// sup over the family, centres on the lattice and the given scales of
// (lambda v eps)^{-alpha} |eps sum_y f(y) phi_x^lambda(y)|. A lower bound of the
// full seminorm over all C^r test functions.
BesovValue besov_seminorm(const LatticeField& f, double alpha, const BesovOptions& opt = {});
// Dyadic scales in [eps, 1] together with eps.
std::vector<double> dyadic_scales(double eps);

struct SpaceTimeHolder {
  double sup = 0, quotient = 0;
  double value() const { return sup + quotient; }
};
// sup |f| + sup over grid pairs of |f(z) - f(z')| / ||z - z'||_s^alpha with
// ||(t, x)||_s = sqrt|t| + |x| and x measured on the circle.
SpaceTimeHolder spacetime_holder(const SpaceTimeField& f, double alpha);

}  // namespace wasep::norms
