#include "wasep/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wasep {

int n_of_eps(double eps) {
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  const double n = (2.0 / eps - 1.0) / 2.0;
  const long r = std::lround(n);
  if (r < 1 || std::abs(n - r) > 1e-9 * std::max(1.0, n))
    throw ParameterError("eps = " + std::to_string(eps) + " is not of the form 2/(2N+1)");
  return static_cast<int>(r);
}

double SpaceTimeField::sup() const {
  double m = 0.0;
  for (const auto& s : slices)
    for (double v : s) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace wasep
