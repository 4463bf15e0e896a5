#pragma once

#include <vector>

namespace wasep::quad {

struct Rule {
  std::vector<double> x, w;
  void append(const Rule& o) {
    x.insert(x.end(), o.x.begin(), o.x.end());
    w.insert(w.end(), o.w.begin(), o.w.end());
  }
};

// 30-point Gauss-Legendre on [a, b].
Rule gauss(double a, double b);
// Composite rule on [a, b] with panels refined geometrically towards a
// (and towards b when both_ends), smallest panel about h_min.
Rule graded(double a, double b, double h_min, bool both_ends = false);
// Composite Gauss-Legendre with n equal panels.
Rule uniform(double a, double b, int panels);

}  // namespace wasep::quad
