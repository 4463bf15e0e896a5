#include "wasep/quad.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

namespace wasep::quad {

namespace {

struct Ref {
  std::vector<double> x, w;  // on [-1, 1]
  Ref() {
    using G = boost::math::quadrature::gauss<double, 30>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        x.push_back(0.0);
        w.push_back(wt[i]);
        continue;
      }
      x.push_back(a[i]);
      w.push_back(wt[i]);
      x.push_back(-a[i]);
      w.push_back(wt[i]);
    }
  }
};

const Ref& ref() {
  static const Ref r;
  return r;
}

}  // namespace

Rule gauss(double a, double b) {
  const Ref& r = ref();
  Rule out;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    out.x.push_back(c + h * r.x[i]);
    out.w.push_back(h * r.w[i]);
  }
  return out;
}

Rule uniform(double a, double b, int panels) {
  Rule out;
  const double h = (b - a) / panels;
  for (int i = 0; i < panels; ++i) out.append(gauss(a + i * h, a + (i + 1) * h));
  return out;
}

Rule graded(double a, double b, double h_min, bool both_ends) {
  Rule out;
  if (b <= a) return out;
  if (both_ends) {
    const double m = 0.5 * (a + b);
    out = graded(a, m, h_min, false);
    Rule right = graded(0.0, b - m, h_min, false);
    for (std::size_t i = 0; i < right.x.size(); ++i) {
      out.x.push_back(b - right.x[i]);
      out.w.push_back(right.w[i]);
    }
    return out;
  }
  double lo = a, width = std::max(h_min, 1e-300);
  if (width >= b - a) return gauss(a, b);
  out.append(gauss(a, a + width));
  lo = a + width;
  while (lo < b) {
    double hi = std::min(b, a + 2.0 * (lo - a));
    if (b - hi < 0.25 * (hi - lo)) hi = b;
    out.append(gauss(lo, hi));
    lo = hi;
  }
  return out;
}

}  // namespace wasep::quad
