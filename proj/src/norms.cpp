#include "wasep/norms.hpp"

#include <algorithm>
#include <cmath>

namespace wasep::norms {

namespace {

// coefficients of (1 - y^2)^n times y^odd, lowest degree first
std::vector<double> bump_poly(int n, bool odd) {
  std::vector<double> c(2 * n + 2, 0.0);
  double b = 1.0;  // binomial(n, k) (-1)^k
  for (int k = 0; k <= n; ++k) {
    c[2 * k + (odd ? 1 : 0)] = b;
    b *= -static_cast<double>(n - k) / (k + 1);
  }
  return c;
}

std::vector<double> derive(const std::vector<double>& c) {
  std::vector<double> d(c.size() > 1 ? c.size() - 1 : 1, 0.0);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
  return d;
}

double horner(const std::vector<double>& c, double y) {
  double s = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) s = s * y + c[i];
  return s;
}

TestFunction normalised_bump(int r, bool odd) {
  auto c = bump_poly(r + 1, odd);
  // C^r norm: largest sup of the first r derivatives, sampled finely
  double norm = 0.0;
  auto d = c;
  for (int j = 0; j <= r; ++j) {
    for (int i = 0; i <= 20000; ++i) norm = std::max(norm, std::abs(horner(d, -1.0 + i / 10000.0)));
    d = derive(d);
  }
  norm *= 1.0 + 1e-6;  // sampling can only miss the sup from below
  for (double& v : c) v /= norm;
  TestFunction t;
  t.f = [c](double y) { return std::abs(y) >= 1.0 ? 0.0 : horner(c, y); };
  t.value_at_zero = c[0];
  return t;
}

}  // namespace

double holder_norm(const std::vector<double>& f, double h, double alpha, bool periodic) {
  const long n = static_cast<long>(f.size());
  if (n == 0) return 0.0;
  double sup = 0.0;
  for (double v : f) sup = std::max(sup, std::abs(v));
  // offsets with 0 < m h <= 1 (a hair of slack for rounding in h)
  long mmax = static_cast<long>(std::floor(1.0 / h + 1e-9));
  if (!periodic) mmax = std::min(mmax, n - 1);
  double q = 0.0;
  for (long m = 1; m <= mmax; ++m) {
    const double w = std::pow(m * h, -alpha);
    const long imax = periodic ? n : n - m;
    for (long i = 0; i < imax; ++i) {
      const long j = periodic ? (i + m) % n : i + m;
      q = std::max(q, std::abs(f[static_cast<std::size_t>(i)] - f[static_cast<std::size_t>(j)]) * w);
    }
  }
  return sup + q;
}

double holder_norm(const LatticeField& f, double alpha) { return holder_norm(f.v, f.eps(), alpha, true); }

std::vector<TestFunction> bump_family(int r) {
  if (r < 0) throw ParameterError("test-function order must be non-negative");
  return {normalised_bump(r, false), normalised_bump(r, true)};
}

std::vector<double> dyadic_scales(double eps) {
  std::vector<double> s;
  for (double l = 1.0; l >= eps; l *= 0.5) s.push_back(l);
  if (s.empty() || s.back() != eps) s.push_back(eps);
  return s;
}

BesovValue besov_seminorm(const LatticeField& f, double alpha, const BesovOptions& opt) {
  if (!(alpha < 0)) throw ParameterError("the seminorm is for negative regularity");
  const double e = f.eps();
  const int r = static_cast<int>(std::floor(-alpha)) + 1;
  const auto family = opt.family.empty() ? bump_family(r) : opt.family;
  const auto scales = opt.scales.empty() ? dyadic_scales(e) : opt.scales;
  const long n = f.size();
  BesovValue best;
  for (double lam : scales) {
    if (!(lam > 0 && lam <= 1.0)) throw ParameterError("scales must lie in (0, 1]");
    const double pref = std::pow(std::max(lam, e), -alpha) * e / lam;
    // window |m eps| < lam, capped at one period
    const long w = std::min(static_cast<long>(std::ceil(lam / e)), n / 2);
    for (const auto& phi : family) {
      std::vector<double> weight(static_cast<std::size_t>(2 * w + 1));
      for (long m = -w; m <= w; ++m) weight[static_cast<std::size_t>(m + w)] = phi.f(m * e / lam);
      for (long c = -f.N; c <= f.N; ++c) {
        double s = 0.0;
        for (long m = -w; m <= w; ++m) s += f.at(c + m) * weight[static_cast<std::size_t>(m + w)];
        const double v = pref * std::abs(s);
        if (v > best.value) best = {v, lam, c};
      }
    }
  }
  return best;
}

SpaceTimeHolder spacetime_holder(const SpaceTimeField& f, double alpha) {
  SpaceTimeHolder out;
  const int n = f.sites(), nt = f.nt();
  const double e = f.eps(), period = 2.0;
  for (const auto& s : f.slices)
    for (double v : s) out.sup = std::max(out.sup, std::abs(v));
  for (int a = 0; a <= nt; ++a)
    for (int b = a; b <= nt; ++b) {
      const double st = std::sqrt(f.dt * (b - a));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (a == b && j <= i) continue;
          double dx = std::abs(i - j) * e;
          dx = std::min(dx, period - dx);
          const double d = st + dx;
          const double diff = std::abs(f.slices[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] -
                                       f.slices[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]);
          out.quotient = std::max(out.quotient, diff / std::pow(d, alpha));
        }
    }
  return out;
}

}  // namespace wasep::norms
