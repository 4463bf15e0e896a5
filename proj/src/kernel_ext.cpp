#include "wasep/kernel_ext.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wasep/kernels.hpp"
#include "wasep/lattice.hpp"
#include "wasep/quad.hpp"

namespace wasep::ext {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kExtent = 800.0;
constexpr double kStep = 1e-3;
constexpr int kPanels = 16;
constexpr int kReseed = 256;

double bump(double y, double delta) {
  const double u = y / delta;
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

// parity of g^(q): even for q even, odd for q odd
double parity(int q) { return q % 2 == 0 ? 1.0 : -1.0; }

}  // namespace

double InterpKernel::sinc(double x, int q) {
  if (std::abs(x) < 0.1) {
    // sum_n (-1)^n (pi x)^{2n} / (2n+1)!, differentiated term by term
    double s = 0.0, coef = 1.0;  // coef = (-1)^n pi^{2n} / (2n+1)!
    for (int n = 0; n < 14; ++n) {
      const int p = 2 * n;
      if (p >= q) {
        double d = coef;
        for (int i = 0; i < q; ++i) d *= p - i;
        s += d * std::pow(x, p - q);
      }
      coef *= -kPi * kPi / ((p + 2.0) * (p + 3.0));
    }
    return s;
  }
  const double s = std::sin(kPi * x), c = std::cos(kPi * x);
  switch (q) {
    case 0: return s / (kPi * x);
    case 1: return c / x - s / (kPi * x * x);
    case 2: return -kPi * s / x - 2.0 * c / (x * x) + 2.0 * s / (kPi * x * x * x);
    default: throw ParameterError("sinc derivative order must be 0, 1 or 2");
  }
}

InterpKernel::InterpKernel(double delta) : delta_(delta), extent_(kExtent), h_(kStep) {
  if (!(delta > 0.0 && delta < 0.25)) throw ParameterError("bump half-width must lie in (0, 1/4)");
  const auto rule = quad::uniform(0.0, delta, kPanels);
  double mass = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) mass += 2.0 * rule.w[i] * bump(rule.x[i], delta);
  y_ = rule.x;
  wpsi_.resize(y_.size());
  for (std::size_t i = 0; i < y_.size(); ++i) wpsi_[i] = 2.0 * rule.w[i] * bump(y_[i], delta) / mass;

  // g^(q)(x) = 2 int_0^delta psi(y) (2 pi y)^q cos^(q)(2 pi x y) dy, tabulated
  // by rotating e^{2 pi i n h y} node by node
  const std::size_t M = static_cast<std::size_t>(std::llround(extent_ / h_));
  const std::size_t J = y_.size();
  table_.assign(3, std::vector<double>(M + 1));
  std::vector<double> a0(J), a1(J), a2(J), cr(J), ci(J), zr(J), zi(J);
  for (std::size_t j = 0; j < J; ++j) {
    const double w = 2.0 * kPi * y_[j];
    a0[j] = wpsi_[j];
    a1[j] = -wpsi_[j] * w;
    a2[j] = -wpsi_[j] * w * w;
    cr[j] = std::cos(w * h_);
    ci[j] = std::sin(w * h_);
  }
  for (std::size_t n = 0; n <= M; ++n) {
    if (n % kReseed == 0) {
      for (std::size_t j = 0; j < J; ++j) {
        const double ph = 2.0 * kPi * y_[j] * h_ * static_cast<double>(n);
        zr[j] = std::cos(ph);
        zi[j] = std::sin(ph);
      }
    }
    double s0 = 0, s1 = 0, s2 = 0;
    for (std::size_t j = 0; j < J; ++j) {
      s0 += a0[j] * zr[j];
      s1 += a1[j] * zi[j];
      s2 += a2[j] * zr[j];
      const double r = zr[j] * cr[j] - zi[j] * ci[j];
      zi[j] = zr[j] * ci[j] + zi[j] * cr[j];
      zr[j] = r;
    }
    table_[0][n] = s0;
    table_[1][n] = s1;
    table_[2][n] = s2;
  }

  // per unit cell maxima of |phi^(q)| and their suffix sums
  const std::size_t cells = static_cast<std::size_t>(extent_) - 1;
  const std::size_t per = static_cast<std::size_t>(std::llround(1.0 / h_));
  cell_max_.assign(3, std::vector<double>(cells, 0.0));
  suffix_.assign(3, std::vector<double>(cells + 1, 0.0));
  for (int q = 0; q <= 2; ++q) {
    for (std::size_t c = 0; c < cells; ++c) {
      double m = 0.0;
      for (std::size_t i = 0; i <= per; ++i) m = std::max(m, std::abs(phi(static_cast<double>(c * per + i) * h_, q)));
      cell_max_[q][c] = m;
    }
    for (std::size_t c = cells; c-- > 0;) suffix_[q][c] = suffix_[q][c + 1] + cell_max_[q][c];
  }

  const auto ck = check();
  if (ck.phi0_err > 1e-10) throw KernelBuildError("phi(0) differs from 1", 0.0, ck.phi0_err);
  if (ck.integer_err > 1e-10) throw KernelBuildError("phi does not vanish at the integers", 0.0, ck.integer_err);
  if (ck.unity_err > 1e-8) throw KernelBuildError("translates of phi do not sum to one", ck.unity_worst_x, ck.unity_err);
}

double InterpKernel::g_direct(double x, int q) const {
  if (q < 0 || q > 2) throw ParameterError("derivative order must be 0, 1 or 2");
  // keep a few nodes per oscillation of cos(2 pi x y) over [0, delta]
  const int panels = std::max(kPanels, static_cast<int>(std::ceil(std::abs(x) * delta_ / 4.0)));
  const auto rule = quad::uniform(0.0, delta_, panels);
  double mass = 0.0, s = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double y = rule.x[i], w = 2.0 * rule.w[i] * bump(y, delta_), a = 2.0 * kPi * y;
    mass += w;
    switch (q) {
      case 0: s += w * std::cos(a * x); break;
      case 1: s -= w * a * std::sin(a * x); break;
      default: s -= w * a * a * std::cos(a * x); break;
    }
  }
  return s / mass;
}

double InterpKernel::g(double x, int q) const {
  if (q < 0 || q > 2) throw ParameterError("derivative order must be 0, 1 or 2");
  const double ax = std::abs(x), sg = x < 0 ? parity(q) : 1.0;
  if (ax > extent_ - 4.0 * h_) return sg * g_direct(ax, q);
  const auto& t = table_[static_cast<std::size_t>(q)];
  // six-point barycentric interpolation on the uniform grid, reflecting
  // through 0 by parity
  const long n0 = static_cast<long>(std::floor(ax / h_)) - 2;
  static constexpr double w[6] = {1, -5, 10, -10, 5, -1};
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 6; ++i) {
    const long n = n0 + i;
    const double xi = static_cast<double>(n) * h_;
    const double fi = n >= 0 ? t[static_cast<std::size_t>(n)] : parity(q) * t[static_cast<std::size_t>(-n)];
    const double d = ax - xi;
    if (d == 0.0) return sg * fi;
    num += w[i] * fi / d;
    den += w[i] / d;
  }
  return sg * num / den;
}

double InterpKernel::phi(double x, int q) const {
  switch (q) {
    case 0: return sinc(x) * g(x);
    case 1: return sinc(x, 1) * g(x) + sinc(x) * g(x, 1);
    case 2: return sinc(x, 2) * g(x) + 2.0 * sinc(x, 1) * g(x, 1) + sinc(x) * g(x, 2);
    default: throw ParameterError("derivative order must be 0, 1 or 2");
  }
}

double InterpKernel::tail_bound(double R, int q) const {
  if (q < 0 || q > 2) throw ParameterError("derivative order must be 0, 1 or 2");
  const auto& s = suffix_[static_cast<std::size_t>(q)];
  const std::size_t c = static_cast<std::size_t>(std::max(0.0, std::floor(R)));
  if (c >= s.size()) return 0.0;
  // one lattice point per half-open unit cell on each side
  return 2.0 * s[c];
}

int InterpKernel::radius_for(double tol, int q) const {
  const auto& s = suffix_[static_cast<std::size_t>(q)];
  for (std::size_t c = 1; c + 1 < s.size(); ++c)
    if (2.0 * s[c] <= tol) return static_cast<int>(c);
  throw TailError("no truncation radius inside the tabulated range meets the tolerance", 2.0 * s[s.size() - 2]);
}

KernelCheck InterpKernel::check() const {
  KernelCheck ck;
  ck.phi0_err = std::abs(phi(0.0) - 1.0);
  for (int k = 1; k <= 60; ++k) ck.integer_err = std::max({ck.integer_err, std::abs(phi(k)), std::abs(phi(-k))});
  const int R = static_cast<int>(extent_) - 2;
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    double s = 0.0;
    for (int k = -R; k <= R; ++k) s += phi(x + k);
    if (std::abs(s - 1.0) > ck.unity_err) {
      ck.unity_err = std::abs(s - 1.0);
      ck.unity_worst_x = x;
    }
  }
  return ck;
}

const InterpKernel& default_kernel() {
  static const InterpKernel k;
  return k;
}

RangeFn pointwise(std::function<double(double, long)> u) {
  return [u = std::move(u)](double t, long k0, long k1, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(k1 - k0 + 1));
    for (long k = k0; k <= k1; ++k) out[static_cast<std::size_t>(k - k0)] = u(t, k);
  };
}

Extension::Extension(const InterpKernel& K, double eps, RangeFn u, double u_sup, double tol, int max_q)
    : K_(&K), eps_(eps), u_(std::move(u)), R_(1), tail_(0.0) {
  if (!(eps > 0)) throw ParameterError("eps must be positive");
  if (max_q < 0 || max_q > 2) throw ParameterError("derivative order must be 0, 1 or 2");
  if (u_sup > 0) {
    for (int q = 0; q <= max_q; ++q) R_ = std::max(R_, K.radius_for(tol / u_sup, q));
    for (int q = 0; q <= max_q; ++q) tail_ = std::max(tail_, u_sup * K.tail_bound(R_, q) * std::pow(eps, -q));
  }
}

double Extension::operator()(double t, double x, int q) const {
  const double s = x / eps_;
  const long kc = std::lround(s), k0 = kc - R_, k1 = kc + R_;
  std::vector<double> buf;
  u_(t, k0, k1, buf);
  double acc = 0.0;
  for (long k = k0; k <= k1; ++k) acc += K_->phi(s - static_cast<double>(k), q) * buf[static_cast<std::size_t>(k - k0)];
  return acc * std::pow(eps_, -q);
}

double Extension::lattice(double t, long k) const {
  std::vector<double> buf;
  u_(t, k, k, buf);
  return buf[0];
}

Extension extend_heat_kernel(double eps, double tol, const InterpKernel& K) {
  RangeFn u = [eps](double t, long k0, long k1, std::vector<double>& out) {
    const long kmax = std::max(std::abs(k0), std::abs(k1));
    const long reach = t > 0 ? kern::bessel_reach(t / (eps * eps)) + 1 : 1;
    const auto row = kern::G_row(eps, t, static_cast<int>(std::min(kmax, reach)));
    out.assign(static_cast<std::size_t>(k1 - k0 + 1), 0.0);
    for (long k = k0; k <= k1; ++k) {
      const std::size_t a = static_cast<std::size_t>(std::abs(k));
      if (a < row.size()) out[static_cast<std::size_t>(k - k0)] = row[a];
    }
  };
  return Extension(K, eps, std::move(u), 1.0 / eps, tol, 1);
}

DecayReport verify_decay_transfer(const Extension& U, int j, double beta, const std::vector<double>& ts,
                                  const std::vector<double>& xs) {
  if (j < 0 || j > 1) throw ParameterError("spatial derivative order must be 0 or 1");
  DecayReport r;
  if (xs.empty() || ts.empty()) return r;
  const double e = U.eps();
  const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
  const long k0 = static_cast<long>(std::floor(*xlo / e)), k1 = static_cast<long>(std::ceil(*xhi / e));
  auto weight = [&](double t, double x) { return std::pow(std::sqrt(t) + std::abs(x) + e, j + beta); };
  for (double t : ts) {
    for (long k = k0; k <= k1; ++k) {
      const double v = j == 0 ? U.lattice(t, k) : (U.lattice(t, k) - U.lattice(t, k - 1)) / e;
      r.lattice_ratio = std::max(r.lattice_ratio, std::abs(v) * weight(t, e * static_cast<double>(k)));
    }
    for (double x : xs) {
      const double v = std::abs(U(t, x, j)) * weight(t, x);
      if (v > r.ext_ratio) {
        r.ext_ratio = v;
        r.worst_t = t;
        r.worst_x = x;
      }
    }
  }
  r.ratio = r.lattice_ratio > 0 ? r.ext_ratio / r.lattice_ratio : (r.ext_ratio > 0 ? INFINITY : 0.0);
  r.flagged = r.ratio > 10.0;
  return r;
}

double moment_sum(const InterpKernel& K, double x, int p, int q, int R) {
  double s = 0.0;
  for (long l = static_cast<long>(std::ceil(x - R)); l <= static_cast<long>(std::floor(x + R)); ++l) {
    const double d = x - static_cast<double>(l);
    s += std::pow(d, p) * K.phi(d, q);
  }
  return s;
}

}  // namespace wasep::ext
