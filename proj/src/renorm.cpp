#include "wasep/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "wasep/kernels.hpp"
#include "wasep/lattice.hpp"
#include "wasep/quad.hpp"

namespace wasep::renorm {

namespace {

constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;

// Neumaier compensated sum
struct Acc {
  double s = 0, c = 0;
  void add(double x) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

struct CAcc {
  Acc re, im;
  void add(cd z) {
    re.add(z.real());
    im.add(z.imag());
  }
};

}  // namespace

double dirichlet(int N, double x) {
  const double h = 0.5 * x;
  const double s = std::sin(h);
  // near 2 pi Z use the limit (2N+1) cos((N+1/2)x)/cos(x/2)
  if (std::abs(s) < 1e-12) return (2.0 * N + 1.0) * std::cos((N + 0.5) * x) / std::cos(h);
  return std::sin((N + 0.5) * x) / s;
}

double dirichlet_direct(int N, double x) {
  Acc a;
  for (int k = -N; k <= N; ++k) a.add(std::cos(k * x));
  return a.value();
}

ConstPair pair_sum_constants(int N) {
  using kern::f_torus;
  using kern::m_torus_minus;
  using kern::m_torus_plus;
  CAcc a1, a2;
  for (int k = -N; k <= N; ++k) {
    if (k == 0) continue;
    const cd mm = m_torus_minus(N, k), mp = m_torus_plus(N, k), mpn = m_torus_plus(N, -k);
    const double f = f_torus(N, k);
    a1.add(-mm * mm * mpn / (8.0 * f * f));
    a2.add(-mm * mp * mm / (8.0 * f * f));
  }
  ConstPair out;
  out.C1 = a1.re.value();
  out.C2 = a2.re.value();
  out.imag_residue = std::max(std::abs(a1.im.value()), std::abs(a2.im.value()));
  return out;
}

std::complex<double> triple_sum(int N, int a, int b, int c) {
  auto m = [N](int sign, int k) { return sign > 0 ? kern::m_torus_plus(N, k) : kern::m_torus_minus(N, k); };
  CAcc acc;
  for (int k = -N; k <= N; ++k) {
    if (k == 0) continue;
    const double f = kern::f_torus(N, k);
    acc.add(-m(a, k) * m(b, k) * m(c, -k) / (8.0 * f * f));
  }
  return {acc.re.value(), acc.im.value()};
}

ConstPair second_order_constants(int N) {
  using kern::f_torus;
  using kern::m_torus_minus;
  using kern::m_torus_plus;
  const double e = eps_of(N);
  CAcc a1, a2;
  for (int k = -N; k <= N; ++k) {
    if (k == 0) continue;
    const cd mm = m_torus_minus(N, k), mp = m_torus_plus(N, k), mpn = m_torus_plus(N, -k);
    const double f = f_torus(N, k);
    a1.add(-e / 8.0 * mp * mp * mm * mpn / (f * f));
    a2.add(-e / 8.0 * mm * mp * mm * mpn / (f * f));
  }
  ConstPair out;
  out.C1 = a1.re.value();
  out.C2 = a2.re.value();
  out.imag_residue = std::max(std::abs(a1.im.value()), std::abs(a2.im.value()));
  return out;
}

ConstPair second_order_closed(int N) {
  const double e = eps_of(N);
  ConstPair out;
  out.C1 = 0.5 * e * (2.0 * N);
  out.C2 = 0.5 * e * (dirichlet(N, -kPi * e) - 1.0);
  return out;
}

DoubleSum logarithmic_combination(int N) {
  Acc d, r, o;
  for (int k = -N; k <= N; ++k) {
    if (k == 0) continue;
    const double kk = k;
    r.add(1.0 / (kk * kk));
    o.add(1.0 / kk);
    for (int l = -N; l <= N; ++l) {
      if (l == 0 || l == k) continue;
      const double ll = l;
      d.add((1.0 - 2.0 * ll / kk) / (kk * kk + ll * ll - kk * ll));
    }
  }
  return {d.value() / (kPi * kPi), r.value() / (kPi * kPi), o.value()};
}

double smooth_cutoff(double u) {
  auto h = [](double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; };
  if (u <= 0.5) return 1.0;
  if (u >= 1.0) return 0.0;
  const double a = h(1.0 - u), b = h(u - 0.5);
  return a / (a + b);
}

namespace {

// int_0^{r^2} eps sum_x (grad^- K grad^+ K - Q) dt with t = u^2
double cutoff_difference(int N, double r, int panels) {
  const double e = eps_of(N);
  const long kmax = static_cast<long>(std::ceil(r / e)) + 2;
  const auto rule = quad::uniform(0.0, r, panels);
  Acc total;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double u = rule.x[i], t = u * u;
    const int reach = kern::bessel_reach(t / (e * e)) + 2;
    const auto row = kern::G_row(e, t, static_cast<int>(std::max<long>(kmax + 2, reach)));
    auto G = [&](long k) {
      const std::size_t a = static_cast<std::size_t>(k < 0 ? -k : k);
      return a < row.size() ? row[a] : 0.0;
    };
    auto K = [&](long k) { return G(k) * smooth_cutoff((u + e * std::abs(static_cast<double>(k))) / r); };
    Acc s;
    for (long k = -kmax; k <= kmax; ++k) {
      const double kk = (K(k) - K(k - 1)) * (K(k + 1) - K(k));
      const double qq = (G(k) - G(k - 1)) * (G(k + 1) - G(k));
      s.add(kk - qq);
    }
    // Q beyond the cut-off support, both sides
    for (long k = kmax + 1; k <= reach; ++k) s.add(-2.0 * (G(k) - G(k - 1)) * (G(k + 1) - G(k)));
    total.add(rule.w[i] * 2.0 * u * e * s.value() / (e * e));
  }
  return total.value();
}

}  // namespace

FullConstant full_constant(int N, double r, bool cutoff) {
  const double e = eps_of(N);
  FullConstant out;
  if (!cutoff) {
    // the whole space-time integral of Q, quadrature plus exact tail
    const auto q = kern::check_q_zero_integral(e, 4096.0 * e * e);
    out.value = q.integral + q.tail;
    out.quad_error = q.residual;
    return out;
  }
  // int_0^{r^2} eps sum Q = -int_{r^2}^infty eps sum Q = -G^eps(2 r^2, eps)
  const double tail = kern::eval_G(e, 2.0 * r * r, 1);
  const double a = cutoff_difference(N, r, 16), b = cutoff_difference(N, r, 24);
  out.value = b - tail;
  out.quad_error = std::abs(a - b);
  if (out.quad_error > 1e-6 * std::max(1.0, std::abs(out.value)))
    throw kern::QuadratureError("cut-off constant not converged under refinement", out.quad_error);
  return out;
}

Current current_constants(double eps, double rho) {
  if (rho < -1.0 || rho > 1.0) throw ParameterError("rho must lie in [-1, 1]");
  Current c;
  const double se = std::sqrt(eps);
  c.curr = se * (rho * rho - 1.0) / 4.0;
  // Curr is a quadratic in rho: eps^{-1/2} (2/l!) d^l/drho^l Curr
  c.lambda = {(rho * rho - 1.0) / 2.0, rho, 0.5, 0.0, 0.0};
  return c;
}

double current_by_enumeration(double eps, double rho) {
  const double p = 0.5 * (1.0 + rho);
  const double left = 0.5 + std::sqrt(eps), right = 0.5;
  double e = 0.0;
  for (int a = 0; a <= 1; ++a)      // occupation at site 0
    for (int b = 0; b <= 1; ++b) {  // occupation at site 1
      const double w = (a ? p : 1 - p) * (b ? p : 1 - p);
      // jump 1 -> 0 empties site 1, jump 0 -> 1 empties site 0
      const double d10 = (b == 1 && a == 0) ? -1.0 : 0.0;
      const double d01 = (a == 1 && b == 0) ? -1.0 : 0.0;
      e += w * (left * d10 - right * d01);
    }
  return e;
}

namespace {

ContinuumConstants continuum_once(double delta, double nu, int panels) {
  const double m = 1.0, L = 8.0 / delta, s = std::asinh(L);
  const auto rule = quad::uniform(-1.0, 1.0, panels);
  const std::size_t n = rule.x.size();
  std::vector<double> k(n), w(n), ck(n), lam(n);
  auto lambda = [&](double x) { return 2.0 * kPi * kPi * x * x + m; };
  auto mol = [&](double x) { return std::exp(-(delta * x) * (delta * x)); };
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = std::sinh(s * rule.x[i]);
    w[i] = rule.w[i] * s * std::cosh(s * rule.x[i]);
    lam[i] = lambda(k[i]);
    const double d = 2.0 * kPi * k[i];
    ck[i] = d * d * mol(k[i]) / (2.0 * lam[i]);
  }
  Acc c1, c2, c3;
  for (std::size_t i = 0; i < n; ++i) c1.add(w[i] * ck[i]);
  for (std::size_t i = 0; i < n; ++i) {
    Acc r2, r3;
    for (std::size_t j = 0; j < n; ++j) {
      const double kl = k[i] + k[j], lkl = lambda(kl), S = lam[i] + lam[j] + lkl;
      const double d = 2.0 * kPi * kl;
      const double base = w[j] * ck[i] * ck[j] / S;
      r2.add(base * d * d / (2.0 * lkl) * 2.0);
      r3.add(base * (-4.0 * kPi * kPi * kl * k[j]) / (2.0 * lam[j]));
    }
    c2.add(w[i] * r2.value());
    c3.add(w[i] * r3.value());
  }
  ContinuumConstants out;
  out.C1 = nu * c1.value();
  out.C2 = 2.0 * nu * nu * c2.value();
  out.C3 = 2.0 * nu * nu * c3.value();
  return out;
}

}  // namespace

ContinuumConstants continuum_constants(double delta, double nu, int panels) {
  if (!(delta > 0)) throw ParameterError("delta must be positive");
  // the mollifier cut-off 8/delta stretches the map, so refine with log(1/delta)
  if (panels <= 0) panels = 40 + static_cast<int>(std::ceil(30.0 * std::max(0.0, std::log2(0.2 / delta))));
  const auto a = continuum_once(delta, nu, panels);
  auto b = continuum_once(delta, nu, panels + panels / 2);
  b.quad_error = std::max({std::abs(a.C1 - b.C1), std::abs(a.C2 - b.C2), std::abs(a.C3 - b.C3)});
  if (b.quad_error > 1e-6 * std::max({1.0, std::abs(b.C1), std::abs(b.C2)}))
    throw kern::QuadratureError("continuum constants not converged under refinement", b.quad_error);
  return b;
}

}  // namespace wasep::renorm
