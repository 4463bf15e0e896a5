#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <numbers>

#include "wasep/kernels.hpp"

using namespace wasep;
using namespace wasep::kern;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// least-squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("line multipliers") {
  for (int i = 0; i <= 1000; ++i) {
    const double x = -0.5 + i / 1000.0;
    const auto mp = m_plus_line(x), mm = m_minus_line(x);
    const double f = f_line(x);
    CHECK(std::abs(mp * mm - f) < 1e-12 * f);
    CHECK(std::abs(std::conj(mp) - mm) < 1e-12);
    CHECK(std::abs(mp * mp - std::polar(1.0, 2 * kPi * x) * f) < 1e-11);
    CHECK(std::abs(mm * mm - std::polar(1.0, -2 * kPi * x) * f) < 1e-11);
    CHECK(f >= 16.0 - 1e-12);
    CHECK(f <= 4 * kPi * kPi + 1e-12);
  }
  CHECK(f_line(0.0) == doctest::Approx(4 * kPi * kPi).epsilon(1e-15));
  CHECK(f_line(0.5) == doctest::Approx(16.0).epsilon(1e-14));
}

TEST_CASE("torus multipliers") {
  for (int N : {2, 7, 30}) {
    CHECK(std::abs(m_torus_plus(N, 0)) == 0.0);
    CHECK(std::abs(m_torus_minus(N, 0)) == 0.0);
    const double e = eps_of(N);
    for (int k = -N; k <= N; ++k) {
      const auto lhs = m_torus_minus(N, k) * m_torus_plus(N, -k);
      const auto rhs = 2.0 * f_torus(N, k) * std::polar(1.0, -kPi * k * e);
      CHECK(std::abs(lhs - rhs) < 1e-12 * (1 + std::abs(rhs)));
    }
  }
}

TEST_CASE("unit lattice kernel against an independent Bessel evaluation") {
  for (double s : {1e-6, 0.3, 2.0, 25.0, 200.0}) {
    const auto row = scaled_bessel_row(s, 30);
    for (int k = 0; k <= 30; ++k) {
      const double ref = boost::math::cyl_bessel_i(k, s) * std::exp(-s);
      if (ref < 1e-250) continue;
      CHECK(rel(row[k], ref) < 1e-12);
    }
  }
  // large-argument expansion agrees with the recurrence where both are valid
  for (double s : {2e3, 1e4}) {
    CHECK(rel(scaled_bessel_asymptotic(s, 0), q_unit(s, 0)) < 1e-12);
    CHECK(rel(scaled_bessel_asymptotic(s, 1), q_unit(s, 1)) < 1e-12);
  }
}

TEST_CASE("G: initial value, mass, dual methods, scaling") {
  CHECK(eval_G(0.1, 0.0, 0) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(eval_G(0.1, 0.0, 3) == 0.0);
  for (double e : {0.2, 0.1, 0.05}) {
    for (double t : {0.1, 1.0}) {
      const int K = bessel_reach(t / (e * e)) + 2;
      const auto row = G_row(e, t, K);
      double m = row[0];
      for (int k = 1; k <= K; ++k) m += 2 * row[k];
      CHECK(std::abs(e * m - 1.0) < 1e-10);
      for (int k = 0; k <= K; ++k) CHECK(row[k] >= 0.0);
    }
  }
  CHECK(rel(eval_G(0.1, 0.25, 0), eval_G_fourier(0.1, 0.25, 0)) < 1e-10);
  for (long k : {-7L, -1L, 0L, 3L, 12L}) {
    CHECK(eval_G(0.1, 0.25, k) == eval_G(0.1, 0.25, -k));
    CHECK(std::abs(eval_G(0.1, 0.25, k) - eval_G_fourier(0.1, 0.25, k)) < 1e-10 * eval_G(0.1, 0.25, 0));
  }
  // G^eps(t, eps k) = eps^{-1} q(t/eps^2, k), compared across two spacings
  CHECK(rel(eval_G(0.2, 0.04 * 3.0, 2) * 0.2, eval_G(0.1, 0.01 * 3.0, 2) * 0.1) < 1e-13);
}

TEST_CASE("P: mass, value at the origin, image sum") {
  for (int N : {2, 7, 15}) {
    const double e = eps_of(N);
    CHECK(eval_P(N, 0.0, 0) == doctest::Approx(1.0 / e).epsilon(1e-13));
    for (double t : {0.001, 0.05, 0.5, 2.0}) {
      double m = 0;
      for (int k = -N; k <= N; ++k) m += eval_P(N, t, k);
      CHECK(std::abs(e * m - 1.0) < 1e-10);
      for (int k = -N; k <= N; k += 3) CHECK(std::abs(eval_P(N, t, k) - eval_P_images(N, t, k)) < 1e-9);
    }
  }
}

TEST_CASE("Q: evenness, periodisation by two methods, sum identity") {
  for (double t : {0.003, 0.02, 0.3}) {
    for (long k = 0; k < 8; ++k) CHECK(std::abs(eval_Q(0.1, t, k) - eval_Q(0.1, t, -k)) <= 1e-12 * std::abs(eval_Q(0.1, t, 0)));
    // the evenness of G gives grad^+ G(x) = -grad^- G(-x)
    const double gp = (eval_G(0.1, t, 4) - eval_G(0.1, t, 3)) / 0.1;
    const double gm = (eval_G(0.1, t, -3) - eval_G(0.1, t, -4)) / 0.1;
    CHECK(std::abs(gp + gm) < 1e-12 * (1 + std::abs(gp)));
  }
  for (int N : {3, 7}) {
    for (double t : {0.004, 0.05, 0.4}) {
      for (int k = -N; k <= N; ++k) {
        const double a = eval_Q_per(N, t, k), b = eval_Q_per_fourier(N, t, k);
        CHECK(std::abs(a - b) < 1e-8 * std::max(1.0, std::abs(eval_Q_per(N, t, 0))));
      }
    }
  }
  for (double e : {1.0, 0.2}) {
    for (double t : {0.05 * e * e, e * e, 7.0 * e * e}) {
      const auto r = q_sum_identity(e, t);
      CHECK(std::abs(r.sum_q - r.derivative) < 1e-8 * std::abs(r.sum_q));
    }
  }
}

TEST_CASE("Q has zero space-time integral") {
  const auto r1 = check_q_zero_integral(1.0, 4096.0);
  CHECK(r1.relative <= 1e-6);
  for (double e : {0.2, 0.04}) {
    const auto r = check_q_zero_integral(e, 4096.0 * e * e);
    CHECK(r.relative <= 1e-6);
    // scaling: eps * (eps sum int |Q^eps|) does not depend on eps
    CHECK(rel(e * r.abs_integral, r1.abs_integral) < 1e-10);
  }
  // at t = 0 the pair sum sum_x G_0(x) G_0(x + eps) vanishes
  CHECK(q_unit(0.0, 0) * q_unit(0.0, 1) == 0.0);
}

TEST_CASE("absolute mass Theta") {
  const auto th = estimate_theta();
  CHECK(th.value < 1.0);
  CHECK(th.value > 0.0);
  CHECK(std::abs(th.value - kThetaFrozen) < 1e-10);
  CHECK(std::abs(th.value - (2.0 - 4.0 / kPi)) < 1e-10);
  CHECK(eval_Q(1.0, 0.5, 0) < 0.0);
  // eps * (eps-scaled absolute integral) gives Theta at eps = 0.2 as well
  const auto r = check_q_zero_integral(0.2, 4096.0 * 0.04);
  CHECK(std::abs(0.2 * r.abs_integral + th.tail - th.value) < 1e-9);
}

TEST_CASE("off-diagonal images") {
  CHECK(check_offdiagonal(0.2, 1e-4) < 1e-12);
  double prev_ratio = 0;
  std::vector<double> ratios;
  // cutting the images at |m| <= 8 is harmless while the walk spreads less
  // than the cut; at T = 16 the spread is 4 periods, so use more images there
  for (double T : {1.0, 4.0}) CHECK(std::abs(check_offdiagonal(0.2, T, 16) - check_offdiagonal(0.2, T, 8)) < 1e-6);
  for (double T : {1.0, 4.0, 16.0}) {
    const double v = check_offdiagonal(0.2, T, 48);
    ratios.push_back(v / (1 + std::sqrt(T)));
    prev_ratio = std::max(prev_ratio, ratios.back());
  }
  // bounded: the ratio does not grow along T
  CHECK(ratios[2] <= 1.05 * ratios[1]);
  CHECK(prev_ratio < 1.0);
  CHECK_THROWS_AS(check_offdiagonal(0.3, 1.0), ParameterError);
}

TEST_CASE("lattice heat kernels approach the continuum kernel") {
  std::vector<double> eps{0.2, 0.1, 0.05, 0.025}, g, gm, gp;
  for (double e : eps) {
    const auto d = kernel_comparison_L1(e, 1.0);
    g.push_back(d.G);
    gm.push_back(d.grad_minus);
    gp.push_back(d.grad_plus);
  }
  for (std::size_t i = 1; i < eps.size(); ++i) {
    CHECK(g[i] < g[i - 1]);
    CHECK(gm[i] < gm[i - 1]);
    CHECK(gp[i] < gp[i - 1]);
  }
  // first quantity is of order eps
  CHECK(loglog_slope(eps, g) > 0.9);
  const auto d1 = kernel_comparison_L1(1.0, 1.0);
  CHECK(std::isfinite(d1.G));
  CHECK(std::isfinite(d1.grad_plus));
}

TEST_CASE("convolver against direct space-time sums") {
  const int N = 5;
  const double e = eps_of(N), dt = 0.02;
  const int nt = 5;
  QConvolver conv(N, dt, nt);
  // linear in time, so the product rule is exact in t
  auto fval = [&](double t, double x) { return (1.0 + 3.0 * t) * std::cos(kPi * x) + 0.5 * std::sin(2 * kPi * x) * t; };
  SpaceTimeField f(N, dt, nt);
  for (int i = 0; i <= nt; ++i)
    for (int j = 0; j < f.sites(); ++j) f.slices[i][j] = fval(i * dt, e * (j - N));
  const auto z = conv.apply(f, History::Zero);
  const auto fr = conv.apply(f, History::Frozen);
  for (int i : {1, 3, 5}) {
    for (int j : {0, 4, 7}) {
      const double t = i * dt;
      const long xk = j - N;
      auto integrand = [&](double tau) {
        double acc = 0;
        for (int y = -N; y <= N; ++y) acc += eval_Q_per(N, tau, xk - y) * fval(t - tau, e * y);
        return e * acc;
      };
      auto hist = [&](double tau) {
        double acc = 0;
        for (int y = -N; y <= N; ++y) acc += eval_Q_per(N, tau, xk - y) * fval(0.0, e * y);
        return e * acc;
      };
      // fixed composite Gauss-Kronrod panels, denser where Q varies fastest
      using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
      auto panels = [](auto&& g, double lo, std::initializer_list<double> cuts) {
        double acc = 0;
        for (double hi : cuts) {
          for (int q = 0; q < 4; ++q) acc += GK::integrate(g, lo + (hi - lo) * q / 4, lo + (hi - lo) * (q + 1) / 4, 0);
          lo = hi;
        }
        return acc;
      };
      const double e2 = e * e;
      const double ref = t > 10 * e2 ? panels(integrand, 0.0, {0.01 * e2, 0.1 * e2, e2, 10 * e2, t})
                                     : panels(integrand, 0.0, {0.01 * e2, 0.1 * e2, e2, t});
      CHECK(std::abs(z.slices[i][j] - ref) < 1e-8 * (1 + std::abs(ref)));
      // f has no zero mode, so the history integrand decays like e^{-pi^2 tau}
      const double past = panels(hist, t, {t + 0.001, t + 0.01, t + 0.1, t + 1.0, t + 3.0, t + 6.0, t + 10.0});
      CHECK(std::abs(fr.slices[i][j] - (ref + past)) < 1e-8 * (1 + std::abs(ref)));
    }
  }
}

TEST_CASE("Neumann inverse") {
  CHECK_THROWS_AS(contraction_factor(eps_of(4)), ContractionError);
  try {
    contraction_factor(0.2);
  } catch (const ContractionError& ce) {
    CHECK(ce.threshold == doctest::Approx(0.1413).epsilon(1e-3));
    CHECK(std::string(ce.what()).find("0.141") != std::string::npos);
  }
  CHECK(contraction_factor(eps_of(7)) < 1.0);

  SUBCASE("constants are fixed") {
    const int N = 7;
    QConvolver conv(N, 0.05, 4);
    SpaceTimeField one(N, 0.05, 4);
    for (auto& s : one.slices)
      for (auto& v : s) v = 1.0;
    const auto qc = conv.apply(one);
    CHECK(qc.sup() < 1e-9);
    const auto r = neumann_apply(one, conv, 1e-10);
    for (const auto& s : r.value.slices)
      for (double v : s) CHECK(std::abs(v - 1.0) < 1e-8);
  }

  SUBCASE("truncation orders") {
    const int N = 7;
    const double e = eps_of(N);
    QConvolver conv(N, 0.05, 4);
    SpaceTimeField f(N, 0.05, 4);
    for (int i = 0; i <= 4; ++i)
      for (int j = 0; j < f.sites(); ++j) f.slices[i][j] = std::abs(std::sin(kPi * e * (j - N))) * (1 + 0.05 * i);
    const auto r1 = neumann_apply(f, conv, 0.0, 1);
    const auto r2 = neumann_apply(f, conv, 0.0, 2);
    double first = 0, diff = 0;
    for (int i = 0; i <= 4; ++i)
      for (int j = 0; j < f.sites(); ++j) {
        first = std::max(first, std::abs(r1.value.slices[i][j] - f.slices[i][j]));
        diff = std::max(diff, std::abs(r2.value.slices[i][j] - r1.value.slices[i][j]));
      }
    CHECK(diff <= contraction_factor(e) * first);
    const auto off = neumann_apply(f, conv, 1e-10, -1, 0.0);
    CHECK(off.value.slices == f.slices);
  }
}

TEST_CASE("Holder fields: smoothing and convergence to the identity") {
  const double alpha = 0.5;
  auto field = [&](int N) {
    const double e = eps_of(N);
    SpaceTimeField f(N, 0.25, 2);
    for (auto& s : f.slices)
      for (int j = 0; j < f.sites(); ++j) s[j] = std::pow(std::abs(std::sin(kPi * e * (j - N))), alpha);
    return f;
  };
  std::vector<double> eps, dev;
  for (int N : {7, 15, 31}) {
    QConvolver conv(N, 0.25, 2);
    const auto f = field(N);
    const auto r = neumann_apply(f, conv, 1e-10);
    double d = 0;
    for (int i = 0; i <= 2; ++i)
      for (int j = 0; j < f.sites(); ++j) d = std::max(d, std::abs(r.value.slices[i][j] - f.slices[i][j]));
    eps.push_back(eps_of(N));
    dev.push_back(d);
  }
  // the smoothing exponent carries a relative correction of order
  // eps^{1-alpha} from the periodic cut-off, so fit it on finer lattices
  std::vector<double> eps2, smooth;
  for (int N : {31, 63, 127}) {
    QConvolver conv(N, 0.25, 2);
    eps2.push_back(eps_of(N));
    smooth.push_back(conv.apply(field(N)).sup());
  }
  const double s1 = loglog_slope(eps, dev), s2 = loglog_slope(eps2, smooth);
  MESSAGE("deviation slope " << s1 << ", smoothing slope " << s2);
  CHECK(s1 > alpha - 0.15);
  CHECK(s1 < 1.1);
  CHECK(s2 > alpha - 1.0 - 0.15);
}

TEST_CASE("modified kernels") {
  {
    const int N = 7;
    QConvolver conv(N, eps_of(N) * eps_of(N), 10);
    const auto off = modified_kernels(conv, 1e-10, 0.0);
    CHECK(off.P_tilde.slices == off.P.slices);
  }
  // sup of |K| (||z||_s + eps)^{3/2} / eps^{1/2} over the grid, for
  // K = G~ - G and K = G~~, at two lattice spacings
  std::vector<double> r1, r2;
  for (int N : {7, 15}) {
    const double e = eps_of(N), dt = e * e;
    const int nt = 20;
    QConvolver conv(N, dt, nt);
    const auto mk = modified_kernels(conv, 1e-10);
    double worst = 0, worst2 = 0;
    for (int i = 1; i <= nt; ++i)
      for (int j = 0; j < 2 * N + 1; ++j) {
        const double x = e * (j - N);
        const double w = std::pow(std::sqrt(i * dt) + std::abs(x) + e, 1.5) / std::sqrt(e);
        worst = std::max(worst, std::abs(mk.P_tilde.slices[i][j] - mk.P.slices[i][j]) * w);
        worst2 = std::max(worst2, std::abs(mk.P_tilde_tilde.slices[i][j]) * w);
      }
    MESSAGE("N = " << N << ": G~ ratio " << worst << ", G~~ ratio " << worst2);
    r1.push_back(worst);
    r2.push_back(worst2);
  }
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(std::isfinite(r1[i]));
    CHECK(r1[i] < 10.0);
    CHECK(r2[i] < 10.0);
  }
  CHECK(r1[1] < 2.0 * r1[0]);
  CHECK(r2[1] < 2.0 * r2[0]);
}
