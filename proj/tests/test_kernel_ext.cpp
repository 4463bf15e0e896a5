#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "wasep/kernel_ext.hpp"
#include "wasep/kernels.hpp"

using namespace wasep;
using namespace wasep::ext;

namespace {

constexpr double kPi = std::numbers::pi;

// inverse transform of the bump by the trapezoid rule; the bump is flat to all
// orders at +-delta, so the rule converges faster than any power
double g_trapezoid(double x, double delta, int n = 4000) {
  double s = 0.0, m = 0.0;
  for (int i = -n + 1; i < n; ++i) {
    const double y = delta * i / n, u = y / delta;
    const double b = std::exp(-1.0 / (1.0 - u * u));
    s += b * std::cos(2 * kPi * x * y);
    m += b;
  }
  return s / m;
}

}  // namespace

TEST_CASE("sinc branches agree") {
  for (int q = 0; q <= 2; ++q) {
    const double a = InterpKernel::sinc(0.0999999, q), b = InterpKernel::sinc(0.1000001, q);
    CHECK(std::abs(a - b) < 1e-5);
  }
  CHECK(InterpKernel::sinc(0.0) == 1.0);
  CHECK(InterpKernel::sinc(0.0, 1) == 0.0);
  CHECK(std::abs(InterpKernel::sinc(0.0, 2) + kPi * kPi / 3) < 1e-15);
  for (double x : {0.05, 0.3, 2.7, -11.2}) {
    const double h = 1e-5;
    const double d1 = (InterpKernel::sinc(x + h) - InterpKernel::sinc(x - h)) / (2 * h);
    const double d2 = (InterpKernel::sinc(x + h, 1) - InterpKernel::sinc(x - h, 1)) / (2 * h);
    CHECK(std::abs(d1 - InterpKernel::sinc(x, 1)) < 1e-8);
    CHECK(std::abs(d2 - InterpKernel::sinc(x, 2)) < 1e-8);
  }
}

TEST_CASE("bump transform table") {
  const auto& K = default_kernel();
  CHECK(K.delta() == 0.125);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-300.0, 300.0);
  for (int i = 0; i < 40; ++i) {
    const double x = ux(rng);
    CHECK(std::abs(K.g(x) - g_trapezoid(x, 0.125)) < 1e-12);
    for (int q = 0; q <= 2; ++q) CHECK(std::abs(K.g(x, q) - K.g_direct(x, q)) < 1e-12);
  }
  // derivatives against differences of the table
  for (double x : {0.0, 0.4, 3.3, 57.1}) {
    const double h = 1e-4;
    CHECK(std::abs((K.g(x + h) - K.g(x - h)) / (2 * h) - K.g(x, 1)) < 1e-7);
    CHECK(std::abs((K.g(x + h, 1) - K.g(x - h, 1)) / (2 * h) - K.g(x, 2)) < 1e-6);
  }
  // beyond the table the direct quadrature takes over
  CHECK(std::abs(K.g(K.extent() + 10.0) - g_trapezoid(K.extent() + 10.0, 0.125, 20000)) < 1e-12);
}

TEST_CASE("phi interpolates the lattice delta") {
  const auto& K = default_kernel();
  CHECK(std::abs(K.phi(0.0) - 1.0) < 1e-10);
  CHECK(std::abs(K.phi(3.0)) < 1e-10);
  for (int k = 1; k <= 200; ++k) {
    CHECK(std::abs(K.phi(k)) < 1e-10);
    CHECK(std::abs(K.phi(-k)) < 1e-10);
  }
  const auto ck = K.check();
  CHECK(ck.phi0_err < 1e-10);
  CHECK(ck.integer_err < 1e-10);
  CHECK(ck.unity_err < 1e-8);
  CHECK_THROWS_AS(InterpKernel(0.3), ParameterError);
}

TEST_CASE("partition of unity") {
  const auto& K = default_kernel();
  const int R = K.radius_for(1e-10);
  CHECK(R > 40);  // the bump transform decays like exp(-c sqrt|x|)
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = -0.5 + i / 999.0;
    double s = 0.0;
    for (int k = -R - 1; k <= R + 1; ++k) s += K.phi(x + k);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  CHECK(worst < 1e-8);
  double s = 0.0;
  for (int k = -R; k <= R; ++k) s += K.phi(0.5 + k);
  CHECK(std::abs(s - 1.0) < 1e-8);
  // the tail bound is an upper bound for the actual remainder
  double rem = 0.0;
  for (int k = 30; k < 700; ++k) rem += std::abs(K.phi(0.5 + k)) + std::abs(K.phi(0.5 - k - 1));
  CHECK(rem <= K.tail_bound(29.0));
  CHECK_THROWS_AS(K.radius_for(1e-300), TailError);
}

TEST_CASE("vanishing moment sums") {
  const auto& K = default_kernel();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  for (int i = 0; i < 10; ++i) {
    const double x = ux(rng);
    CHECK(std::abs(moment_sum(K, x, 0, 1, 700)) < 1e-7);
    CHECK(std::abs(moment_sum(K, x, 1, 2, 700)) < 1e-7);
    CHECK(std::abs(moment_sum(K, x, 0, 2, 700)) < 1e-7);
    // p = q is not covered: the transform of x phi'(x) is -(F phi + w F phi')
    CHECK(std::abs(moment_sum(K, x, 1, 1, 700) + 1.0) < 1e-7);
    CHECK(std::abs(moment_sum(K, x, 0, 0, 700) - 1.0) < 1e-8);
  }
}

TEST_CASE("extension interpolates and preserves constants") {
  const auto& K = default_kernel();
  for (double eps : {0.2, 0.04}) {
    const auto U = extend_heat_kernel(eps);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<long> uk(-40, 40);
    std::uniform_real_distribution<double> ut(0.0, 0.5);
    for (int i = 0; i < 20; ++i) {
      const long k = uk(rng);
      const double t = ut(rng);
      CHECK(std::abs(U(t, eps * k) - kern::eval_G(eps, t, k)) < 1e-10 / eps);
    }
    // x-derivative against a centred difference of the extension
    const double h = 1e-5 * eps;
    for (double x : {0.013, 0.2, -0.31}) {
      const double fd = (U(0.05, x + h) - U(0.05, x - h)) / (2 * h);
      CHECK(std::abs(fd - U(0.05, x, 1)) < 1e-5 * (1 + std::abs(fd)));
    }
  }
  const Extension one(K, 0.1, pointwise([](double, long) { return 1.0; }), 1.0, 1e-10);
  for (double x : {0.0, 0.037, 1.234, -5.55}) CHECK(std::abs(one(0.0, x) - 1.0) < 1e-9);
  const Extension zero(K, 0.1, pointwise([](double, long) { return 0.0; }), 0.0);
  const auto rz = verify_decay_transfer(zero, 0, 1.0, {0.1}, {0.0, 0.05});
  CHECK(rz.ratio == 0.0);
  CHECK(!rz.flagged);
}

TEST_CASE("decay transfers to the extension of the heat kernel") {
  for (double eps : {0.2, 0.04}) {
    const auto U = extend_heat_kernel(eps);
    std::vector<double> ts = {0.0, eps * eps / 4, eps * eps, 0.01, 0.05, 0.2, 0.5};
    std::vector<double> xs;
    for (int i = -40; i <= 40; ++i) xs.push_back(eps * (i + 0.5) * 0.5);  // midpoints and lattice points
    for (int j : {0, 1}) {
      const auto r = verify_decay_transfer(U, j, 1.0, ts, xs);
      MESSAGE("eps=" << eps << " j=" << j << " ext=" << r.ext_ratio << " lattice=" << r.lattice_ratio
                     << " ratio=" << r.ratio);
      CHECK(r.lattice_ratio > 0);
      CHECK(!r.flagged);
      // the discrete constant is O(1) uniformly in eps; at t = 0 the lattice
      // values give exactly 1 for j = 0 and 4 for j = 1 (site k = 1)
      CHECK(r.lattice_ratio < 5.0);
    }
  }
}
