#pragma once

// Discrete renormalisation constants as finite Fourier sums over the dual
// torus T_N* = {-N..N} \ {0}, plus the continuum constants of the mollified
// equation and the equilibrium current.

#include <array>
#include <complex>

namespace wasep::renorm {

// D_N(x) = sum_{|k|<=N} e^{ikx}, closed form with the removable singularity.
double dirichlet(int N, double x);
double dirichlet_direct(int N, double x);

struct ConstPair {
  double C1 = 0, C2 = 0;
  double imag_residue = 0;  // largest imaginary part left after summation
};

// Sums of the products m^-(k)^2 m^+(-k) / (8 f(k)^2) and m^- m^+ m^- / (8 f^2)
// over T_N*, with the sign conventions of the pair whose total is eps/2.
ConstPair pair_sum_constants(int N);

// -sum_{k in T_N*} m^a(k) m^b(k) m^c(-k) / (8 f(k)^2) with a, b, c = +1 for the
// forward multiplier and -1 for the backward one. Flipping every sign gives
// the negative (spatial evenness of the kernel).
std::complex<double> triple_sum(int N, int a, int b, int c);

// The two constants built from (grad^+)^2 P and grad^- grad^+ P against
// Q_{-,+}, by raw summation ...
ConstPair second_order_constants(int N);
// ... and after collapsing each summand (eps/2 |T_N*| and (eps/2)(D_N(-pi eps) - 1)).
ConstPair second_order_closed(int N);

struct DoubleSum {
  double double_sum = 0;  // (1/pi^2) sum_{k != l} (1 - 2l/k) / (k^2 + l^2 - kl)
  double reduced = 0;     // (1/pi^2) sum_k 1/k^2
  double odd_sum = 0;     // sum_k 1/k, zero by symmetry
};
DoubleSum logarithmic_combination(int N);

// C(V) = int grad^- K grad^+ K over space-time, K = G chi(||z||_s / r) with a
// smooth cut-off chi equal to 1 on [0, 1/2] and 0 beyond 1. With
// cutoff = false the full kernel G is used.
struct FullConstant {
  double value = 0;
  double quad_error = 0;  // change under panel refinement
};
FullConstant full_constant(int N, double r = 1.0, bool cutoff = true);
double smooth_cutoff(double u);

struct Current {
  double curr = 0;
  std::array<double, 5> lambda{};  // lambda_0 .. lambda_4
};
// Closed forms of the steady-state current and its rescaled Taylor coefficients.
Current current_constants(double eps, double rho);
// E_rho[r_{1->0} L eta(1) - r_{0->1} L eta(0)] by enumerating the two-site
// Bernoulli marginal.
double current_by_enumeration(double eps, double rho);

struct ContinuumConstants {
  double C1 = 0, C2 = 0, C3 = 0;
  double quad_error = 0;
};
// Constants of the mollified continuum model (space-only Gaussian mollifier of
// width delta, heat kernel with unit mass cut-off), by Fourier quadrature.
// panels <= 0 picks a resolution from delta.
ContinuumConstants continuum_constants(double delta, double nu = 1.0, int panels = 0);

}  // namespace wasep::renorm
