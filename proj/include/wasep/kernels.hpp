#pragma once

// Discrete heat kernels on eps*Z and on the period-2 circle, the product
// kernel Q = grad^- G * grad^+ G and the Neumann inverse built from it.
//
// Line kernels accept any eps > 0 because eps*Z is a lattice for every
// spacing; objects living on the circle take N and use eps = 2/(2N+1).

#include <complex>
#include <stdexcept>
#include <vector>

#include "wasep/lattice.hpp"

namespace wasep::kern {

struct QuadratureError : std::runtime_error {
  double residual;
  QuadratureError(const std::string& what, double r) : std::runtime_error(what), residual(r) {}
};

struct ContractionError : std::runtime_error {
  double eps, threshold;
  ContractionError(const std::string& what, double e, double th)
      : std::runtime_error(what), eps(e), threshold(th) {}
};

// ---- Fourier multipliers ----
double f_line(double x);
std::complex<double> m_plus_line(double x);
std::complex<double> m_minus_line(double x);
double f_torus(int N, int k);
std::complex<double> m_torus_plus(int N, int k);
std::complex<double> m_torus_minus(int N, int k);

// ---- the unit-lattice kernel q(s,k) = e^{-s} I_k(s) ----
// Values for k = 0..kmax by normalised backward recurrence.
std::vector<double> scaled_bessel_row(double s, int kmax);
// Index beyond which q(s, k) is below 1e-17 relative to its peak.
int bessel_reach(double s);
double q_unit(double s, long k);
// Same kernel from the Fourier integral over one period (trapezoid, doubled
// until the change is below tol).
double q_unit_fourier(double s, long k, double tol = 1e-15);

// ---- line kernels, x = eps*k ----
double eval_G(double eps, double t, long k);
double eval_G_fourier(double eps, double t, long k);
// Whole row G(t, eps*k) for |k| <= kmax (index k).
std::vector<double> G_row(double eps, double t, int kmax);
double eval_Q(double eps, double t, long k);
// Continuum heat kernel of (1/2) Laplacian and its derivative.
double heat_kernel(double t, double x);
double heat_kernel_dx(double t, double x);

// ---- circle kernels ----
double eval_P(int N, double t, long k);
double eval_P_images(int N, double t, long k);
double eval_Q_per(int N, double t, long k);
double eval_Q_per_fourier(int N, double t, long k);
// eps-weighted cosine coefficients of Q_per(t, .), index j = k + N for
// k = -N..N (Q is even in x, so they are real).
std::vector<double> Q_per_hat(int N, double t);
// Large-argument expansion of e^{-s} I_nu(s), good for s above about 1e3.
double scaled_bessel_asymptotic(double s, int nu);

// ---- integral identities ----
struct QIntegral {
  double integral = 0;      // eps sum_x int_0^T Q
  double abs_integral = 0;  // eps sum_x int_0^T |Q|
  double tail = 0;          // int_T^infty eps sum_x Q from the Fourier side
  double residual = 0;      // |integral + tail|
  double relative = 0;      // residual / (abs_integral + its tail)
};
QIntegral check_q_zero_integral(double eps, double T_cut);

// d/dt of eps sum_x G_t(x) G_t(x+eps) against eps sum_x Q at time t.
struct SumIdentity {
  double sum_q, derivative;
};
SumIdentity q_sum_identity(double eps, double t);

struct ThetaEstimate {
  double value;
  double tail;        // part of value coming from the analytic tail
  double tail_bound;  // bound on the error of that tail
};
ThetaEstimate estimate_theta(double T_cut = 4096.0);
// Regression value of the absolute mass of Q on the unit lattice.
constexpr double kThetaFrozen = 0.7267604552648373;

// int_0^T eps sum_x sum_{0<|m|<=mmax} |grad^- G(t,x) grad^+ G(t,x+2m)| dt
double check_offdiagonal(double eps, double T, int mmax = 8);

struct L1Distances {
  double G, grad_minus, grad_plus;
};
// Cellwise L1 distances between lattice kernels and the continuum kernel,
// integrated over (0, T].
L1Distances kernel_comparison_L1(double eps, double T);

// ---- space-time convolution on the circle ----
// Q_per *_eps^+ f for f piecewise linear in time on a uniform grid.
// The kernel lives on all of (0, infinity), so the convolution needs f at
// negative times: Zero treats f as vanishing there (right for kernels that
// start at t = 0), Frozen continues it by its t = 0 slice.
enum class History { Zero, Frozen };

class QConvolver {
 public:
  QConvolver(int N, double dt, int nt);
  int N() const { return N_; }
  double dt() const { return dt_; }
  int nt() const { return nt_; }
  SpaceTimeField apply(const SpaceTimeField& f, History h = History::Frozen) const;

  // Fourier-domain pieces, exposed for the Neumann series.
  using Spec = std::vector<std::vector<std::complex<double>>>;  // [time][frequency]
  Spec forward(const SpaceTimeField& f) const;
  SpaceTimeField inverse(const Spec& s) const;
  Spec apply_hat(const Spec& s, History h = History::Frozen) const;
  // Single-slice versions; the convolution at slice i reads s[0..i] only, so
  // a history can be fed one slice at a time.
  std::vector<std::complex<double>> forward_slice(const std::vector<double>& f) const;
  std::vector<double> inverse_slice(const std::vector<std::complex<double>>& s) const;
  std::vector<std::complex<double>> apply_hat_at(const Spec& s, int i, History h = History::Frozen) const;
  // Q_hat at arbitrary time, frequencies 0..2N mapped to k = j - N.
  std::vector<double> q_hat(double t) const;
  // int_t^infty Q_hat(tau) dtau, same indexing.
  std::vector<double> q_hat_tail(double t) const;

 private:
  int N_;
  double dt_;
  int nt_;
  std::vector<std::vector<double>> A_, B_;  // [lag][frequency index]
  std::vector<std::vector<double>> tail_;    // int_{t_i}^infty Q_hat, [time][frequency]
  std::vector<std::vector<double>> cos_, sin_;  // [frequency][site]
};

struct NeumannResult {
  SpaceTimeField value;
  double bound = 0;  // bound on the discarded tail
  int terms = 0;
};
// (Q^eps)^{-1} f via the geometric series. correction_scale multiplies the
// series coefficient (1 gives the true operator, 0 switches it off).
NeumannResult neumann_apply(const SpaceTimeField& f, const QConvolver& conv, double tol = 1e-10,
                            int max_terms = -1, double correction_scale = 1.0,
                            History h = History::Frozen);
// Contraction factor (1 + sqrt(eps)) Theta; throws ContractionError if >= 1.
double contraction_factor(double eps);

struct ModifiedKernels {
  SpaceTimeField P, P_tilde, P_tilde_tilde;  // periodised G, G~, G~~
  double bound = 0;
  int terms = 0;
};
ModifiedKernels modified_kernels(const QConvolver& conv, double tol = 1e-10, double correction_scale = 1.0);

}  // namespace wasep::kern
