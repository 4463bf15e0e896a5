#pragma once

// Smooth extension of lattice functions off the grid,
//   U(t, x) = sum_k phi(x/eps - k) u(t, k),
// with phi = D * g, D(x) = sin(pi x)/(pi x) and g the inverse Fourier
// transform of a compact bump psi. The Fourier transform of phi is the
// indicator of [-1/2, 1/2] smoothed by psi, so phi(k) = delta_{k,0} and the
// integer translates of phi sum to one.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wasep::ext {

struct KernelBuildError : std::runtime_error {
  double worst_x, residual;
  KernelBuildError(const std::string& what, double x, double r)
      : std::runtime_error(what), worst_x(x), residual(r) {}
};

struct TailError : std::runtime_error {
  double bound;
  TailError(const std::string& what, double b) : std::runtime_error(what), bound(b) {}
};

struct KernelCheck {
  double phi0_err = 0;          // |phi(0) - 1|
  double integer_err = 0;       // max_k |phi(k)|, 1 <= |k| <= 60
  double unity_err = 0;         // max_x |sum_k phi(x + k) - 1|
  double unity_worst_x = 0;
};

class InterpKernel {
 public:
  // psi = c exp(-1/(1 - (y/delta)^2)) on [-delta, delta]
  explicit InterpKernel(double delta = 0.125);

  double delta() const { return delta_; }
  // tabulated range; beyond it phi is evaluated by direct quadrature
  double extent() const { return extent_; }

  // q-th derivative of phi, q in {0, 1, 2}
  double phi(double x, int q = 0) const;
  // q-th derivative of the inverse transform of psi (g(0) = 1)
  double g(double x, int q = 0) const;
  // same by direct quadrature, no table
  double g_direct(double x, int q = 0) const;
  // D(x) = sin(pi x)/(pi x) and its derivatives
  static double sinc(double x, int q = 0);

  // sup_x sum_{|x - k| > R} |phi^(q)(x - k)| from cell maxima of the table
  double tail_bound(double R, int q = 0) const;
  // smallest integer R with tail_bound(R, q) <= tol; TailError if none
  int radius_for(double tol, int q = 0) const;

  KernelCheck check() const;

 private:
  double delta_, extent_, h_;
  std::vector<double> y_, wpsi_;               // quadrature for g
  std::vector<std::vector<double>> table_;     // g, g', g'' on x = n h
  std::vector<std::vector<double>> cell_max_;  // max |phi^(q)| on [n, n+1)
  std::vector<std::vector<double>> suffix_;    // sum of cell_max_ from n on
};

// One shared kernel with the default bump, built on first use.
const InterpKernel& default_kernel();

// Writes u(t, k) for k = k0..k1 into out (size k1 - k0 + 1).
using RangeFn = std::function<void(double t, long k0, long k1, std::vector<double>& out)>;
RangeFn pointwise(std::function<double(double, long)> u);

// Extension of a rescaled lattice function on eps*Z (eps = 1 for the unit lattice).
class Extension {
 public:
  Extension(const InterpKernel& K, double eps, RangeFn u, double u_sup, double tol = 1e-12, int max_q = 1);

  double eps() const { return eps_; }
  int radius() const { return R_; }
  double tail() const { return tail_; }

  // d^q/dx^q U(t, x)
  double operator()(double t, double x, int q = 0) const;
  // the lattice values themselves
  double lattice(double t, long k) const;

 private:
  const InterpKernel* K_;
  double eps_;
  RangeFn u_;
  int R_;
  double tail_;
};

// Ext(G^eps): the rescaled discrete heat kernel.
Extension extend_heat_kernel(double eps, double tol = 1e-12, const InterpKernel& K = default_kernel());

struct DecayReport {
  double ext_ratio = 0;      // sup |d_x^j U| (||z||_s + eps)^{j + beta} over the grid
  double lattice_ratio = 0;  // same with (grad^-)^j u at lattice points
  double ratio = 0;          // ext_ratio / lattice_ratio (0 when both vanish)
  bool flagged = false;      // ratio above 10
  double worst_t = 0, worst_x = 0;
};
// Spatial derivative order j in {0, 1}. Lattice points are taken in the
// x-range of the grid.
DecayReport verify_decay_transfer(const Extension& U, int j, double beta, const std::vector<double>& ts,
                                  const std::vector<double>& xs);

// sum_{|x - l| <= R} (x - l)^p phi^(q)(x - l)
double moment_sum(const InterpKernel& K, double x, int p, int q, int R);

}  // namespace wasep::ext
