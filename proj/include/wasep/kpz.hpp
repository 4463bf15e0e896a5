#pragma once

// Continuum reference on the period-2 circle: the stochastic heat equation
// dZ = 1/2 Z'' dt - sqrt(nu) Z dW (Ito) and its Cole-Hopf height h = -log Z,
// the mollifiers used to smooth noise and initial data, and a finite
// difference solver of the mollified and renormalised KPZ equation
// dh = (1/2 h'' - 1/2 ((h')^2 - C)) dt + mollified noise.

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCholesky>

namespace wasep::kpz {

struct PositivityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CflError : std::runtime_error {
  double suggested_dt;
  CflError(const std::string& what, double dt) : std::runtime_error(what), suggested_dt(dt) {}
};

// M cells of width dx = 2/M on [-1, 1), site i at x = -1 + i dx.
struct Grid {
  int M = 512;
  double dt = 0;  // 0 means dx^2 / 4
  double dx() const { return 2.0 / M; }
  double step() const { return dt > 0 ? dt : dx() * dx() / 4; }
  double x(int i) const { return -1.0 + i * dx(); }
  int origin() const { return M / 2; }
  void validate() const;
};

// Independent N(0, dt/dx) increments, one per cell and step: the space-time
// white noise integrated over a cell divided by the cell width.
class WhiteNoise {
 public:
  WhiteNoise(const Grid& g, std::uint64_t seed);
  void next(std::vector<double>& dW);

 private:
  double sd_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

// Crank-Nicolson step of dZ = 1/2 Z'' dt with the periodic second difference.
class HeatStep {
 public:
  explicit HeatStep(const Grid& g);
  void apply(std::vector<double>& z);

 private:
  int M_;
  double c_;  // dt / (4 dx^2)
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> lhs_;
  Eigen::VectorXd rhs_;
};

// Periodic Brownian bridge with variance nu per unit length, pinned to 0 at x = 0.
std::vector<double> brownian_bridge(const Grid& g, double nu, std::uint64_t seed);

struct Trajectory {
  Grid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> h;  // one grid field per requested time
  int rejections = 0;                  // restarts after a loss of positivity
};

// Cole-Hopf height from h0 on the grid. Sample times must be increasing and
// within [0, T]. A path whose Z loses positivity is restarted with half the
// step, at most max_restarts times, then PositivityError.
Trajectory solve_cole_hopf(const std::vector<double>& h0, double nu, double T, Grid g, std::uint64_t seed,
                           const std::vector<double>& sample_times, int max_restarts = 4);

// Mollifiers built from the bump b(u) = exp(-1/(1-u^2)) on (-1, 1).
class Mollifier {
 public:
  explicit Mollifier(double delta);
  double delta() const { return delta_; }
  // space: delta^{-1} phi(x/delta) with phi = b / int b, support [-delta, delta]
  double space(double x) const;
  // space-time: delta^{-3} rho(t/delta^2, x/delta) with rho(t, x) = c b(4t) b(2x);
  // supported where |t| < delta^2/4 and |x| < delta/2, inside the parabolic unit ball
  double space_time(double t, double x) const;
  std::array<double, 2> support() const { return {delta_ * delta_ / 4, delta_ / 2}; }
  // eps^{-1} times the mass of the spatial profile in the cell [x - eps/2, x + eps/2]
  double space_cell(double x, double eps) const;
  double space_time_cell(double t, double x, double eps) const;
  // cell averages of phi_delta on the circle of 2N+1 sites, summed over images;
  // eps times the sum is 1 up to rounding
  std::vector<double> space_lattice(int N) const;

 private:
  double cell_mass(double a, double b, double scale) const;
  double delta_;
};

// The bump, its integral and its cumulative integral on [-1, u].
double bump(double u);
double bump_mass();
double bump_cdf(double u);

// Mollified initial data phi_delta * h0 on the grid (periodic).
std::vector<double> mollify_initial(const std::vector<double>& h0, const Grid& g, const Mollifier& m);

// Finite differences for the mollified KPZ equation. Noise is the space-time
// white noise of WhiteNoise, smoothed by the space-time mollifier (separable,
// cell-averaged weights) and multiplied by sqrt(nu). noise = false solves the
// deterministic equation.
Trajectory mollified_kpz(const std::vector<double>& h0, double nu, double delta, double C, double T, Grid g,
                         std::uint64_t seed, const std::vector<double>& sample_times, bool noise = true);

struct OnePoint {
  int n = 0;
  double mean = 0, var = 0, var_se = 0;
  std::array<double, 3> quartiles{};
};
OnePoint one_point(std::vector<double> values);

// Centred one-point law of h(t, 0) - h(0, 0) over independent paths started
// from periodic Brownian bridges.
OnePoint cole_hopf_reference(double nu, double t, int paths, Grid g, std::uint64_t seed);

struct ConvergenceReport {
  int M_coarse = 0, M_fine = 0;
  OnePoint coarse, fine;
  double difference = 0, combined_se = 0;
  bool within_error = false;  // |difference| <= 3 combined_se
};
// Same statistic on M and 2M cells.
ConvergenceReport grid_convergence(double nu, double t, int paths, int M, std::uint64_t seed);

}  // namespace wasep::kpz
