#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace wasep {

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Lattice spacing of the discrete circle with 2N+1 sites and period 2.
inline double eps_of(int N) {
  if (N < 1) throw ParameterError("N must be at least 1");
  return 2.0 / (2.0 * N + 1.0);
}

// Inverse of eps_of; throws unless eps = 2/(2N+1) up to rounding.
int n_of_eps(double eps);

// Values on one period of the lattice, stored at sites x = eps*(i - N), i = 0..2N.
struct LatticeField {
  int N = 1;
  std::vector<double> v;

  LatticeField() = default;
  explicit LatticeField(int n, double fill = 0.0) : N(n), v(2 * n + 1, fill) {}
  int size() const { return static_cast<int>(v.size()); }
  double eps() const { return eps_of(N); }
  double x(int i) const { return eps() * (i - N); }
  // periodic access by site offset from the origin
  double at(long k) const {
    const long n = size();
    long i = ((k + N) % n + n) % n;
    return v[static_cast<std::size_t>(i)];
  }
};

// Uniform time grid t_j = j*dt, j = 0..nt, each slice one spatial period.
struct SpaceTimeField {
  int N = 1;
  double dt = 0.0;
  std::vector<std::vector<double>> slices;

  SpaceTimeField() = default;
  SpaceTimeField(int n, double step, int nt) : N(n), dt(step), slices(nt + 1, std::vector<double>(2 * n + 1, 0.0)) {}
  int nt() const { return static_cast<int>(slices.size()) - 1; }
  int sites() const { return 2 * N + 1; }
  double eps() const { return eps_of(N); }
  double sup() const;
};

}  // namespace wasep
