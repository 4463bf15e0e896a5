#include "wasep/kpz.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wasep/lattice.hpp"
#include "wasep/wasep.hpp"

namespace wasep::kpz {

namespace {

void check_samples(const std::vector<double>& ts, double T) {
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] < 0 || ts[i] > T * (1 + 1e-12)) throw ParameterError("sample times must lie in [0, T]");
    if (i > 0 && ts[i] < ts[i - 1]) throw ParameterError("sample times must be increasing");
  }
}

// number of steps to reach t, rounded to the nearest step
long steps_to(double t, double dt) { return std::lround(t / dt); }

}  // namespace

void Grid::validate() const {
  if (M < 4 || M % 2 != 0) throw ParameterError("grid needs an even number of cells, at least 4");
  if (dt < 0) throw ParameterError("time step must be positive");
}

WhiteNoise::WhiteNoise(const Grid& g, std::uint64_t seed) : sd_(std::sqrt(g.step() / g.dx())), rng_(seed) {}

void WhiteNoise::next(std::vector<double>& dW) {
  for (double& v : dW) v = sd_ * normal_(rng_);
}

HeatStep::HeatStep(const Grid& g) : M_(g.M), c_(g.step() / (4 * g.dx() * g.dx())), rhs_(g.M) {
  std::vector<Eigen::Triplet<double>> tr;
  for (int i = 0; i < M_; ++i) {
    tr.emplace_back(i, i, 1 + 2 * c_);
    tr.emplace_back(i, (i + 1) % M_, -c_);
    tr.emplace_back(i, (i + M_ - 1) % M_, -c_);
  }
  Eigen::SparseMatrix<double> A(M_, M_);
  A.setFromTriplets(tr.begin(), tr.end());
  lhs_.compute(A);
  if (lhs_.info() != Eigen::Success) throw std::runtime_error("heat step factorisation failed");
}

void HeatStep::apply(std::vector<double>& z) {
  for (int i = 0; i < M_; ++i)
    rhs_[i] = (1 - 2 * c_) * z[i] + c_ * (z[(i + 1) % M_] + z[(i + M_ - 1) % M_]);
  const Eigen::VectorXd out = lhs_.solve(rhs_);
  for (int i = 0; i < M_; ++i) z[i] = out[i];
}

std::vector<double> brownian_bridge(const Grid& g, double nu, std::uint64_t seed) {
  g.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double sd = std::sqrt(nu * g.dx());
  std::vector<double> w(g.M + 1, 0.0);
  for (int i = 1; i <= g.M; ++i) w[i] = w[i - 1] + sd * normal(rng);
  std::vector<double> b(g.M);
  for (int i = 0; i < g.M; ++i) b[i] = w[i] - w[g.M] * i / g.M;
  const double at0 = b[g.origin()];
  for (double& v : b) v -= at0;
  return b;
}

Trajectory solve_cole_hopf(const std::vector<double>& h0, double nu, double T, Grid g, std::uint64_t seed,
                           const std::vector<double>& sample_times, int max_restarts) {
  g.validate();
  if (static_cast<int>(h0.size()) != g.M) throw ParameterError("initial data does not match the grid");
  if (!(nu >= 0)) throw ParameterError("noise strength must be non-negative");
  check_samples(sample_times, T);
  Trajectory out;
  for (int attempt = 0;; ++attempt) {
    const double dt = g.step();
    HeatStep heat(g);
    WhiteNoise noise(g, sim::stream_seed(seed, static_cast<std::uint64_t>(attempt)));
    // Z = exp(-h + off) keeps values near 1; the equation is linear in Z
    std::vector<double> z(g.M), dW(g.M);
    const double h_ref = h0[g.origin()];
    for (int i = 0; i < g.M; ++i) z[i] = std::exp(-(h0[i] - h_ref));
    double off = -h_ref;  // log Z = log z + off
    const double snu = std::sqrt(nu);
    out = Trajectory{};
    out.grid = g;
    out.rejections = attempt;
    bool ok = true;
    long n = 0;
    auto record = [&](double t) {
      std::vector<double> h(g.M);
      for (int i = 0; i < g.M; ++i) h[i] = -(std::log(z[i]) + off);
      out.times.push_back(t);
      out.h.push_back(std::move(h));
    };
    for (double ts : sample_times) {
      const long target = steps_to(ts, dt);
      for (; n < target && ok; ++n) {
        if (nu > 0) {
          noise.next(dW);
          for (int i = 0; i < g.M; ++i) z[i] -= snu * z[i] * dW[i];
        }
        heat.apply(z);
        double mx = 0;
        for (double v : z) {
          if (!(v > 0)) ok = false;
          mx = std::max(mx, v);
        }
        if (!ok) break;
        for (double& v : z) v /= mx;
        off += std::log(mx);
      }
      if (!ok) break;
      record(ts);
    }
    if (ok) return out;
    if (attempt >= max_restarts) throw PositivityError("Z lost positivity after repeated step halving");
    g.dt = dt / 2;
  }
}

// ---------------------------------------------------------------- mollifiers

double bump(double u) { return std::abs(u) >= 1 ? 0.0 : std::exp(-1.0 / (1.0 - u * u)); }

namespace {

// cumulative integral of the bump on a uniform table; queries add one
// 61-point rule on the remaining piece, cheap and accurate to rounding
template <int Power>
struct BumpTable {
  static constexpr int kCells = 1024;
  static double f(double u) { return Power == 0 ? bump(u) : u * bump(u); }
  std::vector<double> cum;
  BumpTable() : cum(kCells + 1, 0.0) {
    using R = boost::math::quadrature::gauss_kronrod<double, 61>;
    for (int j = 0; j < kCells; ++j) cum[j + 1] = cum[j] + R::integrate(f, node(j), node(j + 1), 0);
  }
  static double node(int j) { return -1.0 + 2.0 * j / kCells; }
  // integral of the bump over [-1, u] for u in [-1, 1]
  double partial(double u) const {
    using R = boost::math::quadrature::gauss_kronrod<double, 61>;
    const int j = std::min(static_cast<int>((u + 1) * kCells / 2), kCells - 1);
    return cum[j] + R::integrate(f, node(j), u, 0);
  }
};

const BumpTable<0>& table() {
  static const BumpTable<0> t;
  return t;
}

// int_{-1}^u v b(v) dv, even in u
double bump_first_moment(double u) {
  static const BumpTable<1> t;
  if (std::abs(u) >= 1) return 0.0;
  return t.partial(-std::abs(u));
}

}  // namespace

double bump_mass() { return table().cum.back(); }

double bump_cdf(double u) {
  if (u <= -1) return 0.0;
  if (u >= 1) return 1.0;
  // the bump is even: integrate on the shorter side for accuracy near the ends
  if (u <= 0) return table().partial(u) / bump_mass();
  return 1.0 - table().partial(-u) / bump_mass();
}

Mollifier::Mollifier(double delta) : delta_(delta) {
  if (!(delta > 0 && delta < 1)) throw ParameterError("mollifier scale must lie in (0, 1)");
}

double Mollifier::space(double x) const { return bump(x / delta_) / (bump_mass() * delta_); }

double Mollifier::space_time(double t, double x) const {
  const double I = bump_mass();
  const double d = delta_;
  return 8.0 / (I * I) * bump(4 * t / (d * d)) * bump(2 * x / d) / (d * d * d);
}

double Mollifier::cell_mass(double a, double b, double scale) const {
  return bump_cdf(b / scale) - bump_cdf(a / scale);
}

double Mollifier::space_cell(double x, double eps) const {
  return cell_mass(x - eps / 2, x + eps / 2, delta_) / eps;
}

double Mollifier::space_time_cell(double t, double x, double eps) const {
  const double I = bump_mass(), d = delta_;
  const double time = 4.0 / I * bump(4 * t / (d * d)) / (d * d);
  // spatial factor 2/I b(2x/d)/d has cumulative bump_cdf(2x/d)
  return time * cell_mass(x - eps / 2, x + eps / 2, d / 2) / eps;
}

std::vector<double> Mollifier::space_lattice(int N) const {
  const double e = eps_of(N);
  const int n = 2 * N + 1;
  std::vector<double> out(n, 0.0);
  // cell edges (k - 1/2) eps; the masses telescope to one
  const long reach = static_cast<long>(std::ceil(delta_ / e)) + 1;
  double prev = bump_cdf((-reach - 0.5) * e / delta_);
  for (long k = -reach; k <= reach; ++k) {
    const double next = bump_cdf((k + 0.5) * e / delta_);
    const long i = ((k + N) % n + n) % n;
    out[i] += (next - prev) / e;
    prev = next;
  }
  return out;
}

std::vector<double> mollify_initial(const std::vector<double>& h0, const Grid& g, const Mollifier& m) {
  const int M = g.M;
  const double dx = g.dx();
  const int reach = static_cast<int>(std::ceil(m.delta() / dx)) + 1;
  std::vector<double> w;
  for (int k = -reach; k <= reach; ++k) w.push_back(dx * m.space_cell(k * dx, dx));
  std::vector<double> out(M, 0.0);
  for (int i = 0; i < M; ++i)
    for (int k = -reach; k <= reach; ++k) out[i] += w[k + reach] * h0[((i - k) % M + M) % M];
  return out;
}

namespace {

// Time weights of the smoothed noise. White noise is projected on coarse
// cells of r fine steps; the increment of the smoothed noise over fine step
// n = m r + q is sum_j G[q][j] S_{m-j}, with S the spatially smoothed cell
// increments and G the exact double integral of the time profile.
struct TimeWeights {
  int r = 1, jmin = 0, jmax = 0;
  std::vector<std::vector<double>> G;  // G[q][j - jmin]
};

TimeWeights time_weights(double delta, double dt) {
  constexpr int kCellsPerHalfWidth = 16;
  const double hw = delta * delta / 4;
  const double I = bump_mass();
  TimeWeights w;
  w.r = std::max(1, static_cast<int>(std::floor(hw / kCellsPerHalfWidth / dt)));
  const double Dt = w.r * dt;
  w.jmin = static_cast<int>(std::floor(-hw / Dt)) - 1;
  w.jmax = static_cast<int>(std::ceil(hw / Dt)) + 1;
  // P2(x) = int_{-inf}^x P, P the cumulative time profile; P2(x) = x P(x) - first moment on (-inf, x]
  auto moment = [&](double x) { return hw * bump_first_moment(4 * x / (delta * delta)) / I; };
  // all arguments are integer multiples of dt
  const long imin = static_cast<long>(w.jmin - 1) * w.r, imax = static_cast<long>(w.jmax + 1) * w.r + w.r;
  std::vector<double> P2(imax - imin + 1);
  for (long i = imin; i <= imax; ++i) {
    const double x = i * dt;
    P2[i - imin] = x >= hw ? x : x * bump_cdf(4 * x / (delta * delta)) - moment(x);
  }
  auto p2 = [&](long i) { return P2[i - imin]; };
  w.G.assign(w.r, std::vector<double>(w.jmax - w.jmin + 1, 0.0));
  for (int q = 0; q < w.r; ++q)
    for (int j = w.jmin; j <= w.jmax; ++j) {
      const long a = q + static_cast<long>(j) * w.r;  // step start minus cell start, in fine steps
      w.G[q][j - w.jmin] = (p2(a + 1) - p2(a) - p2(a + 1 - w.r) + p2(a - w.r)) / Dt;
    }
  return w;
}

}  // namespace

Trajectory mollified_kpz(const std::vector<double>& h0, double nu, double delta, double C, double T, Grid g,
                         std::uint64_t seed, const std::vector<double>& sample_times, bool noise) {
  g.validate();
  if (static_cast<int>(h0.size()) != g.M) throw ParameterError("initial data does not match the grid");
  if (!(nu >= 0)) throw ParameterError("noise strength must be non-negative");
  check_samples(sample_times, T);
  Mollifier{delta};  // validates delta
  const int M = g.M;
  const double dt = g.step(), dx = g.dx();
  HeatStep heat(g);

  const TimeWeights tw = time_weights(delta, dt);
  const int Jx = static_cast<int>(std::ceil(delta / 2 / dx));
  std::vector<double> wx(2 * Jx + 1);
  for (int k = -Jx; k <= Jx; ++k)
    wx[k + Jx] = bump_cdf(2 * (k + 0.5) * dx / delta) - bump_cdf(2 * (k - 0.5) * dx / delta);
  // coarse cell increments dW ~ N(0, Dt/dx), smoothed in space by the cell masses wx
  WhiteNoise wn(Grid{M, tw.r * dt}, seed);
  std::deque<std::vector<double>> cells;  // cells[c] is cell m - jmax + c
  std::vector<double> dW(M);
  auto push_cell = [&] {
    std::vector<double> s(M, 0.0);
    if (noise && nu > 0) {
      wn.next(dW);
      for (int i = 0; i < M; ++i)
        for (int k = -Jx; k <= Jx; ++k) s[i] += wx[k + Jx] * dW[((i - k) % M + M) % M];
    }
    cells.push_back(std::move(s));
  };
  for (int j = tw.jmax; j >= tw.jmin; --j) push_cell();

  std::vector<double> h = h0, drift(M), zeta(M);
  const double snu = std::sqrt(nu);
  Trajectory out;
  out.grid = g;
  long n = 0;
  for (double ts : sample_times) {
    const long target = steps_to(ts, dt);
    for (; n < target; ++n) {
      const int q = static_cast<int>(n % tw.r);
      if (q == 0 && n > 0) {
        cells.pop_front();
        push_cell();
      }
      std::fill(zeta.begin(), zeta.end(), 0.0);
      if (noise && nu > 0)
        for (int j = tw.jmin; j <= tw.jmax; ++j) {
          const double w = tw.G[q][j - tw.jmin];
          if (w == 0) continue;
          const auto& c = cells[tw.jmax - j];
          for (int i = 0; i < M; ++i) zeta[i] += w * c[i];
        }
      double gmax = 0;
      for (int i = 0; i < M; ++i) {
        const double gr = (h[(i + 1) % M] - h[(i + M - 1) % M]) / (2 * dx);
        gmax = std::max(gmax, std::abs(gr));
        drift[i] = -0.5 * (gr * gr - C);
      }
      // transport part of the explicit step: |h'| dt / dx must stay below 1/2
      if (gmax * dt / dx > 0.5) throw CflError("explicit gradient term violates the CFL bound", 0.25 * dx / gmax);
      for (int i = 0; i < M; ++i) h[i] += drift[i] * dt + snu * zeta[i];
      heat.apply(h);
    }
    out.times.push_back(ts);
    out.h.push_back(h);
  }
  return out;
}

// ---------------------------------------------------------------- statistics

OnePoint one_point(std::vector<double> v) {
  OnePoint o;
  o.n = static_cast<int>(v.size());
  if (o.n == 0) return o;
  double s = 0;
  for (double x : v) s += x;
  o.mean = s / o.n;
  double m2 = 0, m4 = 0;
  for (double x : v) {
    const double d = (x - o.mean) * (x - o.mean);
    m2 += d;
    m4 += d * d;
  }
  if (o.n > 1) {
    o.var = m2 / (o.n - 1);
    // standard error of the sample variance from the fourth central moment
    const double mu2 = m2 / o.n, mu4 = m4 / o.n;
    o.var_se = std::sqrt(std::max(mu4 - mu2 * mu2, 0.0) / o.n);
  }
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double pos = p * (o.n - 1);
    const int lo = static_cast<int>(std::floor(pos));
    const int hi = std::min(lo + 1, o.n - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
  };
  o.quartiles = {q(0.25), q(0.5), q(0.75)};
  return o;
}

OnePoint cole_hopf_reference(double nu, double t, int paths, Grid g, std::uint64_t seed) {
  std::vector<double> vals;
  vals.reserve(paths);
  for (int p = 0; p < paths; ++p) {
    const auto h0 = brownian_bridge(g, nu, sim::stream_seed(seed, 2 * static_cast<std::uint64_t>(p)));
    const auto tr = solve_cole_hopf(h0, nu, t, g, sim::stream_seed(seed, 2 * static_cast<std::uint64_t>(p) + 1), {t});
    vals.push_back(tr.h.back()[g.origin()] - h0[g.origin()]);
  }
  return one_point(std::move(vals));
}

ConvergenceReport grid_convergence(double nu, double t, int paths, int M, std::uint64_t seed) {
  ConvergenceReport r;
  r.M_coarse = M;
  r.M_fine = 2 * M;
  r.coarse = cole_hopf_reference(nu, t, paths, Grid{M, 0}, seed);
  r.fine = cole_hopf_reference(nu, t, paths, Grid{2 * M, 0}, seed + 1);
  r.difference = r.fine.var - r.coarse.var;
  r.combined_se = std::hypot(r.fine.var_se, r.coarse.var_se);
  r.within_error = std::abs(r.difference) <= 3 * r.combined_se;
  return r;
}

}  // namespace wasep::kpz
