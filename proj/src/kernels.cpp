#include "wasep/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wasep/quad.hpp"

namespace wasep::kern {

namespace {

constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;

// q(s,k) for any integer k from a row indexed by |k|.
inline double at_row(const std::vector<double>& row, long k) {
  const std::size_t a = static_cast<std::size_t>(k < 0 ? -k : k);
  return a < row.size() ? row[a] : 0.0;
}

// Q on the unit lattice at site k from a row of q.
inline double q_prod(const std::vector<double>& row, long k) {
  return (at_row(row, k) - at_row(row, k - 1)) * (at_row(row, k + 1) - at_row(row, k));
}

}  // namespace

// ---- multipliers ----

double f_line(double x) {
  if (x == 0.0) return 4.0 * kPi * kPi;
  const double s = std::sin(kPi * x) / x;
  return 4.0 * s * s;
}

cd m_plus_line(double x) {
  if (x == 0.0) return {2.0 * kPi, 0.0};
  return 2.0 * std::sin(kPi * x) / x * std::polar(1.0, kPi * x);
}

cd m_minus_line(double x) {
  if (x == 0.0) return {2.0 * kPi, 0.0};
  return 2.0 * std::sin(kPi * x) / x * std::polar(1.0, -kPi * x);
}

double f_torus(int N, int k) {
  const double e = eps_of(N);
  const double s = std::sin(0.5 * kPi * e * k);
  return 2.0 * s * s / (e * e);
}

// sin forms avoid the cancellation in e^{i phi} - 1 at small phi
cd m_torus_plus(int N, int k) {
  const double e = eps_of(N), h = 0.5 * kPi * e * k;
  return cd(0.0, 2.0 * std::sin(h) / e) * std::polar(1.0, h);
}

cd m_torus_minus(int N, int k) {
  const double e = eps_of(N), h = 0.5 * kPi * e * k;
  return cd(0.0, 2.0 * std::sin(h) / e) * std::polar(1.0, -h);
}

// ---- unit-lattice kernel ----

int bessel_reach(double s) { return static_cast<int>(std::ceil(10.0 * std::sqrt(std::max(s, 0.0)) + 45.0)); }

std::vector<double> scaled_bessel_row(double s, int kmax) {
  if (s < 0) throw ParameterError("negative time");
  if (!(s < 1e12)) throw ParameterError("time too large for the Bessel recurrence");
  std::vector<double> out(static_cast<std::size_t>(kmax) + 1, 0.0);
  if (s == 0.0) {
    out[0] = 1.0;
    return out;
  }
  // Miller: run I_{k-1} = (2k/s) I_k + I_{k+1} down from well past the
  // support and fix the scale with I_0 + 2 sum I_k = e^s.
  const int M = std::max(kmax, bessel_reach(s)) + 20;
  std::vector<double> b(static_cast<std::size_t>(M) + 2, 0.0);
  b[M] = 1.0;
  for (int k = M; k >= 1; --k) {
    b[k - 1] = (2.0 * k / s) * b[k] + b[k + 1];
    if (b[k - 1] > 1e250) {
      for (int j = k - 1; j <= M; ++j) b[j] *= 1e-250;
    }
  }
  double norm = 0.0;
  for (int k = M; k >= 1; --k) norm += b[k];
  norm = 2.0 * norm + b[0];
  for (int k = 0; k <= kmax; ++k) out[k] = b[k] / norm;
  return out;
}

double q_unit(double s, long k) {
  const long a = k < 0 ? -k : k;
  return scaled_bessel_row(s, static_cast<int>(a))[a];
}

double q_unit_fourier(double s, long k, double tol) {
  // periodic trapezoid is exact for trigonometric polynomials of degree < n
  int n = 2 * (static_cast<int>(k < 0 ? -k : k) + bessel_reach(s)) + 64;
  auto sum = [&](int m) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      const double th = 2.0 * kPi * j / m;
      acc += std::exp(-s * (1.0 - std::cos(th))) * std::cos(static_cast<double>(k) * th);
    }
    return acc / m;
  };
  double prev = sum(n);
  for (int it = 0; it < 6; ++it) {
    n *= 2;
    const double cur = sum(n);
    if (std::abs(cur - prev) <= tol * std::abs(cur) + 1e-16) return cur;
    prev = cur;
  }
  throw QuadratureError("Fourier integral for q did not converge", std::abs(prev));
}

double scaled_bessel_asymptotic(double s, int nu) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, acc = 1.0;
  for (int m = 1; m <= 12; ++m) {
    const double a = 2.0 * m - 1.0;
    term *= -(mu - a * a) / (8.0 * m * s);
    acc += term;
    if (std::abs(term) < 1e-18 * std::abs(acc)) break;
  }
  return acc / std::sqrt(2.0 * kPi * s);
}

// ---- line kernels ----

double eval_G(double eps, double t, long k) {
  if (t == 0.0) return k == 0 ? 1.0 / eps : 0.0;
  return q_unit(t / (eps * eps), k) / eps;
}

double eval_G_fourier(double eps, double t, long k) {
  if (t == 0.0) return k == 0 ? 1.0 / eps : 0.0;
  return q_unit_fourier(t / (eps * eps), k) / eps;
}

std::vector<double> G_row(double eps, double t, int kmax) {
  auto row = scaled_bessel_row(t / (eps * eps), kmax);
  for (double& v : row) v /= eps;
  return row;
}

double eval_Q(double eps, double t, long k) {
  const long a = k < 0 ? -k : k;
  const auto row = scaled_bessel_row(t / (eps * eps), static_cast<int>(a) + 1);
  return q_prod(row, k) / std::pow(eps, 4);
}

double heat_kernel(double t, double x) { return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * kPi * t); }

double heat_kernel_dx(double t, double x) { return -x / t * heat_kernel(t, x); }

// ---- circle kernels ----

double eval_P(int N, double t, long k) {
  const long n = 2L * N + 1;
  double acc = 0.0;
  for (int j = -N; j <= N; ++j) {
    // angle pi*eps*j*k = 2 pi (j k mod n) / n, reduced exactly
    const long m = ((static_cast<long>(j) * k) % n + n) % n;
    acc += std::exp(-f_torus(N, j) * t) * std::cos(2.0 * kPi * m / n);
  }
  return 0.5 * acc;
}

double eval_P_images(int N, double t, long k) {
  const double e = eps_of(N);
  const long n = 2L * N + 1;
  const int K = bessel_reach(t / (e * e)) + static_cast<int>(n);
  const auto row = G_row(e, t, K);
  double acc = 0.0;
  for (long m = -(K / n) - 2; m <= K / n + 2; ++m) acc += at_row(row, k + m * n);
  return acc;
}

double eval_Q_per(int N, double t, long k) {
  const double e = eps_of(N);
  const long n = 2L * N + 1;
  const int K = bessel_reach(t / (e * e)) + static_cast<int>(n) + 1;
  const auto row = scaled_bessel_row(t / (e * e), K);
  double acc = 0.0;
  for (long m = -(K / n) - 2; m <= K / n + 2; ++m) acc += q_prod(row, k + m * n);
  return acc / std::pow(e, 4);
}

std::vector<double> Q_per_hat(int N, double t) {
  const double e = eps_of(N);
  const long n = 2L * N + 1;
  const int K = bessel_reach(t / (e * e)) + 1;
  const auto row = scaled_bessel_row(t / (e * e), K);
  // fold the line onto one period first, then take cosine sums
  std::vector<double> folded(static_cast<std::size_t>(n), 0.0);
  for (long k = -K; k <= K; ++k) folded[static_cast<std::size_t>(((k % n) + n) % n)] += q_prod(row, k);
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  const double scale = e / std::pow(e, 4);
  for (int j = 0; j <= N; ++j) {
    double acc = 0.0;
    for (long r = 0; r < n; ++r) acc += folded[r] * std::cos(2.0 * kPi * ((j * r) % n) / n);
    out[N + j] = out[N - j] = scale * acc;
  }
  return out;
}

namespace {

// eps-weighted transform of Q_per at frequency k as the convolution of the
// transforms of grad^- G and grad^+ G over the dual circle.
double q_hat_convolution(int N, double t, int k) {
  const double e = eps_of(N);
  const double s = t / (e * e), phi = kPi * e * k;
  const int n = 4 * bessel_reach(s) + 64;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double th = -kPi + 2.0 * kPi * j / n;
    const cd a = (1.0 - std::polar(1.0, -th)) * (std::polar(1.0, phi - th) - 1.0);
    acc += (a * std::exp(-s * (2.0 - std::cos(th) - std::cos(phi - th)))).real();
  }
  return acc / n / (e * e * e);
}

// int_t^infty of the same transform, done in closed form in time.
double q_hat_tail_fourier(int N, double t, int k) {
  const double e = eps_of(N);
  const double s = t / (e * e), phi = kPi * e * k;
  auto sum = [&](int n) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double th = -kPi + 2.0 * kPi * (j + 0.5) / n;
      const double den = 2.0 - std::cos(th) - std::cos(phi - th);
      cd a = (1.0 - std::polar(1.0, -th)) * (std::polar(1.0, phi - th) - 1.0);
      // the ratio is smooth; at k = 0 it reduces to e^{-i theta}
      const cd r = k == 0 ? std::polar(1.0, -th) : a / den;
      acc += (r * std::exp(-s * den)).real();
    }
    return acc / n / e;
  };
  int n = 16 * (2 * N + 1) + 4 * bessel_reach(s);
  double prev = sum(n);
  for (int it = 0; it < 8; ++it) {
    n *= 2;
    const double cur = sum(n);
    if (std::abs(cur - prev) <= 1e-12 / e) return cur;
    prev = cur;
  }
  throw QuadratureError("tail transform of Q did not converge", std::abs(prev));
}

}  // namespace

double eval_Q_per_fourier(int N, double t, long k) {
  const long n = 2L * N + 1;
  double acc = 0.0;
  for (int j = -N; j <= N; ++j) {
    const long m = ((static_cast<long>(j) * k) % n + n) % n;
    acc += q_hat_convolution(N, t, j) * std::cos(2.0 * kPi * m / n);
  }
  return 0.5 * acc;
}

// ---- identities ----

namespace {

struct RowSums {
  double q, abs_q;
};

RowSums row_sums(double s) {
  const int K = bessel_reach(s) + 1;
  const auto row = scaled_bessel_row(s, K);
  double q = 0.0, a = 0.0;
  for (long k = -K; k <= K; ++k) {
    const double v = q_prod(row, k);
    q += v;
    a += std::abs(v);
  }
  return {q, a};
}

}  // namespace

QIntegral check_q_zero_integral(double eps, double T_cut) {
  if (!(eps > 0) || !(T_cut > 0)) throw ParameterError("eps and T_cut must be positive");
  const double S = T_cut / (eps * eps);
  const auto rule = quad::graded(0.0, S, std::min(1.0, S));
  double q = 0.0, a = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const auto r = row_sums(rule.x[i]);
    q += rule.w[i] * r.q;
    a += rule.w[i] * r.abs_q;
  }
  QIntegral out;
  // eps sum_x int Q^eps dt = eps^{-1} int sum Q dt on the unit lattice
  out.integral = q / eps;
  out.abs_integral = a / eps;
  out.tail = q_unit_fourier(2.0 * S, 1) / eps;
  out.residual = std::abs(out.integral + out.tail);
  const double abs_tail = out.tail + 1.0 / (8.0 * kPi * S * S) / eps;
  out.relative = out.residual / (out.abs_integral + abs_tail);
  return out;
}

SumIdentity q_sum_identity(double eps, double t) {
  auto pair_sum = [&](double tt) {
    const double s = tt / (eps * eps);
    const int K = bessel_reach(s) + 1;
    const auto row = scaled_bessel_row(s, K);
    double acc = 0.0;
    for (long k = -K; k <= K; ++k) acc += at_row(row, k) * at_row(row, k + 1);
    return acc / eps;  // eps sum_x G G with G = q / eps
  };
  const double h = 1e-3 * t;
  // fourth-order central difference
  const double d = (-pair_sum(t + 2 * h) + 8 * pair_sum(t + h) - 8 * pair_sum(t - h) + pair_sum(t - 2 * h)) / (12 * h);
  const auto r = row_sums(t / (eps * eps));
  return {eps * r.q / std::pow(eps, 4), -d};
}

ThetaEstimate estimate_theta(double T_cut) {
  const auto rule = quad::graded(0.0, T_cut, 1.0);
  double v = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) v += rule.w[i] * row_sums(rule.x[i]).abs_q;
  // beyond T_cut: sum |Q| = sum Q + 2 (q0 - q1)^2 since q is unimodal in k,
  // and int_T^infty sum Q = q(2T, 1)
  double tail = q_unit_fourier(2.0 * T_cut, 1);
  auto dq2 = [](double s) {
    const double d = s < 1e3 ? q_unit(s, 0) - q_unit(s, 1)
                             : scaled_bessel_asymptotic(s, 0) - scaled_bessel_asymptotic(s, 1);
    return d * d;
  };
  const double upper = 1e6 * T_cut;
  double lo = T_cut, sq = 0.0;
  while (lo < upper) {
    const auto g = quad::gauss(lo, 2.0 * lo);
    for (std::size_t i = 0; i < g.x.size(); ++i) sq += g.w[i] * dq2(g.x[i]);
    lo *= 2.0;
  }
  // (q0 - q1)^2 ~ 1/(8 pi s^3) beyond the last panel
  const double rest = 1.0 / (16.0 * kPi * lo * lo);
  tail += 2.0 * (sq + rest);
  ThetaEstimate out{v + tail, tail, 4.0 * rest + 1e-15};
  if (!(out.value < 1.0 - out.tail_bound))
    throw QuadratureError("Theta estimate not certified below 1", out.tail_bound);
  return out;
}

double check_offdiagonal(double eps, double T, int mmax) {
  const double per = 2.0 / eps;
  const long n = std::lround(per);
  if (std::abs(per - n) > 1e-9 * per)
    throw ParameterError("2/eps must be an integer for the period-2 shift");
  if (T <= 0) return 0.0;
  const auto rule = quad::graded(0.0, T, std::min(T, eps * eps));
  double total = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double s = rule.x[i] / (eps * eps);
    const int R = bessel_reach(s) + 1;
    const auto row = scaled_bessel_row(s, R + mmax * static_cast<int>(n) + 2);
    double acc = 0.0;
    for (long k = -R; k <= R; ++k) {
      const double dm = at_row(row, k) - at_row(row, k - 1);
      for (int m = -mmax; m <= mmax; ++m) {
        if (m == 0) continue;
        const long y = k + m * n;
        acc += std::abs(dm * (at_row(row, y + 1) - at_row(row, y)));
      }
    }
    total += rule.w[i] * eps * acc / std::pow(eps, 4);
  }
  return total;
}

L1Distances kernel_comparison_L1(double eps, double T) {
  if (!(eps > 0) || !(T > 0)) throw ParameterError("eps and T must be positive");
  const auto rule = quad::graded(0.0, T, 1e-3 * eps * eps);
  L1Distances out{0, 0, 0};
  for (std::size_t it = 0; it < rule.x.size(); ++it) {
    const double t = rule.x[it], s = t / (eps * eps), sd = std::sqrt(t);
    const int K = std::max(bessel_reach(s) + 1, static_cast<int>(std::ceil(12.0 * sd / eps)) + 2);
    const auto row = G_row(eps, t, K + 1);
    double dG = 0, dm = 0, dp = 0;
    for (long k = -K; k <= K; ++k) {
      const double x = eps * k;
      const double g = at_row(row, k);
      const double gm = (g - at_row(row, k - 1)) / eps;
      const double gp = (at_row(row, k + 1) - g) / eps;
      const double dist = std::max(0.0, std::abs(x) - 0.5 * eps);
      if (dist > 12.0 * sd) {
        // continuum kernel negligible on this cell
        dG += std::abs(g) * eps;
        dm += std::abs(gm) * eps;
        dp += std::abs(gp) * eps;
        continue;
      }
      const int panels = std::clamp(static_cast<int>(std::ceil(2.0 * eps / sd)), 1, 400);
      const auto cell = quad::uniform(x - 0.5 * eps, x + 0.5 * eps, panels);
      for (std::size_t j = 0; j < cell.x.size(); ++j) {
        const double c = heat_kernel(t, cell.x[j]), cd_ = heat_kernel_dx(t, cell.x[j]);
        dG += cell.w[j] * std::abs(g - c);
        dm += cell.w[j] * std::abs(gm - cd_);
        dp += cell.w[j] * std::abs(gp - cd_);
      }
    }
    out.G += rule.w[it] * dG;
    out.grad_minus += rule.w[it] * dm;
    out.grad_plus += rule.w[it] * dp;
  }
  return out;
}

// ---- convolver ----

QConvolver::QConvolver(int N, double dt, int nt) : N_(N), dt_(dt), nt_(nt) {
  if (!(dt > 0) || nt < 1) throw ParameterError("need dt > 0 and at least one step");
  const int n = 2 * N + 1;
  const double e = eps_of(N);
  cos_.assign(n, std::vector<double>(n));
  sin_.assign(n, std::vector<double>(n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      // pi * k * x with k = j - N and x = eps (i - N)
      const long m = ((static_cast<long>(j - N) * (i - N)) % n + n) % n;
      cos_[j][i] = std::cos(2.0 * kPi * m / n);
      sin_[j][i] = std::sin(2.0 * kPi * m / n);
    }
  A_.assign(nt + 1, std::vector<double>(n, 0.0));
  B_.assign(nt + 1, std::vector<double>(n, 0.0));
  for (int l = 1; l <= nt; ++l) {
    const double a = (l - 1) * dt, b = l * dt;
    const auto rule = l == 1 ? quad::graded(a, b, 1e-3 * e * e) : quad::gauss(a, b);
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const auto qh = q_hat(rule.x[q]);
      const double wa = rule.w[q] * (b - rule.x[q]) / dt, wb = rule.w[q] * (rule.x[q] - a) / dt;
      for (int j = 0; j < n; ++j) {
        A_[l][j] += wa * qh[j];
        B_[l][j] += wb * qh[j];
      }
    }
  }
  tail_.assign(nt + 1, std::vector<double>(n, 0.0));
  for (int i = 0; i <= nt; ++i) tail_[i] = q_hat_tail(i * dt);
}

std::vector<double> QConvolver::q_hat(double t) const { return Q_per_hat(N_, t); }

std::vector<double> QConvolver::q_hat_tail(double t) const {
  const int n = 2 * N_ + 1;
  std::vector<double> out(n);
  for (int k = 0; k <= N_; ++k) out[N_ + k] = out[N_ - k] = q_hat_tail_fourier(N_, t, k);
  return out;
}

std::vector<cd> QConvolver::forward_slice(const std::vector<double>& f) const {
  const int n = 2 * N_ + 1;
  const double e = eps_of(N_);
  if (static_cast<int>(f.size()) != n) throw ParameterError("slice lives on a different lattice");
  std::vector<cd> out(n);
  for (int j = 0; j < n; ++j) {
    double re = 0, im = 0;
    for (int i = 0; i < n; ++i) {
      re += f[i] * cos_[j][i];
      im -= f[i] * sin_[j][i];
    }
    out[j] = {e * re, e * im};
  }
  return out;
}

std::vector<double> QConvolver::inverse_slice(const std::vector<cd>& s) const {
  const int n = 2 * N_ + 1;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0;
    for (int j = 0; j < n; ++j) acc += s[j].real() * cos_[j][i] - s[j].imag() * sin_[j][i];
    out[i] = 0.5 * acc;
  }
  return out;
}

std::vector<cd> QConvolver::apply_hat_at(const Spec& s, int i, History h) const {
  const int n = 2 * N_ + 1;
  if (i < 0 || i > nt_ || static_cast<int>(s.size()) <= i) throw ParameterError("slice index outside the history");
  std::vector<cd> o(n, cd(0, 0));
  for (int l = 1; l <= i; ++l)
    for (int j = 0; j < n; ++j) o[j] += B_[l][j] * s[i - l][j] + A_[l][j] * s[i - l + 1][j];
  if (h == History::Frozen)
    for (int j = 0; j < n; ++j) o[j] += tail_[i][j] * s[0][j];
  return o;
}

QConvolver::Spec QConvolver::forward(const SpaceTimeField& f) const {
  Spec out;
  out.reserve(f.slices.size());
  for (const auto& sl : f.slices) out.push_back(forward_slice(sl));
  return out;
}

SpaceTimeField QConvolver::inverse(const Spec& s) const {
  SpaceTimeField out(N_, dt_, static_cast<int>(s.size()) - 1);
  for (std::size_t t = 0; t < s.size(); ++t) out.slices[t] = inverse_slice(s[t]);
  return out;
}

QConvolver::Spec QConvolver::apply_hat(const Spec& s, History h) const {
  if (static_cast<int>(s.size()) != nt_ + 1) throw ParameterError("field has the wrong number of time slices");
  Spec out;
  out.reserve(s.size());
  for (int i = 0; i <= nt_; ++i) out.push_back(apply_hat_at(s, i, h));
  return out;
}

SpaceTimeField QConvolver::apply(const SpaceTimeField& f, History h) const {
  if (f.N != N_) throw ParameterError("field lives on a different lattice");
  return inverse(apply_hat(forward(f), h));
}

double contraction_factor(double eps) {
  const double c = (1.0 + std::sqrt(eps)) * kThetaFrozen;
  if (c >= 1.0) {
    const double r = 1.0 / kThetaFrozen - 1.0;
    throw ContractionError("Neumann series needs (1+sqrt(eps))*Theta < 1, i.e. eps < " + std::to_string(r * r) +
                               ", got eps = " + std::to_string(eps),
                           eps, r * r);
  }
  return c;
}

NeumannResult neumann_apply(const SpaceTimeField& f, const QConvolver& conv, double tol, int max_terms,
                            double correction_scale, History h) {
  NeumannResult out;
  const double e = eps_of(conv.N());
  const double norm = f.sup();
  if (correction_scale == 0.0) {
    out.value = f;
    return out;
  }
  const double q = contraction_factor(e) * std::abs(correction_scale);
  if (q >= 1.0) throw ContractionError("scaled series is not contractive", e, 1.0);
  const double c = -e * (1.0 + std::sqrt(e)) * correction_scale;
  auto term = conv.forward(f);
  auto sum = term;
  int n = 0;
  double bound = q / (1.0 - q) * norm;
  while (bound >= tol && (max_terms < 0 || n < max_terms)) {
    term = conv.apply_hat(term, h);
    for (auto& sl : term)
      for (auto& v : sl) v *= c;
    for (std::size_t t = 0; t < sum.size(); ++t)
      for (std::size_t j = 0; j < sum[t].size(); ++j) sum[t][j] += term[t][j];
    ++n;
    bound = std::pow(q, n + 1) / (1.0 - q) * norm;
    if (n > 10000) throw ContractionError("Neumann series did not reach tolerance", e, q);
  }
  out.value = conv.inverse(sum);
  out.bound = bound;
  out.terms = n;
  return out;
}

ModifiedKernels modified_kernels(const QConvolver& conv, double tol, double correction_scale) {
  const int N = conv.N(), nt = conv.nt(), n = 2 * N + 1;
  const double e = eps_of(N), dt = conv.dt();
  ModifiedKernels out;
  out.P = SpaceTimeField(N, dt, nt);
  for (int i = 0; i <= nt; ++i)
    for (int x = 0; x < n; ++x) out.P.slices[i][x] = eval_P(N, i * dt, x - N);

  // H1 = Q *^+ G in Fourier, done by quadrature because G is singular at 0
  QConvolver::Spec H(nt + 1, std::vector<cd>(n, cd(0, 0)));
  std::vector<double> fk(n);
  for (int j = 0; j < n; ++j) fk[j] = f_torus(N, j - N);
  for (int i = 1; i <= nt; ++i) {
    const double t = i * dt;
    const auto rule = quad::graded(0.0, t, 1e-2 * e * e, true);
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const auto qh = conv.q_hat(rule.x[q]);
      for (int j = 0; j < n; ++j) H[i][j] += rule.w[q] * qh[j] * std::exp(-fk[j] * (t - rule.x[q]));
    }
  }

  double h1 = 0;
  for (const auto& sl : H)
    for (const auto& v : sl) h1 = std::max(h1, std::abs(v));
  h1 *= 0.5 * n;  // crude sup of the inverse transform

  QConvolver::Spec R(nt + 1, std::vector<cd>(n, cd(0, 0)));
  if (correction_scale != 0.0) {
    const double q = contraction_factor(e) * std::abs(correction_scale);
    const double c = -e * (1.0 + std::sqrt(e)) * correction_scale;
    auto term = H;
    for (auto& sl : term)
      for (auto& v : sl) v *= c;
    int k = 1;
    for (;;) {
      for (int i = 0; i <= nt; ++i)
        for (int j = 0; j < n; ++j) R[i][j] += term[i][j];
      const double bound = std::pow(q, k) / (1.0 - q) * std::abs(c) * h1;
      out.bound = bound;
      out.terms = k;
      if (bound < tol || k > 10000) break;
      term = conv.apply_hat(term, History::Zero);
      for (auto& sl : term)
        for (auto& v : sl) v *= c;
      ++k;
    }
  }
  const auto corr = conv.inverse(R);
  out.P_tilde = out.P;
  for (int i = 0; i <= nt; ++i)
    for (int x = 0; x < n; ++x) out.P_tilde.slices[i][x] += corr.slices[i][x];

  auto tt = conv.apply_hat(R, History::Zero);
  for (int i = 0; i <= nt; ++i)
    for (int j = 0; j < n; ++j) tt[i][j] = e * (H[i][j] + tt[i][j]);
  out.P_tilde_tilde = conv.inverse(tt);
  return out;
}

}  // namespace wasep::kern
