#include "wasep/wasep.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "wasep/norms.hpp"

namespace wasep::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// uniform on [0, 1) with 53 random bits
double uniform(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

long wrap(long k, long n) { return ((k % n) + n) % n; }

// zeta at any site from one period of values and the spin sum
long zeta_at(const std::vector<long>& z, int N, int S, long k) {
  const long n = 2L * N + 1;
  const long i = wrap(k + N, n);
  const long m = (k + N - i) / n;
  return z[static_cast<std::size_t>(i)] + m * S;
}

// sigma(x), sigma(x+1) -> bond type: 0 left jump possible, 1 right jump possible, -1 none
int bond_type(int a, int b) {
  if (a < 0 && b > 0) return 0;
  if (a > 0 && b < 0) return 1;
  return -1;
}

Rates rates_for(const SpinConfig& c, Phase p) {
  return p == Phase::Asymmetric ? asymmetric_rates(c.eps()) : symmetric_rates(c.eps(), c.density());
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t path) {
  return splitmix64(splitmix64(seed) ^ splitmix64(path + 0x632BE59BD9B4E019ULL));
}

int SpinConfig::sum() const {
  int s_ = 0;
  for (auto v : s) s_ += v;
  return s_;
}

SpinConfig init_bernoulli(int N, double rho, std::uint64_t seed) {
  if (N < 1) throw ParameterError("N must be at least 1");
  if (!(rho > -1.0 && rho < 1.0)) throw ParameterError("density must lie in (-1, 1)");
  std::mt19937_64 g(seed);
  SpinConfig c(N);
  const double p = 0.5 * (1.0 + rho);
  for (auto& v : c.s) v = uniform(g) < p ? 1 : -1;
  return c;
}

SpinConfig init_fixed_sum(int N, int sum, std::uint64_t seed) {
  if (N < 1) throw ParameterError("N must be at least 1");
  const int n = 2 * N + 1;
  if (std::abs(sum) > n || (sum + n) % 2 != 0) throw ParameterError("spin sum must be odd and at most 2N+1");
  SpinConfig c(N);
  const int plus = (n + sum) / 2;
  for (int i = 0; i < plus; ++i) c.s[static_cast<std::size_t>(i)] = 1;
  // Fisher-Yates with our own index draw, so the result is library independent
  std::mt19937_64 g(seed);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(uniform(g) * (i + 1));
    std::swap(c.s[static_cast<std::size_t>(i)], c.s[static_cast<std::size_t>(j)]);
  }
  return c;
}

Rates asymmetric_rates(double eps) { return {0.5 + std::sqrt(eps), 0.5}; }

double nu_eps(double eps, double rho) { return (1.0 + std::sqrt(eps)) * (1.0 - rho * rho); }

double stationary_bracket_mean(int N, int sum) {
  const int n = 2 * N + 1;
  if (std::abs(sum) > n || (sum - n) % 2 != 0) throw ParameterError("spin sum must have the parity of the site count");
  // neighbouring spins are anticorrelated by (1 - rho^2)/(n - 1) under the uniform law
  const double rho = static_cast<double>(sum) / n;
  return nu_eps(eps_of(N), rho) * n / (n - 1.0);
}

Rates symmetric_rates(double eps, double rho) {
  const double r = 0.5 * nu_eps(eps, rho);
  return {r, r};
}

std::vector<long> height_of(const SpinConfig& c) {
  const int N = c.N;
  std::vector<long> z(static_cast<std::size_t>(c.size()), 0);
  for (int k = 1; k <= N; ++k) z[N + k] = z[N + k - 1] + c.spin(k);
  for (int k = -1; k >= -N; --k) z[N + k] = z[N + k + 1] - c.spin(k + 1);
  return z;
}

TwoRoutes generator_drift(const SpinConfig& c, long x, Phase p) {
  const double e = c.eps(), se = std::sqrt(e);
  const auto z = height_of(c);
  const int S = c.sum();
  const double hm = se * zeta_at(z, c.N, S, x - 1), h0 = se * zeta_at(z, c.N, S, x),
               hp = se * zeta_at(z, c.N, S, x + 1);
  const double lap = (hp - 2 * h0 + hm) / (e * e), gm = (h0 - hm) / e, gp = (hp - h0) / e;
  TwoRoutes out;
  if (p == Phase::Asymmetric)
    out.formula = 0.5 * ((1 + se) * lap - gm * gp + 1.0 / e);
  else
    out.formula = 0.5 * nu_eps(e, c.density()) * lap;
  const Rates r = rates_for(c, p);
  const int t = bond_type(c.spin(x), c.spin(x + 1));
  double v = 0;
  if (t == 0) v += r.left * 2 * se;
  if (t == 1) v -= r.right * 2 * se;
  out.enumeration = v / (e * e);
  return out;
}

TwoRoutes bracket_density(const SpinConfig& c, long x, Phase p) {
  const double e = c.eps(), se = std::sqrt(e);
  const auto z = height_of(c);
  const int S = c.sum();
  const double hm = se * zeta_at(z, c.N, S, x - 1), h0 = se * zeta_at(z, c.N, S, x),
               hp = se * zeta_at(z, c.N, S, x + 1);
  const double lap = (hp - 2 * h0 + hm) / (e * e), gm = (h0 - hm) / e, gp = (hp - h0) / e;
  TwoRoutes out;
  if (p == Phase::Asymmetric)
    out.formula = (1 + se) * (1 - e * gm * gp) + e * e * lap;
  else
    out.formula = nu_eps(e, c.density()) * (1 - e * gm * gp);
  const Rates r = rates_for(c, p);
  const int t = bond_type(c.spin(x), c.spin(x + 1));
  double v = 0;
  const double jump2 = 4 * e;  // (2 sqrt eps)^2
  if (t == 0) v += r.left * jump2;
  if (t == 1) v += r.right * jump2;
  out.enumeration = e * v / (e * e);
  return out;
}

double tilted_bracket(const LatticeField& f, long k, double rho) {
  const double e = f.eps(), se = std::sqrt(e);
  const double hm = f.at(k - 1), h0 = f.at(k), hp = f.at(k + 1);
  const double gm = (h0 - hm) / e, gp = (hp - h0) / e, g = (hp - hm) / (2 * e), lap = (hp - 2 * h0 + hm) / (e * e);
  return nu_eps(e, rho) - (1 + se) * (e * gm * gp + 2 * rho * se * g) + e * e * lap;
}

LatticeField bracket_fluctuation(const LatticeField& f, double rho) {
  LatticeField out(f.N);
  const double nu = nu_eps(f.eps(), rho);
  for (int i = 0; i < f.size(); ++i) out.v[static_cast<std::size_t>(i)] = tilted_bracket(f, i - f.N, rho) - nu;
  return out;
}

LatticeField gradient_product(const LatticeField& f) {
  LatticeField out(f.N);
  const double e = f.eps();
  for (int i = 0; i < f.size(); ++i) {
    const long k = i - f.N;
    out.v[static_cast<std::size_t>(i)] = (f.at(k) - f.at(k - 1)) * (f.at(k + 1) - f.at(k)) / (e * e);
  }
  return out;
}

long tilt_index(double rho, double eps, double t) { return static_cast<long>(std::trunc(rho * std::pow(eps, -1.5) * t)); }

// ---------------------------------------------------------------- simulator

Simulator::Simulator(SpinConfig init, std::uint64_t seed)
    : N_(init.N),
      n_(init.size()),
      eps_(init.eps()),
      sqe_(std::sqrt(eps_)),
      S_(init.sum()),
      cfg_(std::move(init)),
      rates_(asymmetric_rates(eps_)),
      rng_(seed) {
  zeta_ = height_of(cfg_);
  h0_.resize(n_);
  for (int i = 0; i < n_; ++i) h0_[i] = sqe_ * zeta_[i];
  pos_.assign(n_, -1);
  type_.assign(n_, -1);
  drift_now_.assign(n_, 0);
  brk_now_.assign(n_, 0);
  drift_acc_.assign(n_, 0);
  brk_acc_.assign(n_, 0);
  last_.assign(n_, 0);
  jumps_.assign(n_, 0);
  for (int b = 0; b < n_; ++b) {
    set_bond_type(b);
    refresh_site(b);
  }
  next_shift_ = next_shift_tau();
  resample();
}

long Simulator::zeta(long k) const { return zeta_at(zeta_, N_, S_, k); }

void Simulator::set_bond_type(int b) {
  const int t = bond_type(cfg_.s[b], cfg_.s[(b + 1) % n_]);
  if (t == type_[b]) return;
  if (type_[b] >= 0) {
    auto& l = list_[type_[b]];
    const int p = pos_[b], last = l.back();
    l[p] = last;
    pos_[last] = p;
    l.pop_back();
    pos_[b] = -1;
  }
  type_[b] = static_cast<std::int8_t>(t);
  if (t >= 0) {
    pos_[b] = static_cast<int>(list_[t].size());
    list_[t].push_back(b);
  }
}

void Simulator::refresh_site(int i) {
  const int t = type_[i];
  drift_now_[i] = t == 0 ? 2 * rates_.left : t == 1 ? -2 * rates_.right : 0.0;
  brk_now_[i] = t == 0 ? 4 * rates_.left : t == 1 ? 4 * rates_.right : 0.0;
}

void Simulator::flush_site(int i) {
  const double d = tau_ - last_[i];
  drift_acc_[i] += drift_now_[i] * d;
  brk_acc_[i] += brk_now_[i] * d;
  last_[i] = tau_;
}

void Simulator::flush_all() {
  for (int i = 0; i < n_; ++i) flush_site(i);
}

void Simulator::close_segment() {
  if (phi_.empty()) return;
  double s = 0;
  for (int i = 0; i < n_; ++i) {
    s += (brk_acc_[i] - seg_start_[i]) * phi_[wrap(i - shift_, n_)];
    seg_start_[i] = brk_acc_[i];
  }
  weighted_ += s;
}

double Simulator::next_shift_tau() const {
  if (phase_ != Phase::Asymmetric) return std::numeric_limits<double>::infinity();
  const double r = std::abs(rho());
  return (static_cast<double>(std::abs(shift_)) + 1.0) / (r * sqe_);
}

void Simulator::cross_shifts(double tau_new) {
  if (tau_new < next_shift_) return;
  for (double b = next_shift_tau(); b <= tau_new; b = next_shift_tau()) {
    tau_ = b;
    flush_all();
    close_segment();
    shift_ += S_ > 0 ? 1 : -1;
  }
  next_shift_ = next_shift_tau();
}

void Simulator::resample() {
  const double R = list_[0].size() * rates_.left + list_[1].size() * rates_.right;
  if (R <= 0) {
    pending_ = std::numeric_limits<double>::infinity();
    return;
  }
  pending_ = tau_ - std::log1p(-uniform(rng_)) / R;
}

Event Simulator::step() {
  Event ev;
  if (!std::isfinite(pending_)) return ev;
  cross_shifts(pending_);
  tau_ = pending_;
  const double wl = list_[0].size() * rates_.left, wr = list_[1].size() * rates_.right;
  const int t = uniform(rng_) * (wl + wr) < wl ? 0 : 1;
  const auto& l = list_[t];
  const int b = l[std::min(l.size() - 1, static_cast<std::size_t>(uniform(rng_) * l.size()))];
  const int b1 = (b + 1) % n_, bm = (b + n_ - 1) % n_;
  for (int i : {bm, b, b1}) flush_site(i);
  std::swap(cfg_.s[b], cfg_.s[b1]);
  zeta_[b] += t == 0 ? 2 : -2;
  if (b == N_) J_ += t == 0 ? 1 : -1;
  ++jumps_[b];
  for (int i : {bm, b, b1}) {
    set_bond_type(i);
    refresh_site(i);
  }
  ++events_;
  ev.kind = t == 0 ? Event::Left : Event::Right;
  ev.bond = b - N_;
  ev.t = time();
  resample();
  return ev;
}

void Simulator::advance_to(double t) {
  const double target = t / (eps_ * eps_);
  if (target < tau_) throw ParameterError("cannot advance backwards in time");
  while (pending_ <= target) step();
  cross_shifts(target);
  tau_ = target;
}

void Simulator::switch_to_symmetric() {
  if (phase_ == Phase::Symmetric) return;
  flush_all();
  close_segment();
  phase_ = Phase::Symmetric;
  tau_switch_ = tau_;
  next_shift_ = std::numeric_limits<double>::infinity();
  rates_ = symmetric_rates(eps_, rho());
  for (int i = 0; i < n_; ++i) refresh_site(i);
  resample();  // memoryless: the pending clock can be redrawn
}

Fields Simulator::fields() const {
  Fields f{LatticeField(N_), LatticeField(N_), LatticeField(N_)};
  const double t_eff = std::min(time(), switch_time());
  const double r = rho();
  const double drift = 0.5 * (r * r - 1.0) / eps_ * t_eff;
  auto hat = [&](long k) {
    // sqrt(eps) (zeta(k) - S k / (2N+1)), exact integer numerator
    return sqe_ * static_cast<double>(zeta(k) * n_ - static_cast<long>(S_) * k) / n_ + drift;
  };
  for (int i = 0; i < n_; ++i) {
    const long k = i - N_;
    f.h.v[i] = sqe_ * zeta_[i];
    f.h_hat.v[i] = hat(k);
    f.h_tilde.v[i] = hat(k + shift_);
  }
  return f;
}

std::vector<double> Simulator::drift_integral() {
  flush_all();
  std::vector<double> out(n_);
  for (int i = 0; i < n_; ++i) out[i] = sqe_ * drift_acc_[i];
  return out;
}

std::vector<double> Simulator::martingale() {
  const auto d = drift_integral();
  std::vector<double> out(n_);
  for (int i = 0; i < n_; ++i) out[i] = sqe_ * zeta_[i] - h0_[i] - d[i];
  return out;
}

std::vector<double> Simulator::quadratic_variation() {
  std::vector<double> out(n_);
  for (int i = 0; i < n_; ++i) out[i] = 4 * eps_ * static_cast<double>(jumps_[i]);
  return out;
}

std::vector<double> Simulator::bracket_integral() {
  flush_all();
  std::vector<double> out(n_);
  for (int i = 0; i < n_; ++i) out[i] = eps_ * brk_acc_[i];
  return out;
}

void Simulator::attach_weight(const std::vector<double>& phi) {
  if (static_cast<int>(phi.size()) != n_) throw ParameterError("weight must have one value per site");
  flush_all();
  phi_ = phi;
  seg_start_ = brk_acc_;
  weighted_ = 0;
}

double Simulator::weighted_bracket_average() {
  if (phi_.empty()) throw ParameterError("no weight attached");
  flush_all();
  close_segment();
  const double t = time();
  if (!(t > 0)) return std::numeric_limits<double>::quiet_NaN();
  return eps_ * eps_ * eps_ * weighted_ / t;
}

bool Simulator::consistent() const {
  int s = 0;
  for (auto v : cfg_.s) s += v;
  if (s != S_) return false;
  for (int i = 1; i < n_; ++i)
    if (zeta_[i] - zeta_[i - 1] != cfg_.s[i]) return false;
  if (zeta_[0] - (zeta_[n_ - 1] - S_) != cfg_.s[0]) return false;
  return zeta_[N_] == 2 * J_;
}

// ---------------------------------------------------------------- stopping

void SimParams::validate() const {
  if (!(rho_target > -1.0 && rho_target < 1.0)) throw ParameterError("density must lie in (-1, 1)");
  if (!(t_max > 0)) throw ParameterError("t_max must be positive");
  if (!(alpha > 0.4 && alpha < 0.5)) throw ParameterError("alpha must lie in (2/5, 1/2)");
  if (!(kappa > 0 && kappa < 2 * (alpha - 0.4))) throw ParameterError("kappa must lie in (0, 2(alpha - 2/5))");
  if (!(stop_m >= 1)) throw ParameterError("the stopping level m must be at least 1");
  if (!diag_times.empty()) {
    if (diag_times.size() < 2 || diag_times[0] != 0.0) throw ParameterError("diagnostic grid must start at 0 with two points");
    const double dt = diag_times[1];
    for (std::size_t j = 1; j < diag_times.size(); ++j)
      if (!(std::abs(diag_times[j] - j * dt) <= 1e-9 * diag_times[j])) throw ParameterError("diagnostic grid must be uniform");
    if (!(dt > 0)) throw ParameterError("diagnostic grid must be increasing");
  }
}

std::vector<double> default_diag_times(double eps, double t_max) {
  const double dt0 = std::min(1000 * eps * eps, t_max / 10);
  const int n = static_cast<int>(std::ceil(t_max / dt0 - 1e-9));
  std::vector<double> t(n + 1);
  for (int j = 0; j <= n; ++j) t[j] = t_max * j / n;
  return t;
}

StopMonitor::StopMonitor(int N, double rho, double dt, int nt, double m, double alpha, double kappa)
    : N_(N), rho_(rho), m_(m), alpha_(alpha), kappa_(kappa), conv_(N, dt, nt) {}

bool StopMonitor::check_holder(double t, const LatticeField& f) {
  holder_ = norms::holder_norm(f, alpha_);
  if (holder_ >= m_ && !std::isfinite(st_.tau1)) {
    st_.tau1 = t;
    st_.norm_at_tau1 = holder_;
  }
  return st_.tau() <= t;
}

bool StopMonitor::feed(double t, const LatticeField& f) {
  const int i = static_cast<int>(hist_.size());
  if (i > conv_.nt()) throw ParameterError("more slices than the diagnostic grid holds");
  hist_.push_back(conv_.forward_slice(bracket_fluctuation(f, rho_).v));
  check_holder(t, f);
  if (i == 0) {
    // the product needs at least one full step of history
    ++st_.warmup_slices;
    besov_.reset();
    have_product_ = false;
    return st_.tau() <= t;
  }
  const auto c = conv_.inverse_slice(conv_.apply_hat_at(hist_, i, kern::History::Frozen));
  product_ = gradient_product(f);
  for (int j = 0; j < product_.size(); ++j) product_.v[j] -= c[j];
  have_product_ = true;
  besov_ = norms::besov_seminorm(product_, 2 * (alpha_ - 1)).value;
  if (*besov_ >= m_ * std::pow(eps_of(N_), -kappa_) && !std::isfinite(st_.tau2)) st_.tau2 = t;
  return st_.tau() <= t;
}

const LatticeField& StopMonitor::last_product() const {
  if (!have_product_) throw InsufficientHistory("renormalised product needs one step of history");
  return product_;
}

StopTimes stopping_times(const std::vector<double>& times, const std::vector<LatticeField>& f, double rho, double m,
                         double alpha, double kappa) {
  if (times.size() != f.size() || times.size() < 2) throw ParameterError("need matching times and fields, at least two");
  StopMonitor mon(f[0].N, rho, times[1] - times[0], static_cast<int>(times.size()) - 1, m, alpha, kappa);
  for (std::size_t j = 0; j < times.size(); ++j) mon.feed(times[j], f[j]);
  return mon.times();
}

SpaceTimeField renormalisation_field(const SpaceTimeField& f, double rho, kern::History h) {
  kern::QConvolver conv(f.N, f.dt, f.nt());
  SpaceTimeField F(f.N, f.dt, f.nt());
  for (int a = 0; a <= f.nt(); ++a) {
    LatticeField s(f.N);
    s.v = f.slices[a];
    F.slices[a] = bracket_fluctuation(s, rho).v;
  }
  return conv.apply(F, h);
}

SpaceTimeField renormalised_product(const SpaceTimeField& f, double rho, kern::History h) {
  auto out = renormalisation_field(f, rho, h);
  for (int a = 0; a <= f.nt(); ++a) {
    LatticeField s(f.N);
    s.v = f.slices[a];
    const auto g = gradient_product(s);
    for (int i = 0; i < f.sites(); ++i) out.slices[a][i] = g.v[i] - out.slices[a][i];
  }
  return out;
}

// ---------------------------------------------------------------- driver

TrajectoryResult run_trajectory(int N, const SimParams& p, std::uint64_t path, const std::function<double(double)>& phi) {
  p.validate();
  TrajectoryResult out;
  out.N = N;
  out.params = p;
  const double e = eps_of(N);
  const auto init_seed = stream_seed(p.seed, 2 * path), dyn_seed = stream_seed(p.seed, 2 * path + 1);
  SpinConfig c = p.minimal_density ? init_fixed_sum(N, 1, init_seed) : init_bernoulli(N, p.rho_target, init_seed);
  Simulator sim(std::move(c), dyn_seed);
  out.realised_rho = sim.rho();
  if (phi) {
    std::vector<double> w(2 * N + 1);
    for (int i = 0; i <= 2 * N; ++i) w[i] = phi(e * (i - N));
    sim.attach_weight(w);
  }
  const auto times = p.diag_times.empty() ? default_diag_times(e, p.t_max) : p.diag_times;
  out.params.diag_times = times;
  const bool stopping = std::isfinite(p.stop_m);
  std::optional<StopMonitor> mon;
  if (stopping)
    mon.emplace(N, sim.rho(), times[1] - times[0], static_cast<int>(times.size()) - 1, p.stop_m, p.alpha, p.kappa);

  for (double t : times) {
    if (stopping && p.check_each_event && !out.stopped) {
      while (sim.next_event_time() <= t) {
        sim.step();
        if (mon->check_holder(sim.time(), sim.fields().h_tilde)) {
          sim.switch_to_symmetric();
          out.stopped = true;
          break;
        }
      }
    }
    sim.advance_to(t);
    DiagRecord d;
    d.t = t;
    d.events = sim.events();
    auto f = sim.fields();
    d.h_tilde_origin = f.h_tilde.v[N];
    if (mon) {
      const bool fired = mon->feed(t, f.h_tilde);
      d.holder = mon->last_holder();
      d.besov = mon->last_besov();
      if (fired && !out.stopped) {
        sim.switch_to_symmetric();
        out.stopped = true;
      }
    } else {
      d.holder = norms::holder_norm(f.h_tilde, p.alpha);
    }
    if (phi && t > 0) d.weighted_bracket = sim.weighted_bracket_average();
    d.consistent = sim.consistent();
    if (p.keep_fields) d.fields = std::move(f);
    out.diag.push_back(std::move(d));
  }
  out.events = sim.events();
  if (mon) out.stop = mon->times();
  return out;
}

}  // namespace wasep::sim
