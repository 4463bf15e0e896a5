#pragma once

// Exact continuous-time simulation of the weakly asymmetric exclusion
// process on the discrete circle with 2N+1 sites, its height function and
// the quantities entering the martingale decomposition of the height.
//
// Spins are +1 (particle) or -1 (hole). A particle at x+1 jumps left to an
// empty x with rate 1/2 + sqrt(eps) and a particle at x jumps right to an
// empty x+1 with rate 1/2. The integer height zeta has increments
// zeta(x) - zeta(x-1) = sigma(x) and zeta(0) = 2J with J the net number of
// particles that crossed from site 1 to site 0.
//
// Time inside the simulator is microscopic; macroscopic t = eps^2 * tau.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "wasep/kernels.hpp"
#include "wasep/lattice.hpp"

namespace wasep::sim {

struct InsufficientHistory : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 64-bit seed of the independent substream for one path.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t path);

struct SpinConfig {
  int N = 1;
  std::vector<std::int8_t> s;  // s[i] is the spin at site k = i - N

  SpinConfig() = default;
  explicit SpinConfig(int n, int fill = -1) : N(n), s(2 * n + 1, static_cast<std::int8_t>(fill)) {}
  int size() const { return static_cast<int>(s.size()); }
  double eps() const { return eps_of(N); }
  int sum() const;
  double density() const { return static_cast<double>(sum()) / size(); }
  int spin(long k) const {
    const long n = size();
    return s[static_cast<std::size_t>(((k + N) % n + n) % n)];
  }
};

// Independent spins, +1 with probability (1 + rho)/2.
SpinConfig init_bernoulli(int N, double rho, std::uint64_t seed);
// Uniform over configurations with the given odd spin sum.
SpinConfig init_fixed_sum(int N, int sum, std::uint64_t seed);

enum class Phase { Asymmetric, Symmetric };

struct Rates {
  double left = 0, right = 0;
};
Rates asymmetric_rates(double eps);
// Both directions at nu/2 with nu = (1 + sqrt eps)(1 - rho^2).
Rates symmetric_rates(double eps, double rho);
double nu_eps(double eps, double rho);
// Mean of the bracket density under the uniform law on configurations with
// the given spin sum (invariant for the asymmetric dynamics).
double stationary_bracket_mean(int N, int sum);

// Integer height of a configuration with zeta(0) = 0, sites -N..N.
std::vector<long> height_of(const SpinConfig& c);

// A value computed twice: from the closed formula in terms of discrete
// derivatives of the height and by summing over the possible jumps.
struct TwoRoutes {
  double formula = 0, enumeration = 0;
};
// eps^{-2} L h(x) in macroscopic units.
TwoRoutes generator_drift(const SpinConfig& c, long x, Phase p = Phase::Asymmetric);
// Density C(x) of the predictable bracket, d<M(x)> = eps^{-1} C dt.
TwoRoutes bracket_density(const SpinConfig& c, long x, Phase p = Phase::Asymmetric);

// Bracket density written through the tilted field h~ at site k:
// nu - (1 + sqrt eps)(eps grad^- grad^+ + 2 rho sqrt(eps) grad) h~ + eps^2 Laplacian h~.
double tilted_bracket(const LatticeField& h_tilde, long k, double rho);
// The same without the constant nu.
LatticeField bracket_fluctuation(const LatticeField& h_tilde, double rho);
// grad^- h~ grad^+ h~ at every site.
LatticeField gradient_product(const LatticeField& h_tilde);

// Moving-frame shift in sites, trunc(rho eps^{-3/2} t). It changes at the
// times n eps^{3/2} / |rho|.
long tilt_index(double rho, double eps, double t);

struct Fields {
  LatticeField h, h_hat, h_tilde;
};

struct Event {
  enum Kind { None, Left, Right } kind = None;
  long bond = 0;  // the jump crosses sites bond and bond + 1
  double t = 0;   // macroscopic time of the event
};

class Simulator {
 public:
  Simulator(SpinConfig init, std::uint64_t seed);

  int N() const { return N_; }
  double eps() const { return eps_; }
  double rho() const { return static_cast<double>(S_) / n_; }
  double time() const { return eps_ * eps_ * tau_; }
  Phase phase() const { return phase_; }
  Rates rates() const { return rates_; }
  long events() const { return events_; }
  const SpinConfig& config() const { return cfg_; }
  long current() const { return J_; }
  // Integer height at any site, extended quasi-periodically.
  long zeta(long k) const;
  long shift() const { return shift_; }
  // Time at which the symmetric phase started (infinity if it has not).
  double switch_time() const { return eps_ * eps_ * tau_switch_; }
  // Macroscopic time of the pending event (infinity when jammed).
  double next_event_time() const { return eps_ * eps_ * pending_; }

  // Performs the next event; kind None if no jump is possible.
  Event step();
  // Runs all events up to macroscopic time t and stops the clock at t.
  void advance_to(double t);
  // From now on both rates are nu/2 and the moving frame is frozen.
  void switch_to_symmetric();

  Fields fields() const;
  // Accumulators at the current time, sites -N..N.
  std::vector<double> drift_integral();       // int_0^t eps^{-2} L h ds
  std::vector<double> martingale();           // h - h_0 - drift_integral
  std::vector<double> quadratic_variation();  // sum of squared jumps of h
  std::vector<double> bracket_integral();     // eps^{-1} int_0^t C ds
  // With a weight phi on one period attached, t^{-1} int_0^t eps sum_x C~(s, x) phi(x) ds
  // where C~(s, x) = C(s, x + shift(s)) is the bracket density seen in the moving frame.
  void attach_weight(const std::vector<double>& phi);
  double weighted_bracket_average();

  // Checks zeta(x) - zeta(x-1) = sigma(x), zeta(0) = 2J and the conserved sum.
  bool consistent() const;

 private:
  void resample();
  void flush_site(int i);
  void flush_all();
  void close_segment();
  void cross_shifts(double tau_new);
  void refresh_site(int i);
  void set_bond_type(int b);
  double next_shift_tau() const;

  int N_, n_;
  double eps_, sqe_;
  int S_;
  SpinConfig cfg_;
  std::vector<long> zeta_;
  std::vector<double> h0_;
  long J_ = 0;
  double tau_ = 0, tau_switch_ = std::numeric_limits<double>::infinity();
  double pending_ = std::numeric_limits<double>::infinity();
  Phase phase_ = Phase::Asymmetric;
  Rates rates_;
  long events_ = 0;
  long shift_ = 0;
  double next_shift_ = 0;  // microscopic time of the next frame shift
  std::mt19937_64 rng_;

  std::vector<int> list_[2];  // bonds of left type (-1,+1) and right type (+1,-1)
  std::vector<int> pos_;      // position of each bond in its list
  std::vector<std::int8_t> type_;

  // lazily integrated per-site rates, microscopic time
  std::vector<double> drift_now_, brk_now_, drift_acc_, brk_acc_, last_;
  std::vector<long> jumps_;
  std::vector<double> phi_, seg_start_;
  double weighted_ = 0;
};

struct SimParams {
  double rho_target = 0.0;
  double t_max = 0.1;
  std::uint64_t seed = 1;
  std::vector<double> diag_times;  // empty: uniform grid from default_diag_times
  double stop_m = std::numeric_limits<double>::infinity();
  double alpha = 0.45;
  double kappa = 0.05;
  // start from the canonical ensemble with spin sum +1 instead of Bernoulli
  bool minimal_density = false;
  // evaluate the Hoelder stopping rule after every event (cost O(N^2) each)
  bool check_each_event = false;
  bool keep_fields = true;

  // Throws ParameterError outside 2/5 < alpha < 1/2, 0 < kappa < 2(alpha - 2/5),
  // rho outside (-1, 1), t_max <= 0, m < 1 or unsorted/non-uniform times.
  void validate() const;
};
// Uniform grid with spacing min(1000 eps^2, t_max/10), ending at t_max.
std::vector<double> default_diag_times(double eps, double t_max);

struct StopTimes {
  double tau1 = std::numeric_limits<double>::infinity();
  double tau2 = std::numeric_limits<double>::infinity();
  double tau() const { return std::min(tau1, tau2); }
  int warmup_slices = 0;  // grid points where the product was not yet available
  double norm_at_tau1 = std::numeric_limits<double>::quiet_NaN();
};

// Stopping rules on a uniform diagnostic grid: tau1 when the C^alpha norm of
// h~ reaches m, tau2 when the C^{2(alpha-1)} seminorm of the renormalised
// product reaches m eps^{-kappa}. Feed slices in time order.
class StopMonitor {
 public:
  StopMonitor(int N, double rho, double dt, int nt, double m, double alpha, double kappa);
  // Returns true if either rule fires at this slice.
  bool feed(double t, const LatticeField& h_tilde);
  // Hoelder rule only, for checks between grid points.
  bool check_holder(double t, const LatticeField& h_tilde);
  const StopTimes& times() const { return st_; }
  double last_holder() const { return holder_; }
  std::optional<double> last_besov() const { return besov_; }
  // Renormalised product at the latest slice; throws InsufficientHistory at slice 0.
  const LatticeField& last_product() const;

 private:
  int N_;
  double rho_, m_, alpha_, kappa_;
  kern::QConvolver conv_;
  kern::QConvolver::Spec hist_;
  StopTimes st_;
  double holder_ = 0;
  std::optional<double> besov_;
  LatticeField product_;
  bool have_product_ = false;
};

StopTimes stopping_times(const std::vector<double>& times, const std::vector<LatticeField>& h_tilde, double rho,
                         double m, double alpha, double kappa);

// grad^- h~ grad^+ h~ - Q *^+ (C~ - nu) on every slice of a uniform history.
// Frozen history continues the bracket fluctuation by its t = 0 value.
SpaceTimeField renormalised_product(const SpaceTimeField& h_tilde, double rho,
                                    kern::History h = kern::History::Frozen);
// The subtracted convolution alone.
SpaceTimeField renormalisation_field(const SpaceTimeField& h_tilde, double rho,
                                     kern::History h = kern::History::Frozen);

struct DiagRecord {
  double t = 0;
  long events = 0;
  Fields fields;  // empty fields when keep_fields is off
  double h_tilde_origin = 0;
  double holder = 0;
  std::optional<double> besov;
  double weighted_bracket = 0;
  bool consistent = true;
};

struct TrajectoryResult {
  int N = 1;
  SimParams params;
  double realised_rho = 0;
  long events = 0;
  StopTimes stop;
  bool stopped = false;
  std::vector<DiagRecord> diag;
};

// One seeded path. phi (optional) is the weight of the bracket statistic,
// a function on [-1, 1) evaluated at the lattice points.
TrajectoryResult run_trajectory(int N, const SimParams& p, std::uint64_t path = 0,
                                const std::function<double(double)>& phi = {});

}  // namespace wasep::sim
