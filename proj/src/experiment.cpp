#include "wasep/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <thread>

#include "wasep/lattice.hpp"
#include "wasep/wasep.hpp"

namespace wasep::study {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

int thread_count() {
  if (const char* s = std::getenv("WASEP_THREADS")) {
    const int v = std::atoi(s);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int ConvergeConfig::paths_for(std::size_t i) const {
  if (paths.empty()) return 0;
  return paths.size() == 1 ? paths[0] : paths.at(i);
}

void ConvergeConfig::validate() const {
  for (int N : sizes)
    if (N < 1) throw ParameterError("lattice sizes must be positive");
  if (paths.size() > 1 && paths.size() != sizes.size()) throw ParameterError("one path count per lattice size");
  for (int p : paths)
    if (p < 0) throw ParameterError("path counts must be non-negative");
  if (!(t > 0)) throw ParameterError("time must be positive");
  if (!(rho > -1 && rho < 1)) throw ParameterError("density must lie in (-1, 1)");
  kpz::Grid{ref_M, 0}.validate();
}

double bracket_weight(double x) { return 1.0 + std::cos(std::numbers::pi * x); }

namespace {

struct PathOut {
  double height = 0, bracket = 0, target = 0, nu = 0, rho = 0;
};

double ls_slope(const std::vector<double>& x, const std::vector<double>& y, double* intercept = nullptr) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) {
    if (intercept) *intercept = std::numeric_limits<double>::quiet_NaN();
    return std::numeric_limits<double>::quiet_NaN();
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i], sxx += x[i] * x[i], sxy += x[i] * y[i];
  const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (intercept) *intercept = (sy - b * sx) / n;
  return b;
}

}  // namespace

ConvergeSummary run_converge(const ConvergeConfig& cfg) {
  cfg.validate();
  ConvergeSummary s;
  s.config = cfg;
  s.nu_ref = 1 - cfg.rho * cfg.rho;

  int ref_paths = cfg.ref_paths;
  if (ref_paths <= 0)
    for (std::size_t i = 0; i < cfg.sizes.size(); ++i) ref_paths = std::max(ref_paths, cfg.paths_for(i));
  bool any = false;
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i) any = any || cfg.paths_for(i) > 0;
  if (!any) return s;

  // continuum reference, one independent stream per path
  {
    const kpz::Grid g{cfg.ref_M, 0};
    std::vector<double> vals(ref_paths);
    const std::uint64_t base = sim::stream_seed(cfg.seed, 0xC0FFEEull);
    parallel_for(ref_paths, cfg.threads, [&](int p) {
      const auto h0 = kpz::brownian_bridge(g, s.nu_ref, sim::stream_seed(base, 2 * static_cast<std::uint64_t>(p)));
      const auto tr =
          kpz::solve_cole_hopf(h0, s.nu_ref, cfg.t, g, sim::stream_seed(base, 2 * static_cast<std::uint64_t>(p) + 1), {cfg.t});
      vals[p] = tr.h.back()[g.origin()] - h0[g.origin()];
    });
    s.reference = kpz::one_point(std::move(vals));
  }

  for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
    const int N = cfg.sizes[i], paths = cfg.paths_for(i);
    EpsRow row;
    row.N = N;
    row.eps = eps_of(N);
    row.paths = paths;
    if (paths == 0) {
      s.rows.push_back(row);
      continue;
    }
    sim::SimParams p;
    p.rho_target = cfg.rho;
    p.t_max = cfg.t;
    p.seed = sim::stream_seed(cfg.seed, static_cast<std::uint64_t>(N));
    p.diag_times = {0.0, cfg.t};
    p.minimal_density = cfg.rho == 0.0;
    p.keep_fields = false;
    double wsum = 0;
    for (int k = -N; k <= N; ++k) wsum += row.eps * bracket_weight(row.eps * k);
    std::vector<PathOut> out(paths);
    parallel_for(paths, cfg.threads, [&](int j) {
      const auto r = sim::run_trajectory(N, p, static_cast<std::uint64_t>(j), bracket_weight);
      out[j].height = r.diag.back().h_tilde_origin - r.diag.front().h_tilde_origin;
      out[j].bracket = r.diag.back().weighted_bracket;
      const int sum = static_cast<int>(std::lround(r.realised_rho * (2 * N + 1)));
      out[j].target = sim::stationary_bracket_mean(N, sum) * wsum;
      out[j].nu = sim::nu_eps(row.eps, r.realised_rho) * wsum;
      out[j].rho = r.realised_rho;
    });
    std::vector<double> h(paths), b(paths), gap(paths);
    double tsum = 0, nsum = 0, rsum = 0;
    for (int j = 0; j < paths; ++j) {
      h[j] = out[j].height;
      b[j] = out[j].bracket;
      gap[j] = out[j].bracket - out[j].target;
      tsum += out[j].target;
      nsum += out[j].nu;
      rsum += out[j].rho;
    }
    row.realised_rho = rsum / paths;
    row.heights = h;
    row.brackets = b;
    for (const auto& o : out) row.bracket_targets.push_back(o.target);
    row.height = kpz::one_point(h);
    row.diff = row.height.var - s.reference.var;
    row.combined_se = std::hypot(row.height.var_se, s.reference.var_se);
    row.within_3se = std::abs(row.diff) <= 3 * row.combined_se;
    const auto bo = kpz::one_point(b), go = kpz::one_point(gap);
    row.bracket = bo.mean;
    row.bracket_se = paths > 1 ? std::sqrt(go.var / paths) : 0.0;
    row.bracket_target = tsum / paths;
    row.bracket_nu = nsum / paths;
    row.bracket_limit = (1 - cfg.rho * cfg.rho) * wsum;
    row.bracket_within_3se = std::abs(go.mean) <= 3 * row.bracket_se;
    s.rows.push_back(row);
  }

  std::vector<double> le, ld, se, br;
  for (const auto& r : s.rows) {
    if (r.paths == 0) continue;
    le.push_back(std::log(r.eps));
    ld.push_back(std::log(std::max(std::abs(r.diff), 1e-300)));
    se.push_back(std::sqrt(r.eps));
    br.push_back(r.bracket / (r.bracket_limit / (1 - cfg.rho * cfg.rho)));
  }
  s.discrepancy_slope = ls_slope(le, ld);
  s.bracket_slope = ls_slope(se, br, &s.bracket_intercept);
  // decreasing as eps decreases, in the order of the eps grid sorted by size
  std::vector<const EpsRow*> order;
  for (const auto& r : s.rows)
    if (r.paths > 0) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const EpsRow* a, const EpsRow* b) { return a->eps > b->eps; });
  s.discrepancy_decreasing = order.size() >= 2;
  for (std::size_t k = 1; k < order.size(); ++k)
    if (!(std::abs(order[k]->diff) < std::abs(order[k - 1]->diff))) s.discrepancy_decreasing = false;
  return s;
}

}  // namespace wasep::study
