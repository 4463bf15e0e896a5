#include "wasep/verify.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "wasep/kernel_ext.hpp"
#include "wasep/kernels.hpp"
#include "wasep/lattice.hpp"
#include "wasep/regstruct.hpp"
#include "wasep/renorm.hpp"

namespace wasep::verify {

namespace {

Check exact(std::string id, double computed, double target, double bound) {
  const double err = std::abs(computed - target);
  return {std::move(id), computed, target, err, bound, err <= bound};
}

Check bounded(std::string id, double value, double bound) {
  return {std::move(id), value, 0.0, value, bound, value <= bound};
}

std::string tag(const std::string& base, const std::string& suffix) { return base + "/" + suffix; }

}  // namespace

bool Report::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"kernels", "renorm", "regstruct", "extension"};
  return names;
}

Report run(const std::string& suite, int n) {
  if (suite == "kernels") return kernels();
  if (suite == "renorm") return renorm(n);
  if (suite == "regstruct") return regstruct();
  if (suite == "extension") return extension();
  throw std::invalid_argument("unknown suite '" + suite + "'");
}

Report kernels() {
  Report r{"kernels", {}};
  for (double e : {0.2, 0.05}) {
    for (double t : {0.1, 1.0}) {
      const int K = kern::bessel_reach(t / (e * e)) + 2;
      const auto row = kern::G_row(e, t, K);
      double m = row[0];
      for (int k = 1; k <= K; ++k) m += 2 * row[k];
      r.checks.push_back(exact(tag("heat-kernel-mass", "eps=" + std::to_string(e) + ",t=" + std::to_string(t)), e * m,
                               1.0, 1e-10));
    }
  }
  double dual = 0;
  const double g0 = kern::eval_G(0.1, 0.25, 0);
  for (long k : {0L, 1L, 3L, 7L, 12L})
    dual = std::max(dual, std::abs(kern::eval_G(0.1, 0.25, k) - kern::eval_G_fourier(0.1, 0.25, k)) / g0);
  r.checks.push_back(bounded("heat-kernel-bessel-vs-fourier", dual, 1e-8));
  double per = 0;
  for (int k = -7; k <= 7; ++k)
    per = std::max(per, std::abs(kern::eval_Q_per(7, 0.05, k) - kern::eval_Q_per_fourier(7, 0.05, k)));
  r.checks.push_back(bounded("periodised-q-images-vs-fourier", per, 1e-8 * std::abs(kern::eval_Q_per(7, 0.05, 0)) + 1e-8));
  const auto si = kern::q_sum_identity(1.0, 1.0);
  r.checks.push_back(exact("q-sum-is-time-derivative", si.sum_q, si.derivative, 1e-8 * std::abs(si.sum_q)));
  const auto q = kern::check_q_zero_integral(1.0, 4096.0);
  r.checks.push_back(bounded("q-zero-spacetime-integral", q.relative, 1e-6));
  const auto th = kern::estimate_theta();
  r.checks.push_back(bounded("q-absolute-mass-below-one", th.value, 1.0 - 1e-12));
  r.checks.push_back(exact("q-absolute-mass-regression", th.value, kern::kThetaFrozen, 1e-10));
  r.checks.push_back(
      bounded("neumann-contraction-factor", kern::contraction_factor(eps_of(250)), 1.0 - 1e-12));
  return r;
}

Report renorm(int n) {
  Report r{"renorm", {}};
  std::vector<int> sizes = n > 0 ? std::vector<int>{n} : std::vector<int>{2, 12, 62, 312};
  constexpr double kPi = 3.14159265358979323846;
  for (int N : sizes) {
    const double e = eps_of(N);
    const std::string s = "N=" + std::to_string(N);
    const auto pair = renorm::pair_sum_constants(N);
    r.checks.push_back(exact(tag("third-order-pair-sum", s), pair.C1 + pair.C2, e / 2, 1e-12));
    const auto so = renorm::second_order_constants(N);
    r.checks.push_back(exact(tag("second-order-forward", s), so.C1, 2.0 * N / (2 * N + 1), 1e-12));
    r.checks.push_back(exact(tag("second-order-mixed", s), so.C2, -e / 2, 1e-12));
    r.checks.push_back(exact(tag("dirichlet-zero", s), renorm::dirichlet(N, kPi * e), 0.0, 1e-12));
    if (N <= 1000) {
      const auto d = renorm::logarithmic_combination(N);
      r.checks.push_back(exact(tag("double-sum-reduction", s), d.double_sum, d.reduced, 1e-11));
    }
  }
  return r;
}

Report regstruct() {
  using namespace rs;
  Report r{"regstruct", {}};
  const Basis c = generate_basis(Structure::Continuous);
  const Basis d = generate_basis(Structure::Discrete);
  r.checks.push_back(exact("continuous-basis-size", c.size(), 16, 0));
  r.checks.push_back(exact("continuous-positive-sector", static_cast<double>(c.plus.size()), 8, 0));
  r.checks.push_back(exact("continuous-negative-sector", static_cast<double>(c.minus.size()), 4, 0));
  r.checks.push_back(exact("discrete-basis-size", d.size(), 48, 0));
  r.checks.push_back(exact("discrete-positive-sector", static_cast<double>(d.plus.size()), 25, 0));
  int e_count = 0;
  for (const Sym& s : d.elems) e_count += contains_E(s) ? 1 : 0;
  r.checks.push_back(exact("discrete-e-symbols", e_count, 5, 0));

  const SymMatrix sm = gamma_symbolic(c);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2, 2);
  double closure = 0, unipotent = 0;
  const double binom[17] = {1, -16, 120, -560, 1820, -4368, 8008, -11440, 12870, -11440, 8008, -4368, 1820, -560, 120, -16, 1};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> fa(c.plus.size(), 0.0), ga(c.plus.size(), 0.0);
    fa[0] = ga[0] = 1;
    for (std::size_t i = 1; i < fa.size(); ++i) fa[i] = U(rng), ga[i] = U(rng);
    const Eigen::MatrixXd P = eval_matrix(sm, fa) * eval_matrix(sm, ga);
    const Character h = character_from_matrix(c, P);
    closure = std::max(closure, (eval_matrix(sm, h.a) - P).cwiseAbs().maxCoeff());
    const auto cp = char_poly(P);
    for (int k = 0; k <= 16; ++k) unipotent = std::max(unipotent, std::abs(cp[k] - binom[k]) / std::abs(binom[k]));
  }
  r.checks.push_back(bounded("structure-group-closure", closure, 1e-12));
  r.checks.push_back(bounded("structure-group-unipotent", unipotent, 1e-12));
  return r;
}

Report extension() {
  using namespace ext;
  Report r{"extension", {}};
  const auto& K = default_kernel();
  const auto ck = K.check();
  r.checks.push_back(bounded("phi-one-at-origin", ck.phi0_err, 1e-10));
  r.checks.push_back(bounded("phi-zero-at-integers", ck.integer_err, 1e-10));
  r.checks.push_back(bounded("partition-of-unity", ck.unity_err, 1e-8));
  for (auto [p, q] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{0, 2}})
    r.checks.push_back(bounded("vanishing-moment/p=" + std::to_string(p) + ",q=" + std::to_string(q),
                               std::abs(moment_sum(K, 0.3, p, q, 700)), 1e-7));
  for (double eps : {0.2, 0.04}) {
    const auto U = extend_heat_kernel(eps);
    double interp = 0;
    for (long k = -20; k <= 20; k += 3)
      for (double t : {0.0, 0.01, 0.3}) interp = std::max(interp, eps * std::abs(U(t, eps * k) - kern::eval_G(eps, t, k)));
    r.checks.push_back(bounded("interpolation-at-lattice-points/eps=" + std::to_string(eps), interp, 1e-10));
    const std::vector<double> ts = {0.0, eps * eps / 4, eps * eps, 0.01, 0.05, 0.2, 0.5};
    std::vector<double> xs;
    for (int i = -40; i <= 40; ++i) xs.push_back(eps * (i + 0.5) * 0.5);
    for (int j : {0, 1}) {
      const auto d = verify_decay_transfer(U, j, 1.0, ts, xs);
      r.checks.push_back(bounded("decay-transfer-ratio/eps=" + std::to_string(eps) + ",j=" + std::to_string(j), d.ratio, 10.0));
    }
  }
  return r;
}

}  // namespace wasep::verify
