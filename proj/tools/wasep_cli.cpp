// Command line driver: single trajectories, verification suites and the
// particle/continuum comparison.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "settings.hpp"
#include "wasep/experiment.hpp"
#include "wasep/lattice.hpp"
#include "wasep/regstruct.hpp"
#include "wasep/verify.hpp"
#include "wasep/wasep.hpp"

#ifndef WASEP_VERSION
#define WASEP_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using wasep::cli::Settings;

namespace {

const std::string kVersion = std::string("wasep ") + WASEP_VERSION;

// A subcommand whose flags mirror a set of settings keys.
struct Command {
  CLI::App* app = nullptr;
  Settings settings;
  std::string config_path;
  std::map<std::string, std::string> given;
  std::map<std::string, CLI::Option*> opts;

  Command(CLI::App& parent, const std::string& name, const std::string& help, std::map<std::string, std::string> defaults)
      : settings(defaults) {
    app = parent.add_subcommand(name, help);
    app->add_option("--config", config_path, "file of key = value lines; flags override it");
  }
  void flag(const std::string& key, const std::string& help) {
    opts[key] = app->add_option("--" + key, given[key], help + " (default " + settings.str(key) + ")");
  }
  Settings resolve() {
    if (!config_path.empty()) settings.merge_file(config_path);
    for (const auto& [k, o] : opts)
      if (o->count() > 0) settings.set(k, given[k]);
    return settings;
  }
};

std::string num(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

fs::path prepare(const Settings& s, const std::string& command) {
  const fs::path out = s.str("out");
  fs::create_directories(out);
  std::ofstream(out / (command + ".config")) << s.render(command, kVersion);
  return out;
}

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2) << "\n"; }

json header(const Settings& s, const std::string& command) {
  return json{{"command", command}, {"version", kVersion}, {"config", s.values()}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double parse_eps(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return std::stod(s);
  return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
}

// ------------------------------------------------------------------ simulate

int run_simulate(const Settings& s) {
  using namespace wasep::sim;
  SimParams p;
  const int N = static_cast<int>(s.integer("n"));
  p.rho_target = s.num("rho");
  p.t_max = s.num("t-max");
  p.seed = static_cast<std::uint64_t>(s.integer("seed"));
  p.alpha = s.num("alpha");
  p.kappa = s.num("kappa");
  p.stop_m = s.num("stop-m");
  p.minimal_density = s.flag("minimal-density");
  p.check_each_event = s.flag("check-each-event");
  const long every = s.integer("diag-steps");
  if (every > 0)
    for (long j = 0; j <= every; ++j) p.diag_times.push_back(p.t_max * j / every);
  p.validate();
  const auto out = prepare(s, "simulate");

  const auto r = run_trajectory(N, p, 0, wasep::study::bracket_weight);
  json j = header(s, "simulate");
  j["N"] = r.N;
  j["eps"] = wasep::eps_of(N);
  j["realised_rho"] = r.realised_rho;
  j["events"] = r.events;
  j["stopped"] = r.stopped;
  j["stop"] = {{"tau1", finite_or_null(r.stop.tau1)},
               {"tau2", finite_or_null(r.stop.tau2)},
               {"warmup_slices", r.stop.warmup_slices}};
  json diag = json::array();
  for (const auto& d : r.diag)
    diag.push_back({{"t", d.t},
                    {"events", d.events},
                    {"h_tilde_origin", d.h_tilde_origin},
                    {"holder", d.holder},
                    {"besov", d.besov ? json(*d.besov) : json(nullptr)},
                    {"weighted_bracket", d.weighted_bracket},
                    {"consistent", d.consistent}});
  j["diag"] = diag;
  write_json(out / "simulate.json", j);

  const auto& h = r.diag.back().fields.h_tilde;
  std::ofstream csv(out / "fields.csv");
  csv << "# " << kVersion << ", t = " << num(r.diag.back().t) << "\n";
  csv << "x,h_tilde,grad_minus,grad_plus\n";
  const double e = h.eps();
  for (int i = 0; i < h.size(); ++i) {
    const long k = i - h.N;
    csv << num(h.x(i)) << "," << num(h.at(k)) << "," << num((h.at(k) - h.at(k - 1)) / e) << ","
        << num((h.at(k + 1) - h.at(k)) / e) << "\n";
  }
  std::cout << "simulated N=" << N << " to t=" << r.diag.back().t << ", " << r.events << " events"
            << (r.stopped ? ", stopped" : "") << "; output in " << out.string() << "\n";
  return 0;
}

// -------------------------------------------------------------------- verify

json report_json(const wasep::verify::Report& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"check_id", c.id},
                      {"computed", c.computed},
                      {"target", c.target},
                      {"error", c.error},
                      {"bound", c.bound},
                      {"pass", c.pass}});
  return json{{"suite", rep.suite}, {"pass", rep.pass()}, {"checks", checks}};
}

int print_report(const wasep::verify::Report& rep) {
  for (const auto& c : rep.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << rep.suite << " " << c.id << "  error " << c.error << " <= " << c.bound
              << "\n";
  return rep.pass() ? 0 : 1;
}

int run_verify(const Settings& s, const std::vector<std::string>& suites) {
  const auto out = prepare(s, "verify");
  const int n = static_cast<int>(s.integer("n"));
  int code = 0;
  json all = header(s, "verify");
  all["reports"] = json::array();
  for (const auto& name : suites) {
    const auto rep = wasep::verify::run(name, n);
    if (print_report(rep) != 0) code = 1;
    all["reports"].push_back(report_json(rep));
  }
  all["pass"] = code == 0;
  write_json(out / "verify.json", all);
  return code;
}

int run_kernels_report(const Settings& s) {
  const auto out = prepare(s, "kernels");
  const auto rep = wasep::verify::kernels();
  json j = header(s, "kernels report");
  j.update(report_json(rep));
  write_json(out / "kernels_report.json", j);
  std::cout << j.dump(2) << "\n";
  return rep.pass() ? 0 : 1;
}

int run_renorm_verify(const Settings& s) {
  const auto out = prepare(s, "renorm");
  const auto rep = wasep::verify::renorm(static_cast<int>(s.integer("n")));
  json ids = json::array();
  for (const auto& c : rep.checks)
    ids.push_back({{"identity", c.id}, {"lhs", c.computed}, {"rhs", c.target}, {"abs_err", c.error}, {"pass", c.pass}});
  json j = header(s, "renorm verify");
  j["identities"] = ids;
  j["pass"] = rep.pass();
  write_json(out / "renorm_verify.json", j);
  std::cout << ids.dump(2) << "\n";
  return rep.pass() ? 0 : 1;
}

int run_regstruct_report(const Settings& s) {
  using namespace wasep::rs;
  const auto out = prepare(s, "regstruct");
  json j = header(s, "regstruct report");
  for (Structure st : {Structure::Continuous, Structure::Discrete}) {
    const Basis b = generate_basis(st);
    json elems = json::array();
    for (int i = 0; i < b.size(); ++i)
      elems.push_back({{"symbol", b.elems[i]->key}, {"homogeneity", b.elems[i]->hom.str()}, {"set", b.set_label(i)}});
    const std::string name = st == Structure::Continuous ? "continuous" : "discrete";
    j[name] = {{"size", b.size()}, {"positive", b.plus.size()}, {"negative", b.minus.size()}, {"basis", elems}};
  }
  const auto rep = wasep::verify::regstruct();
  j["checks"] = report_json(rep);
  write_json(out / "regstruct_report.json", j);
  return print_report(rep);
}

// ------------------------------------------------------------------ converge

int run_converge(const Settings& s) {
  wasep::study::ConvergeConfig c;
  for (const auto& e : s.list("eps")) c.sizes.push_back(wasep::n_of_eps(parse_eps(e)));
  c.paths = {static_cast<int>(s.integer("paths"))};
  c.t = s.num("t");
  c.rho = s.num("rho");
  c.seed = static_cast<std::uint64_t>(s.integer("seed"));
  c.ref_paths = static_cast<int>(s.integer("ref-paths"));
  c.ref_M = static_cast<int>(s.integer("ref-m"));
  c.threads = wasep::study::thread_count();
  c.validate();
  const auto out = prepare(s, "converge");
  const auto r = wasep::study::run_converge(c);

  json j = header(s, "converge");
  j["nu_reference"] = r.nu_ref;
  j["reference"] = {{"paths", r.reference.n}, {"var", r.reference.var}, {"var_se", r.reference.var_se},
                    {"mean", r.reference.mean}};
  json rows = json::array();
  std::ofstream csv(out / "converge.csv");
  csv << "# " << kVersion << "\n";
  csv << "N,eps,paths,var,var_se,ref_var,diff,combined_se,within_3se,bracket,bracket_se,bracket_target,bracket_limit\n";
  for (const auto& w : r.rows) {
    rows.push_back({{"N", w.N},
                    {"eps", w.eps},
                    {"paths", w.paths},
                    {"realised_rho", w.realised_rho},
                    {"mean", w.height.mean},
                    {"var", w.height.var},
                    {"var_se", w.height.var_se},
                    {"quartiles", w.height.quartiles},
                    {"diff", w.diff},
                    {"combined_se", w.combined_se},
                    {"within_3se", w.within_3se},
                    {"bracket", w.bracket},
                    {"bracket_se", w.bracket_se},
                    {"bracket_target", w.bracket_target},
                    {"bracket_nu_eps", w.bracket_nu},
                    {"bracket_limit", w.bracket_limit},
                    {"bracket_within_3se", w.bracket_within_3se}});
    csv << w.N << "," << num(w.eps) << "," << w.paths << "," << num(w.height.var) << "," << num(w.height.var_se) << ","
        << num(r.reference.var) << "," << num(w.diff) << "," << num(w.combined_se) << "," << w.within_3se << ","
        << num(w.bracket) << "," << num(w.bracket_se) << "," << num(w.bracket_target) << "," << num(w.bracket_limit)
        << "\n";
    std::cout << "N=" << w.N << " paths=" << w.paths << " var=" << w.height.var << " +- " << w.height.var_se
              << " ref=" << r.reference.var << " diff=" << w.diff << " bracket=" << w.bracket << " +- " << w.bracket_se
              << " target=" << w.bracket_target << "\n";
  }
  j["rows"] = rows;
  j["fits"] = {{"discrepancy_loglog_slope", finite_or_null(r.discrepancy_slope)},
               {"bracket_intercept", finite_or_null(r.bracket_intercept)},
               {"bracket_sqrt_eps_slope", finite_or_null(r.bracket_slope)},
               {"discrepancy_decreasing", r.discrepancy_decreasing}};
  write_json(out / "converge.json", j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly asymmetric exclusion: simulation, kernel and constant checks, continuum comparison"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Command sim(app, "simulate", "one seeded trajectory with diagnostics",
              {{"n", "50"}, {"rho", "0"}, {"t-max", "0.1"}, {"seed", "1"}, {"out", "out"}, {"alpha", "0.45"},
               {"kappa", "0.05"}, {"stop-m", "inf"}, {"minimal-density", "false"}, {"check-each-event", "false"},
               {"diag-steps", "0"}});
  for (auto [k, h] : std::vector<std::pair<std::string, std::string>>{
           {"n", "lattice size, 2N+1 sites"},
           {"rho", "initial density in (-1, 1)"},
           {"t-max", "final macroscopic time"},
           {"seed", "master seed"},
           {"out", "output directory"},
           {"alpha", "Hoelder exponent of the stopping rule"},
           {"kappa", "loss exponent of the product rule"},
           {"stop-m", "stopping level"},
           {"minimal-density", "start from spin sum +1"},
           {"check-each-event", "Hoelder rule after every event"},
           {"diag-steps", "number of diagnostic intervals (0: automatic)"}})
    sim.flag(k, h);

  Command ver(app, "verify", "identity checks of the deterministic modules", {{"n", "0"}, {"out", "out"}});
  ver.flag("n", "lattice size for the renormalisation identities (0: 2, 12, 62, 312)");
  ver.flag("out", "output directory");
  std::vector<std::string> suites;
  ver.app->add_option("suite", suites, "kernels, renorm, regstruct, extension")
      ->required()
      ->check(CLI::IsMember(wasep::verify::suite_names()));

  Command conv(app, "converge", "particle heights against the Cole-Hopf reference",
               {{"eps", "2/21,2/101"}, {"paths", "100"}, {"t", "0.5"}, {"rho", "0"}, {"seed", "1"}, {"out", "out"},
                {"ref-paths", "0"}, {"ref-m", "256"}});
  for (auto [k, h] : std::vector<std::pair<std::string, std::string>>{
           {"eps", "comma separated spacings of the form 2/(2N+1)"},
           {"paths", "paths per spacing"},
           {"t", "observation time"},
           {"rho", "density; 0 uses the canonical ensemble with spin sum +1"},
           {"seed", "master seed"},
           {"out", "output directory"},
           {"ref-paths", "reference paths (0: same as paths)"},
           {"ref-m", "reference grid cells"}})
    conv.flag(k, h);

  Command kern(app, "kernels", "heat kernel checks", {{"out", "out"}});
  kern.flag("out", "output directory");
  auto* kern_report = kern.app->add_subcommand("report", "JSON verification report");
  kern.app->require_subcommand(1);

  Command ren(app, "renorm", "renormalisation constants", {{"n", "12"}, {"out", "out"}});
  ren.flag("n", "lattice size");
  ren.flag("out", "output directory");
  auto* ren_verify = ren.app->add_subcommand("verify", "exact identities as JSON");
  ren.app->require_subcommand(1);
  // flags may also follow the nested subcommand
  ren_verify->fallthrough();
  kern_report->fallthrough();

  Command reg(app, "regstruct", "regularity structure", {{"out", "out"}});
  reg.flag("out", "output directory");
  auto* reg_report = reg.app->add_subcommand("report", "basis listing and group checks");
  reg_report->fallthrough();
  reg.app->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim.app->parsed()) return run_simulate(sim.resolve());
    if (ver.app->parsed()) return run_verify(ver.resolve(), suites);
    if (conv.app->parsed()) return run_converge(conv.resolve());
    if (kern.app->parsed()) return run_kernels_report(kern.resolve());
    if (ren.app->parsed()) return run_renorm_verify(ren.resolve());
    if (reg.app->parsed()) return run_regstruct_report(reg.resolve());
  } catch (const wasep::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
