// critlab: batch front end. Every subcommand writes its results and a
// <command>_manifest.json into the output directory.
//
// Exit codes: 0 success, 1 invalid input, 2 numerical failure,
// 3 non-convergence.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "critlab/acceptance.hpp"
#include "critlab/annulus.hpp"
#include "critlab/bubbles.hpp"
#include "critlab/calibration.hpp"
#include "critlab/errors.hpp"
#include "critlab/radial.hpp"
#include "critlab/serialize.hpp"
#include "critlab/sobolev.hpp"
#include "critlab/symmetry.hpp"

namespace fs = std::filesystem;
using namespace critlab;

namespace {

constexpr const char* kOutputEnv = "CRITLAB_OUTPUT_DIR";

struct Common {
  std::string output_dir;
  std::string config;
  std::uint64_t seed = 1;
};

struct Params {
  int N = 4;
  double p = 2.0;
  double R1 = 0.5;
  double R2 = 1.0;
  std::size_t cells = kDefaultLevelCells;
  std::string method = "descent";
  std::size_t max_iters = 20000;
  double residual_tol = 1e-6;
  double energy_tol = 1e-10;
  double truncation = 0.0;
  std::vector<double> radii{0.5, 0.2, 0.1, 0.05, 0.01};
  double c_infty = 0.0;
  std::size_t m = 2;
  std::size_t k = 1;
  std::size_t span_samples = 10000;
  double delta = 0.0;
  std::string group_file;
  std::string bubbles_file;
  std::size_t samples = 1000000;
  std::size_t max_order = kDefaultMaxOrder;
  std::size_t mu_samples = 1000;
  std::vector<int> criteria;
};

// One-line diagnostics for every violated precondition of a command.
class Checks {
 public:
  void operator()(bool ok, const std::string& msg) {
    if (!ok) errors_.push_back(msg);
  }
  void exponents(const Params& p) {
    (*this)(p.N >= 2, "N must be >= 2");
    (*this)(p.p >= 1.1 && p.p <= p.N - 0.1, "p must lie in [1.1, N - 0.1]");
  }
  void annulus(const Params& p) {
    (*this)(p.R1 > 0.0, "R1 must be positive");
    (*this)(p.R2 > p.R1, "R2 must exceed R1");
  }
  void finish() const {
    if (errors_.empty()) return;
    std::string all;
    for (const auto& e : errors_) all += (all.empty() ? "" : "\n") + std::string("error: ") + e;
    throw DomainError(all);
  }

 private:
  std::vector<std::string> errors_;
};

SolveOptions solve_options(const Params& p) {
  SolveOptions o;
  o.max_iters = p.max_iters;
  o.residual_tol = p.residual_tol;
  o.energy_tol = p.energy_tol;
  return o;
}

// Tokens equivalent to the key/value pairs of a JSON config file. Keys are
// option names without dashes; arrays become comma lists. Keys also given as
// flags in `explicit_args` are dropped so the flag replaces them outright.
std::vector<std::string> config_tokens(const Json& j, const std::vector<std::string>& explicit_args) {
  const Json& params = j.contains("parameters") ? j.at("parameters") : j;
  std::vector<std::string> out;
  for (const auto& [key, value] : params.items()) {
    if (key == "command" || key == "parameters") continue;
    if (std::find(explicit_args.begin(), explicit_args.end(), "--" + key) != explicit_args.end()) continue;
    std::string text;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back("--" + key);
      continue;
    } else if (value.is_number_float()) {
      text = fmt_double(value.get<double>());
    } else if (value.is_number()) {
      text = value.dump();
    } else if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_array()) {
      for (const auto& x : value) {
        if (!text.empty()) text += ",";
        text += x.is_number_float() ? fmt_double(x.get<double>()) : (x.is_string() ? x.get<std::string>() : x.dump());
      }
    } else {
      throw DomainError("config: unsupported value for key \"" + key + "\"");
    }
    out.push_back("--" + key);
    out.push_back(text);
  }
  return out;
}

// Numbers stay numbers in the manifest.
Json typed(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (!text.empty() && end == text.c_str() + text.size()) return v;
  return text;
}

// Resolved value of every option of `sub`, for the manifest.
Json resolved_options(CLI::App* sub) {
  Json j = Json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const auto name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    if (opt->count() > 0) {
      const auto res = opt->reduced_results();
      if (res.size() == 1) {
        j[name] = typed(res.front());
      } else {
        Json a = Json::array();
        for (const auto& r : res) a.push_back(typed(r));
        j[name] = a;
      }
    } else {
      j[name] = typed(opt->get_default_str());
    }
  }
  return j;
}

void write_manifest(const fs::path& dir, const std::string& command, CLI::App* sub,
                    const Common& common, const Json& outputs, int status,
                    const std::string& diagnostic) {
  Json m{{"command", command},
         {"version", CRITLAB_VERSION},
         {"seed", common.seed},
         {"output_dir", dir.string()},
         {"config_file", common.config},
         {"parameters", resolved_options(sub)},
         {"outputs", outputs},
         {"exit_status", status}};
  if (!diagnostic.empty()) m["diagnostic"] = diagnostic;
  write_json_file(dir / (command + "_manifest.json"), m);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw NumericError("cannot write " + path.string());
  out << text;
}

void write_profile(const fs::path& path, const RadialFunction& u) {
  std::ostringstream os;
  write_csv(os, u);
  write_text(path, os.str());
}

Json cmd_sobolev(const Params& p, const fs::path& dir) {
  Checks c;
  c.exponents(p);
  c(p.truncation == 0.0 || p.truncation >= 1e3, "truncation must be 0 (default) or >= 1e3");
  c(p.cells >= 512, "cells must be >= 512");
  c.finish();
  const auto rep = sobolev_constant(p.N, p.p, p.truncation, p.cells);
  const auto U = calibrate_talenti(p.N, p.p);
  Json j = to_json(rep);
  j["alpha"] = U.alpha;
  j["beta"] = U.beta;
  write_json_file(dir / "sobolev.json", j);
  const auto grid = RadialGrid(log_nodes(1e-3, 1e3, 2048), Exponents{p.N, p.p});
  write_profile(dir / "talenti_profile.csv", sample_profile(U, grid));
  std::cout << j.dump(2) << '\n';
  return Json{"sobolev.json", "talenti_profile.csv"};
}

Json cmd_annulus(const Params& p, const fs::path& dir) {
  Checks c;
  c.exponents(p);
  c.annulus(p);
  c(p.cells >= kMinSolveCells, "cells must be >= " + std::to_string(kMinSolveCells));
  c(p.method == "descent" || p.method == "shooting" || p.method == "both",
    "method must be descent, shooting or both");
  c(p.residual_tol > 0.0 && p.energy_tol > 0.0, "tolerances must be positive");
  c.finish();
  const AnnulusSpec spec{p.R1, p.R2, {p.N, p.p}};
  const auto opts = solve_options(p);
  Json j = Json::object();
  Json files = Json::array({"annulus_report.json"});
  bool converged = true;
  if (p.method != "shooting") {
    const auto sol = minimize_annulus(spec, p.cells, opts);
    j["descent"] = to_json(sol.report);
    write_profile(dir / "annulus_descent.csv", sol.profile);
    files.push_back("annulus_descent.csv");
    converged = converged && sol.report.converged;
  }
  if (p.method != "descent") {
    const auto sol = shoot_annulus(spec, opts);
    j["shooting"] = to_json(sol.report);
    write_profile(dir / "annulus_shooting.csv", sol.profile);
    files.push_back("annulus_shooting.csv");
    converged = converged && sol.report.converged;
  }
  if (j.contains("descent") && j.contains("shooting")) {
    const double a = j["descent"]["level"].get<double>();
    const double b = j["shooting"]["level"].get<double>();
    j["relative_difference"] = std::abs(a - b) / b;
  }
  write_json_file(dir / "annulus_report.json", j);
  Json brief = j;
  for (auto& [k, v] : brief.items()) {
    if (v.is_object()) v.erase("history");
  }
  std::cout << brief.dump(2) << '\n';
  if (!converged) throw NonConvergenceError("annulus: solver did not meet its tolerances (see annulus_report.json)");
  return files;
}

Json cmd_curve(const Params& p, const fs::path& dir) {
  Checks c;
  c.exponents(p);
  c(!p.radii.empty(), "radii must be nonempty");
  for (double R : p.radii) c(R > 0.0 && R < 1.0, "radius " + fmt_double(R) + " must lie in (0, 1)");
  c(p.cells >= kMinSolveCells, "cells must be >= " + std::to_string(kMinSolveCells));
  c.finish();
  const double c_inf = p.c_infty > 0.0 ? p.c_infty : sobolev_constant(p.N, p.p).c_infty;
  const auto rows = c_curve(Exponents{p.N, p.p}, p.radii, c_inf, p.cells, solve_options(p));
  std::ostringstream os;
  os << "R,level,excess,ratio,converged\n";
  bool all = true;
  for (const auto& r : rows) {
    os << fmt_double(r.R) << ',' << fmt_double(r.level) << ',' << fmt_double(r.excess) << ','
       << fmt_double(r.level / c_inf) << ',' << (r.converged ? 1 : 0) << '\n';
    all = all && r.converged;
  }
  write_text(dir / "curve.csv", os.str());
  std::cout << os.str();
  write_json_file(dir / "curve.json", Json{{"c_infty", c_inf}, {"N", p.N}, {"p", p.p}, {"rows", rows.size()}});
  if (!all) throw NonConvergenceError("curve: at least one level did not converge (see curve.csv)");
  return Json{"curve.csv", "curve.json"};
}

Json cmd_calibrate(const Params& p, const fs::path& dir, std::uint64_t seed) {
  Checks c;
  c.exponents(p);
  c.annulus(p);
  c(p.m >= 1, "m must be >= 1");
  c(p.cells >= kMinSolveCells, "cells must be >= " + std::to_string(kMinSolveCells));
  c(p.m < 2 || (p.k >= 1 && p.k + 1 <= p.m), "k must lie in [1, m - 1]");
  c.finish();
  const auto fam = build_family(AnnulusSpec{p.R1, p.R2, {p.N, p.p}}, p.m, p.cells, solve_options(p));
  Json man = write_family(fam, dir / "family");
  const auto cand = sign_changing_candidate(fam);
  write_profile(dir / "family" / "sign_changing.csv", cand);
  man["sign_changing_level"] = energy_J(nehari_project(cand));
  if (p.m >= 2) {
    const auto chk = span_energy_check(fam, p.k, p.span_samples, seed);
    man["span_check"] = Json{{"k", p.k}, {"bound", chk.bound}, {"max_sampled", chk.max_sampled},
                             {"samples", chk.samples}, {"holds", chk.max_sampled <= chk.bound}};
  }
  write_json_file(dir / "family" / "family.json", man);
  std::cout << man.dump(2) << '\n';
  return Json{"family/family.json", "family/sign_changing.csv"};
}

Json cmd_thresholds(const Params& p, const fs::path& dir) {
  Checks c;
  c.exponents(p);
  c.annulus(p);
  c(p.m >= 1, "m must be >= 1");
  c(p.delta >= 0.0, "delta must be >= 0");
  c.finish();
  ThresholdOptions t;
  t.cells = p.cells;
  t.solve = solve_options(p);
  t.c_infty = p.c_infty;
  const Exponents e{p.N, p.p};
  t.c_infty = resolve_c_infty(e, t);
  const AnnulusSpec spec{p.R1, p.R2, e};
  Json j{{"N", p.N}, {"p", p.p}, {"R1", p.R1}, {"R2", p.R2}, {"m", p.m}, {"c_infty", t.c_infty},
         {"l0_single", threshold_l0(spec, t)}, {"l0_multi", threshold_l0_multi(spec, p.m, t)}};
  if (p.delta > 0.0) j["small_hole"] = to_json(threshold_small_hole(p.delta, e, t));
  write_json_file(dir / "thresholds.json", j);
  std::cout << j.dump(2) << '\n';
  return Json{"thresholds.json"};
}

Json cmd_orbit(const Params& p, const fs::path& dir, std::uint64_t seed) {
  Checks c;
  c(!p.group_file.empty(), "--group is required");
  c(p.max_order >= 1, "max-order must be >= 1");
  c.finish();
  const auto spec = group_from_json(read_json_file(p.group_file));
  const auto closure = close_group(spec, p.max_order);
  const auto rep = min_orbit_card(closure, seed);
  Json j = to_json(rep);
  if (closure.complete && p.R2 > p.R1 && p.R1 >= 0.0) {
    double c_inf = p.c_infty;
    if (c_inf <= 0.0 && spec.dim >= 2 && p.p >= 1.1 && p.p <= spec.dim - 0.1) {
      c_inf = sobolev_constant(spec.dim, p.p).c_infty;
    }
    const auto mu = mu_G(closure, annulus_domain(spec.dim, p.R1, p.R2), c_inf, p.mu_samples, seed);
    j["mu_G"] = Json{{"multiplier", mu.multiplier}, {"value", mu.value}, {"c_infty", c_inf},
                     {"R1", p.R1}, {"R2", p.R2}};
  }
  write_json_file(dir / "orbit.json", j);
  std::cout << j.dump(2) << '\n';
  return Json{"orbit.json"};
}

Json cmd_bubbles(const Params& p, const fs::path& dir, std::uint64_t seed) {
  Checks c;
  c(!p.bubbles_file.empty(), "--bubbles is required");
  c(p.samples >= kMinMCSamples, "samples must be >= " + std::to_string(kMinMCSamples));
  c.finish();
  const fs::path file(p.bubbles_file);
  const auto cfg = bubbles_from_json(read_json_file(file), file.parent_path());
  const MCParams mc{p.samples, seed};
  Json j = Json::object();
  if (!cfg.bubbles.empty()) {
    j["additivity"] = to_json(additivity_check(cfg, mc));
  } else {
    j["norm_p"] = to_json(config_norm_p(cfg, mc));
  }
  j["projected_energy"] = to_json(projected_energy(cfg, mc));
  write_json_file(dir / "bubbles.json", j);
  std::cout << j.dump(2) << '\n';
  return Json{"bubbles.json"};
}

bool cmd_verify(const Params& p, const fs::path& dir, std::uint64_t seed, Json& files) {
  AcceptanceOptions opts;
  opts.mc_samples = p.samples;
  opts.seed = seed;
  std::vector<int> ids = p.criteria;
  if (ids.empty()) {
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  }
  Json list = Json::array();
  bool all = true;
  for (int id : ids) {
    const auto r = run_criterion(id, opts);
    std::cout << format_result(r) << std::endl;
    all = all && r.passed;
    list.push_back(Json{{"id", r.id}, {"name", r.name}, {"passed", r.passed},
                        {"seconds", r.seconds}, {"budget_seconds", r.budget_seconds}, {"detail", r.detail}});
  }
  write_json_file(dir / "verify.json", Json{{"all_passed", all}, {"criteria", list}});
  files = Json{"verify.json"};
  return all;
}

// Position just after the subcommand name, where config tokens are spliced in.
std::size_t subcommand_position(const std::vector<std::string>& args, const CLI::App& app) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    for (const auto* sub : app.get_subcommands({})) {
      if (sub->check_name(args[i])) return i + 1;
    }
  }
  return args.size();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critlab: critical p-Laplacian levels, Sobolev constants, symmetric thresholds and bubbles"};
  app.set_version_flag("--version", std::string(CRITLAB_VERSION));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;
  const char* env = std::getenv(kOutputEnv);
  common.output_dir = env && *env ? env : "critlab_out";
  Params P;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--output-dir", common.output_dir, std::string("output directory (default $") + kOutputEnv + " or ./critlab_out)");
    sub->add_option("--config", common.config, "JSON file with option values; command-line flags win");
    sub->add_option("--seed", common.seed, "random seed");
  };
  auto add_exps = [&](CLI::App* sub) {
    sub->add_option("--N", P.N, "dimension");
    sub->add_option("--p", P.p, "exponent p");
  };
  auto add_annulus = [&](CLI::App* sub) {
    sub->add_option("--R1", P.R1, "inner radius");
    sub->add_option("--R2", P.R2, "outer radius");
  };
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--cells", P.cells, "grid cells");
    sub->add_option("--max-iters", P.max_iters, "descent iteration cap");
    sub->add_option("--residual-tol", P.residual_tol, "ODE residual tolerance");
    sub->add_option("--energy-tol", P.energy_tol, "relative energy stall tolerance");
  };

  auto* sob = app.add_subcommand("sobolev", "best Sobolev constant S and c_inf");
  add_common(sob);
  add_exps(sob);
  sob->add_option("--truncation", P.truncation, "truncation radius (0 = default)");
  sob->add_option("--cells", P.cells, "grid cells")->default_val(kDefaultSobolevCells);

  auto* ann = app.add_subcommand("annulus", "annulus level c(R1,R2) and minimiser");
  add_common(ann);
  add_exps(ann);
  add_annulus(ann);
  add_solver(ann);
  ann->add_option("--method", P.method, "descent, shooting or both");

  auto* cur = app.add_subcommand("curve", "c(R,1) over a list of hole radii");
  add_common(cur);
  add_exps(cur);
  add_solver(cur);
  cur->add_option("--radii", P.radii, "comma-separated hole radii")->delimiter(',');
  cur->add_option("--c-infty", P.c_infty, "c_inf (0 = compute)");

  auto* cal = app.add_subcommand("calibrate", "equal-energy family on a geometric partition");
  add_common(cal);
  add_exps(cal);
  add_annulus(cal);
  add_solver(cal);
  cal->add_option("--m", P.m, "number of pieces");
  cal->add_option("--k", P.k, "span check uses omega_1..omega_{k+1}");
  cal->add_option("--span-samples", P.span_samples, "random span elements");

  auto* thr = app.add_subcommand("thresholds", "l0 values and the small-hole radius");
  add_common(thr);
  add_exps(thr);
  add_annulus(thr);
  add_solver(thr);
  thr->add_option("--m", P.m, "number of pieces for the multi-piece l0");
  thr->add_option("--delta", P.delta, "energy gap for the small-hole radius (0 = skip)");
  thr->add_option("--c-infty", P.c_infty, "c_inf (0 = compute)");

  auto* orb = app.add_subcommand("orbit", "group closure, Fix(G), l(G) and mu_G");
  add_common(orb);
  orb->add_option("--group", P.group_file, "JSON group file")->check(CLI::ExistingFile);
  orb->add_option("--max-order", P.max_order, "closure size cap");
  orb->add_option("--p", P.p, "exponent p for c_inf in mu_G");
  orb->add_option("--R1", P.R1, "annulus inner radius for mu_G");
  orb->add_option("--R2", P.R2, "annulus outer radius for mu_G");
  orb->add_option("--c-infty", P.c_infty, "c_inf (0 = compute)");
  orb->add_option("--mu-samples", P.mu_samples, "domain samples for mu_G");

  auto* bub = app.add_subcommand("bubbles", "Monte Carlo additivity of bubble configurations");
  add_common(bub);
  bub->add_option("--bubbles", P.bubbles_file, "JSON configuration")->check(CLI::ExistingFile);
  bub->add_option("--samples", P.samples, "samples per stratum");

  auto* ver = app.add_subcommand("verify-all", "run the acceptance suite");
  add_common(ver);
  ver->add_option("--samples", P.samples, "Monte Carlo samples per stratum");
  ver->add_option("--criteria", P.criteria, "subset of criteria (comma-separated ids)")->delimiter(',');

  std::vector<std::string> args(argv, argv + argc);
  try {
    // Splice config-file values in front of the explicit flags.
    for (std::size_t i = 1; i + 1 < args.size(); ++i) {
      if (args[i] == "--config") {
        const auto tokens = config_tokens(read_json_file(args[i + 1]), args);
        const auto pos = subcommand_position(args, app);
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos), tokens.begin(), tokens.end());
        break;
      }
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  const fs::path dir(common.output_dir);
  Json files = Json::array();
  int status = 0;
  std::string diagnostic;
  try {
    bool ok = true;
    if (sub == sob) files = cmd_sobolev(P, dir);
    else if (sub == ann) files = cmd_annulus(P, dir);
    else if (sub == cur) files = cmd_curve(P, dir);
    else if (sub == cal) files = cmd_calibrate(P, dir, common.seed);
    else if (sub == thr) files = cmd_thresholds(P, dir);
    else if (sub == orb) files = cmd_orbit(P, dir, common.seed);
    else if (sub == bub) files = cmd_bubbles(P, dir, common.seed);
    else ok = cmd_verify(P, dir, common.seed, files);
    status = ok ? 0 : 2;
  } catch (const DomainError& e) {
    const std::string what = e.what();
    std::cerr << (what.rfind("error: ", 0) == 0 ? "" : "error: ") << what << '\n';
    status = 1;
    diagnostic = what;
  } catch (const NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << '\n';
    status = 3;
    diagnostic = e.what();
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    status = 2;
    diagnostic = e.what();
  }
  try {
    write_manifest(dir, command, sub, common, files, status, diagnostic);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot write manifest: " << e.what() << '\n';
    if (status == 0) status = 1;
  }
  return status;
}
