// Command-line driver: steady profiles, case classification, coefficient
// fields, stability constants, barrier sign checks, parabolic simulation
// with certified envelopes, and artifact re-verification.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "forch/experiments.hpp"
#include "json.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;
using namespace forch;

ordered_json num(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(); }

void emit(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

struct Loaded {
  std::string text;
  ExperimentConfig cfg;
  TomlDocument doc;
};

Loaded load(const std::string& path) {
  if (path.empty()) throw InvalidInput("a config file is required (--config PATH)");
  Loaded l;
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw InvalidInput("cannot read config file '" + path + "'");
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) l.text.append(buf, n);
  std::fclose(f);
  l.cfg = parse_config(l.text, path);
  l.doc = parse_toml(l.text, path);
  return l;
}

int cmd_validate_model(const Loaded& l) {
  const ValidationReport rep = validate_model(l.cfg.model, l.cfg.flow.g1, l.cfg.flow.g2);
  ordered_json out;
  out["command"] = "validate-model";
  out["config_hash"] = l.cfg.config_hash;
  out["all_passed"] = rep.all_passed();
  ordered_json checks = ordered_json::array();
  for (const ValidationCheck& c : rep.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  out["checks"] = checks;
  emit(out);
  return rep.all_passed() ? 0 : 1;
}

int cmd_steady(const Loaded& l, const std::string& out_dir) {
  const SteadyProfile prof = integrate_profile(l.cfg.flow, l.cfg.r_end, l.cfg.steady_opts);
  std::filesystem::create_directories(out_dir);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < prof.knots().size(); ++i)
    rows.push_back({prof.knots()[i], prof.values()[i]});
  const std::string csv = out_dir + "/profile.csv";
  write_csv(csv, {"config_hash=" + l.cfg.config_hash, "name=" + l.cfg.name}, {"r", "s"},
            rows);
  ordered_json out;
  out["command"] = "steady";
  out["config_hash"] = l.cfg.config_hash;
  out["coverage"] = prof.coverage();
  out["finite_exit"] = std::isfinite(prof.r_max());
  out["r_max"] = num(prof.r_max());
  out["exit_side"] = prof.exit_side();
  out["knots"] = prof.knots().size();
  out["s_end"] = prof.values().back();
  out["profile_csv"] = csv;
  emit(out);
  return 0;
}

int cmd_classify(const Loaded& l) {
  const CaseLabel label = classify_case(l.cfg.flow);
  ordered_json out;
  out["command"] = "classify";
  out["config_hash"] = l.cfg.config_hash;
  out["global_case"] = label.global_case;
  out["example_case"] = label.example_case;
  out["n2_case"] = label.n2_case;
  out["prediction"] = label.prediction.str();
  out["delta"] = num(label.delta);
  out["s_star"] = num(label.s_star);
  out["h_r0"] = num(label.h_r0);
  emit(out);
  return 0;
}

int cmd_sweep(const Loaded& l, const std::string& out_dir, int threads) {
  const SweepResult res = run_sweep(l.cfg, l.doc, threads);
  std::filesystem::create_directories(out_dir);
  std::vector<std::vector<double>> rows;
  rows.reserve(res.rows.size());
  for (const SweepRow& row : res.rows) rows.push_back(sweep_csv_row(row));
  write_csv(out_dir + "/sweep.csv", {"config_hash=" + l.cfg.config_hash},
            sweep_csv_header(), rows);

  ordered_json jrows = ordered_json::array();
  for (const SweepRow& row : res.rows) {
    ordered_json r;
    r["index"] = row.index;
    r["c1"] = row.c1;
    r["c2"] = row.c2;
    r["s0"] = row.s0;
    r["g1_b"] = num(row.g1_b);
    r["g2_b"] = num(row.g2_b);
    r["global_case"] = row.global_case;
    r["example_case"] = row.example_case;
    r["n2_case"] = row.n2_case;
    r["prediction"] = row.prediction;
    r["delta"] = num(row.delta);
    r["s_star"] = num(row.s_star);
    r["s_infty"] = num(row.s_infty);
    r["uncertainty"] = num(row.uncertainty);
    r["r_detect"] = num(row.r_detect);
    r["tail_sign"] = row.tail_sign;
    r["r_reached"] = num(row.r_reached);
    r["finite_exit"] = row.finite_exit;
    r["pred_ok"] = row.pred_ok;
    r["tail_ok"] = row.tail_ok;
    r["ok"] = row.ok;
    r["error"] = row.error;
    jrows.push_back(r);
  }
  ordered_json full;
  full["config_hash"] = l.cfg.config_hash;
  full["rows"] = jrows;
  std::ofstream jf(out_dir + "/sweep.json", std::ios::binary);
  jf << full.dump(2) << "\n";

  ordered_json out;
  out["command"] = "sweep";
  out["config_hash"] = l.cfg.config_hash;
  out["tuples"] = res.rows.size();
  out["failures"] = res.failures;
  out["out"] = out_dir;
  emit(out);
  return res.failures == 0 ? 0 : 1;
}

int cmd_coeffs(const Loaded& l, const std::string& out_dir, std::size_t samples) {
  auto profile = std::make_shared<const SteadyProfile>(
      integrate_profile(l.cfg.flow, l.cfg.r_end, l.cfg.steady_opts));
  CoefficientField field(profile);
  const double r0 = l.cfg.flow.r0;
  const double r1 = std::min(l.cfg.linearize_R, profile->coverage());
  const double nu0 = l.cfg.solver.velocity.nu0;
  std::filesystem::create_directories(out_dir);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < samples; ++i) {
    const double r =
        r0 + (r1 - r0) * static_cast<double>(i) / static_cast<double>(samples - 1);
    const CoefficientValues cv = field.coeffs_at(r);
    rows.push_back({r, (*profile)(r), cv.beta, cv.gamma, cv.phi_coeff, cv.lambda_drift,
                    field.phi_prime(r), field.gauge_Lambda(r),
                    field.forcing_f0_radial(r, nu0)});
  }
  const std::string csv = out_dir + "/coeffs.csv";
  write_csv(csv, {"config_hash=" + l.cfg.config_hash, "name=" + l.cfg.name},
            {"r", "s", "beta", "gamma", "phi", "lambda", "phi_prime", "Lambda", "f0"}, rows);
  ordered_json out;
  out["command"] = "coeffs";
  out["config_hash"] = l.cfg.config_hash;
  out["rows"] = samples;
  out["r_begin"] = r0;
  out["r_end"] = r1;
  out["nu0"] = nu0;
  out["coeffs_csv"] = csv;
  emit(out);
  return 0;
}

int cmd_constants(const Loaded& l) {
  auto profile = std::make_shared<const SteadyProfile>(
      integrate_profile(l.cfg.flow, l.cfg.r_end, l.cfg.steady_opts));
  auto field = std::make_shared<CoefficientField>(profile);
  const ConstantsPack k = constants(*field, l.cfg.linearize_R);
  const BarrierSpec growth = build_growth_barrier(k, field, l.cfg.linearize_R);
  const ShellConstants sc = shell_constants(k, l.cfg.solver.t_final);
  ordered_json out;
  out["command"] = "constants";
  out["config_hash"] = l.cfg.config_hash;
  out["pack"] = {{"n", k.n},
                 {"r0", k.r0},
                 {"R", k.R},
                 {"s_lower", k.s_lower},
                 {"s_upper", k.s_upper},
                 {"mu1", k.mu1},
                 {"mu2", k.mu2},
                 {"mu3", k.mu3},
                 {"d0", k.d0},
                 {"d1", k.d1},
                 {"d2", k.d2},
                 {"d3", k.d3},
                 {"d4", k.d4},
                 {"C0", k.C0},
                 {"C1", k.C1},
                 {"C2", k.C2},
                 {"c0", k.c0},
                 {"kappa0", k.kappa0},
                 {"kappa1", k.kappa1},
                 {"kappa2", k.kappa2},
                 {"C3_growth", k.C3_growth},
                 {"C3_outer", k.C3_outer},
                 {"C3_shell", k.C3_shell},
                 {"C4", k.C4},
                 {"C5", k.C5}};
  out["growth_barrier"] = {{"s_exponent", growth.s_exponent},
                           {"q", growth.q},
                           {"eta0", growth.eta0},
                           {"eta", growth.eta},
                           {"eta1", growth.eta1}};
  out["shell"] = {{"T", l.cfg.solver.t_final},
                  {"R", sc.R},
                  {"eta0", sc.eta0},
                  {"log_eta0", sc.log_eta0}};
  emit(out);
  return 0;
}

int cmd_barriers(const Loaded& l, std::size_t samples) {
  auto profile = std::make_shared<const SteadyProfile>(
      integrate_profile(l.cfg.flow, l.cfg.r_end, l.cfg.steady_opts));
  auto field = std::make_shared<CoefficientField>(profile);
  const double R = l.cfg.linearize_R;
  const ConstantsPack k = constants(*field, R);
  const double r0 = l.cfg.flow.r0;
  const double ell = r0 + 2.0 * R;
  if (profile->coverage() < ell + R)
    throw NumericError("profile coverage too small for the shell barrier", ell + R);

  struct Item {
    const char* name;
    BarrierSpec spec;
  };
  const std::vector<Item> items = {
      {"growth_time", build_growth_barrier(k, field, R)},
      {"outer_sup", build_outer_barrier(k, field, R, l.cfg.solver.t_final)},
      {"shell_sub", build_shell_barrier(k, field, R, ell)},
  };
  ordered_json out;
  out["command"] = "barriers";
  out["config_hash"] = l.cfg.config_hash;
  bool all = true;
  for (const Item& it : items) {
    const SignReport rep = verify_barrier_sign(it.spec, samples);
    all = all && rep.passed;
    out[it.name] = {{"samples", rep.samples},
                    {"max_violation", rep.max_violation},
                    {"worst_r", num(rep.worst_r)},
                    {"worst_t", num(rep.worst_t)},
                    {"component_s_ok", rep.component_s_ok},
                    {"component_potential_ok", rep.component_potential_ok},
                    {"passed", rep.passed}};
  }
  out["all_passed"] = all;
  emit(out);
  return all ? 0 : 1;
}

int cmd_simulate(const Loaded& l, const std::string& out_dir) {
  const RunSummary sum = simulate_run(l.cfg, out_dir);
  ordered_json out;
  out["command"] = "simulate";
  out["config_hash"] = sum.config_hash;
  out["out"] = sum.out_dir;
  out["failures"] = sum.failures;
  out["failed_checks"] = sum.failed_checks;
  out["envelope_all_ok"] = sum.decay.envelope_all_ok;
  out["max_principle_ok"] = sum.max_principle.ok && sum.max_principle.pointwise_ok;
  out["sigma_all_ok"] = sum.sigma.all_ok;
  out["fitted_rate"] = num(sum.decay.fitted_rate);
  out["eta1"] = sum.decay.eta1;
  if (sum.has_shells) {
    out["dichotomy_verdict"] = sum.dichotomy.verdict;
    out["spatial_verdict"] = sum.spatial.verdict;
  }
  emit(out);
  return sum.failures == 0 ? 0 : 1;
}

int cmd_verify(const std::string& run_dir) {
  if (run_dir.empty()) throw InvalidInput("verify needs --run DIR");
  const VerifyReport rep = verify_run_dir(run_dir);
  ordered_json out;
  out["command"] = "verify";
  out["run"] = rep.dir;
  out["config_hash"] = rep.config_hash;
  out["levels"] = rep.levels;
  out["envelope_ok"] = rep.envelope_ok;
  out["max_principle_ok"] = rep.max_principle_ok;
  out["sigma_checked"] = rep.has_sigma;
  out["sigma_ok"] = rep.sigma_ok;
  out["contraction_checked"] = rep.contraction_checked;
  out["contraction_ok"] = rep.contraction_ok;
  out["failures"] = rep.failures;
  out["failed_checks"] = rep.failed_checks;
  emit(out);
  return rep.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase generalized-Forchheimer flow toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "forch-out", run_dir;
  int threads = 1;
  long seed = 0;
  std::size_t samples = 10000;
  std::size_t coeff_samples = 200;
  app.add_option("--config", config_path, "experiment config (TOML)");
  app.add_option("--seed", seed, "reserved for sampling commands");
  app.add_option("--threads", threads, "sweep-level parallelism")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory for artifacts");

  app.add_subcommand("validate-model", "check constitutive admissibility");
  app.add_subcommand("steady", "integrate the steady saturation profile");
  app.add_subcommand("classify", "case label and limit prediction");
  app.add_subcommand("sweep", "classified steady sweep over [sweep] arrays");
  CLI::App* sc_coeffs = app.add_subcommand("coeffs", "sample the linearized coefficients");
  sc_coeffs->add_option("--samples", coeff_samples, "rows in coeffs.csv")
      ->check(CLI::PositiveNumber);
  app.add_subcommand("constants", "stability constants and barrier scalars");
  CLI::App* sc_barriers = app.add_subcommand("barriers", "barrier sign verification");
  sc_barriers->add_option("--samples", samples, "Halton samples per family")
      ->check(CLI::PositiveNumber);
  app.add_subcommand("simulate", "parabolic run with certified envelope checks");
  CLI::App* sc_verify = app.add_subcommand("verify", "re-check a stored run directory");
  sc_verify->add_option("--run", run_dir, "run directory produced by simulate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "verify") return cmd_verify(run_dir);
    const Loaded l = load(config_path);
    if (cmd == "validate-model") return cmd_validate_model(l);
    if (cmd == "steady") return cmd_steady(l, out_dir);
    if (cmd == "classify") return cmd_classify(l);
    if (cmd == "sweep") return cmd_sweep(l, out_dir, threads);
    if (cmd == "coeffs") return cmd_coeffs(l, out_dir, std::max<std::size_t>(2, coeff_samples));
    if (cmd == "constants") return cmd_constants(l);
    if (cmd == "barriers") return cmd_barriers(l, samples);
    if (cmd == "simulate") return cmd_simulate(l, out_dir);
    std::cerr << "unknown command '" << cmd << "'\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
