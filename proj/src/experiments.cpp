#include "forch/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace forch {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kTinyAbs = 1e-300;

// NaN and infinities have no JSON representation; store them as null.
ordered_json num(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(); }

double num_back(const ordered_json& j) { return j.is_number() ? j.get<double>() : kNaN; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << bytes;
  if (!out.good()) throw InvalidInput("failed writing '" + path + "'");
}

std::vector<std::size_t> stored_levels(std::size_t count, std::size_t stride) {
  std::vector<std::size_t> levels;
  for (std::size_t k = 0; k < count; k += stride) levels.push_back(k);
  if (levels.back() != count - 1) levels.push_back(count - 1);
  return levels;
}

}  // namespace

RunSummary simulate_run(const ExperimentConfig& cfg, const std::string& out_dir) {
  const GridSpec grid = cfg.grid();
  if (std::find(grid.modes.begin(), grid.modes.end(), 0) == grid.modes.end())
    throw InvalidInput("simulate requires mode 0 in [solver].modes");

  auto profile = std::make_shared<const SteadyProfile>(
      integrate_profile(cfg.flow, cfg.r_end, cfg.steady_opts));
  if (profile->coverage() < cfg.solver.r_out)
    throw NumericError("steady profile exits before the solver outer radius",
                       profile->r_max());

  auto field = std::make_shared<CoefficientField>(profile);
  const ConstantsPack pack = constants(*field, cfg.linearize_R);
  const BarrierSpec growth = build_growth_barrier(pack, field, cfg.linearize_R);

  const VelocitySpec vel = cfg.solver.velocity;
  const InitialSpec init = cfg.solver.initial;
  const ForcingSpec forcing = cfg.solver.forcing;

  std::vector<ModeProblem> problems;
  for (int m : grid.modes) {
    ModeProblem p = zero_problem();
    p.w0 = [init](double r) { return init(r); };
    if (m == 0 && forcing.family == "const") {
      const double v = forcing.value;
      p.f0 = [v](double, double) { return v; };
    } else if (m == 0 && forcing.family == "velocity") {
      p.f0 = [field, vel](double r, double t) { return field->forcing_f0_radial(r, vel(t)); };
    }
    problems.push_back(std::move(p));
  }

  GridField run = solve_ibvp(field, grid, problems);
  const auto nu = [vel](double t) { return vel(t); };
  const Reconstruction recon = reconstruct(run, *field, nu);

  RunSummary sum;
  sum.out_dir = out_dir;
  sum.config_hash = cfg.config_hash;
  sum.compatibility_ok = run.compatibility_ok;
  sum.solve_residual = run.solve_residual;
  sum.discrete_mp_ok = run.discrete_max_principle_ok;

  const double window = 0.5 * grid.t_final;
  sum.decay = measure_decay(run, growth);
  sum.limsup = limsup_check(run, growth, window);
  sum.max_principle = max_principle_check(run);
  sum.bounds = measure_data_bounds(run, window);
  add_sigma_bounds(sum.bounds, run, *field, nu);
  sum.has_sigma = true;
  sum.sigma = sigma_envelope_check(run, *field, growth);

  if (std::isfinite(cfg.solver.shell_width)) {
    sum.has_shells = true;
    sum.shells = shell_sup_sequence(run, cfg.solver.shell_width);
    if (sum.shells.mbar.size() >= 3) {
      const ShellConstants sc = shell_constants(pack, grid.t_final);
      sum.dichotomy = dichotomy_check(sum.shells, std::isfinite(sc.eta0) ? sc.eta0 : 0.0);
    }
    sum.spatial = spatial_decay_report(run);
  }

  const auto check = [&sum](bool ok, const std::string& name) {
    if (!ok) {
      ++sum.failures;
      sum.failed_checks.push_back(name);
    }
  };
  const double rscale = std::max(1.0, run.sup_w0 + run.sup_boundary + run.sup_f0);
  check(run.compatibility_ok, "initial/boundary compatibility");
  check(run.solve_residual <= 1e-7 * rscale, "tridiagonal solve residual");
  check(run.discrete_max_principle_ok, "discrete maximum principle");
  check(sum.decay.envelope_all_ok, "decay envelope");
  check(sum.limsup.ok, "limsup bound");
  check(sum.max_principle.ok && sum.max_principle.pointwise_ok, "maximum principle");
  check(sum.sigma.all_ok, "sigma envelope");
  if (sum.decay.contraction_applicable)
    check(sum.decay.contraction_ok, "single-cycle contraction");

  // Artifacts.
  std::filesystem::create_directories(out_dir);
  write_file(out_dir + "/config.toml", cfg.config_text);

  const std::size_t stride = std::max<std::size_t>(
      1, static_cast<std::size_t>(cfg.solver.output_stride));
  const std::vector<std::size_t> levels = stored_levels(run.times.size(), stride);
  const std::vector<double>& r = grid.r_nodes;
  std::vector<std::vector<double>> rows;
  rows.reserve(grid.modes.size() * levels.size() * r.size());
  for (std::size_t m = 0; m < grid.modes.size(); ++m)
    for (std::size_t k : levels)
      for (std::size_t i = 0; i < r.size(); ++i) {
        double sg = kNaN, v1 = kNaN, v2 = kNaN;
        if (grid.modes[m] == 0) {
          sg = recon.sigma[k][i];
          v1 = recon.v1[k][i];
          v2 = recon.v2[k][i];
        }
        rows.push_back({static_cast<double>(grid.modes[m]), run.times[k], r[i],
                        run.w[m][k][i], sg, v1, v2});
      }
  write_csv(out_dir + "/field.csv",
            {"config_hash=" + cfg.config_hash, "name=" + cfg.name,
             "stride=" + std::to_string(stride)},
            {"mode", "t", "r", "w", "sigma", "v1", "v2"}, rows);

  double sigma0_sup = 0.0;
  for (double s : recon.sigma[0]) sigma0_sup = std::max(sigma0_sup, std::fabs(s));
  const double gauge_hi = std::exp(sum.sigma.gauge_max);

  ordered_json meta;
  meta["config_hash"] = cfg.config_hash;
  meta["name"] = cfg.name;
  meta["origin"] = cfg.origin;
  meta["grid"] = {{"n", grid.n},
                  {"r0", r.front()},
                  {"r_out", r.back()},
                  {"nodes", r.size()},
                  {"spacing", cfg.solver.spacing},
                  {"dt", grid.dt},
                  {"t_final", grid.t_final},
                  {"time_levels", run.times.size()},
                  {"stride", stride},
                  {"modes", grid.modes}};
  meta["steady"] = {{"r_end", cfg.r_end},
                    {"coverage", profile->coverage()},
                    {"finite_exit", std::isfinite(profile->r_max())},
                    {"r_max", num(profile->r_max())},
                    {"s_at_r0", (*profile)(profile->r_begin())}};
  meta["constants"] = {{"n", pack.n},         {"r0", pack.r0},
                       {"R", pack.R},         {"s_lower", pack.s_lower},
                       {"s_upper", pack.s_upper},
                       {"mu1", pack.mu1},     {"mu2", pack.mu2},
                       {"mu3", pack.mu3},     {"d0", pack.d0},
                       {"d1", pack.d1},       {"d2", pack.d2},
                       {"d3", pack.d3},       {"d4", pack.d4},
                       {"C0", pack.C0},       {"C1", pack.C1},
                       {"C2", pack.C2},       {"c0", pack.c0},
                       {"kappa0", pack.kappa0},
                       {"kappa1", pack.kappa1},
                       {"kappa2", pack.kappa2},
                       {"C3_growth", pack.C3_growth},
                       {"C3_outer", pack.C3_outer},
                       {"C3_shell", pack.C3_shell},
                       {"C4", pack.C4},       {"C5", pack.C5}};
  meta["barrier"] = {{"q", growth.q},
                     {"eta0", growth.eta0},
                     {"eta", growth.eta},
                     {"eta1", growth.eta1},
                     {"s_exponent", growth.s_exponent},
                     {"R", growth.R}};
  meta["envelope"] = {{"sup_w0", sum.decay.sup_w0},
                      {"delta0", sum.decay.delta0},
                      {"envelope_constant", sum.decay.envelope_constant},
                      {"eta0", sum.decay.eta0},
                      {"eta1", sum.decay.eta1}};
  meta["max_principle"] = {{"delta8", sum.max_principle.delta8},
                           {"delta9", sum.max_principle.sup_f0},
                           {"T", run.times.back()}};
  meta["sigma"] = {{"sup_sigma0", sigma0_sup},
                   {"c_sigma", sum.sigma.c_sigma},
                   {"gauge_min", sum.sigma.gauge_min},
                   {"gauge_max", sum.sigma.gauge_max},
                   {"add_term", gauge_hi * sum.decay.envelope_constant * sum.decay.delta0},
                   {"delta3", num(kNaN)},
                   {"eta1", sum.decay.eta1}};
  meta["contraction"] = {{"applicable", sum.decay.contraction_applicable},
                         {"t_cycle", growth.q * growth.R * growth.R},
                         {"eta0", growth.eta0}};
  meta["bounds"] = {{"delta0", num(sum.bounds.delta0)},
                    {"delta2", num(sum.bounds.delta2)},
                    {"delta3", num(sum.bounds.delta3)},
                    {"delta3_prime", num(sum.bounds.delta3_prime)},
                    {"delta4", num(sum.bounds.delta4)},
                    {"delta6", num(sum.bounds.delta6)},
                    {"delta7", num(sum.bounds.delta7)},
                    {"delta8", num(sum.bounds.delta8)},
                    {"delta9", num(sum.bounds.delta9)},
                    {"delta10", num(sum.bounds.delta10)},
                    {"delta11", num(sum.bounds.delta11)},
                    {"delta12", num(sum.bounds.delta12)},
                    {"delta13", num(sum.bounds.delta13)},
                    {"window_start", sum.bounds.window_start},
                    {"domain_tag", sum.bounds.domain_tag}};
  meta["velocity"] = {{"family", vel.family}, {"nu0", vel.nu0}, {"rate", vel.rate}};
  meta["initial"] = {{"family", init.family},
                     {"lo", init.lo},
                     {"hi", init.hi},
                     {"amplitude", init.amplitude}};
  meta["forcing"] = {{"family", forcing.family}, {"value", forcing.value}};
  write_file(out_dir + "/meta.json", meta.dump(2) + "\n");

  ordered_json rpt;
  rpt["config_hash"] = cfg.config_hash;
  rpt["name"] = cfg.name;
  rpt["failures"] = sum.failures;
  rpt["failed_checks"] = sum.failed_checks;
  rpt["solve"] = {{"compatibility_ok", run.compatibility_ok},
                  {"compatibility_gap", run.compatibility_gap},
                  {"residual", run.solve_residual},
                  {"discrete_max_principle_ok", run.discrete_max_principle_ok},
                  {"discrete_mp_excess", run.discrete_mp_excess}};
  rpt["decay"] = {{"eta0", sum.decay.eta0},
                  {"eta1", sum.decay.eta1},
                  {"q", sum.decay.q},
                  {"R", sum.decay.R},
                  {"sup_w0", sum.decay.sup_w0},
                  {"delta0", sum.decay.delta0},
                  {"envelope_constant", sum.decay.envelope_constant},
                  {"envelope_all_ok", sum.decay.envelope_all_ok},
                  {"worst_margin", num(sum.decay.worst_margin)},
                  {"fitted_rate", num(sum.decay.fitted_rate)},
                  {"rate_ok", sum.decay.rate_ok},
                  {"contraction_applicable", sum.decay.contraction_applicable},
                  {"contraction_ok", sum.decay.contraction_ok},
                  {"contraction_lhs", num(sum.decay.contraction_lhs)},
                  {"contraction_rhs", num(sum.decay.contraction_rhs)}};
  rpt["limsup"] = {{"window_start", sum.limsup.window_start},
                   {"delta2", sum.limsup.delta2},
                   {"tail_sup", sum.limsup.tail_sup},
                   {"bound", sum.limsup.bound},
                   {"ok", sum.limsup.ok}};
  rpt["max_principle"] = {{"sup_interior", sum.max_principle.sup_interior},
                          {"sup_parabolic", sum.max_principle.sup_parabolic},
                          {"sup_f0", sum.max_principle.sup_f0},
                          {"delta8", sum.max_principle.delta8},
                          {"bound", sum.max_principle.bound},
                          {"slack", sum.max_principle.slack},
                          {"ok", sum.max_principle.ok},
                          {"pointwise_ok", sum.max_principle.pointwise_ok},
                          {"worst_excess", sum.max_principle.worst_excess}};
  rpt["sigma"] = {{"gauge_min", sum.sigma.gauge_min},
                  {"gauge_max", sum.sigma.gauge_max},
                  {"c_sigma", sum.sigma.c_sigma},
                  {"all_ok", sum.sigma.all_ok},
                  {"worst_margin", num(sum.sigma.worst_margin)}};
  if (sum.has_shells) {
    rpt["shells"] = {{"r_shell", sum.shells.r_shell},
                     {"T", sum.shells.T},
                     {"mbar", sum.shells.mbar}};
    rpt["dichotomy"] = {{"eta0", sum.dichotomy.eta0},
                        {"k_start", sum.dichotomy.k_start},
                        {"part_a_ok", sum.dichotomy.part_a_ok},
                        {"decay_branch", sum.dichotomy.decay_branch},
                        {"growth_branch", sum.dichotomy.growth_branch},
                        {"verdict", sum.dichotomy.verdict}};
    rpt["spatial"] = {{"threshold", sum.spatial.threshold},
                      {"resolved", sum.spatial.resolved},
                      {"resolve_radius", num(sum.spatial.resolve_radius)},
                      {"radii", sum.spatial.radii},
                      {"sphere_sup", sum.spatial.sphere_sup},
                      {"curve_t", sum.spatial.curve_t},
                      {"curve_r", sum.spatial.curve_r},
                      {"curve_ok", sum.spatial.curve_ok},
                      {"verdict", sum.spatial.verdict}};
  }
  write_file(out_dir + "/report.json", rpt.dump(2) + "\n");
  return sum;
}

namespace {

struct CsvData {
  std::string hash;
  std::vector<double> times;
  std::vector<std::vector<double>> w, sigma;  // mode-0 samples, [level][node]
};

CsvData parse_field_csv(const std::string& text, const std::string& path) {
  CsvData out;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  std::vector<double> cur_w, cur_sigma;
  double cur_t = kNaN;
  bool have = false;
  const auto flush = [&]() {
    if (!have) return;
    out.times.push_back(cur_t);
    out.w.push_back(std::move(cur_w));
    out.sigma.push_back(std::move(cur_sigma));
    cur_w.clear();
    cur_sigma.clear();
    have = false;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# config_hash=";
      if (line.rfind(tag, 0) == 0) out.hash = line.substr(tag.size());
      continue;
    }
    if (!header_seen) {
      if (line != "mode,t,r,w,sigma,v1,v2")
        throw InvalidInput("unexpected header in '" + path + "': " + line);
      header_seen = true;
      continue;
    }
    double vals[7];
    std::istringstream row(line);
    std::string cell;
    for (int c = 0; c < 7; ++c) {
      if (!std::getline(row, cell, ','))
        throw InvalidInput("short row in '" + path + "': " + line);
      vals[c] = std::strtod(cell.c_str(), nullptr);
    }
    if (vals[0] != 0.0) {
      flush();
      continue;
    }
    if (!have || vals[1] != cur_t) {
      flush();
      cur_t = vals[1];
      have = true;
    }
    cur_w.push_back(vals[3]);
    cur_sigma.push_back(vals[4]);
  }
  flush();
  if (out.times.empty()) throw InvalidInput("no mode-0 data in '" + path + "'");
  return out;
}

double level_sup(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  return s;
}

double level_signed_max(const std::vector<double>& v) {
  double s = -kInf;
  for (double x : v) s = std::max(s, x);
  return s;
}

}  // namespace

VerifyReport verify_run_dir(const std::string& dir) {
  VerifyReport rep;
  rep.dir = dir;

  const std::string cfg_bytes = read_file(dir + "/config.toml");
  const std::string hash = fnv1a_hex(cfg_bytes);
  const ordered_json meta = ordered_json::parse(read_file(dir + "/meta.json"));
  const ordered_json rpt = ordered_json::parse(read_file(dir + "/report.json"));
  const CsvData csv = parse_field_csv(read_file(dir + "/field.csv"), dir + "/field.csv");

  if (meta.at("config_hash").get<std::string>() != hash ||
      rpt.at("config_hash").get<std::string>() != hash || csv.hash != hash)
    throw InvalidInput("config hash mismatch in '" + dir +
                       "': artifacts do not match config.toml");
  rep.config_hash = hash;
  rep.levels = csv.times.size();

  const auto fail = [&rep](const std::string& name) {
    ++rep.failures;
    rep.failed_checks.push_back(name);
  };

  // Decay envelope at every stored level, from recorded constants only.
  {
    const auto& env = meta.at("envelope");
    const double eta0 = env.at("eta0").get<double>();
    const double eta1 = env.at("eta1").get<double>();
    const double C = env.at("envelope_constant").get<double>();
    const double sup_w0 = env.at("sup_w0").get<double>();
    const double delta0 = env.at("delta0").get<double>();
    for (std::size_t k = 0; k < csv.times.size(); ++k) {
      const double damp = std::exp(-eta1 * csv.times[k]) * sup_w0;
      const double rhs = delta0 == 0.0 ? (1.0 + eta0) * damp : C * (damp + delta0);
      if (level_sup(csv.w[k]) > rhs * (1.0 + 1e-9) + kTinyAbs) rep.envelope_ok = false;
    }
    if (!rep.envelope_ok) fail("decay envelope");
  }

  // Pointwise maximum principle |w(t)| <= delta8 + delta9 (t+1).
  {
    const auto& mp = meta.at("max_principle");
    const double delta8 = mp.at("delta8").get<double>();
    const double delta9 = mp.at("delta9").get<double>();
    const double T = mp.at("T").get<double>();
    const double slack = 1e-6 * std::max(1.0, delta8 + (T + 1.0) * delta9);
    for (std::size_t k = 0; k < csv.times.size(); ++k)
      if (level_sup(csv.w[k]) > delta8 + delta9 * (csv.times[k] + 1.0) + slack)
        rep.max_principle_ok = false;
    if (!rep.max_principle_ok) fail("maximum principle");
  }

  // Sigma envelope from the stored sigma column.
  if (meta.contains("sigma")) {
    rep.has_sigma = true;
    const auto& sg = meta.at("sigma");
    const double sup0 = sg.at("sup_sigma0").get<double>();
    const double c_sigma = sg.at("c_sigma").get<double>();
    const double eta1 = sg.at("eta1").get<double>();
    const double delta3 = num_back(sg.at("delta3"));
    const double add_term = num_back(sg.at("add_term"));
    for (std::size_t k = 0; k < csv.times.size(); ++k) {
      const double damp = std::exp(-eta1 * csv.times[k]) * sup0;
      const double rhs =
          std::isnan(delta3) ? c_sigma * damp + add_term : c_sigma * (damp + delta3);
      if (level_sup(csv.sigma[k]) > rhs * (1.0 + 1e-9) + kTinyAbs) rep.sigma_ok = false;
    }
    if (!rep.sigma_ok) fail("sigma envelope");
  }

  // Single-cycle contraction when the original run qualified for it.
  {
    const auto& ct = meta.at("contraction");
    if (ct.at("applicable").get<bool>()) {
      const double t_cycle = ct.at("t_cycle").get<double>();
      const double eta0 = ct.at("eta0").get<double>();
      std::size_t kc = csv.times.size();
      for (std::size_t k = 0; k < csv.times.size(); ++k)
        if (csv.times[k] >= t_cycle * (1.0 - 1e-12)) {
          kc = k;
          break;
        }
      if (kc < csv.times.size()) {
        rep.contraction_checked = true;
        const double lhs = std::max(0.0, level_signed_max(csv.w[kc]));
        const double rhs = std::max(0.0, level_signed_max(csv.w[0])) / (1.0 + eta0);
        rep.contraction_ok = lhs <= rhs * (1.0 + 1e-9) + kTinyAbs;
        if (!rep.contraction_ok) fail("single-cycle contraction");
      }
    }
  }
  return rep;
}

namespace {

struct TailScan {
  double r_detect = kNaN;
  int sign = 0;
};

// Maximal constant-sign suffix of the knot increments; used only when the
// profile exits at a saturation threshold and the dyadic extrapolation does
// not apply.
TailScan scan_tail(const SteadyProfile& prof) {
  const std::vector<double>& ks = prof.knots();
  const std::vector<double>& vs = prof.values();
  TailScan t;
  if (ks.size() < 2) return t;
  std::size_t start = ks.size() - 1;
  for (std::size_t j = ks.size() - 1; j-- > 0;) {
    const double d = vs[j + 1] - vs[j];
    const int sg = (d > 0.0) - (d < 0.0);
    if (sg != 0) {
      if (t.sign == 0) t.sign = sg;
      else if (sg != t.sign) break;
    }
    start = j;
  }
  t.r_detect = ks[start];
  return t;
}

struct Tuple {
  double c1, c2, s0, b1, b2;
};

SweepRow sweep_one(const ExperimentConfig& base, const Tuple& t, bool set_b1, bool set_b2,
                   std::size_t index) {
  SweepRow row;
  row.index = index;
  row.c1 = t.c1;
  row.c2 = t.c2;
  row.s0 = t.s0;
  row.g1_b = t.b1;
  row.g2_b = t.b2;
  try {
    FlowParams p = base.flow;
    p.c1 = t.c1;
    p.c2 = t.c2;
    p.s0 = t.s0;
    if (set_b1) p.g1 = GeneralizedPolynomial::two_term(p.g1.a0(), t.b1, p.g1.tt_alpha());
    if (set_b2) p.g2 = GeneralizedPolynomial::two_term(p.g2.a0(), t.b2, p.g2.tt_alpha());
    p.validate();

    const CaseLabel label = classify_case(p);
    row.global_case = label.global_case;
    row.example_case = label.example_case;
    row.n2_case = label.n2_case;
    row.prediction = label.prediction.str();
    row.delta = label.delta;
    row.s_star = label.s_star;

    const SteadyProfile prof = integrate_profile(p, base.r_end, base.steady_opts);
    row.finite_exit = std::isfinite(prof.r_max());
    row.r_reached = row.finite_exit ? prof.r_max() : prof.coverage();
    if (!row.finite_exit) {
      const SInftyEstimate est = estimate_s_infty(prof);
      row.s_infty = est.value;
      row.uncertainty = est.uncertainty;
      row.r_detect = est.tail.r_detect;
      row.tail_sign = est.tail.sign;
    } else {
      row.s_infty = prof.exit_side() == 0 ? 0.0 : 1.0;
      row.uncertainty = prof.delta_exit();
      const TailScan ts = scan_tail(prof);
      row.r_detect = ts.r_detect;
      row.tail_sign = ts.sign;
    }
    row.pred_ok = label.prediction.contains(row.s_infty, 1e-4);
    row.tail_ok = std::isfinite(row.r_detect) && row.r_detect <= 1e3 * p.r0;
    row.ok = row.pred_ok && row.tail_ok;
  } catch (const std::exception& e) {
    row.error = e.what();
    row.ok = false;
  }
  return row;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& base, const TomlDocument& doc, int threads) {
  const auto axis = [&doc](const std::string& key, double base_val,
                           bool available) -> std::vector<double> {
    if (!doc.has("sweep", key)) return {base_val};
    if (!available)
      throw InvalidInput(doc.origin() + ": [sweep]." + key +
                         " requires a two-term law in [flow]");
    const std::vector<double> vals = doc.number_list("sweep", key);
    if (vals.empty()) throw InvalidInput(doc.origin() + ": [sweep]." + key + " is empty");
    return vals;
  };
  const bool tt1 = base.flow.g1.is_two_term();
  const bool tt2 = base.flow.g2.is_two_term();
  const std::vector<double> c1s = axis("c1", base.flow.c1, true);
  const std::vector<double> c2s = axis("c2", base.flow.c2, true);
  const std::vector<double> s0s = axis("s0", base.flow.s0, true);
  const std::vector<double> b1s = axis("g1_b", tt1 ? base.flow.g1.tt_b() : kNaN, tt1);
  const std::vector<double> b2s = axis("g2_b", tt2 ? base.flow.g2.tt_b() : kNaN, tt2);
  const bool set_b1 = doc.has("sweep", "g1_b");
  const bool set_b2 = doc.has("sweep", "g2_b");

  std::vector<Tuple> tuples;
  for (double c1 : c1s)
    for (double c2 : c2s)
      for (double s0 : s0s)
        for (double b1 : b1s)
          for (double b2 : b2s) tuples.push_back({c1, c2, s0, b1, b2});

  SweepResult result;
  result.rows.resize(tuples.size());
  const auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      result.rows[i] = sweep_one(base, tuples[i], set_b1, set_b2, i);
  };
  const std::size_t nthreads = static_cast<std::size_t>(std::max(1, threads));
  if (nthreads <= 1 || tuples.size() <= 1) {
    work(0, tuples.size());
  } else {
    const std::size_t chunk = (tuples.size() + nthreads - 1) / nthreads;
    std::vector<std::thread> pool;
    for (std::size_t lo = 0; lo < tuples.size(); lo += chunk)
      pool.emplace_back(work, lo, std::min(lo + chunk, tuples.size()));
    for (std::thread& th : pool) th.join();
  }
  for (const SweepRow& row : result.rows)
    if (!row.ok) ++result.failures;
  return result;
}

std::vector<std::string> sweep_csv_header() {
  return {"index",   "c1",          "c2",       "s0",        "g1_b",
          "g2_b",    "delta",       "s_star",   "s_infty",   "uncertainty",
          "r_detect", "tail_sign",  "r_reached", "finite_exit", "pred_ok",
          "tail_ok", "ok"};
}

std::vector<double> sweep_csv_row(const SweepRow& row) {
  return {static_cast<double>(row.index),
          row.c1,
          row.c2,
          row.s0,
          row.g1_b,
          row.g2_b,
          row.delta,
          row.s_star,
          row.s_infty,
          row.uncertainty,
          row.r_detect,
          static_cast<double>(row.tail_sign),
          row.r_reached,
          row.finite_exit ? 1.0 : 0.0,
          row.pred_ok ? 1.0 : 0.0,
          row.tail_ok ? 1.0 : 0.0,
          row.ok ? 1.0 : 0.0};
}

}  // namespace forch
