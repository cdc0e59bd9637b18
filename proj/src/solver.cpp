#include "forch/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace forch {

namespace {

constexpr double kTiny = 1e-300;

void require(bool cond, const char* msg) {
  if (!cond) throw InvalidInput(msg);
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double signed_max(const std::vector<double>& v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  return m;
}

// Derivative of a sampled profile on a nonuniform grid, second order
// everywhere (weighted central inside, one-sided 3-point at the ends).
std::vector<double> radial_derivative(const std::vector<double>& r,
                                      const std::vector<double>& u) {
  const std::size_t n = r.size();
  std::vector<double> du(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hm = r[i] - r[i - 1], hp = r[i + 1] - r[i], s = hm + hp;
    du[i] = -(hp / (hm * s)) * u[i - 1] + ((hp - hm) / (hp * hm)) * u[i] +
            (hm / (hp * s)) * u[i + 1];
  }
  {
    const double h1 = r[1] - r[0], h2 = r[2] - r[1];
    du[0] = -((2.0 * h1 + h2) / (h1 * (h1 + h2))) * u[0] + ((h1 + h2) / (h1 * h2)) * u[1] -
            (h1 / (h2 * (h1 + h2))) * u[2];
  }
  {
    const std::size_t k = n - 1;
    const double h1 = r[k] - r[k - 1], h2 = r[k - 1] - r[k - 2];
    du[k] = ((2.0 * h1 + h2) / (h1 * (h1 + h2))) * u[k] - ((h1 + h2) / (h1 * h2)) * u[k - 1] +
            (h1 / (h2 * (h1 + h2))) * u[k - 2];
  }
  return du;
}

// Tridiagonal solve, rows (sub, diag, sup); overwrites nothing, returns x.
std::vector<double> thomas_solve(const std::vector<double>& sub, const std::vector<double>& diag,
                                 const std::vector<double>& sup, const std::vector<double>& rhs,
                                 std::vector<double>& cp, std::vector<double>& dp) {
  const std::size_t n = diag.size();
  if (std::fabs(diag[0]) < kTiny) throw NumericError("tridiagonal solve: zero pivot", 0.0);
  cp[0] = sup[0] / diag[0];
  dp[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double m = diag[i] - sub[i] * cp[i - 1];
    if (std::fabs(m) < kTiny)
      throw NumericError("tridiagonal solve: zero pivot", static_cast<double>(i));
    cp[i] = sup[i] / m;
    dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / m;
  }
  std::vector<double> x(n);
  x[n - 1] = dp[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
  return x;
}

// The constant traced through the nonhomogeneous decay proof.
double envelope_constant_main(double q, double R, double eta0) {
  return 2.0 * (1.0 + q * R * R) * (1.0 + eta0) / eta0 + (1.0 + eta0);
}

}  // namespace

void GridSpec::validate() const {
  require(r_nodes.size() >= 3, "grid: at least 3 radial nodes required");
  require(std::isfinite(r_nodes.front()) && r_nodes.front() > 0.0,
          "grid: inner radius must be positive");
  for (std::size_t i = 1; i < r_nodes.size(); ++i)
    require(std::isfinite(r_nodes[i]) && r_nodes[i] > r_nodes[i - 1],
            "grid: radii must be strictly increasing");
  require(std::isfinite(dt) && dt > 0.0, "grid: dt must be positive");
  require(std::isfinite(t_final) && t_final >= dt * (1.0 - 1e-12),
          "grid: t_final must cover at least one step");
  require(n >= 1, "grid: dimension must be at least 1");
  require(!modes.empty(), "grid: at least one angular mode required");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    require(modes[i] >= 0, "grid: modes must be nonnegative");
    if (i > 0) require(modes[i] > modes[i - 1], "grid: modes must be strictly increasing");
    require(modes[i] == 0 || n == 2, "grid: nonzero modes are defined only in dimension 2");
  }
}

GridSpec GridSpec::uniform(int n, double r0, double r_out, std::size_t cells, double dt,
                           double t_final) {
  require(cells >= 2, "grid: at least 2 cells required");
  require(r_out > r0 && r0 > 0.0, "grid: need 0 < r0 < r_out");
  GridSpec g;
  g.n = n;
  g.dt = dt;
  g.t_final = t_final;
  g.r_nodes.resize(cells + 1);
  const double h = (r_out - r0) / static_cast<double>(cells);
  for (std::size_t i = 0; i <= cells; ++i) g.r_nodes[i] = r0 + h * static_cast<double>(i);
  g.r_nodes.back() = r_out;
  g.validate();
  return g;
}

GridSpec GridSpec::geometric(int n, double r0, double r_out, std::size_t cells, double dt,
                             double t_final) {
  require(cells >= 2, "grid: at least 2 cells required");
  require(r_out > r0 && r0 > 0.0, "grid: need 0 < r0 < r_out");
  GridSpec g;
  g.n = n;
  g.dt = dt;
  g.t_final = t_final;
  g.r_nodes.resize(cells + 1);
  const double step = std::log(r_out / r0) / static_cast<double>(cells);
  for (std::size_t i = 0; i <= cells; ++i)
    g.r_nodes[i] = r0 * std::exp(step * static_cast<double>(i));
  g.r_nodes.front() = r0;
  g.r_nodes.back() = r_out;
  g.validate();
  return g;
}

std::vector<double> ModeOperator::apply(const std::vector<double>& w) const {
  require(w.size() == diag.size(), "operator apply: size mismatch");
  const std::size_t n = w.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = sub[i] * w[i - 1] + diag[i] * w[i] + sup[i] * w[i + 1];
  return out;
}

ModeOperator assemble_mode_operator(const RadialCoefficients& field, const GridSpec& grid,
                                    int mode) {
  grid.validate();
  require(grid.n == field.dim(), "operator: grid and field dimensions differ");
  require(mode >= 0, "operator: mode must be nonnegative");
  require(mode == 0 || grid.n == 2, "operator: nonzero modes are defined only in dimension 2");
  const std::vector<double>& r = grid.r_nodes;
  require(r.front() >= field.r_begin() * (1.0 - 1e-12),
          "operator: grid starts before the coefficient field");
  require(r.back() <= field.r_end() * (1.0 + 1e-12),
          "operator: grid extends past the coefficient coverage");

  const std::size_t N = r.size();
  ModeOperator op;
  op.mode = mode;
  op.sub.assign(N, 0.0);
  op.diag.assign(N, 0.0);
  op.sup.assign(N, 0.0);
  const double nd = static_cast<double>(grid.n);
  const double mode_factor = static_cast<double>(mode) * (static_cast<double>(mode) + nd - 2.0);

  for (std::size_t i = 1; i + 1 < N; ++i) {
    const double hm = r[i] - r[i - 1], hp = r[i + 1] - r[i], s = hm + hp;
    const double r_minus = 0.5 * (r[i - 1] + r[i]);
    const double r_plus = 0.5 * (r[i] + r[i + 1]);
    const double vol = (std::pow(r_plus, nd) - std::pow(r_minus, nd)) / nd;
    const double Dm = std::pow(r_minus, nd - 1.0) / (field.phi_coeff(r_minus) * hm);
    const double Dp = std::pow(r_plus, nd - 1.0) / (field.phi_coeff(r_plus) * hp);

    double sub_i = -Dm / vol;
    double sup_i = -Dp / vol;
    double diag_i = (Dm + Dp) / vol;

    // Drift term -a dw/dr with a = lambda r / phi_coeff.
    const double a = field.lambda_drift(r[i]) * r[i] / field.phi_coeff(r[i]);
    const double central_sub = a * hp / (hm * s);
    const double central_sup = -a * hm / (hp * s);
    const double row_scale = -sub_i - sup_i + std::fabs(a) / std::min(hm, hp);
    if (sub_i + central_sub <= 1e-14 * row_scale && sup_i + central_sup <= 1e-14 * row_scale) {
      sub_i += central_sub;
      sup_i += central_sup;
      diag_i += -a * (hp - hm) / (hp * hm);
    } else {
      ++op.upwind_rows;
      if (a > 0.0) {  // -a (w_{i+1} - w_i)/hp
        sup_i += -a / hp;
        diag_i += a / hp;
      } else {  // -a (w_i - w_{i-1})/hm
        sub_i += a / hm;
        diag_i += -a / hm;
      }
    }
    if (mode_factor != 0.0) diag_i += mode_factor / (field.beta(r[i]) * r[i] * r[i]);

    op.sub[i] = sub_i;
    op.diag[i] = diag_i;
    op.sup[i] = sup_i;
    const double scale = std::fabs(sub_i) + std::fabs(diag_i) + std::fabs(sup_i);
    op.worst_offdiag = std::max(op.worst_offdiag, std::max(sub_i, sup_i));
    if (sub_i > 1e-13 * scale || sup_i > 1e-13 * scale ||
        diag_i < -(sub_i + sup_i) - 1e-12 * scale)
      op.m_matrix = false;
  }
  return op;
}

ModeProblem zero_problem() {
  ModeProblem p;
  p.w0 = [](double) { return 0.0; };
  p.g_inner = [](double) { return 0.0; };
  p.g_outer = [](double) { return 0.0; };
  p.f0 = [](double, double) { return 0.0; };
  return p;
}

std::size_t GridField::mode_index(int m) const {
  for (std::size_t i = 0; i < grid.modes.size(); ++i)
    if (grid.modes[i] == m) return i;
  throw InvalidInput("run does not contain the requested mode");
}

double GridField::sup_abs_at(std::size_t mi, std::size_t k) const {
  return sup_abs(w.at(mi).at(k));
}

double GridField::interp_w(std::size_t mi, std::size_t k, double r) const {
  return interp_linear(grid.r_nodes, w.at(mi).at(k), r);
}

GridField solve_ibvp(std::shared_ptr<const RadialCoefficients> field, const GridSpec& grid,
                     const std::vector<ModeProblem>& problems) {
  require(field != nullptr, "solve: coefficient field is null");
  grid.validate();
  require(problems.size() == grid.modes.size(),
          "solve: one ModeProblem required per angular mode");
  for (const ModeProblem& p : problems)
    require(p.w0 && p.g_inner && p.g_outer && p.f0, "solve: ModeProblem has empty callbacks");

  const std::vector<double>& r = grid.r_nodes;
  const std::size_t N = r.size();
  const std::size_t steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(grid.t_final / grid.dt - 1e-9)));

  GridField run;
  run.grid = grid;
  run.field = field;
  run.times.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) run.times[k] = grid.dt * static_cast<double>(k);

  const std::size_t M = grid.modes.size();
  run.w.assign(M, {});
  run.f0_samples.assign(M, {});
  run.g_inner_samples.assign(M, std::vector<double>(steps + 1));
  run.g_outer_samples.assign(M, std::vector<double>(steps + 1));

  std::vector<double> cp(N), dp(N), sub(N), diag(N), sup(N), rhs(N);

  for (std::size_t mi = 0; mi < M; ++mi) {
    const ModeOperator op = assemble_mode_operator(*field, grid, grid.modes[mi]);
    const ModeProblem& prob = problems[mi];

    auto& wm = run.w[mi];
    auto& fm = run.f0_samples[mi];
    wm.assign(steps + 1, std::vector<double>(N));
    fm.assign(steps + 1, std::vector<double>(N));
    for (std::size_t k = 0; k <= steps; ++k) {
      run.g_inner_samples[mi][k] = prob.g_inner(run.times[k]);
      run.g_outer_samples[mi][k] = prob.g_outer(run.times[k]);
      for (std::size_t i = 0; i < N; ++i) fm[k][i] = prob.f0(r[i], run.times[k]);
    }
    for (std::size_t i = 0; i < N; ++i) wm[0][i] = prob.w0(r[i]);

    run.sup_w0 = std::max(run.sup_w0, sup_abs(wm[0]));
    run.sup_boundary = std::max(run.sup_boundary, std::max(sup_abs(run.g_inner_samples[mi]),
                                                           sup_abs(run.g_outer_samples[mi])));
    double f_sup = 0.0;
    bool forcing_free = true;
    for (const auto& row : fm) {
      f_sup = std::max(f_sup, sup_abs(row));
      for (double v : row) forcing_free = forcing_free && v == 0.0;
    }
    run.sup_f0 = std::max(run.sup_f0, f_sup);

    const double comp_scale = std::max(1.0, sup_abs(wm[0]));
    const double gap = std::max(std::fabs(wm[0].front() - run.g_inner_samples[mi][0]),
                                std::fabs(wm[0].back() - run.g_outer_samples[mi][0]));
    run.compatibility_gap = std::max(run.compatibility_gap, gap);
    if (gap > 1e-9 * comp_scale) run.compatibility_ok = false;

    // Backward Euler rows of I + dt L; boundary rows pin the Dirichlet data.
    for (std::size_t i = 0; i < N; ++i) {
      sub[i] = grid.dt * op.sub[i];
      diag[i] = 1.0 + grid.dt * op.diag[i];
      sup[i] = grid.dt * op.sup[i];
    }
    sub[0] = sup[0] = sub[N - 1] = sup[N - 1] = 0.0;
    diag[0] = diag[N - 1] = 1.0;

    for (std::size_t k = 0; k < steps; ++k) {
      for (std::size_t i = 1; i + 1 < N; ++i) rhs[i] = wm[k][i] + grid.dt * fm[k + 1][i];
      rhs[0] = run.g_inner_samples[mi][k + 1];
      rhs[N - 1] = run.g_outer_samples[mi][k + 1];
      wm[k + 1] = thomas_solve(sub, diag, sup, rhs, cp, dp);

      double resid = 0.0, rhs_sup = sup_abs(rhs);
      for (std::size_t i = 1; i + 1 < N; ++i) {
        const double mv = sub[i] * wm[k + 1][i - 1] + diag[i] * wm[k + 1][i] +
                          sup[i] * wm[k + 1][i + 1];
        resid = std::max(resid, std::fabs(mv - rhs[i]));
      }
      run.solve_residual = std::max(run.solve_residual, resid / std::max(1.0, rhs_sup));

      if (forcing_free) {
        const double allowed =
            std::max(sup_abs(wm[k]), std::max(std::fabs(rhs[0]), std::fabs(rhs[N - 1])));
        const double got = sup_abs(wm[k + 1]);
        const double excess = got - allowed * (1.0 + 1e-9) - kTiny;
        if (excess > 0.0) {
          run.discrete_max_principle_ok = false;
          run.discrete_mp_excess = std::max(run.discrete_mp_excess, excess);
        }
      }
    }
  }
  return run;
}

Reconstruction reconstruct(const GridField& run, const CoefficientField& field,
                           const std::function<double(double)>& nu) {
  require(static_cast<bool>(nu), "reconstruct: nu callback is empty");
  const std::size_t mi = run.mode_index(0);
  const std::vector<double>& r = run.grid.r_nodes;
  const std::size_t N = r.size();
  const double nd = static_cast<double>(field.dim());

  std::vector<double> eLam(N), phi(N);
  for (std::size_t i = 0; i < N; ++i) {
    eLam[i] = std::exp(field.gauge_Lambda(r[i]));
    phi[i] = field.phi_coeff(r[i]);
  }

  Reconstruction rec;
  rec.r = r;
  rec.times = run.times;
  const std::size_t K = run.times.size();
  rec.sigma.assign(K, std::vector<double>(N));
  rec.v1.assign(K, std::vector<double>(N));
  rec.v2.assign(K, std::vector<double>(N));
  for (std::size_t k = 0; k < K; ++k) {
    const double nu_k = nu(run.times[k]);
    const std::vector<double> wr = radial_derivative(r, run.w[mi][k]);
    for (std::size_t i = 0; i < N; ++i) {
      rec.sigma[k][i] = eLam[i] * run.w[mi][k][i];
      const double v2 = (eLam[i] * wr[i] + field.c_forcing_radial(r[i], nu_k)) / phi[i];
      rec.v2[k][i] = v2;
      rec.v1[k][i] = nu_k * std::pow(r[i], 1.0 - nd) - v2;
    }
  }
  return rec;
}

DecayReport measure_decay(const GridField& run, const BarrierSpec& growth) {
  require(growth.family == BarrierFamily::growth_time,
          "measure_decay: a growth_time barrier is required");
  const std::size_t mi = run.mode_index(0);
  const std::size_t K = run.times.size();

  DecayReport rep;
  rep.t = run.times;
  rep.eta0 = growth.eta0;
  rep.eta1 = growth.eta1;
  rep.q = growth.q;
  rep.R = growth.R;
  rep.sup_w0 = run.sup_abs_at(mi, 0);
  rep.envelope_constant = envelope_constant_main(growth.q, growth.R, growth.eta0);

  double f_sup = 0.0;
  for (const auto& row : run.f0_samples[mi]) f_sup = std::max(f_sup, sup_abs(row));
  const double g_sup =
      std::max(sup_abs(run.g_inner_samples[mi]), sup_abs(run.g_outer_samples[mi]));
  rep.delta0 = f_sup + g_sup;

  rep.sup_w.resize(K);
  rep.envelope_ok.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    rep.sup_w[k] = run.sup_abs_at(mi, k);
    const double damp = std::exp(-rep.eta1 * run.times[k]) * rep.sup_w0;
    const double rhs = rep.delta0 == 0.0
                           ? (1.0 + rep.eta0) * damp
                           : rep.envelope_constant * (damp + rep.delta0);
    const bool ok = rep.sup_w[k] <= rhs * (1.0 + 1e-9) + kTiny;
    rep.envelope_ok[k] = ok;
    rep.envelope_all_ok = rep.envelope_all_ok && ok;
    rep.worst_margin = std::min(rep.worst_margin, rhs - rep.sup_w[k]);
  }

  // Trailing-half decay rate by least squares on log sup.
  std::vector<double> ts, ls;
  for (std::size_t k = K / 2; k < K; ++k)
    if (rep.sup_w[k] > 1e-280) {
      ts.push_back(run.times[k]);
      ls.push_back(std::log(rep.sup_w[k]));
    }
  if (ts.size() < 3) {
    rep.fitted_rate = kInf;  // fully decayed within the window
    rep.rate_ok = true;
  } else {
    double mt = 0.0, ml = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      mt += ts[i];
      ml += ls[i];
    }
    mt /= static_cast<double>(ts.size());
    ml /= static_cast<double>(ts.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      num += (ts[i] - mt) * (ls[i] - ml);
      den += (ts[i] - mt) * (ts[i] - mt);
    }
    rep.fitted_rate = den > 0.0 ? -num / den : kNaN;
    rep.rate_ok = std::isfinite(rep.fitted_rate) && rep.fitted_rate >= rep.eta1 * (1.0 - 1e-6);
  }

  // Single-cycle contraction of the positive part: valid for forcing-free
  // runs with nonpositive boundary data.
  bool forcing_free = f_sup == 0.0;
  bool boundary_nonpos = true;
  for (double v : run.g_inner_samples[mi]) boundary_nonpos = boundary_nonpos && v <= kTiny;
  for (double v : run.g_outer_samples[mi]) boundary_nonpos = boundary_nonpos && v <= kTiny;
  const double t_cycle = growth.q * growth.R * growth.R;
  if (forcing_free && boundary_nonpos && run.times.back() >= t_cycle * (1.0 - 1e-12)) {
    rep.contraction_applicable = true;
    std::size_t kc = K - 1;
    for (std::size_t k = 0; k < K; ++k)
      if (run.times[k] >= t_cycle * (1.0 - 1e-12)) {
        kc = k;
        break;
      }
    rep.contraction_lhs = std::max(0.0, signed_max(run.w[mi][kc]));
    rep.contraction_rhs = std::max(0.0, signed_max(run.w[mi][0])) / (1.0 + rep.eta0);
    rep.contraction_ok = rep.contraction_lhs <= rep.contraction_rhs * (1.0 + 1e-9) + kTiny;
  }
  return rep;
}

LimsupReport limsup_check(const GridField& run, const BarrierSpec& growth,
                          double window_start) {
  require(growth.family == BarrierFamily::growth_time,
          "limsup_check: a growth_time barrier is required");
  const std::size_t mi = run.mode_index(0);
  const std::size_t K = run.times.size();
  require(window_start >= 0.0 && window_start < run.times.back(),
          "limsup_check: window must start inside the run");
  std::size_t k0 = 0;
  while (k0 + 1 < K && run.times[k0] < window_start) ++k0;

  LimsupReport rep;
  rep.window_start = run.times[k0];
  double tail_f = 0.0, tail_g = 0.0;
  for (std::size_t k = k0; k < K; ++k) {
    tail_f = std::max(tail_f, sup_abs(run.f0_samples[mi][k]));
    tail_g = std::max(tail_g, std::max(std::fabs(run.g_inner_samples[mi][k]),
                                       std::fabs(run.g_outer_samples[mi][k])));
  }
  rep.delta2 = tail_f + tail_g;
  rep.tail_sup = run.sup_abs_at(mi, K - 1);  // plateau proxy: the final step
  const double c_main = envelope_constant_main(growth.q, growth.R, growth.eta0);
  rep.bound = c_main * (std::exp(-growth.eta1 * (run.times.back() - rep.window_start)) *
                            run.sup_abs_at(mi, k0) +
                        rep.delta2);
  rep.ok = rep.tail_sup <= rep.bound * (1.0 + 1e-9) + kTiny;
  return rep;
}

MaxPrincipleReport max_principle_check(const GridField& run) {
  const std::size_t mi = run.mode_index(0);
  const std::size_t K = run.times.size();
  const double T = run.times.back();

  MaxPrincipleReport rep;
  for (std::size_t k = 0; k < K; ++k)
    rep.sup_interior = std::max(rep.sup_interior, run.sup_abs_at(mi, k));
  rep.sup_parabolic =
      std::max(run.sup_abs_at(mi, 0), std::max(sup_abs(run.g_inner_samples[mi]),
                                               sup_abs(run.g_outer_samples[mi])));
  double f_sup = 0.0;
  for (const auto& row : run.f0_samples[mi]) f_sup = std::max(f_sup, sup_abs(row));
  rep.sup_f0 = f_sup;
  rep.delta8 = rep.sup_parabolic;
  rep.bound = rep.sup_parabolic + (T + 1.0) * rep.sup_f0;
  rep.slack = 1e-6 * std::max(1.0, rep.bound);
  rep.ok = rep.sup_interior <= rep.bound + rep.slack;

  rep.pointwise_ok = true;
  for (std::size_t k = 0; k < K; ++k) {
    const double lhs = run.sup_abs_at(mi, k);
    const double rhs = rep.delta8 + rep.sup_f0 * (run.times[k] + 1.0);
    rep.worst_excess = std::max(rep.worst_excess, lhs - rhs);
    if (lhs > rhs + rep.slack) rep.pointwise_ok = false;
  }
  return rep;
}

ShellSequence shell_sup_sequence(const GridField& run, double r_shell) {
  require(std::isfinite(r_shell) && r_shell > 0.0, "shell sequence: width must be positive");
  const std::size_t mi = run.mode_index(0);
  const double r0 = run.grid.r_nodes.front();
  const double r_back = run.grid.r_nodes.back();

  ShellSequence seq;
  seq.r_shell = r_shell;
  seq.T = run.times.back();
  for (std::size_t i = 0;; ++i) {
    const double ri = r0 + r_shell * static_cast<double>(i);
    if (ri > r_back * (1.0 + 1e-12)) break;
    double m = -kInf;
    for (std::size_t k = 0; k < run.times.size(); ++k)
      m = std::max(m, run.interp_w(mi, k, std::min(ri, r_back)));
    seq.mbar.push_back(std::max(0.0, m));
  }
  require(seq.mbar.size() >= 3, "shell sequence: domain holds fewer than 3 spheres");
  return seq;
}

std::vector<ShellComparison> shell_comparison_check(const GridField& run, double r_shell,
                                                    double eta0,
                                                    const std::vector<double>& centers) {
  require(std::isfinite(r_shell) && r_shell > 0.0, "shell comparison: width must be positive");
  require(eta0 >= 0.0, "shell comparison: eta0 must be nonnegative");
  const std::size_t mi = run.mode_index(0);
  const std::vector<double>& r = run.grid.r_nodes;

  std::vector<ShellComparison> out;
  out.reserve(centers.size());
  for (double ell : centers) {
    require(ell - r_shell >= r.front() * (1.0 - 1e-12) &&
                ell + r_shell <= r.back() * (1.0 + 1e-12),
            "shell comparison: shell leaves the computational domain");
    ShellComparison c;
    c.ell = ell;
    double big = -kInf, small = -kInf;
    for (std::size_t k = 0; k < run.times.size(); ++k) {
      for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i] >= ell - r_shell && r[i] <= ell + r_shell)
          big = std::max(big, run.w[mi][k][i]);
      const double at_ell = run.interp_w(mi, k, ell);
      big = std::max(big, at_ell);
      small = std::max(small, at_ell);
    }
    c.big_m = std::max(0.0, big);
    c.small_m = std::max(0.0, small);
    c.ok = c.big_m * (1.0 + 1e-12) + kTiny >= (1.0 + eta0) * c.small_m;
    out.push_back(c);
  }
  return out;
}

DichotomyVerdict dichotomy_check(const ShellSequence& seq, double eta0, std::size_t k_start) {
  require(eta0 >= 0.0, "dichotomy: eta0 must be nonnegative");
  const std::vector<double>& m = seq.mbar;
  require(m.size() >= 3 && k_start + 2 < m.size(),
          "dichotomy: need at least 3 spheres past k_start");

  DichotomyVerdict v;
  v.eta0 = eta0;
  v.k_start = k_start;
  v.triple_case.assign(m.size(), 0);
  for (std::size_t i = std::max<std::size_t>(1, k_start + 1); i + 1 < m.size(); ++i) {
    const double side = std::max(m[i - 1], m[i + 1]);
    if ((1.0 + eta0) * m[i] > side * (1.0 + 1e-9) + kTiny) v.part_a_ok = false;
    if (m[i - 1] == 0.0 && m[i] == 0.0 && m[i + 1] == 0.0)
      v.triple_case[i] = 0;
    else
      v.triple_case[i] = m[i + 1] >= m[i - 1] ? +1 : -1;
  }

  v.decay_branch = true;
  for (std::size_t j = 1; k_start + j < m.size(); ++j) {
    const double bound = m[k_start] * std::pow(1.0 + eta0, -static_cast<double>(j));
    if (m[k_start + j] > bound * (1.0 + 1e-9) + kTiny) {
      v.decay_branch = false;
      break;
    }
  }
  for (std::size_t i0 = k_start; i0 + 1 < m.size() && !v.growth_branch; ++i0) {
    if (m[i0] <= 0.0) continue;
    bool grows = true;
    for (std::size_t i = i0; i + 1 < m.size(); ++i)
      if (m[i + 1] < (1.0 + eta0) * m[i] * (1.0 - 1e-9) - kTiny) {
        grows = false;
        break;
      }
    v.growth_branch = grows;
  }
  if (v.decay_branch)
    v.verdict = "decay";
  else if (v.growth_branch)
    v.verdict = "growth";
  else
    v.verdict = "inconclusive";
  return v;
}

SpatialDecayReport spatial_decay_report(const GridField& run, double threshold) {
  require(std::isfinite(threshold) && threshold > 0.0,
          "spatial decay: threshold must be positive");
  const std::size_t mi = run.mode_index(0);
  const std::vector<double>& r = run.grid.r_nodes;
  const std::size_t N = r.size();
  const std::size_t K = run.times.size();

  SpatialDecayReport rep;
  rep.threshold = threshold;
  rep.radii = r;
  rep.sphere_sup.assign(N, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < N; ++i)
      rep.sphere_sup[i] = std::max(rep.sphere_sup[i], std::fabs(run.w[mi][k][i]));

  // Stay clear of the last 10% of the domain: the truncation boundary pins w
  // to the prescribed data there, which must not masquerade as decay.
  const double cut = 0.9 * r.back();
  std::vector<double> tail(N);
  double running = 0.0;
  for (std::size_t i = N; i-- > 0;) {
    running = std::max(running, rep.sphere_sup[i]);
    tail[i] = running;
  }
  for (std::size_t i = 0; i < N; ++i)
    if (r[i] <= cut && tail[i] < threshold) {
      rep.resolved = true;
      rep.resolve_radius = r[i];
      break;
    }

  // Escape-curve knots: r_k is the smallest usable radius whose tail over
  // [0, k] stays below 1/k; the curve passes through (k, r_{k+1}).
  const std::size_t Kint = static_cast<std::size_t>(std::floor(run.times.back() + 1e-9));
  bool curve_complete = Kint >= 1;
  std::vector<double> rk(Kint + 1, kNaN);
  for (std::size_t kk = 1; kk <= Kint && curve_complete; ++kk) {
    std::size_t k_idx = 0;
    for (std::size_t k = 0; k < K; ++k)
      if (run.times[k] <= static_cast<double>(kk) + 1e-12) k_idx = k;
    std::vector<double> tail_k(N, 0.0);
    double acc = 0.0;
    for (std::size_t i = N; i-- > 0;) {
      double col = 0.0;
      for (std::size_t k = 0; k <= k_idx; ++k)
        col = std::max(col, std::fabs(run.w[mi][k][i]));
      acc = std::max(acc, col);
      tail_k[i] = acc;
    }
    bool found = false;
    for (std::size_t i = 0; i < N; ++i)
      if (r[i] <= cut && tail_k[i] < 1.0 / static_cast<double>(kk)) {
        rk[kk] = r[i];
        found = true;
        break;
      }
    curve_complete = found;
  }
  if (curve_complete) {
    for (std::size_t kk = 0; kk + 1 <= Kint; ++kk) {
      rep.curve_t.push_back(static_cast<double>(kk));
      rep.curve_r.push_back(rk[kk + 1]);
    }
    if (Kint >= 2) {
      rep.curve_ok = true;
      for (std::size_t k = 0; k < K; ++k) {
        const double t = run.times[k];
        if (t < 1.0 - 1e-12 || t > static_cast<double>(Kint - 1) + 1e-12) continue;
        const int fl = std::max(1, static_cast<int>(std::floor(t + 1e-12)));
        const double rt = interp_linear(rep.curve_t, rep.curve_r, t);
        double lhs = std::fabs(run.interp_w(mi, k, rt));
        for (std::size_t i = 0; i < N; ++i)
          if (r[i] >= rt) lhs = std::max(lhs, std::fabs(run.w[mi][k][i]));
        if (!(lhs < (1.0 / fl) * (1.0 + 1e-9) + kTiny)) {
          rep.curve_ok = false;
          break;
        }
      }
    }
  }
  rep.verdict = rep.resolved ? "resolved" : "inconclusive";
  return rep;
}

DataBounds measure_data_bounds(const GridField& run, double tail_window_start) {
  const std::size_t mi = run.mode_index(0);
  const std::size_t K = run.times.size();
  require(tail_window_start >= 0.0 && tail_window_start <= run.times.back(),
          "data bounds: tail window must start inside the run");
  std::size_t k0 = 0;
  while (k0 + 1 < K && run.times[k0] < tail_window_start) ++k0;

  DataBounds b;
  b.window_start = run.times[k0];
  double f_sup = 0.0, g_sup = 0.0, tail_f = 0.0, tail_g = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double fr = sup_abs(run.f0_samples[mi][k]);
    const double gr = std::max(std::fabs(run.g_inner_samples[mi][k]),
                               std::fabs(run.g_outer_samples[mi][k]));
    f_sup = std::max(f_sup, fr);
    g_sup = std::max(g_sup, gr);
    if (k >= k0) {
      tail_f = std::max(tail_f, fr);
      tail_g = std::max(tail_g, gr);
    }
  }
  const double w0_sup = run.sup_abs_at(mi, 0);
  b.delta0 = f_sup + g_sup;
  b.delta2 = tail_f + tail_g;
  b.delta8 = std::max(w0_sup, g_sup);
  b.delta9 = f_sup;

  double df_sup = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    df_sup = std::max(df_sup, sup_abs(radial_derivative(run.grid.r_nodes,
                                                        run.f0_samples[mi][k])));
  b.delta4 = df_sup;

  char tag[160];
  std::snprintf(tag, sizeof tag, "annulus [%g, %g] x [0, %g]", run.grid.r_nodes.front(),
                run.grid.r_nodes.back(), run.times.back());
  b.domain_tag = tag;
  return b;
}

void add_sigma_bounds(DataBounds& b, const GridField& run, const CoefficientField& field,
                      const std::function<double(double)>& nu) {
  require(static_cast<bool>(nu), "data bounds: nu callback is empty");
  const std::size_t mi = run.mode_index(0);
  const std::vector<double>& r = run.grid.r_nodes;
  const std::size_t N = r.size();
  const std::size_t K = run.times.size();
  const double nd = static_cast<double>(field.dim());
  const double r0 = r.front();

  // Magnitudes of the radial velocity family V = nu r^(1-n) e_r:
  // |V| = |nu| r^(1-n), |grad V|_F = |nu| sqrt(n^2-n) r^(-n),
  // |grad^2 V|_F = |nu| sqrt((n^2-n)^2 + 3(n-1)n^2) r^(-n-1); all are
  // decreasing in r, so the suprema sit at the inner radius.
  const double c1n = std::sqrt(nd * nd - nd);
  const double c2n = std::sqrt((nd * nd - nd) * (nd * nd - nd) + 3.0 * (nd - 1.0) * nd * nd);

  std::size_t k0 = 0;
  while (k0 + 1 < K && run.times[k0] < b.window_start) ++k0;
  double nu_sup = 0.0, nu_tail = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double a = std::fabs(nu(run.times[k]));
    nu_sup = std::max(nu_sup, a);
    if (k >= k0) nu_tail = std::max(nu_tail, a);
  }

  std::vector<double> eLam(N);
  for (std::size_t i = 0; i < N; ++i) eLam[i] = std::exp(field.gauge_Lambda(r[i]));
  const double eLam_out = eLam.back();

  double g_sigma = 0.0, g_sigma_tail = 0.0, g_w = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double gi = std::fabs(run.g_inner_samples[mi][k]);  // gauge is 0 at r0
    const double go = std::fabs(run.g_outer_samples[mi][k]);
    g_sigma = std::max(g_sigma, std::max(gi, eLam_out * go));
    g_w = std::max(g_w, std::max(gi, go));
    if (k >= k0) g_sigma_tail = std::max(g_sigma_tail, std::max(gi, eLam_out * go));
  }

  double sigma0_sup = 0.0, div_ac_sup = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    sigma0_sup = std::max(sigma0_sup, eLam[i] * std::fabs(run.w[mi][0][i]));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < N; ++i)
      div_ac_sup = std::max(div_ac_sup, eLam[i] * std::fabs(run.f0_samples[mi][k][i]));

  const double v_pack1 = std::pow(r0, 1.0 - nd) + c1n * std::pow(r0, -nd);
  b.delta3 = nu_sup * v_pack1 + g_sigma;
  b.delta3_prime = nu_tail * v_pack1 + g_sigma_tail;
  b.delta6 = nu_sup * (v_pack1 + c2n * std::pow(r0, -nd - 1.0));
  b.delta7 = g_sigma;
  b.delta10 = std::max(sigma0_sup, g_sigma);
  b.delta11 = div_ac_sup;
  b.delta12 = std::max(run.sup_abs_at(mi, 0), g_sigma);
  b.delta13 = b.delta9;  // e^-Lambda div(A c) is exactly the w-level forcing
}

SigmaEnvelopeReport sigma_envelope_check(const GridField& run, const CoefficientField& field,
                                         const BarrierSpec& growth, double delta3) {
  require(growth.family == BarrierFamily::growth_time,
          "sigma envelope: a growth_time barrier is required");
  const std::size_t mi = run.mode_index(0);
  const std::vector<double>& r = run.grid.r_nodes;
  const std::size_t N = r.size();
  const std::size_t K = run.times.size();

  SigmaEnvelopeReport rep;
  std::vector<double> Lam(N);
  rep.gauge_min = kInf;
  rep.gauge_max = -kInf;
  for (std::size_t i = 0; i < N; ++i) {
    Lam[i] = field.gauge_Lambda(r[i]);
    rep.gauge_min = std::min(rep.gauge_min, Lam[i]);
    rep.gauge_max = std::max(rep.gauge_max, Lam[i]);
  }
  const double range = std::exp(rep.gauge_max - rep.gauge_min);
  const double c_main = envelope_constant_main(growth.q, growth.R, growth.eta0);
  rep.c_sigma = range * c_main;

  double sigma0_sup = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    sigma0_sup = std::max(sigma0_sup, std::exp(Lam[i]) * std::fabs(run.w[mi][0][i]));
  double f_sup = 0.0;
  for (const auto& row : run.f0_samples[mi]) f_sup = std::max(f_sup, sup_abs(row));
  const double delta0_w =
      f_sup + std::max(sup_abs(run.g_inner_samples[mi]), sup_abs(run.g_outer_samples[mi]));

  rep.ok.resize(K);
  rep.all_ok = true;
  for (std::size_t k = 0; k < K; ++k) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      lhs = std::max(lhs, std::exp(Lam[i]) * std::fabs(run.w[mi][k][i]));
    const double damp = std::exp(-growth.eta1 * run.times[k]) * sigma0_sup;
    const double rhs = std::isnan(delta3)
                           ? rep.c_sigma * damp + std::exp(rep.gauge_max) * c_main * delta0_w
                           : rep.c_sigma * (damp + delta3);
    const bool ok = lhs <= rhs * (1.0 + 1e-9) + kTiny;
    rep.ok[k] = ok;
    rep.all_ok = rep.all_ok && ok;
    rep.worst_margin = std::min(rep.worst_margin, rhs - lhs);
  }
  return rep;
}

}  // namespace forch
