#include "forch/steady.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace forch {

namespace {

// Flux rhs with S clamped to [0,1]; the derived mobilities F_i extend
// continuously by zero, so trial stages slightly past a threshold are safe.
double flux_rhs(const FlowParams& p, double r, double S) {
  const double s = std::clamp(S, 0.0, 1.0);
  const double pw = std::pow(r, 1.0 - p.n);
  const double u1 = p.c1 * pw, u2 = p.c2 * pw;
  return big_g(p.g2, u2) * p.model.F(2, s) - big_g(p.g1, u1) * p.model.F(1, s);
}

}  // namespace

void FlowParams::validate() const {
  if (n < 2) throw InvalidInput("FlowParams: dimension n must be >= 2");
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw InvalidInput("FlowParams: r0 must be positive");
  if (!std::isfinite(c1) || !std::isfinite(c2)) throw InvalidInput("FlowParams: c_i must be finite");
  if (c1 == 0.0 && c2 == 0.0) throw InvalidInput("FlowParams: c1 and c2 cannot both vanish");
  if (!(s0 > 0.0 && s0 < 1.0)) throw InvalidInput("FlowParams: s0 must lie in (0,1)");
}

double steady_rhs(const FlowParams& p, double r, double S) {
  if (!(r > 0.0)) throw InvalidInput("steady_rhs: r must be positive");
  if (!(S > 0.0 && S < 1.0)) throw InvalidInput("steady_rhs: S must lie in (0,1)");
  return flux_rhs(p, r, S);
}

double SteadyProfile::to_var(double r) const { return log_ ? std::log(r) : r; }

double SteadyProfile::operator()(double r) const {
  const double slack = 1e-9 * std::max(1.0, coverage_);
  if (!(r >= params_.r0 - slack && r <= coverage_ + slack))
    throw InvalidInput("SteadyProfile: radius outside [r0, coverage]");
  const double x = to_var(std::clamp(r, params_.r0, coverage_));
  return sol_.eval(x);
}

double SteadyProfile::deriv(double r) const {
  const double slack = 1e-9 * std::max(1.0, coverage_);
  if (!(r >= params_.r0 - slack && r <= coverage_ + slack))
    throw InvalidInput("SteadyProfile: radius outside [r0, coverage]");
  const double rc = std::clamp(r, params_.r0, coverage_);
  const double d = sol_.deriv(to_var(rc));
  return log_ ? d / rc : d;
}

SteadyProfile integrate_profile(const FlowParams& p, double r_end, const IntegrateOptions& opt) {
  p.validate();
  if (!(r_end > p.r0)) throw InvalidInput("integrate_profile: r_end must exceed r0");
  if (!(opt.delta_exit > 0.0 && opt.delta_exit < 0.5))
    throw InvalidInput("integrate_profile: delta_exit must lie in (0, 0.5)");
  const double lo = opt.delta_exit, hi = 1.0 - opt.delta_exit;
  if (!(p.s0 > lo && p.s0 < hi))
    throw InvalidInput("integrate_profile: s0 must start strictly inside the exit thresholds");

  const bool logv = r_end / p.r0 > 100.0;
  const ScalarRhs rhs = [&p, logv](double x, double y) {
    const double r = logv ? std::exp(x) : x;
    return (logv ? r : 1.0) * flux_rhs(p, r, y);
  };
  const double x0 = logv ? std::log(p.r0) : p.r0;
  const double x1 = logv ? std::log(r_end) : r_end;

  Rk45Options ro;
  ro.rtol = opt.rtol;
  ro.atol = opt.atol;
  ro.max_steps = opt.max_steps;
  ro.h_max = (x1 - x0) / 16.0;  // keeps enough knots for tail diagnostics

  const auto stop = [lo, hi](const DenseStep& st, double y1) {
    if (y1 <= lo || y1 >= hi) return true;
    for (double th : {0.25, 0.5, 0.75})
      if (const double v = st.eval(st.x0 + th * st.h); v <= lo || v >= hi) return true;
    return false;
  };

  SteadyProfile prof;
  prof.params_ = p;
  prof.log_ = logv;
  prof.delta_exit_ = opt.delta_exit;
  prof.sol_ = rk45_integrate(rhs, x0, x1, p.s0, ro, stop);

  const double y_last = prof.sol_.values().back();
  const bool crossed =
      !prof.sol_.steps().empty() && stop(prof.sol_.steps().back(), y_last);
  if (!crossed) {
    prof.coverage_ = r_end;
  } else {
    // Locate the earliest threshold crossing inside the final step.
    const DenseStep& st = prof.sol_.steps().back();
    double a = st.x0, b = st.x0 + st.h;
    const int kScan = 64;
    for (int i = 1; i <= kScan; ++i) {
      const double x = st.x0 + st.h * i / kScan;
      const double v = st.eval(x);
      if (v <= lo || v >= hi) {
        b = x;
        break;
      }
      a = x;
    }
    const double vb = st.eval(b);
    const int side = vb <= lo ? 0 : 1;
    const double th = side == 0 ? lo : hi;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::fabs(b)); ++it) {
      const double m = 0.5 * (a + b);
      const bool out = side == 0 ? st.eval(m) <= th : st.eval(m) >= th;
      (out ? b : a) = m;
    }
    const double xc = 0.5 * (a + b);
    prof.r_max_ = logv ? std::exp(xc) : xc;
    prof.exit_side_ = side;
    prof.coverage_ = prof.r_max_;
  }

  const double x_cov = prof.to_var(prof.coverage_);
  const double x_slack = 1e-14 * std::max(1.0, std::fabs(x_cov));
  for (std::size_t i = 0; i < prof.sol_.knots().size(); ++i) {
    const double x = prof.sol_.knots()[i];
    if (x > x_cov + x_slack) break;
    prof.knots_.push_back(logv ? std::exp(x) : x);
    prof.vals_.push_back(prof.sol_.values()[i]);
  }
  if (prof.knots_.empty() ||
      prof.knots_.back() < prof.coverage_ - 1e-14 * std::max(1.0, prof.coverage_)) {
    prof.knots_.push_back(prof.coverage_);
    prof.vals_.push_back(prof.sol_.eval(x_cov));
  }
  return prof;
}

double delta_discriminant(const GeneralizedPolynomial& g1, const GeneralizedPolynomial& g2,
                          double c1, double c2) {
  const auto simple = [](const GeneralizedPolynomial& g) {
    return g.exponents().size() == 1 || g.is_two_term();
  };
  if (!simple(g1) || !simple(g2))
    throw InvalidInput("delta_discriminant: laws must have the form a + b s^alpha");
  double alpha = kNaN;
  if (g1.is_two_term()) alpha = g1.tt_alpha();
  if (g2.is_two_term()) {
    if (!std::isnan(alpha) && g2.tt_alpha() != alpha)
      throw InvalidInput("delta_discriminant: the two laws must share the exponent alpha");
    alpha = g2.tt_alpha();
  }
  if (std::isnan(alpha)) return 0.0;  // both Darcy
  return g2.a0() * g1.tt_b() * std::pow(std::fabs(c1), alpha) -
         g1.a0() * g2.tt_b() * std::pow(std::fabs(c2), alpha);
}

double equilibrium_h(const FlowParams& p, double r) {
  if (!(p.c1 * p.c2 > 0.0)) throw InvalidInput("equilibrium_h: needs c1 c2 > 0");
  if (!(r > 0.0)) throw InvalidInput("equilibrium_h: r must be positive");
  const double xi = std::pow(r, 1.0 - p.n);
  const double q = p.c1 * p.g1(std::fabs(p.c1) * xi) / (p.c2 * p.g2(std::fabs(p.c2) * xi));
  return p.model.invert_f_ratio(q);
}

double s_star(const FlowParams& p) {
  if (!(p.c1 * p.c2 > 0.0)) throw InvalidInput("s_star: needs c1 c2 > 0");
  return p.model.invert_f_ratio(p.c1 * p.g1.a0() / (p.c2 * p.g2.a0()));
}

bool Prediction::contains(double s, double tol) const {
  if (is_set) {
    for (double v : values)
      if (std::fabs(s - v) <= tol) return true;
    return false;
  }
  return s >= lo - tol && s <= hi + tol;
}

std::string Prediction::str() const {
  std::ostringstream os;
  os.precision(10);
  if (is_set) {
    os << "{";
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ", " : "") << values[i];
    os << "}";
  } else {
    os << (lo_open ? "(" : "[") << lo << ", " << hi << (hi_open ? ")" : "]");
  }
  return os.str();
}

namespace {

Prediction interval(double lo, bool lo_open, double hi, bool hi_open) {
  Prediction p;
  p.lo = lo;
  p.lo_open = lo_open;
  p.hi = hi;
  p.hi_open = hi_open;
  return p;
}

Prediction finite_set(std::vector<double> vals) {
  Prediction p;
  p.is_set = true;
  p.values = std::move(vals);
  return p;
}

// Exact membership used when intersecting table predictions with the planar
// limit sets; 1e-12 slack covers only roundoff on closed endpoints.
bool member(const Prediction& pred, double v) {
  constexpr double eps = 1e-12;
  if (pred.is_set) {
    for (double w : pred.values)
      if (std::fabs(v - w) <= eps) return true;
    return false;
  }
  const bool above = pred.lo_open ? v > pred.lo + eps : v >= pred.lo - eps;
  const bool below = pred.hi_open ? v < pred.hi - eps : v <= pred.hi + eps;
  return above && below;
}

Prediction intersect_with_set(const Prediction& base, const Prediction& set) {
  Prediction out;
  out.is_set = true;
  for (double v : set.values)
    if (member(base, v)) out.values.push_back(v);
  if (out.values.empty()) return set;  // defensive; the tables always overlap
  return out;
}

}  // namespace

CaseLabel classify_case(const FlowParams& p) {
  p.validate();
  CaseLabel lab;
  const double c1 = p.c1, c2 = p.c2;

  if (c1 > 0.0 && c2 > 0.0)
    lab.global_case = "3";
  else if (c1 < 0.0 && c2 < 0.0)
    lab.global_case = "4";
  else if (c1 > 0.0)
    lab.global_case = "1a";
  else if (c1 == 0.0 && c2 < 0.0)
    lab.global_case = "1b";
  else if (c2 > 0.0)
    lab.global_case = "2a";
  else
    lab.global_case = "2b";

  lab.prediction = interval(0.0, false, 1.0, false);

  const bool mixed_up = (c1 <= 0.0 && c2 > 0.0) || (c1 < 0.0 && c2 == 0.0);
  const bool mixed_down = (c2 <= 0.0 && c1 > 0.0) || (c1 == 0.0 && c2 < 0.0);

  if (mixed_up) {
    lab.example_case = "C";
    lab.prediction = interval(p.s0, true, 1.0, false);
  } else if (mixed_down) {
    lab.example_case = "D";
    lab.prediction = interval(0.0, false, p.s0, true);
  } else {
    // c1 c2 > 0: equilibrium data always exist; the two-term table needs
    // compatible laws.
    lab.s_star = s_star(p);
    lab.h_r0 = equilibrium_h(p, p.r0);
    bool have_delta = true;
    try {
      lab.delta = delta_discriminant(p.g1, p.g2, c1, c2);
    } catch (const InvalidInput&) {
      have_delta = false;
    }
    if (have_delta) {
      const double scale = std::fabs(p.g2.a0() * p.g1.tt_b() *
                                     std::pow(std::fabs(c1), p.g1.tt_alpha())) +
                           std::fabs(p.g1.a0() * p.g2.tt_b() *
                                     std::pow(std::fabs(c2), p.g2.tt_alpha()));
      const bool dz = std::fabs(lab.delta) <= 1e-14 * std::max(1.0, scale);
      const double s0 = p.s0, ss = lab.s_star, h0 = lab.h_r0;
      constexpr double tie = 1e-10;  // ties take the inclusive branch
      const bool positive = c1 > 0.0;
      const char fam = positive ? 'A' : 'B';
      std::string sub;
      if (dz) {
        sub = "3";
        if (std::fabs(s0 - ss) <= tie) {
          lab.example_case = std::string(1, fam) + sub + "(ii)";
          lab.prediction = finite_set({ss});
        } else if (s0 > ss) {
          lab.example_case = std::string(1, fam) + sub + "(i)";
          lab.prediction = positive ? interval(s0, true, 1.0, false)
                                    : interval(ss, false, s0, true);
        } else {
          lab.example_case = std::string(1, fam) + sub + "(iii)";
          lab.prediction = positive ? interval(0.0, false, s0, true)
                                    : interval(s0, true, ss, false);
        }
      } else if (lab.delta < 0.0) {  // h increases from h(r0) up to s*
        sub = "1";
        if (s0 > ss + tie) {
          lab.example_case = std::string(1, fam) + sub + "(i)";
          lab.prediction = positive ? interval(s0, true, 1.0, false)
                                    : interval(h0, true, s0, true);
        } else if (s0 >= h0 - tie) {
          lab.example_case = std::string(1, fam) + sub + "(ii)";
          lab.prediction = positive ? interval(0.0, false, 1.0, false)
                                    : interval(h0, true, ss, false);
        } else {
          lab.example_case = std::string(1, fam) + sub + "(iii)";
          lab.prediction = positive ? interval(0.0, false, s0, true)
                                    : interval(s0, true, ss, false);
        }
      } else {  // delta > 0: h decreases from h(r0) down to s*
        sub = "2";
        if (s0 > h0 + tie) {
          lab.example_case = std::string(1, fam) + sub + "(i)";
          lab.prediction = positive ? interval(s0, true, 1.0, false)
                                    : interval(ss, false, s0, true);
        } else if (s0 >= ss - tie) {
          lab.example_case = std::string(1, fam) + sub + "(ii)";
          lab.prediction = positive ? interval(0.0, false, 1.0, false)
                                    : interval(ss, false, h0, true);
        } else {
          lab.example_case = std::string(1, fam) + sub + "(iii)";
          lab.prediction = positive ? interval(0.0, false, s0, true)
                                    : interval(s0, true, h0, true);
        }
      }
    }
  }

  if (p.n == 2) {
    Prediction nset;
    if (c1 <= 0.0 && c2 >= 0.0) {
      nset = finite_set({1.0});
    } else if (c1 >= 0.0 && c2 <= 0.0) {
      nset = finite_set({0.0});
    } else if (c1 < 0.0 && c2 < 0.0) {
      nset = finite_set({std::isnan(lab.s_star) ? s_star(p) : lab.s_star});
    } else {
      const double ss = std::isnan(lab.s_star) ? s_star(p) : lab.s_star;
      bool trichotomy = true;
      try {
        delta_discriminant(p.g1, p.g2, c1, c2);
      } catch (const InvalidInput&) {
        trichotomy = false;  // needs the two-term monotone equilibrium curve
      }
      if (trichotomy) {
        const double h0 = std::isnan(lab.h_r0) ? equilibrium_h(p, p.r0) : lab.h_r0;
        const double sm = std::min(h0, ss), sM = std::max(h0, ss);
        if (p.s0 > sM + 1e-10) {
          lab.n2_case = "(i)";
          nset = finite_set({1.0});
        } else if (p.s0 < sm - 1e-10) {
          lab.n2_case = "(iii)";
          nset = finite_set({0.0});
        } else {
          lab.n2_case = "(ii)";
          nset = finite_set({0.0, 1.0, ss});
        }
      } else {
        nset = finite_set({0.0, 1.0, ss});
      }
    }
    lab.prediction = intersect_with_set(lab.prediction, nset);
  }

  return lab;
}

SInftyEstimate estimate_s_infty(const SteadyProfile& prof) {
  if (std::isfinite(prof.r_max()))
    throw InvalidInput("estimate_s_infty: profile exited at finite r_max");
  if (!(prof.coverage() >= 1e3 * prof.r_begin()))
    throw InvalidInput("estimate_s_infty: coverage must reach 1e3 r0");

  const auto& ks = prof.knots();
  const auto& vs = prof.values();
  const std::size_t m = ks.size();

  SInftyEstimate est;
  // Maximal suffix on which sign(S') is constant (|rhs| <= 1e-12 counts as 0).
  int dir = 0;
  std::size_t start = m - 1;
  for (std::size_t ii = m; ii-- > 0;) {
    const double v = flux_rhs(prof.params(), ks[ii], vs[ii]);
    const int s = std::fabs(v) <= 1e-12 ? 0 : (v > 0.0 ? 1 : -1);
    if (s != 0) {
      if (dir == 0)
        dir = s;
      else if (s != dir)
        break;
    }
    start = ii;
  }
  est.tail.sign = dir;
  est.tail.r_detect = ks[start];
  est.tail.length = m - start;
  if (est.tail.length < 10) throw NumericError("estimate_s_infty: tail not resolved", ks[start]);

  const double r3 = prof.coverage();
  const double x1 = prof(r3 / 4.0), x2 = prof(r3 / 2.0), x3 = prof(r3);
  const double d1 = x2 - x1, d2 = x3 - x2;
  est.uncertainty = std::fabs(d2);
  double value = x3;
  if (std::fabs(d1) > 1e-300) {
    const double ratio = d2 / d1;
    if (ratio > 1e-6 && ratio < 0.99) value = x3 + d2 * ratio / (1.0 - ratio);
  }
  est.value = std::clamp(value, 0.0, 1.0);
  return est;
}

double pressure_derivative(const SteadyProfile& prof, int phase, double r) {
  if (phase != 1 && phase != 2) throw InvalidInput("pressure_derivative: phase must be 1 or 2");
  const FlowParams& p = prof.params();
  const double S = prof(r);
  const double de = 2.0 * prof.delta_exit();
  if (S <= de || S >= 1.0 - de)
    throw NumericError("pressure_derivative: singular permeability (S at threshold)", r, S);
  const double c = phase == 1 ? p.c1 : p.c2;
  if (c == 0.0) return 0.0;
  const double u = c * std::pow(r, 1.0 - p.n);
  const GeneralizedPolynomial& g = phase == 1 ? p.g1 : p.g2;
  return -big_g(g, u) / p.model.f(phase, S);
}

PressureProfiles pressure_profiles(const SteadyProfile& prof, double p1_at_r0, double p2_at_r0) {
  PressureProfiles out;
  out.r = prof.knots();
  out.p1.resize(out.r.size());
  out.p2.resize(out.r.size());
  double acc1 = p1_at_r0, acc2 = p2_at_r0;
  out.p1[0] = acc1;
  out.p2[0] = acc2;
  for (std::size_t i = 1; i < out.r.size(); ++i) {
    const double a = out.r[i - 1], b = out.r[i];
    const double tol = 1e-12 * std::max(1.0, b - a);
    acc1 += integrate_adaptive([&](double z) { return pressure_derivative(prof, 1, z); }, a, b, tol);
    acc2 += integrate_adaptive([&](double z) { return pressure_derivative(prof, 2, z); }, a, b, tol);
    out.p1[i] = acc1;
    out.p2[i] = acc2;
  }
  return out;
}

double pc_increment(const SteadyProfile& prof, double r) {
  const double tol = 1e-12 * std::max(1.0, r - prof.r_begin());
  return integrate_adaptive(
      [&](double z) {
        const double S = prof(z);
        return prof.params().model.pc_prime(std::clamp(S, 1e-12, 1.0 - 1e-12)) * prof.deriv(z);
      },
      prof.r_begin(), r, tol);
}

}  // namespace forch
