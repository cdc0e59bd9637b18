#include "forch/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "forch/common.hpp"

namespace forch {

namespace {

void check_field_pack(const ConstantsPack& k,
                      const std::shared_ptr<const RadialCoefficients>& field) {
  if (!field) throw InvalidInput("barrier builder: coefficient field is null");
  if (field->dim() != k.n) throw InvalidInput("barrier builder: dimension mismatch");
  if (std::fabs(field->r_begin() - k.r0) > 1e-9 * std::max(1.0, k.r0))
    throw InvalidInput("barrier builder: pack r0 does not match the field");
}

void check_window(const BarrierSpec& spec, double outer_radius) {
  if (!(spec.R > spec.r0)) throw InvalidInput("barrier builder: requires R > r0");
  if (outer_radius > spec.field->r_end() * (1.0 + 1e-12))
    throw InvalidInput("barrier builder: window exceeds field coverage");
}

// Divergence-plus-drift part of the residual: div(A grad pot) + b . A grad pot
// divided by kappa, using A grad pot = kappa x (annulus families) or
// kappa (x - ell x/|x|) (shell family).
double transport_part(const BarrierSpec& spec, double r, double lam) {
  const double n = static_cast<double>(spec.n);
  if (spec.family == BarrierFamily::shell_sub)
    return n - (n - 1.0) * spec.ell / r + lam * r * (r - spec.ell);
  return n + lam * r * r;
}

double quadratic_part(const BarrierSpec& spec, double r, double phc) {
  const double d = spec.family == BarrierFamily::shell_sub ? r - spec.ell : r;
  return spec.kappa * spec.kappa * phc * d * d;
}

}  // namespace

double BarrierSpec::potential(double r) const {
  if (!field) throw InvalidInput("BarrierSpec: no coefficient field attached");
  if (family == BarrierFamily::shell_sub) {
    const double zphi = field->int_z_phi(r) - field->int_z_phi(ell);
    const double phi1 = field->int_phi(r) - field->int_phi(ell);
    return kappa * (zphi - ell * phi1);
  }
  return phi0 + kappa * field->int_z_phi(r);
}

double BarrierSpec::value(double r, double t) const {
  const double p = potential(r);
  switch (family) {
    case BarrierFamily::growth_time:
      if (t <= 0.0) return 0.0;  // continuous extension, potential > 0 off r0
      return std::exp(-s_exponent * std::log(t) - p / t);
    case BarrierFamily::outer_sup: {
      if (!(t < T)) throw InvalidInput("BarrierSpec::value: requires t < T");
      const double tau = T - t;
      return std::exp(-s_exponent * std::log(tau) + p / tau);
    }
    case BarrierFamily::shell_sub: {
      const double tau = t + 1.0;
      if (!(tau > 0.0)) throw InvalidInput("BarrierSpec::value: requires t > -1");
      return std::exp(-s_exponent * std::log(tau) - p / tau);
    }
  }
  return kNaN;
}

double BarrierSpec::bracket(double r, double t) const {
  const double lam = field->lambda_drift(r);
  const double phc = field->phi_coeff(r);
  const double pot = potential(r);
  const double trans = kappa * transport_part(*this, r, lam);
  const double quad = quadratic_part(*this, r, phc);
  switch (family) {
    case BarrierFamily::growth_time:
      return t * (-s_exponent + trans) + pot - quad;
    case BarrierFamily::outer_sup:
      return (T - t) * (s_exponent - trans) + pot - quad;
    case BarrierFamily::shell_sub:
      return (t + 1.0) * (-s_exponent + trans) + pot - quad;
  }
  return kNaN;
}

double BarrierSpec::residual_L(double r, double t) const {
  const double b = bracket(r, t);
  if (b == 0.0) return 0.0;
  const double pot = potential(r);
  double log_pref = kNaN;
  switch (family) {
    case BarrierFamily::growth_time:
      if (t <= 0.0) return 0.0;
      log_pref = -(s_exponent + 2.0) * std::log(t) - pot / t;
      break;
    case BarrierFamily::outer_sup: {
      if (!(t < T)) throw InvalidInput("BarrierSpec::residual_L: requires t < T");
      const double tau = T - t;
      log_pref = -(s_exponent + 2.0) * std::log(tau) + pot / tau;
      break;
    }
    case BarrierFamily::shell_sub: {
      const double tau = t + 1.0;
      log_pref = -(s_exponent + 2.0) * std::log(tau) - pot / tau;
      break;
    }
  }
  return std::copysign(std::exp(log_pref + std::log(std::fabs(b))), b);
}

double growth_eta1(double eta0, double q, double R) {
  if (!(eta0 > 0.0) || !(q > 0.0) || !(R > 0.0))
    throw InvalidInput("growth_eta1: requires eta0, q, R > 0");
  return std::log1p(eta0) / (q * R * R);
}

BarrierSpec build_growth_barrier(const ConstantsPack& k,
                                 std::shared_ptr<const RadialCoefficients> field, double R) {
  check_field_pack(k, field);
  BarrierSpec spec;
  spec.family = BarrierFamily::growth_time;
  spec.field = std::move(field);
  spec.n = k.n;
  spec.r0 = k.r0;
  spec.R = R;
  spec.kappa = k.kappa0;
  spec.s_exponent = k.kappa0 * (k.n + k.C2 * R);
  spec.phi0 = k.kappa0 * k.C0 * k.r0 * k.r0 / 2.0;
  check_window(spec, R);
  spec.q = k.kappa0 * k.C0 / (2.0 * spec.s_exponent);
  spec.eta0 = std::exp(2.0 * spec.s_exponent * std::log(k.r0 / R));
  spec.eta = std::exp(spec.s_exponent *
                      std::log(std::exp(1.0) * k.kappa0 * k.C0 * k.r0 * k.r0 /
                               (2.0 * spec.s_exponent)));
  spec.eta1 = growth_eta1(spec.eta0, spec.q, R);
  return spec;
}

BarrierSpec build_outer_barrier(const ConstantsPack& k,
                                std::shared_ptr<const RadialCoefficients> field, double R,
                                double T) {
  check_field_pack(k, field);
  if (!(T > 0.0)) throw InvalidInput("build_outer_barrier: requires T > 0");
  BarrierSpec spec;
  spec.family = BarrierFamily::outer_sup;
  spec.field = std::move(field);
  spec.n = k.n;
  spec.r0 = k.r0;
  spec.R = R;
  spec.T = T;
  spec.kappa = k.kappa1;
  spec.s_exponent = k.C3_outer * (1.0 + R);
  spec.phi0 = k.kappa1 * k.C1 * k.r0 * k.r0 / 2.0;
  check_window(spec, R);
  return spec;
}

BarrierSpec build_shell_barrier(const ConstantsPack& k,
                                std::shared_ptr<const RadialCoefficients> field, double R,
                                double ell) {
  check_field_pack(k, field);
  BarrierSpec spec;
  spec.family = BarrierFamily::shell_sub;
  spec.field = std::move(field);
  spec.n = k.n;
  spec.r0 = k.r0;
  spec.R = R;
  spec.ell = ell;
  spec.kappa = k.kappa2;
  spec.s_exponent = k.C3_shell * (1.0 + R);
  spec.phi0 = 0.0;
  if (!(R > 0.0)) throw InvalidInput("build_shell_barrier: requires R > 0");
  if (ell < R + k.r0)
    throw InvalidInput("build_shell_barrier: geometry requires ell >= R + r0");
  if (ell + R > spec.field->r_end() * (1.0 + 1e-12))
    throw InvalidInput("build_shell_barrier: shell exceeds field coverage");
  return spec;
}

ShellConstants shell_constants(const ConstantsPack& k, double T) {
  if (!(T >= 0.0)) throw InvalidInput("shell_constants: requires T >= 0");
  ShellConstants out;
  out.R = k.C4 * (1.0 + T);
  const double x = k.C5 * (T + 1.0);
  out.log_eta0 = std::log1p(-std::exp2(-x)) - 2.0 * x * std::log1p(T);
  out.eta0 = std::exp(out.log_eta0);
  return out;
}

double smallest_R_for_truncation(const ConstantsPack& k, double T, double ratio) {
  if (!(T > 0.0) || !(ratio > 0.0))
    throw InvalidInput("smallest_R_for_truncation: requires T > 0 and ratio > 0");
  const double target = std::log(ratio);
  const double a = k.kappa1 * k.C1 / (2.0 * T);
  const double log_T = std::log(T);
  const auto h = [&](double R) { return a * R * R - k.C3_outer * (1.0 + R) * log_T; };
  // h is convex; its infimum over [R, infinity) is attained at max(R, vertex).
  const double vertex = k.C3_outer * log_T / (2.0 * a);
  double lo = std::max(k.r0, vertex);
  if (h(lo) > target) return k.r0;
  double hi = lo + 1.0;
  int doublings = 0;
  while (h(hi) <= target) {
    hi = lo + (hi - lo) * 2.0;
    if (++doublings > 1000)
      throw NumericError("smallest_R_for_truncation: no crossing found", hi, target);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > target ? hi : lo) = mid;
  }
  return hi;
}

SignReport verify_barrier_sign(const BarrierSpec& spec, std::size_t sample_count) {
  if (!spec.field) throw InvalidInput("verify_barrier_sign: no coefficient field attached");
  const bool wants_nonpositive = spec.family != BarrierFamily::outer_sup;

  double r_lo = spec.r0, r_hi = spec.R;
  double t_lo = 0.0, t_hi = 0.0;
  switch (spec.family) {
    case BarrierFamily::growth_time:
      t_hi = spec.q * spec.R * spec.R;
      t_lo = std::min(1e-6, 0.5 * t_hi);
      break;
    case BarrierFamily::outer_sup:
      t_hi = spec.T * (1.0 - 1e-6);
      t_lo = std::min(1e-6, 0.5 * t_hi);
      break;
    case BarrierFamily::shell_sub:
      r_lo = std::max(spec.r0, spec.ell - spec.R);
      r_hi = spec.ell + spec.R;
      t_lo = 1e-6;
      t_hi = 10.0;
      break;
  }

  SignReport report;
  report.family = spec.family;
  report.samples = sample_count;
  for (std::size_t i = 1; i <= sample_count; ++i) {
    const double r = r_lo + halton(i, 2) * (r_hi - r_lo);
    const double t = t_lo + halton(i, 3) * (t_hi - t_lo);
    const double lam = spec.field->lambda_drift(r);
    const double phc = spec.field->phi_coeff(r);
    const double pot = spec.potential(r);
    const double trans = spec.kappa * transport_part(spec, r, lam);
    const double quad = quadratic_part(spec, r, phc);
    const double tau = spec.family == BarrierFamily::outer_sup
                           ? spec.T - t
                           : (spec.family == BarrierFamily::shell_sub ? t + 1.0 : t);
    const double time_sign = spec.family == BarrierFamily::outer_sup ? 1.0 : -1.0;
    const double br = tau * time_sign * (spec.s_exponent - trans) + pot - quad;
    const double scale =
        tau * (spec.s_exponent + std::fabs(trans)) + std::fabs(pot) + std::fabs(quad);
    const double raw = wants_nonpositive ? std::max(0.0, br) : std::max(0.0, -br);
    const double violation = raw / scale;
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.worst_r = r;
      report.worst_t = t;
    }
    if (spec.s_exponent - trans < -1e-9 * spec.s_exponent) report.component_s_ok = false;
    if (spec.family == BarrierFamily::outer_sup) {
      if (pot < quad * (1.0 - 1e-9)) report.component_potential_ok = false;
    } else {
      if (pot - quad > 1e-9 * std::max(quad, 1e-300)) report.component_potential_ok = false;
    }
  }
  report.passed = report.max_violation <= 1e-9 && report.component_s_ok &&
                  report.component_potential_ok;
  return report;
}

double apply_L_radial(const RadialCoefficients& field, double r, double u_t, double u_r,
                      double u_rr, int mode, double u) {
  const double phi = field.phi_coeff(r);
  const double lam = field.lambda_drift(r);
  const double php = field.phi_prime(r);
  const double n = static_cast<double>(field.dim());
  double out = u_t - u_rr / phi -
               ((n - 1.0) / (r * phi) - php / (phi * phi) + lam * r / phi) * u_r;
  if (mode != 0)
    out += static_cast<double>(mode) * (mode + n - 2.0) / (field.beta(r) * r * r) * u;
  return out;
}

double apply_L_fd(const RadialCoefficients& field,
                  const std::function<double(double, double)>& u, double r, double t,
                  double h_r, double h_t, int mode) {
  if (!(h_r > 0.0) || !(h_t > 0.0)) throw InvalidInput("apply_L_fd: requires h_r, h_t > 0");
  const double u_t = (u(r, t + h_t) - u(r, t - h_t)) / (2.0 * h_t);
  const double up = u(r + h_r, t), um = u(r - h_r, t), uc = u(r, t);
  const double u_r = (up - um) / (2.0 * h_r);
  const double u_rr = (up - 2.0 * uc + um) / (h_r * h_r);
  return apply_L_radial(field, r, u_t, u_r, u_rr, mode, uc);
}

}  // namespace forch
