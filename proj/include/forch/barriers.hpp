#pragma once

#include <functional>
#include <memory>

#include "forch/linearize.hpp"

namespace forch {

enum class BarrierFamily { growth_time, outer_sup, shell_sub };

// Singular comparison function built from a radial potential:
//   growth_time: W = t^(-s) exp(-phi/t), phi = kappa0 (C0 r0^2/2 + int z phi_coeff),
//                s = kappa0 (n + C2 R); L W <= 0.
//   outer_sup:   W = (T-t)^(-s) exp(+phi/(T-t)), phi = kappa1 (C1 r0^2/2 + int z phi_coeff),
//                s = kappa1 (n + C2) (1 + R); L W >= 0.
//   shell_sub:   W = (t+1)^(-s) exp(-psi/(t+1)), psi = kappa2 int_ell^r (z-ell) phi_coeff,
//                s = kappa2 (n + C2) (1 + R); L W <= 0 on the shell ||x|-ell| < R.
struct BarrierSpec {
  BarrierFamily family = BarrierFamily::growth_time;
  std::shared_ptr<const RadialCoefficients> field;
  int n = 0;
  double r0 = kNaN;
  double R = kNaN;    // window radius entering the singular power
  double T = kNaN;    // horizon (outer_sup only)
  double ell = kNaN;  // shell center (shell_sub only)
  double kappa = kNaN;
  double s_exponent = kNaN;
  double phi0 = kNaN;  // additive part of the potential at r0

  // growth_time scalars (NaN for the other families)
  double q = kNaN;     // kappa0 C0 / (2 s)
  double eta0 = kNaN;  // (r0/R)^(2s)
  double eta = kNaN;   // (e kappa0 C0 r0^2 / (2 s))^s = 1 / max h0
  double eta1 = kNaN;  // ln(1 + eta0) / (q R^2), the decay rate

  double potential(double r) const;
  double value(double r, double t) const;

  // Sign-carrying factor of L W; W is super/sub-parabolic iff the bracket
  // keeps the family's sign.  Assembled from the exact algebraic identities
  // A grad(pot) = kappa x (or kappa (x - ell x/|x|)), never from finite
  // differences of W.
  double bracket(double r, double t) const;
  double residual_L(double r, double t) const;  // positive prefactor times bracket
};

BarrierSpec build_growth_barrier(const ConstantsPack& k,
                                 std::shared_ptr<const RadialCoefficients> field, double R);
BarrierSpec build_outer_barrier(const ConstantsPack& k,
                                std::shared_ptr<const RadialCoefficients> field, double R,
                                double T);
// Requires ell >= R + r0 and ell + R within the field's radial range.
BarrierSpec build_shell_barrier(const ConstantsPack& k,
                                std::shared_ptr<const RadialCoefficients> field, double R,
                                double ell);

double growth_eta1(double eta0, double q, double R);

struct ShellConstants {
  double R = kNaN;         // C4 (1 + T)
  double eta0 = kNaN;      // (1 - 2^(-C5(T+1))) (T+1)^(-2 C5 (T+1)); may underflow
  double log_eta0 = kNaN;  // exact logarithm of the above
};
ShellConstants shell_constants(const ConstantsPack& k, double T);

// Smallest R >= r0 such that T^(-C3_outer(1+R)) e^(kappa1 C1 R'^2/(2T)) > ratio
// for every R' >= R (the quantity is convex in R; the infimum of the
// upward-closed part of the super-level set is returned).
double smallest_R_for_truncation(const ConstantsPack& k, double T, double ratio);

struct SignReport {
  BarrierFamily family = BarrierFamily::growth_time;
  std::size_t samples = 0;
  double max_violation = 0.0;  // worst wrong-signed bracket / local scale
  double worst_r = kNaN, worst_t = kNaN;
  bool component_s_ok = true;          // power vs divergence-plus-drift part
  bool component_potential_ok = true;  // potential vs quadratic-form part
  bool passed = false;                 // max_violation <= 1e-9
};

// Evaluates the exact residual bracket at `sample_count` Halton points of
// the family's stated space-time domain; the time interval excludes a
// 1e-6-relative sliver at removable endpoints.
SignReport verify_barrier_sign(const BarrierSpec& spec, std::size_t sample_count);

// L u at radius r for u = f(r,t) Y(angle), Y a degree-`mode` spherical
// harmonic (mode 0: radially symmetric):
// L u = u_t - u_rr/phi - [(n-1)/(r phi) - phi'/phi^2 + lambda r/phi] u_r
//       + mode (mode + n - 2) / (beta r^2) u.
double apply_L_radial(const RadialCoefficients& field, double r, double u_t, double u_r,
                      double u_rr, int mode = 0, double u = 0.0);

// Same operator with second-order central differences of a sampled u(r,t).
double apply_L_fd(const RadialCoefficients& field,
                  const std::function<double(double, double)>& u, double r, double t,
                  double h_r, double h_t, int mode = 0);

}  // namespace forch
