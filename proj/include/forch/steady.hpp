#pragma once

#include <optional>
#include <string>
#include <vector>

#include "forch/constitutive.hpp"
#include "forch/rk45.hpp"

namespace forch {

// Radially symmetric two-phase setup on |x| >= r0 in dimension n >= 2.
// Phase velocities are u_i = c_i r^(1-n) e_r; S(r0) = s0.
struct FlowParams {
  int n = 2;
  double r0 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  GeneralizedPolynomial g1 = GeneralizedPolynomial::two_term(1.0, 1.0, 1.0);
  GeneralizedPolynomial g2 = GeneralizedPolynomial::two_term(1.0, 1.0, 1.0);
  ConstitutiveModel model = ConstitutiveModel::m0();
  double s0 = 0.5;

  void validate() const;  // throws InvalidInput on violations
};

// S'(r) = G2(c2 r^(1-n)) F2(S) - G1(c1 r^(1-n)) F1(S); requires S in (0,1).
double steady_rhs(const FlowParams& p, double r, double S);

struct IntegrateOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double delta_exit = 1e-9;  // exit event thresholds delta and 1 - delta
  std::size_t max_steps = 2000000;
};

// Saturation profile with dense evaluation on [r0, coverage].  When the
// saturation reaches delta_exit (resp. 1 - delta_exit) the integration stops
// at the bisected crossing radius r_max with exit_side 0 (resp. 1);
// otherwise r_max is +inf and coverage is the requested end radius.
class SteadyProfile {
 public:
  const FlowParams& params() const { return params_; }
  double r_begin() const { return params_.r0; }
  double coverage() const { return coverage_; }
  double r_max() const { return r_max_; }
  int exit_side() const { return exit_side_; }
  bool log_transformed() const { return log_; }
  double delta_exit() const { return delta_exit_; }

  double operator()(double r) const;  // S(r); r in [r0, coverage]
  double deriv(double r) const;       // dS/dr from the dense interpolant

  // Accepted-step abscissae (in r) and saturation values, ending at coverage.
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return vals_; }

 private:
  friend SteadyProfile integrate_profile(const FlowParams&, double, const IntegrateOptions&);
  FlowParams params_;
  DenseSolution sol_;   // in r, or in log r when log_
  bool log_ = false;
  double coverage_ = 0.0;
  double r_max_ = kInf;
  int exit_side_ = -1;
  double delta_exit_ = 1e-9;
  std::vector<double> knots_, vals_;
  double to_var(double r) const;
};

// Integrates the saturation ODE from r0 to r_end; switches to the log-radius
// variable when r_end / r0 > 100.  Trial stages evaluate the flux with S
// clamped to [0,1] (the derived mobilities extend continuously by zero); the
// accepted trajectory itself stays inside (delta_exit, 1 - delta_exit).
SteadyProfile integrate_profile(const FlowParams& p, double r_end,
                                const IntegrateOptions& opt = {});

// Two-term discriminant a2 b1 |c1|^alpha - a1 b2 |c2|^alpha; requires both
// laws of the form a + b s^alpha with b > 0 (or both constant, giving 0) and
// equal alpha.
double delta_discriminant(const GeneralizedPolynomial& g1, const GeneralizedPolynomial& g2,
                          double c1, double c2);

// Equilibrium curve h(r) = f_ratio^-1(c1 g1(|c1| r^(1-n)) / (c2 g2(|c2| r^(1-n))));
// defined for c1 c2 > 0.
double equilibrium_h(const FlowParams& p, double r);

// Limit equilibrium f_ratio^-1(c1 g1(0) / (c2 g2(0))); defined for c1 c2 > 0.
double s_star(const FlowParams& p);

// Predicted location of s_infty: an interval with open/closed ends or a
// finite set of admissible limit values.
struct Prediction {
  bool is_set = false;
  double lo = 0.0, hi = 1.0;
  bool lo_open = false, hi_open = false;
  std::vector<double> values;

  bool contains(double s, double tol) const;
  std::string str() const;
};

struct CaseLabel {
  std::string global_case;  // "1a", "1b", "2a", "2b", "3", "4"
  std::string example_case; // "A1(i)".."B3(iii)", "C", "D"; empty if not derivable
  std::string n2_case;      // "(i)".."(iii)" when the planar trichotomy applies
  Prediction prediction;
  double delta = kNaN;
  double s_star = kNaN;
  double h_r0 = kNaN;
};

// Sign-based global case, two-term sub-case when the laws allow it, and the
// planar (n = 2) limit-set refinement.
CaseLabel classify_case(const FlowParams& p);

struct TailRecord {
  double r_detect = kNaN;  // first knot of the maximal constant-sign suffix
  int sign = 0;            // -1, 0, +1 sign of S' on the tail
  std::size_t length = 0;  // knots in the suffix
};

struct SInftyEstimate {
  double value = kNaN;
  double uncertainty = kNaN;  // magnitude of the last dyadic increment
  TailRecord tail;
};

// Richardson-extrapolates S(coverage/4), S(coverage/2), S(coverage).
// Requires r_max = +inf and coverage >= 1e3 * r0; throws NumericError
// ("tail not resolved") when no constant-sign suffix of >= 10 knots exists.
SInftyEstimate estimate_s_infty(const SteadyProfile& profile);

struct PressureProfiles {
  std::vector<double> r;
  std::vector<double> p1, p2;
};

// Integrates p_i' = -G_i(c_i r^(1-n)) / f_i(S(r)) from anchor values at r0.
// Radii where S sits within twice delta_exit of a vanishing mobility raise
// NumericError (singular permeability).
PressureProfiles pressure_profiles(const SteadyProfile& profile, double p1_at_r0,
                                   double p2_at_r0);

double pressure_derivative(const SteadyProfile& profile, int phase, double r);

// Capillary increment int_{r0}^{r} pc'(S(z)) S'(z) dz, for checking
// p1 - p2 against the capillary pressure up to its anchor constant.
double pc_increment(const SteadyProfile& profile, double r);

}  // namespace forch
