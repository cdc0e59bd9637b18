#pragma once

#include <memory>
#include <string>
#include <vector>

#include "forch/polynomial.hpp"

namespace forch {

// Saturation-dependent material data: phase mobilities f_1 (wetting,
// increasing from f_1(0) = 0) and f_2 (non-wetting, decreasing to f_2(1) = 0)
// and the capillary pressure derivative p_c' > 0 on (0,1).
//
// Derived fields F_i(S) = 1 / (p_c'(S) f_i(S)) extend continuously by 0 to
// S in {0,1} when p_c' f_1 blows up at 0 and p_c' f_2 blows up at 1; the
// power family guarantees this when a >= theta1 + 1 and b >= theta2 + 1
// (those inequalities also bound F_1' near 0 and F_2' near 1; validate_model
// checks all of them on any model).
class ConstitutiveModel {
 public:
  // f1 = S^theta1, f2 = (1-S)^theta2, pc' = P0 S^-a (1-S)^-b.
  static ConstitutiveModel power_family(double theta1, double theta2, double a, double b,
                                        double P0 = 1.0);
  // Built-in default: power_family(2, 2, 3, 3, 1), so F1 = S(1-S)^3, F2 = S^3(1-S).
  static ConstitutiveModel m0();
  // Monotone C^1 interpolation (Fritsch-Carlson) of sampled curves on (0,1).
  static ConstitutiveModel tabulated(std::vector<double> s, std::vector<double> f1,
                                     std::vector<double> f2, std::vector<double> pc_prime);

  double f(int phase, double S) const;        // S in [0,1]
  double f_prime(int phase, double S) const;  // S in (0,1)
  double pc_prime(double S) const;            // S in (0,1)
  double F(int phase, double S) const;        // S in [0,1]; 0 at the endpoints
  double F_prime(int phase, double S) const;  // S in (0,1)

  // f_ratio = f1/f2, strictly increasing from 0 to +inf on (0,1).
  double f_ratio(double S) const;
  // Solves f_ratio(S) = y by bracketed bisection with Newton polish to
  // |f_ratio(S) - y| <= 1e-12 max(1, y) in at most 200 iterations.
  double invert_f_ratio(double y) const;

  bool is_power_family() const { return power_; }
  // Power-family parameters (theta1, theta2, a, b, P0); only when power.
  std::vector<double> power_params() const;

 private:
  ConstitutiveModel() = default;
  bool power_ = true;
  double theta1_ = 2, theta2_ = 2, a_ = 3, b_ = 3, p0_ = 1;
  struct Tab;
  std::shared_ptr<const Tab> tab_;
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  const ValidationCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

// Structural admissibility of (model, g1, g2): monotone mobilities, positive
// capillary derivative, blow-up of pc' f_i at the matching endpoint, and the
// four one-sided boundedness conditions on F_1', F_2' that the global
// existence cases require.  Limit conditions are probed on approach
// sequences; each check reports the sampled evidence in `detail`.
ValidationReport validate_model(const ConstitutiveModel& model, const GeneralizedPolynomial& g1,
                                const GeneralizedPolynomial& g2);

}  // namespace forch
