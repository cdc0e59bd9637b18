#pragma once

#include <vector>

#include "forch/common.hpp"

namespace forch {

// Monomial-sum momentum nonlinearity
//   g(s) = sum_j a_j s^(alpha_j),  s >= 0,
// with alpha_0 = 0 < alpha_1 < ... and a_0 > 0, a_j >= 0.  Constant g is the
// linear (Darcy) law; the classical quadratic-drag law is a + b s.
class GeneralizedPolynomial {
 public:
  GeneralizedPolynomial(std::vector<double> exponents, std::vector<double> coefficients);

  static GeneralizedPolynomial constant(double a0) { return {{0.0}, {a0}}; }
  static GeneralizedPolynomial two_term(double a, double b, double alpha) {
    return {{0.0, alpha}, {a, b}};
  }

  double operator()(double s) const;
  double deriv(double s) const;
  double deriv2(double s) const;
  // s * g'(s), finite for all s >= 0 including s = 0 even when alpha_1 < 1.
  double deriv_times_s(double s) const;

  double a0() const { return coef_[0]; }
  // True when the law is exactly a + b s^alpha with b > 0.
  bool is_two_term() const { return expo_.size() == 2 && coef_[1] > 0.0; }
  double tt_b() const { return coef_.size() > 1 ? coef_[1] : 0.0; }
  double tt_alpha() const { return expo_.size() > 1 ? expo_[1] : 0.0; }

  const std::vector<double>& exponents() const { return expo_; }
  const std::vector<double>& coefficients() const { return coef_; }

 private:
  std::vector<double> expo_, coef_;
};

// g(|u|) u for scalar (signed radial) u.
double big_g(const GeneralizedPolynomial& g, double u);

// Jacobian of the map u -> g(|u|) u at u_vec != 0:
//   g(|u|) I + g'(|u|) u u^T / |u|.
SquareMatrix big_g_gradient(const GeneralizedPolynomial& g, const std::vector<double>& u_vec);

}  // namespace forch
