#include "forch/polynomial.hpp"

#include <cmath>

namespace forch {

GeneralizedPolynomial::GeneralizedPolynomial(std::vector<double> exponents,
                                             std::vector<double> coefficients)
    : expo_(std::move(exponents)), coef_(std::move(coefficients)) {
  if (expo_.empty() || expo_.size() != coef_.size())
    throw InvalidInput("GeneralizedPolynomial: exponents/coefficients size mismatch");
  if (expo_[0] != 0.0) throw InvalidInput("GeneralizedPolynomial: leading exponent must be 0");
  if (!(coef_[0] > 0.0)) throw InvalidInput("GeneralizedPolynomial: a_0 must be positive");
  for (std::size_t j = 1; j < expo_.size(); ++j) {
    if (!(expo_[j] > expo_[j - 1]))
      throw InvalidInput("GeneralizedPolynomial: exponents must be strictly increasing");
    if (coef_[j] < 0.0) throw InvalidInput("GeneralizedPolynomial: coefficients must be >= 0");
  }
}

double GeneralizedPolynomial::operator()(double s) const {
  if (s < 0.0) throw InvalidInput("GeneralizedPolynomial: negative argument");
  double v = coef_[0];
  for (std::size_t j = 1; j < expo_.size(); ++j) v += coef_[j] * std::pow(s, expo_[j]);
  return v;
}

double GeneralizedPolynomial::deriv(double s) const {
  if (s < 0.0) throw InvalidInput("GeneralizedPolynomial: negative argument");
  double v = 0.0;
  for (std::size_t j = 1; j < expo_.size(); ++j)
    v += coef_[j] * expo_[j] * std::pow(s, expo_[j] - 1.0);
  return v;
}

double GeneralizedPolynomial::deriv2(double s) const {
  if (s < 0.0) throw InvalidInput("GeneralizedPolynomial: negative argument");
  double v = 0.0;
  for (std::size_t j = 1; j < expo_.size(); ++j)
    v += coef_[j] * expo_[j] * (expo_[j] - 1.0) * std::pow(s, expo_[j] - 2.0);
  return v;
}

double GeneralizedPolynomial::deriv_times_s(double s) const {
  if (s < 0.0) throw InvalidInput("GeneralizedPolynomial: negative argument");
  double v = 0.0;
  for (std::size_t j = 1; j < expo_.size(); ++j) v += coef_[j] * expo_[j] * std::pow(s, expo_[j]);
  return v;
}

double big_g(const GeneralizedPolynomial& g, double u) { return g(std::fabs(u)) * u; }

SquareMatrix big_g_gradient(const GeneralizedPolynomial& g, const std::vector<double>& u_vec) {
  const int n = static_cast<int>(u_vec.size());
  const double mag = norm2(u_vec);
  if (mag == 0.0) throw InvalidInput("big_g_gradient: u must be nonzero");
  SquareMatrix m(n);
  const double gv = g(mag), gp = g.deriv(mag);
  for (int i = 0; i < n; ++i) {
    m(i, i) = gv;
    for (int j = 0; j < n; ++j) m(i, j) += gp * u_vec[i] * u_vec[j] / mag;
  }
  return m;
}

}  // namespace forch
