#include "forch/common.hpp"

#include <algorithm>

namespace forch {

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double m, double b, double fa,
             double fm, double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adapt(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          int max_depth) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb))
    throw NumericError("integrate_adaptive: non-finite integrand", m, fm);
  const double whole = simpson(a, b, fa, fm, fb);
  return sign * adapt(f, a, m, b, fa, fm, fb, whole, tol, max_depth);
}

double interp_linear(const std::vector<double>& sorted_x, const std::vector<double>& y, double x) {
  if (sorted_x.empty()) throw InvalidInput("interp_linear: empty table");
  if (x <= sorted_x.front()) return y.front();
  if (x >= sorted_x.back()) return y.back();
  const auto it = std::upper_bound(sorted_x.begin(), sorted_x.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - sorted_x.begin());
  const double t = (x - sorted_x[i - 1]) / (sorted_x[i] - sorted_x[i - 1]);
  return y[i - 1] + t * (y[i] - y[i - 1]);
}

}  // namespace forch
