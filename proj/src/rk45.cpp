#include "forch/rk45.hpp"

#include <algorithm>
#include <cmath>

namespace forch {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous-extension weights.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

StepOut rk45_step(const ScalarRhs& f, double x, double y, double h, double k1) {
  const double k2 = f(x + c2 * h, y + h * a21 * k1);
  const double k3 = f(x + c3 * h, y + h * (a31 * k1 + a32 * k2));
  const double k4 = f(x + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const double k5 = f(x + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const double k6 = f(x + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  const double y1 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const double k7 = f(x + h, y1);

  StepOut out;
  out.y1 = y1;
  out.k7 = k7;
  out.err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

  const double ydiff = y1 - y;
  const double bspl = h * k1 - ydiff;
  out.dense.x0 = x;
  out.dense.h = h;
  out.dense.r1 = y;
  out.dense.r2 = ydiff;
  out.dense.r3 = bspl;
  out.dense.r4 = ydiff - h * k7 - bspl;
  out.dense.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
  return out;
}

void DenseSolution::start(double x0, double y0) {
  xs_ = {x0};
  ys_ = {y0};
  steps_.clear();
}

void DenseSolution::append(const DenseStep& s, double y1) {
  steps_.push_back(s);
  xs_.push_back(s.x0 + s.h);
  ys_.push_back(y1);
}

std::size_t DenseSolution::locate(double x) const {
  if (steps_.empty()) throw InvalidInput("DenseSolution: empty");
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - xs_.begin());
  if (i == 0) i = 1;
  if (i > steps_.size()) i = steps_.size();
  return i - 1;
}

double DenseSolution::eval(double x) const { return steps_[locate(x)].eval(x); }

double DenseSolution::deriv(double x) const { return steps_[locate(x)].deriv(x); }

DenseSolution rk45_integrate(const ScalarRhs& f, double x0, double x_end, double y0,
                             const Rk45Options& opt,
                             const std::function<bool(const DenseStep&, double)>& stop) {
  if (!(x_end > x0)) throw InvalidInput("rk45_integrate: need x_end > x0");
  DenseSolution sol;
  sol.start(x0, y0);

  double x = x0, y = y0;
  double k1 = f(x, y);
  const double span = x_end - x0;
  const double h_max = opt.h_max > 0.0 ? opt.h_max : span;
  double h = opt.h_init;
  if (h <= 0.0) {
    const double scale = opt.atol + opt.rtol * std::fabs(y);
    h = 0.01 * scale / std::max(1e-300, std::fabs(k1) * opt.rtol + 1e-300);
    h = std::min({std::fabs(h), 1e-2 * span, h_max});
    h = std::max(h, span * 1e-12);
  }

  for (std::size_t steps = 0; steps < opt.max_steps; ++steps) {
    if (x + h > x_end) h = x_end - x;
    if (!(x + h > x))
      throw NumericError("rk45_integrate: step size underflow", x, y);

    const StepOut s = rk45_step(f, x, y, h, k1);
    const double scale = opt.atol + opt.rtol * std::max(std::fabs(y), std::fabs(s.y1));
    const double err = std::fabs(s.err) / scale;

    if (err <= 1.0 || h <= span * 1e-14) {  // accept
      sol.append(s.dense, s.y1);
      x += h;
      y = s.y1;
      k1 = s.k7;
      if (stop && stop(s.dense, s.y1)) return sol;
      if (x_end - x <= span * 1e-14) return sol;
      const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 10.0);
      h = std::min(h * fac, h_max);
    } else {  // reject
      const double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
      h *= fac;
    }
  }
  throw NumericError("rk45_integrate: max step count exceeded", x, y);
}

}  // namespace forch
