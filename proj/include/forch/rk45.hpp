#pragma once

#include <functional>
#include <vector>

#include "forch/common.hpp"

namespace forch {

using ScalarRhs = std::function<double(double, double)>;

struct Rk45Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;  // 0: chosen from the first derivative
  double h_max = 0.0;   // 0: whole interval
  std::size_t max_steps = 2000000;
};

// Quartic continuous extension of one accepted Dormand-Prince step.
struct DenseStep {
  double x0 = 0.0, h = 0.0;
  double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0, r5 = 0.0;

  double eval(double x) const {
    const double t = (x - x0) / h, u = 1.0 - t;
    return r1 + t * (r2 + u * (r3 + t * (r4 + u * r5)));
  }
  double deriv(double x) const {
    const double t = (x - x0) / h;
    return (r2 + (1.0 - 2.0 * t) * r3 + t * (2.0 - 3.0 * t) * r4 +
            2.0 * t * (1.0 - t) * (1.0 - 2.0 * t) * r5) /
           h;
  }
};

struct StepOut {
  double y1 = 0.0;
  double err = 0.0;  // raw embedded 4th/5th order difference
  double k7 = 0.0;   // derivative at (x + h, y1); FSAL
  DenseStep dense;
};

// One Dormand-Prince 5(4) step of size h from (x, y); k1 = f(x, y).
StepOut rk45_step(const ScalarRhs& f, double x, double y, double h, double k1);

// Piecewise dense solution over consecutive accepted steps.
class DenseSolution {
 public:
  double x_front() const { return xs_.front(); }
  double x_back() const { return xs_.back(); }
  const std::vector<double>& knots() const { return xs_; }
  const std::vector<double>& values() const { return ys_; }
  const std::vector<DenseStep>& steps() const { return steps_; }

  double eval(double x) const;
  double deriv(double x) const;

  void append(const DenseStep& s, double y1);
  void start(double x0, double y0);

 private:
  std::size_t locate(double x) const;
  std::vector<double> xs_, ys_;
  std::vector<DenseStep> steps_;
};

// Integrates y' = f(x, y) from x0 to x_end (x_end > x0) with adaptive step
// control.  After every accepted step `stop` may end the integration early
// (the triggering step is retained so callers can post-process it).  Throws
// NumericError on step underflow or step-count exhaustion, carrying the last
// valid state.
DenseSolution rk45_integrate(
    const ScalarRhs& f, double x0, double x_end, double y0, const Rk45Options& opt = {},
    const std::function<bool(const DenseStep&, double)>& stop = nullptr);

}  // namespace forch
