#include "forch/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace forch {

namespace {

// Fritsch-Carlson monotone cubic Hermite table.
struct Pchip {
  std::vector<double> x, y, d;  // nodes, values, node derivatives

  void build() {
    const std::size_t n = x.size();
    d.assign(n, 0.0);
    if (n < 2) return;
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x[i + 1] - x[i];
      delta[i] = (y[i + 1] - y[i]) / h[i];
    }
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        d[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
  }

  std::size_t seg(double q) const {
    const auto it = std::upper_bound(x.begin(), x.end(), q);
    std::size_t i = static_cast<std::size_t>(it - x.begin());
    if (i == 0) i = 1;
    if (i >= x.size()) i = x.size() - 1;
    return i - 1;
  }

  double eval(double q) const {
    const std::size_t i = seg(q);
    const double h = x[i + 1] - x[i], t = (q - x[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * y[i] + h * h10 * d[i] + h01 * y[i + 1] + h * h11 * d[i + 1];
  }

  double eval_deriv(double q) const {
    const std::size_t i = seg(q);
    const double h = x[i + 1] - x[i], t = (q - x[i]) / h;
    const double g00 = 6 * t * t - 6 * t, g10 = 3 * t * t - 4 * t + 1;
    const double g01 = -6 * t * t + 6 * t, g11 = 3 * t * t - 2 * t;
    return (g00 * y[i] + g01 * y[i + 1]) / h + g10 * d[i] + g11 * d[i + 1];
  }
};

void require_phase(int phase) {
  if (phase != 1 && phase != 2) throw InvalidInput("phase index must be 1 or 2");
}

void require_open(double S) {
  if (!(S > 0.0 && S < 1.0)) throw InvalidInput("saturation must lie in (0,1)");
}

void require_closed(double S) {
  if (!(S >= 0.0 && S <= 1.0)) throw InvalidInput("saturation must lie in [0,1]");
}

}  // namespace

struct ConstitutiveModel::Tab {
  Pchip f1, f2, pcp;
};

ConstitutiveModel ConstitutiveModel::power_family(double theta1, double theta2, double a, double b,
                                                  double P0) {
  if (!(theta1 > 0) || !(theta2 > 0)) throw InvalidInput("power_family: theta_i must be positive");
  if (!(a > 0) || !(b > 0)) throw InvalidInput("power_family: a, b must be positive");
  if (!(P0 > 0)) throw InvalidInput("power_family: P0 must be positive");
  ConstitutiveModel m;
  m.power_ = true;
  m.theta1_ = theta1;
  m.theta2_ = theta2;
  m.a_ = a;
  m.b_ = b;
  m.p0_ = P0;
  return m;
}

ConstitutiveModel ConstitutiveModel::m0() { return power_family(2.0, 2.0, 3.0, 3.0, 1.0); }

ConstitutiveModel ConstitutiveModel::tabulated(std::vector<double> s, std::vector<double> f1,
                                               std::vector<double> f2,
                                               std::vector<double> pc_prime) {
  const std::size_t n = s.size();
  if (n < 4 || f1.size() != n || f2.size() != n || pc_prime.size() != n)
    throw InvalidInput("tabulated: need >= 4 aligned samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(s[i] > s[i - 1])) throw InvalidInput("tabulated: saturations must increase");
  if (!(s.front() > 0.0 && s.back() < 1.0))
    throw InvalidInput("tabulated: samples must lie strictly inside (0,1)");
  auto tab = std::make_shared<Tab>();
  tab->f1.x = s;
  tab->f1.y = std::move(f1);
  tab->f2.x = s;
  tab->f2.y = std::move(f2);
  tab->pcp.x = std::move(s);
  tab->pcp.y = std::move(pc_prime);
  tab->f1.build();
  tab->f2.build();
  tab->pcp.build();
  ConstitutiveModel m;
  m.power_ = false;
  m.tab_ = std::move(tab);
  return m;
}

double ConstitutiveModel::f(int phase, double S) const {
  require_phase(phase);
  require_closed(S);
  if (power_)
    return phase == 1 ? std::pow(S, theta1_) : std::pow(1.0 - S, theta2_);
  const Pchip& p = phase == 1 ? tab_->f1 : tab_->f2;
  // Extend to the endpoints by the structural limits f1(0) = 0, f2(1) = 0.
  if (phase == 1 && S <= p.x.front()) return p.y.front() * S / p.x.front();
  if (phase == 2 && S >= p.x.back()) return p.y.back() * (1.0 - S) / (1.0 - p.x.back());
  return p.eval(std::clamp(S, p.x.front(), p.x.back()));
}

double ConstitutiveModel::f_prime(int phase, double S) const {
  require_phase(phase);
  require_open(S);
  if (power_)
    return phase == 1 ? theta1_ * std::pow(S, theta1_ - 1.0)
                      : -theta2_ * std::pow(1.0 - S, theta2_ - 1.0);
  const Pchip& p = phase == 1 ? tab_->f1 : tab_->f2;
  if (phase == 1 && S <= p.x.front()) return p.y.front() / p.x.front();
  if (phase == 2 && S >= p.x.back()) return -p.y.back() / (1.0 - p.x.back());
  return p.eval_deriv(S);
}

double ConstitutiveModel::pc_prime(double S) const {
  require_open(S);
  if (power_) return p0_ * std::pow(S, -a_) * std::pow(1.0 - S, -b_);
  return tab_->pcp.eval(std::clamp(S, tab_->pcp.x.front(), tab_->pcp.x.back()));
}

double ConstitutiveModel::F(int phase, double S) const {
  require_phase(phase);
  require_closed(S);
  if (power_) {
    // F1 = S^(a-theta1) (1-S)^b / P0,  F2 = S^a (1-S)^(b-theta2) / P0.
    if (phase == 1) return std::pow(S, a_ - theta1_) * std::pow(1.0 - S, b_) / p0_;
    return std::pow(S, a_) * std::pow(1.0 - S, b_ - theta2_) / p0_;
  }
  if (S <= 0.0 || S >= 1.0) return 0.0;
  return 1.0 / (pc_prime(S) * f(phase, S));
}

double ConstitutiveModel::F_prime(int phase, double S) const {
  require_phase(phase);
  require_open(S);
  if (power_) {
    if (phase == 1) {
      const double e1 = a_ - theta1_;
      return (e1 * std::pow(S, e1 - 1.0) * std::pow(1.0 - S, b_) -
              b_ * std::pow(S, e1) * std::pow(1.0 - S, b_ - 1.0)) /
             p0_;
    }
    const double e2 = b_ - theta2_;
    return (a_ * std::pow(S, a_ - 1.0) * std::pow(1.0 - S, e2) -
            e2 * std::pow(S, a_) * std::pow(1.0 - S, e2 - 1.0)) /
           p0_;
  }
  // d/dS [1 / (pc' f)] = -(pc'' f + pc' f') / (pc' f)^2.
  const double pcp = pc_prime(S), fv = f(phase, S), fp = f_prime(phase, S);
  const double pcpp = tab_->pcp.eval_deriv(std::clamp(S, tab_->pcp.x.front(), tab_->pcp.x.back()));
  const double den = pcp * fv;
  return -(pcpp * fv + pcp * fp) / (den * den);
}

double ConstitutiveModel::f_ratio(double S) const {
  require_open(S);
  return f(1, S) / f(2, S);
}

double ConstitutiveModel::invert_f_ratio(double y) const {
  if (!(y > 0.0) || !std::isfinite(y)) throw InvalidInput("invert_f_ratio: y must be positive");
  int iters = 0;
  double lo = 0.5, hi = 0.5;
  while (f_ratio(lo) > y) {
    lo *= 0.5;
    if (++iters > 200) throw NumericError("invert_f_ratio: bracket failure (low)", lo);
  }
  while (f_ratio(hi) < y) {
    hi = 1.0 - 0.5 * (1.0 - hi);
    if (++iters > 200) throw NumericError("invert_f_ratio: bracket failure (high)", hi);
  }
  const double tol = 1e-12 * std::max(1.0, y);
  double mid = 0.5 * (lo + hi);
  for (; iters < 200; ++iters) {
    mid = 0.5 * (lo + hi);
    const double v = f_ratio(mid);
    if (std::fabs(v - y) <= tol) return mid;
    (v < y ? lo : hi) = mid;
    if (hi - lo < 4.0 * std::numeric_limits<double>::epsilon() * mid) break;
  }
  // Newton polish from the bisection midpoint.
  for (int k = 0; k < 8; ++k) {
    const double v = f_ratio(mid);
    if (std::fabs(v - y) <= tol) return mid;
    const double dv = (f_prime(1, mid) * f(2, mid) - f(1, mid) * f_prime(2, mid)) /
                      (f(2, mid) * f(2, mid));
    const double next = mid - (v - y) / dv;
    if (!(next > lo && next < hi)) break;
    mid = next;
  }
  if (std::fabs(f_ratio(mid) - y) <= tol) return mid;
  throw NumericError("invert_f_ratio: no convergence within 200 iterations", mid, f_ratio(mid));
}

std::vector<double> ConstitutiveModel::power_params() const {
  if (!power_) throw InvalidInput("power_params: model is tabulated");
  return {theta1_, theta2_, a_, b_, p0_};
}

namespace {

std::string join_samples(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ", ";
    os << "S=" << xs[i] << ":" << ys[i];
  }
  return os.str();
}

}  // namespace

ValidationReport validate_model(const ConstitutiveModel& model, const GeneralizedPolynomial& g1,
                                const GeneralizedPolynomial& g2) {
  ValidationReport rep;
  const int kGrid = 10000;
  const double kBlowup = 1e6;     // "large" threshold for the blow-up probes
  const double kPlateau = 1e6;    // boundedness threshold for derivative probes

  {  // momentum laws are admissible by construction; record the witness
    for (const auto* g : {&g1, &g2}) {
      ValidationCheck c;
      c.name = g == &g1 ? "g1-admissible" : "g2-admissible";
      c.passed = g->a0() > 0.0;
      std::ostringstream os;
      os << "a0=" << g->a0() << ", terms=" << g->coefficients().size();
      c.detail = os.str();
      rep.checks.push_back(std::move(c));
    }
  }

  {  // f1 strictly increasing, f2 strictly decreasing on a uniform grid
    bool inc = true, dec = true;
    for (int i = 1; i < kGrid; ++i) {
      const double lo = std::max(static_cast<double>(i - 1) / kGrid, 1e-9);
      const double hi = std::min(static_cast<double>(i) / kGrid, 1.0 - 1e-9);
      if (hi <= lo) continue;
      if (!(model.f(1, hi) > model.f(1, lo))) inc = false;
      if (!(model.f(2, hi) < model.f(2, lo))) dec = false;
    }
    rep.checks.push_back({"f1-increasing", inc, inc ? "strict on 1e4-grid" : "monotonicity fails"});
    rep.checks.push_back({"f2-decreasing", dec, dec ? "strict on 1e4-grid" : "monotonicity fails"});
  }

  {  // capillary derivative positivity
    bool pos = true;
    double worst = kInf;
    for (int i = 1; i < kGrid; ++i) {
      const double s = static_cast<double>(i) / kGrid;
      const double v = model.pc_prime(s);
      worst = std::min(worst, v);
      if (!(v > 0.0)) pos = false;
    }
    std::ostringstream os;
    os << "min pc' = " << worst;
    rep.checks.push_back({"pc-prime-positive", pos, os.str()});
  }

  {  // blow-up of pc' f1 at S -> 0 and pc' f2 at S -> 1
    const std::vector<double> probes = {1e-2, 1e-4, 1e-6};
    for (int phase : {1, 2}) {
      std::vector<double> xs, vals;
      for (double p : probes) {
        const double s = phase == 1 ? p : 1.0 - p;
        xs.push_back(s);
        vals.push_back(model.pc_prime(s) * model.f(phase, s));
      }
      const bool grows = vals[1] > vals[0] && vals[2] > vals[1];
      const bool large = vals[2] > kBlowup;
      ValidationCheck c;
      c.name = phase == 1 ? "pcf1-blowup-at-0" : "pcf2-blowup-at-1";
      c.passed = grows && large;
      c.detail = join_samples(xs, vals);
      rep.checks.push_back(std::move(c));
    }
  }

  {  // one-sided boundedness of F_i' on approach sequences
    struct Probe {
      const char* name;
      int phase;
      bool at_zero;  // approach endpoint
      int sign;      // +1: bounded above, -1: bounded below
    };
    const Probe probes[] = {
        {"F1-prime-bounded-above-at-0", 1, true, +1},
        {"F1-prime-bounded-below-at-1", 1, false, -1},
        {"F2-prime-bounded-below-at-1", 2, false, -1},
        {"F2-prime-bounded-above-at-0", 2, true, +1},
    };
    for (const auto& p : probes) {
      std::vector<double> xs, vals;
      for (int k = 2; k <= 8; k += 2) {
        const double eps = std::pow(10.0, -k);
        const double s = p.at_zero ? eps : 1.0 - eps;
        xs.push_back(s);
        vals.push_back(model.F_prime(p.phase, s));
      }
      // Signed values toward the bound direction must sit under the plateau
      // and must have stopped growing at the finest probes.
      bool ok = true;
      for (double v : vals)
        if (p.sign * v > kPlateau) ok = false;
      const double last = p.sign * vals[vals.size() - 1];
      const double prev = p.sign * vals[vals.size() - 2];
      if (last - prev > std::max(1.0, std::fabs(prev))) ok = false;
      ValidationCheck c;
      c.name = p.name;
      c.passed = ok;
      c.detail = join_samples(xs, vals);
      rep.checks.push_back(std::move(c));
    }
  }

  return rep;
}

}  // namespace forch
