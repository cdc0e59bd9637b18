#include "forch/linearize.hpp"

#include <algorithm>
#include <cmath>

namespace forch {

namespace {

void check_point_dim(const RadialCoefficients& f, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != f.dim())
    throw InvalidInput("radial coefficients: point dimension mismatch");
}

double radius_of(const RadialCoefficients& f, const std::vector<double>& x) {
  check_point_dim(f, x);
  const double r = norm2(x);
  const double slack = 1e-9 * std::max(1.0, f.r_end());
  if (!(r >= f.r_begin() - slack && r <= f.r_end() + slack))
    throw InvalidInput("radial coefficients: |x| outside [r0, r_end]");
  return r;
}

}  // namespace

SquareMatrix matrix_B(const RadialCoefficients& f, const std::vector<double>& x) {
  const double r = radius_of(f, x);
  const double be = f.beta(r), ga = f.gamma(r);
  const int n = f.dim();
  SquareMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = be * (i == j) + ga * x[i] * x[j] / (r * r);
  return m;
}

SquareMatrix matrix_A(const RadialCoefficients& f, const std::vector<double>& x) {
  const double r = radius_of(f, x);
  const double be = f.beta(r), ga = f.gamma(r), ph = f.phi_coeff(r);
  const int n = f.dim();
  SquareMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = ((i == j) - ga / ph * x[i] * x[j] / (r * r)) / be;
  return m;
}

std::vector<double> vector_b(const RadialCoefficients& f, const std::vector<double>& x) {
  const double r = radius_of(f, x);
  const double lam = f.lambda_drift(r);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = lam * x[i];
  return out;
}

CoefficientField::CoefficientField(std::shared_ptr<const SteadyProfile> profile)
    : prof_(std::move(profile)) {
  if (!prof_) throw InvalidInput("CoefficientField: null profile");
  ks_ = prof_->knots();
  const std::size_t m = ks_.size();
  cum_gauge_.assign(m, 0.0);
  cum_zphi_.assign(m, 0.0);
  cum_phi_.assign(m, 0.0);
  for (std::size_t i = 1; i < m; ++i) {
    const double a = ks_[i - 1], b = ks_[i];
    const double tol = 1e-10 * (b - a);
    cum_gauge_[i] =
        cum_gauge_[i - 1] + integrate_adaptive([&](double z) { return integrand(0, z); }, a, b, tol);
    cum_zphi_[i] =
        cum_zphi_[i - 1] + integrate_adaptive([&](double z) { return integrand(1, z); }, a, b, tol);
    cum_phi_[i] =
        cum_phi_[i - 1] + integrate_adaptive([&](double z) { return integrand(2, z); }, a, b, tol);
  }
}

double CoefficientField::integrand(int which, double z) const {
  switch (which) {
    case 0:
      return z * lambda_drift(z);
    case 1:
      return z * phi_coeff(z);
    default:
      return phi_coeff(z);
  }
}

double CoefficientField::cum_query(const std::vector<double>& cum, int which, double r) const {
  const double slack = 1e-9 * std::max(1.0, r_end());
  if (!(r >= r_begin() - slack && r <= r_end() + slack))
    throw InvalidInput("CoefficientField: radius outside [r0, coverage]");
  const double rc = std::clamp(r, r_begin(), r_end());
  const auto it = std::upper_bound(ks_.begin(), ks_.end(), rc);
  std::size_t i = static_cast<std::size_t>(it - ks_.begin());
  if (i == 0) return 0.0;
  --i;  // ks_[i] <= rc
  if (i + 1 == ks_.size()) return cum[i];
  const double tail = integrate_adaptive([&](double z) { return integrand(which, z); }, ks_[i], rc,
                                         1e-10 * std::max(rc - ks_[i], 1e-30));
  return cum[i] + tail;
}

CoefficientValues CoefficientField::coeffs_at(double r) const {
  const FlowParams& p = prof_->params();
  const double S = (*prof_)(r);
  const double pw = std::pow(r, 1.0 - p.n);
  const double xi1 = std::fabs(p.c1) * pw, xi2 = std::fabs(p.c2) * pw;
  const double F1 = p.model.F(1, S), F2 = p.model.F(2, S);

  CoefficientValues v;
  v.beta = F1 * p.g1(xi1) + F2 * p.g2(xi2);
  v.gamma = F1 * p.g1.deriv_times_s(xi1) + F2 * p.g2.deriv_times_s(xi2);
  v.phi_coeff = F1 * (p.g1(xi1) + p.g1.deriv_times_s(xi1)) +
                F2 * (p.g2(xi2) + p.g2.deriv_times_s(xi2));
  if (std::fabs(v.phi_coeff - (v.beta + v.gamma)) >
      1e-12 * std::max(1.0, std::fabs(v.phi_coeff)))
    throw NumericError("CoefficientField: phi_coeff disagrees with beta + gamma", r,
                       v.phi_coeff - (v.beta + v.gamma));

  const double rn = std::pow(r, -static_cast<double>(p.n));
  v.lambda_drift = p.model.F_prime(2, S) * p.g2(xi2) * p.c2 * rn -
                   p.model.F_prime(1, S) * p.g1(xi1) * p.c1 * rn;
  return v;
}

double CoefficientField::beta(double r) const { return coeffs_at(r).beta; }
double CoefficientField::gamma(double r) const { return coeffs_at(r).gamma; }
double CoefficientField::phi_coeff(double r) const { return coeffs_at(r).phi_coeff; }
double CoefficientField::lambda_drift(double r) const { return coeffs_at(r).lambda_drift; }

double CoefficientField::phi_prime(double r) const {
  const FlowParams& p = prof_->params();
  const double S = (*prof_)(r);
  const double dS = steady_rhs(p, r, S);
  const double pw = std::pow(r, 1.0 - p.n);
  double out = 0.0;
  for (int phase : {1, 2}) {
    const double c = phase == 1 ? p.c1 : p.c2;
    const GeneralizedPolynomial& g = phase == 1 ? p.g1 : p.g2;
    const double xi = std::fabs(c) * pw;
    const double Fp = p.model.F_prime(phase, S);
    out += Fp * dS * (g(xi) + g.deriv_times_s(xi));
    if (c != 0.0) {
      const double xi_prime = std::fabs(c) * (1.0 - p.n) * std::pow(r, -static_cast<double>(p.n));
      out += p.model.F(phase, S) * (2.0 * g.deriv(xi) + g.deriv2(xi) * xi) * xi_prime;
    }
  }
  return out;
}

double CoefficientField::gauge_Lambda(double r) const { return cum_query(cum_gauge_, 0, r); }
double CoefficientField::int_z_phi(double r) const { return cum_query(cum_zphi_, 1, r); }
double CoefficientField::int_phi(double r) const { return cum_query(cum_phi_, 2, r); }

std::vector<double> CoefficientField::c_forcing(const std::vector<double>& x,
                                                const std::vector<double>& V) const {
  const double r = radius_of(*this, x);
  if (V.size() != x.size()) throw InvalidInput("c_forcing: V dimension mismatch");
  const FlowParams& p = prof_->params();
  const double S = (*prof_)(r);
  const double F1 = p.model.F(1, S);
  std::vector<double> out(x.size(), 0.0);
  if (p.c1 == 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = F1 * p.g1.a0() * V[i];
    return out;
  }
  std::vector<double> u(x.size());
  const double pw = std::pow(r, 1.0 - p.n);
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = p.c1 * pw * x[i] / r;
  const SquareMatrix gp = big_g_gradient(p.g1, u);
  out = gp.apply(V);
  for (double& o : out) o *= F1;
  return out;
}

double CoefficientField::c_forcing_radial(double r, double nu) const {
  const FlowParams& p = prof_->params();
  const double S = (*prof_)(r);
  const double xi1 = std::fabs(p.c1) * std::pow(r, 1.0 - p.n);
  return p.model.F(1, S) * (p.g1(xi1) + p.g1.deriv_times_s(xi1)) * nu *
         std::pow(r, 1.0 - p.n);
}

double CoefficientField::forcing_f0_radial(double r, double nu) const {
  // r^(n-1) c_r / phi = nu H(r) / phi(r) with H = F1 (g1 + g1' xi1), so
  // f0 = e^{-Lambda} nu r^(1-n) [H'/phi - H phi'/phi^2].
  const FlowParams& p = prof_->params();
  const double S = (*prof_)(r);
  const double dS = steady_rhs(p, r, S);
  const double pw = std::pow(r, 1.0 - p.n);
  const double xi1 = std::fabs(p.c1) * pw;
  const double H = p.model.F(1, S) * (p.g1(xi1) + p.g1.deriv_times_s(xi1));
  double Hp = p.model.F_prime(1, S) * dS * (p.g1(xi1) + p.g1.deriv_times_s(xi1));
  if (p.c1 != 0.0) {
    const double xi_prime = std::fabs(p.c1) * (1.0 - p.n) * std::pow(r, -static_cast<double>(p.n));
    Hp += p.model.F(1, S) * (2.0 * p.g1.deriv(xi1) + p.g1.deriv2(xi1) * xi1) * xi_prime;
  }
  const double ph = phi_coeff(r);
  const double php = phi_prime(r);
  return std::exp(-gauge_Lambda(r)) * nu * pw * (Hp / ph - H * php / (ph * ph));
}

ConstantsPack constants(const CoefficientField& field, double R) {
  const SteadyProfile& prof = field.profile();
  const FlowParams& p = prof.params();
  if (!(R > p.r0 && R <= field.r_end() * (1.0 + 1e-12)))
    throw InvalidInput("constants: R must lie in (r0, coverage]");
  R = std::min(R, field.r_end());

  ConstantsPack k;
  k.n = p.n;
  k.r0 = p.r0;
  k.R = R;

  // Saturation range on [r0, R].
  const int kGrid = 10000;
  double slo = kInf, shi = -kInf;
  for (int i = 0; i <= kGrid; ++i) {
    const double r = p.r0 + (R - p.r0) * i / kGrid;
    const double s = prof(r);
    slo = std::min(slo, s);
    shi = std::max(shi, s);
  }
  const double de = 2.0 * prof.delta_exit();
  if (!(slo > de && shi < 1.0 - de))
    throw NumericError("constants: saturation range violates the boundedness assumption", R,
                       slo);
  k.s_lower = slo;
  k.s_upper = shi;

  // mu extrema over the saturation range, with a 1% conservative margin.
  double m1a = -kInf, m1b = -kInf, m2a = kInf, m2b = kInf, m3a = -kInf, m3b = -kInf;
  for (int i = 0; i <= kGrid; ++i) {
    const double s = slo + (shi - slo) * i / kGrid;
    const double f1 = p.model.F(1, s), f2 = p.model.F(2, s);
    m1a = std::max(m1a, f1);
    m1b = std::max(m1b, f2);
    m2a = std::min(m2a, f1);
    m2b = std::min(m2b, f2);
    m3a = std::max(m3a, std::fabs(p.model.F_prime(1, s)));
    m3b = std::max(m3b, std::fabs(p.model.F_prime(2, s)));
  }
  k.mu1 = (m1a + m1b) * 1.01;
  k.mu2 = (m2a + m2b) * 0.99;
  k.mu3 = (m3a + m3b) * 1.01;

  const double pw0 = std::pow(p.r0, 1.0 - p.n);
  const double xi10 = std::fabs(p.c1) * pw0, xi20 = std::fabs(p.c2) * pw0;
  k.d0 = std::min(p.g1.a0(), p.g2.a0());
  k.d1 = p.g1(xi10) + p.g2(xi20);
  k.d2 = p.g1(xi10) * xi10 + p.g2(xi20) * xi20;
  k.d3 = p.g1.deriv_times_s(xi10) + p.g2.deriv_times_s(xi20);
  k.d4 = k.d1 + k.d3;

  k.C0 = k.d4 * k.mu1;
  k.C1 = k.d0 * k.mu2;
  k.C2 = k.d2 * k.mu3;
  k.c0 = std::sqrt(static_cast<double>(p.n));
  k.kappa0 = k.C0 / (2.0 * k.C1);
  k.kappa1 = k.C1 / (2.0 * k.C0);
  k.kappa2 = k.C0 / (2.0 * k.C1);
  k.C3_growth = k.kappa0 * (p.n + k.C2);
  k.C3_outer = k.kappa1 * (p.n + k.C2);
  k.C3_shell = k.kappa2 * (p.n + k.C2);
  k.C4 = std::max(1.0, 8.0 * k.C3_shell / (k.kappa2 * std::exp(1.0) * k.C0));
  k.C5 = k.C3_shell * k.C4;

  if (!(k.C1 <= k.C0))
    throw NumericError("constants: C1 > C0 should be impossible", R, k.C1 - k.C0);
  return k;
}

}  // namespace forch
