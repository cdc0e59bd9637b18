#pragma once

#include <memory>
#include <vector>

#include "forch/common.hpp"
#include "forch/steady.hpp"

namespace forch {

struct CoefficientValues {
  double beta = kNaN;          // sum_i F_i(S) g_i(xi_i), xi_i = |c_i| r^(1-n)
  double gamma = kNaN;         // sum_i F_i(S) g_i'(xi_i) xi_i
  double phi_coeff = kNaN;     // beta + gamma (computed independently)
  double lambda_drift = kNaN;  // drift scalar: b(x) = lambda(|x|) x
};

// Radial coefficient data consumed by the barrier and parabolic layers:
// diffusion matrix B = beta I + (gamma / r^2) x x^T with inverse A, drift
// b(x) = lambda(r) x whose gauge potential Lambda satisfies grad Lambda = b,
// and cumulative integrals of phi_coeff used by the barrier potentials.
class RadialCoefficients {
 public:
  virtual ~RadialCoefficients() = default;
  virtual int dim() const = 0;
  virtual double r_begin() const = 0;
  virtual double r_end() const = 0;
  virtual double beta(double r) const = 0;
  virtual double gamma(double r) const = 0;
  virtual double phi_coeff(double r) const = 0;
  virtual double lambda_drift(double r) const = 0;
  virtual double phi_prime(double r) const = 0;     // d(phi_coeff)/dr
  virtual double gauge_Lambda(double r) const = 0;  // int_{r0}^{r} z lambda(z) dz
  virtual double int_z_phi(double r) const = 0;     // int_{r0}^{r} z phi_coeff(z) dz
  virtual double int_phi(double r) const = 0;       // int_{r0}^{r} phi_coeff(z) dz
};

// Matrix and drift assembly shared by every radial coefficient source.
SquareMatrix matrix_B(const RadialCoefficients& f, const std::vector<double>& x);
SquareMatrix matrix_A(const RadialCoefficients& f, const std::vector<double>& x);
std::vector<double> vector_b(const RadialCoefficients& f, const std::vector<double>& x);

// Coefficient field of the linearization around a steady profile.  Immutable
// after construction; the cumulative quadrature caches (gauge and the two
// phi integrals) are anchored at the profile knots, so evaluators are pure
// and safe for concurrent use.
class CoefficientField : public RadialCoefficients {
 public:
  explicit CoefficientField(std::shared_ptr<const SteadyProfile> profile);

  const SteadyProfile& profile() const { return *prof_; }

  // r must lie in [r0, coverage].  Throws NumericError if the independently
  // assembled phi_coeff fails to match beta + gamma (transcription guard).
  CoefficientValues coeffs_at(double r) const;

  int dim() const override { return prof_->params().n; }
  double r_begin() const override { return prof_->r_begin(); }
  double r_end() const override { return prof_->coverage(); }
  double beta(double r) const override;
  double gamma(double r) const override;
  double phi_coeff(double r) const override;
  double lambda_drift(double r) const override;
  double phi_prime(double r) const override;
  double gauge_Lambda(double r) const override;
  double int_z_phi(double r) const override;
  double int_phi(double r) const override;

  // c = F1(S) G1'(u1*) V, extended by G1'(0) = g1(0) I when c1 = 0.
  std::vector<double> c_forcing(const std::vector<double>& x,
                                const std::vector<double>& V) const;

  // Radial specialization for V = nu r^(1-n) e_r:
  // c = c_r(r) e_r with c_r = F1(S) [g1(xi1) + g1'(xi1) xi1] nu r^(1-n).
  double c_forcing_radial(double r, double nu) const;

  // f0 = e^{-Lambda} div(A c) for the radial V above; closed form via the
  // chain rule through S'(r) = flux rhs and phi_prime.
  double forcing_f0_radial(double r, double nu) const;

 private:
  std::shared_ptr<const SteadyProfile> prof_;
  // Cumulative panel sums at the profile knots for the three integrands.
  std::vector<double> ks_;
  std::vector<double> cum_gauge_, cum_zphi_, cum_phi_;
  double cum_query(const std::vector<double>& cum, int which, double r) const;
  double integrand(int which, double z) const;
};

// Named constants of the stability machinery, all derived from the
// coefficient field restricted to [r0, R].
struct ConstantsPack {
  int n = 0;
  double r0 = kNaN, R = kNaN;
  double s_lower = kNaN, s_upper = kNaN;  // range of S on [r0, R]
  double mu1 = kNaN, mu2 = kNaN, mu3 = kNaN;
  double d0 = kNaN, d1 = kNaN, d2 = kNaN, d3 = kNaN, d4 = kNaN;
  double C0 = kNaN, C1 = kNaN, C2 = kNaN;
  double c0 = kNaN;  // norm-equivalence constant sqrt(n)
  double kappa0 = kNaN, kappa1 = kNaN, kappa2 = kNaN;
  double C3_growth = kNaN;  // kappa0 (n + C2)
  double C3_outer = kNaN;   // kappa1 (n + C2)
  double C3_shell = kNaN;   // kappa2 (n + C2)
  double C4 = kNaN;         // max{1, 8 C3_shell / (kappa2 e C0)}
  double C5 = kNaN;         // C3_shell C4
};

// Builds the pack on [r0, R], R in (r0, coverage].  The saturation range is
// scanned on a 1e4-point radius grid; the mu extrema use a 1e4-point
// saturation grid over [s_lower, s_upper] with a 1% conservative margin.
// Throws NumericError when the profile comes within twice the exit
// threshold of 0 or 1 on [r0, R] (boundedness assumption violation).
ConstantsPack constants(const CoefficientField& field, double R);

}  // namespace forch
