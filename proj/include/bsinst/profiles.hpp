#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bsinst/gauge.hpp"

namespace bsinst {

// Scalar Riccati data f' + p(r) f + q(r) f^2 = s(r) on [r0, r1].
struct RiccatiSpec {
  std::function<double(double)> p, q, s;
  double r0 = 0.0;
  double r1 = 50.0;
};

RiccatiSpec g2_riccati();          // f' + f^2 + (1/3)(1/(1+r)) f = 0
RiccatiSpec spin7_f_riccati();     // inhomogeneous: f' + p f - f^2 = 2/(5 r (1+r)), r > 0
RiccatiSpec spin7_g_riccati();     // g' + (2/(5(1+r))) g - g^2 = 0

enum class ClosedFormFamily { G2, Spin7F, Spin7G };

// Closed-form value and analytic derivative; throws singular_radius_error at
// denominator roots.
std::pair<double, double> closed_form(ClosedFormFamily family, double parameter, double r);

double ode_residual(const RiccatiSpec& spec, const std::function<double(double)>& f,
                    const std::function<double(double)>& fp, std::span<const double> grid);

// Residuals of the coupled G2 system for a candidate pair (f, g).
struct CoupledResidual {
  double f_equation = 0.0;
  double g_equation = 0.0;
};
CoupledResidual coupled_g2_residual(const std::function<double(double)>& f,
                                    const std::function<double(double)>& fp,
                                    const std::function<double(double)>& g,
                                    const std::function<double(double)>& gp, double kappa,
                                    std::span<const double> grid);

struct IntegratorConfig {
  double h = 1e-3;
  double r0 = 0.0;
  double r1 = 50.0;
};

struct TrajectorySample {
  std::vector<double> r;
  std::vector<double> f;
  double error_estimate = 0.0;            // from step halving
  std::optional<double> blow_up_radius;   // set when the state left the finite range
};

TrajectorySample integrate(const RiccatiSpec& spec, double f0, const IntegratorConfig& config);

// Coupled G2 system (f, g); r0 must be positive because of the 3/r term.
struct CoupledTrajectory {
  std::vector<double> r;
  std::vector<double> f;
  std::vector<double> g;
};
CoupledTrajectory integrate_coupled_g2(double f0, double g0, double kappa,
                                       const IntegratorConfig& config);

// Homogeneous Riccati (s = 0, q = +-1) reduced to y'' + p y' = 0 for
// p = c/(1+r); the basis is y = B + A (1+r)^{1-c} up to scale.
struct LinearizedRiccati {
  double c = 0.0;          // p(r) = c / (1+r)
  double q_sign = 1.0;     // f = q_sign * y' / y
  std::function<double(double)> y_basis;    // (1+r)^{1-c}/(1-c), the nonconstant branch
  std::function<double(double)> yp_basis;   // (1+r)^{-c}
  // f reconstructed from C1 * basis + C2, matched so f(r_match) = f_match.
  std::function<double(double)> reconstruct(double f_match, double r_match) const;
};
LinearizedRiccati linearize(const RiccatiSpec& spec);

// Denominator roots of the closed-form families over [r_lo, r_hi].
struct SingularityHit {
  double parameter;
  std::vector<double> roots;
};
std::vector<SingularityHit> singularity_scan(ClosedFormFamily family,
                                             std::span<const double> parameters, double r_lo,
                                             double r_hi);

}  // namespace bsinst
