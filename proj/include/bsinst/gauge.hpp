#pragma once

#include <Eigen/Dense>

#include <optional>

#include "bsinst/models.hpp"

namespace bsinst {

class singular_radius_error : public std::domain_error {
 public:
  singular_radius_error(const std::string& what, double radius_)
      : std::domain_error(what), radius(radius_) {}
  double radius;
};

// Radial profile of a connection ansatz: one of the closed-form solution
// families, an arbitrary smooth function, or zero.
class RadialProfile {
 public:
  enum class Family { G2Solution, Spin7F, Spin7G, Explicit, Zero };

  RadialProfile() = default;
  static RadialProfile g2_solution(double C, double kappa = 1.0);
  static RadialProfile spin7_f(double D);
  static RadialProfile spin7_g(double C);
  static RadialProfile zero();
  static RadialProfile explicit_fn(RadialPtr fn);
  RadialProfile shifted(double delta) const;  // profile + delta

  double value(double r) const;
  double deriv(double r) const;
  RadialPtr radial() const { return fn_; }
  Family family() const { return family_; }
  bool is_zero() const { return family_ == Family::Zero; }
  double parameter() const { return param_; }
  // nonnegative radius where the denominator vanishes, if any
  std::optional<double> singular_radius() const;

 private:
  Family family_ = Family::Zero;
  double param_ = 0.0;
  double kappa_ = 1.0;
  RadialPtr fn_;
};

enum class BaseConnection { Zero, LeviCivitaPhi, SingularPhi };

struct GaugeConnection {
  ModelPtr model;
  BaseConnection base = BaseConnection::Zero;
  RadialProfile f;  // multiplies A1 (G2: Im(a conj(alpha)); Spin7: Im(conj(a) alpha))
  RadialProfile g;  // multiplies A2 = a omega conj(a) (G2 only)
  double r_min = 1e-2;
};

// Evaluation guard for singular bases and the 1/r profile family.
void check_domain(const GaugeConnection& conn, const Ptd& p);

FieldForm connection_form(const GaugeConnection& conn);
FieldForm curvature(const GaugeConnection& conn);  // F = dA + A ^ A

struct CurvatureDecomposition {
  std::vector<std::string> tags;
  std::vector<double> coefficients;
  std::vector<Form> basis;  // evaluated at the point
  double gram_min_eigenvalue = 0.0;
  Form assemble() const;
};
CurvatureDecomposition curvature_decomposition(const GaugeConnection& conn, const Ptd& p);

struct ResidualReport {
  std::vector<std::pair<std::string, double>> residuals;
  NormKind norm_kind = NormKind::Max;
  double radial = 0.0;
  std::uint64_t seed = 0;
  double max_residual() const;
  double get(const std::string& name) const;
};

// Connection with its numeric curvature and the model's fundamental data,
// built once and evaluated at many points.
struct GaugeSystem {
  GaugeConnection conn;
  FieldForm A;
  FieldForm F;
  FundamentalForms fund;
};
GaugeSystem make_system(const GaugeConnection& conn);

ResidualReport g2_instanton_residual(const GaugeSystem& sys, const Ptd& p);
ResidualReport spin7_instanton_residual(const GaugeSystem& sys, const Ptd& p);

struct TwoFormSpectrum {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd projector_low;
  Eigen::MatrixXd projector_high;
  int low_multiplicity = 0;
  int high_multiplicity = 0;
  double low_eigenvalue = 0.0;
  std::vector<std::pair<int, int>> basis;  // coframe index pairs
  MetricCoframe coframe;
};
TwoFormSpectrum two_form_spectrum(const StructureModel& model, const Ptd& p);

// Coordinates of an Im-H-valued 2-form in the spectrum's coframe basis:
// one column per imaginary unit. real_max reports the largest real part.
Eigen::MatrixXd two_form_coordinates(const Form& f, const TwoFormSpectrum& spec, const Ptd& p,
                                     double* real_max = nullptr);

// HYM residuals of a connection 1-form on the nearly Kaehler model.
ResidualReport hym_residual(const StructureModel& nk, const FieldForm& A, const Ptd& p);

struct LimitComparison {
  double coefficient = 0.0;        // c(rho) multiplying g tau g^-1
  double limit_coefficient = 0.0;  // -2/3
  double deviation = 0.0;          // cone dual norm of A(rho) - Atilde
};
LimitComparison limit_connection(double C, double rho, const Ptd& link_point);
double convergence_fit(std::span<const std::pair<double, double>> samples);

}  // namespace bsinst
