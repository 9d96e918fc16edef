#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bsinst/field.hpp"
#include "bsinst/form.hpp"

namespace bsinst {

// Radial function evaluable through two dual levels (exact first and second
// derivatives; the second is what d applied twice consumes).
class RadialFn {
 public:
  virtual ~RadialFn() = default;
  virtual double eval(double r) const = 0;
  virtual Dual1 eval(Dual1 r) const = 0;
  virtual Dual2 eval(Dual2 r) const = 0;
  double operator()(double r) const { return eval(r); }
  double deriv(double r) const { return eval(Dual1(r, 1.0)).der; }
};

using RadialPtr = std::shared_ptr<const RadialFn>;

template <class F>
RadialPtr make_radial(F f) {
  struct Impl final : RadialFn {
    F fn;
    explicit Impl(F g) : fn(std::move(g)) {}
    double eval(double r) const override { return fn(r); }
    Dual1 eval(Dual1 r) const override { return fn(r); }
    Dual2 eval(Dual2 r) const override { return fn(r); }
  };
  return std::make_shared<Impl>(std::move(f));
}

RadialPtr radial_constant(double c);
RadialPtr radial_scaled(RadialPtr a, double s);
RadialPtr radial_offset(RadialPtr a, double c);
// c * (1 + r)^p
RadialPtr radial_power(double c, double p);

// Coefficient field h(|a|^2) (bundle models) or h(rho) (cone model).
Field bundle_radial_field(RadialPtr h);
Field rho_radial_field(RadialPtr h);

enum class ModelName { G2Spinor, Spin7Spinor, NearlyKahlerTriple, G2Cone };

struct CoframeEntry {
  RadialPtr scale;
  FieldForm oneform;
};

// Orthonormal coframe of the base manifold plus the data needed to complete
// it to a basis of all generators (the vertical subset) and the calibrated
// orientation sign.
struct MetricCoframe {
  std::vector<CoframeEntry> entries;
  double orientation_sign = 1.0;
  std::vector<int> vertical;
  GenSetPtr gens;
  GenSetPtr ortho_gens;  // abstract orthonormal labels e1..en
  // radial parameter the scales are functions of
  enum class Param { BundleR, Rho, Unit } param = Param::BundleR;

  int dim() const { return static_cast<int>(entries.size()); }
  double radial_of(const Ptd& p) const;
  std::vector<Form> rows_at(const Ptd& p) const;  // scaled coframe forms
};

struct StructureModel {
  ModelName name;
  double kappa = 1.0;
  GenSetPtr gens;
  std::vector<Form> structure;                  // d(e_i), constant forms
  CoordKind coord_kind = CoordKind::FiberQuaternion;
  std::vector<std::pair<int, int>> coords;      // (seed coordinate, generator of dx^mu)
  std::vector<int> vertical;                    // generator indices
  std::map<std::string, FieldForm> canonical;   // named canonical field forms

  const FieldForm& form(const std::string& key) const;
  Form d_of_index(Mask I) const;                // d(e_I) by the Leibniz rule
};

using ModelPtr = std::shared_ptr<const StructureModel>;

ModelPtr build_model(ModelName name, double kappa);

FieldForm exterior_derivative(const FieldForm& f, const StructureModel& model);

// Bryant-Salamon radial profiles and their derivatives at r (= |a|^2).
struct BsProfiles {
  double f = 0, g = 0, sigma = 0, tau = 0;
  double fp = 0, gp = 0, sigmap = 0, taup = 0;
};
BsProfiles bs_profiles(ModelName name, double kappa, double r);
RadialPtr g2_f_radial(double kappa);
RadialPtr g2_g_radial();
RadialPtr spin7_sigma_radial();
RadialPtr spin7_tau_radial(double kappa);

// Fundamental form(s) and the orthonormal coframe. For G2 returns {gamma,
// *gamma}; for Spin(7) {Psi, Psi}.
struct FundamentalForms {
  FieldForm fund;
  FieldForm dual;
  MetricCoframe coframe;
};
FundamentalForms fundamental_form(const StructureModel& model);
// Same shapes with arbitrary profiles (general-profile derivative tests).
FundamentalForms g2_fundamental_with(const StructureModel& model, RadialPtr f, RadialPtr g);

class non_basic_error : public std::runtime_error {
 public:
  explicit non_basic_error(const std::string& what) : std::runtime_error(what) {}
};

// Hodge dual in the coframe's orthonormal basis, returned over the model's
// generators. Throws non_basic_error when the argument has vertical
// components above tolerance.
Form hodge_star(const Form& a, const MetricCoframe& cof, const Ptd& p, double tol = 1e-9);

// Coordinates of `a` in the orthonormal coframe (over cof.ortho_gens).
Form to_coframe(const Form& a, const MetricCoframe& cof, const Ptd& p,
                double basic_tol = -1.0);

enum class BasisChange { DaToAlpha, AlphaToDa, ThetaToOmegaPhiTau };
// Invertible substitution of generator 1-forms; point-dependent through a.
Form change_basis(const Form& a, const StructureModel& model, BasisChange dir, const Ptd& p);
GenSetPtr alpha_basis_gens(const StructureModel& model);
GenSetPtr omega_phi_tau_gens();

// Cone identification: a G2-bundle form evaluated at a = r g3 rewritten
// over the cone generator set (thetas + rho), with rho = 3(1+r^2)^(1/3).
Form g2_bundle_to_cone(const Form& a, double rho, const Quatd& g3, const GenSetPtr& cone_gens);

double rho_of_rsq_bundle(double r_bundle);  // rho = 3(1+r)^(1/3), r = |a|^2
double rsq_nk_of_rho(double rho);           // r^2 = (rho/3)^3 - 1

// Conical data at radius rho > 3 (limits and consistency residuals).
struct ConeStructure {
  Form gamma_con;       // conical limit of gamma
  Form star_gamma_con;  // conical limit of the dual
  double check_gamma_residual = 0;  // vs rho^2 drho ^ varpi + rho^3 Omega1
  double check_star_residual = 0;   // vs rho^3 drho ^ Omega2 - rho^4 varpi^2/2
  double hodge_residual = 0;        // star of gamma_con in the cone coframe
  // cone metric coefficients in the (drho, omega, tau) coframe
  double g_rho_rho = 1.0, g_omega = 0, g_tau = 0;
};
ConeStructure cone_structure(double rho);

// Full Bryant-Salamon metric in rho coordinates vs the cone metric: operator
// norm of g_con^{-1}(g_gamma - g_con); and the measured metric coefficients.
struct MetricAtRho {
  double g_rho_rho = 0, g_omega = 0, g_tau = 0;
};
MetricAtRho bs_metric_at_rho(double rho);
double metric_deviation(double rho);
// Least-squares slope of log(dev) vs log(rho), negated.
double decay_fit(std::span<const std::pair<double, double>> samples);

// Named structure residuals (d^2, closedness, NK and SU(3) relations).
std::map<std::string, double> structure_residuals(const StructureModel& model,
                                                  std::uint64_t seed, int samples);

// Random evaluation points per model: bundle fiber quaternions log-uniform in
// r, NK unit group elements.
Ptd random_point(const StructureModel& model, Rng& rng, double rmin = 1e-3, double rmax = 1e3);

}  // namespace bsinst
