#include "bsinst/gauge.hpp"

#include <cmath>

namespace bsinst {

namespace {

template <class S>
Quat<S> quat_const_lift(const Quatd& q) {
  return {S(q.w), S(q.x), S(q.y), S(q.z)};
}

template <class T>
T g2_denominator(T r, double C) {
  return (r + 1.0) * 3.0 + pow_real(r + 1.0, 1.0 / 3.0) * C;
}

template <class T>
T spin7_denominator(T r, double D) {
  return pow_real(r + 1.0, 0.6) * D + 1.0;
}

struct G2SolutionFn final : RadialFn {
  double C;
  explicit G2SolutionFn(double c) : C(c) {}
  template <class T>
  T do_eval(T r) const {
    T den = g2_denominator(r, C);
    if (std::abs(value(den)) < 1e-12) {
      throw singular_radius_error("profile denominator vanishes", value(r));
    }
    return T(2.0) / den;
  }
  double eval(double r) const override { return do_eval(r); }
  Dual1 eval(Dual1 r) const override { return do_eval(r); }
  Dual2 eval(Dual2 r) const override { return do_eval(r); }
};

struct Spin7FFn final : RadialFn {
  double D;
  explicit Spin7FFn(double d) : D(d) {}
  template <class T>
  T do_eval(T r) const {
    if (value(r) <= 0.0) throw std::domain_error("spin7 f profile requires r > 0");
    T den = spin7_denominator(r, D);
    if (std::abs(value(den)) < 1e-12) {
      throw singular_radius_error("profile denominator vanishes", value(r));
    }
    return T(1.0) / (r * den) +
           (r * 2.0 + 5.0) * D / (r * pow_real(r + 1.0, 0.4) * den * 5.0);
  }
  double eval(double r) const override { return do_eval(r); }
  Dual1 eval(Dual1 r) const override { return do_eval(r); }
  Dual2 eval(Dual2 r) const override { return do_eval(r); }
};

struct Spin7GFn final : RadialFn {
  double C;
  explicit Spin7GFn(double c) : C(c) {}
  template <class T>
  T do_eval(T r) const {
    T den = pow_real(r + 1.0, 0.6) * (5.0 * C) + 1.0;
    if (std::abs(value(den)) < 1e-12) {
      throw singular_radius_error("profile denominator vanishes", value(r));
    }
    return T(-3.0 * C) / (pow_real(r + 1.0, 0.4) * den);
  }
  double eval(double r) const override { return do_eval(r); }
  Dual1 eval(Dual1 r) const override { return do_eval(r); }
  Dual2 eval(Dual2 r) const override { return do_eval(r); }
};

}  // namespace

RadialProfile RadialProfile::g2_solution(double C, double kappa) {
  RadialProfile p;
  p.family_ = Family::G2Solution;
  p.param_ = C;
  p.kappa_ = kappa;
  p.fn_ = std::make_shared<G2SolutionFn>(C);
  return p;
}

RadialProfile RadialProfile::spin7_f(double D) {
  RadialProfile p;
  p.family_ = Family::Spin7F;
  p.param_ = D;
  p.fn_ = std::make_shared<Spin7FFn>(D);
  return p;
}

RadialProfile RadialProfile::spin7_g(double C) {
  RadialProfile p;
  p.family_ = Family::Spin7G;
  p.param_ = C;
  p.fn_ = std::make_shared<Spin7GFn>(C);
  return p;
}

RadialProfile RadialProfile::zero() {
  RadialProfile p;
  p.family_ = Family::Zero;
  p.fn_ = radial_constant(0.0);
  return p;
}

RadialProfile RadialProfile::explicit_fn(RadialPtr fn) {
  RadialProfile p;
  p.family_ = Family::Explicit;
  p.fn_ = std::move(fn);
  return p;
}

RadialProfile RadialProfile::shifted(double delta) const {
  RadialProfile p;
  p.family_ = Family::Explicit;
  p.fn_ = radial_offset(fn_, delta);
  return p;
}

double RadialProfile::value(double r) const { return fn_->eval(r); }
double RadialProfile::deriv(double r) const { return fn_->deriv(r); }

std::optional<double> RadialProfile::singular_radius() const {
  switch (family_) {
    case Family::G2Solution: {
      // 3(r+1) + C(r+1)^{1/3} = 0  =>  r = (-C/3)^{3/2} - 1
      if (param_ >= -3.0) return std::nullopt;
      return std::pow(-param_ / 3.0, 1.5) - 1.0;
    }
    case Family::Spin7F: {
      // 1 + D(1+r)^{3/5} = 0  =>  r = (-1/D)^{5/3} - 1, positive for D in (-1,0)
      if (param_ >= 0.0 || param_ <= -1.0) return std::nullopt;
      return std::pow(-1.0 / param_, 5.0 / 3.0) - 1.0;
    }
    case Family::Spin7G: {
      double c5 = 5.0 * param_;
      if (c5 >= 0.0 || c5 <= -1.0) return std::nullopt;
      return std::pow(-1.0 / c5, 5.0 / 3.0) - 1.0;
    }
    default: return std::nullopt;
  }
}

void check_domain(const GaugeConnection& conn, const Ptd& p) {
  double r = p.q.norm2();
  bool singular = conn.base == BaseConnection::SingularPhi ||
                  conn.f.family() == RadialProfile::Family::Spin7F;
  // relative slack keeps grid points placed exactly at r_min legal
  if (singular && r < conn.r_min * (1.0 - 1e-9)) {
    throw std::domain_error("evaluation below r_min for a singular base connection");
  }
}

FieldForm connection_form(const GaugeConnection& conn) {
  const StructureModel& m = *conn.model;
  FieldForm A(1, m.gens);
  if (m.name == ModelName::G2Spinor) {
    if (conn.base != BaseConnection::Zero)
      throw std::invalid_argument("G2 connections are built over the trivial base");
    if (!conn.f.is_zero()) A = A + m.form("A1").left_mul(bundle_radial_field(conn.f.radial()));
    if (!conn.g.is_zero()) A = A + m.form("A2").left_mul(bundle_radial_field(conn.g.radial()));
    return A;
  }
  if (m.name == ModelName::Spin7Spinor) {
    if (conn.base == BaseConnection::LeviCivitaPhi) A = A + m.form("phi");
    if (conn.base == BaseConnection::SingularPhi) A = A + m.form("phi_singular");
    if (!conn.f.is_zero()) A = A + m.form("A1").left_mul(bundle_radial_field(conn.f.radial()));
    return A;
  }
  throw std::invalid_argument("connection_form requires a bundle model");
}

FieldForm curvature(const GaugeConnection& conn) {
  FieldForm A = connection_form(conn);
  return exterior_derivative(A, *conn.model) + wedge(A, A);
}

Form CurvatureDecomposition::assemble() const {
  Form out;
  for (size_t i = 0; i < basis.size(); ++i) {
    Form t = basis[i].scaled(coefficients[i]);
    out = out.is_zero() ? t : out + t;
  }
  return out;
}

namespace {

double gram_min_eig(const std::vector<Form>& basis) {
  // Frobenius inner products of the coefficient vectors.
  size_t n = basis.size();
  Eigen::MatrixXd G(n, n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < n; ++j) {
      double dot = 0.0;
      for (const auto& ei : basis[i].entries()) {
        Quatd cj = basis[j].coeff(ei.mask);
        dot += ei.coeff.w * cj.w + ei.coeff.x * cj.x + ei.coeff.y * cj.y + ei.coeff.z * cj.z;
      }
      G(static_cast<long>(i), static_cast<long>(j)) = dot;
      G(static_cast<long>(j), static_cast<long>(i)) = dot;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  return es.eigenvalues().minCoeff();
}

// dr as the coordinate 1-form 2 sum_u a^u da^u.
Form dr_at(const StructureModel& m, const Ptd& p, int da_base) {
  std::vector<Form::Entry> ents;
  for (int u = 0; u < 4; ++u) {
    double c = 2.0 * p.q.component(u);
    ents.push_back({static_cast<Mask>(Mask(1) << (da_base + u)), Quatd(c)});
  }
  return Form::accumulate(1, m.gens, std::move(ents));
}

double effective_spin7_f(const GaugeConnection& conn, double r, double* fp_out) {
  double f = 0.0, fp = 0.0;
  if (!conn.f.is_zero()) {
    f = conn.f.value(r);
    fp = conn.f.deriv(r);
  }
  if (conn.base == BaseConnection::SingularPhi) {
    f += 1.0 / r;
    fp += -1.0 / (r * r);
  }
  if (fp_out) *fp_out = fp;
  return f;
}

}  // namespace

CurvatureDecomposition curvature_decomposition(const GaugeConnection& conn, const Ptd& p) {
  const StructureModel& m = *conn.model;
  CurvatureDecomposition out;
  double r = p.q.norm2();
  Quatd a = p.q, ab = a.conj();
  Form alpha = m.form("alpha").eval(p);
  Form alphab = alpha.conj();
  if (m.name == ModelName::G2Spinor) {
    Form omega = m.form("omega").eval(p);
    Form Omega = m.form("Omega").eval(p);
    Form A2 = m.form("A2").eval(p);
    out.tags = {"F1", "F2", "F3", "F4", "F5"};
    out.basis = {wedge(alpha, alphab).scaled(0.5),
                 wedge(alphab, alpha).scaled(0.5).sandwich(a),
                 Omega.sandwich(a),
                 wedge(dr_at(m, p, 6), A2),
                 wedge(alpha, omega).right_mul(ab) - wedge(omega, alphab).left_mul(a)};
    double f = conn.f.is_zero() ? 0.0 : conn.f.value(r);
    double fp = conn.f.is_zero() ? 0.0 : conn.f.deriv(r);
    double g = conn.g.is_zero() ? 0.0 : conn.g.value(r);
    double gp = conn.g.is_zero() ? 0.0 : conn.g.deriv(r);
    out.coefficients = {r * fp + 2.0 * f - r * f * f, -fp - f * f,
                        -m.kappa / 2.0 * f + 2.0 * r * g * g, gp + f * g, g - f * g * r};
  } else if (m.name == ModelName::Spin7Spinor) {
    if (conn.base == BaseConnection::Zero)
      throw std::invalid_argument("spin7 decomposition requires a phi-type base connection");
    Form Omega = m.form("Omega").eval(p);
    out.tags = {"F1", "F2", "F3"};
    out.basis = {Omega, wedge(alphab, alpha).scaled(0.5),
                 Form(wedge(alpha, alphab).scaled(0.5).left_mul(ab).right_mul(a))};
    double fp = 0.0;
    double f = effective_spin7_f(conn, r, &fp);
    out.coefficients = {m.kappa / 2.0 * (1.0 - r * f), r * fp + 2.0 * f - r * f * f,
                        -(fp + f * f)};
  } else {
    throw std::invalid_argument("curvature decomposition requires a bundle model");
  }
  out.gram_min_eigenvalue = gram_min_eig(out.basis);
  return out;
}

double ResidualReport::max_residual() const {
  double m = 0.0;
  for (const auto& [k, v] : residuals) m = std::max(m, v);
  return m;
}

double ResidualReport::get(const std::string& name) const {
  for (const auto& [k, v] : residuals) {
    if (k == name) return v;
  }
  throw std::invalid_argument("no residual named " + name);
}

GaugeSystem make_system(const GaugeConnection& conn) {
  GaugeSystem sys{conn, connection_form(conn), FieldForm(), fundamental_form(*conn.model)};
  sys.F = exterior_derivative(sys.A, *conn.model) + wedge(sys.A, sys.A);
  return sys;
}

ResidualReport g2_instanton_residual(const GaugeSystem& sys, const Ptd& p) {
  const StructureModel& m = *sys.conn.model;
  if (m.name != ModelName::G2Spinor)
    throw std::invalid_argument("g2_instanton_residual requires the G2 spinor model");
  ResidualReport rep;
  rep.radial = p.q.norm2();
  Form F = sys.F.eval(p);
  double fn = std::max(1.0, coefficient_norm(F));
  Form psi = sys.fund.dual.eval(p);
  Form gamma = sys.fund.fund.eval(p);
  rep.residuals.emplace_back("psi_wedge_F", coefficient_norm(wedge(psi, F)) / fn);
  Form starred = hodge_star(wedge(gamma, F), sys.fund.coframe, p);
  rep.residuals.emplace_back("star_gammaF_minus_F", coefficient_norm(starred - F) / fn);
  double r = rep.radial;
  BsProfiles bp = bs_profiles(ModelName::G2Spinor, m.kappa, r);
  double f = sys.conn.f.is_zero() ? 0.0 : sys.conn.f.value(r);
  double fp = sys.conn.f.is_zero() ? 0.0 : sys.conn.f.deriv(r);
  double g = sys.conn.g.is_zero() ? 0.0 : sys.conn.g.value(r);
  double gp = sys.conn.g.is_zero() ? 0.0 : sys.conn.g.deriv(r);
  // cancellation residuals, relative to the sizes of the cancelling terms
  double scale1 = std::max({1.0, std::abs(bp.sigma * g * g * r),
                            std::abs(bp.sigma * f * m.kappa / 4.0), std::abs(bp.tau * fp),
                            std::abs(bp.tau * f * f)});
  double scale2 = std::max({1.0, std::abs(bp.tau * (gp + f * g) * r / 3.0),
                            std::abs(bp.tau * g), std::abs(bp.tau * r * f * g)});
  rep.residuals.emplace_back(
      "profile_ode_coefficient_1",
      std::abs(bp.sigma * (g * g * r - f * m.kappa / 4.0) + bp.tau * (fp + f * f)) / scale1);
  rep.residuals.emplace_back(
      "profile_ode_coefficient_2",
      std::abs(bp.tau * ((gp + f * g) * r / 3.0 + (g - r * f * g))) / scale2);
  return rep;
}

ResidualReport spin7_instanton_residual(const GaugeSystem& sys, const Ptd& p) {
  const StructureModel& m = *sys.conn.model;
  if (m.name != ModelName::Spin7Spinor || sys.conn.base == BaseConnection::Zero)
    throw std::invalid_argument(
        "spin7_instanton_residual requires the Spin(7) model over a phi-type base");
  check_domain(sys.conn, p);
  ResidualReport rep;
  rep.radial = p.q.norm2();
  double r = rep.radial;
  Form F = sys.F.eval(p);
  double fn = std::max(1.0, coefficient_norm(F));
  Form Psi = sys.fund.fund.eval(p);
  Form starred = hodge_star(wedge(Psi, F), sys.fund.coframe, p);
  rep.residuals.emplace_back("instanton_numeric", coefficient_norm(starred - F) / fn);

  // closed-form route: Psi ^ F and *F assembled from the coefficient identities
  BsProfiles bp = bs_profiles(ModelName::Spin7Spinor, m.kappa, r);
  double fp = 0.0;
  double f = effective_spin7_f(sys.conn, r, &fp);
  double X = r * fp + 2.0 * f - r * f * f;
  double Y = fp + f * f;
  double s = bp.sigma, t = bp.tau, kap = m.kappa;
  Form alpha = m.form("alpha").eval(p);
  Form Omega = m.form("Omega").eval(p);
  Form B = m.form("B").eval(p);
  Form al0123 = m.form("Psi1").eval(p);
  Form w0123 = m.form("Psi3").eval(p);
  Form F3 = wedge(alpha, alpha.conj()).scaled(0.5).left_mul(p.q.conj()).right_mul(p.q);
  Form psiF = wedge(Omega, al0123).scaled(s * s * kap / 2.0 * (1.0 - r * f) - 2.0 * s * t * X) +
              wedge(B, w0123).scaled(-2.0 * s * t * kap / 2.0 * (1.0 - r * f) + t * t * X) +
              wedge(F3, w0123).scaled(-t * t * Y);
  Form starF = wedge(Omega, al0123).scaled(-s * s * kap / 2.0 * (1.0 - r * f)) +
               wedge(B, w0123).scaled(-t * t * X) + wedge(F3, w0123).scaled(-t * t * Y);
  rep.residuals.emplace_back("instanton_closed_form", coefficient_norm(psiF - starF) / fn);
  return rep;
}

TwoFormSpectrum two_form_spectrum(const StructureModel& model, const Ptd& p) {
  FundamentalForms ff = fundamental_form(model);
  TwoFormSpectrum spec;
  spec.coframe = ff.coframe;
  int n = ff.coframe.dim();
  std::vector<Form> rows = ff.coframe.rows_at(p);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) spec.basis.emplace_back(i, j);
  }
  int dim = static_cast<int>(spec.basis.size());
  Form fund = ff.fund.eval(p);
  Eigen::MatrixXd M(dim, dim);
  for (int col = 0; col < dim; ++col) {
    auto [i, j] = spec.basis[static_cast<size_t>(col)];
    Form beta = wedge(rows[static_cast<size_t>(i)], rows[static_cast<size_t>(j)]);
    Form starred = hodge_star(wedge(fund, beta), ff.coframe, p);
    Form coords = to_coframe(starred, ff.coframe, p);
    for (int row = 0; row < dim; ++row) {
      auto [pi, qi] = spec.basis[static_cast<size_t>(row)];
      Mask mask = static_cast<Mask>((Mask(1) << pi) | (Mask(1) << qi));
      M(row, col) = coords.coeff(mask).w;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
  spec.eigenvalues = es.eigenvalues();
  spec.low_eigenvalue = model.name == ModelName::Spin7Spinor ? -3.0 : -2.0;
  spec.projector_low = Eigen::MatrixXd::Zero(dim, dim);
  spec.projector_high = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    Eigen::VectorXd v = es.eigenvectors().col(k);
    if (std::abs(es.eigenvalues()(k) - spec.low_eigenvalue) < 0.5) {
      spec.projector_low += v * v.transpose();
      ++spec.low_multiplicity;
    } else {
      spec.projector_high += v * v.transpose();
      ++spec.high_multiplicity;
    }
  }
  return spec;
}

Eigen::MatrixXd two_form_coordinates(const Form& f, const TwoFormSpectrum& spec, const Ptd& p,
                                     double* real_max) {
  Form coords = to_coframe(f, spec.coframe, p);
  int dim = static_cast<int>(spec.basis.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, 3);
  double rm = 0.0;
  for (int row = 0; row < dim; ++row) {
    auto [i, j] = spec.basis[static_cast<size_t>(row)];
    Mask mask = static_cast<Mask>((Mask(1) << i) | (Mask(1) << j));
    Quatd c = coords.coeff(mask);
    out(row, 0) = c.x;
    out(row, 1) = c.y;
    out(row, 2) = c.z;
    rm = std::max(rm, std::abs(c.w));
  }
  if (real_max) *real_max = rm;
  return out;
}

ResidualReport hym_residual(const StructureModel& nk, const FieldForm& A, const Ptd& p) {
  if (nk.name != ModelName::NearlyKahlerTriple && nk.name != ModelName::G2Cone)
    throw std::invalid_argument("hym_residual requires the nearly Kaehler model");
  if (std::abs(norm(p.q) - 1.0) > 1e-12)
    throw std::invalid_argument("link points must be unit group elements");
  FieldForm Fff = exterior_derivative(A, nk) + wedge(A, A);
  Form F = Fff.eval(p);
  Form varpi = nk.form("varpi").eval(p);
  Form Om1 = nk.form("Omega1").eval(p);
  Form Om2 = nk.form("Omega2").eval(p);
  ResidualReport rep;
  rep.residuals.emplace_back("F_wedge_varpi2", coefficient_norm(wedge(F, wedge(varpi, varpi))));
  rep.residuals.emplace_back("F_wedge_Omega1", coefficient_norm(wedge(F, Om1)));
  rep.residuals.emplace_back("F_wedge_Omega2", coefficient_norm(wedge(F, Om2)));
  rep.residuals.emplace_back("F_norm", coefficient_norm(F));
  return rep;
}

LimitComparison limit_connection(double C, double rho, const Ptd& link_point) {
  if (rho <= 3.0) throw std::domain_error("limit comparison requires rho > 3");
  static const ModelPtr cone = build_model(ModelName::G2Cone, 1.0);
  LimitComparison out;
  out.coefficient = -2.0 * (std::pow(rho / 3.0, 3) - 1.0) /
                    (std::pow(rho, 3) / 9.0 + C * rho / 3.0);
  out.limit_coefficient = -2.0 / 3.0;
  Ptd p{link_point.q, rho};
  Form diff = cone->form("ad_tau").eval(p).scaled(out.coefficient - out.limit_coefficient);
  MetricCoframe cof = fundamental_form(*cone).coframe;
  Form coords = to_coframe(diff, cof, p);
  out.deviation = coefficient_norm(coords);
  return out;
}

double convergence_fit(std::span<const std::pair<double, double>> samples) {
  return decay_fit(samples);
}

}  // namespace bsinst
