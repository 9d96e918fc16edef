#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bsinst/gauge.hpp"

using namespace bsinst;

namespace {
ModelPtr g2_model() {
  static ModelPtr m = build_model(ModelName::G2Spinor, 1.0);
  return m;
}
ModelPtr s7_model() {
  static ModelPtr m = build_model(ModelName::Spin7Spinor, 1.0);
  return m;
}

GaugeConnection g2_conn(double C) {
  return {g2_model(), BaseConnection::Zero, RadialProfile::g2_solution(C),
          RadialProfile::zero(), 1e-2};
}
GaugeConnection s7_conn(double D) {
  return {s7_model(), BaseConnection::LeviCivitaPhi, RadialProfile::spin7_f(D),
          RadialProfile::zero(), 1e-2};
}
}  // namespace

TEST_CASE("zero connection is flat") {
  GaugeConnection conn{g2_model(), BaseConnection::Zero, RadialProfile::zero(),
                       RadialProfile::zero(), 1e-2};
  Rng rng(3);
  Ptd p{rng.fiber_quat(0.1, 10.0), 0.0};
  CHECK(connection_form(conn).eval(p).is_zero());
  CHECK(curvature(conn).eval(p).is_zero());
  GaugeSystem sys = make_system(conn);
  CHECK(g2_instanton_residual(sys, p).max_residual() == 0.0);
}

TEST_CASE("connection forms are Im-H valued and basic") {
  Rng rng(4);
  GaugeConnection conn{g2_model(), BaseConnection::Zero, RadialProfile::g2_solution(1.0),
                       RadialProfile::explicit_fn(radial_power(0.3, -0.5)), 1e-2};
  FieldForm A = connection_form(conn);
  for (int t = 0; t < 10; ++t) {
    Ptd p{rng.fiber_quat(1e-2, 1e2), 0.0};
    Form a = A.eval(p);
    CHECK(coefficient_norm(a.real()) < 1e-12 * std::max(1.0, coefficient_norm(a)));
    Form in_alpha = change_basis(a, *g2_model(), BasisChange::DaToAlpha, p);
    Mask phi_mask = (Mask(1) << 3) | (Mask(1) << 4) | (Mask(1) << 5);
    for (const auto& e : in_alpha.entries()) {
      if (e.mask & phi_mask)
        CHECK(norm(e.coeff) < 1e-12 * std::max(1.0, coefficient_norm(in_alpha)));
    }
  }
  // A1 at a = 1 equals -Im(alpha)
  Ptd p1{Quatd(1.0), 0.0};
  Form a1 = g2_model()->form("A1").eval(p1);
  Form malpha = g2_model()->form("alpha").eval(p1).imag().scaled(-1.0);
  CHECK(rel_residual(a1, malpha) < 1e-15);

  // over the Levi-Civita base the vertical part of A is exactly phi
  GaugeConnection c7{s7_model(), BaseConnection::LeviCivitaPhi, RadialProfile::spin7_f(1.0),
                     RadialProfile::zero(), 1e-2};
  FieldForm A7 = connection_form(c7);
  Ptd p7{rng.fiber_quat(0.1, 10.0), 0.0};
  Form in_alpha7 = change_basis(A7.eval(p7), *s7_model(), BasisChange::DaToAlpha, p7);
  for (int m = 0; m < 3; ++m) {
    Quatd c = in_alpha7.coeff(static_cast<Mask>(Mask(1) << (7 + m)));
    CHECK(norm(c - quat_unit(m + 1)) < 1e-12);
  }
}

TEST_CASE("spin7 base connections agree where they should") {
  // f = 1/r over the Levi-Civita base equals g = 0 over the singular base
  GaugeConnection cf = s7_conn(0.0);
  GaugeConnection cg{s7_model(), BaseConnection::SingularPhi, RadialProfile::zero(),
                     RadialProfile::zero(), 1e-2};
  FieldForm Af = connection_form(cf), Ag = connection_form(cg);
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    Ptd p{rng.fiber_quat(1e-2, 1e2), 0.0};
    CHECK(rel_residual(Af.eval(p), Ag.eval(p)) < 1e-13);
  }
  // base phi alone has curvature (kappa/2) Omega
  GaugeConnection base{s7_model(), BaseConnection::LeviCivitaPhi, RadialProfile::zero(),
                       RadialProfile::zero(), 1e-2};
  FieldForm F = curvature(base);
  Ptd p{rng.fiber_quat(0.5, 2.0), 0.0};
  CHECK(rel_residual(F.eval(p), s7_model()->form("Omega").eval(p).scaled(0.5)) < 1e-13);
}

TEST_CASE("r_min guards the singular base") {
  GaugeConnection cg{s7_model(), BaseConnection::SingularPhi, RadialProfile::zero(),
                     RadialProfile::zero(), 1e-2};
  Ptd low{Quatd(0.05), 0.0};  // r = 0.0025 < r_min
  CHECK_THROWS_AS(check_domain(cg, low), std::domain_error);
  GaugeSystem sys = make_system(cg);
  CHECK_THROWS_AS(spin7_instanton_residual(sys, low), std::domain_error);
}

TEST_CASE("curvature decomposition coefficients") {
  // C = 0, kappa = 1 at r = 0: the F2 coefficient is -(f' + f^2) = 2/9
  GaugeConnection conn = g2_conn(0.0);
  Rng rng(6);
  Ptd p0{1e-12 * rng.unit_quat(), 0.0};
  CurvatureDecomposition dec = curvature_decomposition(conn, p0);
  CHECK(dec.coefficients[1] == doctest::Approx(2.0 / 9.0).epsilon(1e-10));
  // finite-difference oracle for the same coefficient
  RadialProfile f = RadialProfile::g2_solution(0.0);
  double h = 1e-6;
  double fp_fd = (f.value(h) - f.value(0.0)) / h;
  CHECK(-(fp_fd + f.value(0.0) * f.value(0.0)) == doctest::Approx(2.0 / 9.0).epsilon(1e-5));
  // F4, F5 vanish when g = 0
  CHECK(dec.coefficients[3] == 0.0);
  CHECK(dec.coefficients[4] == 0.0);
  // Spin7 with f = 1/r: the Omega coefficient vanishes
  GaugeConnection s7c = s7_conn(0.0);
  Ptd p{rng.fiber_quat(0.5, 5.0), 0.0};
  CurvatureDecomposition dec7 = curvature_decomposition(s7c, p);
  CHECK(std::abs(dec7.coefficients[0]) < 1e-14);
  CHECK(dec.gram_min_eigenvalue > 0.0);
  CHECK(dec7.gram_min_eigenvalue > 0.0);
}

TEST_CASE("numeric curvature equals the closed-form decomposition") {
  Rng rng(7);
  for (double C : {-2.9, 0.0, 1.0}) {
    GaugeConnection conn = g2_conn(C);
    FieldForm F = curvature(conn);
    for (int t = 0; t < 10; ++t) {
      Ptd p{rng.fiber_quat(1e-3, 1e3), 0.0};
      CHECK(rel_residual(F.eval(p), curvature_decomposition(conn, p).assemble()) < 1e-10);
    }
  }
  // random (f, g) profiles exercise every term
  GaugeConnection conn{g2_model(), BaseConnection::Zero,
                       RadialProfile::explicit_fn(radial_power(0.8, -0.25)),
                       RadialProfile::explicit_fn(radial_power(0.4, -1.0)), 1e-2};
  FieldForm F = curvature(conn);
  for (int t = 0; t < 10; ++t) {
    Ptd p{rng.fiber_quat(1e-2, 1e2), 0.0};
    CHECK(rel_residual(F.eval(p), curvature_decomposition(conn, p).assemble()) < 1e-10);
  }
  for (double D : {0.0, 1.0}) {
    GaugeConnection c7 = s7_conn(D);
    FieldForm F7 = curvature(c7);
    for (int t = 0; t < 10; ++t) {
      Ptd p{rng.fiber_quat(1e-2, 1e2), 0.0};
      CHECK(rel_residual(F7.eval(p), curvature_decomposition(c7, p).assemble()) < 1e-10);
    }
  }
}

TEST_CASE("instanton residuals vanish on solutions and trip on non-solutions") {
  Rng rng(8);
  for (double C : {-2.9, 1.0, 10.0}) {
    GaugeSystem sys = make_system(g2_conn(C));
    for (double r : {0.0, 1.0, 50.0}) {
      Ptd p{std::sqrt(r) * rng.unit_quat(), 0.0};
      ResidualReport rep = g2_instanton_residual(sys, p);
      CHECK(rep.get("psi_wedge_F") < 1e-9);
      CHECK(rep.get("star_gammaF_minus_F") < 1e-8);
    }
  }
  GaugeSystem bad = make_system({g2_model(), BaseConnection::Zero,
                                 RadialProfile::g2_solution(1.0).shifted(0.1),
                                 RadialProfile::zero(), 1e-2});
  Ptd p1{rng.unit_quat(), 0.0};
  CHECK(g2_instanton_residual(bad, p1).get("psi_wedge_F") > 1e-3);

  for (double D : {0.0, 1.0, 10.0}) {
    GaugeSystem sys = make_system(s7_conn(D));
    for (double r : {0.01, 1.0, 100.0}) {
      Ptd p{std::sqrt(r) * rng.unit_quat(), 0.0};
      ResidualReport rep = spin7_instanton_residual(sys, p);
      CHECK(rep.get("instanton_numeric") < 1e-9);
      CHECK(rep.get("instanton_closed_form") < 1e-9);
    }
  }
  GaugeSystem bad7 = make_system({s7_model(), BaseConnection::LeviCivitaPhi,
                                  RadialProfile::explicit_fn(radial_constant(1.0)),
                                  RadialProfile::zero(), 1e-2});
  CHECK(spin7_instanton_residual(bad7, p1).get("instanton_numeric") > 1e-3);

  // the 6-form star stays available at extreme radii where the basis-change
  // cancellations run over large intermediates
  GaugeSystem far = make_system(s7_conn(1.0));
  Ptd pfar{std::sqrt(1000.0) * rng.unit_quat(), 0.0};
  CHECK(spin7_instanton_residual(far, pfar).get("instanton_numeric") < 1e-8);
}

TEST_CASE("non-flatness of the solution families") {
  Rng rng(9);
  Ptd p{rng.unit_quat(), 0.0};
  GaugeSystem g2s = make_system(g2_conn(0.0));
  CHECK(coefficient_norm(g2s.F.eval(p)) > 0.01);
  // D = 0 gives f = 1/r, for which every curvature coefficient vanishes
  // identically: the connection is flat away from the zero section
  GaugeSystem s70 = make_system(s7_conn(0.0));
  CHECK(coefficient_norm(s70.F.eval(p)) < 1e-13);
  GaugeSystem s71 = make_system(s7_conn(1.0));
  CHECK(coefficient_norm(s71.F.eval(p)) > 0.01);
  GaugeSystem s710 = make_system(s7_conn(10.0));
  CHECK(coefficient_norm(s710.F.eval(p)) > 0.01);
}

TEST_CASE("two-form spectra and projectors") {
  Rng rng(10);
  Ptd p{rng.fiber_quat(0.3, 3.0), 0.0};
  TwoFormSpectrum spec = two_form_spectrum(*g2_model(), p);
  CHECK(spec.low_multiplicity == 7);
  CHECK(spec.high_multiplicity == 14);
  for (int i = 0; i < spec.eigenvalues.size(); ++i) {
    double e = spec.eigenvalues(i);
    CHECK(std::min(std::abs(e + 2.0), std::abs(e - 1.0)) < 1e-9);
  }
  CHECK((spec.projector_low * spec.projector_low - spec.projector_low).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK((spec.projector_low * spec.projector_high).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((spec.projector_low + spec.projector_high - Eigen::MatrixXd::Identity(21, 21))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  GaugeSystem sys = make_system(g2_conn(1.0));
  double real_max = 0.0;
  Eigen::MatrixXd coords = two_form_coordinates(sys.F.eval(p), spec, p, &real_max);
  CHECK(real_max < 1e-12);
  CHECK((spec.projector_low * coords).norm() / coords.norm() < 1e-8);

  TwoFormSpectrum s7 = two_form_spectrum(*s7_model(), p);
  CHECK(s7.low_multiplicity == 7);
  CHECK(s7.high_multiplicity == 21);
  GaugeSystem sys7 = make_system(s7_conn(1.0));
  Eigen::MatrixXd c7 = two_form_coordinates(sys7.F.eval(p), s7, p);
  CHECK((s7.projector_low * c7).norm() / c7.norm() < 1e-8);
}

TEST_CASE("hym residuals on the nearly kaehler link") {
  ModelPtr nk = build_model(ModelName::NearlyKahlerTriple, 1.0);
  Rng rng(11);
  const FieldForm& At = nk->form("Atilde");
  for (int t = 0; t < 20; ++t) {
    Ptd p{rng.unit_quat(), 0.0};
    ResidualReport rep = hym_residual(*nk, At, p);
    CHECK(rep.get("F_wedge_varpi2") < 1e-10);
    CHECK(rep.get("F_wedge_Omega1") < 1e-10);
    CHECK(rep.get("F_wedge_Omega2") < 1e-10);
    CHECK(rep.get("F_norm") > 0.01);
  }
  Ptd p{rng.unit_quat(), 0.0};
  FieldForm zero(1, nk->gens);
  ResidualReport rep0 = hym_residual(*nk, zero, p);
  CHECK(rep0.get("F_norm") == 0.0);
  FieldForm wrong = nk->form("ad_tau").scaled(-1.0);
  ResidualReport repw = hym_residual(*nk, wrong, p);
  CHECK(std::max(repw.get("F_wedge_Omega1"), repw.get("F_wedge_Omega2")) > 1e-3);
  Ptd bad{Quatd{2.0, 0, 0, 0}, 0.0};
  CHECK_THROWS_AS(hym_residual(*nk, At, bad), std::invalid_argument);
}

TEST_CASE("limit connection and its convergence rate") {
  Ptd link{Quatd(1.0), 0.0};
  LimitComparison lc = limit_connection(1.0, 10.0, link);
  CHECK(std::abs(lc.coefficient - lc.limit_coefficient) ==
        doctest::Approx(2.0 * 19.0 / 1030.0).epsilon(1e-12));
  LimitComparison far = limit_connection(7.0, 1e7, link);
  CHECK(std::abs(far.coefficient + 2.0 / 3.0) < 1e-11);
  CHECK_THROWS_AS(limit_connection(1.0, 2.0, link), std::domain_error);

  Rng rng(12);
  for (double C : {1.0, 10.0}) {
    Ptd lp{rng.unit_quat(), 0.0};
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i < 12; ++i) {
      double rho = 10.0 * std::pow(100.0, i / 11.0);
      samples.emplace_back(rho, limit_connection(C, rho, lp).deviation);
    }
    CHECK(convergence_fit(samples) >= 2.9);
  }
}

TEST_CASE("profile singular radii") {
  CHECK(!RadialProfile::g2_solution(1.0).singular_radius());
  auto r = RadialProfile::g2_solution(-4.0).singular_radius();
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(std::pow(4.0 / 3.0, 1.5) - 1.0).epsilon(1e-14));
  auto rd = RadialProfile::spin7_f(-0.5).singular_radius();
  REQUIRE(rd.has_value());
  CHECK(*rd == doctest::Approx(std::pow(2.0, 5.0 / 3.0) - 1.0).epsilon(1e-14));
  CHECK_THROWS_AS(RadialProfile::g2_solution(-4.0).value(std::pow(4.0 / 3.0, 1.5) - 1.0),
                  singular_radius_error);
}
