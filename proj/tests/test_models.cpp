#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <future>

#include "bsinst/models.hpp"

using namespace bsinst;

namespace {
constexpr double kSqrt3 = 1.7320508075688772;

Ptd bundle_point(Rng& rng, double r) { return Ptd{std::sqrt(r) * rng.unit_quat(), 0.0}; }
}  // namespace

TEST_CASE("model construction") {
  ModelPtr g2 = build_model(ModelName::G2Spinor, 1.0);
  CHECK(g2->gens->size() == 10);
  ModelPtr s7 = build_model(ModelName::Spin7Spinor, 1.0);
  CHECK(s7->gens->size() == 14);
  ModelPtr nk = build_model(ModelName::NearlyKahlerTriple, 1.0);
  CHECK(nk->gens->size() == 9);
  ModelPtr cone = build_model(ModelName::G2Cone, 1.0);
  CHECK(cone->gens->size() == 10);
  CHECK_THROWS_AS(build_model(ModelName::G2Spinor, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_model(ModelName::G2Spinor, -2.0), std::invalid_argument);
}

TEST_CASE("structure equations close") {
  for (double kappa : {1.0, 2.0}) {
    ModelPtr g2 = build_model(ModelName::G2Spinor, kappa);
    // d(da^0) = 0
    CHECK(g2->structure[6].is_zero());
    // d(phi) = -phi^phi - (kappa/2) Omega on the first component
    Form phi = g2->form("phi").eval(Ptd{Quatd(1.0), 0.0});
    Form Omega = g2->form("Omega").eval(Ptd{Quatd(1.0), 0.0});
    Form expect = wedge(phi, phi).scaled(-1.0) - Omega.scaled(kappa / 2.0);
    Form dphi1 = g2->structure[3];
    CHECK(rel_residual(dphi1, Form(2, g2->gens,
                                   [&] {
                                     std::vector<Form::Entry> e;
                                     for (const auto& en : expect.entries())
                                       e.push_back({en.mask, Quatd(en.coeff.x)});
                                     return e;
                                   }())) < 1e-15);
    auto res = structure_residuals(*g2, 20250810u, 10);
    CHECK(res.at("d2_generators") < 1e-10);
  }
  auto res7 = structure_residuals(*build_model(ModelName::Spin7Spinor, 1.5), 1u, 10);
  CHECK(res7.at("d2_generators") < 1e-10);
  auto resnk = structure_residuals(*build_model(ModelName::NearlyKahlerTriple, 1.0), 2u, 10);
  CHECK(resnk.at("d2_generators") < 1e-12);
}

TEST_CASE("exterior derivative reproduces the closed form of dA1") {
  double kappa = 1.3;
  ModelPtr g2 = build_model(ModelName::G2Spinor, kappa);
  const FieldForm& A1 = g2->form("A1");
  FieldForm dA1 = exterior_derivative(A1, *g2);
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    Ptd p{rng.fiber_quat(1e-3, 1e3), 0.0};
    Form alpha = g2->form("alpha").eval(p);
    Form Omega = g2->form("Omega").eval(p);
    Form rhs = wedge(alpha, alpha.conj()) - Omega.sandwich(p.q).scaled(kappa / 2.0);
    CHECK(rel_residual(dA1.eval(p), rhs) < 1e-12);
  }
}

TEST_CASE("d applied twice annihilates point-dependent canonical forms") {
  // exercises the nested dual-number partials end to end
  ModelPtr g2 = build_model(ModelName::G2Spinor, 1.7);
  Rng rng(55);
  for (const char* key : {"A1", "A2", "B", "gamma2", "psi2"}) {
    FieldForm dd = exterior_derivative(exterior_derivative(g2->form(key), *g2), *g2);
    for (int t = 0; t < 5; ++t) {
      Ptd p{rng.fiber_quat(1e-3, 1e3), 0.0};
      double scale = std::max(1.0, coefficient_norm(g2->form(key).eval(p)));
      CHECK(coefficient_norm(dd.eval(p)) < 1e-10 * scale);
    }
  }
  // radial coefficients run through second derivatives of the profiles
  FundamentalForms ff = fundamental_form(*g2);
  FieldForm ddg = exterior_derivative(exterior_derivative(ff.fund, *g2), *g2);
  for (int t = 0; t < 5; ++t) {
    Ptd p{rng.fiber_quat(1e-2, 1e2), 0.0};
    CHECK(coefficient_norm(ddg.eval(p)) <
          1e-10 * std::max(1.0, coefficient_norm(ff.fund.eval(p))));
  }
  // a third derivative is out of contract
  FieldForm dddg = exterior_derivative(ddg, *g2);
  Ptd p{rng.unit_quat(), 0.0};
  CHECK_THROWS_AS(dddg.eval(p), std::logic_error);
}

TEST_CASE("dr identity and finite-difference cross-check of partials") {
  ModelPtr g2 = build_model(ModelName::G2Spinor, 1.0);
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    Ptd p{rng.fiber_quat(1e-2, 1e2), 0.0};
    Form alpha = g2->form("alpha").eval(p);
    Form rhs = alpha.right_mul(p.q.conj()) + alpha.conj().left_mul(p.q);
    CHECK(rel_residual(g2->form("dr").eval(p), rhs) < 1e-12);
  }
  // central finite differences at step 1e-5 agree with the exact partials
  const FieldForm& A2 = g2->form("A2");
  Ptd p{rng.fiber_quat(0.5, 2.0), 0.0};
  for (const auto& e : A2.entries()) {
    for (int u = 0; u < 4; ++u) {
      Quatd exact = quat_deriv(e.field->eval(seed_point(p, u, CoordKind::FiberQuaternion)));
      double h = 1e-5;
      Ptd pp = p, pm = p;
      double* comps_p[4] = {&pp.q.w, &pp.q.x, &pp.q.y, &pp.q.z};
      double* comps_m[4] = {&pm.q.w, &pm.q.x, &pm.q.y, &pm.q.z};
      *comps_p[u] += h;
      *comps_m[u] -= h;
      Quatd fd = (1.0 / (2.0 * h)) * (e.field->eval(pp) - e.field->eval(pm));
      CHECK(norm(exact - fd) < 1e-6 * std::max(1.0, norm(exact)));
    }
  }
}

TEST_CASE("top-degree forms factor through B and Omega") {
  // gamma1 = -(1/6) omega^3, Psi1 = -(1/6) B^2, Psi3 = -(1/6) Omega^2
  ModelPtr g2 = build_model(ModelName::G2Spinor, 1.0);
  Rng rng(44);
  Ptd p{rng.fiber_quat(0.2, 5.0), 0.0};
  Form w = g2->form("omega").eval(p);
  Form w3 = wedge(wedge(w, w), w).scaled(-1.0 / 6.0);
  CHECK(rel_residual(g2->form("gamma1").eval(p), w3) < 1e-14);

  ModelPtr s7 = build_model(ModelName::Spin7Spinor, 1.0);
  Ptd p7{rng.fiber_quat(0.2, 5.0), 0.0};
  // for even-degree Im-valued forms the quaternionic square is +6 times the
  // top form (q_b^2 = -1 on the diagonal, cross terms cancel), while the
  // component square sum carries the -1/6 normalization
  Form B = s7->form("B").eval(p7);
  CHECK(rel_residual(s7->form("Psi1").eval(p7), wedge(B, B).scaled(1.0 / 6.0)) < 1e-13);
  Form Om = s7->form("Omega").eval(p7);
  CHECK(rel_residual(s7->form("Psi3").eval(p7), wedge(Om, Om).scaled(1.0 / 6.0)) < 1e-14);
  auto comp_sq_sum = [&](const Form& f2) {
    Form acc(4, f2.generators());
    for (int b = 1; b <= 3; ++b) {
      std::vector<Form::Entry> ents;
      for (const auto& e : f2.entries()) ents.push_back({e.mask, Quatd(e.coeff.component(b))});
      Form comp = Form::accumulate(2, f2.generators(), std::move(ents));
      acc = acc + wedge(comp, comp);
    }
    return acc;
  };
  CHECK(rel_residual(s7->form("Psi1").eval(p7), comp_sq_sum(B).scaled(-1.0 / 6.0)) < 1e-13);
  CHECK(rel_residual(s7->form("Psi3").eval(p7), comp_sq_sum(Om).scaled(-1.0 / 6.0)) < 1e-14);
  // and the component expansion of B itself
  Form alpha = s7->form("alpha").eval(p7);
  CHECK(rel_residual(B, wedge(alpha.conj(), alpha).scaled(0.5)) == 0.0);
}

TEST_CASE("bryant-salamon profiles") {
  BsProfiles p = bs_profiles(ModelName::G2Spinor, 1.0, 0.0);
  CHECK(p.f == doctest::Approx(std::sqrt(3.0)));
  CHECK(p.g == doctest::Approx(2.0));
  CHECK(-1.0 * p.sigma / (4.0 * p.tau) == doctest::Approx(1.0 / 3.0));
  BsProfiles s = bs_profiles(ModelName::Spin7Spinor, 1.0, 0.0);
  CHECK(s.sigma == doctest::Approx(4.0));
  CHECK(s.tau == doctest::Approx(5.0));
  BsProfiles s2 = bs_profiles(ModelName::Spin7Spinor, 2.0, 0.0);
  CHECK(s2.tau == doctest::Approx(10.0));
  CHECK_THROWS_AS(bs_profiles(ModelName::G2Spinor, 1.0, -0.5), std::domain_error);
  // tau is negative in the G2 dual expansion
  CHECK(bs_profiles(ModelName::G2Spinor, 1.0, 3.0).tau < 0.0);
}

TEST_CASE("fundamental forms are closed and reproduce the r = 0 expansion") {
  for (double kappa : {1.0, 2.0}) {
    ModelPtr g2 = build_model(ModelName::G2Spinor, kappa);
    auto res = structure_residuals(*g2, 99u, 15);
    CHECK(res.at("d_gamma") < 1e-10);
    CHECK(res.at("d_star_gamma") < 1e-10);
    CHECK(res.at("basic_forms") < 1e-12);
  }
  ModelPtr g2 = build_model(ModelName::G2Spinor, 1.0);
  FundamentalForms ff = fundamental_form(*g2);
  Rng rng(8);
  Ptd p0{1e-9 * rng.unit_quat(), 0.0};  // effectively r = 0
  Form psi = ff.dual.eval(p0);
  Form expect = g2->form("psi1").eval(p0).scaled(16.0) + g2->form("psi2").eval(p0).scaled(-12.0);
  CHECK(rel_residual(psi, expect) < 1e-7);

  ModelPtr s7 = build_model(ModelName::Spin7Spinor, 1.0);
  auto res7 = structure_residuals(*s7, 100u, 15);
  CHECK(res7.at("d_Psi") < 1e-10);
  CHECK(res7.at("basic_forms") < 1e-12);
}

TEST_CASE("general profile derivative formulas and the closedness sensor") {
  double kappa = 1.0;
  ModelPtr g2 = build_model(ModelName::G2Spinor, kappa);
  RadialPtr f = make_radial([](auto r) { return pow_real(r + 1.0, -0.5) * 0.7 + 0.4; });
  RadialPtr g = make_radial([](auto r) { return pow_real(r + 1.0, 0.25) * 0.3 + 0.2; });
  FundamentalForms ff = g2_fundamental_with(*g2, f, g);
  FieldForm dfund = exterior_derivative(ff.fund, *g2);
  FieldForm ddual = exterior_derivative(ff.dual, *g2);
  Rng rng(9);
  for (int t = 0; t < 10; ++t) {
    Ptd p{rng.fiber_quat(1e-2, 1e2), 0.0};
    double r = p.q.norm2();
    Dual1 fd = f->eval(Dual1(r, 1.0)), gd = g->eval(Dual1(r, 1.0));
    Form dr = g2->form("dr").eval(p);
    Form rhs = wedge(dr, g2->form("gamma1").eval(p))
                   .scaled((fd * fd * fd).der - 0.75 * kappa * fd.val * gd.val * gd.val) +
               wedge(dr, g2->form("gamma2").eval(p)).scaled((fd * gd * gd).der);
    CHECK(rel_residual(dfund.eval(p), rhs) < 1e-9);
    Form rhs2 = wedge(dr, g2->form("psi2").eval(p))
                    .scaled(-(fd * fd * gd * gd).der + 0.25 * kappa * std::pow(gd.val, 4));
    CHECK(rel_residual(ddual.eval(p), rhs2) < 1e-9);
  }
  // 1.01 f perturbation has to produce a visible d(gamma) at r = 1
  FundamentalForms bad = g2_fundamental_with(*g2, radial_scaled(g2_f_radial(kappa), 1.01),
                                              g2_g_radial());
  FieldForm dbad = exterior_derivative(bad.fund, *g2);
  Ptd p1{rng.unit_quat(), 0.0};
  CHECK(coefficient_norm(dbad.eval(p1)) > 1e-3);
}

TEST_CASE("hodge star calibrations") {
  ModelPtr g2 = build_model(ModelName::G2Spinor, 1.0);
  FundamentalForms ff = fundamental_form(*g2);
  Rng rng(10);
  for (int t = 0; t < 5; ++t) {
    Ptd p{rng.fiber_quat(1e-2, 1e2), 0.0};
    CHECK(rel_residual(hodge_star(ff.fund.eval(p), ff.coframe, p), ff.dual.eval(p)) < 1e-12);
    std::vector<Form> rows = ff.coframe.rows_at(p);
    Form beta = wedge(rows[0], rows[4]).left_mul(rng.gauss_quat()) +
                wedge(rows[2], rows[6]).left_mul(rng.gauss_quat());
    CHECK(rel_residual(hodge_star(hodge_star(beta, ff.coframe, p), ff.coframe, p), beta) < 1e-11);
  }
  // vertical legs are rejected
  Ptd p{rng.unit_quat(), 0.0};
  Form vert = wedge(generator_form(g2->gens, 3), generator_form(g2->gens, 0));
  CHECK_THROWS_AS(hodge_star(vert, ff.coframe, p, 1e-9), non_basic_error);

  // the star is an isometry of the coefficient Frobenius norm in coframe
  // coordinates
  for (int t = 0; t < 5; ++t) {
    Ptd pq{rng.fiber_quat(0.05, 20.0), 0.0};
    std::vector<Form> rows = ff.coframe.rows_at(pq);
    Form beta(2, g2->gens);
    for (int i = 0; i < 7; ++i)
      for (int j = i + 1; j < 7; ++j)
        beta = beta + wedge(rows[static_cast<size_t>(i)], rows[static_cast<size_t>(j)])
                          .left_mul(rng.gauss_quat());
    double before = coefficient_norm(to_coframe(beta, ff.coframe, pq), NormKind::Frobenius);
    Form starred = hodge_star(beta, ff.coframe, pq);
    double after = coefficient_norm(to_coframe(starred, ff.coframe, pq), NormKind::Frobenius);
    CHECK(std::abs(after - before) < 1e-12 * std::max(1.0, before));
  }

  ModelPtr s7 = build_model(ModelName::Spin7Spinor, 1.0);
  FundamentalForms f7 = fundamental_form(*s7);
  for (int t = 0; t < 5; ++t) {
    Ptd p7{rng.fiber_quat(1e-2, 1e2), 0.0};
    double r = p7.q.norm2();
    BsProfiles bp = bs_profiles(ModelName::Spin7Spinor, 1.0, r);
    Form w = s7->form("omega").eval(p7);
    Form wbw = wedge(w.conj(), w);
    Form rhs = wedge(wbw, s7->form("Psi1").eval(p7)).scaled(-bp.sigma * bp.sigma);
    CHECK(rel_residual(hodge_star(wbw, f7.coframe, p7), rhs) < 1e-11);
    // Psi is self-dual
    Form Psi = f7.fund.eval(p7);
    CHECK(rel_residual(hodge_star(Psi, f7.coframe, p7), Psi) < 1e-11);
  }
}

TEST_CASE("change of basis") {
  ModelPtr g2 = build_model(ModelName::G2Spinor, 1.0);
  FundamentalForms ff = fundamental_form(*g2);
  Rng rng(12);
  Ptd p{rng.fiber_quat(0.1, 10.0), 0.0};
  Form gamma = ff.fund.eval(p);
  Form in_alpha = change_basis(gamma, *g2, BasisChange::DaToAlpha, p);
  // phi legs vanish to roundoff: gamma is basic
  Mask phi_mask = (Mask(1) << 3) | (Mask(1) << 4) | (Mask(1) << 5);
  for (const auto& e : in_alpha.entries()) {
    if (e.mask & phi_mask)
      CHECK(norm(e.coeff) < 1e-10 * std::max(1.0, coefficient_norm(gamma)));
  }
  Form back = change_basis(in_alpha, *g2, BasisChange::AlphaToDa, p);
  CHECK(rel_residual(back, gamma) < 1e-14);

  // dr ^ A2 = 2 alpha^0 ^ omega at a = 1
  Ptd pa{Quatd(1.0), 0.0};
  Form lhs = wedge(g2->form("dr").eval(pa), g2->form("A2").eval(pa));
  Form alpha = g2->form("alpha").eval(pa);
  Form alpha0 = Form(1, g2->gens, [&] {
    std::vector<Form::Entry> e;
    for (const auto& en : alpha.entries()) e.push_back({en.mask, Quatd(en.coeff.w)});
    return e;
  }());
  Form rhs = wedge(alpha0, g2->form("omega").eval(pa)).scaled(2.0);
  CHECK(rel_residual(lhs, rhs) < 1e-14);
}

TEST_CASE("nearly kaehler structure constants") {
  ModelPtr nk = build_model(ModelName::NearlyKahlerTriple, 1.0);
  auto res = structure_residuals(*nk, 77u, 4);
  CHECK(res.at("d_varpi_minus_3Omega1") < 1e-12);
  CHECK(res.at("d_Omega2_plus_2varpi_sq") < 1e-12);
  CHECK(res.at("varpi_wedge_Omega1") < 1e-14);
  CHECK(res.at("varpi_wedge_Omega2") < 1e-14);
  CHECK(res.at("su3_vol_varpi_cubed") < 1e-14);
  CHECK(res.at("su3_vol_Omega_pair") < 1e-14);
  CHECK(res.at("half_varpi_sq") < 1e-14);
  CHECK(res.at("Omega1_eta_identity") < 1e-14);
  CHECK(res.at("Omega2_eta_identity") < 1e-14);

  // dvol = + (1/(3 sqrt3)) (2/3)^3 w123 ^ t123 (the sign is
  // forced by varpi^3/3! = dvol and d(varpi) = 3 Omega1)
  Ptd p{Quatd(1.0), 0.0};
  Form dvol = nk->form("dvol").eval(p);
  Form varpi = nk->form("varpi").eval(p);
  Form v6 = wedge(varpi, wedge(varpi, varpi)).scaled(1.0 / 6.0);
  CHECK(rel_residual(dvol, v6) < 1e-15);
  double c = (1.0 / (3.0 * kSqrt3)) * std::pow(2.0 / 3.0, 3);
  CHECK(coefficient_norm(dvol) == doctest::Approx(c));
}

TEST_CASE("cone structure and radial identification") {
  CHECK(rsq_nk_of_rho(3.0) == doctest::Approx(0.0));
  CHECK(rho_of_rsq_bundle(0.0) == doctest::Approx(3.0));
  ConeStructure cs = cone_structure(6.0);
  CHECK(cs.check_gamma_residual < 1e-13);
  CHECK(cs.check_star_residual < 1e-13);
  CHECK(cs.hodge_residual < 1e-12);
  CHECK(cs.g_tau == doctest::Approx(16.0));
  // gamma_con drho part carries 2/(3 sqrt 3) rho^2 Re(omega ^ tau)
  ModelPtr cone = build_model(ModelName::G2Cone, 1.0);
  Ptd p{Quatd(1.0), 6.0};
  Form omega = cone->form("omega").eval(p);
  Form tau = cone->form("tau").eval(p);
  Form drho = generator_form(cone->gens, 9);
  Form drho_part = wedge(drho, wedge(omega, tau).real()).scaled(2.0 / (3.0 * kSqrt3) * 36.0);
  Form gamma_con = cone->form("gamma_con").eval(p);
  for (const auto& e : drho_part.entries()) {
    CHECK(norm(gamma_con.coeff(e.mask) - e.coeff) < 1e-13);
  }
  CHECK_THROWS_AS(cone_structure(2.0), std::domain_error);
}

TEST_CASE("metric deviation and decay fit") {
  MetricAtRho m = bs_metric_at_rho(6.0);
  CHECK(m.g_rho_rho == doctest::Approx(8.0 / 7.0).epsilon(1e-12));
  CHECK(m.g_tau == doctest::Approx(14.0).epsilon(1e-12));
  CHECK(m.g_omega == doctest::Approx(12.0).epsilon(1e-12));
  std::vector<std::pair<double, double>> samples;
  for (int i = 0; i < 12; ++i) {
    double rho = 10.0 * std::pow(100.0, i / 11.0);
    samples.emplace_back(rho, metric_deviation(rho));
  }
  double expn = decay_fit(samples);
  CHECK(std::abs(expn - 3.0) < 0.05);
  for (size_t i = 0; i + 1 < samples.size(); ++i) CHECK(samples[i + 1].second < samples[i].second);
  CHECK_THROWS_AS(metric_deviation(3.0), std::domain_error);
  std::vector<std::pair<double, double>> few(samples.begin(), samples.begin() + 5);
  CHECK_THROWS_AS(decay_fit(few), std::invalid_argument);
}

TEST_CASE("models evaluate safely from concurrent threads") {
  ModelPtr g2 = build_model(ModelName::G2Spinor, 1.0);
  FundamentalForms ff = fundamental_form(*g2);
  FieldForm dgamma = exterior_derivative(ff.fund, *g2);
  auto worker = [&](std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      Ptd p{rng.fiber_quat(1e-2, 1e2), 0.0};
      worst = std::max(worst, coefficient_norm(dgamma.eval(p)));
    }
    return worst;
  };
  std::vector<std::future<double>> jobs;
  for (std::uint64_t s = 1; s <= 4; ++s)
    jobs.push_back(std::async(std::launch::async, worker, s));
  for (auto& j : jobs) CHECK(j.get() < 1e-10);
}

TEST_CASE("nk point validation and ad-equivariance") {
  Rng rng(14);
  for (int t = 0; t < 30; ++t) {
    Quatd g = rng.unit_quat(), h = rng.unit_quat();
    Quatd q = rng.gauss_quat().imag();
    Quatd lhs = (h * g) * q * (h * g).conj();
    Quatd rhs = h * (g * q * g.conj()) * h.conj();
    CHECK(norm(lhs - rhs) < 1e-13 * std::max(1.0, norm(q)));
    CHECK(std::abs(norm(rng.unit_quat()) - 1.0) < 1e-12);
  }
  (void)bundle_point;
}
