#include "bsinst/profiles.hpp"

#include <cmath>

namespace bsinst {

namespace {

double denominator(ClosedFormFamily family, double parameter, double r) {
  switch (family) {
    case ClosedFormFamily::G2:
      return 3.0 * (r + 1.0) + parameter * std::cbrt(r + 1.0);
    case ClosedFormFamily::Spin7F:
      return 1.0 + parameter * std::pow(1.0 + r, 0.6);
    case ClosedFormFamily::Spin7G:
      return 1.0 + 5.0 * parameter * std::pow(1.0 + r, 0.6);
  }
  return 0.0;
}

RadialProfile profile_of(ClosedFormFamily family, double parameter) {
  switch (family) {
    case ClosedFormFamily::G2: return RadialProfile::g2_solution(parameter);
    case ClosedFormFamily::Spin7F: return RadialProfile::spin7_f(parameter);
    case ClosedFormFamily::Spin7G: return RadialProfile::spin7_g(parameter);
  }
  return RadialProfile::zero();
}

}  // namespace

RiccatiSpec g2_riccati() {
  RiccatiSpec s;
  s.p = [](double r) { return 1.0 / (3.0 * (r + 1.0)); };
  s.q = [](double) { return 1.0; };
  s.s = [](double) { return 0.0; };
  s.r0 = 0.0;
  s.r1 = 50.0;
  return s;
}

RiccatiSpec spin7_f_riccati() {
  RiccatiSpec s;
  s.p = [](double r) { return (12.0 * r + 10.0) / (5.0 * r * (1.0 + r)); };
  s.q = [](double) { return -1.0; };
  s.s = [](double r) { return 2.0 / (5.0 * r * (1.0 + r)); };
  s.r0 = 1e-2;
  s.r1 = 100.0;
  return s;
}

RiccatiSpec spin7_g_riccati() {
  RiccatiSpec s;
  s.p = [](double r) { return 2.0 / (5.0 * (1.0 + r)); };
  s.q = [](double) { return -1.0; };
  s.s = [](double) { return 0.0; };
  s.r0 = 0.0;
  s.r1 = 100.0;
  return s;
}

std::pair<double, double> closed_form(ClosedFormFamily family, double parameter, double r) {
  RadialProfile p = profile_of(family, parameter);
  return {p.value(r), p.deriv(r)};
}

double ode_residual(const RiccatiSpec& spec, const std::function<double(double)>& f,
                    const std::function<double(double)>& fp, std::span<const double> grid) {
  double worst = 0.0;
  for (double r : grid) {
    double res = fp(r) + spec.p(r) * f(r) + spec.q(r) * f(r) * f(r) - spec.s(r);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

CoupledResidual coupled_g2_residual(const std::function<double(double)>& f,
                                    const std::function<double(double)>& fp,
                                    const std::function<double(double)>& g,
                                    const std::function<double(double)>& gp, double kappa,
                                    std::span<const double> grid) {
  CoupledResidual out;
  for (double r : grid) {
    BsProfiles bp = bs_profiles(ModelName::G2Spinor, kappa, r);
    double ratio = bp.sigma / bp.tau;
    double fr = f(r), gr = g(r);
    out.f_equation = std::max(
        out.f_equation, std::abs(fp(r) + fr * fr + ratio * (gr * gr * r - fr * kappa / 4.0)));
    out.g_equation =
        std::max(out.g_equation, std::abs(gp(r) + fr * gr + 3.0 / r * (gr - r * fr * gr)));
  }
  return out;
}

namespace {

struct ScalarRun {
  std::vector<double> r, f;
  std::optional<double> blow_up;
};

ScalarRun rk4_scalar(const RiccatiSpec& spec, double f0, double r0, double r1, double h) {
  auto slope = [&spec](double r, double f) {
    return spec.s(r) - spec.p(r) * f - spec.q(r) * f * f;
  };
  ScalarRun run;
  double r = r0, f = f0;
  run.r.push_back(r);
  run.f.push_back(f);
  long steps = std::lround((r1 - r0) / h);
  for (long i = 0; i < steps; ++i) {
    double k1 = slope(r, f);
    double k2 = slope(r + h / 2, f + h / 2 * k1);
    double k3 = slope(r + h / 2, f + h / 2 * k2);
    double k4 = slope(r + h, f + h * k3);
    f += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    r = r0 + static_cast<double>(i + 1) * h;
    if (!std::isfinite(f) || std::abs(f) > 1e4) {
      // Near a pole, u = 1/f obeys u' = q + p u, so with d = u/q the root
      // sits at r* = r - d + (p/2) d^2 + O(d^3). Stopping while the step is
      // still resolved keeps the estimate inside the stated tolerance.
      double q = spec.q(r);
      if (std::isfinite(f) && q * f != 0.0) {
        double d = 1.0 / (q * f);
        run.blow_up = r - d + 0.5 * spec.p(r) * d * d;
      } else {
        run.blow_up = r;
      }
      return run;
    }
    run.r.push_back(r);
    run.f.push_back(f);
  }
  return run;
}

}  // namespace

TrajectorySample integrate(const RiccatiSpec& spec, double f0, const IntegratorConfig& config) {
  if (config.h <= 0.0 || config.h > (config.r1 - config.r0) / 10.0)
    throw std::invalid_argument("integrator step must be positive and at most a tenth of the range");
  ScalarRun full = rk4_scalar(spec, f0, config.r0, config.r1, config.h);
  ScalarRun half = rk4_scalar(spec, f0, config.r0, config.r1, config.h / 2.0);
  TrajectorySample out;
  out.r = std::move(full.r);
  out.f = std::move(full.f);
  out.blow_up_radius = full.blow_up ? full.blow_up : half.blow_up;
  size_t n = std::min(out.r.size(), (half.f.size() + 1) / 2);
  for (size_t i = 0; i < n; ++i) {
    out.error_estimate = std::max(out.error_estimate, std::abs(out.f[i] - half.f[2 * i]));
  }
  return out;
}

CoupledTrajectory integrate_coupled_g2(double f0, double g0, double kappa,
                                       const IntegratorConfig& config) {
  if (config.r0 <= 0.0)
    throw std::invalid_argument("the coupled system carries a 3/r term; start at r0 > 0");
  auto slope = [kappa](double r, double f, double g, double* df, double* dg) {
    BsProfiles bp = bs_profiles(ModelName::G2Spinor, kappa, r);
    double ratio = bp.sigma / bp.tau;
    *df = -(f * f) - ratio * (g * g * r - f * kappa / 4.0);
    *dg = -(f * g) - 3.0 / r * (g - r * f * g);
  };
  CoupledTrajectory out;
  double r = config.r0, f = f0, g = g0;
  out.r.push_back(r);
  out.f.push_back(f);
  out.g.push_back(g);
  long steps = std::lround((config.r1 - config.r0) / config.h);
  double h = config.h;
  for (long i = 0; i < steps; ++i) {
    double kf1, kg1, kf2, kg2, kf3, kg3, kf4, kg4;
    slope(r, f, g, &kf1, &kg1);
    slope(r + h / 2, f + h / 2 * kf1, g + h / 2 * kg1, &kf2, &kg2);
    slope(r + h / 2, f + h / 2 * kf2, g + h / 2 * kg2, &kf3, &kg3);
    slope(r + h, f + h * kf3, g + h * kg3, &kf4, &kg4);
    f += h / 6.0 * (kf1 + 2 * kf2 + 2 * kf3 + kf4);
    g += h / 6.0 * (kg1 + 2 * kg2 + 2 * kg3 + kg4);
    r = config.r0 + static_cast<double>(i + 1) * h;
    if (!std::isfinite(f) || !std::isfinite(g)) break;
    out.r.push_back(r);
    out.f.push_back(f);
    out.g.push_back(g);
  }
  return out;
}

LinearizedRiccati linearize(const RiccatiSpec& spec) {
  for (double r : {spec.r0 + 0.1, spec.r0 + 1.0, spec.r0 + 7.0}) {
    if (std::abs(spec.s(r)) > 1e-14)
      throw std::invalid_argument("linearize requires a homogeneous Riccati equation");
  }
  double q = spec.q(spec.r0 + 0.5);
  if (std::abs(std::abs(q) - 1.0) > 1e-12)
    throw std::invalid_argument("linearize requires q = +-1");
  LinearizedRiccati out;
  out.q_sign = q;
  out.c = spec.p(0.0);
  for (double r : {0.3, 2.0, 11.0}) {
    if (std::abs(spec.p(r) * (1.0 + r) - out.c) > 1e-12)
      throw std::invalid_argument("linearize supports coefficients p = c/(1+r)");
  }
  double c = out.c;
  out.yp_basis = [c](double r) { return std::pow(1.0 + r, -c); };
  out.y_basis = [c](double r) { return std::pow(1.0 + r, 1.0 - c) / (1.0 - c); };
  // self-check: the reconstructed f = q y'/y solves the equation
  auto probe = out.reconstruct(q * out.yp_basis(0.0) / (out.y_basis(0.0) + 0.31), 0.0);
  for (double r : {0.2, 1.7, 9.0}) {
    double h = 1e-6;
    double fp = (probe(r + h) - probe(r - h)) / (2.0 * h);
    double res = fp + spec.p(r) * probe(r) + spec.q(r) * probe(r) * probe(r);
    if (std::abs(res) > 1e-7)
      throw std::logic_error("linearized basis fails to solve the Riccati equation");
  }
  return out;
}

std::function<double(double)> LinearizedRiccati::reconstruct(double f_match,
                                                             double r_match) const {
  if (f_match == 0.0) return [](double) { return 0.0; };
  double C2 = q_sign * yp_basis(r_match) / f_match - y_basis(r_match);
  auto yb = y_basis;
  auto ypb = yp_basis;
  double q = q_sign;
  return [yb, ypb, q, C2](double r) { return q * ypb(r) / (yb(r) + C2); };
}

std::vector<SingularityHit> singularity_scan(ClosedFormFamily family,
                                             std::span<const double> parameters, double r_lo,
                                             double r_hi) {
  std::vector<SingularityHit> out;
  for (double param : parameters) {
    SingularityHit hit{param, {}};
    // sample grid: 64 log-spaced points per decade plus the endpoints
    std::vector<double> grid;
    grid.push_back(r_lo);
    double lo = std::max(r_lo, 1e-8);
    int decades = static_cast<int>(std::ceil(std::log10(r_hi / lo)));
    int n = std::max(2, 64 * decades);
    for (int i = 0; i <= n; ++i) {
      grid.push_back(lo * std::pow(r_hi / lo, static_cast<double>(i) / n));
    }
    auto den = [&](double r) { return denominator(family, param, r); };
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
      double a = grid[i], b = grid[i + 1];
      double fa = den(a), fb = den(b);
      if (fa == 0.0) {
        hit.roots.push_back(a);
        continue;
      }
      if (fa * fb > 0.0) continue;
      for (int it = 0; it < 200 && (b - a) > 1e-10 * std::max(1.0, a); ++it) {
        double m = 0.5 * (a + b);
        double fm = den(m);
        if (fa * fm <= 0.0) {
          b = m;
          fb = fm;
        } else {
          a = m;
          fa = fm;
        }
      }
      hit.roots.push_back(0.5 * (a + b));
    }
    // dedupe within 1e-8
    std::sort(hit.roots.begin(), hit.roots.end());
    std::vector<double> uniq;
    for (double r : hit.roots) {
      if (uniq.empty() || r - uniq.back() > 1e-8) uniq.push_back(r);
    }
    hit.roots = std::move(uniq);
    out.push_back(std::move(hit));
  }
  return out;
}

}  // namespace bsinst
