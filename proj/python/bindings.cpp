#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bsinst/profiles.hpp"
#include "bsinst/suite.hpp"

namespace py = pybind11;
using namespace bsinst;

namespace {

ModelPtr model_by_name(const std::string& name) {
  if (name == "g2") return build_model(ModelName::G2Spinor, 1.0);
  if (name == "spin7") return build_model(ModelName::Spin7Spinor, 1.0);
  if (name == "nk") return build_model(ModelName::NearlyKahlerTriple, 1.0);
  if (name == "cone") return build_model(ModelName::G2Cone, 1.0);
  throw std::invalid_argument("unknown model: " + name);
}

py::dict residual_dict(const ResidualReport& rep) {
  py::dict d;
  for (const auto& [k, v] : rep.residuals) d[py::str(k)] = v;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quaternionic exterior calculus and instanton verification for the "
            "Bryant-Salamon G2/Spin(7) manifolds";
  m.attr("__version__") = version();

  py::class_<Quatd>(m, "Quaternion")
      .def(py::init<double, double, double, double>(), py::arg("w") = 0.0, py::arg("x") = 0.0,
           py::arg("y") = 0.0, py::arg("z") = 0.0)
      .def_readwrite("w", &Quatd::w)
      .def_readwrite("x", &Quatd::x)
      .def_readwrite("y", &Quatd::y)
      .def_readwrite("z", &Quatd::z)
      .def("__mul__", [](const Quatd& a, const Quatd& b) { return a * b; })
      .def("__add__", [](const Quatd& a, const Quatd& b) { return a + b; })
      .def("__sub__", [](const Quatd& a, const Quatd& b) { return a - b; })
      .def("__neg__", [](const Quatd& a) { return -a; })
      .def("conj", &Quatd::conj)
      .def("norm", [](const Quatd& q) { return norm(q); })
      .def("inverse", [](const Quatd& q) { return inverse(q); })
      .def("__repr__", [](const Quatd& q) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "Quaternion(%g, %g, %g, %g)", q.w, q.x, q.y, q.z);
        return std::string(buf);
      });

  m.def("g2_profile",
        [](double C, double r) { return closed_form(ClosedFormFamily::G2, C, r); },
        py::arg("C"), py::arg("r"),
        "Closed-form G2 instanton profile (value, derivative); kappa-independent");
  m.def("spin7_profile_f",
        [](double D, double r) { return closed_form(ClosedFormFamily::Spin7F, D, r); },
        py::arg("D"), py::arg("r"));
  m.def("spin7_profile_g",
        [](double C, double r) { return closed_form(ClosedFormFamily::Spin7G, C, r); },
        py::arg("C"), py::arg("r"));

  m.def("g2_ode_residual",
        [](double C, std::vector<double> grid) {
          RadialProfile p = RadialProfile::g2_solution(C);
          return ode_residual(
              g2_riccati(), [&](double r) { return p.value(r); },
              [&](double r) { return p.deriv(r); }, grid);
        },
        py::arg("C"), py::arg("grid"));

  m.def("g2_instanton_residual",
        [](double C, double r, double kappa, std::uint64_t seed) {
          ModelPtr g2 = build_model(ModelName::G2Spinor, kappa);
          GaugeConnection conn{g2, BaseConnection::Zero, RadialProfile::g2_solution(C, kappa),
                               RadialProfile::zero(), 1e-2};
          GaugeSystem sys = make_system(conn);
          Rng rng(seed);
          Ptd p{std::sqrt(r) * rng.unit_quat(), 0.0};
          return residual_dict(g2_instanton_residual(sys, p));
        },
        py::arg("C"), py::arg("r"), py::arg("kappa") = 1.0, py::arg("seed") = 42);

  m.def("spin7_instanton_residual",
        [](double D, double r, std::uint64_t seed) {
          ModelPtr s7 = build_model(ModelName::Spin7Spinor, 1.0);
          GaugeConnection conn{s7, BaseConnection::LeviCivitaPhi, RadialProfile::spin7_f(D),
                               RadialProfile::zero(), 1e-2};
          GaugeSystem sys = make_system(conn);
          Rng rng(seed);
          Ptd p{std::sqrt(r) * rng.unit_quat(), 0.0};
          return residual_dict(spin7_instanton_residual(sys, p));
        },
        py::arg("D"), py::arg("r"), py::arg("seed") = 42);

  m.def("hym_residual",
        [](double scale, std::uint64_t seed) {
          ModelPtr nk = build_model(ModelName::NearlyKahlerTriple, 1.0);
          FieldForm A = nk->form("ad_tau").scaled(scale);
          Rng rng(seed);
          Ptd p{rng.unit_quat(), 0.0};
          return residual_dict(hym_residual(*nk, A, p));
        },
        py::arg("scale") = -2.0 / 3.0, py::arg("seed") = 42,
        "HYM residuals of scale * g (theta3 - phi) g^-1 on the nearly Kaehler link");

  m.def("two_form_eigenvalues",
        [](const std::string& model, double r, std::uint64_t seed) {
          ModelPtr mp = model_by_name(model);
          Rng rng(seed);
          Ptd p{std::sqrt(r) * rng.unit_quat(), 0.0};
          TwoFormSpectrum spec = two_form_spectrum(*mp, p);
          std::vector<double> out(spec.eigenvalues.data(),
                                  spec.eigenvalues.data() + spec.eigenvalues.size());
          return out;
        },
        py::arg("model"), py::arg("r") = 1.0, py::arg("seed") = 42);

  m.def("metric_deviation", &metric_deviation, py::arg("rho"));
  m.def("metric_decay_exponent",
        [](double rho_lo, double rho_hi, int n) {
          std::vector<std::pair<double, double>> samples;
          for (int i = 0; i < n; ++i) {
            double rho = rho_lo * std::pow(rho_hi / rho_lo, double(i) / (n - 1));
            samples.emplace_back(rho, metric_deviation(rho));
          }
          return decay_fit(samples);
        },
        py::arg("rho_lo") = 10.0, py::arg("rho_hi") = 1000.0, py::arg("n") = 12);
  m.def("connection_decay_exponent",
        [](double C, double rho_lo, double rho_hi, int n, std::uint64_t seed) {
          Rng rng(seed);
          Ptd link{rng.unit_quat(), 0.0};
          std::vector<std::pair<double, double>> samples;
          for (int i = 0; i < n; ++i) {
            double rho = rho_lo * std::pow(rho_hi / rho_lo, double(i) / (n - 1));
            samples.emplace_back(rho, limit_connection(C, rho, link).deviation);
          }
          return convergence_fit(samples);
        },
        py::arg("C"), py::arg("rho_lo") = 10.0, py::arg("rho_hi") = 1000.0, py::arg("n") = 12,
        py::arg("seed") = 42);

  m.def("structure_residuals",
        [](const std::string& model, std::uint64_t seed, int samples) {
          ModelPtr mp = model_by_name(model);
          py::dict d;
          for (const auto& [k, v] : structure_residuals(*mp, seed, samples)) d[py::str(k)] = v;
          return d;
        },
        py::arg("model"), py::arg("seed") = 42, py::arg("samples") = 10);

  m.def("run_suite",
        [](const std::string& suite, int samples, std::uint64_t seed, const std::string& format,
           double kappa) {
          SuiteConfig cfg;
          cfg.suite = suite;
          cfg.samples = samples;
          cfg.seed = seed;
          cfg.format = format;
          cfg.kappa = kappa;
          SuiteReport rep = run_suite(cfg);
          return py::make_tuple(rep.all_pass(), emit_report(rep, format));
        },
        py::arg("suite") = "algebra", py::arg("samples") = 50, py::arg("seed") = 42,
        py::arg("format") = "json", py::arg("kappa") = 1.0,
        "Run a verification suite; returns (all_pass, report_string)");
}
