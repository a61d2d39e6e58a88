#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "snse/config.hpp"
#include "snse/driver.hpp"
#include "snse/errors.hpp"
#include "snse/initial_data.hpp"
#include "snse/io.hpp"
#include "snse/noise.hpp"
#include "snse/norms.hpp"
#include "snse/operators.hpp"
#include "snse/random_fields.hpp"
#include "snse/rng.hpp"
#include "snse/verifier.hpp"

namespace py = pybind11;
using namespace snse;

namespace {

py::array_t<std::complex<double>> coeffs_array(const SpectralField& f) {
    std::vector<py::ssize_t> shape{f.ncomp};
    for (int a = 0; a < f.grid.dim; ++a) shape.push_back(f.grid.n);
    py::array_t<std::complex<double>> arr(shape);
    std::copy(f.coeffs.begin(), f.coeffs.end(), arr.mutable_data());
    return arr;
}

SpectralField field_from_array(const Grid& g, py::array_t<std::complex<double>> arr) {
    auto buf = arr.request();
    SpectralField f(g, static_cast<int>(buf.shape.empty() ? 0 : buf.shape[0]));
    if (static_cast<std::size_t>(buf.size) != f.coeffs.size())
        throw ConfigError("coefficient array does not match the grid");
    const auto* src = static_cast<const std::complex<double>*>(buf.ptr);
    std::copy(src, src + f.coeffs.size(), f.coeffs.begin());
    return f;
}

py::dict bundle_dict(const NormBundle& b) {
    py::dict d;
    d["l3"] = b.l3;
    d["l6"] = b.l6;
    d["h05"] = b.h05;
    d["h1"] = b.h1;
    d["d3"] = b.d3;
    d["d6"] = b.d6;
    d["h32_sq"] = b.h32_sq;
    d["h2_sq"] = b.h2_sq;
    return d;
}

RunConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config json: ") + e.what());
    }
    return config_from_json(j);
}

}  // namespace

PYBIND11_MODULE(_snse, m) {
    m.doc() = "spectral cascade solver for stochastic Navier-Stokes on the torus";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<Grid>(m, "Grid")
        .def(py::init([](int dim, int n) { return Grid{dim, n}; }), py::arg("dim"),
             py::arg("n"))
        .def_readonly("dim", &Grid::dim)
        .def_readonly("n", &Grid::n)
        .def("points", &Grid::points)
        .def("dealias_mode", &Grid::dealias_mode)
        .def("__repr__", [](const Grid& g) {
            return "Grid(dim=" + std::to_string(g.dim) + ", n=" + std::to_string(g.n) + ")";
        });

    py::class_<SpectralField>(m, "SpectralField")
        .def(py::init([](const Grid& g, int ncomp) { return SpectralField(g, ncomp); }),
             py::arg("grid"), py::arg("ncomp"))
        .def_readonly("grid", &SpectralField::grid)
        .def_readonly("ncomp", &SpectralField::ncomp)
        .def("coeffs", &coeffs_array, "coefficients as a (ncomp, n, ...) complex array copy")
        .def("l2_sq", [](const SpectralField& f) { return sobolev_sq_l2(f, 0.0); })
        .def("__add__",
             [](const SpectralField& a, const SpectralField& b) {
                 SpectralField r = a;
                 r += b;
                 return r;
             })
        .def("__sub__",
             [](const SpectralField& a, const SpectralField& b) {
                 SpectralField r = a;
                 r -= b;
                 return r;
             })
        .def("__mul__", [](const SpectralField& a, double s) {
            SpectralField r = a;
            r *= s;
            return r;
        });

    m.def("field_from_coeffs", &field_from_array, py::arg("grid"), py::arg("coeffs"));

    py::class_<Workspace>(m, "Workspace").def(py::init<const Grid&>(), py::arg("grid"));

    m.def("taylor_green", &taylor_green, py::arg("grid"));
    m.def("single_mode_field", &single_mode_field, py::arg("grid"), py::arg("freq"),
          py::arg("amp"));
    m.def(
        "random_divfree_field",
        [](Workspace& ws, std::uint64_t seed, double amplitude, double decay,
           const std::string& profile) {
            RandomFieldParams p;
            p.amplitude = amplitude;
            p.decay = decay;
            if (profile == "exp_decay")
                p.profile = SpectrumProfile::exp_decay;
            else if (profile == "white_band")
                p.profile = SpectrumProfile::white_band;
            else if (profile == "power_law")
                p.profile = SpectrumProfile::power_law;
            else
                throw ConfigError("unknown profile " + profile);
            return random_divfree_field(ws, seed, p);
        },
        py::arg("workspace"), py::arg("seed"), py::arg("amplitude") = 1.0,
        py::arg("decay") = 0.35, py::arg("profile") = "exp_decay");

    m.def("leray_project", [](SpectralField& f) { leray_project(f); }, py::arg("field"));
    m.def("nonlinear_term",
          [](Workspace& ws, const SpectralField& u) {
              SpectralField out(u.grid, u.ncomp);
              nonlinear_term(ws, u, out);
              return out;
          },
          py::arg("workspace"), py::arg("u"));
    m.def("energy_flux", &energy_flux, py::arg("workspace"), py::arg("u"));

    m.def("lebesgue_norm", &lebesgue_norm, py::arg("workspace"), py::arg("field"), py::arg("p"));
    m.def("sobolev_norm", &sobolev_norm, py::arg("workspace"), py::arg("field"),
          py::arg("alpha"), py::arg("p"));
    m.def("dissipation_functional", &dissipation_functional, py::arg("workspace"),
          py::arg("field"), py::arg("p"));
    m.def("poincare_ratio", &poincare_ratio, py::arg("workspace"), py::arg("field"),
          py::arg("p"));
    m.def("norm_bundle",
          [](Workspace& ws, const SpectralField& f) { return bundle_dict(norm_bundle(ws, f)); },
          py::arg("workspace"), py::arg("field"));

    m.def(
        "decompose",
        [](Workspace& ws, const SpectralField& u0, double epsilon0, int K_max,
           const std::string& mode) {
            const SplitNorm sn = mode == "h12" ? SplitNorm::H12 : SplitNorm::L3;
            DecompositionResult dec = decompose_initial_datum(ws, u0, epsilon0, K_max, -1, sn);
            py::dict d;
            d["split_radius"] = dec.split_radius;
            d["K0"] = dec.K0;
            d["w0_crit"] = dec.w0_crit;
            d["residual_crit"] = dec.residual_crit;
            d["residual_bound"] = dec.residual_bound;
            d["w_bar0"] = dec.w_bar0;
            d["residual"] = dec.residual;
            py::list levels, certs;
            for (const auto& lv : dec.levels) levels.append(lv);
            for (const auto& c : dec.certificates) {
                py::dict cd;
                cd["level"] = c.level;
                cd["radius"] = c.radius;
                cd["crit"] = c.crit;
                cd["subcrit"] = c.subcrit;
                cd["crit_bound"] = c.crit_bound;
                cd["ok"] = c.ok;
                certs.append(cd);
            }
            d["levels"] = levels;
            d["certificates"] = certs;
            return d;
        },
        py::arg("workspace"), py::arg("u0"), py::arg("epsilon0"), py::arg("K_max") = 8,
        py::arg("mode") = "l3");

    py::enum_<NoiseModel::Envelope>(m, "Envelope")
        .value("constant", NoiseModel::Envelope::constant)
        .value("cosine", NoiseModel::Envelope::cosine);
    py::class_<NoiseModel>(m, "NoiseModel")
        .def_static("zero", &NoiseModel::zero)
        .def_static("identity", &NoiseModel::identity)
        .def_static("diagonal_family", &NoiseModel::diagonal_family, py::arg("modes"),
                    py::arg("c0"), py::arg("c_decay"), py::arg("radius0"),
                    py::arg("radius_step"), py::arg("env") = NoiseModel::Envelope::constant)
        .def("modes", &NoiseModel::modes)
        .def("lipschitz", &NoiseModel::lipschitz)
        .def("column", [](const NoiseModel& nm, double t, const SpectralField& u, int k) {
            SpectralField out(u.grid, u.ncomp);
            nm.column(t, u, k, out);
            return out;
        });

    m.def(
        "run_ensemble",
        [](const std::string& config_json, int workers) {
            const RunConfig cfg = parse_config(config_json);
            const EnsembleResult r = run_cascade_ensemble(cfg, resolve_workers(workers));
            return r.realized.dump();
        },
        py::arg("config_json"), py::arg("workers") = 0,
        "run the cascade ensemble; returns the realized summary as a json string");
    m.def(
        "run_verification",
        [](const std::string& config_json, int workers) {
            const RunConfig cfg = parse_config(config_json);
            return run_verification(cfg, resolve_workers(workers), nullptr).dump();
        },
        py::arg("config_json"), py::arg("workers") = 0,
        "run the full verification bundle; returns its json as a string");
    m.def("resolved_config",
          [](const std::string& config_json) { return resolved_json(parse_config(config_json)).dump(); },
          py::arg("config_json"));

    m.def("write_field", &write_field, py::arg("path"), py::arg("field"));
    m.def("read_field", &read_field, py::arg("path"));

    m.def("version", &version_string);
}
