// Python bindings for the main operations: map algebra, energy / moment /
// gradient evaluation, the modified flow driver, the invariant suites, and
// the principal-symbol identities.
//
// Array conventions: a scalar field is a float64 array of shape (n,)*dim in
// C order (last axis fastest); a map is its displacement, shape (dim,) +
// (n,)*dim.  dim is inferred from the number of axes and must be 2 or 4.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include <torusflow/check.hpp>
#include <torusflow/flow.hpp>
#include <torusflow/grid.hpp>
#include <torusflow/io.hpp>
#include <torusflow/maps.hpp>
#include <torusflow/moment.hpp>
#include <torusflow/symbol.hpp>

namespace py = pybind11;

namespace {

using namespace torusflow;
using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

TorusGrid grid_from_shape(const DArray& arr, int lead) {
    const int nd = static_cast<int>(arr.ndim());
    const int dim = nd - lead;
    if (dim != 2 && dim != 4)
        throw std::invalid_argument("expected 2 or 4 grid axes, got " + std::to_string(dim));
    const py::ssize_t n = arr.shape(lead);
    for (int a = lead; a < nd; a++)
        if (arr.shape(a) != n)
            throw std::invalid_argument("grid axes must all have the same length");
    if (lead == 1 && arr.shape(0) != dim)
        throw std::invalid_argument("the leading axis must hold one component per grid axis");
    return make_grid(dim, static_cast<int>(n));
}

ScalarField scalar_from(const DArray& arr) {
    TorusGrid g = grid_from_shape(arr, 0);
    ScalarField f(g);
    std::memcpy(f.data(), arr.data(), f.size() * sizeof(double));
    return f;
}

TorusMap map_from(const DArray& arr) {
    TorusGrid g = grid_from_shape(arr, 1);
    VectorField u(g);
    const double* src = arr.data();
    const std::size_t count = g.point_count();
    for (int a = 0; a < g.dim; a++)
        std::memcpy(u[a].data(), src + count * static_cast<std::size_t>(a),
                    count * sizeof(double));
    return TorusMap(std::move(u));
}

std::vector<py::ssize_t> grid_shape(const TorusGrid& g, int lead_count) {
    std::vector<py::ssize_t> shape;
    if (lead_count > 0) shape.push_back(lead_count);
    for (int a = 0; a < g.dim; a++) shape.push_back(g.n);
    return shape;
}

py::array_t<double> to_array(const ScalarField& f) {
    py::array_t<double> out(grid_shape(f.grid(), 0));
    std::memcpy(out.mutable_data(), f.data(), f.size() * sizeof(double));
    return out;
}

py::array_t<double> to_array(const VectorField& v) {
    const TorusGrid& g = v.grid();
    py::array_t<double> out(grid_shape(g, g.dim));
    double* dst = out.mutable_data();
    const std::size_t count = g.point_count();
    for (int a = 0; a < g.dim; a++)
        std::memcpy(dst + count * static_cast<std::size_t>(a), v[a].data(),
                    count * sizeof(double));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Moment-map gradient flow on flat tori (native core)";

    m.def(
        "energy", [](const DArray& u, double tol) { return energy(map_from(u), tol); },
        py::arg("displacement"), py::arg("tol") = 1e-10,
        "Flow energy of the map id + displacement: half the squared L2 size of the\n"
        "density defect (dim 2) or of the anti-self-dual deviation (dim 4).");

    m.def(
        "grad", [](const DArray& u, double tol) {
            return to_array(grad_energy(map_from(u), tol));
        },
        py::arg("displacement"), py::arg("tol") = 1e-10,
        "Gradient of energy() in the flat L2 pairing of displacement variations.");

    m.def(
        "moment", [](const DArray& u, double tol) {
            TorusMap f = map_from(u);
            if (f.grid().dim == 2) return to_array(moment_t2(f).mu);
            (void)tol;
            auto hk = moment_hk(f);
            py::array_t<double> out(grid_shape(f.grid(), 3));
            double* dst = out.mutable_data();
            const std::size_t count = f.grid().point_count();
            for (std::size_t i = 0; i < 3; i++)
                std::memcpy(dst + count * i, hk[i].data(), count * sizeof(double));
            return out;
        },
        py::arg("displacement"), py::arg("tol") = 1e-10,
        "Scalar moment(s): 1 - density on the 2-torus (shape (n, n)); the shifted\n"
        "triple of 2-form pairings on the 4-torus (shape (3, n, n, n, n)).");

    m.def(
        "density", [](const DArray& u) { return to_array(map_density(map_from(u))); },
        py::arg("displacement"),
        "Pointwise Jacobian determinant of the map; positive iff orientation is\n"
        "preserved at the resolved scale.");

    m.def(
        "inverse", [](const DArray& u, double tol) {
            return to_array(inverse_map(map_from(u), tol).displacement());
        },
        py::arg("displacement"), py::arg("tol") = 1e-10,
        "Displacement of the inverse map (damped Newton per grid point).");

    m.def(
        "compose", [](const DArray& u, const DArray& v) {
            return to_array(compose(map_from(u), map_from(v)).displacement());
        },
        py::arg("outer"), py::arg("inner"),
        "Displacement of (id + outer) composed after (id + inner).");

    m.def(
        "random_map", [](int dim, int n, double amplitude, std::uint64_t seed, int kmax) {
            return to_array(random_initial_map(make_grid(dim, n), amplitude, seed, kmax)
                                .displacement());
        },
        py::arg("dim"), py::arg("n"), py::arg("amplitude"), py::arg("seed"),
        py::arg("kmax") = 0,
        "Seeded band-limited perturbation of the identity (kmax = 0 picks n/8).");

    m.def(
        "shear_map", [](int dim, int n, double amplitude, std::uint64_t seed) {
            return to_array(shear_symplectomorphism(make_grid(dim, n), amplitude, seed)
                                .displacement());
        },
        py::arg("dim"), py::arg("n"), py::arg("amplitude"), py::arg("seed"),
        "Composition of two transverse shears: an exact symplectomorphism up to\n"
        "composition interpolation error.");

    m.def(
        "hamiltonian_map", [](const DArray& h, int substeps) {
            return to_array(hamiltonian_map(scalar_from(h), substeps).displacement());
        },
        py::arg("hamiltonian"), py::arg("substeps"),
        "Time-1 map of the Hamiltonian field of the given function (classical\n"
        "4-stage integration per grid point).");

    m.def(
        "flow", [](const std::string& config_json, const std::vector<std::string>& overrides) {
            RunConfig cfg = parse_config_text(config_json, overrides);
            TorusMap f0 = initial_map_from_config(cfg);
            FlowOptions opt = flow_options_from_config(cfg);
            FlowResult r = run_flow(f0, opt);
            auto column = [&](double StepRecord::* field) {
                py::array_t<double> a(static_cast<py::ssize_t>(r.history.size()));
                double* p = a.mutable_data();
                for (std::size_t i = 0; i < r.history.size(); i++) p[i] = r.history[i].*field;
                return a;
            };
            py::dict out;
            out["t"] = column(&StepRecord::t);
            out["phi"] = column(&StepRecord::phi);
            out["mu_inf"] = column(&StepRecord::mu_inf);
            out["min_h"] = column(&StepRecord::min_h);
            out["grad_norm"] = column(&StepRecord::grad_norm);
            out["dt"] = column(&StepRecord::dt);
            out["final_displacement"] = to_array(r.f.displacement());
            out["steps"] = r.history.size() - 1;
            out["rejected_steps"] = r.rejected_steps;
            out["aborted"] = r.aborted;
            out["converged"] = r.converged;
            out["abort_reason"] = r.abort_reason;
            return out;
        },
        py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
        "Run the modified flow from a JSON configuration string (same schema as the\n"
        "command-line tool; overrides are key=value strings).  Returns the per-step\n"
        "diagnostics as arrays plus the final displacement and termination flags.");

    m.def(
        "check", [](const std::string& level) {
            CheckLevel lvl;
            if (level == "fast") lvl = CheckLevel::Fast;
            else if (level == "full") lvl = CheckLevel::Full;
            else throw std::invalid_argument("level must be 'fast' or 'full'");
            py::list out;
            for (const CheckResult& r : run_checks(lvl)) {
                py::dict d;
                d["name"] = r.name;
                d["measured"] = r.measured;
                d["threshold"] = r.threshold;
                d["passed"] = r.passed;
                out.append(d);
            }
            return out;
        },
        py::arg("level") = "fast",
        "Run the invariant suites; returns one record per invariant.");

    m.def(
        "symbol", [](int dim, double coeff, const std::vector<double>& xi) {
            SymbolMatrix s;
            if (dim == 2) {
                if (xi.size() != 2) throw std::invalid_argument("xi must have 2 entries");
                s = symbol_t2(coeff, {xi[0], xi[1]});
            } else if (dim == 4) {
                if (xi.size() != 4) throw std::invalid_argument("xi must have 4 entries");
                s = symbol_t4(coeff, {xi[0], xi[1], xi[2], xi[3]});
            } else {
                throw std::invalid_argument("dim must be 2 or 4");
            }
            py::array_t<double> mat({static_cast<py::ssize_t>(dim), static_cast<py::ssize_t>(dim)});
            for (int i = 0; i < dim; i++)
                for (int j = 0; j < dim; j++)
                    mat.mutable_at(i, j) = s.at(i, j);
            py::dict out;
            out["matrix"] = mat;
            out["det"] = symbol_det(s);
            out["min_eigenvalue"] = symbol_min_eigenvalue(s);
            return out;
        },
        py::arg("dim"), py::arg("coeff"), py::arg("xi"),
        "Principal symbol of the linearized flow operator at covector xi with the\n"
        "given (positive) coefficient; returns the matrix, determinant, and the\n"
        "smallest eigenvalue.");
}
