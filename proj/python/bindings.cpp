// Python surface over the core library: grid/filter algebra, the fine-grid
// solvers, SGS compression, closure checkpoints and coarse runs, and the
// evaluation metrics.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spclosure/checkpoint.hpp"
#include "spclosure/metrics.hpp"
#include "spclosure/pipeline.hpp"
#include "spclosure/verify.hpp"

namespace py = pybind11;
using namespace spclosure;

namespace {

struct PyGrid {
    GridPair g;
    FilterPair fp;
    explicit PyGrid(double start, double end, int I, int J)
        : g(make_grid_pair(start, end, I, J)), fp(make_filter_pair(g)) {}
};

struct PyClosure {
    AnyClosure model;

    std::string kind() const {
        if (std::holds_alternative<SPClosure>(model)) return "sp";
        if (std::holds_alternative<VanillaCNNClosure>(model)) return "cnn";
        if (std::holds_alternative<SmagorinskyClosure>(model)) return "sm";
        return "nc";
    }
    int state_size() const { return closure_state_size(model); }
    int grid_i() const { return closure_setup(model).grid.I; }

    std::vector<double> rhs(const std::vector<double>& state, double t) const {
        CoarseContext ctx;
        return closure_rhs(model, state, ctx, t);
    }

    py::dict simulate(const std::vector<double>& state0, double dt, double T,
                      double save_every) const {
        CoarseContext ctx;
        auto traj = simulate_closure(model, ctx, state0, dt, T, save_every);
        py::dict out;
        out["times"] = traj.times;
        out["states"] = traj.states;
        out["stable"] = traj.stable;
        out["blowup_time"] = traj.blowup_time;
        return out;
    }
};

py::dict run_fine(const std::string& equation, const std::vector<double>& u0, double h, double dt,
                  double T, double save_every, double nu, double epsilon, double mu,
                  py::object inflow, py::object forcing) {
    PDEConfig cfg;
    cfg.kind = equation == "kdv" ? Equation::KdV : Equation::Burgers;
    cfg.nu = nu;
    cfg.epsilon = epsilon;
    cfg.mu = mu;
    if (!forcing.is_none()) cfg.forcing = forcing.cast<std::vector<double>>();
    BCSpec bc = BCSpec::periodic();
    if (!inflow.is_none()) {
        auto fn = inflow.cast<std::function<double(double)>>();
        bc = BCSpec::inflow_outflow(fn);
    }
    auto traj = simulate(cfg, bc, u0, h, dt, T, save_every);
    py::dict out;
    out["times"] = traj.times;
    out["states"] = traj.states;
    out["stable"] = traj.stable;
    out["blowup_time"] = traj.blowup_time;
    return out;
}

CompressionOperator comp_from_t(int J, const std::vector<double>& t) {
    CompressionOperator comp;
    comp.J = J;
    comp.t = t;
    comp.t_hat.resize(t.size());
    for (size_t j = 0; j < t.size(); ++j)
        comp.t_hat[j] = t[j] * std::sqrt(static_cast<double>(J));
    return comp;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Structure-preserving neural closure models for coarse-grained 1D PDEs";

    py::class_<PyGrid>(m, "Grid")
        .def(py::init<double, double, int, int>(), py::arg("domain_start"),
             py::arg("domain_end"), py::arg("I"), py::arg("J"))
        .def_property_readonly("N", [](const PyGrid& s) { return s.g.N; })
        .def_property_readonly("I", [](const PyGrid& s) { return s.g.I; })
        .def_property_readonly("J", [](const PyGrid& s) { return s.g.J; })
        .def_property_readonly("h", [](const PyGrid& s) { return s.g.h; })
        .def_property_readonly("H", [](const PyGrid& s) { return s.g.H; })
        .def_property_readonly("omega", [](const PyGrid& s) { return s.g.omega; })
        .def_property_readonly("Omega", [](const PyGrid& s) { return s.g.Omega; })
        .def("apply_filter",
             [](const PyGrid& s, const std::vector<double>& u) { return apply_filter(s.fp, u); })
        .def("reconstruct",
             [](const PyGrid& s, const std::vector<double>& ub) { return reconstruct(s.fp, ub); })
        .def("sgs_content",
             [](const PyGrid& s, const std::vector<double>& u) { return sgs_content(s.fp, u); })
        .def("fit_compression",
             [](const PyGrid& s, const std::vector<std::vector<double>>& snaps) {
                 auto comp = fit_compression(snaps, s.fp);
                 py::dict out;
                 out["t"] = comp.t;
                 out["t_hat"] = comp.t_hat;
                 return out;
             })
        .def("compression_loss",
             [](const PyGrid& s, const std::vector<double>& t,
                const std::vector<std::vector<double>>& snaps) {
                 return compression_loss(comp_from_t(s.g.J, t), snaps, s.fp);
             })
        .def("to_state", [](const PyGrid& s, const std::vector<double>& t,
                            const std::vector<double>& u) {
            StateTransform st{s.fp, comp_from_t(s.g.J, t)};
            return to_state(st, u);
        });

    m.def("inner_product", &inner_product, py::arg("x"), py::arg("y"), py::arg("mass"));
    m.def("regrid", &regrid, py::arg("u"), py::arg("n_target"));

    m.def("simulate_fine", &run_fine, py::arg("equation"), py::arg("u0"), py::arg("h"),
          py::arg("dt"), py::arg("T"), py::arg("save_every"), py::arg("nu") = 0.0,
          py::arg("epsilon") = 6.0, py::arg("mu") = 1.0, py::arg("inflow") = py::none(),
          py::arg("forcing") = py::none());

    py::class_<PyClosure>(m, "Closure")
        .def_property_readonly("kind", &PyClosure::kind)
        .def_property_readonly("state_size", &PyClosure::state_size)
        .def_property_readonly("I", &PyClosure::grid_i)
        .def("rhs", &PyClosure::rhs, py::arg("state"), py::arg("t") = 0.0)
        .def("simulate", &PyClosure::simulate, py::arg("state0"), py::arg("dt"), py::arg("T"),
             py::arg("save_every"));

    m.def("load_checkpoint",
          [](const std::string& path) { return PyClosure{load_checkpoint(path)}; });
    m.def(
        "no_closure",
        [](const std::string& equation, double start, double end, int I, int J, double nu,
           double epsilon, double mu) {
            CoarseSetup setup;
            setup.eq = equation == "kdv" ? Equation::KdV : Equation::Burgers;
            setup.nu = nu;
            setup.epsilon = epsilon;
            setup.mu = mu;
            setup.grid = make_grid_pair(start, end, I, J);
            return PyClosure{NoClosure{setup}};
        },
        py::arg("equation"), py::arg("domain_start"), py::arg("domain_end"), py::arg("I"),
        py::arg("J"), py::arg("nu") = 0.0, py::arg("epsilon") = 6.0, py::arg("mu") = 1.0);

    m.def("nrmse", &nrmse, py::arg("ub"), py::arg("ub_dns"), py::arg("Omega"),
          py::arg("domain_len"));
    m.def("integrated_nrmse", &integrated_nrmse, py::arg("series"), py::arg("dt"), py::arg("T"));
    m.def("energy_spectrum", &energy_spectrum, py::arg("ubar"), py::arg("H"));
    m.def(
        "kde_evaluate",
        [](const std::vector<double>& samples, const std::vector<double>& xs, double bandwidth) {
            GaussianKde kde(samples, bandwidth);
            std::vector<double> out;
            out.reserve(xs.size());
            for (double x : xs) out.push_back(kde(x));
            return out;
        },
        py::arg("samples"), py::arg("xs"), py::arg("bandwidth") = -1.0);
    m.def("dissipation_lambda2", [](int I, int J) {
        auto eig = dissipation_eigen_check(I, J);
        return py::make_tuple(eig.lambda1, eig.lambda2);
    });

    m.def(
        "verify",
        [](uint64_t seed, int cases) {
            py::list out;
            auto collect = [&](const std::vector<VerifyResult>& rs) {
                for (const auto& r : rs) {
                    py::dict d;
                    d["name"] = r.name;
                    d["pass"] = r.pass;
                    d["detail"] = r.detail;
                    out.append(d);
                }
            };
            collect(filter_identity_suite(seed, cases));
            collect(sp_conservation_suite(seed, cases));
            return out;
        },
        py::arg("seed") = 0, py::arg("cases") = 25);
}
