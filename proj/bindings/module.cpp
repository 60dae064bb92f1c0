#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "speckle/experiment.hpp"
#include "speckle/kinetic.hpp"
#include "speckle/ou.hpp"
#include "speckle/solver.hpp"
#include "speckle/verify.hpp"

namespace py = pybind11;
using namespace speckle;

namespace {

GaussianBump make_bump(double amplitude, double width, double center0, std::size_t d) {
    GaussianBump b;
    b.amplitude = amplitude;
    b.width = width;
    b.center.assign(d, 0.0);
    if (d > 0) b.center[0] = center0;
    return b;
}

py::dict trajectory_to_dict(const TrajectoryResult& res) {
    const std::size_t nt = res.sample.times.size();
    const std::size_t J = res.sample.eta_modes.size();
    py::array_t<std::complex<double>> x({nt, J});
    auto xv = x.mutable_unchecked<2>();
    for (std::size_t ti = 0; ti < nt; ++ti)
        for (std::size_t j = 0; j < J; ++j) xv(ti, j) = res.sample.at(ti, j);
    py::array_t<double> q(nt);
    py::array_t<std::complex<double>> sq(nt);
    auto qv = q.mutable_unchecked<1>();
    auto sqv = sq.mutable_unchecked<1>();
    for (std::size_t ti = 0; ti < nt; ++ti) {
        qv(ti) = res.qv[ti].Q;
        sqv(ti) = res.qv[ti].scriptQ;
    }
    py::dict out;
    out["times"] = res.sample.times;
    out["eta_modes"] = res.sample.eta_modes;
    out["X"] = x;
    out["Q"] = q;
    out["scriptQ"] = sq;
    out["max_norm_drift"] = res.max_norm_drift;
    out["q_bound"] = res.q_bound;
    out["q_bound_violations"] = res.q_bound_violations;
    return out;
}

} // namespace

PYBIND11_MODULE(_speckle, m) {
    m.doc() = "Split-step ensembles for the weakly forced Ito-Schrodinger "
              "equation, kinetic references and limit-law statistics";
    m.attr("__version__") = kVersion;

    py::register_exception<ConfigError>(m, "SpeckleConfigError");
    py::register_exception<ProbeError>(m, "ProbeError");
    py::register_exception<TailError>(m, "TailError");

    py::class_<CorrelationModel>(m, "CorrelationModel")
        .def(py::init([](int dimension, double amplitude, double corr_length) {
                 CorrelationModel model;
                 model.dimension = dimension;
                 model.amplitude = amplitude;
                 model.corr_length = corr_length;
                 model.validate();
                 return model;
             }),
             py::arg("dimension") = 1, py::arg("amplitude") = 1.0,
             py::arg("corr_length") = 1.0)
        .def_readonly("dimension", &CorrelationModel::dimension)
        .def_readonly("amplitude", &CorrelationModel::amplitude)
        .def_readonly("corr_length", &CorrelationModel::corr_length)
        .def("R0", &CorrelationModel::R0)
        .def("eval_R",
             [](const CorrelationModel& model, std::vector<double> x) {
                 return eval_R(model, x);
             })
        .def("eval_Rhat", [](const CorrelationModel& model, std::vector<double> p) {
            return eval_Rhat(model, p);
        });

    m.def(
        "diffusion_matrix",
        [](const CorrelationModel& model, double radius_stddevs, int points) {
            QuadratureSpec quad;
            quad.radius_stddevs = radius_stddevs;
            quad.points_per_dim = points;
            const auto D = diffusion_matrix(model, quad);
            py::array_t<double> out({D.dimension, D.dimension});
            auto v = out.mutable_unchecked<2>();
            for (int i = 0; i < D.dimension; ++i)
                for (int j = 0; j < D.dimension; ++j) v(i, j) = D.at(i, j);
            return out;
        },
        py::arg("model"), py::arg("radius_stddevs") = 8.0, py::arg("points") = 513);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](int dimension, double box_length, int modes_per_dim, double dt,
                         double epsilon, double horizon) {
                 GridSpec grid;
                 grid.dimension = dimension;
                 grid.box_length = box_length;
                 grid.modes_per_dim = modes_per_dim;
                 grid.epsilon = epsilon;
                 grid.horizon = horizon;
                 grid.dt = dt > 0 ? dt
                                  : GridSpec::auto_dt(modes_per_dim, box_length, epsilon,
                                                      horizon);
                 grid.validate();
                 return grid;
             }),
             py::arg("dimension") = 1, py::arg("box_length") = 40.0,
             py::arg("modes_per_dim") = 512, py::arg("dt") = 0.0,
             py::arg("epsilon") = 0.5, py::arg("horizon") = 1.0)
        .def_readonly("dimension", &GridSpec::dimension)
        .def_readonly("box_length", &GridSpec::box_length)
        .def_readonly("modes_per_dim", &GridSpec::modes_per_dim)
        .def_readonly("dt", &GridSpec::dt)
        .def_readonly("epsilon", &GridSpec::epsilon)
        .def_readonly("horizon", &GridSpec::horizon)
        .def("dk", &GridSpec::dk)
        .def("steps", &GridSpec::steps);

    m.def("mode_weights", [](const CorrelationModel& model, const GridSpec& grid) {
        const auto mw = mode_weights(model, grid);
        py::dict out;
        out["weights"] = py::array_t<double>(py::ssize_t(mw.weights.size()),
                                             mw.weights.data());
        out["discrete_R0"] = mw.discrete_R0;
        out["aliasing_warning"] = mw.aliasing_warning;
        return out;
    });

    m.def(
        "run_trajectory",
        [](const GridSpec& grid, const CorrelationModel& model, double bump_amplitude,
           double bump_width, double bump_center, std::vector<int> xi_modes,
           std::vector<int> eta_modes, std::vector<double> times,
           std::uint64_t base_seed, std::uint64_t replica) {
            GaussianBump bump = make_bump(bump_amplitude, bump_width, bump_center,
                                          std::size_t(grid.dimension));
            ProbeSpec probe;
            probe.xi_modes = std::move(xi_modes);
            probe.eta_modes = std::move(eta_modes);
            probe.times = std::move(times);
            SplitStepSolver solver(grid, model);
            NoiseStream stream = NoiseStream::make(base_seed, replica);
            return trajectory_to_dict(solver.run_trajectory(bump, stream, probe));
        },
        py::arg("grid"), py::arg("model"), py::arg("bump_amplitude") = 1.0,
        py::arg("bump_width") = 1.0, py::arg("bump_center") = 0.0,
        py::arg("xi_modes") = std::vector<int>{0},
        py::arg("eta_modes") = std::vector<int>{0},
        py::arg("times") = std::vector<double>{1.0}, py::arg("base_seed") = 1,
        py::arg("replica") = 0);

    m.def(
        "wtilde_mc",
        [](const CorrelationModel& model, double amplitude, double width, double center,
           double t, std::vector<double> xi, long samples, std::uint64_t seed) {
            const auto bump = make_bump(amplitude, width, center, xi.size());
            const auto v = solve_wtilde_mc(model, bump, t, xi, samples, seed);
            return py::make_tuple(v.value, v.stderror);
        },
        py::arg("model"), py::arg("amplitude") = 1.0, py::arg("width") = 1.0,
        py::arg("center") = 0.0, py::arg("t") = 1.0,
        py::arg("xi") = std::vector<double>{0.0}, py::arg("samples") = 20000,
        py::arg("seed") = 1);

    m.def(
        "wtilde_series",
        [](const CorrelationModel& model, double amplitude, double width, double center,
           double t, std::vector<double> xi, int max_order, long samples,
           std::uint64_t seed) {
            const auto bump = make_bump(amplitude, width, center, xi.size());
            SeriesConfig cfg;
            cfg.max_order = max_order;
            cfg.samples = samples;
            cfg.seed = seed;
            const auto v = solve_wtilde_series(model, bump, t, xi, cfg);
            return py::make_tuple(v.value, v.stderror, v.tail_bound);
        },
        py::arg("model"), py::arg("amplitude") = 1.0, py::arg("width") = 1.0,
        py::arg("center") = 0.0, py::arg("t") = 1.0,
        py::arg("xi") = std::vector<double>{0.0}, py::arg("max_order") = 16,
        py::arg("samples") = 20000, py::arg("seed") = 1);

    m.def(
        "wtilde_grid",
        [](const CorrelationModel& model, double amplitude, double width, double center,
           std::vector<double> times, std::vector<std::vector<double>> xi_set,
           int modes_per_dim, double box_length, double dt) {
            const auto bump =
                make_bump(amplitude, width, center, std::size_t(model.dimension));
            const auto sol = solve_wtilde_grid(model, bump, times, xi_set, modes_per_dim,
                                               box_length, dt);
            py::dict out;
            out["values"] = sol.values;
            out["errors"] = sol.errors;
            out["mass_drift"] = sol.mass_drift;
            return out;
        },
        py::arg("model"), py::arg("amplitude") = 1.0, py::arg("width") = 1.0,
        py::arg("center") = 0.0, py::arg("times") = std::vector<double>{1.0},
        py::arg("xi_set") = std::vector<std::vector<double>>{{0.0}},
        py::arg("modes_per_dim") = 512, py::arg("box_length") = 40.0,
        py::arg("dt") = 0.005);

    m.def(
        "sigma_sq",
        [](const CorrelationModel& model, double amplitude, double width, double center,
           double t, std::vector<double> xi, double wtilde, double werr) {
            const auto bump = make_bump(amplitude, width, center, xi.size());
            return sigma_sq(model, bump, t, xi, wtilde, werr);
        },
        py::arg("model"), py::arg("amplitude") = 1.0, py::arg("width") = 1.0,
        py::arg("center") = 0.0, py::arg("t") = 1.0,
        py::arg("xi") = std::vector<double>{0.0}, py::arg("wtilde") = 1.0,
        py::arg("werr") = 0.0);

    m.def(
        "sample_ou_paths",
        [](const CorrelationModel& model, double amplitude, double width, double center,
           std::vector<double> xi, std::vector<double> etas, std::vector<double> times,
           double horizon, double dt, long replicas, std::uint64_t seed, long samples) {
            const auto bump = make_bump(amplitude, width, center, xi.size());
            OUParams params;
            params.xi = xi;
            params.etas = std::move(etas);
            params.times = std::move(times);
            params.horizon = horizon;
            params.dt = dt;
            params.R0 = model.R0();
            params.phi0 = bump.value(params.xi);
            SeriesConfig cfg;
            cfg.samples = samples;
            CovarianceEvaluator cov(model, bump, cfg);
            const auto res = sample_ou_paths(params, cov, replicas, seed);
            const auto& e = res.ensemble;
            py::array_t<std::complex<double>> x(
                {std::size_t(e.replicas), e.n_times(), e.n_etas()});
            auto xv = x.mutable_unchecked<3>();
            for (long r = 0; r < e.replicas; ++r)
                for (std::size_t ti = 0; ti < e.n_times(); ++ti)
                    for (std::size_t j = 0; j < e.n_etas(); ++j)
                        xv(std::size_t(r), ti, j) = e.at(r, ti, j);
            py::dict out;
            out["X"] = x;
            out["max_psd_defect"] = res.max_psd_defect;
            return out;
        },
        py::arg("model"), py::arg("amplitude") = 1.0, py::arg("width") = 1.0,
        py::arg("center") = 0.0, py::arg("xi") = std::vector<double>{0.0},
        py::arg("etas") = std::vector<double>{0.0},
        py::arg("times") = std::vector<double>{1.0}, py::arg("horizon") = 1.0,
        py::arg("dt") = 0.01, py::arg("replicas") = 1000, py::arg("seed") = 1,
        py::arg("samples") = 5000);

    m.def("ks_pvalue", &ks_pvalue, py::arg("d"), py::arg("n"));
    m.def("normal_quantile", &normal_quantile, py::arg("p"));
    m.def(
        "intensity_exponential_pass",
        [](std::vector<std::complex<double>> samples, double sigma2, double alpha) {
            const auto rep = intensity_exponential_test(samples, sigma2, alpha);
            return py::make_tuple(rep.pass, rep.statistic, rep.threshold);
        },
        py::arg("samples"), py::arg("sigma2"), py::arg("alpha") = 0.01);

    m.def(
        "run_command",
        [](const std::string& command, const std::string& config_text,
           const std::string& out_dir) {
            const ExperimentConfig cfg =
                ExperimentConfig::from(Config::parse_string(config_text));
            if (command == "simulate") {
                cmd_simulate(cfg, out_dir);
                return 0;
            }
            if (command == "kinetic") {
                cmd_kinetic(cfg, out_dir);
                return 0;
            }
            if (command == "ou-sample") {
                cmd_ou_sample(cfg, out_dir);
                return 0;
            }
            if (command == "verify") return cmd_verify(cfg, out_dir);
            if (command == "report") {
                cmd_report(cfg, out_dir);
                return 0;
            }
            throw ConfigError("unknown command: " + command);
        },
        py::arg("command"), py::arg("config_text"), py::arg("out_dir"));

    m.def("default_config_text", &default_config_text);
}
