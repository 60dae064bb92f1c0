#include "speckle/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "speckle/csv.hpp"
#include "speckle/verify.hpp"

namespace speckle {

using nlohmann::json;

int default_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SPECKLE_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

void parallel_for(long count, int workers, const std::function<void(long)>& body) {
    workers = std::min<long>(std::max(workers, 1), count);
    if (workers <= 1) {
        for (long i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                    body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

CorrelationModel model_from(const ExperimentConfig& cfg) {
    CorrelationModel model;
    model.dimension = cfg.dimension;
    model.amplitude = cfg.corr_amplitude;
    model.corr_length = cfg.corr_length;
    model.family = corr_family_from_string(cfg.corr_family);
    model.validate();
    return model;
}

GaussianBump bump_from(const ExperimentConfig& cfg) {
    GaussianBump bump;
    bump.amplitude = cfg.init_amplitude;
    bump.width = cfg.init_width;
    bump.center.assign(std::size_t(cfg.dimension), 0.0);
    bump.center[0] = cfg.init_center;
    return bump;
}

std::vector<double> probe_momentum(const ExperimentConfig& cfg, long m) {
    std::vector<double> k(std::size_t(cfg.dimension), 0.0);
    const double dk = 2.0 * M_PI / cfg.grid_L;
    k[0] = double(cfg.probe_xi_mode + m) * dk;
    return k;
}

RungSetup make_rung(const ExperimentConfig& cfg, std::size_t r) {
    RungSetup s;
    s.eps = cfg.eps_ladder.at(r);
    s.model = model_from(cfg);
    s.bump = bump_from(cfg);

    s.grid.dimension = cfg.dimension;
    s.grid.box_length = cfg.grid_L;
    s.grid.modes_per_dim = cfg.grid_N;
    s.grid.epsilon = s.eps;
    s.grid.horizon = cfg.grid_T;
    s.grid.dt = cfg.grid_dt > 0
                    ? cfg.grid_dt
                    : GridSpec::auto_dt(cfg.grid_N, cfg.grid_L, s.eps, cfg.grid_T);
    s.grid.validate();

    s.probe.xi_modes.assign(std::size_t(cfg.dimension), 0);
    s.probe.xi_modes[0] = int(cfg.probe_xi_mode);
    s.probe.eta_modes.assign(cfg.probe_eta_modes.begin(), cfg.probe_eta_modes.end());
    s.probe.times = cfg.probe_times;
    s.probe.validate(s.grid);

    s.replicas = cfg.replicas.size() == 1 ? cfg.replicas[0] : cfg.replicas.at(r);
    std::uint64_t x = cfg.seed + 0x9e3779b97f4a7c15ULL * (r + 1);
    s.rung_seed = splitmix64(x);
    return s;
}

RungData run_rung(const RungSetup& setup, int workers) {
    RungData data;
    Ensemble& ens = data.ensemble;
    ens.eps = setup.eps;
    ens.times = setup.probe.times;
    ens.eta_modes = setup.probe.eta_modes;
    ens.etas.resize(setup.probe.eta_modes.size());
    for (std::size_t j = 0; j < ens.etas.size(); ++j)
        ens.etas[j] = setup.probe.eta_realized(setup.grid, int(j));
    ens.replicas = setup.replicas;
    const std::size_t nt = ens.n_times(), J = ens.n_etas();
    ens.X.resize(std::size_t(setup.replicas) * nt * J);
    ens.Q.resize(std::size_t(setup.replicas) * nt);
    ens.scriptQ.resize(std::size_t(setup.replicas) * nt);
    data.diagnostics.resize(std::size_t(setup.replicas));

    const int nworkers = std::min<long>(default_workers(workers), setup.replicas);
    std::atomic<long> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        try {
            SplitStepSolver solver(setup.grid, setup.model);
            for (long r = next.fetch_add(1); r < setup.replicas;
                 r = next.fetch_add(1)) {
                NoiseStream stream =
                    NoiseStream::make(setup.rung_seed, std::uint64_t(r));
                const auto res =
                    solver.run_trajectory(setup.bump, stream, setup.probe);
                for (std::size_t s = 0; s < nt * J; ++s)
                    ens.X[std::size_t(r) * nt * J + s] = res.sample.values[s];
                for (std::size_t ti = 0; ti < nt; ++ti) {
                    ens.Q[std::size_t(r) * nt + ti] = res.qv[ti].Q;
                    ens.scriptQ[std::size_t(r) * nt + ti] = res.qv[ti].scriptQ;
                }
                data.diagnostics[std::size_t(r)] = {r, res.max_norm_drift,
                                                    res.qv.back().Q, res.q_bound,
                                                    res.q_bound_violations};
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };
    if (nworkers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return data;
}

namespace {

std::string eps_tag(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", eps);
    return buf;
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<TrajectoryDiagnostics>& diags) {
    std::string out = "replica,max_norm_drift,q_final,q_bound,violations\n";
    for (const auto& d : diags) {
        out += std::to_string(d.replica);
        out += ',';
        out += format_double(d.max_norm_drift);
        out += ',';
        out += format_double(d.q_final);
        out += ',';
        out += format_double(d.q_bound);
        out += ',';
        out += std::to_string(d.violations);
        out += '\n';
    }
    write_file_atomic(path, out);
}

} // namespace

std::string RunPaths::probe_csv(double eps) const {
    return dir + "/probes_eps" + eps_tag(eps) + ".csv";
}

std::string RunPaths::diagnostics_csv(double eps) const {
    return dir + "/diagnostics_eps" + eps_tag(eps) + ".csv";
}

void write_manifest(const RunPaths& paths, const std::string& command,
                    const ExperimentConfig& cfg,
                    const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::string>& files, double wall_seconds,
                    const std::vector<std::pair<std::string, double>>& extra) {
    json m;
    m["command"] = command;
    m["code_version"] = kVersion;
    m["config_text"] = cfg.raw_text;
    m["base_seed"] = cfg.seed;
    m["rung_seeds"] = seeds;
    json flist = json::array();
    for (const auto& f : files) {
        json entry;
        entry["path"] = std::filesystem::path(f).filename().string();
        entry["sha256"] = sha256_file(f);
        flist.push_back(entry);
    }
    m["files"] = flist;
    m["wall_seconds"] = wall_seconds; // informational; not part of determinism
    for (const auto& [k, v] : extra) m["extra"][k] = v;
    write_file_atomic(paths.manifest_json(command), m.dump(2) + "\n");
}

void check_manifest_files(const RunPaths& paths, const std::string& command) {
    const std::string mpath = paths.manifest_json(command);
    json m = json::parse(read_file(mpath));
    for (const auto& entry : m.at("files")) {
        const std::string name = entry.at("path").get<std::string>();
        const std::string want = entry.at("sha256").get<std::string>();
        const std::string got = sha256_file(paths.dir + "/" + name);
        if (got != want)
            throw IoError("checksum mismatch for '" + name + "' (manifest " + command +
                          ")");
    }
}

void cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    RunPaths paths{out_dir};
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> files;
    for (std::size_t r = 0; r < cfg.eps_ladder.size(); ++r) {
        const RungSetup setup = make_rung(cfg, r);
        seeds.push_back(setup.rung_seed);
        const RungData data = run_rung(setup, cfg.workers);
        write_probe_csv(paths.probe_csv(setup.eps), data.ensemble);
        write_diagnostics_csv(paths.diagnostics_csv(setup.eps), data.diagnostics);
        files.push_back(paths.probe_csv(setup.eps));
        files.push_back(paths.diagnostics_csv(setup.eps));
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(paths, "simulate", cfg, seeds, files, wall);
}

void cmd_kinetic(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    RunPaths paths{out_dir};
    const CorrelationModel model = model_from(cfg);
    const GaussianBump bump = bump_from(cfg);
    const double T = cfg.grid_T;

    SeriesConfig series;
    series.max_order = cfg.kinetic_max_order;
    series.samples = cfg.kinetic_samples;
    series.seed = cfg.seed ^ 0x6b696eULL;

    const bool do_mc = cfg.kinetic_method == "all" || cfg.kinetic_method == "mc";
    const bool do_series = cfg.kinetic_method == "all" || cfg.kinetic_method == "series";
    const bool do_grid = cfg.kinetic_method == "all" || cfg.kinetic_method == "grid";

    std::vector<std::vector<double>> xi_set;
    for (long m : cfg.probe_eta_modes) xi_set.push_back(probe_momentum(cfg, m));

    // kinetic.csv: (method, t, xi, value, stderr) rows for w_tilde.
    // The reference tables below always need the grid solution, so run it
    // regardless of the method selection (it is the cheapest of the three).
    std::string table = "method,t,xi,value,stderr\n";
    GridSolution gsol = solve_wtilde_grid(model, bump, cfg.probe_times, xi_set,
                                          cfg.kinetic_grid_N, cfg.grid_L,
                                          cfg.kinetic_dt);
    for (std::size_t ti = 0; ti < cfg.probe_times.size(); ++ti) {
        const double t = cfg.probe_times[ti];
        for (std::size_t q = 0; q < xi_set.size(); ++q) {
            const auto& xi = xi_set[q];
            if (do_mc) {
                const auto v = solve_wtilde_mc(model, bump, t, xi, cfg.kinetic_mc_samples,
                                               series.seed ^ (0x100 + 7 * ti + q));
                table += "mc," + format_double(t) + "," + format_double(xi[0]) + "," +
                         format_double(v.value) + "," + format_double(v.stderror) + "\n";
            }
            if (do_series) {
                SeriesConfig sc = series;
                sc.seed = series.seed ^ (0x9000 + 31 * ti + q);
                const auto v = solve_wtilde_series(model, bump, t, xi, sc);
                table += "series," + format_double(t) + "," + format_double(xi[0]) + "," +
                         format_double(v.value) + "," +
                         format_double(std::hypot(v.stderror, v.tail_bound)) + "\n";
            }
            if (do_grid) {
                table += "grid," + format_double(t) + "," + format_double(xi[0]) + "," +
                         format_double(gsol.values[ti][q]) + "," +
                         format_double(gsol.errors[ti][q]) + "\n";
            }
        }
    }
    write_file_atomic(paths.kinetic_csv(), table);

    // kinetic_refs.csv: references for the verification pipeline
    std::string refs = "quantity,eps,t,xi,ma,mb,re,im,stderr\n";
    auto add_row = [&](const std::string& what, double eps, double t, double xi0, long ma,
                       long mb, std::complex<double> v, double err) {
        refs += what + "," + format_double(eps) + "," + format_double(t) + "," +
                format_double(xi0) + "," + std::to_string(ma) + "," +
                std::to_string(mb) + "," + format_double(v.real()) + "," +
                format_double(v.imag()) + "," + format_double(err) + "\n";
    };

    // grid w_tilde at every probe time and offset (drives criteria 3 and 6)
    for (std::size_t ti = 0; ti < cfg.probe_times.size(); ++ti)
        for (std::size_t q = 0; q < xi_set.size(); ++q)
            add_row("wtilde_grid", 0.0, cfg.probe_times[ti], xi_set[q][0],
                    cfg.probe_eta_modes[q], 0, gsol.values[ti][q], gsol.errors[ti][q]);

    // sigma^2(T, k_j)
    for (std::size_t q = 0; q < xi_set.size(); ++q) {
        const double s2 = sigma_sq(model, bump, T, xi_set[q], gsol.values.back()[q],
                                   gsol.errors.back()[q]);
        add_row("sigma2", 0.0, T, xi_set[q][0], cfg.probe_eta_modes[q], 0, s2,
                0.5 * gsol.errors.back()[q]);
    }

    const std::vector<double> xi = probe_momentum(cfg, 0);
    const double dk = 2.0 * M_PI / cfg.grid_L;
    std::vector<long> dms;
    for (long a : cfg.probe_eta_modes)
        for (long b : cfg.probe_eta_modes) {
            const long dm = a - b;
            if (dm >= 0 && std::find(dms.begin(), dms.end(), dm) == dms.end())
                dms.push_back(dm);
        }
    std::sort(dms.begin(), dms.end());

    // limit fhat(T, dm) at the finest rung's realized offsets (OU identity)
    {
        const double eps_min =
            *std::min_element(cfg.eps_ladder.begin(), cfg.eps_ladder.end());
        for (long dm : dms) {
            std::vector<double> eta(std::size_t(cfg.dimension), 0.0);
            eta[0] = double(dm) * dk / (eps_min * eps_min);
            SeriesConfig sc = series;
            std::uint64_t salt = 0x4000 + std::uint64_t(dm);
            sc.seed = series.seed ^ splitmix64(salt);
            const auto f = fhat_series(model, bump, T, eta, xi, sc);
            add_row("fhat", 0.0, T, xi[0], dm, 0, f.value,
                    std::hypot(f.stderror, f.tail_bound));
        }
    }

    // probe-pair second moments at the realized lattice geometry, per rung:
    // the covariance identity with the data factor at the actual modes
    // k_j = xi + m_j dk, so the ladder isolates the eps-dependent part
    for (std::size_t r = 0; r < cfg.eps_ladder.size(); ++r) {
        const double eps = cfg.eps_ladder[r];
        for (std::size_t a = 0; a < cfg.probe_eta_modes.size(); ++a)
            for (std::size_t b = a; b < cfg.probe_eta_modes.size(); ++b) {
                const long mj = cfg.probe_eta_modes[a];
                const long mk = cfg.probe_eta_modes[b];
                std::vector<double> eta(std::size_t(cfg.dimension), 0.0);
                eta[0] = double(mj - mk) * dk / (eps * eps);
                SeriesConfig sc = series;
                std::uint64_t salt =
                    0x8000 + 971 * r + 31 * std::uint64_t(mj + 40) + std::uint64_t(mk + 40);
                sc.seed = series.seed ^ splitmix64(salt);
                const auto f = fhat_pair_series(model, bump, T, eta,
                                                probe_momentum(cfg, mj),
                                                probe_momentum(cfg, mk), sc);
                add_row("fhat_pair", eps, T, xi[0], mj, mk, f.value,
                        std::hypot(f.stderror, f.tail_bound));
            }
    }

    // Time-quadrature covariance (e.cov1) at the finest rung's realized
    // offsets, on the OU sampler's own step grid and with its seed policy,
    // so criterion 4 compares the sampler against its exact forcing.
    {
        const double eps_min =
            *std::min_element(cfg.eps_ladder.begin(), cfg.eps_ladder.end());
        SeriesConfig sc;
        sc.max_order = cfg.kinetic_max_order;
        sc.samples = cfg.series_samples;
        sc.seed = cfg.seed ^ 0x6f757361ULL;
        CovarianceEvaluator cov(model, bump, sc);
        OUParams params;
        params.xi = xi;
        for (long m : cfg.probe_eta_modes)
            params.etas.push_back(double(m) * dk / (eps_min * eps_min));
        params.times = cfg.probe_times;
        params.horizon = cfg.grid_T;
        params.dt = cfg.ou_dt;
        params.R0 = model.R0();
        params.phi0 = bump.value(xi);
        for (long dm : dms) {
            int j = -1, k = -1;
            for (std::size_t a = 0; a < cfg.probe_eta_modes.size() && j < 0; ++a)
                for (std::size_t b = 0; b < cfg.probe_eta_modes.size(); ++b)
                    if (cfg.probe_eta_modes[a] - cfg.probe_eta_modes[b] == dm) {
                        j = int(a);
                        k = int(b);
                        break;
                    }
            if (j < 0) continue;
            const auto pair = analytic_cov(params, cov, T, j, k);
            add_row("covq", 0.0, T, xi[0], dm, 0, pair.quadrature, pair.quadrature_err);
        }
    }

    // E[Q(T)] reference: e^{R0 T} w_tilde(T, xi) - |phi0_hat(xi)|^2
    {
        SeriesConfig sc = series;
        sc.seed = series.seed ^ 0x71726566ULL;
        const auto w = solve_wtilde_series(model, bump, T, xi, sc);
        const double growth = std::exp(model.R0() * T);
        add_row("qref", 0.0, T, xi[0], 0, 0,
                growth * w.value - bump.intensity(xi),
                growth * std::hypot(w.stderror, w.tail_bound));
    }
    write_file_atomic(paths.refs_csv(), refs);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(paths, "kinetic", cfg, {series.seed},
                   {paths.kinetic_csv(), paths.refs_csv()}, wall,
                   {{"grid_mass_drift", gsol.mass_drift}});
}

void cmd_ou_sample(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    RunPaths paths{out_dir};
    const CorrelationModel model = model_from(cfg);
    const GaussianBump bump = bump_from(cfg);

    const double eps_min = *std::min_element(cfg.eps_ladder.begin(), cfg.eps_ladder.end());
    const double dk = 2.0 * M_PI / cfg.grid_L;

    OUParams params;
    params.xi = probe_momentum(cfg, 0);
    for (long m : cfg.probe_eta_modes)
        params.etas.push_back(double(m) * dk / (eps_min * eps_min));
    params.times = cfg.probe_times;
    params.horizon = cfg.grid_T;
    params.dt = cfg.ou_dt;
    params.psd_tol = cfg.ou_psd_tol;
    params.R0 = model.R0();
    params.phi0 = bump.value(params.xi);

    SeriesConfig sc;
    sc.max_order = cfg.kinetic_max_order;
    sc.samples = cfg.series_samples;
    sc.seed = cfg.seed ^ 0x6f757361ULL;
    CovarianceEvaluator cov(model, bump, sc);

    std::uint64_t ou_salt = cfg.seed ^ 0xa11ceULL;
    const std::uint64_t ou_seed = splitmix64(ou_salt);
    auto result = sample_ou_paths(params, cov, cfg.ou_replicas, ou_seed);
    write_probe_csv(paths.ou_csv(), result.ensemble);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(paths, "ou-sample", cfg, {ou_seed}, {paths.ou_csv()}, wall,
                   {{"max_psd_defect", result.max_psd_defect}});
}

int cmd_verify(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    RunPaths paths{out_dir};
    const VerifyReport report = run_verify(cfg, paths);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(paths, "verify", cfg, {},
                   {paths.report_json(), paths.ladder_csv()}, wall);
    return report.all_pass ? 0 : 1;
}

void cmd_report(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    RunPaths paths{out_dir};
    const double dk = 2.0 * M_PI / cfg.grid_L;
    const double eps_min =
        *std::min_element(cfg.eps_ladder.begin(), cfg.eps_ladder.end());
    const std::size_t ti_final = cfg.probe_times.size() - 1;

    std::vector<double> etas;
    std::vector<int> modes;
    for (long m : cfg.probe_eta_modes) {
        etas.push_back(double(m) * dk / (eps_min * eps_min));
        modes.push_back(int(m));
    }
    const Ensemble ens = read_probe_csv(paths.probe_csv(eps_min), eps_min, etas, modes);
    const KineticRefs refs = load_refs(cfg, paths);

    std::size_t j0 = 0;
    for (std::size_t j = 0; j < modes.size(); ++j)
        if (modes[j] == 0) j0 = j;

    // centered fluctuation at (T, eta = 0)
    std::complex<long double> msum{0, 0};
    for (long r = 0; r < ens.replicas; ++r) msum += ens.at(r, ti_final, j0);
    const std::complex<double> mean(double(msum.real() / ens.replicas),
                                    double(msum.imag() / ens.replicas));
    std::vector<double> re(ens.replicas), intensity(ens.replicas);
    for (long r = 0; r < ens.replicas; ++r) {
        const auto x = ens.at(r, ti_final, j0) - mean;
        re[std::size_t(r)] = x.real();
        intensity[std::size_t(r)] = std::norm(x);
    }
    std::sort(re.begin(), re.end());
    std::sort(intensity.begin(), intensity.end());

    const double sigma = std::sqrt(refs.sigma2_final[j0]);
    const double scale = 2.0 * refs.sigma2_final[j0];
    std::string qqn = "index,empirical,theoretical\n";
    std::string qqe = "index,empirical,theoretical\n";
    const long n = ens.replicas;
    for (long i = 0; i < n; ++i) {
        const double p = (double(i) + 0.5) / double(n);
        qqn += std::to_string(i) + "," + format_double(re[std::size_t(i)]) + "," +
               format_double(sigma * normal_quantile(p)) + "\n";
        qqe += std::to_string(i) + "," + format_double(intensity[std::size_t(i)]) + "," +
               format_double(-scale * std::log1p(-p)) + "\n";
    }
    write_file_atomic(paths.qq_normal_csv(), qqn);
    write_file_atomic(paths.qq_exponential_csv(), qqe);

    // covariance heat data at the final rung
    std::string heat = "eps,m_j,m_k,re_emp,im_emp,re_ref,im_ref,abs_gap\n";
    const std::size_t J = modes.size();
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t k = 0; k < J; ++k) {
            std::complex<long double> sum{0, 0};
            for (long r = 0; r < ens.replicas; ++r)
                sum += ens.at(r, ti_final, j) * std::conj(ens.at(r, ti_final, k));
            const std::complex<double> emp(double(sum.real() / ens.replicas),
                                           double(sum.imag() / ens.replicas));
            const long mj = modes[j], mk = modes[k];
            const auto f = mj <= mk
                               ? refs.fhat_pair_by_rung.back().at({mj, mk})
                               : refs.fhat_pair_by_rung.back().at({mk, mj});
            const std::complex<double> ref =
                mj <= mk ? f.value : std::conj(f.value);
            heat += format_double(eps_min) + "," + std::to_string(modes[j]) + "," +
                    std::to_string(modes[k]) + "," + format_double(emp.real()) + "," +
                    format_double(emp.imag()) + "," + format_double(ref.real()) + "," +
                    format_double(ref.imag()) + "," + format_double(std::abs(emp - ref)) +
                    "\n";
        }
    write_file_atomic(paths.cov_heat_csv(), heat);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(paths, "report", cfg, {},
                   {paths.qq_normal_csv(), paths.qq_exponential_csv(),
                    paths.cov_heat_csv()},
                   wall);
}

KineticRefs load_refs(const ExperimentConfig& cfg, const RunPaths& paths) {
    KineticRefs refs;
    const std::size_t nt = cfg.probe_times.size();
    const std::size_t J = cfg.probe_eta_modes.size();
    refs.wtilde_grid.assign(nt, std::vector<double>(J, 0));
    refs.wtilde_grid_err.assign(nt, std::vector<double>(J, 0));
    refs.sigma2_final.assign(J, 0);
    refs.fhat_pair_by_rung.resize(cfg.eps_ladder.size());

    const std::string text = read_file(paths.refs_csv());
    std::istringstream in(text);
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        char what[32];
        double eps, t, xi0, re, im, err;
        long ma, mb;
        if (std::sscanf(line.c_str(), "%31[^,],%lf,%lf,%lf,%ld,%ld,%lf,%lf,%lf", what,
                        &eps, &t, &xi0, &ma, &mb, &re, &im, &err) != 9)
            throw IoError("kinetic_refs.csv: malformed row");
        const std::string q(what);
        auto time_index = [&]() {
            for (std::size_t ti = 0; ti < nt; ++ti)
                if (std::abs(cfg.probe_times[ti] - t) < 1e-12) return ti;
            throw IoError("kinetic_refs.csv: unknown time");
        };
        auto offset_index = [&]() {
            for (std::size_t j = 0; j < J; ++j)
                if (cfg.probe_eta_modes[j] == ma) return j;
            throw IoError("kinetic_refs.csv: unknown offset");
        };
        if (q == "wtilde_grid") {
            refs.wtilde_grid[time_index()][offset_index()] = re;
            refs.wtilde_grid_err[time_index()][offset_index()] = err;
        } else if (q == "sigma2") {
            refs.sigma2_final[offset_index()] = re;
        } else if (q == "fhat") {
            refs.fhat_limit_by_dm[ma] = {{re, im}, err, 0.0};
        } else if (q == "fhat_pair") {
            for (std::size_t r = 0; r < cfg.eps_ladder.size(); ++r)
                if (std::abs(cfg.eps_ladder[r] - eps) < 1e-12)
                    refs.fhat_pair_by_rung[r][{ma, mb}] = {{re, im}, err, 0.0};
        } else if (q == "covq") {
            refs.covq_by_dm[ma] = {{re, im}, err, 0.0};
        } else if (q == "qref") {
            refs.q_ref = re;
            refs.q_ref_err = err;
        }
    }
    return refs;
}

} // namespace speckle
