#include "speckle/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "speckle/csv.hpp"

namespace speckle {

using nlohmann::json;

namespace {

struct DiagnosticsFile {
    double max_drift = 0;
    long violations = 0;
};

DiagnosticsFile read_diagnostics(const std::string& path) {
    DiagnosticsFile out;
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        long replica, violations;
        double drift, qf, qb;
        if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf,%ld", &replica, &drift, &qf, &qb,
                        &violations) != 5)
            throw IoError("diagnostics: malformed row in " + path);
        out.max_drift = std::max(out.max_drift, drift);
        out.violations += violations;
    }
    return out;
}

struct KineticTable {
    // rows keyed by (method, time, xi offset index)
    std::map<std::string, std::pair<double, double>> rows;

    static std::string key(const std::string& method, double t, double xi) {
        return method + "|" + format_double(t) + "|" + format_double(xi);
    }
};

KineticTable read_kinetic_table(const std::string& path) {
    KineticTable table;
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        char method[32];
        double t, xi, value, err;
        if (std::sscanf(line.c_str(), "%31[^,],%lf,%lf,%lf,%lf", method, &t, &xi, &value,
                        &err) != 5)
            throw IoError("kinetic.csv: malformed row");
        table.rows[KineticTable::key(method, t, xi)] = {value, err};
    }
    return table;
}

std::complex<double> pair_mean(const Ensemble& e, std::size_t ti, std::size_t j,
                               std::size_t k, double* se) {
    std::complex<long double> sum{0, 0};
    long double sumsq = 0;
    for (long r = 0; r < e.replicas; ++r) {
        const auto p = e.at(r, ti, j) * std::conj(e.at(r, ti, k));
        sum += p;
        sumsq += std::norm(p);
    }
    const std::complex<double> mean(double(sum.real() / e.replicas),
                                    double(sum.imag() / e.replicas));
    if (se)
        *se = std::sqrt(std::max(0.0, double(sumsq / e.replicas) - std::norm(mean)) /
                        double(e.replicas));
    return mean;
}

std::size_t offset_index(const ExperimentConfig& cfg, long m) {
    for (std::size_t j = 0; j < cfg.probe_eta_modes.size(); ++j)
        if (cfg.probe_eta_modes[j] == m) return j;
    throw ConfigError("verify: probe.eta_modes must contain offset " + std::to_string(m));
}

Criterion make_criterion(std::string name, std::vector<TestReport> reports) {
    Criterion c;
    c.name = std::move(name);
    c.pass = true;
    for (const auto& r : reports) c.pass = c.pass && r.pass;
    c.reports = std::move(reports);
    return c;
}

} // namespace

VerifyReport run_verify(const ExperimentConfig& cfg, const RunPaths& paths) {
    // Input integrity first: any corrupted CSV fails loudly here.
    check_manifest_files(paths, "simulate");
    check_manifest_files(paths, "kinetic");
    check_manifest_files(paths, "ou-sample");

    const CorrelationModel model = model_from(cfg);
    const GaussianBump bump = bump_from(cfg);
    const double T = cfg.grid_T;
    const double dk = 2.0 * M_PI / cfg.grid_L;
    const std::size_t nt = cfg.probe_times.size();
    const std::size_t ti_final = nt - 1;
    const std::size_t J = cfg.probe_eta_modes.size();

    // Load ensembles per rung plus diagnostics.
    std::vector<Ensemble> rung_ens;
    std::vector<DiagnosticsFile> rung_diag;
    for (std::size_t r = 0; r < cfg.eps_ladder.size(); ++r) {
        const double eps = cfg.eps_ladder[r];
        std::vector<double> etas;
        std::vector<int> modes;
        for (long m : cfg.probe_eta_modes) {
            etas.push_back(double(m) * dk / (eps * eps));
            modes.push_back(int(m));
        }
        rung_ens.push_back(read_probe_csv(paths.probe_csv(eps), eps, etas, modes));
        rung_diag.push_back(read_diagnostics(paths.diagnostics_csv(eps)));
    }
    const Ensemble& final_ens = rung_ens.back();

    const double eps_min = *std::min_element(cfg.eps_ladder.begin(), cfg.eps_ladder.end());
    std::vector<double> ou_etas;
    for (long m : cfg.probe_eta_modes)
        ou_etas.push_back(double(m) * dk / (eps_min * eps_min));
    Ensemble ou_ens = read_probe_csv(paths.ou_csv(), 0.0, ou_etas,
                                     std::vector<int>(cfg.probe_eta_modes.begin(),
                                                      cfg.probe_eta_modes.end()));

    const KineticRefs refs = load_refs(cfg, paths);
    const KineticTable ktable = read_kinetic_table(paths.kinetic_csv());

    VerifyReport out;

    // 1. Unitarity ------------------------------------------------------------
    {
        double drift = 0;
        for (const auto& d : rung_diag) drift = std::max(drift, d.max_drift);
        auto rep = TestReport::make("unitarity_max_drift", drift, 1e-10);
        out.criteria.push_back(make_criterion("unitarity", {rep}));
    }

    // 2. Kinetic three-way agreement -------------------------------------------
    {
        std::vector<TestReport> reps;
        double zmax = 0;
        const char* methods[3] = {"mc", "series", "grid"};
        for (long m : cfg.probe_eta_modes) {
            const double xi0 = probe_momentum(cfg, m)[0];
            double v[3], e[3];
            for (int q = 0; q < 3; ++q) {
                const auto it = ktable.rows.find(KineticTable::key(methods[q], T, xi0));
                if (it == ktable.rows.end())
                    throw IoError("kinetic.csv: missing method row; run kinetic with method=all");
                v[q] = it->second.first;
                e[q] = it->second.second;
            }
            for (int a = 0; a < 3; ++a)
                for (int b = a + 1; b < 3; ++b) {
                    const double se = std::hypot(e[a], e[b]);
                    zmax = std::max(zmax, std::abs(v[a] - v[b]) / std::max(se, 1e-300));
                }
        }
        auto rep = TestReport::make("kinetic_three_way_zmax", zmax, 3.0);
        const double tail = series_tail_bound(model.R0() * T, cfg.kinetic_max_order);
        auto tailrep = TestReport::make("series_tail_certificate", tail, 1e-6);
        reps.push_back(rep);
        reps.push_back(tailrep);
        out.criteria.push_back(make_criterion("kinetic_three_way", reps));
    }

    // 3. Ito isometry at eps ~ 0.35 --------------------------------------------
    {
        std::size_t rbest = 0;
        for (std::size_t r = 0; r < cfg.eps_ladder.size(); ++r)
            if (std::abs(cfg.eps_ladder[r] - 0.35) <
                std::abs(cfg.eps_ladder[rbest] - 0.35))
                rbest = r;
        const std::size_t j0 = offset_index(cfg, 0);
        auto rep = second_moment_identity_test(rung_ens[rbest], ti_final, j0,
                                               refs.wtilde_grid[ti_final][j0],
                                               refs.wtilde_grid_err[ti_final][j0]);
        out.criteria.push_back(make_criterion("ito_isometry", {rep}));
    }

    // 4. OU self-consistency ----------------------------------------------------
    {
        std::vector<TestReport> reps;
        const std::complex<double> phi0 = bump.value(probe_momentum(cfg, 0));
        // means at every probe time
        double zmean = 0;
        for (std::size_t ti = 0; ti < nt; ++ti) {
            const std::complex<double> want =
                phi0 * std::exp(-0.5 * model.R0() * cfg.probe_times[ti]);
            for (std::size_t j = 0; j < J; ++j) {
                std::complex<long double> sum{0, 0};
                long double var = 0;
                for (long r = 0; r < ou_ens.replicas; ++r) {
                    const auto x = ou_ens.at(r, ti, j);
                    sum += x;
                    var += std::norm(x);
                }
                const std::complex<double> mean(double(sum.real() / ou_ens.replicas),
                                                double(sum.imag() / ou_ens.replicas));
                const double se = std::sqrt(
                    std::max(0.0, double(var / ou_ens.replicas) - std::norm(mean)) /
                    double(ou_ens.replicas));
                zmean = std::max(zmean, std::abs(mean - want) / std::max(se, 1e-300));
            }
        }
        reps.push_back(TestReport::make("ou_mean_zmax", zmean, 3.0));

        // covariance against the quadrature and fhat references
        double zq = 0, zf = 0, zpseudo = 0;
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t k = j; k < J; ++k) {
                const long dm = cfg.probe_eta_modes[j] - cfg.probe_eta_modes[k];
                double se = 0;
                const auto raw = pair_mean(ou_ens, ti_final, j, k, &se);
                std::complex<long double> mj{0, 0}, mk{0, 0};
                for (long r = 0; r < ou_ens.replicas; ++r) {
                    mj += ou_ens.at(r, ti_final, j);
                    mk += ou_ens.at(r, ti_final, k);
                }
                const std::complex<double> meanj(double(mj.real() / ou_ens.replicas),
                                                 double(mj.imag() / ou_ens.replicas));
                const std::complex<double> meank(double(mk.real() / ou_ens.replicas),
                                                 double(mk.imag() / ou_ens.replicas));
                const std::complex<double> cen = raw - meanj * std::conj(meank);

                const long adm = std::labs(dm);
                const auto cq = refs.covq_by_dm.at(adm);
                const std::complex<double> cqv =
                    dm >= 0 ? cq.value : std::conj(cq.value);
                zq = std::max(zq, std::abs(cen - cqv) /
                                      std::max(std::hypot(se, cq.stderror), 1e-300));

                const auto f = refs.fhat_limit_by_dm.at(adm);
                const std::complex<double> fv = dm >= 0 ? f.value : std::conj(f.value);
                const std::complex<double> fid =
                    fv - std::norm(phi0) * std::exp(-model.R0() * T);
                zf = std::max(zf, std::abs(cen - fid) /
                                      std::max(std::hypot(se, f.stderror), 1e-300));

                // pseudo-covariance of the centered fluctuation
                std::complex<long double> ps{0, 0};
                long double psv = 0;
                for (long r = 0; r < ou_ens.replicas; ++r) {
                    const auto p = (ou_ens.at(r, ti_final, j) - meanj) *
                                   (ou_ens.at(r, ti_final, k) - meank);
                    ps += p;
                    psv += std::norm(p);
                }
                const std::complex<double> pmean(double(ps.real() / ou_ens.replicas),
                                                 double(ps.imag() / ou_ens.replicas));
                const double pse = std::sqrt(
                    std::max(0.0, double(psv / ou_ens.replicas) - std::norm(pmean)) /
                    double(ou_ens.replicas));
                zpseudo =
                    std::max(zpseudo, std::abs(pmean) / std::max(pse, 1e-300));
            }
        reps.push_back(TestReport::make("ou_cov_vs_quadrature_zmax", zq, 3.0));
        reps.push_back(TestReport::make("ou_cov_vs_fhat_zmax", zf, 3.0));
        reps.push_back(TestReport::make("ou_pseudo_cov_zmax", zpseudo, 3.0));
        out.criteria.push_back(make_criterion("ou_self_consistency", reps));
    }

    // 5. Exponential intensity ---------------------------------------------------
    {
        const std::size_t j0 = offset_index(cfg, 0);
        std::vector<std::complex<double>> ou_samples(ou_ens.replicas);
        for (long r = 0; r < ou_ens.replicas; ++r)
            ou_samples[std::size_t(r)] = ou_ens.at(r, ti_final, j0);
        auto rep_ou =
            intensity_exponential_test(ou_samples, refs.sigma2_final[j0], 0.01);
        rep_ou.name = "intensity_exponential_ou";

        std::vector<std::complex<double>> sol_samples(final_ens.replicas);
        for (long r = 0; r < final_ens.replicas; ++r)
            sol_samples[std::size_t(r)] = final_ens.at(r, ti_final, j0);
        auto rep_sol =
            intensity_exponential_test(sol_samples, refs.sigma2_final[j0], 0.01);
        rep_sol.name = "intensity_exponential_solver";
        rep_sol.eps = final_ens.eps;
        out.criteria.push_back(
            make_criterion("intensity_exponential", {rep_ou, rep_sol}));
    }

    // 6. Complex Gaussianity at the final rung ------------------------------------
    {
        auto rep = gaussianity_test(final_ens, ti_final, refs.sigma2_final, 0.01);
        out.criteria.push_back(make_criterion("gaussianity", {rep}));
    }

    // 7. Covariance convergence ladder ---------------------------------------------
    {
        std::vector<CovLadderRung> rungs;
        for (std::size_t r = 0; r < rung_ens.size(); ++r) {
            CovLadderRung rung;
            rung.eps = cfg.eps_ladder[r];
            for (std::size_t j = 0; j < J; ++j)
                for (std::size_t k = j; k < J; ++k) {
                    double se = 0;
                    const auto emp = pair_mean(rung_ens[r], ti_final, j, k, &se);
                    const auto f = refs.fhat_pair_by_rung[r].at(
                        {cfg.probe_eta_modes[j], cfg.probe_eta_modes[k]});
                    rung.emp.push_back(emp);
                    rung.emp_se.push_back(se);
                    rung.ref.push_back(f.value);
                    rung.ref_se.push_back(f.stderror);
                    rung.labels.push_back(std::to_string(cfg.probe_eta_modes[j]) + "," +
                                          std::to_string(cfg.probe_eta_modes[k]));
                }
            rungs.push_back(std::move(rung));
        }
        out.criteria.push_back(
            make_criterion("covariance_convergence", covariance_convergence_report(rungs)));
    }

    // 8. Self-averaging of the quadratic variation ----------------------------------
    {
        std::vector<SelfAveragingRung> rungs;
        for (const auto& ens : rung_ens) {
            EnsembleAccumulator acc;
            acc.ingest(ens);
            SelfAveragingRung rung;
            rung.eps = ens.eps;
            rung.q_mean = acc.q_mean(ti_final);
            rung.q_mean_se = acc.q_mean_se(ti_final);
            rung.q_var = acc.q_var(ti_final);
            rung.q_var_se = acc.q_var_se(ti_final);
            rung.sq_abs2 = acc.sq_abs2_mean(ti_final);
            rung.sq_abs2_se = acc.sq_abs2_se(ti_final);
            rungs.push_back(rung);
        }
        out.criteria.push_back(make_criterion(
            "self_averaging", self_averaging_test(rungs, refs.q_ref, refs.q_ref_err)));
    }

    // 9. Fourth-moment factorization ---------------------------------------------
    {
        std::vector<TestReport> reps;
        const std::size_t ja = offset_index(cfg, 2);
        const std::size_t jb = offset_index(cfg, -2);
        std::vector<double> disc, slack;
        for (const auto& ens : rung_ens) {
            auto rep = fourth_moment_factorization_test(ens, ti_final, ja, ti_final, jb,
                                                        model.R0(), false);
            disc.push_back(std::abs(rep.details.at("discrepancy")));
            slack.push_back(rep.details.at("se"));
        }
        double violation = 0;
        for (std::size_t r = 1; r < disc.size(); ++r)
            violation = std::max(violation, disc[r] - disc[r - 1] - slack[r]);
        auto trend = TestReport::make("fourth_moment_trend", violation, 0.0);
        trend.note = "|cov(I,I')| decreasing along the ladder (1 SE slack)";
        reps.push_back(trend);

        auto fin = fourth_moment_factorization_test(final_ens, ti_final, ja, ti_final,
                                                    jb, model.R0(), true);
        fin.name = "fourth_moment_final_rung";
        reps.push_back(fin);

        auto same = fourth_moment_factorization_test(final_ens, ti_final, ja, ti_final,
                                                     ja, model.R0(), false);
        same.name = "fourth_moment_same_mode_reported";
        reps.push_back(same);
        out.criteria.push_back(make_criterion("fourth_moment_factorization", reps));
    }

    // 10. Pathwise Q bound ----------------------------------------------------------
    {
        long violations = 0;
        for (const auto& d : rung_diag) violations += d.violations;
        auto rep = TestReport::make("q_bound_violations", double(violations), 0.0);
        out.criteria.push_back(make_criterion("q_pathwise_bound", {rep}));
    }

    // 11. Determinism -----------------------------------------------------------------
    {
        ExperimentConfig mini = cfg;
        mini.eps_ladder = {cfg.eps_ladder[0]};
        mini.replicas = {std::min<long>(8, cfg.replicas[0])};
        const RungSetup setup = make_rung(mini, 0);
        std::ostringstream bytes[2];
        for (int pass = 0; pass < 2; ++pass) {
            const RungData data = run_rung(setup, 2);
            for (long r = 0; r < data.ensemble.replicas; ++r)
                for (std::size_t s = 0; s < nt * J; ++s) {
                    const auto v = data.ensemble.X[std::size_t(r) * nt * J + s];
                    bytes[pass] << format_double(v.real()) << ','
                                << format_double(v.imag()) << '\n';
                }
            for (const auto& q : data.ensemble.Q) bytes[pass] << format_double(q) << '\n';
        }
        auto rep = TestReport::make("determinism_reruns_identical",
                                    bytes[0].str() == bytes[1].str() ? 0.0 : 1.0, 0.0);
        rep.note = "same seed twice on 2 workers reproduces identical bytes; "
                   "manifest checksums verified on load";
        out.criteria.push_back(make_criterion("determinism", {rep}));
    }

    out.all_pass = true;
    for (const auto& c : out.criteria) out.all_pass = out.all_pass && c.pass;

    // report.json + ladder.csv (deterministic bytes: no clocks anywhere)
    write_file_atomic(paths.report_json(), verify_report_json(cfg, out));
    std::string ladder = "eps,test,statistic,threshold,pass\n";
    for (const auto& c : out.criteria)
        for (const auto& r : c.reports)
            if (r.eps > 0)
                ladder += format_double(r.eps) + "," + r.name + "," +
                          format_double(r.statistic) + "," + format_double(r.threshold) +
                          "," + (r.pass ? "1" : "0") + "\n";
    write_file_atomic(paths.ladder_csv(), ladder);
    return out;
}

std::string verify_report_json(const ExperimentConfig& cfg, const VerifyReport& report) {
    json j;
    j["code_version"] = kVersion;
    j["base_seed"] = cfg.seed;
    j["eps_ladder"] = cfg.eps_ladder;
    j["all_pass"] = report.all_pass;
    json arr = json::array();
    for (const auto& c : report.criteria) {
        json jc;
        jc["criterion"] = c.name;
        jc["pass"] = c.pass;
        json reps = json::array();
        for (const auto& r : c.reports) {
            json jr;
            jr["name"] = r.name;
            jr["statistic"] = r.statistic;
            jr["threshold"] = r.threshold;
            jr["pass"] = r.pass;
            if (r.eps > 0) jr["eps"] = r.eps;
            if (!r.note.empty()) jr["note"] = r.note;
            for (const auto& [k, v] : r.details) jr["details"][k] = v;
            reps.push_back(jr);
        }
        jc["reports"] = reps;
        arr.push_back(jc);
    }
    j["criteria"] = arr;
    return j.dump(2) + "\n";
}

} // namespace speckle
