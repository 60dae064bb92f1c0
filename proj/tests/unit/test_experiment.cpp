#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "speckle/csv.hpp"
#include "speckle/experiment.hpp"

using namespace speckle;
namespace fs = std::filesystem;

namespace {

ExperimentConfig mini_config() {
    return ExperimentConfig::from(Config::parse_string(
        "dimension=1\n"
        "grid.N=128\n"
        "grid.L=40\n"
        "grid.T=0.1\n"
        "eps=0.5\n"
        "replicas=4\n"
        "seed=99\n"
        "probe.eta_modes=-1,0,1\n"
        "probe.times=0.05,0.1\n"));
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("speckle_test_" + std::to_string(std::uintptr_t(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("rung setup derives a dt under the phase cap with aligned probes") {
    const auto cfg = mini_config();
    const auto setup = make_rung(cfg, 0);
    CHECK(setup.grid.steps() % 20 == 0);
    for (double t : setup.probe.times) {
        const double r = t / setup.grid.dt;
        CHECK(std::abs(r - std::round(r)) < 1e-9);
    }
    CHECK(setup.replicas == 4);
}

TEST_CASE("run_rung is deterministic and independent of the worker count") {
    const auto cfg = mini_config();
    const auto setup = make_rung(cfg, 0);
    const auto a = run_rung(setup, 1);
    const auto b = run_rung(setup, 3);
    REQUIRE(a.ensemble.X.size() == b.ensemble.X.size());
    for (std::size_t i = 0; i < a.ensemble.X.size(); ++i)
        CHECK(a.ensemble.X[i] == b.ensemble.X[i]);
    for (std::size_t i = 0; i < a.ensemble.Q.size(); ++i)
        CHECK(a.ensemble.Q[i] == b.ensemble.Q[i]);
}

TEST_CASE("probe CSV round trips bit-exactly") {
    const auto cfg = mini_config();
    const auto setup = make_rung(cfg, 0);
    const auto data = run_rung(setup, 2);

    TempDir tmp;
    const std::string path = (tmp.path / "probes.csv").string();
    write_probe_csv(path, data.ensemble);
    const auto back = read_probe_csv(path, data.ensemble.eps, data.ensemble.etas,
                                     data.ensemble.eta_modes);
    REQUIRE(back.replicas == data.ensemble.replicas);
    REQUIRE(back.times == data.ensemble.times);
    for (std::size_t i = 0; i < data.ensemble.X.size(); ++i)
        CHECK(back.X[i] == data.ensemble.X[i]);
    for (std::size_t i = 0; i < data.ensemble.Q.size(); ++i) {
        CHECK(back.Q[i] == data.ensemble.Q[i]);
        CHECK(back.scriptQ[i] == data.ensemble.scriptQ[i]);
    }
}

TEST_CASE("simulate writes the documented row count and identical reruns") {
    const auto cfg = mini_config();
    TempDir tmp;
    const std::string out1 = (tmp.path / "a").string();
    const std::string out2 = (tmp.path / "b").string();
    cmd_simulate(cfg, out1);
    cmd_simulate(cfg, out2);

    RunPaths p1{out1}, p2{out2};
    const std::string csv1 = read_file(p1.probe_csv(0.5));
    const std::string csv2 = read_file(p2.probe_csv(0.5));
    CHECK(csv1 == csv2);
    // header + replicas * |times| * |etas| rows
    const long rows = std::count(csv1.begin(), csv1.end(), '\n');
    CHECK(rows == 1 + 4 * 2 * 3);
    CHECK(sha256_hex(csv1) == sha256_hex(csv2));
}

TEST_CASE("manifest checksums catch corrupted outputs") {
    const auto cfg = mini_config();
    TempDir tmp;
    const std::string out = (tmp.path / "run").string();
    cmd_simulate(cfg, out);
    RunPaths paths{out};
    CHECK_NOTHROW(check_manifest_files(paths, "simulate"));
    {
        std::ofstream f(paths.probe_csv(0.5), std::ios::app);
        f << "tampered\n";
    }
    CHECK_THROWS_AS(check_manifest_files(paths, "simulate"), IoError);
}

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("format_double round trips through text") {
    for (double v : {0.1, 1.0 / 3.0, 1e-17, 123456.789012345678, -0.0, 2e300}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("atomic writes leave no staging files behind") {
    TempDir tmp;
    const std::string path = (tmp.path / "sub" / "file.txt").string();
    write_file_atomic(path, "hello");
    CHECK(read_file(path) == "hello");
    CHECK_FALSE(fs::exists(path + ".staging"));
}

TEST_CASE("parallel_for covers every index exactly once") {
    std::vector<int> hits(1000, 0);
    parallel_for(1000, 4, [&](long i) { hits[std::size_t(i)] += 1; });
    for (int h : hits) CHECK(h == 1);
}
