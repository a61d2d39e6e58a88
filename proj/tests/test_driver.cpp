#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>

#include "doctest.h"
#include "snse/driver.hpp"
#include "snse/errors.hpp"
#include "snse/ledger.hpp"
#include "test_util.hpp"

using namespace snse;
using namespace snse::test;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("snse_drv_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

RunConfig small_cascade_config() {
    RunConfig cfg;
    cfg.grid = {2, 32};
    cfg.time.T = 0.02;
    cfg.time.dt = 1e-3;
    cfg.initial_data.seed = 11;
    cfg.initial_data.decay = 0.8;
    cfg.noise.modes = 4;
    cfg.noise.c0 = 0.4;
    cfg.decomposition.epsilon0 = 0.05;
    cfg.decomposition.K_max = 3;
    cfg.ensemble.n_paths = 3;
    cfg.ensemble.base_seed = 77;
    return cfg;
}

// rel path -> file bytes for a committed output directory
std::map<std::string, std::string> slurp_tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file())
            out[fs::relative(e.path(), dir).generic_string()] = read_text_file(e.path().string());
    return out;
}

}  // namespace

TEST_CASE("worker count resolution: flag beats env beats default") {
    unsetenv("SNSE_WORKERS");
    CHECK(resolve_workers(0) == 1);
    CHECK(resolve_workers(3) == 3);
    setenv("SNSE_WORKERS", "5", 1);
    CHECK(resolve_workers(0) == 5);
    CHECK(resolve_workers(2) == 2);
    setenv("SNSE_WORKERS", "junk", 1);
    CHECK(resolve_workers(0) == 1);
    setenv("SNSE_WORKERS", "-4", 1);
    CHECK(resolve_workers(0) == 1);
    unsetenv("SNSE_WORKERS");
}

TEST_CASE("cascade ensembles are deterministic across worker counts") {
    const RunConfig cfg = small_cascade_config();
    const EnsembleResult a = run_cascade_ensemble(cfg, 1);
    const EnsembleResult b = run_cascade_ensemble(cfg, 3);
    REQUIRE(a.n_clean == 3);
    REQUIRE(a.n_failed == 0);
    REQUIRE(b.n_clean == 3);
    REQUIRE(a.summaries.size() == b.summaries.size());
    for (std::size_t i = 0; i < a.summaries.size(); ++i) {
        const PathSummary& x = a.summaries[i];
        const PathSummary& y = b.summaries[i];
        CHECK(x.seed == y.seed);
        CHECK(x.seed == path_seed(cfg.ensemble.base_seed, static_cast<int>(i)));
        CHECK(x.tau == y.tau);
        CHECK(x.u_sup_a == y.u_sup_a);
        CHECK(x.u_int_a == y.u_int_a);
        CHECK(x.w_sup_a == y.w_sup_a);
        CHECK(x.level_sup_a == y.level_sup_a);
    }
    CHECK(a.realized == b.realized);
    CHECK(a.realized.at("n_clean").get<int>() == 3);
    CHECK(a.realized.at("paths").size() == 3);
    CHECK(a.realized.contains("certificates"));
    CHECK(a.realized.at("levels").get<int>() == static_cast<int>(a.params.levels));
    CHECK(a.params.K0 == b.params.K0);
}

TEST_CASE("the committed output tree has the expected inventory") {
    const RunConfig cfg = small_cascade_config();
    TempDir tmp;
    const std::string d1 = (tmp.path / "run1").string();
    const std::string d2 = (tmp.path / "run2").string();

    {
        OutputWriter w(d1);
        run_cascade_ensemble(cfg, 2, &w);
        RunManifest m;
        m.config = resolved_json(cfg);
        w.commit(m);
    }
    {
        OutputWriter w(d2);
        run_cascade_ensemble(cfg, 1, &w);
        RunManifest m;
        m.config = resolved_json(cfg);
        w.commit(m);
    }

    const auto t1 = slurp_tree(d1);
    const auto t2 = slurp_tree(d2);
    CHECK(t1 == t2);  // byte-identical regardless of worker count

    CHECK(t1.count("manifest.json") == 1);
    CHECK(t1.count("fields/u0.bin") == 1);
    CHECK(t1.count("fields/u0.bin.json") == 1);
    CHECK(t1.count("fields/wbar0.bin") == 1);
    CHECK(t1.count("fields/path_0000_u_final.bin") == 1);
    CHECK(t1.count("fields/path_0000_wbar_final.bin") == 1);
    for (int i = 0; i < 3; ++i) {  // n_paths = 3 < keep cap 4
        char dir[32];
        std::snprintf(dir, sizeof dir, "ledgers/path_%04d", i);
        CHECK(t1.count(std::string(dir) + "/u.csv") == 1);
        CHECK(t1.count(std::string(dir) + "/w.csv") == 1);
        CHECK(t1.count(std::string(dir) + "/wbar.csv") == 1);
        CHECK(t1.count(std::string(dir) + "/level_0.csv") == 1);
    }

    // ledgers parse and cover the full horizon
    const EnergyLedger u = ledger_from_csv(t1.at("ledgers/path_0000/u.csv"));
    REQUIRE(u.rows() == 21);
    CHECK(u.t.front() == 0.0);
    CHECK(rel_diff(u.t.back(), cfg.time.T) < 1e-12);

    // manifest hashes match the files on disk
    const auto mj = nlohmann::json::parse(t1.at("manifest.json"));
    const RunManifest m = RunManifest::from_json(mj);
    CHECK(m.files.size() + 1 == t1.size());  // manifest.json itself is not listed
    for (const auto& e : m.files) CHECK(e.hash == fnv1a64_hex(t1.at(e.path)));
}

TEST_CASE("path failures are collected, not thrown") {
    RunConfig cfg;
    cfg.grid = {2, 16};
    cfg.run_kind = "direct";
    cfg.time.T = 0.05;
    cfg.time.dt = 1e-3;
    cfg.initial_data.kind = InitialDataConfig::Kind::single_mode;
    cfg.initial_data.mode = {1, 2, 0};
    cfg.initial_data.amplitude = 3e6;  // past the blow-up guard from step one
    cfg.noise.kind = NoiseModel::Kind::zero;
    cfg.ensemble.n_paths = 2;
    const EnsembleResult r = run_direct_ensemble(cfg, 1);
    CHECK(r.n_clean == 0);
    CHECK(r.n_failed == 2);
    REQUIRE(r.outcomes.size() == 2);
    for (const auto& oc : r.outcomes) {
        CHECK(!oc.summary.has_value());
        CHECK(!oc.error.empty());
    }
    CHECK(r.realized.at("paths")[0].contains("error"));
}

TEST_CASE("direct ensembles reproduce taylor-green decay") {
    RunConfig cfg;
    cfg.grid = {2, 16};
    cfg.run_kind = "direct";
    cfg.time.T = 0.1;
    cfg.time.dt = 1e-3;
    cfg.initial_data.kind = InitialDataConfig::Kind::taylor_green;
    cfg.noise.kind = NoiseModel::Kind::zero;
    cfg.ensemble.n_paths = 1;

    DenseOutput dense;
    const EnsembleResult r = run_direct_ensemble(cfg, 1, nullptr, &dense);
    CHECK(r.n_clean == 1);
    REQUIRE(!dense.u.empty());
    const Grid g{2, 16};
    Workspace ws(g);
    // u(t) = e^{-2t} u0 for taylor-green
    const double got = lebesgue_norm(ws, dense.u.back(), 2.0);
    const double want = std::exp(-2.0 * 0.1) * lebesgue_norm(ws, taylor_green(g), 2.0);
    CHECK(rel_diff(got, want) < 1e-10);
}

TEST_CASE("plot csv renderers read the verification json") {
    nlohmann::json v;
    v["survival"] = {{"delta", {0.1, 0.2}}, {"p_full", {0.25, 0.5}}, {"p_half", {0.2, 0.4}}};
    v["level_slope"] = {{"implied", {1.5, 1.25}}};
    const std::string s = survival_csv(v);
    CHECK(s.find("delta") != std::string::npos);
    CHECK(s.find("0.1") != std::string::npos);
    CHECK(s.find("0.25") != std::string::npos);
    const std::string k = implied_vs_k_csv(v);
    CHECK(k.find("k") != std::string::npos);
    CHECK(k.find("1.5") != std::string::npos);
    CHECK(std::count(k.begin(), k.end(), '\n') >= 2);
}
