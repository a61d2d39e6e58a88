#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "snse/config.hpp"
#include "snse/io.hpp"
#include "snse/verifier.hpp"

namespace snse {

// Per-path outcome of an ensemble. `error` is empty for clean paths; failed
// paths keep their message (blow-up reason) and are excluded from summaries.
struct PathOutcome {
    int index = 0;
    std::uint64_t seed = 0;
    std::string error;
    std::optional<PathSummary> summary;
};

struct EnsembleResult {
    std::vector<PathOutcome> outcomes;
    std::vector<PathSummary> summaries;  // clean paths only, index order
    CascadeParams params;
    nlohmann::json realized;  // decomposition certificates + thresholds
    int n_clean = 0, n_failed = 0;
};

int resolve_workers(int flag_value);  // flag > 0 wins, else SNSE_WORKERS, else 1

// Cascade ensemble: decompose once (u0 is shared), then run n_paths
// independent Wiener paths through the cascade. Ledgers are handed to
// `writer` (if non-null) as CSV under ledgers/path_XXXX/; summaries are
// always collected. Worker pool over paths; one Workspace per worker.
EnsembleResult run_cascade_ensemble(const RunConfig& cfg, int workers,
                                    OutputWriter* writer = nullptr);

// Direct (monolithic) ensemble of the full system from u0; used by the
// Taylor-Green oracle and the convergence studies. Writes u.csv ledgers.
EnsembleResult run_direct_ensemble(const RunConfig& cfg, int workers,
                                   OutputWriter* writer = nullptr,
                                   DenseOutput* dense_path0 = nullptr);

// CLI entry points (exit-code semantics live in tools/snse_main.cpp).
struct CmdOptions {
    std::string config_path;
    std::string out_dir;       // overrides config.output_dir when set
    std::string mode;          // "", "l3", "h12"
    std::string input_field;   // decompose: overrides initial_data
    std::uint64_t seeds = 0;   // overrides ensemble.base_seed when nonzero
    int paths = 0;             // overrides ensemble.n_paths when > 0
    int workers = 0;
    bool dense_output = false;
};

int cmd_decompose(const CmdOptions& opt);
int cmd_simulate(const CmdOptions& opt);
int cmd_verify(const CmdOptions& opt);
int cmd_report(const CmdOptions& opt);

// Full verification bundle (energy family + uniform bounds + survival + level
// uniformity fit + heat bench + interpolation survey + uniqueness) as JSON;
// shared by cmd_verify and the tests.
nlohmann::json run_verification(const RunConfig& cfg, int workers, OutputWriter* writer);
bool verification_all_pass(const nlohmann::json& verification);

// Human-readable rendering of a verification JSON (aligned table) plus the
// plot-ready CSVs (survival curve, implied-constant-vs-k).
std::string render_verification_text(const nlohmann::json& v);
std::string survival_csv(const nlohmann::json& v);
std::string implied_vs_k_csv(const nlohmann::json& v);

}  // namespace snse
