/// @file run.hpp
/// @brief Batch driver: configuration, pipeline construction, the run /
///        verify / sweep / gen / spectrum entry points and their summaries.

#ifndef SDD_RUN_HPP
#define SDD_RUN_HPP

#include "sdd/checks.hpp"
#include "sdd/problems.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace sdd {

enum class RhsKind { random, ones, zero };

struct FileInput {
    std::string a, b, c;      // Matrix Market paths (c may be empty = zero C)
    std::string a_split;      // element split for A (required for coarse spaces)
    std::string c_split;      // optional
};

struct RunConfig {
    ProblemSpec problem;                 // used when `input` is absent
    std::optional<FileInput> input;
    int N = 4;
    int overlap = 2;
    PrimalMode mode = PrimalMode::ASM2;
    double tau_A = 0.1;
    double tau_S1 = -1.0;                // -1 = use k0 ("k0" in JSON); 0 disables
    double rho_robin = 1.0;
    SaddleSolveOptions solver;
    Tolerances tols;
    RhsKind rhs = RhsKind::random;
    std::uint64_t rhs_seed = 7;
    int threads = 1;
    bool verify_oracle = false;          // include dense spectral checks in `run`
    bool verbose = false;                // dump per-subdomain eigenvalue lists
    std::string summary_path;            // JSON output (empty: stdout only)
    std::string residuals_csv;           // per-stage residual histories
    std::vector<int> sweep_N{4, 9, 16};
    int sweep_cells_per_sub = 256;       // fixed subdomain size for sweeps
    std::string sweep_csv;
    int corrupt_dual_pou = -1;           // test hook: dual dof index to corrupt

    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static RunConfig load(const std::string& path);
};

struct RunSummary {
    nlohmann::json j;
    std::string str() const { return j.dump(2); }
};

struct PhaseTimes {
    double decompose_s = 0, primal_s = 0, dual_s = 0, ma0_s = 0;
};

/// Build the full preconditioner chain (decomposition, M_A, M_{S1}, M_{A0})
/// into `pl` (pipelines are pinned: the states point at sibling members).
void build_pipeline(const RunConfig& cfg, Pipeline& pl, PhaseTimes* times = nullptr);

/// The three setup phases in order, then the block solve; returns the summary.
RunSummary run(const RunConfig& cfg);

/// All invariant checks; prints a pass/fail table. Returns 0 when all pass.
int verify(const RunConfig& cfg);

/// Weak-scaling sweep at fixed subdomain size over cfg.sweep_N.
RunSummary sweep(const RunConfig& cfg);

/// Export the configured problem to Matrix Market + split files.
void generate_files(const RunConfig& cfg, const std::string& prefix);

/// Dense pencil extremes of the assembled operators.
RunSummary spectrum(const RunConfig& cfg);

} // namespace sdd

#endif
