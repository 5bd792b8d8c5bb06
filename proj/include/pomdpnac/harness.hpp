#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pomdpnac/actor.hpp"
#include "pomdpnac/controllers.hpp"
#include "pomdpnac/critic.hpp"
#include "pomdpnac/model.hpp"

namespace pomdpnac {

/// Code version stamped into every emitted CSV.
inline constexpr const char* kVersionString = "pomdp-nac 0.1.0";

/// Built-in benchmark model spec: the canonical two-state noisy chain, a
/// seeded Dirichlet(1) random POMDP, or a fully observed MDP (Y = X,
/// identity channel).
struct BenchmarkGenerator {
    std::string kind;  // "two_state_noisy" | "random_pomdp" | "fully_observed"
    int states = 0;
    int actions = 0;
    int observations = 0;          // random_pomdp only
    std::uint64_t seed = 0;        // random_pomdp only
    double gamma = 0.9;            // random_pomdp / fully_observed
    std::vector<double> transition;  // fully_observed: x-major [x][u][x']
    std::vector<double> reward;      // fully_observed: [x][u]
};

PomdpModel generate_benchmark(const BenchmarkGenerator& spec);

/// A full experiment: model source, controller, both learners' settings, the
/// seed sweep, and output plumbing. Exactly one of model_path/generator and
/// exactly one of block_length/controller_path is set.
struct ExperimentConfig {
    std::string model_path;
    std::optional<BenchmarkGenerator> generator;
    int block_length = -1;        // sliding-block window length n >= 0
    std::string controller_path;  // JSON internal-kernel file
    ActorConfig actor;
    CriticConfig critic;
    std::vector<std::uint64_t> seeds;
    std::string out_dir = ".";
    bool oracle = true;
    int threads = 1;
    std::uint64_t config_hash = 0;  // FNV-1a of the canonical JSON dump
};

/// Strict-schema parse (unknown keys rejected) + full validation; every
/// violated constraint is listed in one ValidationError. Step-size defaults
/// that depend only on the config (eta, alpha) are resolved in the result.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a 64-bit hash of a string (used on the canonical config dump).
std::uint64_t fnv1a_hash(const std::string& text);

/// Load an internal-state kernel from its JSON file:
/// {"nz": Z, "ny": Y, "nu": U, "kernel": [Z*Y*U*Z row-major doubles]}.
InternalStateSpec load_internal_kernel(const std::string& path);

struct ExperimentOutcome {
    std::vector<std::string> per_seed_files;  // one CSV per seed, seed order
    std::string summary_file;                 // per-iteration mean/std
    std::string timing_file;                  // wall-clock seconds per seed
};

/// Run the seed sweep (concurrently when threads > 1), write one CSV per
/// seed plus a merged summary computed back from those files, and a separate
/// timing file (excluded from the determinism guarantee). Returns the paths.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

/// Monte Carlo estimate of V^pi(xi): mean discounted return over n_traj
/// rollouts from the warm start, truncated where the tail is below 1e-8.
double mc_value(const FscPolicy& policy, const PomdpModel& model, const WarmStart& warm, int n_traj,
                RngStream& rng);

/// Shortest text that parses back to exactly the same double.
std::string format_double(double v);

/// Assemble a CSV: "# <comment>" line, header row, then data rows.
std::string csv_text(const std::string& comment, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

/// The standard comment line carried by every emitted CSV.
std::string csv_comment(std::uint64_t config_hash);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace pomdpnac
