// pomdp-nac: command-line front end over the library. Subcommands:
//   train-nac    seed-swept experiment from a config file, or a single
//                flag-driven run with a per-iteration CSV log
//   eval-critic  m-step TD run with a per-iteration diagnostic CSV
//   solve-oracle exact/MC error report for one policy (JSON or CSV)
//   stability    certificate + empirical filter-contraction curve CSV
//   gen-model    write a benchmark model as JSON
//   sample-check sampler-fidelity TV checks against the exact laws
// Exit codes: 0 success, 2 validation/parse error, 3 runtime/solver error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pomdpnac/actor.hpp"
#include "pomdpnac/controllers.hpp"
#include "pomdpnac/critic.hpp"
#include "pomdpnac/errors.hpp"
#include "pomdpnac/filter.hpp"
#include "pomdpnac/harness.hpp"
#include "pomdpnac/model.hpp"
#include "pomdpnac/oracle.hpp"
#include "pomdpnac/rng.hpp"
#include "pomdpnac/sampling.hpp"
#include "pomdpnac/stability.hpp"
#include "pomdpnac/warmstart.hpp"

namespace {

using namespace pomdpnac;
using nlohmann::json;

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory '" + dir + "': " + ec.message());
}

PomdpModel load_model_or_default(const std::string& path) {
    if (path.empty()) return two_state_noisy();
    try {
        return PomdpModel::load(path);
    } catch (const ParseError& e) {
        throw ParseError("model: " + std::string(e.what()));
    } catch (const ValidationError& e) {
        throw ValidationError("model: " + std::string(e.what()));
    }
}

/// The controller behind a subcommand: an explicit policy file wins; a block
/// length builds the uniform sliding-block controller otherwise.
struct PolicyChoice {
    FscPolicy policy;
    InternalStateSpec internal;
};

PolicyChoice resolve_policy(const std::string& policy_path, int block_length, const PomdpModel& model) {
    if (!policy_path.empty()) {
        FscPolicy policy = FscPolicy::load(policy_path);
        if (policy.internal().observations() != model.observations() ||
            policy.internal().actions() != model.actions()) {
            throw ValidationError("controller: policy file is for " +
                                  std::to_string(policy.internal().observations()) + " observations / " +
                                  std::to_string(policy.internal().actions()) + " actions, but the model has " +
                                  std::to_string(model.observations()) + " / " + std::to_string(model.actions()));
        }
        return {policy, policy.internal()};
    }
    if (block_length < 0) throw ValidationError("block length must be >= 0 (got " + std::to_string(block_length) + ")");
    InternalStateSpec internal = InternalStateSpec::sliding_block(block_length, model.observations(), model.actions());
    FeatureMap features = FeatureMap::tabular(model.observations(), internal.size(), model.actions());
    return {FscPolicy(internal, features), internal};
}

/// Canonical hash of the effective invocation so every CSV/JSON this tool
/// writes carries the same provenance pattern as the harness outputs.
std::uint64_t invocation_hash(const json& j) { return fnv1a_hash(j.dump()); }

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// ---------------------------------------------------------------------------
// train-nac
// ---------------------------------------------------------------------------
struct TrainArgs {
    std::string config_path;
    std::string model_path;
    int block_length = 1;
    ActorConfig actor;
    CriticConfig critic;
    bool no_oracle = false;
    bool kl_ref = false;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    int threads = 1;
};

int run_train(const TrainArgs& args) {
    if (!args.config_path.empty()) {
        ExperimentConfig config = load_config(args.config_path);
        if (args.out_dir != ".") config.out_dir = args.out_dir;
        if (args.threads != 1) config.threads = args.threads;
        ensure_out_dir(config.out_dir);
        const ExperimentOutcome outcome = run_experiment(config);
        for (const std::string& f : outcome.per_seed_files) std::printf("wrote %s\n", f.c_str());
        std::printf("wrote %s\nwrote %s\n", outcome.summary_file.c_str(), outcome.timing_file.c_str());
        return 0;
    }

    // Single flag-driven run with the per-iteration log (seconds included:
    // this file is a diagnostic, not part of the determinism contract).
    const PomdpModel model = load_model_or_default(args.model_path);
    const PolicyChoice base = resolve_policy("", args.block_length, model);
    args.actor.validate();
    args.critic.validate();
    const WarmStart warm = WarmStart::uniform(model, base.internal);

    NacOracleHooks hooks;
    std::optional<InitialLaw> law;
    if (!args.no_oracle) {
        law = enumerate_initial(warm, base.internal, model);
        hooks.exact_value = [&](const FscPolicy& p) {
            return exact_q(p.table(), base.internal, model, *law).value_at_xi;
        };
        if (args.kl_ref) {
            const BruteForceResult best = best_fsc_bruteforce(base.internal, model, *law);
            hooks.kl_reference = best.best;
            hooks.kl_weights = exact_visitation(best.best, base.internal, model, *law, 1).d;
        }
    }

    RngStream rng(args.seed, 0);
    const NacResult result = run_nac(model, base.internal, args.actor, args.critic, warm, rng, hooks);

    const json invocation = {{"subcommand", "train-nac"},
                             {"model", model.name()},
                             {"block_length", args.block_length},
                             {"T", args.actor.T},
                             {"N", args.actor.N},
                             {"K", args.critic.K},
                             {"m", args.critic.m},
                             {"R", args.actor.R},
                             {"critic_R", args.critic.R},
                             {"oracle", !args.no_oracle},
                             {"kl_ref", args.kl_ref},
                             {"seed", args.seed}};
    std::vector<std::string> header = {"t", "V_hat"};
    if (!args.no_oracle) header.push_back("V_oracle");
    header.insert(header.end(), {"sgd_loss_mean", "w_norm"});
    if (args.kl_ref) header.push_back("kl_potential");
    header.push_back("seconds");

    std::vector<std::vector<std::string>> rows;
    for (const NacIterationRecord& it : result.log.iterations) {
        std::vector<std::string> row = {std::to_string(it.t), format_double(it.V_hat)};
        if (!args.no_oracle) row.push_back(opt_cell(it.V_oracle));
        row.push_back(format_double(it.sgd_loss_mean));
        row.push_back(format_double(it.w_norm));
        if (args.kl_ref) row.push_back(opt_cell(it.kl_potential));
        row.push_back(format_double(it.seconds));
        rows.push_back(std::move(row));
    }
    ensure_out_dir(args.out_dir);
    const std::string csv_path = join_path(args.out_dir, "nac_run.csv");
    write_text_file(csv_path, csv_text(csv_comment(invocation_hash(invocation)), header, rows));
    const std::string policy_path = join_path(args.out_dir, "policy_final.json");
    result.final_policy.save(policy_path);
    const std::string best_path = join_path(args.out_dir, "policy_best.json");
    result.best_policy.save(best_path);
    std::printf("wrote %s\nwrote %s\nwrote %s\n", csv_path.c_str(), policy_path.c_str(), best_path.c_str());
    if (result.log.final_V_oracle) std::printf("final exact value %s\n", format_double(*result.log.final_V_oracle).c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// eval-critic
// ---------------------------------------------------------------------------
struct CriticArgs {
    std::string model_path;
    std::string policy_path;
    int block_length = 1;
    CriticConfig critic;
    bool no_oracle = false;
    long long log_every = 1;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

int run_eval_critic(const CriticArgs& args) {
    const PomdpModel model = load_model_or_default(args.model_path);
    const PolicyChoice chosen = resolve_policy(args.policy_path, args.block_length, model);
    args.critic.validate();
    if (args.log_every < 1) throw ValidationError("log-every must be >= 1 (got " + std::to_string(args.log_every) + ")");
    const WarmStart warm = WarmStart::uniform(model, chosen.internal);

    // The critic's own target: the m-step TD fixed point of this policy.
    std::optional<FixedPointReport> fp;
    if (!args.no_oracle) {
        const InitialLaw law = enumerate_initial(warm, chosen.internal, model);
        fp = fixed_point_q(chosen.policy.table(), chosen.internal, model, law, args.critic.m);
    }
    const FeatureMap& features = chosen.policy.features();
    const auto q_gap = [&](const Eigen::VectorXd& beta) {
        double gap = 0.0;
        for (int y = 0; y < fp->q_star.ny; ++y) {
            for (int z = 0; z < fp->q_star.nz; ++z) {
                if (!fp->q_star.defined(y, z)) continue;
                for (int u = 0; u < fp->q_star.nu; ++u) {
                    gap = std::max(gap, std::abs(features.dot(beta, y, z, u) - fp->q_star.at(y, z, u)));
                }
            }
        }
        return gap;
    };

    std::vector<std::string> header = {"iter", "beta_norm", "td_error_proxy"};
    if (!args.no_oracle) header.push_back("q_gap_vs_oracle");
    std::vector<std::vector<std::string>> rows;
    const CriticObserver observer = [&](long long t, const Eigen::VectorXd& beta, double delta) {
        if (t % args.log_every != 0 && t != args.critic.K - 1) return;
        std::vector<std::string> row = {std::to_string(t), format_double(beta.norm()), format_double(delta)};
        if (!args.no_oracle) row.push_back(format_double(q_gap(beta)));
        rows.push_back(std::move(row));
    };

    RngStream rng(args.seed, 0);
    const CriticEstimate estimate = run_mstep_td(chosen.policy, model, args.critic, warm, rng, observer);

    const json invocation = {{"subcommand", "eval-critic"}, {"model", model.name()},
                             {"policy", args.policy_path},  {"block_length", args.block_length},
                             {"m", args.critic.m},          {"K", args.critic.K},
                             {"R", args.critic.R},          {"alpha", args.critic.alpha_or_default()},
                             {"oracle", !args.no_oracle},   {"seed", args.seed}};
    ensure_out_dir(args.out_dir);
    const std::string csv_path = join_path(args.out_dir, "critic_eval.csv");
    write_text_file(csv_path, csv_text(csv_comment(invocation_hash(invocation)), header, rows));
    std::printf("wrote %s\n", csv_path.c_str());
    std::printf("beta_avg norm %s", format_double(estimate.beta_avg.norm()).c_str());
    if (!args.no_oracle) std::printf(", final q gap vs fixed point %s", format_double(q_gap(estimate.beta_avg)).c_str());
    std::printf("\n");
    return 0;
}

// ---------------------------------------------------------------------------
// solve-oracle
// ---------------------------------------------------------------------------
struct OracleArgs {
    std::string model_path;
    std::string policy_path;
    std::string ref_policy_path;
    int block_length = 1;
    int m = 1;
    double R = 10.0;
    std::string report = "json";
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

int run_solve_oracle(const OracleArgs& args) {
    if (args.report != "json" && args.report != "csv") {
        throw ValidationError("report must be 'json' or 'csv' (got '" + args.report + "')");
    }
    if (args.m < 1) throw ValidationError("m must be >= 1 (got " + std::to_string(args.m) + ")");
    if (args.R <= 0) throw ValidationError("R must be > 0 (got " + format_double(args.R) + ")");
    const PomdpModel model = load_model_or_default(args.model_path);
    const PolicyChoice chosen = resolve_policy(args.policy_path, args.block_length, model);
    const WarmStart warm = WarmStart::uniform(model, chosen.internal);

    std::optional<PolicyTable> reference;
    std::optional<InternalStateSpec> reference_spec;
    if (!args.ref_policy_path.empty()) {
        const PolicyChoice ref = resolve_policy(args.ref_policy_path, -1, model);
        reference = ref.policy.table();
        reference_spec = ref.internal;
    }

    RngStream rng(args.seed, 0);
    const ErrorReport report = build_error_report(
        chosen.policy.table(), chosen.internal, model, warm, args.m, args.R, chosen.policy.features(), rng,
        reference ? &*reference : nullptr, reference_spec ? &*reference_spec : nullptr);

    const json invocation = {{"subcommand", "solve-oracle"}, {"model", model.name()},
                             {"policy", args.policy_path},   {"block_length", args.block_length},
                             {"m", args.m},                  {"R", args.R},
                             {"ref_policy", args.ref_policy_path}, {"seed", args.seed}};
    const std::uint64_t hash = invocation_hash(invocation);
    ensure_out_dir(args.out_dir);

    if (args.report == "json") {
        json j = {{"version", kVersionString},
                  {"model", model.name()},
                  {"m", report.m},
                  {"value_at_xi", report.value_at_xi},
                  {"fixed_point_gap_inf", report.fixed_point_gap_inf},
                  {"projection", {{"error", report.projection.error},
                                  {"beta_norm", report.projection.beta.norm()}}},
                  {"eps_pa", {{"first", report.eps_pa.first},
                              {"second", report.eps_pa.second},
                              {"total", report.eps_pa.total},
                              {"tv_shift", report.eps_pa.tv_shift},
                              {"tail_bound", report.eps_pa.tail_bound},
                              {"outer_terms", report.eps_pa.outer_terms},
                              {"samples_per_triple", report.eps_pa.samples_per_triple}}},
                  {"gamma_inference", {{"estimate", report.gamma_inference.estimate},
                                       {"std_error", report.gamma_inference.std_error},
                                       {"tail_bound", report.gamma_inference.tail_bound},
                                       {"horizon", report.gamma_inference.horizon},
                                       {"samples", report.gamma_inference.samples}}},
                  {"critic_M_const", report.critic_M_const}};
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
        j["config_hash"] = std::string(hex);
        if (report.concentrability_vs_ref) j["concentrability_vs_ref"] = *report.concentrability_vs_ref;
        const std::string text = j.dump(2) + "\n";
        const std::string path = join_path(args.out_dir, "oracle_report.json");
        write_text_file(path, text);
        std::fputs(text.c_str(), stdout);
        std::printf("wrote %s\n", path.c_str());
        return 0;
    }

    const std::vector<std::string> header = {
        "value_at_xi",       "fixed_point_gap_inf", "m",
        "projection_error",  "projection_beta_norm", "eps_pa_first",
        "eps_pa_second",     "eps_pa_total",        "eps_pa_tv_shift",
        "eps_pa_tail_bound", "eps_pa_outer_terms",  "eps_pa_samples_per_triple",
        "gamma_estimate",    "gamma_std_error",     "gamma_tail_bound",
        "gamma_horizon",     "gamma_samples",       "concentrability_vs_ref",
        "critic_M_const"};
    const std::vector<std::string> row = {
        format_double(report.value_at_xi),
        format_double(report.fixed_point_gap_inf),
        std::to_string(report.m),
        format_double(report.projection.error),
        format_double(report.projection.beta.norm()),
        format_double(report.eps_pa.first),
        format_double(report.eps_pa.second),
        format_double(report.eps_pa.total),
        format_double(report.eps_pa.tv_shift),
        format_double(report.eps_pa.tail_bound),
        std::to_string(report.eps_pa.outer_terms),
        std::to_string(report.eps_pa.samples_per_triple),
        format_double(report.gamma_inference.estimate),
        format_double(report.gamma_inference.std_error),
        format_double(report.gamma_inference.tail_bound),
        std::to_string(report.gamma_inference.horizon),
        std::to_string(report.gamma_inference.samples),
        opt_cell(report.concentrability_vs_ref),
        format_double(report.critic_M_const)};
    const std::string text = csv_text(csv_comment(hash), header, {row});
    const std::string path = join_path(args.out_dir, "oracle_report.csv");
    write_text_file(path, text);
    std::fputs(text.c_str(), stdout);
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// stability
// ---------------------------------------------------------------------------
struct StabilityArgs {
    std::string model_path;
    std::string policy_path;
    int block_length = 1;
    int m0 = 1;
    std::vector<int> n_list = {1, 2, 4, 8};
    int samples = 1000;
    int prior_a = 0;
    int prior_b = -1;  // default: last hidden state
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

int run_stability(const StabilityArgs& args) {
    if (args.m0 < 1) throw ValidationError("m0 must be >= 1 (got " + std::to_string(args.m0) + ")");
    if (args.n_list.empty()) throw ValidationError("n-list must not be empty");
    const PomdpModel model = load_model_or_default(args.model_path);
    const PolicyChoice chosen = resolve_policy(args.policy_path, args.block_length, model);
    const PolicyTable pi = chosen.policy.table();

    const int nx = model.states();
    const int a = args.prior_a;
    const int b = args.prior_b < 0 ? nx - 1 : args.prior_b;
    if (a < 0 || a >= nx || b < 0 || b >= nx) throw ValidationError("prior state indices must lie in 0.." + std::to_string(nx - 1));

    const ErgodicityCertificate cert = certify(pi, model, chosen.internal, args.m0);
    const bool certified = cert.which != CertifiedCondition::none;

    RngStream rng(args.seed, 0);
    const ContractionCurve curve =
        contraction_experiment(model, pi, chosen.internal, args.n_list, Belief::point_mass(a, nx),
                               Belief::point_mass(b, nx), args.samples, rng, certified ? &cert : nullptr);

    const json invocation = {{"subcommand", "stability"}, {"model", model.name()},
                             {"policy", args.policy_path}, {"block_length", args.block_length},
                             {"m0", args.m0},              {"samples", args.samples},
                             {"prior_a", a},               {"prior_b", b},
                             {"seed", args.seed}};
    const std::vector<std::string> header = {"n",        "tv_mean",           "tv_max",
                                             "envelope", "certificate_alpha", "certificate_eps0"};
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < curve.ns.size(); ++i) {
        rows.push_back({std::to_string(curve.ns[i]), format_double(curve.tv_mean[i]), format_double(curve.tv_max[i]),
                        certified ? format_double(curve.envelope[i]) : std::string(),
                        certified ? format_double(cert.alpha) : std::string(),
                        certified ? format_double(cert.eps0) : std::string()});
    }
    ensure_out_dir(args.out_dir);
    const std::string path = join_path(args.out_dir, "stability_curve.csv");
    write_text_file(path, csv_text(csv_comment(invocation_hash(invocation)), header, rows));
    std::printf("wrote %s\n", path.c_str());
    if (certified) {
        const char* which = cert.which == CertifiedCondition::cond2 ? "hidden-chain minorization"
                                                                    : "joint-chain minorization";
        std::printf("certificate: %s, alpha %s, eps0 %s, per-block factor %s\n", which,
                    format_double(cert.alpha).c_str(), format_double(cert.eps0).c_str(),
                    format_double(cert.contraction_factor()).c_str());
    } else {
        std::printf("no certificate at m0 %d; curve reported without an envelope\n", args.m0);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// gen-model
// ---------------------------------------------------------------------------
struct GenArgs {
    std::string config_path;
    std::string kind = "two_state_noisy";
    int states = 2;
    int actions = 2;
    int observations = 2;
    double gamma = 0.9;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

int run_gen_model(const GenArgs& args) {
    PomdpModel model;
    if (!args.config_path.empty()) {
        // The file holds exactly the generator block of an experiment config;
        // wrapping it reuses the strict schema parser.
        std::FILE* f = std::fopen(args.config_path.c_str(), "rb");
        if (!f) throw ValidationError("generator file not found: " + args.config_path);
        std::string text;
        char buf[4096];
        std::size_t got = 0;
        while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, got);
        std::fclose(f);
        const std::string wrapped = "{\"model\": {\"generator\": " + text +
                                    "}, \"controller\": {\"block_length\": 1}, \"seeds\": [1]}";
        const ExperimentConfig config = parse_config_text(wrapped);
        model = generate_benchmark(*config.generator);
    } else {
        BenchmarkGenerator gen;
        gen.kind = args.kind;
        gen.states = args.states;
        gen.actions = args.actions;
        gen.observations = args.observations;
        gen.gamma = args.gamma;
        gen.seed = args.seed;
        if (args.kind == "fully_observed") {
            throw ValidationError(
                "fully_observed needs transition/reward tables: pass them via --config FILE holding a generator spec");
        }
        model = generate_benchmark(gen);
    }
    ensure_out_dir(args.out_dir);
    const std::string path = join_path(args.out_dir, model.name() + ".json");
    model.save(path);
    std::printf("wrote %s (%d states, %d actions, %d observations, gamma %s)\n", path.c_str(), model.states(),
                model.actions(), model.observations(), format_double(model.gamma()).c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// sample-check
// ---------------------------------------------------------------------------
struct SampleCheckArgs {
    std::string model_path;
    std::string policy_path;
    int block_length = 1;
    long long samples = 100000;
    double tol = 0.02;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

int run_sample_check(const SampleCheckArgs& args) {
    if (args.samples < 1) throw ValidationError("samples must be >= 1 (got " + std::to_string(args.samples) + ")");
    if (args.tol <= 0) throw ValidationError("tol must be > 0 (got " + format_double(args.tol) + ")");
    const PomdpModel model = load_model_or_default(args.model_path);
    const PolicyChoice chosen = resolve_policy(args.policy_path, args.block_length, model);
    const WarmStart warm = WarmStart::uniform(model, chosen.internal);
    const InitialLaw law = enumerate_initial(warm, chosen.internal, model);
    const VisitationReport vis = exact_visitation(chosen.policy.table(), chosen.internal, model, law, 1);
    const int nz = chosen.internal.size();
    const int cells = model.observations() * nz;

    RngStream rng(args.seed, 0);
    std::vector<double> d_hat(static_cast<std::size_t>(cells), 0.0);
    for (long long i = 0; i < args.samples; ++i) {
        const VisitationSample s = sample_visitation(chosen.policy, model, warm, rng, /*track_beliefs=*/false);
        d_hat[static_cast<std::size_t>(s.y * nz + s.z)] += 1.0;
    }
    for (double& v : d_hat) v /= static_cast<double>(args.samples);
    const double tv_d = tv_distance(d_hat, vis.d);

    std::vector<double> xi_hat(static_cast<std::size_t>(cells), 0.0);
    for (long long i = 0; i < args.samples; ++i) {
        const H0Sample s = sample_h0(warm, chosen.internal, model, rng);
        xi_hat[static_cast<std::size_t>(s.y0 * nz + s.z0)] += 1.0;
    }
    for (double& v : xi_hat) v /= static_cast<double>(args.samples);
    const double tv_xi = tv_distance(xi_hat, law.xi);

    const json invocation = {{"subcommand", "sample-check"}, {"model", model.name()},
                             {"policy", args.policy_path},   {"block_length", args.block_length},
                             {"samples", args.samples},      {"tol", args.tol},
                             {"seed", args.seed}};
    const bool d_ok = tv_d <= args.tol;
    const bool xi_ok = tv_xi <= args.tol;
    const std::vector<std::string> header = {"check", "samples", "tv", "tol", "pass"};
    const std::vector<std::vector<std::string>> rows = {
        {"visitation_d", std::to_string(args.samples), format_double(tv_d), format_double(args.tol),
         d_ok ? "1" : "0"},
        {"initial_law_xi", std::to_string(args.samples), format_double(tv_xi), format_double(args.tol),
         xi_ok ? "1" : "0"}};
    ensure_out_dir(args.out_dir);
    const std::string path = join_path(args.out_dir, "sample_check.csv");
    write_text_file(path, csv_text(csv_comment(invocation_hash(invocation)), header, rows));
    std::printf("visitation_d   TV %s (tol %s) %s\n", format_double(tv_d).c_str(), format_double(args.tol).c_str(),
                d_ok ? "ok" : "FAILED");
    std::printf("initial_law_xi TV %s (tol %s) %s\n", format_double(tv_xi).c_str(), format_double(args.tol).c_str(),
                xi_ok ? "ok" : "FAILED");
    std::printf("wrote %s\n", path.c_str());
    if (!(d_ok && xi_ok)) throw SolveFailure("sampler fidelity check failed (see sample_check.csv)");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"POMDP learning toolkit: natural actor-critic with finite-state controllers,\n"
                 "m-step TD critic, exact error oracles, and filter-stability analysis."};
    app.require_subcommand(1);

    TrainArgs train;
    CLI::App* t = app.add_subcommand("train-nac", "Run the natural actor-critic loop");
    t->add_option("--config", train.config_path, "Experiment config JSON (runs the full seed sweep)");
    t->add_option("--model", train.model_path, "Model JSON (default: built-in two-state benchmark)");
    t->add_option("--block-length", train.block_length, "Sliding-block window length n >= 0")->capture_default_str();
    t->add_option("--T", train.actor.T, "Outer iterations")->capture_default_str();
    t->add_option("--N", train.actor.N, "SGD steps per iteration")->capture_default_str();
    t->add_option("--K", train.critic.K, "Critic iterations")->capture_default_str();
    t->add_option("--m", train.critic.m, "Critic lookahead steps")->capture_default_str();
    t->add_option("--R", train.actor.R, "SGD projection radius")->capture_default_str();
    t->add_option("--critic-R", train.critic.R, "Critic projection radius")->capture_default_str();
    t->add_option("--eta", train.actor.eta, "Policy step size (< 0: 1/sqrt(T))");
    t->add_option("--zeta", train.actor.zeta, "SGD step size (< 0: theorem default)");
    t->add_option("--alpha", train.critic.alpha, "Critic step size (< 0: 1/sqrt(K))");
    t->add_flag("--no-oracle", train.no_oracle, "Skip exact value evaluation");
    t->add_flag("--kl-ref", train.kl_ref, "Log the KL potential against the brute-force best controller");
    t->add_option("--seed", train.seed, "RNG seed")->capture_default_str();
    t->add_option("--out", train.out_dir, "Output directory")->capture_default_str();
    t->add_option("--threads", train.threads, "Concurrent seeds (config mode only)")->capture_default_str();

    CriticArgs critic;
    CLI::App* c = app.add_subcommand("eval-critic", "Run the m-step TD critic with a per-iteration log");
    c->add_option("--model", critic.model_path, "Model JSON (default: built-in two-state benchmark)");
    c->add_option("--policy", critic.policy_path, "Policy JSON (default: uniform sliding-block controller)");
    c->add_option("--block-length", critic.block_length, "Window length when no policy file is given")->capture_default_str();
    c->add_option("--m", critic.critic.m, "Lookahead steps")->capture_default_str();
    c->add_option("--K", critic.critic.K, "Iterations")->capture_default_str();
    c->add_option("--R", critic.critic.R, "Projection radius")->capture_default_str();
    c->add_option("--alpha", critic.critic.alpha, "Step size (< 0: 1/sqrt(K))");
    c->add_flag("--no-oracle", critic.no_oracle, "Skip the exact fixed-point gap column");
    c->add_option("--log-every", critic.log_every, "Log every k-th iteration")->capture_default_str();
    c->add_option("--seed", critic.seed, "RNG seed")->capture_default_str();
    c->add_option("--out", critic.out_dir, "Output directory")->capture_default_str();

    OracleArgs oracle;
    CLI::App* o = app.add_subcommand("solve-oracle", "Exact/MC error report for one policy");
    o->add_option("--model", oracle.model_path, "Model JSON (default: built-in two-state benchmark)");
    o->add_option("--policy", oracle.policy_path, "Policy JSON (default: uniform sliding-block controller)");
    o->add_option("--ref-policy", oracle.ref_policy_path, "Comparator policy JSON for the concentrability term");
    o->add_option("--n,--block-length", oracle.block_length, "Window length when no policy file is given")->capture_default_str();
    o->add_option("--m", oracle.m, "Lookahead steps")->capture_default_str();
    o->add_option("--R", oracle.R, "Value-class radius")->capture_default_str();
    o->add_option("--report", oracle.report, "Output format: json or csv")->capture_default_str();
    o->add_option("--seed", oracle.seed, "RNG seed")->capture_default_str();
    o->add_option("--out", oracle.out_dir, "Output directory")->capture_default_str();

    StabilityArgs stab;
    CLI::App* s = app.add_subcommand("stability", "Certificate + empirical filter-contraction curve");
    s->add_option("--model", stab.model_path, "Model JSON (default: built-in two-state benchmark)");
    s->add_option("--policy", stab.policy_path, "Policy JSON (default: uniform sliding-block controller)");
    s->add_option("--block-length", stab.block_length, "Window length when no policy file is given")->capture_default_str();
    s->add_option("--m0", stab.m0, "Minorization block length")->capture_default_str();
    s->add_option("--n-list", stab.n_list, "Horizons, comma separated")->delimiter(',')->capture_default_str();
    s->add_option("--samples", stab.samples, "Histories per horizon")->capture_default_str();
    s->add_option("--prior-a", stab.prior_a, "First prior: point mass at this state")->capture_default_str();
    s->add_option("--prior-b", stab.prior_b, "Second prior: point mass at this state (default: last state)");
    s->add_option("--seed", stab.seed, "RNG seed")->capture_default_str();
    s->add_option("--out", stab.out_dir, "Output directory")->capture_default_str();

    GenArgs gen;
    CLI::App* g = app.add_subcommand("gen-model", "Write a benchmark model as JSON");
    g->add_option("--config", gen.config_path, "Generator spec JSON (required for fully_observed)");
    g->add_option("--kind", gen.kind, "two_state_noisy | random_pomdp | fully_observed")->capture_default_str();
    g->add_option("--states", gen.states, "Hidden states (random_pomdp)")->capture_default_str();
    g->add_option("--actions", gen.actions, "Actions (random_pomdp)")->capture_default_str();
    g->add_option("--observations", gen.observations, "Observations (random_pomdp)")->capture_default_str();
    g->add_option("--gamma", gen.gamma, "Discount factor (random_pomdp)")->capture_default_str();
    g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
    g->add_option("--out", gen.out_dir, "Output directory")->capture_default_str();

    SampleCheckArgs check;
    CLI::App* k = app.add_subcommand("sample-check", "Sampler-fidelity TV checks against the exact laws");
    k->add_option("--model", check.model_path, "Model JSON (default: built-in two-state benchmark)");
    k->add_option("--policy", check.policy_path, "Policy JSON (default: uniform sliding-block controller)");
    k->add_option("--block-length", check.block_length, "Window length when no policy file is given")->capture_default_str();
    k->add_option("--samples", check.samples, "Samples per check")->capture_default_str();
    k->add_option("--tol", check.tol, "TV tolerance")->capture_default_str();
    k->add_option("--seed", check.seed, "RNG seed")->capture_default_str();
    k->add_option("--out", check.out_dir, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (t->parsed()) return run_train(train);
        if (c->parsed()) return run_eval_critic(critic);
        if (o->parsed()) return run_solve_oracle(oracle);
        if (s->parsed()) return run_stability(stab);
        if (g->parsed()) return run_gen_model(gen);
        if (k->parsed()) return run_sample_check(check);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
