#include "pomdpnac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "pomdpnac/errors.hpp"
#include "pomdpnac/oracle.hpp"
#include "pomdpnac/sampling.hpp"
#include "pomdpnac/warmstart.hpp"

namespace pomdpnac {

namespace {

using nlohmann::json;

/// Re-throws a sub-module error with its origin prefixed, preserving the
/// concrete type (and therefore the exit code).
template <typename Fn>
auto with_attribution(const std::string& module, Fn&& fn) -> decltype(fn()) {
    const auto tag = [&](const Error& e) { return module + ": " + e.what(); };
    try {
        return fn();
    } catch (const DimensionMismatch& e) {
        throw DimensionMismatch(tag(e));
    } catch (const ValidationError& e) {
        throw ValidationError(tag(e));
    } catch (const ParseError& e) {
        throw ParseError(tag(e));
    } catch (const SizeOverflow& e) {
        throw SizeOverflow(tag(e));
    } catch (const SearchSpaceTooLarge& e) {
        throw SearchSpaceTooLarge(tag(e));
    } catch (const DegenerateObservation& e) {
        throw DegenerateObservation(tag(e));
    } catch (const DegenerateHistory& e) {
        throw DegenerateHistory(tag(e));
    } catch (const SolveFailure& e) {
        throw SolveFailure(tag(e));
    } catch (const SupportMismatch& e) {
        throw SupportMismatch(tag(e));
    } catch (const NotErgodic& e) {
        throw NotErgodic(tag(e));
    } catch (const UnboundedRatio& e) {
        throw UnboundedRatio(tag(e));
    }
}

/// Strict-schema accessor over one JSON object: typed reads mark keys as
/// seen, finish() rejects anything left over.
class StrictObject {
public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ParseError(path_ + ": expected a JSON object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <typename T>
    T get(const std::string& key, const char* type_name) {
        seen_.insert(key);
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ParseError(path_ + "." + key + ": expected " + type_name);
        }
    }

    template <typename T>
    T get_or(const std::string& key, const char* type_name, T fallback) {
        if (!j_.contains(key)) return fallback;
        return get<T>(key, type_name);
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (seen_.count(item.key()) == 0) {
                throw ParseError(path_ + ": unknown key '" + item.key() + "'");
            }
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

BenchmarkGenerator parse_generator(const json& j, const std::string& path) {
    StrictObject obj(j, path);
    BenchmarkGenerator gen;
    gen.kind = obj.get<std::string>("kind", "a string");
    if (gen.kind == "two_state_noisy") {
        obj.finish();
        return gen;
    }
    if (gen.kind == "random_pomdp") {
        gen.states = obj.get<int>("states", "an integer");
        gen.actions = obj.get<int>("actions", "an integer");
        gen.observations = obj.get<int>("observations", "an integer");
        gen.seed = obj.get<std::uint64_t>("seed", "an unsigned integer");
        gen.gamma = obj.get_or<double>("gamma", "a number", 0.9);
        obj.finish();
        return gen;
    }
    if (gen.kind == "fully_observed") {
        gen.states = obj.get<int>("states", "an integer");
        gen.actions = obj.get<int>("actions", "an integer");
        gen.transition = obj.get<std::vector<double>>("transition", "an array of numbers");
        gen.reward = obj.get<std::vector<double>>("reward", "an array of numbers");
        gen.gamma = obj.get_or<double>("gamma", "a number", 0.9);
        obj.finish();
        return gen;
    }
    throw ParseError(path + ".kind: unknown generator '" + gen.kind + "'");
}

void validate_generator(const BenchmarkGenerator& gen, std::vector<std::string>& bad) {
    if (gen.kind == "two_state_noisy") return;
    if (gen.kind == "random_pomdp") {
        if (gen.states < 1) bad.push_back("model.generator.states must be >= 1");
        if (gen.actions < 1) bad.push_back("model.generator.actions must be >= 1");
        if (gen.observations < 1) bad.push_back("model.generator.observations must be >= 1");
        if (!(gen.gamma > 0.0 && gen.gamma < 1.0)) bad.push_back("model.generator.gamma must lie in (0,1)");
        return;
    }
    // fully_observed
    if (gen.states < 1) bad.push_back("model.generator.states must be >= 1");
    if (gen.actions < 1) bad.push_back("model.generator.actions must be >= 1");
    if (!(gen.gamma > 0.0 && gen.gamma < 1.0)) bad.push_back("model.generator.gamma must lie in (0,1)");
    const std::size_t nt = static_cast<std::size_t>(gen.states) * gen.actions * gen.states;
    const std::size_t nr = static_cast<std::size_t>(gen.states) * gen.actions;
    if (gen.states >= 1 && gen.actions >= 1) {
        if (gen.transition.size() != nt) {
            bad.push_back("model.generator.transition must have |X||U||X| = " + std::to_string(nt) + " entries");
        }
        if (gen.reward.size() != nr) {
            bad.push_back("model.generator.reward must have |X||U| = " + std::to_string(nr) + " entries");
        }
    }
}

std::string read_file_or_throw(const std::string& path, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(what + ": cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

/// Streams used alongside each seed's main stream 0.
constexpr std::uint64_t kMcValueStream = 1;
constexpr int kMcValueTrajectories = 200;

struct SeedRun {
    std::uint64_t seed = 0;
    std::vector<NacIterationRecord> iterations;
    double seconds = 0.0;
};

std::vector<std::string> per_seed_header(bool oracle) {
    return {"iter", "V_hat", oracle ? "V_oracle" : "V_mc", "sgd_loss_mean", "w_norm", "beta_norm"};
}

std::string per_seed_csv(const SeedRun& run, bool oracle, std::uint64_t config_hash) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(run.iterations.size());
    for (const NacIterationRecord& rec : run.iterations) {
        rows.push_back({std::to_string(rec.t), format_double(rec.V_hat),
                        rec.V_oracle ? format_double(*rec.V_oracle) : std::string(),
                        format_double(rec.sgd_loss_mean), format_double(rec.w_norm),
                        format_double(rec.beta_norm)});
    }
    return csv_text(csv_comment(config_hash), per_seed_header(oracle), rows);
}

/// Minimal reader for the CSVs this module writes: skips '#' comments,
/// returns header + rows split on commas.
struct CsvContent {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvContent read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SolveFailure("summary: cannot re-open per-seed file: " + path);
    CsvContent out;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!header_done) {
            out.header = std::move(fields);
            header_done = true;
        } else {
            out.rows.push_back(std::move(fields));
        }
    }
    return out;
}

double parse_field(const std::string& text, const std::string& path) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw SolveFailure("summary: malformed numeric field '" + text + "' in " + path);
    }
    return v;
}

}  // namespace

PomdpModel generate_benchmark(const BenchmarkGenerator& spec) {
    if (spec.kind == "two_state_noisy") return two_state_noisy();
    if (spec.kind == "fully_observed") {
        return fully_observed(spec.states, spec.actions, spec.transition, spec.reward, spec.gamma);
    }
    if (spec.kind == "random_pomdp") {
        if (spec.states < 1 || spec.actions < 1 || spec.observations < 1) {
            throw ValidationError("random_pomdp requires states, actions, observations >= 1");
        }
        RngStream rng(spec.seed, 0);
        const auto dirichlet_row = [&](double* out, int n) {
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
                // Dirichlet(1,...,1) row: normalized Exp(1) draws.
                double u = rng.uniform();
                u = std::max(u, 1e-300);
                out[i] = -std::log(u);
                total += out[i];
            }
            for (int i = 0; i < n; ++i) out[i] /= total;
        };
        const int nx = spec.states, nu = spec.actions, ny = spec.observations;
        std::vector<double> transition(static_cast<std::size_t>(nx) * nu * nx);
        std::vector<double> channel(static_cast<std::size_t>(nx) * ny);
        std::vector<double> reward(static_cast<std::size_t>(nx) * nu);
        for (int x = 0; x < nx; ++x) {
            for (int u = 0; u < nu; ++u) {
                dirichlet_row(&transition[(static_cast<std::size_t>(x) * nu + u) * nx], nx);
            }
        }
        for (int x = 0; x < nx; ++x) dirichlet_row(&channel[static_cast<std::size_t>(x) * ny], ny);
        for (double& r : reward) r = rng.uniform();
        return PomdpModel(nx, nu, ny, std::move(transition), std::move(channel), std::move(reward), spec.gamma,
                          1.0, "random_pomdp_" + std::to_string(spec.seed));
    }
    throw ValidationError("unknown benchmark generator kind: " + spec.kind);
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }

    ExperimentConfig config;
    StrictObject root(j, "config");

    // --- model source ---
    bool has_model = root.has("model");
    if (has_model) {
        StrictObject model(root.raw("model"), "config.model");
        if (model.has("path")) config.model_path = model.get<std::string>("path", "a string");
        if (model.has("generator")) {
            config.generator = parse_generator(model.raw("generator"), "config.model.generator");
        }
        model.finish();
    }

    // --- controller ---
    bool has_controller = root.has("controller");
    if (has_controller) {
        StrictObject ctrl(root.raw("controller"), "config.controller");
        if (ctrl.has("block_length")) config.block_length = ctrl.get<int>("block_length", "an integer");
        if (ctrl.has("path")) config.controller_path = ctrl.get<std::string>("path", "a string");
        ctrl.finish();
    }

    // --- learners ---
    if (root.has("actor")) {
        StrictObject actor(root.raw("actor"), "config.actor");
        config.actor.T = actor.get_or<int>("T", "an integer", config.actor.T);
        config.actor.N = actor.get_or<long long>("N", "an integer", config.actor.N);
        config.actor.eta = actor.get_or<double>("eta", "a number", config.actor.eta);
        config.actor.zeta = actor.get_or<double>("zeta", "a number", config.actor.zeta);
        config.actor.R = actor.get_or<double>("R", "a number", config.actor.R);
        actor.finish();
    }
    if (root.has("critic")) {
        StrictObject critic(root.raw("critic"), "config.critic");
        config.critic.m = critic.get_or<int>("m", "an integer", config.critic.m);
        config.critic.K = critic.get_or<long long>("K", "an integer", config.critic.K);
        config.critic.alpha = critic.get_or<double>("alpha", "a number", config.critic.alpha);
        config.critic.R = critic.get_or<double>("R", "a number", config.critic.R);
        critic.finish();
    }

    config.seeds = root.get_or<std::vector<std::uint64_t>>("seeds", "an array of unsigned integers", {});
    config.out_dir = root.get_or<std::string>("out_dir", "a string", ".");
    config.oracle = root.get_or<bool>("oracle", "a boolean", true);
    config.threads = root.get_or<int>("threads", "an integer", 1);
    root.finish();

    // --- validation: every violated constraint, one report ---
    std::vector<std::string> bad;
    const bool from_path = !config.model_path.empty();
    const bool from_gen = config.generator.has_value();
    if (!has_model || (from_path == from_gen)) {
        bad.push_back("model must name exactly one of path / generator");
    }
    if (from_path && !std::filesystem::exists(config.model_path)) {
        bad.push_back("model.path: file not found: " + config.model_path);
    }
    if (from_gen) validate_generator(*config.generator, bad);

    const bool block = config.block_length >= 0;
    const bool kernel_file = !config.controller_path.empty();
    if (!has_controller || (block == kernel_file)) {
        bad.push_back("controller must name exactly one of block_length / path");
    }
    if (kernel_file && !std::filesystem::exists(config.controller_path)) {
        bad.push_back("controller.path: file not found: " + config.controller_path);
    }

    if (config.actor.T < 1) bad.push_back("actor.T must be >= 1 (got " + std::to_string(config.actor.T) + ")");
    if (config.actor.N < 1) bad.push_back("actor.N must be >= 1 (got " + std::to_string(config.actor.N) + ")");
    if (!(config.actor.R > 0.0)) bad.push_back("actor.R must be > 0");
    if (config.actor.eta >= 0.0 && !(config.actor.eta > 0.0)) bad.push_back("actor.eta must be > 0");
    if (config.actor.zeta >= 0.0 && !(config.actor.zeta > 0.0)) bad.push_back("actor.zeta must be > 0");
    if (config.critic.m < 1) bad.push_back("critic.m must be >= 1 (got " + std::to_string(config.critic.m) + ")");
    if (config.critic.K < 1) bad.push_back("critic.K must be >= 1 (got " + std::to_string(config.critic.K) + ")");
    if (!(config.critic.R > 0.0)) bad.push_back("critic.R must be > 0");
    if (config.critic.alpha >= 0.0 && !(config.critic.alpha > 0.0)) bad.push_back("critic.alpha must be > 0");

    if (config.seeds.empty()) bad.push_back("seeds must be a non-empty array");
    std::set<std::uint64_t> distinct(config.seeds.begin(), config.seeds.end());
    if (distinct.size() != config.seeds.size()) bad.push_back("seeds must be distinct");
    if (config.threads < 1) bad.push_back("threads must be >= 1");

    if (!bad.empty()) {
        std::string msg = "config invalid: " + bad.front();
        for (std::size_t i = 1; i < bad.size(); ++i) msg += "; " + bad[i];
        throw ValidationError(msg);
    }

    // Resolve the config-local step-size defaults (model-free ones).
    config.actor.eta = config.actor.eta_or_default();
    config.critic.alpha = config.critic.alpha_or_default();
    config.config_hash = fnv1a_hash(j.dump());
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config_text(read_file_or_throw(path, "config"));
}

InternalStateSpec load_internal_kernel(const std::string& path) {
    const std::string text = read_file_or_throw(path, "controller");
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("controller kernel: ") + e.what());
    }
    StrictObject obj(j, "kernel");
    const int nz = obj.get<int>("nz", "an integer");
    const int ny = obj.get<int>("ny", "an integer");
    const int nu = obj.get<int>("nu", "an integer");
    std::vector<double> kernel = obj.get<std::vector<double>>("kernel", "an array of numbers");
    obj.finish();
    return InternalStateSpec::generic(nz, ny, nu, std::move(kernel));
}

double mc_value(const FscPolicy& policy, const PomdpModel& model, const WarmStart& warm, int n_traj,
                RngStream& rng) {
    if (n_traj < 1) throw ValidationError("mc_value needs n_traj >= 1");
    const int horizon = default_horizon(model.gamma());
    double total = 0.0;
    for (int i = 0; i < n_traj; ++i) {
        const H0Sample h0 = sample_h0(warm, policy.internal(), model, rng);
        RolloutStart start;
        start.x0 = h0.x0;
        start.y0 = h0.y0;
        start.z0 = h0.z0;
        start.b0 = h0.b0;
        const TrajectoryRecord rec = rollout(policy, model, start, horizon, rng, /*track_beliefs=*/false);
        double ret = 0.0;
        double disc = 1.0;
        for (double r : rec.rewards) {
            ret += disc * r;
            disc *= model.gamma();
        }
        total += ret;
    }
    return total / n_traj;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_text(const std::string& comment, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
    std::string out = "# " + comment + "\n";
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const std::vector<std::string>& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

std::string csv_comment(std::uint64_t config_hash) {
    return "config_hash=" + hex16(config_hash) + " version=" + kVersionString;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << content;
    if (!out) throw SolveFailure("write failed: " + path);
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    const PomdpModel model = with_attribution("model", [&] {
        return config.generator ? generate_benchmark(*config.generator) : PomdpModel::load(config.model_path);
    });
    const InternalStateSpec internal = with_attribution("controller", [&] {
        if (!config.controller_path.empty()) {
            InternalStateSpec spec = load_internal_kernel(config.controller_path);
            if (spec.observations() != model.observations() || spec.actions() != model.actions()) {
                throw ValidationError("kernel file (ny, nu) does not match the model");
            }
            return spec;
        }
        return InternalStateSpec::sliding_block(config.block_length, model.observations(), model.actions());
    });
    const WarmStart warm = WarmStart::uniform(model, internal);

    // One exact evaluation context shared by every seed (read-only); MC
    // fallback streams are created per seed instead.
    std::shared_ptr<const InitialLaw> law;
    if (config.oracle) {
        law = std::make_shared<InitialLaw>(
            with_attribution("oracle", [&] { return enumerate_initial(warm, internal, model); }));
    }

    std::filesystem::create_directories(config.out_dir);

    const int n_seeds = static_cast<int>(config.seeds.size());
    std::vector<SeedRun> runs(static_cast<std::size_t>(n_seeds));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n_seeds));
    ExperimentOutcome outcome;
    outcome.per_seed_files.resize(static_cast<std::size_t>(n_seeds));

    const auto seed_file = [&](std::uint64_t seed) {
        return (std::filesystem::path(config.out_dir) / ("seed_" + std::to_string(seed) + ".csv")).string();
    };

    const auto worker_body = [&](int i) {
        const std::uint64_t seed = config.seeds[static_cast<std::size_t>(i)];
        NacOracleHooks hooks;
        std::shared_ptr<RngStream> mc_rng;
        if (config.oracle) {
            hooks.exact_value = [&model, &internal, law](const FscPolicy& p) {
                return exact_q(p.table(), internal, model, *law).value_at_xi;
            };
        } else {
            mc_rng = std::make_shared<RngStream>(seed, kMcValueStream);
            hooks.exact_value = [&model, &warm, mc_rng](const FscPolicy& p) {
                return mc_value(p, model, warm, kMcValueTrajectories, *mc_rng);
            };
        }
        RngStream rng(seed, 0);
        const auto start = std::chrono::steady_clock::now();
        const NacResult result = run_nac(model, internal, config.actor, config.critic, warm, rng, hooks);
        const auto stop = std::chrono::steady_clock::now();

        SeedRun& run = runs[static_cast<std::size_t>(i)];
        run.seed = seed;
        run.iterations = result.log.iterations;
        run.seconds = std::chrono::duration<double>(stop - start).count();

        const std::string path = seed_file(seed);
        write_text_file(path, per_seed_csv(run, config.oracle, config.config_hash));
        outcome.per_seed_files[static_cast<std::size_t>(i)] = path;
    };

    const int threads = std::min(config.threads, n_seeds);
    if (threads <= 1) {
        for (int i = 0; i < n_seeds; ++i) {
            with_attribution("actor (seed " + std::to_string(config.seeds[static_cast<std::size_t>(i)]) + ")",
                             [&] { worker_body(i); });
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < n_seeds; i = next.fetch_add(1)) {
                    try {
                        worker_body(i);
                    } catch (...) {
                        failures[static_cast<std::size_t>(i)] = std::current_exception();
                    }
                }
            });
        }
        for (std::thread& th : pool) th.join();
        for (int i = 0; i < n_seeds; ++i) {
            if (failures[static_cast<std::size_t>(i)]) {
                with_attribution("actor (seed " + std::to_string(config.seeds[static_cast<std::size_t>(i)]) + ")",
                                 [&]() -> void { std::rethrow_exception(failures[static_cast<std::size_t>(i)]); });
            }
        }
    }

    // Summary computed post hoc from the per-seed files themselves.
    const std::vector<std::string> header = per_seed_header(config.oracle);
    std::vector<CsvContent> tables;
    tables.reserve(static_cast<std::size_t>(n_seeds));
    for (const std::string& path : outcome.per_seed_files) tables.push_back(read_csv(path));
    const std::size_t n_rows = tables.front().rows.size();
    for (const CsvContent& t : tables) {
        if (t.header != header || t.rows.size() != n_rows) {
            throw SolveFailure("summary: per-seed files disagree on layout");
        }
    }
    std::vector<std::string> summary_header = {"iter"};
    for (std::size_t c = 1; c < header.size(); ++c) {
        summary_header.push_back(header[c] + "_mean");
        summary_header.push_back(header[c] + "_std");
    }
    std::vector<std::vector<std::string>> summary_rows;
    summary_rows.reserve(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        std::vector<std::string> row = {tables.front().rows[r][0]};
        for (std::size_t c = 1; c < header.size(); ++c) {
            double mean = 0.0;
            for (const CsvContent& t : tables) mean += parse_field(t.rows[r][c], "per-seed csv");
            mean /= n_seeds;
            double var = 0.0;
            for (const CsvContent& t : tables) {
                const double d = parse_field(t.rows[r][c], "per-seed csv") - mean;
                var += d * d;
            }
            var /= n_seeds;
            row.push_back(format_double(mean));
            row.push_back(format_double(std::sqrt(var)));
        }
        summary_rows.push_back(std::move(row));
    }
    outcome.summary_file = (std::filesystem::path(config.out_dir) / "summary.csv").string();
    write_text_file(outcome.summary_file,
                    csv_text(csv_comment(config.config_hash), summary_header, summary_rows));

    // Wall-clock timings live in their own file so the per-seed CSVs stay
    // byte-identical across reruns.
    std::vector<std::vector<std::string>> timing_rows;
    for (const SeedRun& run : runs) {
        timing_rows.push_back({std::to_string(run.seed), format_double(run.seconds)});
    }
    outcome.timing_file = (std::filesystem::path(config.out_dir) / "timing.csv").string();
    write_text_file(outcome.timing_file,
                    csv_text(csv_comment(config.config_hash), {"seed", "seconds"}, timing_rows));
    return outcome;
}

}  // namespace pomdpnac
