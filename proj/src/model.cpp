#include "pomdpnac/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pomdpnac/errors.hpp"
#include "pomdpnac/rng.hpp"

namespace pomdpnac {

namespace {

using nlohmann::json;

/// Checks one probability row: entries >= 0 and sum within tol of 1; rows
/// inside tolerance are renormalized exactly.
void validate_row(double* row, int n, double tol, const std::string& what) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        if (row[i] < 0.0) throw ValidationError(what + " has a negative entry");
        sum += row[i];
    }
    if (std::abs(sum - 1.0) > tol)
        throw ValidationError(what + " sums to " + std::to_string(sum) + ", expected 1 within " + std::to_string(tol));
    for (int i = 0; i < n; ++i) row[i] /= sum;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ParseError("unknown key '" + it.key() + "' in " + where);
}

}  // namespace

PomdpModel::PomdpModel(int states, int actions, int observations,
                       std::vector<double> transition, std::vector<double> channel,
                       std::vector<double> reward, double gamma, double r_max, std::string name)
    : nx_(states), nu_(actions), ny_(observations),
      transition_(std::move(transition)), channel_(std::move(channel)), reward_(std::move(reward)),
      gamma_(gamma), name_(std::move(name)) {
    if (nx_ <= 0 || nu_ <= 0 || ny_ <= 0)
        throw ValidationError("state, action and observation counts must be positive");
    const std::size_t big = static_cast<std::size_t>(nx_) * nu_ * nx_;
    if (big > 1000000)
        throw ValidationError("|X|*|U|*|X| exceeds the dense desk-scale cap of 1e6");
    if (transition_.size() != big)
        throw DimensionMismatch("transition tensor size != |X|*|U|*|X|");
    if (channel_.size() != static_cast<std::size_t>(nx_) * ny_)
        throw DimensionMismatch("channel size != |X|*|Y|");
    if (reward_.size() != static_cast<std::size_t>(nx_) * nu_)
        throw DimensionMismatch("reward size != |X|*|U|");
    if (!(gamma_ > 0.0 && gamma_ < 1.0))
        throw ValidationError("gamma must lie strictly inside (0,1)");

    for (int x = 0; x < nx_; ++x) {
        for (int u = 0; u < nu_; ++u)
            validate_row(&transition_[(static_cast<std::size_t>(x) * nu_ + u) * nx_], nx_, 1e-9,
                         "transition row P(.|x=" + std::to_string(x) + ",u=" + std::to_string(u) + ")");
        validate_row(&channel_[static_cast<std::size_t>(x) * ny_], ny_, 1e-9,
                     "channel row Phi(.|x=" + std::to_string(x) + ")");
    }

    double max_r = 0.0;
    for (double v : reward_) {
        if (v < 0.0) throw ValidationError("rewards must be nonnegative");
        max_r = std::max(max_r, v);
    }
    r_max_ = (r_max < 0.0) ? std::max(max_r, 1e-12) : r_max;
    if (max_r > r_max_)
        throw ValidationError("a reward entry exceeds r_max");
}

bool PomdpModel::fully_observed() const {
    if (ny_ != nx_) return false;
    for (int x = 0; x < nx_; ++x)
        for (int y = 0; y < ny_; ++y)
            if (phi(x, y) != (x == y ? 1.0 : 0.0)) return false;
    return true;
}

PomdpModel PomdpModel::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("model file must be a JSON object");
    reject_unknown_keys(j, {"states", "actions", "observations", "gamma", "transition", "channel", "reward", "r_max", "name"},
                        "model file");
    for (const char* key : {"states", "actions", "observations", "gamma", "transition", "channel", "reward"})
        if (!j.contains(key)) throw ParseError(std::string("model file is missing key '") + key + "'");

    try {
        const int nx = j.at("states").get<int>();
        const int nu = j.at("actions").get<int>();
        const int ny = j.at("observations").get<int>();
        if (nx <= 0 || nu <= 0 || ny <= 0) throw ValidationError("sizes must be positive");

        auto get_matrix = [](const json& arr, int rows, int cols, const char* what) {
            if (!arr.is_array() || static_cast<int>(arr.size()) != rows)
                throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(rows) + " rows");
            std::vector<double> out;
            out.reserve(static_cast<std::size_t>(rows) * cols);
            for (const auto& row : arr) {
                if (!row.is_array() || static_cast<int>(row.size()) != cols)
                    throw DimensionMismatch(std::string(what) + ": expected rows of length " + std::to_string(cols));
                for (const auto& v : row) out.push_back(v.get<double>());
            }
            return out;
        };

        const json& tr = j.at("transition");
        if (!tr.is_array() || static_cast<int>(tr.size()) != nx)
            throw DimensionMismatch("transition: expected |X| outer entries");
        std::vector<double> transition;
        transition.reserve(static_cast<std::size_t>(nx) * nu * nx);
        for (const auto& per_x : tr) {
            auto block = get_matrix(per_x, nu, nx, "transition[x]");
            transition.insert(transition.end(), block.begin(), block.end());
        }
        auto channel = get_matrix(j.at("channel"), nx, ny, "channel");
        auto reward = get_matrix(j.at("reward"), nx, nu, "reward");

        return PomdpModel(nx, nu, ny, std::move(transition), std::move(channel), std::move(reward),
                          j.at("gamma").get<double>(), j.value("r_max", -1.0), j.value("name", std::string()));
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file has a wrongly typed field: ") + e.what());
    }
}

PomdpModel PomdpModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string PomdpModel::to_json_text() const {
    json tr = json::array();
    for (int x = 0; x < nx_; ++x) {
        json per_x = json::array();
        for (int u = 0; u < nu_; ++u) {
            json row = json::array();
            for (int x2 = 0; x2 < nx_; ++x2) row.push_back(p(x, u, x2));
            per_x.push_back(std::move(row));
        }
        tr.push_back(std::move(per_x));
    }
    json ch = json::array(), rw = json::array();
    for (int x = 0; x < nx_; ++x) {
        json row = json::array();
        for (int y = 0; y < ny_; ++y) row.push_back(phi(x, y));
        ch.push_back(std::move(row));
    }
    for (int x = 0; x < nx_; ++x) {
        json row = json::array();
        for (int u = 0; u < nu_; ++u) row.push_back(r(x, u));
        rw.push_back(std::move(row));
    }
    json j = {{"states", nx_}, {"actions", nu_}, {"observations", ny_}, {"gamma", gamma_},
              {"transition", std::move(tr)}, {"channel", std::move(ch)}, {"reward", std::move(rw)},
              {"r_max", r_max_}};
    if (!name_.empty()) j["name"] = name_;
    return j.dump(2) + "\n";
}

void PomdpModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write model file '" + path + "'");
    out << to_json_text();
}

PomdpModel two_state_noisy() {
    // P(.|x, u=0) keeps the state with probability 0.9; u=1 flips it with 0.9.
    std::vector<double> transition = {
        // x=0: u=0 rows over x'={0,1}; u=1
        0.9, 0.1, 0.1, 0.9,
        // x=1
        0.1, 0.9, 0.9, 0.1,
    };
    std::vector<double> channel = {0.8, 0.2, 0.2, 0.8};
    std::vector<double> reward = {0.0, 0.0, 1.0, 1.0};
    return PomdpModel(2, 2, 2, std::move(transition), std::move(channel), std::move(reward), 0.9, 1.0,
                      "two_state_noisy");
}

PomdpModel random_pomdp(int states, int actions, int observations, std::uint64_t seed, double gamma) {
    RngStream rng(seed, /*stream=*/0xB0DE1);
    std::vector<double> transition;
    transition.reserve(static_cast<std::size_t>(states) * actions * states);
    for (int x = 0; x < states; ++x)
        for (int u = 0; u < actions; ++u) {
            auto row = rng.dirichlet_flat(states);
            transition.insert(transition.end(), row.begin(), row.end());
        }
    std::vector<double> channel;
    channel.reserve(static_cast<std::size_t>(states) * observations);
    for (int x = 0; x < states; ++x) {
        auto row = rng.dirichlet_flat(observations);
        channel.insert(channel.end(), row.begin(), row.end());
    }
    std::vector<double> reward(static_cast<std::size_t>(states) * actions);
    for (auto& v : reward) v = rng.uniform();
    return PomdpModel(states, actions, observations, std::move(transition), std::move(channel), std::move(reward),
                      gamma, 1.0, "random_pomdp_" + std::to_string(seed));
}

PomdpModel fully_observed(int states, int actions, std::vector<double> transition,
                          std::vector<double> reward, double gamma, std::string name) {
    std::vector<double> channel(static_cast<std::size_t>(states) * states, 0.0);
    for (int x = 0; x < states; ++x) channel[static_cast<std::size_t>(x) * states + x] = 1.0;
    return PomdpModel(states, actions, states, std::move(transition), std::move(channel), std::move(reward),
                      gamma, -1.0, std::move(name));
}

}  // namespace pomdpnac
