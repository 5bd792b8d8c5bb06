#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pomdpnac {

/// Finite tabular partially observed control model: hidden states x, actions
/// u, observations y, transition tensor P[x][u][x'], observation channel
/// Phi[x][y], reward table r[x][u] in [0, r_max], and discount gamma in (0,1).
/// Immutable after construction / validation; all operations on it are pure.
class PomdpModel {
public:
    PomdpModel() = default;

    /// Validates invariants and normalizes probability rows whose sums deviate
    /// from 1 by at most 1e-9 (serialization rounding); larger deviations,
    /// negative entries, out-of-range rewards or gamma throw ValidationError.
    PomdpModel(int states, int actions, int observations,
               std::vector<double> transition,   // [x][u][x'] row-major
               std::vector<double> channel,      // [x][y] row-major
               std::vector<double> reward,       // [x][u] row-major
               double gamma, double r_max = -1.0, std::string name = "");

    int states() const { return nx_; }
    int actions() const { return nu_; }
    int observations() const { return ny_; }
    double gamma() const { return gamma_; }
    double r_max() const { return r_max_; }
    const std::string& name() const { return name_; }

    /// P(x' | x, u)
    double p(int x, int u, int x2) const { return transition_[(static_cast<std::size_t>(x) * nu_ + u) * nx_ + x2]; }
    /// Phi(y | x)
    double phi(int x, int y) const { return channel_[static_cast<std::size_t>(x) * ny_ + y]; }
    /// r(x, u)
    double r(int x, int u) const { return reward_[static_cast<std::size_t>(x) * nu_ + u]; }

    /// Row view P(. | x, u), length |X|.
    const double* p_row(int x, int u) const { return &transition_[(static_cast<std::size_t>(x) * nu_ + u) * nx_]; }
    /// Row view Phi(. | x), length |Y|.
    const double* phi_row(int x) const { return &channel_[static_cast<std::size_t>(x) * ny_]; }

    const std::vector<double>& transition() const { return transition_; }
    const std::vector<double>& channel() const { return channel_; }
    const std::vector<double>& reward() const { return reward_; }

    /// True when Y = X and the channel is the identity (fully observed case).
    bool fully_observed() const;

    /// Strict-schema JSON round trip. Unknown keys are rejected.
    static PomdpModel from_json_text(const std::string& text);
    static PomdpModel load(const std::string& path);
    std::string to_json_text() const;
    void save(const std::string& path) const;

private:
    int nx_ = 0, nu_ = 0, ny_ = 0;
    std::vector<double> transition_, channel_, reward_;
    double gamma_ = 0.0, r_max_ = 0.0;
    std::string name_;
};

/// The canonical two-state benchmark: X = Y = {0,1}, two actions ("stay-ish"
/// and "flip-ish" with 0.9 success), channel accuracy 0.8, reward 1 in state
/// 1, gamma 0.9. Fixed here as the reference model every exact oracle is
/// tested against.
PomdpModel two_state_noisy();

/// Random dense model with flat-Dirichlet probability rows and U[0,1) rewards.
PomdpModel random_pomdp(int states, int actions, int observations, std::uint64_t seed, double gamma = 0.9);

/// Fully observed wrapper: Y = X and an identity channel around a given MDP.
PomdpModel fully_observed(int states, int actions, std::vector<double> transition,
                          std::vector<double> reward, double gamma, std::string name = "fully_observed");

}  // namespace pomdpnac
