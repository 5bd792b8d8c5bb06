#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pomdpnac/model.hpp"
#include "pomdpnac/rng.hpp"

namespace pomdpnac {

/// Internal-state space Z of a finite-state controller together with its
/// transition kernel phi(z'|z,y,u). Two kinds: a generic stochastic kernel,
/// and the sliding-block construction whose state is the window of the last n
/// (observation, action) pairs, encoded as one integer via mixed-radix packing
/// (observation digits first, then action digits). n = 0 gives a singleton Z
/// (reactive controller).
class InternalStateSpec {
public:
    static InternalStateSpec sliding_block(int n, int ny, int nu);
    /// kernel layout: [z][y][u][z'] row-major, each final row a distribution.
    static InternalStateSpec generic(int nz, int ny, int nu, std::vector<double> kernel);

    int size() const { return nz_; }
    int observations() const { return ny_; }
    int actions() const { return nu_; }
    bool is_sliding_block() const { return block_length_ >= 0; }
    /// Window length n; only valid for sliding-block specs.
    int block_length() const;

    /// phi(z' | z, y, u).
    double kernel(int z, int y, int u, int z2) const;

    /// Draw z' from phi(.|z,y,u); deterministic for sliding-block specs.
    int internal_step(int z, int y, int u, RngStream& rng) const;

    /// Deterministic successor; valid when the (z,y,u) row is one-hot.
    int step_deterministic(int z, int y, int u) const;

    /// Sliding-block decoding: the window's observation and action digits,
    /// oldest first. Only valid for sliding-block specs.
    std::vector<int> window_observations(int z) const;
    std::vector<int> window_actions(int z) const;
    /// Sliding-block encoding of aligned windows (oldest first).
    int pack_window(const std::vector<int>& ys, const std::vector<int>& us) const;

private:
    InternalStateSpec() = default;

    int nz_ = 1, ny_ = 0, nu_ = 0;
    int block_length_ = -1;              // >= 0 marks a sliding-block spec
    std::vector<double> kernel_;         // generic kind only
    std::vector<int> next_;              // deterministic table [z][y][u], sliding-block kind
};

/// Feature map psi(y,z,u) in R^d with every feature vector of l2 norm <= 1.
/// The default is the tabular one-hot map (exact representation); custom maps
/// inject compressed features to exercise nonzero projection error.
class FeatureMap {
public:
    /// One-hot indicator per (y,z,u); d = |Y|*|Z|*|U|. Throws SizeOverflow
    /// past the dimension cap.
    static FeatureMap tabular(int ny, int nz, int nu, long long cap = 2000000);
    /// Explicit rows: psi[(y*|Z|+z)*|U|+u][0..d). Rows must have norm <= 1.
    static FeatureMap custom(int ny, int nz, int nu, int dim, std::vector<double> rows);

    int dim() const { return dim_; }
    int observations() const { return ny_; }
    int internal_states() const { return nz_; }
    int actions() const { return nu_; }
    bool is_tabular() const { return tabular_; }

    /// Flat (y,z,u) index used by tabular features and by value tables.
    int triple_index(int y, int z, int u) const { return (y * nz_ + z) * nu_ + u; }

    /// <v, psi(y,z,u)>
    double dot(const Eigen::VectorXd& v, int y, int z, int u) const;
    /// acc += s * psi(y,z,u)
    void add_scaled(Eigen::VectorXd& acc, int y, int z, int u, double s) const;
    /// out = psi(y,z,u)
    void copy_to(int y, int z, int u, Eigen::VectorXd& out) const;

private:
    FeatureMap() = default;

    int ny_ = 0, nz_ = 0, nu_ = 0, dim_ = 0;
    bool tabular_ = true;
    std::vector<double> rows_;  // custom kind only, [(y,z,u)][d] row-major
};

/// Plain conditional action table pi(u|y,z): the policy representation the
/// exact oracles consume (softmax policies export it, deterministic
/// brute-force candidates are built from it directly).
struct PolicyTable {
    int ny = 0, nz = 0, nu = 0;
    std::vector<double> probs;  // [(y*nz+z)*nu + u]

    double prob(int y, int z, int u) const { return probs[static_cast<std::size_t>((y * nz + z) * nu + u)]; }

    static PolicyTable uniform(int ny, int nz, int nu);
    /// Deterministic table from an action map (y,z) -> u.
    static PolicyTable deterministic(int ny, int nz, int nu, const std::vector<int>& action_of);
};

/// Softmax-linear policy over actions: pi(u|y,z) proportional to
/// exp(<theta, psi(y,z,u)>). Immutable; parameter updates build a new policy.
/// theta = 0 is the uniform (max-entropy) policy.
class FscPolicy {
public:
    FscPolicy(InternalStateSpec internal, FeatureMap features, Eigen::VectorXd theta);
    FscPolicy(InternalStateSpec internal, FeatureMap features);  // theta = 0

    const InternalStateSpec& internal() const { return internal_; }
    const FeatureMap& features() const { return features_; }
    const Eigen::VectorXd& theta() const { return theta_; }

    /// pi(.|y,z) as a dense probability vector over actions (softmax with
    /// max-subtracted logits, so any finite theta is safe).
    Eigen::VectorXd action_probs(int y, int z) const;
    double action_prob(int y, int z, int u) const { return probs_[static_cast<std::size_t>((y * internal_.size() + z) * features_.actions() + u)]; }

    /// Score function psi(y,z,u) - E_{u'~pi(.|y,z)} psi(y,z,u'); l2 norm <= 2.
    Eigen::VectorXd log_policy_gradient(int y, int z, int u) const;
    /// In-place variant for hot loops; out is resized to dim().
    void log_policy_gradient_into(int y, int z, int u, Eigen::VectorXd& out) const;

    int sample_action(int y, int z, RngStream& rng) const;

    /// Snapshot of all conditional action probabilities.
    PolicyTable table() const;

    /// New policy with parameter theta' (same internal space and features).
    FscPolicy with_theta(Eigen::VectorXd theta) const { return FscPolicy(internal_, features_, std::move(theta)); }

    /// Strict-schema JSON round trip (theta + feature kind + internal spec).
    std::string to_json_text() const;
    static FscPolicy from_json_text(const std::string& text);
    static FscPolicy load(const std::string& path);
    void save(const std::string& path) const;

private:
    InternalStateSpec internal_;
    FeatureMap features_;
    Eigen::VectorXd theta_;
    std::vector<double> probs_;  // cached action table [(y,z)][u]
};

/// Solve theta so the softmax policy reproduces a strictly positive target
/// table exactly (tabular features: theta = log target works row-wise).
Eigen::VectorXd tabular_theta_for(const PolicyTable& target, const FeatureMap& features);

}  // namespace pomdpnac
