#pragma once

#include <string>
#include <vector>

#include "pomdpnac/model.hpp"

namespace pomdpnac {

/// Probability vector over hidden states with an optional provenance tag
/// recording which history it conditions on. Entries >= 0, sum 1 within 1e-9.
struct Belief {
    std::vector<double> probs;
    std::string provenance;

    Belief() = default;
    explicit Belief(std::vector<double> p, std::string tag = "");

    int size() const { return static_cast<int>(probs.size()); }
    double operator[](int x) const { return probs[static_cast<std::size_t>(x)]; }

    /// Point mass at one state.
    static Belief point_mass(int x, int n, std::string tag = "");
    static Belief uniform(int n, std::string tag = "");
};

/// A realized observation/action record: initial (y0, z0), then k observation
/// and k action entries.
struct History {
    int y0 = 0;
    int z0 = 0;
    std::vector<int> observations;  // y_1..y_k
    std::vector<int> actions;       // u_0..u_{k-1}

    int length() const;
};

/// One predict-update step of the exact Bayes filter: apply action u, observe
/// y, return the normalized posterior. Throws DegenerateObservation when the
/// observation has zero probability under the predicted belief.
Belief filter_step(const Belief& b, int y, int u, const PomdpModel& model);

/// n-fold composition of filter_step along aligned (y, u) sequences; n = 0 is
/// the identity. A degenerate step rethrows with the offending step index.
Belief filter_n(const Belief& b0, const std::vector<int>& ys, const std::vector<int>& us, const PomdpModel& model);

/// Measurement-only update: posterior of a prior given one observation,
/// prior(x) * Phi(y|x) normalized. This is the time-zero belief of a fresh
/// process (no transition applied yet).
Belief observation_posterior(const Belief& prior, int y, const PomdpModel& model);

/// Expected one-step reward under a belief: sum_x b(x) r(x, u).
double belief_reward(const Belief& b, int u, const PomdpModel& model);

/// Total-variation distance between two probability vectors of equal length:
/// half the l1 distance, in [0, 1].
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);
double tv_distance(const Belief& p, const Belief& q);

}  // namespace pomdpnac
