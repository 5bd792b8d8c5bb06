#pragma once

#include <vector>

#include "pomdpnac/controllers.hpp"
#include "pomdpnac/filter.hpp"
#include "pomdpnac/model.hpp"
#include "pomdpnac/rng.hpp"
#include "pomdpnac/warmstart.hpp"

namespace pomdpnac {

/// A sampled trajectory of k steps: k+1 states/observations/internal states,
/// k actions/rewards, and the exact filter belief tracked along the realized
/// history (b[j] = filter of b[0] through (y_1..y_j, u_0..u_{j-1})).
struct TrajectoryRecord {
    std::vector<int> xs;          // x_0..x_k
    std::vector<int> ys;          // y_0..y_k
    std::vector<int> zs;          // z_0..z_k
    std::vector<int> us;          // u_0..u_{k-1}
    std::vector<double> rewards;  // r_0..r_{k-1}, r_j = r[x_j][u_j]
    std::vector<Belief> beliefs;  // b_0..b_k

    int steps() const { return static_cast<int>(us.size()); }

    /// Discounted reward sum over the recorded steps.
    double discounted_reward(double gamma) const;
};

/// Starting point of a rollout: a realized hidden state plus the observed
/// (y, z) pair and its belief.
struct RolloutStart {
    int x0 = 0;
    int y0 = 0;
    int z0 = 0;
    Belief b0;
};

/// Sample m transitions under the policy from the given start, tracking the
/// exact belief along the realized history. track_beliefs = false skips the
/// filter work (beliefs left empty) without changing any random draw, for hot
/// loops that only need (x, y, z, u, r).
TrajectoryRecord rollout(const FscPolicy& policy, const PomdpModel& model, const RolloutStart& start, int m,
                         RngStream& rng, bool track_beliefs = true);

/// One draw from the discounted state visitation d_xi^pi: a fresh warm start,
/// a Geometric(1-gamma) horizon k (capped with bias <= 1e-12), and a k-step
/// rollout. Returns the trajectory's final step: (y_k, z_k) together with the
/// realized hidden state and tracked belief at that time.
struct VisitationSample {
    int y = 0;
    int z = 0;
    int x = 0;
    int horizon = 0;
    Belief belief;
};

VisitationSample sample_visitation(const FscPolicy& policy, const PomdpModel& model, const WarmStart& warm,
                                   RngStream& rng, bool track_beliefs = true);

}  // namespace pomdpnac
