#include "pomdpnac/sampling.hpp"

#include "pomdpnac/errors.hpp"

namespace pomdpnac {

double TrajectoryRecord::discounted_reward(double gamma) const {
    double acc = 0.0, g = 1.0;
    for (double r : rewards) {
        acc += g * r;
        g *= gamma;
    }
    return acc;
}

TrajectoryRecord rollout(const FscPolicy& policy, const PomdpModel& model, const RolloutStart& start, int m,
                         RngStream& rng, bool track_beliefs) {
    if (m < 0) throw ValidationError("rollout length must be >= 0");
    TrajectoryRecord rec;
    rec.xs.reserve(static_cast<std::size_t>(m) + 1);
    rec.ys.reserve(static_cast<std::size_t>(m) + 1);
    rec.zs.reserve(static_cast<std::size_t>(m) + 1);
    rec.us.reserve(static_cast<std::size_t>(m));
    rec.rewards.reserve(static_cast<std::size_t>(m));
    if (track_beliefs) rec.beliefs.reserve(static_cast<std::size_t>(m) + 1);

    int x = start.x0, y = start.y0, z = start.z0;
    Belief b = start.b0;
    rec.xs.push_back(x);
    rec.ys.push_back(y);
    rec.zs.push_back(z);
    if (track_beliefs) rec.beliefs.push_back(b);

    const InternalStateSpec& spec = policy.internal();
    for (int k = 0; k < m; ++k) {
        int u = policy.sample_action(y, z, rng);
        rec.us.push_back(u);
        rec.rewards.push_back(model.r(x, u));
        x = rng.discrete(model.p_row(x, u), model.states());
        int y2 = rng.discrete(model.phi_row(x), model.observations());
        z = spec.internal_step(z, y, u, rng);
        y = y2;
        rec.xs.push_back(x);
        rec.ys.push_back(y);
        rec.zs.push_back(z);
        if (track_beliefs) {
            b = filter_step(b, y, u, model);
            rec.beliefs.push_back(b);
        }
    }
    return rec;
}

VisitationSample sample_visitation(const FscPolicy& policy, const PomdpModel& model, const WarmStart& warm,
                                   RngStream& rng, bool track_beliefs) {
    H0Sample h0 = sample_h0(warm, policy.internal(), model, rng);
    int k = rng.geometric_horizon(model.gamma(), geometric_cap(model.gamma()));
    RolloutStart start{h0.x0, h0.y0, h0.z0, h0.b0};
    TrajectoryRecord rec = rollout(policy, model, start, k, rng, track_beliefs);
    VisitationSample out;
    out.y = rec.ys.back();
    out.z = rec.zs.back();
    out.x = rec.xs.back();
    out.horizon = k;
    out.belief = track_beliefs ? rec.beliefs.back() : Belief();
    return out;
}

}  // namespace pomdpnac
