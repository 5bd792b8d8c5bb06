#include "pomdpnac/critic.hpp"

#include <cmath>

#include "pomdpnac/errors.hpp"

namespace pomdpnac {

double CriticConfig::alpha_or_default() const {
    return alpha >= 0.0 ? alpha : 1.0 / std::sqrt(static_cast<double>(K));
}

void CriticConfig::validate() const {
    if (m < 1) throw ValidationError("critic lookahead m must be >= 1");
    if (K < 1) throw ValidationError("critic iteration count K must be >= 1");
    if (R <= 0.0) throw ValidationError("critic projection radius R must be > 0");
    if (alpha == 0.0) throw ValidationError("critic step size alpha must be positive (or negative for the default)");
}

Eigen::VectorXd project_ball(Eigen::VectorXd v, double R) {
    if (R <= 0.0) throw ValidationError("projection radius must be > 0");
    double n = v.norm();
    if (n > R) v *= R / n;
    return v;
}

Eigen::VectorXd td_semigradient(const Eigen::VectorXd& beta, const TrajectoryRecord& traj, const FeatureMap& features,
                                double gamma) {
    const int m = static_cast<int>(traj.rewards.size());
    if (static_cast<int>(traj.us.size()) != m + 1)
        throw DimensionMismatch("td_semigradient needs m rewards and m+1 actions (bootstrap action included)");
    if (static_cast<int>(traj.ys.size()) != m + 1 || static_cast<int>(traj.zs.size()) != m + 1)
        throw DimensionMismatch("td_semigradient trajectory must have m+1 (y,z) pairs");

    double target = traj.discounted_reward(gamma);
    const double gm = std::pow(gamma, m);
    target += gm * features.dot(beta, traj.ys.back(), traj.zs.back(), traj.us.back());
    const double q0 = features.dot(beta, traj.ys.front(), traj.zs.front(), traj.us.front());
    Eigen::VectorXd g = Eigen::VectorXd::Zero(features.dim());
    features.add_scaled(g, traj.ys.front(), traj.zs.front(), traj.us.front(), target - q0);
    return g;
}

CriticEstimate run_mstep_td(const FscPolicy& policy, const PomdpModel& model, const CriticConfig& config,
                            const WarmStart& warm, RngStream& rng, const CriticObserver& observer) {
    config.validate();
    warm.validate(model, policy.internal());
    const FeatureMap& features = policy.features();
    const double gamma = model.gamma();
    const double alpha = config.alpha_or_default();
    const double gm = std::pow(gamma, config.m);
    const InitialLaw law = enumerate_initial(warm, policy.internal(), model);
    const int nx = model.states();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(features.dim());
    Eigen::VectorXd beta_sum = Eigen::VectorXd::Zero(features.dim());
    Eigen::VectorXd g(features.dim());

    for (long long t = 0; t < config.K; ++t) {
        beta_sum += beta;  // average over beta_0 .. beta_{K-1}

        VisitationSample vis = sample_visitation(policy, model, warm, rng, /*track_beliefs=*/false);
        const double* b0 = law.b0_row(vis.y, vis.z);
        double mass = 0.0;
        for (int x = 0; x < nx; ++x) mass += b0[x];
        if (mass <= 0.0)
            throw DegenerateHistory("visited pair (y=" + std::to_string(vis.y) + ", z=" + std::to_string(vis.z) +
                                    ") has no warm-start prior to resample the hidden state from");
        int x0 = rng.discrete(b0, nx);

        RolloutStart start{x0, vis.y, vis.z, Belief()};
        TrajectoryRecord rec = rollout(policy, model, start, config.m, rng, /*track_beliefs=*/false);
        int u_boot = policy.sample_action(rec.ys.back(), rec.zs.back(), rng);

        double target = rec.discounted_reward(gamma);
        target += gm * features.dot(beta, rec.ys.back(), rec.zs.back(), u_boot);
        const double q0 = features.dot(beta, rec.ys.front(), rec.zs.front(), rec.us.front());
        const double delta = target - q0;

        g.setZero();
        features.add_scaled(g, rec.ys.front(), rec.zs.front(), rec.us.front(), alpha * delta);
        beta += g;
        double n = beta.norm();
        if (n > config.R) beta *= config.R / n;

        if (observer) observer(t, beta, delta);
    }

    CriticEstimate est;
    est.beta_avg = beta_sum / static_cast<double>(config.K);
    est.beta_final = std::move(beta);
    est.M_const = model.r_max() * (1.0 - gm) / (1.0 - gamma) + (1.0 + gm) * config.R;
    return est;
}

DerivedValues::DerivedValues(Eigen::VectorXd beta, const FscPolicy& policy)
    : beta_(std::move(beta)), policy_(&policy) {
    if (beta_.size() != policy.features().dim())
        throw DimensionMismatch("value parameter dimension does not match the policy's feature map");
}

double DerivedValues::q(int y, int z, int u) const { return policy_->features().dot(beta_, y, z, u); }

double DerivedValues::v(int y, int z) const {
    const int nu = policy_->features().actions();
    double acc = 0.0;
    for (int u = 0; u < nu; ++u) acc += policy_->action_prob(y, z, u) * q(y, z, u);
    return acc;
}

}  // namespace pomdpnac
