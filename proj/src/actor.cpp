#include "pomdpnac/actor.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include "pomdpnac/errors.hpp"

namespace pomdpnac {

double ActorConfig::eta_or_default() const { return eta >= 0.0 ? eta : 1.0 / std::sqrt(static_cast<double>(T)); }

double ActorConfig::zeta_or_default(double gamma, double r_max) const {
    if (zeta >= 0.0) return zeta;
    return R * std::sqrt(1.0 - gamma) / std::sqrt(2.0 * static_cast<double>(N) * r_max);
}

void ActorConfig::validate() const {
    if (T < 1) throw ValidationError("actor iteration count T must be >= 1");
    if (N < 1) throw ValidationError("SGD step count N must be >= 1");
    if (R <= 0.0) throw ValidationError("actor projection radius R must be > 0");
    if (eta == 0.0) throw ValidationError("policy step size eta must be positive (or negative for the default)");
    if (zeta == 0.0) throw ValidationError("SGD step size zeta must be positive (or negative for the default)");
}

Eigen::VectorXd cfa_loss_gradient(const Eigen::VectorXd& w, int y, int z, int u, const FscPolicy& policy,
                                  double advantage) {
    Eigen::VectorXd g = policy.log_policy_gradient(y, z, u);
    const double residual = g.dot(w) - advantage;
    g *= 2.0 * residual;
    return g;
}

Eigen::VectorXd sgd_inner_loop(const FscPolicy& policy, const PomdpModel& model, const WarmStart& warm,
                               const AdvantageFn& advantage, long long N, double zeta, double R, RngStream& rng,
                               double* loss_mean_out) {
    if (N < 1) throw ValidationError("SGD step count N must be >= 1");
    if (zeta <= 0.0) throw ValidationError("SGD step size zeta must be > 0");
    if (R <= 0.0) throw ValidationError("SGD projection radius R must be > 0");

    const int dim = policy.features().dim();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd w_sum = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd g(dim);
    double loss_sum = 0.0;

    for (long long k = 0; k < N; ++k) {
        w_sum += w;  // average over w(0) .. w(N-1)

        VisitationSample vis = sample_visitation(policy, model, warm, rng, /*track_beliefs=*/false);
        int u = policy.sample_action(vis.y, vis.z, rng);
        policy.log_policy_gradient_into(vis.y, vis.z, u, g);
        const double residual = g.dot(w) - advantage(vis.y, vis.z, u);
        loss_sum += residual * residual;
        w -= (2.0 * zeta * residual) * g;
        const double n = w.norm();
        if (n > R) w *= R / n;
    }
    if (loss_mean_out) *loss_mean_out = loss_sum / static_cast<double>(N);
    return w_sum / static_cast<double>(N);
}

Eigen::VectorXd nac_update(const Eigen::VectorXd& theta, const Eigen::VectorXd& w_bar, double eta) {
    if (theta.size() != w_bar.size())
        throw DimensionMismatch("nac_update: theta and w_bar dimensions differ (" + std::to_string(theta.size()) +
                                " vs " + std::to_string(w_bar.size()) + ")");
    return theta + eta * w_bar;
}

double kl_potential(const PolicyTable& pi_ref, const FscPolicy& pi, const std::vector<double>& d_ref) {
    const int ny = pi_ref.ny, nz = pi_ref.nz, nu = pi_ref.nu;
    if (ny != pi.features().observations() || nz != pi.internal().size() || nu != pi.features().actions())
        throw DimensionMismatch("kl_potential: reference table and policy shapes differ");
    if (static_cast<int>(d_ref.size()) != ny * nz)
        throw DimensionMismatch("kl_potential: weight vector must have one entry per (y,z)");
    double acc = 0.0;
    for (int y = 0; y < ny; ++y)
        for (int z = 0; z < nz; ++z) {
            const double wgt = d_ref[static_cast<std::size_t>(y * nz + z)];
            if (wgt == 0.0) continue;
            double kl = 0.0;
            for (int u = 0; u < nu; ++u) {
                const double p = pi_ref.prob(y, z, u);
                if (p == 0.0) continue;
                kl += p * std::log(p / pi.action_prob(y, z, u));
            }
            acc += wgt * kl;
        }
    return acc;
}

NacResult run_nac(const PomdpModel& model, const InternalStateSpec& internal, const ActorConfig& actor_cfg,
                  const CriticConfig& critic_cfg, const WarmStart& warm, RngStream& rng,
                  const NacOracleHooks& hooks) {
    actor_cfg.validate();
    critic_cfg.validate();
    warm.validate(model, internal);
    if (hooks.kl_reference &&
        static_cast<int>(hooks.kl_weights.size()) != hooks.kl_reference->ny * hooks.kl_reference->nz)
        throw DimensionMismatch("run_nac: kl_weights must match the KL reference table");

    FeatureMap features = FeatureMap::tabular(model.observations(), internal.size(), model.actions());
    FscPolicy policy(internal, features);  // theta_0 = 0: uniform policy
    const InitialLaw law = enumerate_initial(warm, internal, model);
    const double eta = actor_cfg.eta_or_default();
    const double zeta = actor_cfg.zeta_or_default(model.gamma(), model.r_max());

    NacResult result{policy, policy, {}};
    result.log.iterations.reserve(static_cast<std::size_t>(actor_cfg.T));
    double best_metric = -std::numeric_limits<double>::infinity();

    for (int t = 0; t < actor_cfg.T; ++t) {
        const auto tic = std::chrono::steady_clock::now();
        NacIterationRecord rec;
        rec.t = t;

        AdvantageFn advantage;
        if (hooks.exact_advantage) {
            // Oracle mode: no critic run, so V_hat stays 0 and the injected
            // exact_value hook carries the value diagnostic.
            advantage = hooks.exact_advantage(policy);
        } else {
            CriticEstimate est = run_mstep_td(policy, model, critic_cfg, warm, rng);
            rec.beta_norm = est.beta_avg.norm();
            auto values = std::make_shared<DerivedValues>(est.beta_avg, policy);
            advantage = [values](int y, int z, int u) { return values->a(y, z, u); };
            double v_hat = 0.0;
            for (int y = 0; y < law.ny; ++y)
                for (int z = 0; z < law.nz; ++z)
                    if (law.xi_at(y, z) > 0.0) v_hat += law.xi_at(y, z) * values->v(y, z);
            rec.V_hat = v_hat;
        }

        if (hooks.exact_value) rec.V_oracle = hooks.exact_value(policy);
        if (hooks.kl_reference) rec.kl_potential = kl_potential(*hooks.kl_reference, policy, hooks.kl_weights);

        double loss_mean = 0.0;
        Eigen::VectorXd w_bar = sgd_inner_loop(policy, model, warm, advantage, actor_cfg.N, zeta, actor_cfg.R, rng,
                                               &loss_mean);
        rec.sgd_loss_mean = loss_mean;
        rec.w_norm = w_bar.norm();

        const double metric = rec.V_oracle ? *rec.V_oracle : rec.V_hat;
        if (metric > best_metric) {
            best_metric = metric;
            result.best_policy = policy;
            result.log.best_t = t;
        }

        policy = policy.with_theta(nac_update(policy.theta(), w_bar, eta));

        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
        result.log.iterations.push_back(std::move(rec));
    }

    if (hooks.exact_value) {
        result.log.final_V_oracle = hooks.exact_value(policy);
        if (*result.log.final_V_oracle > best_metric) {
            result.best_policy = policy;
            result.log.best_t = actor_cfg.T;
        }
    }
    result.final_policy = policy;
    return result;
}

}  // namespace pomdpnac
