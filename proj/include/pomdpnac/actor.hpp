#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pomdpnac/critic.hpp"

namespace pomdpnac {

/// Outer-loop configuration. Negative eta/zeta select the defaults that
/// reproduce the convergence theorem's prescriptions: eta = 1/sqrt(T),
/// zeta = R sqrt(1-gamma) / sqrt(2 N r_max).
struct ActorConfig {
    int T = 10;           // outer iterations
    long long N = 1000;   // SGD steps per iteration
    double eta = -1.0;    // policy step size; < 0 -> 1/sqrt(T)
    double zeta = -1.0;   // SGD step size; < 0 -> R sqrt(1-gamma)/sqrt(2 N r_max)
    double R = 10.0;      // SGD projection radius

    double eta_or_default() const;
    double zeta_or_default(double gamma, double r_max) const;
    void validate() const;
};

/// Advantage evaluator fed to the SGD loop: (y, z, u) -> A(y,z,u).
using AdvantageFn = std::function<double(int, int, int)>;

/// Per-sample gradient of the compatible-function-approximation loss
/// (<grad log pi(u|y,z), w> - A(y,z,u))^2, namely 2(<g,w> - A) g.
Eigen::VectorXd cfa_loss_gradient(const Eigen::VectorXd& w, int y, int z, int u, const FscPolicy& policy,
                                  double advantage);

/// Projected SGD on the CFA loss: w(0) = 0, each step draws a fresh
/// (y,z) ~ d_xi^pi and u ~ pi(.|y,z), applies w <- Proj_R(w - zeta * grad).
/// Returns the iterate average (over w(0)..w(N-1)). loss_mean_out, when
/// non-null, receives the mean sampled loss.
Eigen::VectorXd sgd_inner_loop(const FscPolicy& policy, const PomdpModel& model, const WarmStart& warm,
                               const AdvantageFn& advantage, long long N, double zeta, double R, RngStream& rng,
                               double* loss_mean_out = nullptr);

/// theta' = theta + eta * w_bar.
Eigen::VectorXd nac_update(const Eigen::VectorXd& theta, const Eigen::VectorXd& w_bar, double eta);

/// Weighted KL divergence sum_{y,z} d_ref(y,z) KL(pi_ref(.|y,z) || pi(.|y,z)),
/// the potential function of the outer-loop convergence analysis. d_ref is
/// indexed [(y*nz + z)].
double kl_potential(const PolicyTable& pi_ref, const FscPolicy& pi, const std::vector<double>& d_ref);

/// One row of the run log; metrics describe the policy pi_t entering outer
/// iteration t (V_hat is the critic's estimate of V^{pi_t}(xi)).
struct NacIterationRecord {
    int t = 0;
    double V_hat = 0.0;                 // <xi, V_bar> from the critic estimate
    std::optional<double> V_oracle;     // exact V^{pi_t}(xi) when a solver is injected
    double sgd_loss_mean = 0.0;
    double w_norm = 0.0;                // ||w_bar_t||
    std::optional<double> kl_potential; // vs the reference policy when injected
    double beta_norm = 0.0;             // ||beta_avg|| of the critic run
    double seconds = 0.0;               // wall clock of the iteration
};

struct NacRunLog {
    std::vector<NacIterationRecord> iterations;  // length T
    int best_t = 0;                              // argmax of V_oracle (V_hat fallback); T = final policy
    std::optional<double> final_V_oracle;        // exact value of the returned final policy
};

/// Hooks that let the caller wire exact-solver diagnostics into the loop
/// without this module depending on the solver: an exact value evaluator
/// V^pi(xi) and a reference policy + visitation for the KL potential.
struct NacOracleHooks {
    std::function<double(const FscPolicy&)> exact_value;  // may be empty
    std::optional<PolicyTable> kl_reference;
    std::vector<double> kl_weights;  // d_ref over (y,z), required with kl_reference
    /// Replaces the critic with an exact advantage (oracle mode) when set.
    std::function<AdvantageFn(const FscPolicy&)> exact_advantage;
};

struct NacResult {
    FscPolicy final_policy;
    FscPolicy best_policy;  // best logged iterate (see NacRunLog::best_t)
    NacRunLog log;
};

/// The full natural actor-critic loop: theta_0 = 0 (uniform policy); per
/// iteration run the m-step TD critic, derive the advantage, run the CFA SGD,
/// and step theta along w_bar.
NacResult run_nac(const PomdpModel& model, const InternalStateSpec& internal, const ActorConfig& actor_cfg,
                  const CriticConfig& critic_cfg, const WarmStart& warm, RngStream& rng,
                  const NacOracleHooks& hooks = {});

}  // namespace pomdpnac
