#pragma once

#include <functional>

#include <Eigen/Dense>

#include "pomdpnac/controllers.hpp"
#include "pomdpnac/model.hpp"
#include "pomdpnac/sampling.hpp"
#include "pomdpnac/warmstart.hpp"

namespace pomdpnac {

/// Configuration of the m-step TD critic. alpha < 0 selects the default
/// step size 1/sqrt(K).
struct CriticConfig {
    int m = 1;            // lookahead steps
    long long K = 1000;   // iterations
    double alpha = -1.0;  // step size; < 0 -> 1/sqrt(K)
    double R = 10.0;      // l2 projection radius

    double alpha_or_default() const;
    void validate() const;
};

/// Critic output: averaged and final parameters plus the semi-gradient norm
/// bound M(gamma, R) = r_max(1-gamma^m)/(1-gamma) + (1+gamma^m) R.
struct CriticEstimate {
    Eigen::VectorXd beta_avg;
    Eigen::VectorXd beta_final;
    double M_const = 0.0;
};

/// l2-ball projection: v if ||v|| <= R, else v scaled to norm R.
Eigen::VectorXd project_ball(Eigen::VectorXd v, double R);

/// m-step TD semi-gradient at beta for one recorded trajectory. The record
/// must carry m rewards and m+1 actions: the extra final action is the
/// bootstrap action drawn at the trajectory's last (y,z). Returns
///   ( sum_k gamma^k r_k + gamma^m <beta, psi_m> - <beta, psi_0> ) psi_0
/// with psi_j = psi(y_j, z_j, u_j).
Eigen::VectorXd td_semigradient(const Eigen::VectorXd& beta, const TrajectoryRecord& traj, const FeatureMap& features,
                                double gamma);

/// Per-iteration observer: (iteration t, beta_t after the update, TD error
/// delta_t). Used by the CLI to stream diagnostics.
using CriticObserver = std::function<void(long long, const Eigen::VectorXd&, double)>;

/// Algorithm: K iterations of projected m-step TD from beta_0 = 0. Each
/// iteration draws (y0,z0) from the discounted visitation of the policy,
/// resamples x0 from the enumerated warm-start conditional b0(.|y0,z0),
/// rolls m steps, draws the bootstrap action, and applies the projected
/// semi-gradient step. Returns the iterate average (over beta_0..beta_{K-1})
/// and the final iterate.
CriticEstimate run_mstep_td(const FscPolicy& policy, const PomdpModel& model, const CriticConfig& config,
                            const WarmStart& warm, RngStream& rng, const CriticObserver& observer = nullptr);

/// Q/V/A evaluators induced by a parameter vector: Q(y,z,u) = <beta, psi>,
/// V(y,z) = sum_u pi(u|y,z) Q(y,z,u), A = Q - V.
class DerivedValues {
public:
    DerivedValues(Eigen::VectorXd beta, const FscPolicy& policy);

    double q(int y, int z, int u) const;
    double v(int y, int z) const;
    double a(int y, int z, int u) const { return q(y, z, u) - v(y, z); }

private:
    Eigen::VectorXd beta_;
    const FscPolicy* policy_;
};

}  // namespace pomdpnac
