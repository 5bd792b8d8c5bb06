#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pomdpnac/controllers.hpp"
#include "pomdpnac/model.hpp"
#include "pomdpnac/rng.hpp"
#include "pomdpnac/warmstart.hpp"

namespace pomdpnac {

/// Default truncation horizon for discounted infinite sums: the smallest H
/// with gamma^H / (1-gamma) <= 1e-8 (i.e. tail below 1e-8).
int default_horizon(double gamma);

/// The joint Markov chain on S = X x Y x Z induced by a fixed controller
/// table pi(u|y,z) and internal kernel. Index s = (x*|Y| + y)*|Z| + z.
struct JointChain {
    int nx = 0, ny = 0, nz = 0, nu = 0;
    Eigen::MatrixXd M;          // S x S one-step transition under pi
    Eigen::VectorXd reward_pi;  // expected one-step reward sum_u pi(u|y,z) r(x,u)
    Eigen::VectorXd initial;    // initial joint law from the warm start

    int index(int x, int y, int z) const { return (x * ny + y) * nz + z; }

    static JointChain build(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                            const InitialLaw& law);
};

/// Value table over (y,z,u) with a definedness mask: entries exist only where
/// the warm-start prior b0(.|y,z) exists.
struct QTable {
    int ny = 0, nz = 0, nu = 0;
    std::vector<double> q;        // [(y*nz+z)*nu + u]
    std::vector<char> defined_yz; // [(y*nz+z)]

    double at(int y, int z, int u) const;
    bool defined(int y, int z) const { return defined_yz[static_cast<std::size_t>(y * nz + z)] != 0; }
    double max_abs_diff(const QTable& other) const;  // over commonly defined entries
};

/// Exact policy evaluation on the joint chain: the dense linear solve
/// (I - gamma M) V0 = r, the full Q0(x,y,z,u), and the observable tables
/// Q(y,z,u) = sum_x b0(x|y,z) Q0(x,y,z,u), V(y,z), A = Q - V, plus the
/// xi-weighted scalar value V(xi).
struct OracleEvaluation {
    QTable q;                  // Q^pi(y,z,u)
    std::vector<double> q0;    // [( (x*ny+y)*nz+z )*nu + u]
    std::vector<double> v0;    // [(x*ny+y)*nz + z]
    std::vector<double> v;     // [(y*nz+z)], defined per q.defined_yz
    double value_at_xi = 0.0;  // sum_{y,z} xi(y,z) V(y,z)

    double a(int y, int z, int u) const { return q.at(y, z, u) - v[static_cast<std::size_t>(y * q.nz + z)]; }
};

OracleEvaluation exact_q(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                         const InitialLaw& law);

/// Discounted visitation d_xi^pi over (y,z), its action extension
/// (d o pi)(y,z,u), and the m-step shifted visitation tilde_d_m obtained by
/// pushing (d o pi) x b0 through m steps of the joint chain.
struct VisitationReport {
    int ny = 0, nz = 0, nu = 0;
    std::vector<double> d;            // [(y*nz+z)]
    std::vector<double> d_pi;         // [(y*nz+z)*nu + u]
    std::vector<double> tilde_d;      // [(y*nz+z)]           (for the given m)
    std::vector<double> tilde_d_pi;   // [(y*nz+z)*nu + u]
    double tv_shift = 0.0;            // d_TV(tilde_d o pi, d o pi)
    int m = 0;
};

VisitationReport exact_visitation(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                                  const InitialLaw& law, int m);

/// The m-step TD fixed point: Q = R_m + gamma^m P_m Q on (y,z,u), where R_m
/// and P_m start from x ~ b0(.|y,z) and propagate m exact steps.
struct FixedPointReport {
    QTable q_star;
    double residual_inf = 0.0;  // ||Q - (R_m + gamma^m P_m Q)||_inf after the solve
    int m = 0;
};

FixedPointReport fixed_point_q(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                               const InitialLaw& law, int m);

/// Weighted least squares of a table onto the feature span within the
/// radius-R ball: minimizes sum_s w(s) (q(s) - <beta, psi(s)>)^2. Entries with
/// zero weight are ignored (their q values may be undefined). If the
/// unconstrained minimizer leaves the ball, projected gradient descent is run
/// to tolerance 1e-10.
struct LinearFit {
    Eigen::VectorXd beta;
    double error = 0.0;  // weighted l2 error at beta
};

LinearFit best_linear_fit(const std::vector<double>& q, const std::vector<double>& weights, const FeatureMap& features,
                          double R);

/// The two-summand perceptual-aliasing error: the distribution-shift term
/// from the exact visitation shift, and the belief-mismatch term estimated by
/// Monte Carlo with exact per-trajectory filters (O-constant taken as 1).
struct EpsPaReport {
    double first = 0.0;        // (R + r_max/(1-gamma)) sqrt(2 gamma^m TV / (1-gamma^m))
    double second = 0.0;       // gamma^m/(1-gamma) * || E[sum_k gamma^{km} TV_k] ||_{d o pi}
    double total = 0.0;
    double tv_shift = 0.0;
    double tail_bound = 0.0;   // discounted tail of the truncated inner sum
    int outer_terms = 0;       // number of gamma^{km} terms kept
    long long samples_per_triple = 0;
    std::vector<double> g_table;  // per-triple estimate of E[sum_k gamma^{km} TV_k | s], 0 off-support
};

EpsPaReport eps_pa(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                   const InitialLaw& law, int m, double R, RngStream& rng, long long samples_per_triple = 2000);

/// Monte Carlo inference error Gamma^pi(xi): discounted sum of TV distances
/// between the exact full-history belief and the window posterior, over
/// trajectories started from the warm start.
struct InferenceReport {
    double estimate = 0.0;
    double std_error = 0.0;   // sigma / sqrt(samples), trajectory-level CLT
    double tail_bound = 0.0;  // gamma^H / (1-gamma)
    int horizon = 0;
    long long samples = 0;
};

InferenceReport inference_error(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                                const WarmStart& warm, int horizon, long long samples, RngStream& rng);

/// Concentrability E_{s ~ d_t o pi_t} [ ((d* o pi*) / (d_t o pi_t))(s)^2 ].
/// Throws UnboundedRatio where the numerator loads mass the denominator lacks.
double concentrability(const std::vector<double>& d_pi_current, const std::vector<double>& d_pi_star);

/// Performance-difference check between two controllers sharing an internal
/// state space: exact LHS V^{pi'}(xi) - V^pi(xi) against the advantage term
/// minus the inference-error penalty, with a conservative Monte Carlo bound
/// (Gamma lower CI edge, so a pass is genuine up to 3 sigma).
struct PdlReport {
    double lhs = 0.0;
    double advantage_term = 0.0;  // (1/(1-gamma)) sum d^{pi'} pi' A^pi
    InferenceReport gamma_prime;
    double rhs_conservative = 0.0;
    bool holds = false;
};

PdlReport pdl_check(const PolicyTable& pi_prime, const PolicyTable& pi, const InternalStateSpec& spec,
                    const PomdpModel& model, const WarmStart& warm, int horizon, long long samples, RngStream& rng);

/// Exhaustive search over deterministic maps (y,z) -> u with the internal
/// kernel fixed; returns the best table by exact value at xi. Throws
/// SearchSpaceTooLarge past the cap.
struct BruteForceResult {
    PolicyTable best;
    double value = 0.0;
    long long searched = 0;
};

BruteForceResult best_fsc_bruteforce(const InternalStateSpec& spec, const PomdpModel& model, const InitialLaw& law,
                                     long long cap = 1000000);

/// Compatible function approximation error at one policy: the weighted-l2
/// distance of exact Q^pi to the radius-R feature class under d o pi.
LinearFit compatible_fa_error(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                              const InitialLaw& law, const FeatureMap& features, double R);

/// Exact optimal value of the fully observed MDP (identity channel ignored):
/// value iteration to sup-norm tolerance.
struct MdpSolution {
    Eigen::VectorXd v;        // V*(x)
    std::vector<int> greedy;  // argmax action per state
    int iterations = 0;
};

MdpSolution mdp_value_iteration(const PomdpModel& model, double tol = 1e-12, int max_iter = 100000);

/// Everything the solve-oracle CLI emits for one (policy, model, m, features)
/// tuple: value tables' summary plus each error term with its tail bound.
struct ErrorReport {
    double value_at_xi = 0.0;
    double fixed_point_gap_inf = 0.0;  // ||Q_* - Q||_inf
    LinearFit projection;               // best fit of Q^pi in the ball
    EpsPaReport eps_pa;
    InferenceReport gamma_inference;
    std::optional<double> concentrability_vs_ref;
    double critic_M_const = 0.0;
    int m = 0;
};

ErrorReport build_error_report(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                               const WarmStart& warm, int m, double R, const FeatureMap& features, RngStream& rng,
                               const PolicyTable* reference = nullptr,
                               const InternalStateSpec* reference_spec = nullptr);

}  // namespace pomdpnac
