#pragma once

#include <vector>

#include <Eigen/Dense>

#include "pomdpnac/controllers.hpp"
#include "pomdpnac/filter.hpp"
#include "pomdpnac/model.hpp"
#include "pomdpnac/rng.hpp"

namespace pomdpnac {

/// Which ergodicity condition a certificate verifies: the hidden-chain
/// minorization under a reference action measure (cond2), the joint
/// (x,y,z,u)-chain minorization (cond3), or none.
enum class CertifiedCondition { cond2, cond3, none };

/// A verified filter-stability certificate. For cond2 it combines the
/// persistence-of-excitation constant alpha (with its reference action
/// distribution mu_bar) and the block minorization constant eps0 at block
/// length m0 (with its reference measure nu over (x_m, y_1..y_m, u_0..u_{m-1}));
/// for cond3 alpha is fixed to 1 and nu lives on the joint (x,y,z,u) space.
/// The induced stability envelope contracts by 1 - alpha^(2 m0 - 2) eps0^2
/// per block of m0 filter steps.
struct ErgodicityCertificate {
    double alpha = 1.0;
    std::vector<double> mu_bar;
    double eps0 = 0.0;
    int m0 = 1;
    std::vector<double> nu;
    CertifiedCondition which = CertifiedCondition::none;

    /// 1 - alpha^(2 m0 - 2) eps0^2, the per-block contraction factor.
    double contraction_factor() const;
    /// contraction_factor()^floor(n / m0) with unit prefactor.
    double envelope(int n) const;
};

/// Largest persistence-of-excitation constant found over the candidate
/// reference measures: alpha mu_bar(u) <= pi(u|y,z) <= mu_bar(u)/alpha
/// for every (y,z,u).
struct Condition1Result {
    double alpha = 0.0;
    std::vector<double> mu_bar;
};

/// Searches the candidate reference measures (geometric-mean row, min-row
/// normalized, max-row normalized) and returns the best verified alpha.
/// Throws SupportMismatch when the action support differs across (y,z):
/// no reference measure can then sandwich all rows.
Condition1Result check_condition1(const PolicyTable& pi);

/// Minorization-majorization over the hidden chain driven by a fixed action
/// measure mu_bar: eps0 nu <= Pbar_m0(x_m, y_1^m, u^(m-1) | x0) <= nu / eps0
/// for every x0. nu is indexed x_m first, then observation digits y_1..y_m
/// (oldest first), then action digits u_0..u_(m-1):
/// idx = ((x_m * |Y| + y_1) * |Y| + ...) * |U| + ... .
struct Condition2Result {
    double eps0 = 0.0;
    std::vector<double> nu;
    int m0 = 1;
};

/// Exact path enumeration of Pbar_m0 followed by the entrywise min/max
/// construction: nu proportional to the column minimum over x0, eps0 the
/// worst ratio min(Pbar/nu, nu/Pbar) over supported columns. Columns that
/// are zero for every x0 are skipped (never realized); a column that is zero
/// for some x0 but positive for another throws NotErgodic.
Condition2Result check_condition2(const PomdpModel& model, const std::vector<double>& mu_bar, int m0);

/// Same construction on the m0-step transition matrix of the joint chain
/// (x, y, z, u) under the policy. upsilon is indexed ((x*|Y|+y)*|Z|+z)*|U|+u.
struct Condition3Result {
    double eps0 = 0.0;
    std::vector<double> upsilon;
    int m0 = 1;
};

Condition3Result check_condition3(const PolicyTable& pi, const PomdpModel& model, const InternalStateSpec& internal,
                                  int m0);

/// Builds a certificate for the given policy: condition 1 + condition 2
/// first (the sharper route when the policy has common support), falling
/// back to condition 3, and returning which = none when neither holds.
ErgodicityCertificate certify(const PolicyTable& pi, const PomdpModel& model, const InternalStateSpec& internal,
                              int m0);

/// Backward variables of a fixed realized history h_n = (y0, z0, y_1..y_n,
/// u_0..u_(n-1)): beta[k][x] is the probability of the realized suffix
/// (y_(k+1)..y_n, u_k..u_(n-1)) given x_k = x and the history prefix, built
/// by the backward recursion from beta[n] = 1. Requires a deterministic
/// internal-state map (the realized z path must be a function of the
/// history).
struct BackwardVariables {
    int horizon = 0;
    std::vector<std::vector<double>> beta;  // [k][x], k = 0..horizon
};

BackwardVariables backward_variables(const PomdpModel& model, const PolicyTable& pi,
                                     const InternalStateSpec& internal, const History& h);

/// One conditional m0-step smoothing kernel kappa(x_((l+1)m0) | x_(l m0))
/// given the full realized history: the product of m0 one-step conditional
/// kernels transition x channel x backward-variable, normalized per row.
/// Rows whose normalizer vanishes (the history is impossible from that
/// hidden state) are flagged undefined and zeroed; the conditional flow
/// never enters them.
struct SmoothingKernel {
    int ell = 0;
    Eigen::MatrixXd kappa;           // kappa(i, j) = P(x_next = j | x_prev = i)
    std::vector<char> row_defined;   // per row i
};

/// Block kernels for ell = 0 .. floor(n/m0) - 1. Throws DegenerateHistory
/// when the whole history is impossible (every row degenerate at some step).
std::vector<SmoothingKernel> smoothing_kernels(const PomdpModel& model, const PolicyTable& pi,
                                               const InternalStateSpec& internal, const History& h, int m0);

/// Doeblin check of the certified lower bound: for each block kernel the
/// best entrywise minorization constant c_l = sum_x' min over defined rows
/// of kappa(x'|x) must reach alpha^(2 m0 - 2) eps0^2.
struct MinorizationReport {
    double bound = 0.0;
    std::vector<double> c;  // per block
    bool ok = true;
};

MinorizationReport verify_kernel_minorization(const std::vector<SmoothingKernel>& kernels,
                                              const ErgodicityCertificate& cert);

/// Empirical filter-stability curve: for each n, histories are sampled under
/// the policy (hidden start uniform over X, z0 = 0), both priors are pushed
/// through the same realized (y, u) stream, and the total-variation gap of
/// the two filters is recorded. Per history the smoothing-kernel
/// factorization is checked against the direct filter (1e-10), the kernel
/// chain is checked to be non-expanding per block, and, when a certificate
/// is supplied, the terminal gap is checked against the geometric envelope
/// with unit prefactor; violations are counted, not thrown.
struct ContractionCurve {
    std::vector<int> ns;
    std::vector<double> tv_mean;
    std::vector<double> tv_max;
    std::vector<double> envelope;  // empty when no certificate was supplied
    bool has_envelope = false;
    int samples = 0;
    long long violations_nonexpansion = 0;
    long long violations_envelope = 0;
    long long violations_consistency = 0;
};

ContractionCurve contraction_experiment(const PomdpModel& model, const PolicyTable& pi,
                                        const InternalStateSpec& internal, const std::vector<int>& n_list,
                                        const Belief& v0, const Belief& v0_prime, int samples, RngStream& rng,
                                        const ErgodicityCertificate* cert = nullptr);

/// (v K)(x) = sum_x' v(x') K(x | x') for a row-stochastic K(i, j) =
/// K(x_next = j | x_prev = i). Throws DimensionMismatch on shape mismatch.
std::vector<double> left_multiply(const std::vector<double>& v, const Eigen::MatrixXd& K);

}  // namespace pomdpnac
