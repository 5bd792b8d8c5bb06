#include "pomdpnac/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "pomdpnac/errors.hpp"
#include "pomdpnac/filter.hpp"

namespace pomdpnac {

namespace {

constexpr double kRcondFloor = 1e-12;
constexpr std::size_t kDenseCap = 200000;

void check_dense_cap(const PomdpModel& model, const InternalStateSpec& spec, const char* what) {
    const std::size_t n = static_cast<std::size_t>(model.states()) * model.observations() *
                          static_cast<std::size_t>(spec.size()) * model.actions();
    if (n > kDenseCap) {
        throw SizeOverflow(
                    std::string(what) + ": |X||Y||Z||U| = " + std::to_string(n) + " exceeds the dense-solve cap " +
                        std::to_string(kDenseCap));
    }
}

void check_table_dims(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                      const char* what) {
    if (pi.ny != model.observations() || pi.nz != spec.size() || pi.nu != model.actions()) {
        throw DimensionMismatch( std::string(what) + ": policy table shaped (" +
                                                      std::to_string(pi.ny) + "," + std::to_string(pi.nz) + "," +
                                                      std::to_string(pi.nu) + ") does not match the model/controller");
    }
}

Eigen::VectorXd solve_linear(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const char* what) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const double rc = lu.rcond();
    if (!(rc > kRcondFloor)) {
        throw SolveFailure( std::string(what) + ": linear system is ill-conditioned (rcond = " +
                                                 std::to_string(rc) + ")");
    }
    return lu.solve(b);
}

/// One exact step of the action-augmented joint chain on (x, y, z, u):
/// x' ~ P(.|x,u), y' ~ Phi(.|x'), z' ~ phi(.|z,y,u), u' ~ pi(.|y',z').
/// Index layout: ((x*ny + y)*nz + z)*nu + u.
std::vector<double> step_action_measure(const std::vector<double>& mu, const PolicyTable& pi,
                                        const InternalStateSpec& spec, const PomdpModel& model) {
    const int nx = model.states(), ny = model.observations(), nz = spec.size(), nu = model.actions();
    std::vector<double> out(mu.size(), 0.0);
    for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) {
            for (int z = 0; z < nz; ++z) {
                for (int u = 0; u < nu; ++u) {
                    const double mass = mu[static_cast<std::size_t>(((x * ny + y) * nz + z) * nu + u)];
                    if (mass <= 0.0) continue;
                    const double* prow = model.p_row(x, u);
                    for (int x2 = 0; x2 < nx; ++x2) {
                        if (prow[x2] <= 0.0) continue;
                        const double* phirow = model.phi_row(x2);
                        for (int y2 = 0; y2 < ny; ++y2) {
                            if (phirow[y2] <= 0.0) continue;
                            const double w_xy = mass * prow[x2] * phirow[y2];
                            for (int z2 = 0; z2 < nz; ++z2) {
                                const double kz = spec.kernel(z, y, u, z2);
                                if (kz <= 0.0) continue;
                                const double base = w_xy * kz;
                                double* dst = &out[static_cast<std::size_t>(((x2 * ny + y2) * nz + z2) * nu)];
                                for (int u2 = 0; u2 < nu; ++u2) dst[u2] += base * pi.prob(y2, z2, u2);
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

double tv_raw(const double* a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

int sample_row(const double* w, int n, RngStream& rng) { return rng.discrete(w, n); }

}  // namespace

int default_horizon(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw ValidationError( "default_horizon: gamma must lie in (0,1)");
    }
    const double h = std::ceil(std::log(1e-8 * (1.0 - gamma)) / std::log(gamma));
    return std::max(1, static_cast<int>(h));
}

JointChain JointChain::build(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                             const InitialLaw& law) {
    check_dense_cap(model, spec, "JointChain::build");
    check_table_dims(pi, spec, model, "JointChain::build");
    JointChain c;
    c.nx = model.states();
    c.ny = model.observations();
    c.nz = spec.size();
    c.nu = model.actions();
    const int S = c.nx * c.ny * c.nz;
    c.M = Eigen::MatrixXd::Zero(S, S);
    c.reward_pi = Eigen::VectorXd::Zero(S);
    c.initial = Eigen::VectorXd::Zero(S);
    for (int x = 0; x < c.nx; ++x) {
        for (int y = 0; y < c.ny; ++y) {
            for (int z = 0; z < c.nz; ++z) {
                const int s = c.index(x, y, z);
                c.initial[s] = law.joint_at(x, y, z);
                for (int u = 0; u < c.nu; ++u) {
                    const double pu = pi.prob(y, z, u);
                    if (pu <= 0.0) continue;
                    c.reward_pi[s] += pu * model.r(x, u);
                    const double* prow = model.p_row(x, u);
                    for (int x2 = 0; x2 < c.nx; ++x2) {
                        if (prow[x2] <= 0.0) continue;
                        const double* phirow = model.phi_row(x2);
                        for (int y2 = 0; y2 < c.ny; ++y2) {
                            if (phirow[y2] <= 0.0) continue;
                            const double w = pu * prow[x2] * phirow[y2];
                            for (int z2 = 0; z2 < c.nz; ++z2) {
                                const double kz = spec.kernel(z, y, u, z2);
                                if (kz > 0.0) c.M(s, c.index(x2, y2, z2)) += w * kz;
                            }
                        }
                    }
                }
            }
        }
    }
    return c;
}

double QTable::at(int y, int z, int u) const {
    if (!defined(y, z)) {
        throw DegenerateHistory( "QTable: value requested at a pair (y=" + std::to_string(y) +
                                                      ", z=" + std::to_string(z) + ") with no warm-start prior");
    }
    return q[static_cast<std::size_t>((y * nz + z) * nu + u)];
}

double QTable::max_abs_diff(const QTable& other) const {
    if (ny != other.ny || nz != other.nz || nu != other.nu) {
        throw DimensionMismatch( "QTable::max_abs_diff: shape mismatch");
    }
    double worst = 0.0;
    for (int y = 0; y < ny; ++y) {
        for (int z = 0; z < nz; ++z) {
            if (!defined(y, z) || !other.defined(y, z)) continue;
            for (int u = 0; u < nu; ++u) {
                worst = std::max(worst, std::abs(at(y, z, u) - other.at(y, z, u)));
            }
        }
    }
    return worst;
}

OracleEvaluation exact_q(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                         const InitialLaw& law) {
    const JointChain chain = JointChain::build(pi, spec, model, law);
    const int nx = chain.nx, ny = chain.ny, nz = chain.nz, nu = chain.nu;
    const int S = nx * ny * nz;
    const double gamma = model.gamma();

    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(S, S) - gamma * chain.M;
    const Eigen::VectorXd v0 = solve_linear(A, chain.reward_pi, "exact_q");

    OracleEvaluation ev;
    ev.v0.assign(static_cast<std::size_t>(S), 0.0);
    for (int s = 0; s < S; ++s) ev.v0[static_cast<std::size_t>(s)] = v0[s];

    ev.q0.assign(static_cast<std::size_t>(S) * nu, 0.0);
    for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) {
            for (int z = 0; z < nz; ++z) {
                for (int u = 0; u < nu; ++u) {
                    double cont = 0.0;
                    const double* prow = model.p_row(x, u);
                    for (int x2 = 0; x2 < nx; ++x2) {
                        if (prow[x2] <= 0.0) continue;
                        const double* phirow = model.phi_row(x2);
                        for (int y2 = 0; y2 < ny; ++y2) {
                            if (phirow[y2] <= 0.0) continue;
                            const double w = prow[x2] * phirow[y2];
                            for (int z2 = 0; z2 < nz; ++z2) {
                                const double kz = spec.kernel(z, y, u, z2);
                                if (kz > 0.0) cont += w * kz * v0[chain.index(x2, y2, z2)];
                            }
                        }
                    }
                    ev.q0[static_cast<std::size_t>(chain.index(x, y, z)) * nu + u] = model.r(x, u) + gamma * cont;
                }
            }
        }
    }

    ev.q.ny = ny;
    ev.q.nz = nz;
    ev.q.nu = nu;
    ev.q.q.assign(static_cast<std::size_t>(ny) * nz * nu, 0.0);
    ev.q.defined_yz.assign(static_cast<std::size_t>(ny) * nz, 0);
    ev.v.assign(static_cast<std::size_t>(ny) * nz, 0.0);
    ev.value_at_xi = 0.0;
    for (int y = 0; y < ny; ++y) {
        for (int z = 0; z < nz; ++z) {
            if (!law.has_prior(y, z)) continue;
            ev.q.defined_yz[static_cast<std::size_t>(y * nz + z)] = 1;
            const double* b = law.b0_row(y, z);
            double vyz = 0.0;
            for (int u = 0; u < nu; ++u) {
                double qv = 0.0;
                for (int x = 0; x < nx; ++x) {
                    if (b[x] > 0.0) qv += b[x] * ev.q0[static_cast<std::size_t>(chain.index(x, y, z)) * nu + u];
                }
                ev.q.q[static_cast<std::size_t>((y * nz + z) * nu + u)] = qv;
                vyz += pi.prob(y, z, u) * qv;
            }
            ev.v[static_cast<std::size_t>(y * nz + z)] = vyz;
            ev.value_at_xi += law.xi_at(y, z) * vyz;
        }
    }
    return ev;
}

VisitationReport exact_visitation(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                                  const InitialLaw& law, int m) {
    if (m < 1) throw ValidationError( "exact_visitation: m must be >= 1");
    const JointChain chain = JointChain::build(pi, spec, model, law);
    const int nx = chain.nx, ny = chain.ny, nz = chain.nz, nu = chain.nu;
    const int S = nx * ny * nz;
    const double gamma = model.gamma();

    // d_joint = (1-gamma) mu^T (I - gamma M)^{-1}  via the transposed solve.
    const Eigen::MatrixXd At = (Eigen::MatrixXd::Identity(S, S) - gamma * chain.M).transpose();
    const Eigen::VectorXd d_joint = solve_linear(At, (1.0 - gamma) * chain.initial, "exact_visitation");

    VisitationReport rep;
    rep.ny = ny;
    rep.nz = nz;
    rep.nu = nu;
    rep.m = m;
    rep.d.assign(static_cast<std::size_t>(ny) * nz, 0.0);
    rep.d_pi.assign(static_cast<std::size_t>(ny) * nz * nu, 0.0);
    for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) {
            for (int z = 0; z < nz; ++z) {
                rep.d[static_cast<std::size_t>(y * nz + z)] += std::max(0.0, d_joint[chain.index(x, y, z)]);
            }
        }
    }
    for (int y = 0; y < ny; ++y) {
        for (int z = 0; z < nz; ++z) {
            for (int u = 0; u < nu; ++u) {
                rep.d_pi[static_cast<std::size_t>((y * nz + z) * nu + u)] =
                    rep.d[static_cast<std::size_t>(y * nz + z)] * pi.prob(y, z, u);
            }
        }
    }

    // Push (d o pi) with x resampled from the prior through m exact steps.
    std::vector<double> mu(static_cast<std::size_t>(S) * nu, 0.0);
    for (int y = 0; y < ny; ++y) {
        for (int z = 0; z < nz; ++z) {
            const double dyz = rep.d[static_cast<std::size_t>(y * nz + z)];
            if (dyz <= 0.0) continue;
            if (!law.has_prior(y, z)) {
                throw DegenerateHistory(
                            "exact_visitation: visitation mass at a pair with no warm-start prior (y=" +
                                std::to_string(y) + ", z=" + std::to_string(z) + ")");
            }
            const double* b = law.b0_row(y, z);
            for (int u = 0; u < nu; ++u) {
                const double w = dyz * pi.prob(y, z, u);
                if (w <= 0.0) continue;
                for (int x = 0; x < nx; ++x) {
                    if (b[x] > 0.0) mu[static_cast<std::size_t>(chain.index(x, y, z)) * nu + u] += w * b[x];
                }
            }
        }
    }
    for (int k = 0; k < m; ++k) mu = step_action_measure(mu, pi, spec, model);

    rep.tilde_d.assign(static_cast<std::size_t>(ny) * nz, 0.0);
    rep.tilde_d_pi.assign(static_cast<std::size_t>(ny) * nz * nu, 0.0);
    for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) {
            for (int z = 0; z < nz; ++z) {
                for (int u = 0; u < nu; ++u) {
                    const double w = mu[static_cast<std::size_t>(chain.index(x, y, z)) * nu + u];
                    rep.tilde_d_pi[static_cast<std::size_t>((y * nz + z) * nu + u)] += w;
                    rep.tilde_d[static_cast<std::size_t>(y * nz + z)] += w;
                }
            }
        }
    }

    double tv = 0.0;
    for (std::size_t i = 0; i < rep.d_pi.size(); ++i) tv += std::abs(rep.d_pi[i] - rep.tilde_d_pi[i]);
    rep.tv_shift = 0.5 * tv;
    return rep;
}

FixedPointReport fixed_point_q(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                               const InitialLaw& law, int m) {
    if (m < 1) throw ValidationError( "fixed_point_q: m must be >= 1");
    check_dense_cap(model, spec, "fixed_point_q");
    check_table_dims(pi, spec, model, "fixed_point_q");
    const int nx = model.states(), ny = model.observations(), nz = spec.size(), nu = model.actions();
    const double gamma = model.gamma();
    const double gm = std::pow(gamma, m);

    // Compress to triples (y,z,u) whose pair carries a warm-start prior.
    std::vector<int> idx(static_cast<std::size_t>(ny) * nz * nu, -1);
    std::vector<int> triples;
    for (int y = 0; y < ny; ++y) {
        for (int z = 0; z < nz; ++z) {
            if (!law.has_prior(y, z)) continue;
            for (int u = 0; u < nu; ++u) {
                idx[static_cast<std::size_t>((y * nz + z) * nu + u)] = static_cast<int>(triples.size());
                triples.push_back((y * nz + z) * nu + u);
            }
        }
    }
    const int T = static_cast<int>(triples.size());
    if (T == 0) throw DegenerateHistory( "fixed_point_q: no pair carries a warm-start prior");

    Eigen::MatrixXd Pm = Eigen::MatrixXd::Zero(T, T);
    Eigen::VectorXd Rm = Eigen::VectorXd::Zero(T);
    std::vector<double> mu(static_cast<std::size_t>(nx) * ny * nz * nu);
    for (int j = 0; j < T; ++j) {
        const int flat = triples[static_cast<std::size_t>(j)];
        const int u0 = flat % nu;
        const int z0 = (flat / nu) % nz;
        const int y0 = flat / (nu * nz);
        std::fill(mu.begin(), mu.end(), 0.0);
        const double* b = law.b0_row(y0, z0);
        for (int x = 0; x < nx; ++x) {
            if (b[x] > 0.0) mu[static_cast<std::size_t>(((x * ny + y0) * nz + z0) * nu + u0)] = b[x];
        }
        double rsum = 0.0;
        double disc = 1.0;
        for (int k = 0; k < m; ++k) {
            double rk = 0.0;
            for (int x = 0; x < nx; ++x) {
                for (int y = 0; y < ny; ++y) {
                    for (int z = 0; z < nz; ++z) {
                        for (int u = 0; u < nu; ++u) {
                            const double w = mu[static_cast<std::size_t>(((x * ny + y) * nz + z) * nu + u)];
                            if (w > 0.0) rk += w * model.r(x, u);
                        }
                    }
                }
            }
            rsum += disc * rk;
            disc *= gamma;
            mu = step_action_measure(mu, pi, spec, model);
        }
        Rm[j] = rsum;
        double stray = 0.0;
        for (int x = 0; x < nx; ++x) {
            for (int y = 0; y < ny; ++y) {
                for (int z = 0; z < nz; ++z) {
                    for (int u = 0; u < nu; ++u) {
                        const double w = mu[static_cast<std::size_t>(((x * ny + y) * nz + z) * nu + u)];
                        if (w <= 0.0) continue;
                        const int col = idx[static_cast<std::size_t>((y * nz + z) * nu + u)];
                        if (col < 0) {
                            stray += w;
                        } else {
                            Pm(j, col) += w;
                        }
                    }
                }
            }
        }
        if (stray > 1e-12) {
            throw DegenerateHistory(
                        "fixed_point_q: the m-step kernel reaches pairs with no warm-start prior (mass " +
                            std::to_string(stray) + ")");
        }
    }

    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(T, T) - gm * Pm;
    const Eigen::VectorXd qc = solve_linear(A, Rm, "fixed_point_q");
    const Eigen::VectorXd resid = qc - (Rm + gm * (Pm * qc));

    FixedPointReport rep;
    rep.m = m;
    rep.residual_inf = resid.lpNorm<Eigen::Infinity>();
    rep.q_star.ny = ny;
    rep.q_star.nz = nz;
    rep.q_star.nu = nu;
    rep.q_star.q.assign(static_cast<std::size_t>(ny) * nz * nu, 0.0);
    rep.q_star.defined_yz.assign(static_cast<std::size_t>(ny) * nz, 0);
    for (int j = 0; j < T; ++j) {
        const int flat = triples[static_cast<std::size_t>(j)];
        rep.q_star.q[static_cast<std::size_t>(flat)] = qc[j];
        rep.q_star.defined_yz[static_cast<std::size_t>(flat / nu)] = 1;
    }
    return rep;
}

LinearFit best_linear_fit(const std::vector<double>& q, const std::vector<double>& weights, const FeatureMap& features,
                          double R) {
    if (q.size() != weights.size()) {
        throw DimensionMismatch( "best_linear_fit: table and weight lengths differ");
    }
    if (!(R > 0.0)) throw ValidationError( "best_linear_fit: R must be positive");
    const int dim = features.dim();
    const int ny = features.observations();
    const int nz = features.internal_states();
    const int nu = features.actions();
    if (q.size() != static_cast<std::size_t>(ny) * nz * nu) {
        throw DimensionMismatch( "best_linear_fit: table length does not match the feature shape");
    }

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd psi(dim);
    double wsum = 0.0;
    for (int y = 0; y < ny; ++y) {
        for (int z = 0; z < nz; ++z) {
            for (int u = 0; u < nu; ++u) {
                const std::size_t i = static_cast<std::size_t>((y * nz + z) * nu + u);
                const double w = weights[i];
                if (w < 0.0) throw ValidationError( "best_linear_fit: negative weight");
                if (w == 0.0) continue;
                wsum += w;
                features.copy_to(y, z, u, psi);
                A.noalias() += w * (psi * psi.transpose());
                c.noalias() += (w * q[i]) * psi;
            }
        }
    }
    if (wsum <= 0.0) throw ValidationError( "best_linear_fit: weights carry no mass");

    // Minimum-norm least-squares solution; exact when A is nonsingular.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    Eigen::VectorXd beta = cod.solve(c);

    if (beta.norm() > R) {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        const double lip = std::max(es.eigenvalues().maxCoeff(), 1e-300);
        beta = beta * (R / beta.norm());
        for (int it = 0; it < 200000; ++it) {
            Eigen::VectorXd grad = A * beta - c;
            Eigen::VectorXd next = beta - grad / lip;
            const double nn = next.norm();
            if (nn > R) next *= R / nn;
            const double delta = (next - beta).norm();
            beta = next;
            if (delta <= 1e-10 * std::max(1.0, beta.norm())) break;
        }
    }

    double err2 = 0.0;
    for (int y = 0; y < ny; ++y) {
        for (int z = 0; z < nz; ++z) {
            for (int u = 0; u < nu; ++u) {
                const std::size_t i = static_cast<std::size_t>((y * nz + z) * nu + u);
                const double w = weights[i];
                if (w == 0.0) continue;
                const double resid = q[i] - features.dot(beta, y, z, u);
                err2 += w * resid * resid;
            }
        }
    }
    LinearFit fit;
    fit.beta = std::move(beta);
    fit.error = std::sqrt(std::max(0.0, err2));
    return fit;
}

EpsPaReport eps_pa(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                   const InitialLaw& law, int m, double R, RngStream& rng, long long samples_per_triple) {
    if (m < 1) throw ValidationError( "eps_pa: m must be >= 1");
    if (!(R > 0.0)) throw ValidationError( "eps_pa: R must be positive");
    if (samples_per_triple < 1) throw ValidationError( "eps_pa: samples_per_triple must be >= 1");
    const VisitationReport vis = exact_visitation(pi, spec, model, law, m);
    const int ny = vis.ny, nz = vis.nz, nu = vis.nu;
    const double gamma = model.gamma();
    const double gm = std::pow(gamma, m);

    EpsPaReport rep;
    rep.tv_shift = vis.tv_shift;
    rep.first = (R + model.r_max() / (1.0 - gamma)) * std::sqrt(2.0 * gm * vis.tv_shift / (1.0 - gm));

    const int outer = std::max(1, static_cast<int>(std::ceil(std::log(1e-8 * (1.0 - gm)) / (m * std::log(gamma)))));
    rep.outer_terms = outer;
    rep.tail_bound = (gm / (1.0 - gamma)) * std::pow(gamma, static_cast<double>(outer) * m) / (1.0 - gm);
    rep.samples_per_triple = samples_per_triple;

    double norm2 = 0.0;
    rep.g_table.assign(static_cast<std::size_t>(ny) * nz * nu, 0.0);
    Belief belief;
    for (int y0 = 0; y0 < ny; ++y0) {
        for (int z0 = 0; z0 < nz; ++z0) {
            for (int u0 = 0; u0 < nu; ++u0) {
                const double w = vis.d_pi[static_cast<std::size_t>((y0 * nz + z0) * nu + u0)];
                if (w <= 0.0) continue;
                const double* b0 = law.b0_row(y0, z0);
                double gsum = 0.0;
                for (long long trial = 0; trial < samples_per_triple; ++trial) {
                    int x = sample_row(b0, model.states(), rng);
                    int y = y0, z = z0, u = u0;
                    belief.probs.assign(b0, b0 + model.states());
                    double acc = 0.0;
                    for (int t = 0; t < outer; ++t) {
                        for (int k = 0; k < m; ++k) {
                            const int x2 = rng.discrete(model.p_row(x, u), model.states());
                            const int y2 = rng.discrete(model.phi_row(x2), model.observations());
                            const int z2 = spec.internal_step(z, y, u, rng);
                            belief = filter_step(belief, y2, u, model);
                            x = x2;
                            y = y2;
                            z = z2;
                            u = sample_row(&pi.probs[static_cast<std::size_t>((y * nz + z) * nu)], nu, rng);
                        }
                        if (!law.has_prior(y, z)) {
                            throw DegenerateHistory(
                                        "eps_pa: trajectory reached a pair with no warm-start prior (y=" +
                                            std::to_string(y) + ", z=" + std::to_string(z) + ")");
                        }
                        acc += std::pow(gamma, static_cast<double>(t) * m) * tv_raw(law.b0_row(y, z), belief.probs);
                    }
                    gsum += acc;
                }
                const double g = gsum / static_cast<double>(samples_per_triple);
                rep.g_table[static_cast<std::size_t>((y0 * nz + z0) * nu + u0)] = g;
                norm2 += w * g * g;
            }
        }
    }
    rep.second = (gm / (1.0 - gamma)) * std::sqrt(std::max(0.0, norm2));
    rep.total = rep.first + rep.second;
    return rep;
}

InferenceReport inference_error(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                                const WarmStart& warm, int horizon, long long samples, RngStream& rng) {
    if (horizon < 1) throw ValidationError( "inference_error: horizon must be >= 1");
    if (samples < 2) throw ValidationError( "inference_error: at least 2 samples required");
    check_table_dims(pi, spec, model, "inference_error");
    const InitialLaw law = enumerate_initial(warm, spec, model);
    const int nz = spec.size(), nu = model.actions();
    const double gamma = model.gamma();

    double sum = 0.0, sum2 = 0.0;
    Belief belief;
    for (long long i = 0; i < samples; ++i) {
        const H0Sample h0 = sample_h0(warm, spec, model, rng);
        int x = h0.x0, y = h0.y0, z = h0.z0;
        belief = h0.b0;
        double acc = 0.0;  // k = 0 term vanishes: the history belief equals the prior at I_0
        double disc = gamma;
        for (int k = 1; k <= horizon - 1; ++k) {
            const int u = sample_row(&pi.probs[static_cast<std::size_t>((y * nz + z) * nu)], nu, rng);
            const int x2 = rng.discrete(model.p_row(x, u), model.states());
            const int y2 = rng.discrete(model.phi_row(x2), model.observations());
            const int z2 = spec.internal_step(z, y, u, rng);
            belief = filter_step(belief, y2, u, model);
            x = x2;
            y = y2;
            z = z2;
            if (!law.has_prior(y, z)) {
                throw DegenerateHistory(
                            "inference_error: trajectory reached a pair with no warm-start prior (y=" +
                                std::to_string(y) + ", z=" + std::to_string(z) + ")");
            }
            acc += disc * tv_raw(law.b0_row(y, z), belief.probs);
            disc *= gamma;
        }
        sum += acc;
        sum2 += acc * acc;
    }
    InferenceReport rep;
    rep.samples = samples;
    rep.horizon = horizon;
    rep.estimate = sum / static_cast<double>(samples);
    const double var = std::max(0.0, (sum2 - sum * sum / static_cast<double>(samples)) /
                                         static_cast<double>(samples - 1));
    rep.std_error = std::sqrt(var / static_cast<double>(samples));
    rep.tail_bound = std::pow(gamma, horizon) / (1.0 - gamma);
    return rep;
}

double concentrability(const std::vector<double>& d_pi_current, const std::vector<double>& d_pi_star) {
    if (d_pi_current.size() != d_pi_star.size()) {
        throw DimensionMismatch( "concentrability: visitation tables differ in length");
    }
    double c = 0.0;
    for (std::size_t i = 0; i < d_pi_current.size(); ++i) {
        const double num = d_pi_star[i];
        const double den = d_pi_current[i];
        if (num <= 0.0) continue;
        if (den <= 0.0) {
            throw UnboundedRatio(
                        "concentrability: reference visitation loads mass where the current policy has none (index " +
                            std::to_string(i) + ")");
        }
        c += num * num / den;
    }
    return c;
}

PdlReport pdl_check(const PolicyTable& pi_prime, const PolicyTable& pi, const InternalStateSpec& spec,
                    const PomdpModel& model, const WarmStart& warm, int horizon, long long samples, RngStream& rng) {
    const InitialLaw law = enumerate_initial(warm, spec, model);
    const OracleEvaluation base = exact_q(pi, spec, model, law);
    const OracleEvaluation primed = exact_q(pi_prime, spec, model, law);
    const VisitationReport vis_prime = exact_visitation(pi_prime, spec, model, law, 1);
    const double gamma = model.gamma();

    PdlReport rep;
    rep.lhs = primed.value_at_xi - base.value_at_xi;
    double adv = 0.0;
    for (int y = 0; y < vis_prime.ny; ++y) {
        for (int z = 0; z < vis_prime.nz; ++z) {
            const double dyz = vis_prime.d[static_cast<std::size_t>(y * vis_prime.nz + z)];
            if (dyz <= 0.0) continue;
            for (int u = 0; u < vis_prime.nu; ++u) {
                const double pu = pi_prime.prob(y, z, u);
                if (pu > 0.0) adv += dyz * pu * base.a(y, z, u);
            }
        }
    }
    rep.advantage_term = adv / (1.0 - gamma);
    rep.gamma_prime = inference_error(pi_prime, spec, model, warm, horizon, samples, rng);
    const double gamma_low = std::max(0.0, rep.gamma_prime.estimate - 3.0 * rep.gamma_prime.std_error);
    rep.rhs_conservative = rep.advantage_term - (2.0 * model.r_max() / (1.0 - gamma)) * gamma_low;
    rep.holds = rep.lhs >= rep.rhs_conservative - 1e-9;
    return rep;
}

BruteForceResult best_fsc_bruteforce(const InternalStateSpec& spec, const PomdpModel& model, const InitialLaw& law,
                                     long long cap) {
    const int ny = model.observations(), nz = spec.size(), nu = model.actions();
    const long long pairs = static_cast<long long>(ny) * nz;
    long double total_ld = 1.0L;
    for (long long i = 0; i < pairs; ++i) {
        total_ld *= nu;
        if (total_ld > static_cast<long double>(cap)) {
            throw SearchSpaceTooLarge(
                        "best_fsc_bruteforce: |U|^(|Y||Z|) exceeds the cap " + std::to_string(cap));
        }
    }
    const long long total = static_cast<long long>(total_ld);

    BruteForceResult best;
    best.searched = total;
    best.value = -1.0;
    std::vector<int> action_of(static_cast<std::size_t>(pairs), 0);
    for (long long code = 0; code < total; ++code) {
        long long rest = code;
        for (long long i = 0; i < pairs; ++i) {
            action_of[static_cast<std::size_t>(i)] = static_cast<int>(rest % nu);
            rest /= nu;
        }
        const PolicyTable cand = PolicyTable::deterministic(ny, nz, nu, action_of);
        const double value = exact_q(cand, spec, model, law).value_at_xi;
        if (value > best.value) {
            best.value = value;
            best.best = cand;
        }
    }
    return best;
}

LinearFit compatible_fa_error(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                              const InitialLaw& law, const FeatureMap& features, double R) {
    const OracleEvaluation ev = exact_q(pi, spec, model, law);
    const VisitationReport vis = exact_visitation(pi, spec, model, law, 1);
    return best_linear_fit(ev.q.q, vis.d_pi, features, R);
}

MdpSolution mdp_value_iteration(const PomdpModel& model, double tol, int max_iter) {
    const int nx = model.states(), nu = model.actions();
    MdpSolution sol;
    sol.v = Eigen::VectorXd::Zero(nx);
    sol.greedy.assign(static_cast<std::size_t>(nx), 0);
    Eigen::VectorXd next(nx);
    for (int it = 0; it < max_iter; ++it) {
        for (int x = 0; x < nx; ++x) {
            double best = -1.0;
            int arg = 0;
            for (int u = 0; u < nu; ++u) {
                double qv = model.r(x, u);
                const double* prow = model.p_row(x, u);
                for (int x2 = 0; x2 < nx; ++x2) qv += model.gamma() * prow[x2] * sol.v[x2];
                if (qv > best) {
                    best = qv;
                    arg = u;
                }
            }
            next[x] = best;
            sol.greedy[static_cast<std::size_t>(x)] = arg;
        }
        const double delta = (next - sol.v).lpNorm<Eigen::Infinity>();
        sol.v = next;
        sol.iterations = it + 1;
        if (delta <= tol) return sol;
    }
    throw SolveFailure( "mdp_value_iteration: no convergence within the iteration budget");
}

ErrorReport build_error_report(const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model,
                               const WarmStart& warm, int m, double R, const FeatureMap& features, RngStream& rng,
                               const PolicyTable* reference, const InternalStateSpec* reference_spec) {
    const InitialLaw law = enumerate_initial(warm, spec, model);
    const OracleEvaluation ev = exact_q(pi, spec, model, law);
    const FixedPointReport fp = fixed_point_q(pi, spec, model, law, m);
    const VisitationReport vis = exact_visitation(pi, spec, model, law, m);

    ErrorReport rep;
    rep.m = m;
    rep.value_at_xi = ev.value_at_xi;
    rep.fixed_point_gap_inf = fp.q_star.max_abs_diff(ev.q);
    rep.projection = best_linear_fit(ev.q.q, vis.d_pi, features, R);
    rep.eps_pa = eps_pa(pi, spec, model, law, m, R, rng);
    rep.gamma_inference = inference_error(pi, spec, model, warm, default_horizon(model.gamma()), 4000, rng);
    const double gm = std::pow(model.gamma(), m);
    rep.critic_M_const = model.r_max() * (1.0 - gm) / (1.0 - model.gamma()) + (1.0 + gm) * R;
    if (reference != nullptr) {
        const InternalStateSpec& rspec = reference_spec != nullptr ? *reference_spec : spec;
        if (rspec.size() != spec.size()) {
            throw DimensionMismatch(
                        "build_error_report: reference controller uses a different internal-state cardinality");
        }
        const InitialLaw rlaw = enumerate_initial(warm, rspec, model);
        const VisitationReport rvis = exact_visitation(*reference, rspec, model, rlaw, 1);
        rep.concentrability_vs_ref = concentrability(vis.d_pi, rvis.d_pi);
    }
    return rep;
}

}  // namespace pomdpnac
