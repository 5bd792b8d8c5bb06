#include "pomdpnac/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "pomdpnac/errors.hpp"

namespace pomdpnac {

namespace {

constexpr long long kDenseCap = 200000;
constexpr double kZeroTol = 0.0;  // probabilities here come from products of nonnegatives

void check_policy_dims(const PolicyTable& pi, int ny, int nz, int nu) {
    if (pi.ny != ny || pi.nz != nz || pi.nu != nu ||
        pi.probs.size() != static_cast<std::size_t>(ny) * nz * nu) {
        throw DimensionMismatch("policy table does not match the model/controller dimensions");
    }
}

void check_history(const History& h, const PomdpModel& model, const InternalStateSpec& internal) {
    if (h.y0 < 0 || h.y0 >= model.observations() || h.z0 < 0 || h.z0 >= internal.size()) {
        throw ValidationError("history start (y0, z0) out of range");
    }
    if (h.observations.size() != h.actions.size()) {
        throw DimensionMismatch("history must carry as many observations as actions");
    }
    for (int y : h.observations) {
        if (y < 0 || y >= model.observations()) throw ValidationError("history observation out of range");
    }
    for (int u : h.actions) {
        if (u < 0 || u >= model.actions()) throw ValidationError("history action out of range");
    }
}

/// Entrywise min/max construction shared by conditions 2 and 3: rows is a
/// list of equal-length nonnegative vectors; returns (eps0, reference
/// measure). Columns zero in every row are skipped; a column zero in one row
/// and positive in another is a broken minorization.
std::pair<double, std::vector<double>> min_max_reference(const std::vector<std::vector<double>>& rows,
                                                         const char* what) {
    const std::size_t cols = rows.front().size();
    std::vector<double> ref(cols, 0.0);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (const std::vector<double>& row : rows) {
            lo = std::min(lo, row[c]);
            hi = std::max(hi, row[c]);
        }
        if (lo <= kZeroTol && hi > kZeroTol) {
            throw NotErgodic(std::string(what) + ": an outcome is reachable from one start but not another");
        }
        ref[c] = lo;
        total += lo;
    }
    if (total <= 0.0) throw NotErgodic(std::string(what) + ": reference measure has no mass");
    for (double& v : ref) v /= total;

    double eps0 = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c) {
        if (ref[c] <= 0.0) continue;
        for (const std::vector<double>& row : rows) {
            const double ratio = std::min(row[c] / ref[c], ref[c] / row[c]);
            eps0 = std::min(eps0, ratio);
        }
    }
    return {eps0, std::move(ref)};
}

/// One-step conditional kernels kappa_k(x_(k+1) | x_k) for k = 0..n-1, built
/// from precomputed backward variables. Undefined rows (history impossible
/// from that state) are zeroed and flagged.
struct OneStepKernels {
    std::vector<Eigen::MatrixXd> kappa;
    std::vector<std::vector<char>> row_defined;
};

OneStepKernels one_step_kernels(const PomdpModel& model, const History& h, const BackwardVariables& bv) {
    const int nx = model.states();
    const int n = static_cast<int>(h.observations.size());
    OneStepKernels out;
    out.kappa.reserve(static_cast<std::size_t>(n));
    out.row_defined.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const int u = h.actions[static_cast<std::size_t>(k)];
        const int y_next = h.observations[static_cast<std::size_t>(k)];
        Eigen::MatrixXd kern = Eigen::MatrixXd::Zero(nx, nx);
        std::vector<char> defined(static_cast<std::size_t>(nx), 0);
        bool any = false;
        for (int x = 0; x < nx; ++x) {
            double w = 0.0;
            for (int x2 = 0; x2 < nx; ++x2) {
                const double v =
                    model.p(x, u, x2) * model.phi(x2, y_next) * bv.beta[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(x2)];
                kern(x, x2) = v;
                w += v;
            }
            if (w > 0.0) {
                kern.row(x) /= w;
                defined[static_cast<std::size_t>(x)] = 1;
                any = true;
            } else {
                kern.row(x).setZero();
            }
        }
        if (!any) {
            throw DegenerateHistory("history suffix is impossible from every hidden state at step " +
                                    std::to_string(k));
        }
        out.kappa.push_back(std::move(kern));
        out.row_defined.push_back(std::move(defined));
    }
    return out;
}

}  // namespace

double ErgodicityCertificate::contraction_factor() const {
    return 1.0 - std::pow(alpha, 2 * m0 - 2) * eps0 * eps0;
}

double ErgodicityCertificate::envelope(int n) const {
    if (n < 0) throw ValidationError("envelope horizon must be >= 0");
    return std::pow(contraction_factor(), n / m0);
}

Condition1Result check_condition1(const PolicyTable& pi) {
    if (pi.ny <= 0 || pi.nz <= 0 || pi.nu <= 0 ||
        pi.probs.size() != static_cast<std::size_t>(pi.ny) * pi.nz * pi.nu) {
        throw DimensionMismatch("policy table has inconsistent dimensions");
    }
    const int rows = pi.ny * pi.nz;
    const int nu = pi.nu;

    // Common-support check: condition 1 forces supp(pi(.|y,z)) constant.
    std::vector<char> supported(static_cast<std::size_t>(nu), 0);
    for (int u = 0; u < nu; ++u) {
        supported[static_cast<std::size_t>(u)] = pi.probs[static_cast<std::size_t>(u)] > 0.0 ? 1 : 0;
    }
    for (int r = 0; r < rows; ++r) {
        for (int u = 0; u < nu; ++u) {
            const bool pos = pi.probs[static_cast<std::size_t>(r) * nu + u] > 0.0;
            if (pos != (supported[static_cast<std::size_t>(u)] != 0)) {
                throw SupportMismatch("action support differs across (y, z): no reference measure exists");
            }
        }
    }

    // Candidate reference measures: geometric-mean row, min row, max row.
    std::vector<std::vector<double>> candidates;
    {
        std::vector<double> geo(static_cast<std::size_t>(nu), 0.0);
        std::vector<double> lo(static_cast<std::size_t>(nu), 0.0);
        std::vector<double> hi(static_cast<std::size_t>(nu), 0.0);
        for (int u = 0; u < nu; ++u) {
            if (!supported[static_cast<std::size_t>(u)]) continue;
            double log_sum = 0.0;
            double mn = std::numeric_limits<double>::infinity();
            double mx = 0.0;
            for (int r = 0; r < rows; ++r) {
                const double p = pi.probs[static_cast<std::size_t>(r) * nu + u];
                log_sum += std::log(p);
                mn = std::min(mn, p);
                mx = std::max(mx, p);
            }
            geo[static_cast<std::size_t>(u)] = std::exp(log_sum / rows);
            lo[static_cast<std::size_t>(u)] = mn;
            hi[static_cast<std::size_t>(u)] = mx;
        }
        candidates.push_back(std::move(geo));
        candidates.push_back(std::move(lo));
        candidates.push_back(std::move(hi));
    }

    Condition1Result best;
    for (std::vector<double>& cand : candidates) {
        double total = 0.0;
        for (double v : cand) total += v;
        if (total <= 0.0) continue;
        for (double& v : cand) v /= total;
        double alpha = 1.0;
        for (int r = 0; r < rows; ++r) {
            for (int u = 0; u < nu; ++u) {
                if (!supported[static_cast<std::size_t>(u)]) continue;
                const double p = pi.probs[static_cast<std::size_t>(r) * nu + u];
                const double m = cand[static_cast<std::size_t>(u)];
                alpha = std::min(alpha, std::min(p / m, m / p));
            }
        }
        if (alpha > best.alpha) {
            best.alpha = alpha;
            best.mu_bar = cand;
        }
    }
    if (best.mu_bar.empty()) throw SupportMismatch("policy has no supported action");
    return best;
}

Condition2Result check_condition2(const PomdpModel& model, const std::vector<double>& mu_bar, int m0) {
    if (m0 < 1) throw ValidationError("block length m0 must be >= 1");
    if (mu_bar.size() != static_cast<std::size_t>(model.actions())) {
        throw DimensionMismatch("reference action measure must have one entry per action");
    }
    double total = 0.0;
    for (double v : mu_bar) {
        if (v < 0.0) throw ValidationError("reference action measure has a negative entry");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("reference action measure must sum to 1");

    const int nx = model.states();
    const int ny = model.observations();
    const int nu = model.actions();
    long long cols = nx;
    for (int j = 0; j < m0; ++j) {
        cols *= static_cast<long long>(ny) * nu;
        if (cols > kDenseCap) {
            throw SizeOverflow("condition-2 table |X| (|Y||U|)^m0 exceeds the dense enumeration cap");
        }
    }

    // Pbar rows by exact path enumeration. Column index: x_m first, then
    // observation digits (oldest first), then action digits (oldest first).
    std::vector<std::vector<double>> pbar(static_cast<std::size_t>(nx),
                                          std::vector<double>(static_cast<std::size_t>(cols), 0.0));
    std::vector<int> ys(static_cast<std::size_t>(m0), 0);
    std::vector<int> us(static_cast<std::size_t>(m0), 0);
    for (int x0 = 0; x0 < nx; ++x0) {
        // DFS over (u_j, x_{j+1}, y_{j+1}) for j = 0..m0-1.
        std::function<void(int, int, double)> walk = [&](int j, int x, double prob) {
            if (prob == 0.0) return;
            if (j == m0) {
                long long idx = x;
                for (int t = 0; t < m0; ++t) idx = idx * ny + ys[static_cast<std::size_t>(t)];
                for (int t = 0; t < m0; ++t) idx = idx * nu + us[static_cast<std::size_t>(t)];
                pbar[static_cast<std::size_t>(x0)][static_cast<std::size_t>(idx)] += prob;
                return;
            }
            for (int u = 0; u < nu; ++u) {
                const double pu = mu_bar[static_cast<std::size_t>(u)];
                if (pu == 0.0) continue;
                us[static_cast<std::size_t>(j)] = u;
                for (int x2 = 0; x2 < nx; ++x2) {
                    const double px = model.p(x, u, x2);
                    if (px == 0.0) continue;
                    for (int y2 = 0; y2 < ny; ++y2) {
                        const double py = model.phi(x2, y2);
                        if (py == 0.0) continue;
                        ys[static_cast<std::size_t>(j)] = y2;
                        walk(j + 1, x2, prob * pu * px * py);
                    }
                }
            }
        };
        walk(0, x0, 1.0);
    }

    auto [eps0, nu_ref] = min_max_reference(pbar, "condition 2");
    Condition2Result out;
    out.eps0 = eps0;
    out.nu = std::move(nu_ref);
    out.m0 = m0;
    return out;
}

Condition3Result check_condition3(const PolicyTable& pi, const PomdpModel& model, const InternalStateSpec& internal,
                                  int m0) {
    if (m0 < 1) throw ValidationError("block length m0 must be >= 1");
    const int nx = model.states();
    const int ny = model.observations();
    const int nz = internal.size();
    const int nu = model.actions();
    check_policy_dims(pi, ny, nz, nu);
    const long long S = static_cast<long long>(nx) * ny * nz * nu;
    if (S > kDenseCap) {
        throw SizeOverflow("joint chain dimension |X||Y||Z||U| exceeds the dense cap of " +
                           std::to_string(kDenseCap));
    }
    const auto idx = [&](int x, int y, int z, int u) { return ((x * ny + y) * nz + z) * nu + u; };

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(S, S);
    for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) {
            for (int z = 0; z < nz; ++z) {
                for (int u = 0; u < nu; ++u) {
                    const int row = idx(x, y, z, u);
                    for (int x2 = 0; x2 < nx; ++x2) {
                        const double px = model.p(x, u, x2);
                        if (px == 0.0) continue;
                        for (int y2 = 0; y2 < ny; ++y2) {
                            const double py = model.phi(x2, y2);
                            if (py == 0.0) continue;
                            for (int z2 = 0; z2 < nz; ++z2) {
                                const double pz = internal.kernel(z, y, u, z2);
                                if (pz == 0.0) continue;
                                for (int u2 = 0; u2 < nu; ++u2) {
                                    const double pu = pi.prob(y2, z2, u2);
                                    if (pu == 0.0) continue;
                                    M(row, idx(x2, y2, z2, u2)) += px * py * pz * pu;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    Eigen::MatrixXd Mp = M;
    for (int i = 1; i < m0; ++i) Mp = Mp * M;

    std::vector<std::vector<double>> rows(static_cast<std::size_t>(S), std::vector<double>(static_cast<std::size_t>(S)));
    for (long long r = 0; r < S; ++r) {
        for (long long c = 0; c < S; ++c) rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = Mp(r, c);
    }
    auto [eps0, upsilon] = min_max_reference(rows, "condition 3");
    Condition3Result out;
    out.eps0 = eps0;
    out.upsilon = std::move(upsilon);
    out.m0 = m0;
    return out;
}

ErgodicityCertificate certify(const PolicyTable& pi, const PomdpModel& model, const InternalStateSpec& internal,
                              int m0) {
    ErgodicityCertificate cert;
    cert.m0 = m0;
    try {
        const Condition1Result c1 = check_condition1(pi);
        const Condition2Result c2 = check_condition2(model, c1.mu_bar, m0);
        cert.alpha = c1.alpha;
        cert.mu_bar = c1.mu_bar;
        cert.eps0 = c2.eps0;
        cert.nu = c2.nu;
        cert.which = CertifiedCondition::cond2;
        return cert;
    } catch (const SupportMismatch&) {
    } catch (const NotErgodic&) {
    }
    try {
        const Condition3Result c3 = check_condition3(pi, model, internal, m0);
        cert.alpha = 1.0;
        cert.mu_bar.clear();
        cert.eps0 = c3.eps0;
        cert.nu = c3.upsilon;
        cert.which = CertifiedCondition::cond3;
        return cert;
    } catch (const NotErgodic&) {
    }
    cert.which = CertifiedCondition::none;
    cert.eps0 = 0.0;
    cert.alpha = 1.0;
    cert.nu.clear();
    cert.mu_bar.clear();
    return cert;
}

BackwardVariables backward_variables(const PomdpModel& model, const PolicyTable& pi,
                                     const InternalStateSpec& internal, const History& h) {
    check_policy_dims(pi, model.observations(), internal.size(), model.actions());
    check_history(h, model, internal);
    const int nx = model.states();
    const int n = static_cast<int>(h.observations.size());

    // Realized (y, z) path; the internal map must be deterministic for z_k
    // to be a function of the history.
    std::vector<int> y_path(static_cast<std::size_t>(n) + 1);
    std::vector<int> z_path(static_cast<std::size_t>(n) + 1);
    y_path[0] = h.y0;
    z_path[0] = h.z0;
    for (int k = 0; k < n; ++k) {
        y_path[static_cast<std::size_t>(k) + 1] = h.observations[static_cast<std::size_t>(k)];
        z_path[static_cast<std::size_t>(k) + 1] =
            internal.step_deterministic(z_path[static_cast<std::size_t>(k)], y_path[static_cast<std::size_t>(k)],
                                        h.actions[static_cast<std::size_t>(k)]);
    }

    BackwardVariables out;
    out.horizon = n;
    out.beta.assign(static_cast<std::size_t>(n) + 1, std::vector<double>(static_cast<std::size_t>(nx), 1.0));
    for (int k = n - 1; k >= 0; --k) {
        const int u = h.actions[static_cast<std::size_t>(k)];
        const double pu = pi.prob(y_path[static_cast<std::size_t>(k)], z_path[static_cast<std::size_t>(k)], u);
        const int y_next = y_path[static_cast<std::size_t>(k) + 1];
        for (int x = 0; x < nx; ++x) {
            double acc = 0.0;
            for (int x2 = 0; x2 < nx; ++x2) {
                acc += model.p(x, u, x2) * model.phi(x2, y_next) *
                       out.beta[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(x2)];
            }
            out.beta[static_cast<std::size_t>(k)][static_cast<std::size_t>(x)] = pu * acc;
        }
    }
    return out;
}

std::vector<SmoothingKernel> smoothing_kernels(const PomdpModel& model, const PolicyTable& pi,
                                               const InternalStateSpec& internal, const History& h, int m0) {
    if (m0 < 1) throw ValidationError("block length m0 must be >= 1");
    const int n = static_cast<int>(h.observations.size());
    if (n < m0) throw ValidationError("history must be at least one block long");

    const BackwardVariables bv = backward_variables(model, pi, internal, h);
    const OneStepKernels steps = one_step_kernels(model, h, bv);

    const int blocks = n / m0;
    std::vector<SmoothingKernel> out;
    out.reserve(static_cast<std::size_t>(blocks));
    for (int ell = 0; ell < blocks; ++ell) {
        SmoothingKernel block;
        block.ell = ell;
        block.kappa = steps.kappa[static_cast<std::size_t>(ell) * m0];
        block.row_defined = steps.row_defined[static_cast<std::size_t>(ell) * m0];
        for (int j = 1; j < m0; ++j) {
            block.kappa = block.kappa * steps.kappa[static_cast<std::size_t>(ell) * m0 + j];
        }
        out.push_back(std::move(block));
    }
    return out;
}

MinorizationReport verify_kernel_minorization(const std::vector<SmoothingKernel>& kernels,
                                              const ErgodicityCertificate& cert) {
    MinorizationReport report;
    report.bound = std::pow(cert.alpha, 2 * cert.m0 - 2) * cert.eps0 * cert.eps0;
    for (const SmoothingKernel& block : kernels) {
        const int nx = static_cast<int>(block.kappa.rows());
        double c = 0.0;
        for (int x2 = 0; x2 < nx; ++x2) {
            double lo = std::numeric_limits<double>::infinity();
            for (int x = 0; x < nx; ++x) {
                if (!block.row_defined[static_cast<std::size_t>(x)]) continue;
                lo = std::min(lo, block.kappa(x, x2));
            }
            if (std::isfinite(lo)) c += lo;
        }
        report.c.push_back(c);
        if (c < report.bound - 1e-12) report.ok = false;
    }
    return report;
}

ContractionCurve contraction_experiment(const PomdpModel& model, const PolicyTable& pi,
                                        const InternalStateSpec& internal, const std::vector<int>& n_list,
                                        const Belief& v0, const Belief& v0_prime, int samples, RngStream& rng,
                                        const ErgodicityCertificate* cert) {
    check_policy_dims(pi, model.observations(), internal.size(), model.actions());
    if (v0.size() != model.states() || v0_prime.size() != model.states()) {
        throw DimensionMismatch("prior beliefs must live on the hidden-state space");
    }
    if (samples <= 0) throw ValidationError("samples must be > 0");
    const int nx = model.states();
    const int m0 = cert != nullptr ? cert->m0 : 1;

    ContractionCurve curve;
    curve.samples = samples;
    curve.has_envelope = cert != nullptr && cert->which != CertifiedCondition::none;

    for (int n : n_list) {
        if (n < 0) throw ValidationError("history lengths must be >= 0");
        double tv_sum = 0.0;
        double tv_max = 0.0;
        for (int s = 0; s < samples; ++s) {
            // Sample one realized history of length n under the policy.
            History h;
            int x = rng.uniform_int(nx);
            h.y0 = rng.discrete(model.phi_row(x), model.observations());
            h.z0 = 0;
            int y = h.y0;
            int z = h.z0;
            h.observations.reserve(static_cast<std::size_t>(n));
            h.actions.reserve(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) {
                int u = rng.discrete(&pi.probs[static_cast<std::size_t>((y * internal.size() + z) * model.actions())],
                                     model.actions());
                x = rng.discrete(model.p_row(x, u), nx);
                const int y2 = rng.discrete(model.phi_row(x), model.observations());
                z = internal.internal_step(z, y, u, rng);
                y = y2;
                h.observations.push_back(y);
                h.actions.push_back(u);
            }

            // Exact filters under both priors on the shared (y, u) stream.
            const Belief f1 = filter_n(v0, h.observations, h.actions, model);
            const Belief f2 = filter_n(v0_prime, h.observations, h.actions, model);
            const double tv = tv_distance(f1, f2);
            tv_sum += tv;
            tv_max = std::max(tv_max, tv);

            // Smoothing-kernel factorization checks.
            const BackwardVariables bv = backward_variables(model, pi, internal, h);
            std::vector<double> mu(static_cast<std::size_t>(nx)), mu_p(static_cast<std::size_t>(nx));
            double w1 = 0.0, w2 = 0.0;
            for (int i = 0; i < nx; ++i) {
                mu[static_cast<std::size_t>(i)] = v0[i] * bv.beta[0][static_cast<std::size_t>(i)];
                mu_p[static_cast<std::size_t>(i)] = v0_prime[i] * bv.beta[0][static_cast<std::size_t>(i)];
                w1 += mu[static_cast<std::size_t>(i)];
                w2 += mu_p[static_cast<std::size_t>(i)];
            }
            if (w1 <= 0.0 || w2 <= 0.0) {
                throw DegenerateHistory("sampled history impossible under a supplied prior");
            }
            for (double& v : mu) v /= w1;
            for (double& v : mu_p) v /= w2;
            const double tv_posterior = tv_distance(mu, mu_p);

            if (n > 0) {
                const OneStepKernels steps = one_step_kernels(model, h, bv);
                double tv_chain = tv_posterior;
                int steps_done = 0;
                for (int b = 0; b + m0 <= n; b += m0) {
                    for (int j = 0; j < m0; ++j) {
                        mu = left_multiply(mu, steps.kappa[static_cast<std::size_t>(b + j)]);
                        mu_p = left_multiply(mu_p, steps.kappa[static_cast<std::size_t>(b + j)]);
                    }
                    steps_done = b + m0;
                    const double tv_next = tv_distance(mu, mu_p);
                    if (tv_next > tv_chain + 1e-12) ++curve.violations_nonexpansion;
                    tv_chain = tv_next;
                }
                for (int k = steps_done; k < n; ++k) {
                    mu = left_multiply(mu, steps.kappa[static_cast<std::size_t>(k)]);
                    mu_p = left_multiply(mu_p, steps.kappa[static_cast<std::size_t>(k)]);
                    const double tv_next = tv_distance(mu, mu_p);
                    if (tv_next > tv_chain + 1e-12) ++curve.violations_nonexpansion;
                    tv_chain = tv_next;
                }
                if (tv_distance(mu, f1.probs) > 1e-10 || tv_distance(mu_p, f2.probs) > 1e-10) {
                    ++curve.violations_consistency;
                }
            } else if (tv_distance(mu, f1.probs) > 1e-10 || tv_distance(mu_p, f2.probs) > 1e-10) {
                ++curve.violations_consistency;
            }

            if (curve.has_envelope && tv > cert->envelope(n) * std::max(tv_posterior, 0.0) + 1e-12) {
                ++curve.violations_envelope;
            }
        }
        curve.ns.push_back(n);
        curve.tv_mean.push_back(tv_sum / samples);
        curve.tv_max.push_back(tv_max);
        if (curve.has_envelope) curve.envelope.push_back(cert->envelope(n));
    }
    return curve;
}

std::vector<double> left_multiply(const std::vector<double>& v, const Eigen::MatrixXd& K) {
    if (static_cast<long long>(v.size()) != K.rows()) {
        throw DimensionMismatch("left_multiply: vector length must match the kernel's row count");
    }
    std::vector<double> out(static_cast<std::size_t>(K.cols()), 0.0);
    for (long long i = 0; i < K.rows(); ++i) {
        const double vi = v[static_cast<std::size_t>(i)];
        if (vi == 0.0) continue;
        for (long long j = 0; j < K.cols(); ++j) out[static_cast<std::size_t>(j)] += vi * K(i, j);
    }
    return out;
}

}  // namespace pomdpnac
