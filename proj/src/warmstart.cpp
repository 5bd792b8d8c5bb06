#include "pomdpnac/warmstart.hpp"

#include <cmath>

#include "pomdpnac/errors.hpp"

namespace pomdpnac {

namespace {

void check_rows(const std::vector<double>& rows, int nrows, int ncols, const char* what) {
    if (static_cast<int>(rows.size()) != nrows * ncols)
        throw DimensionMismatch(std::string(what) + " has wrong size");
    for (int i = 0; i < nrows; ++i) {
        double s = 0.0;
        for (int j = 0; j < ncols; ++j) {
            double v = rows[static_cast<std::size_t>(i * ncols + j)];
            if (v < 0.0 || !std::isfinite(v)) throw ValidationError(std::string(what) + " has an invalid entry");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-9) throw ValidationError(std::string(what) + " row does not sum to 1");
    }
}

}  // namespace

WarmStart WarmStart::uniform(const PomdpModel& model, const InternalStateSpec& spec) {
    WarmStart w;
    w.explore.assign(static_cast<std::size_t>(model.observations()) * model.actions(), 1.0 / model.actions());
    w.theta.assign(static_cast<std::size_t>(model.states()), 1.0 / model.states());
    w.z_init.assign(static_cast<std::size_t>(spec.size()), 1.0 / spec.size());
    return w;
}

void WarmStart::validate(const PomdpModel& model, const InternalStateSpec& spec) const {
    check_rows(explore, model.observations(), model.actions(), "exploration policy");
    check_rows(theta, 1, model.states(), "initial hidden distribution");
    if (!spec.is_sliding_block()) check_rows(z_init, 1, spec.size(), "initial internal distribution");
}

bool InitialLaw::has_prior(int y, int z) const {
    const double* row = b0_row(y, z);
    double s = 0.0;
    for (int x = 0; x < nx; ++x) s += row[x];
    return s > 0.5;  // rows are either normalized or identically zero
}

Belief InitialLaw::b0_belief(int y, int z) const {
    if (!has_prior(y, z))
        throw DegenerateHistory("initial pair (y=" + std::to_string(y) + ", z=" + std::to_string(z) +
                                ") has probability 0 under the warm start");
    std::vector<double> p(b0_row(y, z), b0_row(y, z) + nx);
    return Belief(std::move(p), "warm-start prior");
}

H0Sample sample_h0(const WarmStart& warm, const InternalStateSpec& spec, const PomdpModel& model, RngStream& rng) {
    warm.validate(model, spec);
    const int nu = model.actions();
    H0Sample out;

    if (!spec.is_sliding_block()) {
        int x0 = rng.discrete(warm.theta);
        int y0 = rng.discrete(model.phi_row(x0), model.observations());
        out.x0 = x0;
        out.y0 = y0;
        out.z0 = rng.discrete(warm.z_init);
        out.b0 = observation_posterior(Belief(warm.theta, "initial hidden distribution"), y0, model);
        return out;
    }

    const int n = spec.block_length();
    int x = rng.discrete(warm.theta);
    int y = rng.discrete(model.phi_row(x), model.observations());
    Belief b = observation_posterior(Belief(warm.theta, "initial hidden distribution"), y, model);
    std::vector<int> ys, us;
    ys.reserve(static_cast<std::size_t>(n));
    us.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        int u = rng.discrete(&warm.explore[static_cast<std::size_t>(y) * nu], nu);
        ys.push_back(y);
        us.push_back(u);
        x = rng.discrete(model.p_row(x, u), model.states());
        y = rng.discrete(model.phi_row(x), model.observations());
        b = filter_step(b, y, u, model);
    }
    out.x0 = x;
    out.y0 = y;
    out.z0 = spec.pack_window(ys, us);
    out.b0 = std::move(b);
    out.b0.provenance = "warm-start prior";
    return out;
}

InitialLaw enumerate_initial(const WarmStart& warm, const InternalStateSpec& spec, const PomdpModel& model) {
    warm.validate(model, spec);
    const int nx = model.states(), ny = model.observations(), nu = model.actions(), nz = spec.size();

    InitialLaw law;
    law.nx = nx;
    law.ny = ny;
    law.nz = nz;
    law.xi.assign(static_cast<std::size_t>(ny) * nz, 0.0);
    law.joint.assign(static_cast<std::size_t>(nx) * ny * nz, 0.0);
    law.b0_table.assign(static_cast<std::size_t>(ny) * nz * nx, 0.0);

    if (!spec.is_sliding_block()) {
        // Fresh start: y0 from the theta-channel marginal, z0 independent.
        // The prior b0(.|y,z) is the one-observation posterior of theta and
        // does not depend on z, so it is defined for every internal state
        // (the internal chain may visit states z_init never starts from).
        for (int y = 0; y < ny; ++y) {
            double py = 0.0;
            for (int x = 0; x < nx; ++x) py += warm.theta[static_cast<std::size_t>(x)] * model.phi(x, y);
            for (int z = 0; z < nz; ++z) {
                double w = py * warm.z_init[static_cast<std::size_t>(z)];
                law.xi[static_cast<std::size_t>(y * nz + z)] = w;
                for (int x = 0; x < nx; ++x)
                    law.joint[static_cast<std::size_t>((x * ny + y) * nz + z)] =
                        warm.theta[static_cast<std::size_t>(x)] * model.phi(x, y) *
                        warm.z_init[static_cast<std::size_t>(z)];
            }
            if (py > 0.0)
                for (int z = 0; z < nz; ++z)
                    for (int x = 0; x < nx; ++x)
                        law.b0_table[static_cast<std::size_t>((y * nz + z) * nx + x)] =
                            warm.theta[static_cast<std::size_t>(x)] * model.phi(x, y) / py;
        }
        return law;
    }
    {
        // Forward enumeration over all (y,u) windows, carrying the hidden-path
        // weight alpha(x) = P(window prefix, current hidden state = x).
        const int n = spec.block_length();
        std::vector<int> ys(static_cast<std::size_t>(n)), us(static_cast<std::size_t>(n));
        std::vector<double> alpha0(static_cast<std::size_t>(nx));

        // Recursion over window depth j: alpha already accounts for y_{j-n}.
        auto recurse = [&](auto&& self, int j, int y_cur, const std::vector<double>& alpha) -> void {
            if (j == n) {
                int z = spec.pack_window(ys, us);
                double mass = 0.0;
                for (int x = 0; x < nx; ++x) {
                    law.joint[static_cast<std::size_t>((x * ny + y_cur) * nz + z)] += alpha[static_cast<std::size_t>(x)];
                    mass += alpha[static_cast<std::size_t>(x)];
                }
                law.xi[static_cast<std::size_t>(y_cur * nz + z)] += mass;
                return;
            }
            ys[static_cast<std::size_t>(j)] = y_cur;
            std::vector<double> next(static_cast<std::size_t>(nx));
            for (int u = 0; u < nu; ++u) {
                double pu = warm.explore[static_cast<std::size_t>(y_cur) * nu + u];
                if (pu == 0.0) continue;
                us[static_cast<std::size_t>(j)] = u;
                for (int y2 = 0; y2 < ny; ++y2) {
                    bool any = false;
                    for (int x2 = 0; x2 < nx; ++x2) {
                        double s = 0.0;
                        for (int x = 0; x < nx; ++x) s += alpha[static_cast<std::size_t>(x)] * model.p(x, u, x2);
                        double v = pu * s * model.phi(x2, y2);
                        next[static_cast<std::size_t>(x2)] = v;
                        any = any || v > 0.0;
                    }
                    if (any) self(self, j + 1, y2, next);
                }
            }
        };

        for (int y = 0; y < ny; ++y) {
            bool any = false;
            for (int x = 0; x < nx; ++x) {
                alpha0[static_cast<std::size_t>(x)] = warm.theta[static_cast<std::size_t>(x)] * model.phi(x, y);
                any = any || alpha0[static_cast<std::size_t>(x)] > 0.0;
            }
            if (any) recurse(recurse, 0, y, alpha0);
        }
    }

    // Conditional table b0(x | y, z) from the joint; off-support rows stay 0.
    for (int y = 0; y < ny; ++y)
        for (int z = 0; z < nz; ++z) {
            double mass = law.xi[static_cast<std::size_t>(y * nz + z)];
            if (mass <= 0.0) continue;
            for (int x = 0; x < nx; ++x)
                law.b0_table[static_cast<std::size_t>((y * nz + z) * nx + x)] =
                    law.joint[static_cast<std::size_t>((x * ny + y) * nz + z)] / mass;
        }
    return law;
}

}  // namespace pomdpnac
