#pragma once

#include <vector>

#include "pomdpnac/controllers.hpp"
#include "pomdpnac/filter.hpp"
#include "pomdpnac/model.hpp"
#include "pomdpnac/rng.hpp"

namespace pomdpnac {

/// Warm-start specification: how the initial history h0 = (y0, z0) and its
/// prior belief b0 are generated. For sliding-block controllers the hidden
/// chain starts n steps in the past from theta and rolls forward under a
/// stationary reactive exploration policy; the realized window becomes z0.
/// For generic controllers z0 is drawn from z_init and the chain starts fresh.
struct WarmStart {
    std::vector<double> explore;  // reactive exploration policy [y][u], rows on the simplex
    std::vector<double> theta;    // initial hidden distribution over X
    std::vector<double> z_init;   // initial internal distribution (generic kind only)

    /// Uniform exploration, uniform theta, uniform z_init.
    static WarmStart uniform(const PomdpModel& model, const InternalStateSpec& spec);

    void validate(const PomdpModel& model, const InternalStateSpec& spec) const;
};

/// One sampled initial history: the pair (y0, z0), its prior belief b0, and
/// the realized hidden state x0 (whose conditional law given (y0, z0) is b0).
struct H0Sample {
    int x0 = 0;
    int y0 = 0;
    int z0 = 0;
    Belief b0;
};

/// Exact initial law computed by enumeration: the distribution xi over
/// (y0, z0), the joint over (x0, y0, z0), and the conditional table
/// b0(x | y0, z0) the critic and the oracles share. Rows of b0 for pairs
/// outside the support of xi are undefined and asking for them throws
/// DegenerateHistory.
struct InitialLaw {
    int nx = 0, ny = 0, nz = 0;
    std::vector<double> xi;        // [(y*nz + z)]
    std::vector<double> joint;     // [((x*ny + y)*nz + z)]
    std::vector<double> b0_table;  // [((y*nz + z)*nx + x)], zero rows off-support

    double xi_at(int y, int z) const { return xi[static_cast<std::size_t>(y * nz + z)]; }
    double joint_at(int x, int y, int z) const { return joint[static_cast<std::size_t>((x * ny + y) * nz + z)]; }
    double b0(int y, int z, int x) const { return b0_table[static_cast<std::size_t>((y * nz + z) * nx + x)]; }
    const double* b0_row(int y, int z) const { return &b0_table[static_cast<std::size_t>((y * nz + z) * nx)]; }
    bool supported(int y, int z) const { return xi_at(y, z) > 0.0; }
    /// Whether b0(.|y,z) is defined (true for every supported pair; for
    /// generic controllers also for internal states z_init never starts from).
    bool has_prior(int y, int z) const;

    /// b0(.|y,z) as a Belief; throws DegenerateHistory where undefined.
    Belief b0_belief(int y, int z) const;
};

/// Draw (h0, b0, x0) per the warm-start construction.
H0Sample sample_h0(const WarmStart& warm, const InternalStateSpec& spec, const PomdpModel& model, RngStream& rng);

/// Enumerate the exact initial law. Sliding-block: forward dynamic program
/// over all hidden paths and (y,u) windows of length n. Generic: xi factorizes
/// as (theta-channel marginal over y0) x z_init, with b0 the one-observation
/// posterior of theta.
InitialLaw enumerate_initial(const WarmStart& warm, const InternalStateSpec& spec, const PomdpModel& model);

}  // namespace pomdpnac
