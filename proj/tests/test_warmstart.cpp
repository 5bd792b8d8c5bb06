#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "pomdpnac/controllers.hpp"
#include "pomdpnac/errors.hpp"
#include "pomdpnac/filter.hpp"
#include "pomdpnac/model.hpp"
#include "pomdpnac/rng.hpp"
#include "pomdpnac/warmstart.hpp"

using namespace pomdpnac;

TEST_CASE("n = 0: singleton window, prior is the one-observation posterior") {
    PomdpModel model = two_state_noisy();
    InternalStateSpec spec = InternalStateSpec::sliding_block(0, model.observations(), model.actions());
    REQUIRE(spec.size() == 1);
    WarmStart warm = WarmStart::uniform(model, spec);
    RngStream rng(1);

    for (int i = 0; i < 50; ++i) {
        const H0Sample h0 = sample_h0(warm, spec, model, rng);
        CHECK(h0.z0 == 0);
        Belief prior;
        prior.probs = warm.theta;
        const Belief expect = observation_posterior(prior, h0.y0, model);
        for (int x = 0; x < model.states(); ++x) {
            CHECK(h0.b0.probs[static_cast<std::size_t>(x)] ==
                  doctest::Approx(expect.probs[static_cast<std::size_t>(x)]).epsilon(1e-12));
        }
    }

    const InitialLaw law = enumerate_initial(warm, spec, model);
    // xi(y, z=0) = sum_x theta(x) Phi(y|x) = 0.5*0.8 + 0.5*0.2 = 0.5 each.
    CHECK(law.xi_at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(law.xi_at(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("noiseless channel: the prior is a point mass at the realized state") {
    PomdpModel mdp = fully_observed(2, 2, {0.9, 0.1, 0.2, 0.8, 0.3, 0.7, 0.6, 0.4}, {0.2, 0.0, 1.0, 0.5}, 0.9);
    for (int n : {0, 1, 2}) {
        InternalStateSpec spec = InternalStateSpec::sliding_block(n, 2, 2);
        WarmStart warm = WarmStart::uniform(mdp, spec);
        RngStream rng(2);
        for (int i = 0; i < 40; ++i) {
            const H0Sample h0 = sample_h0(warm, spec, mdp, rng);
            CHECK(h0.b0.probs[static_cast<std::size_t>(h0.x0)] == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(h0.y0 == h0.x0);
        }
    }
}

TEST_CASE("enumerated initial law is a coherent probability object") {
    PomdpModel model = two_state_noisy();
    for (int n : {1, 2}) {
        InternalStateSpec spec = InternalStateSpec::sliding_block(n, model.observations(), model.actions());
        WarmStart warm = WarmStart::uniform(model, spec);
        const InitialLaw law = enumerate_initial(warm, spec, model);

        double xi_mass = 0.0, joint_mass = 0.0;
        for (int y = 0; y < model.observations(); ++y) {
            for (int z = 0; z < spec.size(); ++z) {
                xi_mass += law.xi_at(y, z);
                double marg = 0.0;
                for (int x = 0; x < model.states(); ++x) {
                    joint_mass += law.joint_at(x, y, z);
                    marg += law.joint_at(x, y, z);
                }
                CHECK(marg == doctest::Approx(law.xi_at(y, z)).epsilon(1e-12));
                if (law.has_prior(y, z)) {
                    double row = 0.0;
                    for (int x = 0; x < model.states(); ++x) row += law.b0(y, z, x);
                    CHECK(row == doctest::Approx(1.0).epsilon(1e-10));
                }
            }
        }
        CHECK(xi_mass == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(joint_mass == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("sampled priors coincide with the enumerated table rows") {
    PomdpModel model = two_state_noisy();
    InternalStateSpec spec = InternalStateSpec::sliding_block(1, model.observations(), model.actions());
    WarmStart warm = WarmStart::uniform(model, spec);
    const InitialLaw law = enumerate_initial(warm, spec, model);
    RngStream rng(3);
    for (int i = 0; i < 200; ++i) {
        const H0Sample h0 = sample_h0(warm, spec, model, rng);
        REQUIRE(law.has_prior(h0.y0, h0.z0));
        const double* row = law.b0_row(h0.y0, h0.z0);
        for (int x = 0; x < model.states(); ++x) {
            CHECK(h0.b0.probs[static_cast<std::size_t>(x)] == doctest::Approx(row[x]).epsilon(1e-9));
        }
    }
}

TEST_CASE("empirical (y0, z0) law matches xi within TV 0.02 at 1e5 draws") {
    PomdpModel model = two_state_noisy();
    InternalStateSpec spec = InternalStateSpec::sliding_block(1, model.observations(), model.actions());
    WarmStart warm = WarmStart::uniform(model, spec);
    const InitialLaw law = enumerate_initial(warm, spec, model);
    RngStream rng(4);

    const long long N = 100000;
    std::vector<double> counts(static_cast<std::size_t>(model.observations()) * spec.size(), 0.0);
    for (long long i = 0; i < N; ++i) {
        const H0Sample h0 = sample_h0(warm, spec, model, rng);
        counts[static_cast<std::size_t>(h0.y0 * spec.size() + h0.z0)] += 1.0;
    }
    double tv = 0.0;
    for (int y = 0; y < model.observations(); ++y) {
        for (int z = 0; z < spec.size(); ++z) {
            tv += std::abs(counts[static_cast<std::size_t>(y * spec.size() + z)] / static_cast<double>(N) -
                           law.xi_at(y, z));
        }
    }
    CHECK(0.5 * tv <= 0.02);
}

TEST_CASE("conditional law of x0 given (y0,z0) passes a chi-square test against b0") {
    PomdpModel model = two_state_noisy();
    InternalStateSpec spec = InternalStateSpec::sliding_block(1, model.observations(), model.actions());
    WarmStart warm = WarmStart::uniform(model, spec);
    const InitialLaw law = enumerate_initial(warm, spec, model);
    RngStream rng(5);

    const long long N = 20000;
    std::map<std::pair<int, int>, std::vector<double>> buckets;
    for (long long i = 0; i < N; ++i) {
        const H0Sample h0 = sample_h0(warm, spec, model, rng);
        auto& b = buckets[{h0.y0, h0.z0}];
        if (b.empty()) b.assign(static_cast<std::size_t>(model.states()), 0.0);
        b[static_cast<std::size_t>(h0.x0)] += 1.0;
    }
    double stat = 0.0;
    int dof = 0;
    for (const auto& [pair, obs] : buckets) {
        const auto [y, z] = pair;
        double total = 0.0;
        for (double c : obs) total += c;
        bool usable = true;
        for (int x = 0; x < model.states(); ++x) {
            if (total * law.b0(y, z, x) < 5.0) usable = false;
        }
        if (!usable) continue;
        for (int x = 0; x < model.states(); ++x) {
            const double expect = total * law.b0(y, z, x);
            const double diff = obs[static_cast<std::size_t>(x)] - expect;
            stat += diff * diff / expect;
        }
        dof += model.states() - 1;
    }
    REQUIRE(dof == 8);  // all 8 (y,z) pairs usable on the canonical model
    CHECK(stat < 20.09);  // chi-square 0.99 quantile at 8 degrees of freedom
}

TEST_CASE("generic controllers: xi factorizes and the prior ignores z") {
    PomdpModel model = two_state_noisy();
    // A 3-state generic kernel: deterministic cycle z -> (z+1) mod 3.
    std::vector<double> kernel(3 * 2 * 2 * 3, 0.0);
    for (int z = 0; z < 3; ++z) {
        for (int y = 0; y < 2; ++y) {
            for (int u = 0; u < 2; ++u) {
                kernel[static_cast<std::size_t>(((z * 2 + y) * 2 + u) * 3 + (z + 1) % 3)] = 1.0;
            }
        }
    }
    InternalStateSpec spec = InternalStateSpec::generic(3, 2, 2, kernel);
    WarmStart warm = WarmStart::uniform(model, spec);
    const InitialLaw law = enumerate_initial(warm, spec, model);

    Belief theta;
    theta.probs = warm.theta;
    for (int y = 0; y < 2; ++y) {
        const Belief post = observation_posterior(theta, y, model);
        double py = 0.0;
        for (int x = 0; x < 2; ++x) py += warm.theta[static_cast<std::size_t>(x)] * model.phi(x, y);
        for (int z = 0; z < 3; ++z) {
            CHECK(law.xi_at(y, z) == doctest::Approx(py * warm.z_init[static_cast<std::size_t>(z)]).epsilon(1e-12));
            // The prior row exists for every z (fresh-start semantics) and
            // equals the one-observation posterior regardless of z.
            REQUIRE(law.has_prior(y, z));
            for (int x = 0; x < 2; ++x) {
                CHECK(law.b0(y, z, x) == doctest::Approx(post.probs[static_cast<std::size_t>(x)]).epsilon(1e-12));
            }
        }
    }

    RngStream rng(6);
    for (int i = 0; i < 50; ++i) {
        const H0Sample h0 = sample_h0(warm, spec, model, rng);
        const Belief expect = observation_posterior(theta, h0.y0, model);
        for (int x = 0; x < 2; ++x) {
            CHECK(h0.b0.probs[static_cast<std::size_t>(x)] ==
                  doctest::Approx(expect.probs[static_cast<std::size_t>(x)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("warm start validation rejects malformed inputs") {
    PomdpModel model = two_state_noisy();
    InternalStateSpec spec = InternalStateSpec::sliding_block(1, model.observations(), model.actions());
    WarmStart warm = WarmStart::uniform(model, spec);

    WarmStart bad_theta = warm;
    bad_theta.theta = {0.7, 0.7};
    CHECK_THROWS_AS(bad_theta.validate(model, spec), ValidationError);

    WarmStart bad_explore = warm;
    bad_explore.explore[0] = 0.9;  // first row no longer sums to 1
    CHECK_THROWS_AS(bad_explore.validate(model, spec), ValidationError);
}

TEST_CASE("off-support pairs have no prior and accessing them throws") {
    // Point-mass theta on state 0 with a noiseless channel: windows whose
    // observation contradicts the reachable hidden path get zero mass.
    PomdpModel mdp = fully_observed(2, 2, {1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0}, {0.0, 0.0, 1.0, 1.0}, 0.9,
                                    "absorbing");
    InternalStateSpec spec = InternalStateSpec::sliding_block(1, 2, 2);
    WarmStart warm = WarmStart::uniform(mdp, spec);
    warm.theta = {1.0, 0.0};
    warm.validate(mdp, spec);
    const InitialLaw law = enumerate_initial(warm, spec, mdp);

    // From x_{-1}=0, any action keeps the chain in state 0, so y0 = 1 is
    // unreachable; windows with observed y_{-1} = 1 are likewise impossible.
    int supported = 0, unsupported = 0;
    for (int y = 0; y < 2; ++y) {
        for (int z = 0; z < spec.size(); ++z) {
            if (law.supported(y, z)) {
                ++supported;
            } else {
                ++unsupported;
                CHECK_FALSE(law.has_prior(y, z));
                CHECK_THROWS_AS(law.b0_belief(y, z), DegenerateHistory);
            }
        }
    }
    CHECK(supported == 2);  // y0 = 0 with the two windows (y_{-1}=0, u in {0,1})
    CHECK(unsupported == 6);
}
