#include <doctest.h>

#include <cmath>
#include <vector>

#include "pomdpnac/controllers.hpp"
#include "pomdpnac/errors.hpp"

using namespace pomdpnac;

TEST_CASE("sliding-block shift: window (y-,u-) maps to (y,u)") {
    // n=1, Y=U=2: z encodes (y_prev, u_prev) as y_prev*2 + u_prev.
    InternalStateSpec s = InternalStateSpec::sliding_block(1, 2, 2);
    CHECK(s.size() == 4);
    RngStream rng(0);
    for (int z = 0; z < 4; ++z)
        for (int y = 0; y < 2; ++y)
            for (int u = 0; u < 2; ++u) {
                CHECK(s.internal_step(z, y, u, rng) == y * 2 + u);
                CHECK(s.step_deterministic(z, y, u) == y * 2 + u);
            }
}

TEST_CASE("sliding-block n=0 is the reactive singleton") {
    InternalStateSpec s = InternalStateSpec::sliding_block(0, 3, 2);
    CHECK(s.size() == 1);
    RngStream rng(0);
    CHECK(s.internal_step(0, 2, 1, rng) == 0);
}

TEST_CASE("sliding-block packing round-trips and shifts drop the oldest pair") {
    InternalStateSpec s = InternalStateSpec::sliding_block(2, 2, 3);
    CHECK(s.size() == 4 * 9);
    for (int z = 0; z < s.size(); ++z) {
        auto ys = s.window_observations(z);
        auto us = s.window_actions(z);
        CHECK(s.pack_window(ys, us) == z);
        int z2 = s.step_deterministic(z, 1, 2);
        auto ys2 = s.window_observations(z2);
        auto us2 = s.window_actions(z2);
        CHECK(ys2[0] == ys[1]);
        CHECK(ys2[1] == 1);
        CHECK(us2[0] == us[1]);
        CHECK(us2[1] == 2);
    }
}

TEST_CASE("sliding-block kernel entries are the deterministic indicator") {
    InternalStateSpec s = InternalStateSpec::sliding_block(1, 2, 2);
    for (int z = 0; z < 4; ++z)
        for (int y = 0; y < 2; ++y)
            for (int u = 0; u < 2; ++u) {
                double sum = 0.0;
                for (int z2 = 0; z2 < 4; ++z2) sum += s.kernel(z, y, u, z2);
                CHECK(sum == doctest::Approx(1.0));
                CHECK(s.kernel(z, y, u, y * 2 + u) == doctest::Approx(1.0));
            }
}

TEST_CASE("generic kernels validate rows and sample from them") {
    // Deterministic rows written as a generic kernel must match table lookup.
    std::vector<double> kern(2 * 2 * 1 * 2, 0.0);
    auto at = [&](int z, int y, int u, int z2) -> double& {
        return kern[static_cast<std::size_t>(((z * 2 + y) * 1 + u) * 2 + z2)];
    };
    at(0, 0, 0, 1) = 1.0;
    at(0, 1, 0, 0) = 1.0;
    at(1, 0, 0, 0) = 1.0;
    at(1, 1, 0, 1) = 1.0;
    InternalStateSpec s = InternalStateSpec::generic(2, 2, 1, kern);
    RngStream rng(3);
    CHECK(s.internal_step(0, 0, 0, rng) == 1);
    CHECK(s.internal_step(1, 0, 0, rng) == 0);
    CHECK(s.step_deterministic(0, 1, 0) == 0);

    SUBCASE("row sums must be 1 within 1e-12") {
        auto bad = kern;
        bad[0] = 0.5;
        CHECK_THROWS_AS(InternalStateSpec::generic(2, 2, 1, bad), ValidationError);
    }
    SUBCASE("stochastic rows sample with the right frequencies") {
        std::vector<double> k2 = {0.25, 0.75, 0.5, 0.5};  // nz=2, ny=1, nu=1
        InternalStateSpec st = InternalStateSpec::generic(2, 1, 1, k2);
        RngStream r2(11);
        int ones = 0;
        const int trials = 20000;
        for (int i = 0; i < trials; ++i) ones += st.internal_step(0, 0, 0, r2);
        CHECK(static_cast<double>(ones) / trials == doctest::Approx(0.75).epsilon(0.02));
    }
}

TEST_CASE("tabular features are one-hot with the documented layout") {
    FeatureMap f = FeatureMap::tabular(2, 3, 2);
    CHECK(f.dim() == 12);
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(12, 0, 11);
    CHECK(f.dot(v, 1, 2, 1) == doctest::Approx((1 * 3 + 2) * 2 + 1));
    Eigen::VectorXd out;
    f.copy_to(0, 1, 1, out);
    CHECK(out.sum() == doctest::Approx(1.0));
    CHECK(out[(0 * 3 + 1) * 2 + 1] == doctest::Approx(1.0));
    CHECK_THROWS_AS(FeatureMap::tabular(1000, 1000, 1000), SizeOverflow);
}

TEST_CASE("custom features must have norm at most 1") {
    std::vector<double> ok = {0.6, 0.8, 0.0, 1.0};  // two triples, dim 2
    CHECK_NOTHROW(FeatureMap::custom(1, 1, 2, 2, ok));
    std::vector<double> bad = {0.9, 0.9, 0.0, 1.0};
    CHECK_THROWS_AS(FeatureMap::custom(1, 1, 2, 2, bad), ValidationError);
}

TEST_CASE("softmax policy: theta = 0 is uniform, logits shift as expected") {
    InternalStateSpec s = InternalStateSpec::sliding_block(0, 1, 2);
    FeatureMap f = FeatureMap::tabular(1, 1, 2);
    FscPolicy uni(s, f);
    CHECK(uni.action_prob(0, 0, 0) == doctest::Approx(0.5));
    CHECK(uni.action_prob(0, 0, 1) == doctest::Approx(0.5));

    Eigen::VectorXd theta(2);
    theta << 1.0, 0.0;
    FscPolicy p = uni.with_theta(theta);
    const double e = std::exp(1.0);
    CHECK(p.action_prob(0, 0, 0) == doctest::Approx(e / (e + 1.0)).epsilon(1e-15));
    CHECK(p.action_prob(0, 0, 1) == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-15));

    // Adding a constant to all logits of a (y,z) block changes nothing.
    Eigen::VectorXd shifted = (theta.array() + 123.0).matrix();
    FscPolicy q = uni.with_theta(shifted);
    CHECK(q.action_prob(0, 0, 0) == doctest::Approx(p.action_prob(0, 0, 0)).epsilon(1e-12));
}

TEST_CASE("log-policy gradient: closed forms and bounds") {
    SUBCASE("single action gives the zero vector") {
        InternalStateSpec s = InternalStateSpec::sliding_block(0, 2, 1);
        FeatureMap f = FeatureMap::tabular(2, 1, 1);
        FscPolicy p(s, f);
        CHECK(p.log_policy_gradient(1, 0, 0).norm() == doctest::Approx(0.0));
    }
    SUBCASE("theta = 0 with one-hot features") {
        InternalStateSpec s = InternalStateSpec::sliding_block(0, 1, 4);
        FeatureMap f = FeatureMap::tabular(1, 1, 4);
        FscPolicy p(s, f);
        Eigen::VectorXd g = p.log_policy_gradient(0, 0, 2);
        for (int i = 0; i < 4; ++i)
            CHECK(g[i] == doctest::Approx((i == 2 ? 1.0 : 0.0) - 0.25).epsilon(1e-15));
    }
    SUBCASE("norm bound 2 and finite-difference match on random parameters") {
        InternalStateSpec s = InternalStateSpec::sliding_block(1, 2, 2);
        FeatureMap f = FeatureMap::tabular(2, s.size(), 2);
        RngStream rng(99);
        Eigen::VectorXd theta(f.dim());
        for (int i = 0; i < f.dim(); ++i) theta[i] = 4.0 * rng.uniform() - 2.0;
        FscPolicy p(s, f, theta);
        const double eps = 1e-5;
        for (int y = 0; y < 2; ++y)
            for (int z = 0; z < s.size(); ++z)
                for (int u = 0; u < 2; ++u) {
                    Eigen::VectorXd g = p.log_policy_gradient(y, z, u);
                    CHECK(g.norm() <= 2.0 + 1e-12);
                    for (int i = 0; i < f.dim(); i += 5) {
                        Eigen::VectorXd tp = theta, tm = theta;
                        tp[i] += eps;
                        tm[i] -= eps;
                        double lp = std::log(p.with_theta(tp).action_prob(y, z, u));
                        double lm = std::log(p.with_theta(tm).action_prob(y, z, u));
                        CHECK(g[i] == doctest::Approx((lp - lm) / (2 * eps)).epsilon(1e-6));
                    }
                }
    }
}

TEST_CASE("policy table snapshot and tabular_theta_for invert each other") {
    InternalStateSpec s = InternalStateSpec::sliding_block(1, 2, 2);
    FeatureMap f = FeatureMap::tabular(2, s.size(), 2);
    RngStream rng(5);
    Eigen::VectorXd theta(f.dim());
    for (int i = 0; i < f.dim(); ++i) theta[i] = rng.uniform() - 0.5;
    FscPolicy p(s, f, theta);
    PolicyTable t = p.table();
    Eigen::VectorXd theta2 = tabular_theta_for(t, f);
    FscPolicy p2(s, f, theta2);
    for (int y = 0; y < 2; ++y)
        for (int z = 0; z < s.size(); ++z)
            for (int u = 0; u < 2; ++u)
                CHECK(p2.action_prob(y, z, u) == doctest::Approx(p.action_prob(y, z, u)).epsilon(1e-12));
}

TEST_CASE("deterministic policy tables") {
    PolicyTable t = PolicyTable::deterministic(2, 1, 3, {2, 0});
    CHECK(t.prob(0, 0, 2) == doctest::Approx(1.0));
    CHECK(t.prob(0, 0, 0) == doctest::Approx(0.0));
    CHECK(t.prob(1, 0, 0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(PolicyTable::deterministic(2, 1, 3, {3, 0}), ValidationError);
}

TEST_CASE("policy JSON round trip preserves behaviour; schema is strict") {
    InternalStateSpec s = InternalStateSpec::sliding_block(1, 2, 2);
    FeatureMap f = FeatureMap::tabular(2, s.size(), 2);
    RngStream rng(21);
    Eigen::VectorXd theta(f.dim());
    for (int i = 0; i < f.dim(); ++i) theta[i] = rng.uniform() - 0.5;
    FscPolicy p(s, f, theta);
    FscPolicy back = FscPolicy::from_json_text(p.to_json_text());
    CHECK(back.internal().is_sliding_block());
    CHECK(back.internal().block_length() == 1);
    for (int y = 0; y < 2; ++y)
        for (int z = 0; z < s.size(); ++z)
            for (int u = 0; u < 2; ++u)
                CHECK(back.action_prob(y, z, u) == doctest::Approx(p.action_prob(y, z, u)).epsilon(1e-14));

    std::string text = p.to_json_text();
    std::string bad = text;
    bad.insert(bad.find('{') + 1, "\"mystery\": true,");
    CHECK_THROWS_AS(FscPolicy::from_json_text(bad), ParseError);

    // Generic kernels serialize through internal_kernel.
    std::vector<double> kern = {0.25, 0.75, 0.5, 0.5, 1.0, 0.0, 0.0, 1.0};  // nz=2, ny=1, nu=2
    InternalStateSpec g = InternalStateSpec::generic(2, 1, 2, kern);
    FscPolicy gp(g, FeatureMap::tabular(1, 2, 2));
    FscPolicy gback = FscPolicy::from_json_text(gp.to_json_text());
    CHECK_FALSE(gback.internal().is_sliding_block());
    CHECK(gback.internal().kernel(0, 0, 0, 1) == doctest::Approx(0.75));
}
