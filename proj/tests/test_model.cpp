#include <doctest.h>

#include <cmath>

#include "pomdpnac/errors.hpp"
#include "pomdpnac/model.hpp"

using namespace pomdpnac;

TEST_CASE("two-state noisy benchmark matches its frozen table") {
    PomdpModel m = two_state_noisy();
    CHECK(m.states() == 2);
    CHECK(m.actions() == 2);
    CHECK(m.observations() == 2);
    CHECK(m.gamma() == doctest::Approx(0.9));
    CHECK(m.r_max() == doctest::Approx(1.0));
    // action 0 keeps the state w.p. 0.9; action 1 flips it w.p. 0.9
    CHECK(m.p(0, 0, 0) == doctest::Approx(0.9));
    CHECK(m.p(0, 0, 1) == doctest::Approx(0.1));
    CHECK(m.p(1, 0, 1) == doctest::Approx(0.9));
    CHECK(m.p(0, 1, 1) == doctest::Approx(0.9));
    CHECK(m.p(1, 1, 0) == doctest::Approx(0.9));
    // channel reports the true state w.p. 0.8
    CHECK(m.phi(0, 0) == doctest::Approx(0.8));
    CHECK(m.phi(0, 1) == doctest::Approx(0.2));
    CHECK(m.phi(1, 1) == doctest::Approx(0.8));
    // unit reward in state 1 under either action
    CHECK(m.r(0, 0) == doctest::Approx(0.0));
    CHECK(m.r(1, 0) == doctest::Approx(1.0));
    CHECK(m.r(1, 1) == doctest::Approx(1.0));
    CHECK_FALSE(m.fully_observed());
}

TEST_CASE("model validation rejects broken inputs") {
    auto valid_p = std::vector<double>{1.0, 0.0, 0.0, 1.0};  // 2 states, 1 action
    auto valid_phi = std::vector<double>{1.0, 0.0, 0.0, 1.0};
    auto valid_r = std::vector<double>{0.0, 1.0};

    SUBCASE("row sums off by more than 1e-9") {
        auto p = valid_p;
        p[0] = 0.9;  // row sums to 0.9
        CHECK_THROWS_AS(PomdpModel(2, 1, 2, p, valid_phi, valid_r, 0.9), ValidationError);
    }
    SUBCASE("negative probabilities") {
        auto phi = std::vector<double>{1.5, -0.5, 0.0, 1.0};
        CHECK_THROWS_AS(PomdpModel(2, 1, 2, valid_p, phi, valid_r, 0.9), ValidationError);
    }
    SUBCASE("gamma outside (0,1)") {
        CHECK_THROWS_AS(PomdpModel(2, 1, 2, valid_p, valid_phi, valid_r, 1.0), ValidationError);
        CHECK_THROWS_AS(PomdpModel(2, 1, 2, valid_p, valid_phi, valid_r, 0.0), ValidationError);
    }
    SUBCASE("negative rewards") {
        CHECK_THROWS_AS(PomdpModel(2, 1, 2, valid_p, valid_phi, std::vector<double>{-0.1, 1.0}, 0.9),
                        ValidationError);
    }
    SUBCASE("reward above r_max") {
        CHECK_THROWS_AS(PomdpModel(2, 1, 2, valid_p, valid_phi, std::vector<double>{0.0, 2.0}, 0.9, 1.0),
                        ValidationError);
    }
    SUBCASE("reward equal to r_max is allowed") {
        CHECK_NOTHROW(PomdpModel(2, 1, 2, valid_p, valid_phi, std::vector<double>{0.0, 1.0}, 0.9, 1.0));
    }
    SUBCASE("wrong tensor sizes") {
        CHECK_THROWS_AS(PomdpModel(2, 1, 2, std::vector<double>{1.0, 0.0}, valid_phi, valid_r, 0.9),
                        DimensionMismatch);
    }
    SUBCASE("near-1 row sums are renormalized exactly") {
        auto p = valid_p;
        p[0] = 1.0 + 5e-10;
        PomdpModel m(2, 1, 2, p, valid_phi, valid_r, 0.9);
        CHECK(m.p(0, 0, 0) + m.p(0, 0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("model JSON round trip preserves every field") {
    PomdpModel m = two_state_noisy();
    PomdpModel back = PomdpModel::from_json_text(m.to_json_text());
    CHECK(back.states() == m.states());
    CHECK(back.actions() == m.actions());
    CHECK(back.observations() == m.observations());
    CHECK(back.gamma() == doctest::Approx(m.gamma()).epsilon(1e-15));
    CHECK(back.r_max() == doctest::Approx(m.r_max()).epsilon(1e-15));
    CHECK(back.name() == m.name());
    for (int x = 0; x < 2; ++x)
        for (int u = 0; u < 2; ++u)
            for (int x2 = 0; x2 < 2; ++x2) CHECK(back.p(x, u, x2) == doctest::Approx(m.p(x, u, x2)).epsilon(1e-15));
}

TEST_CASE("model JSON schema is strict") {
    PomdpModel m = two_state_noisy();
    std::string text = m.to_json_text();

    SUBCASE("unknown keys are rejected") {
        std::string bad = text;
        bad.insert(bad.find('{') + 1, "\"extra_key\": 1,");
        CHECK_THROWS_AS(PomdpModel::from_json_text(bad), ParseError);
    }
    SUBCASE("non-JSON input is rejected") {
        CHECK_THROWS_AS(PomdpModel::from_json_text("not json"), ParseError);
    }
    SUBCASE("missing required key is rejected") {
        CHECK_THROWS_AS(PomdpModel::from_json_text("{\"states\": 2}"), ParseError);
    }
}

TEST_CASE("random models are valid and reproducible") {
    PomdpModel a = random_pomdp(4, 3, 2, 17);
    PomdpModel b = random_pomdp(4, 3, 2, 17);
    PomdpModel c = random_pomdp(4, 3, 2, 18);
    CHECK(a.transition() == b.transition());
    CHECK(a.channel() == b.channel());
    CHECK(a.reward() == b.reward());
    CHECK(a.transition() != c.transition());
    for (int x = 0; x < 4; ++x) {
        double s = 0.0;
        for (int y = 0; y < 2; ++y) s += a.phi(x, y);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        for (int u = 0; u < 3; ++u) {
            double t = 0.0;
            for (int x2 = 0; x2 < 4; ++x2) t += a.p(x, u, x2);
            CHECK(t == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("fully observed models have the identity channel") {
    PomdpModel m = fully_observed(2, 1, {1.0, 0.0, 0.0, 1.0}, {0.0, 1.0}, 0.9);
    CHECK(m.fully_observed());
    CHECK(m.observations() == 2);
    CHECK(m.phi(0, 0) == doctest::Approx(1.0));
    CHECK(m.phi(1, 0) == doctest::Approx(0.0));
}
