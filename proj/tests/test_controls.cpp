#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "skate/controls.hpp"

using namespace skate;

namespace {
const SleighParams kParams{2.0, 1.0, 3.0, 0.0};
constexpr double kHalfPi = std::numbers::pi / 2;
}  // namespace

TEST(CircularControl, Values) {
    const auto c0 = circular_eval({1, 1}, 0.0);
    EXPECT_EQ(c0.a, 1.0);
    EXPECT_EQ(c0.b, 0.0);
    EXPECT_EQ(c0.da, 0.0);
    EXPECT_EQ(c0.db, 1.0);
    const auto c1 = circular_eval({1, 1}, kHalfPi);
    EXPECT_NEAR(c1.a, 0.0, 1e-16);
    EXPECT_NEAR(c1.b, 1.0, 1e-16);
    EXPECT_NEAR(c1.da, -1.0, 1e-16);
    EXPECT_NEAR(c1.db, 0.0, 1e-16);
}

TEST(CircularControl, StaysOnCircleAndDerivativesAgree) {
    oracle::Rng rng;
    for (int k = 0; k < 200; ++k) {
        const CircularControl c{rng.uniform(-2, 2), rng.uniform(-4, 4)};
        const double t = rng.uniform(-5, 5), h = 1e-5;
        const auto s = circular_eval(c, t);
        ASSERT_NEAR(s.a * s.a + s.b * s.b, c.A * c.A, 1e-13);
        const auto sp = circular_eval(c, t + h), sm = circular_eval(c, t - h);
        const double scale = std::abs(c.A * c.omega * c.omega * c.omega);
        ASSERT_NEAR((sp.a - sm.a) / (2 * h), s.da, 1e-9 + scale * h * h);
        ASSERT_NEAR((sp.b - sm.b) / (2 * h), s.db, 1e-9 + scale * h * h);
    }
}

TEST(GeneralControl, Values) {
    auto [a0, da0] = general_eval_a({1, 0, 0, 3}, 0.7);
    EXPECT_EQ(a0, 1.0);
    EXPECT_EQ(da0, 0.0);
    auto [a1, da1] = general_eval_a({0, 1, 0, 1}, 0.0);
    EXPECT_EQ(a1, 0.0);
    EXPECT_EQ(da1, 1.0);
    auto [a2, da2] = general_eval_a({1, 1, 1, 1}, 0.0);
    EXPECT_EQ(a2, 2.0);
    EXPECT_EQ(da2, 1.0);
}

TEST(Bdot, SingularOnBladeAxis) {
    const SleighState s{1, 1, 0, 0, 0, 0.3};
    EXPECT_THROW(bdot(s, 0.3, 0.0, 0.5, 1.0, kParams), SingularControl);
}

TEST(Bdot, RestStateStaysAtRest) {
    const SleighState s{0, 0, 0, 0, 0, 0.0};
    EXPECT_EQ(bdot(s, 0.0, 1.0, 0.0, 1.0, kParams), 0.0);
}

TEST(Bdot, EnforcesArcCondition) {
    oracle::Rng rng;
    int checked = 0;
    for (int k = 0; k < 1000; ++k) {
        const double r = rng.uniform(0.3, 3);
        const SleighState s{rng.uniform(-3, 3), rng.uniform(-3, 3), 0, 0, 0, {}};
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2), da = rng.uniform(-2, 2);
        double db;
        try {
            db = bdot(s, b, a, da, r, kParams);
        } catch (const SingularControl&) {
            continue;
        }
        const auto w = oracle::quasivelocities(s, {a, b, da, db}, kParams);
        const double scale = std::max({std::abs(w.xi1), std::abs(w.xi2), 1.0});
        ASSERT_NEAR(w.xi2 - r * w.xi1, 0.0, 1e-12 * scale * (1 + std::abs(db)));
        ++checked;
    }
    EXPECT_GT(checked, 900);
}

TEST(Adot, EnforcesArcCondition) {
    oracle::Rng rng;
    for (int k = 0; k < 1000; ++k) {
        const double r = rng.uniform(0.3, 3);
        const SleighState s{rng.uniform(-3, 3), rng.uniform(-3, 3), 0, 0, 0, {}};
        const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), db = rng.uniform(-2, 2);
        double da;
        try {
            da = adot(s, a, b, db, r, kParams);
        } catch (const SingularControl&) {
            continue;
        }
        const auto w = oracle::quasivelocities(s, {a, b, da, db}, kParams);
        const double scale = std::max({std::abs(w.xi1), std::abs(w.xi2), 1.0});
        ASSERT_NEAR(w.xi2 - r * w.xi1, 0.0, 1e-12 * scale * (1 + std::abs(da)));
    }
}

TEST(Regularity, Condition) {
    EXPECT_TRUE(regularity_check(GeneralControl{2, 1, 1, 1}));
    EXPECT_FALSE(regularity_check(GeneralControl{1, 1, 1, 1}));
    EXPECT_FALSE(regularity_check(GeneralControl{0.658, -0.675, 0.428, 1.016}));
}

TEST(Regularity, DependsOnlyOnOscillationAmplitude) {
    oracle::Rng rng;
    for (int k = 0; k < 300; ++k) {
        const double a1 = rng.uniform(-2, 2), a2 = rng.uniform(-2, 2), a3 = rng.uniform(-2, 2);
        const double phi = rng.uniform(0, 6.3);
        const double b2 = a2 * std::cos(phi) - a3 * std::sin(phi), b3 = a2 * std::sin(phi) + a3 * std::cos(phi);
        const double gap = a1 * a1 - a2 * a2 - a3 * a3;
        if (std::abs(gap) < 1e-9) continue;
        ASSERT_EQ(regularity_check(GeneralControl{a1, a2, a3, 1}), regularity_check(GeneralControl{a1, b2, b3, 1}));
    }
}

TEST(Regularity, RegularSetKeepsMassOffAxis) {
    const GeneralControl c{1.5, 0.8, -0.9, 2.0};
    ASSERT_TRUE(regularity_check(c));
    for (int k = 0; k < 2000; ++k) EXPECT_GT(general_eval_a(c, 0.01 * k).first, 0.0);
}

TEST(ControlLaw, FamilyRoundTrip) {
    for (auto f : {ControlFamily::circular, ControlFamily::circular_arc, ControlFamily::general}) {
        EXPECT_EQ(family_from_string(to_string(f)), f);
    }
    EXPECT_THROW(family_from_string("spline"), ParseError);
    const double v[] = {0.1, 0.2, 0.3, 0.4};
    const auto law = ControlLaw::from_vector(ControlFamily::general, v, 1.0, kParams);
    EXPECT_EQ(law.to_vector(), std::vector<double>(v, v + 4));
    EXPECT_THROW(ControlLaw::from_vector(ControlFamily::circular, v, 1.0, kParams), ParseError);
}

TEST(ControlLaw, ArcLockedSampleSatisfiesArcCondition) {
    const double v[] = {0.9, -2.3};
    const auto law = ControlLaw::from_vector(ControlFamily::circular_arc, v, 1.2, kParams);
    EXPECT_EQ(law.default_coordinate().value(), 0.9);
    const SleighState s{2, 3, 0, 0, -1.2, 0.9};
    const auto c = law.sample(0.4, s);
    const auto w = oracle::quasivelocities(s, c, kParams);
    EXPECT_NEAR(w.xi2, 1.2 * w.xi1, 1e-12);
}
