#include <gtest/gtest.h>

#include <cmath>

#include "rwre/lattice.hpp"
#include "rwre/random.hpp"

using namespace rwre;

TEST(Lattice, ProjectCoordinateDirections) {
    EXPECT_EQ(project({0, 0}, Direction::e1()), 0.0);
    EXPECT_EQ(project({3, -2}, Direction::e1()), 3.0);
    EXPECT_EQ(perp_project({0, 0}, Direction::e1()), 0.0);
    EXPECT_EQ(perp_project({3, 4}, Direction::e1()), 4.0);
    EXPECT_EQ(project({3, 4}, Direction::e2()), 4.0);
    EXPECT_EQ(perp_project({3, 4}, Direction::e2()), -3.0);
}

TEST(Lattice, ProjectGeneralDirection) {
    const auto d = Direction::from_vector(0.6, 0.8);
    EXPECT_NEAR(project({3, 4}, d), 5.0, 1e-12);
    EXPECT_NEAR(perp_project({3, 4}, d), 0.0, 1e-12);
    EXPECT_NEAR(d.perp1(), -0.8, 1e-15);
    EXPECT_NEAR(d.perp2(), 0.6, 1e-15);
}

TEST(Lattice, FromVectorNormalizesAndRecognizesAxes) {
    EXPECT_EQ(Direction::from_vector(2.0, 0.0).axis(), Direction::Axis::E1);
    EXPECT_EQ(Direction::from_vector(0.0, 5.0).axis(), Direction::Axis::E2);
    EXPECT_THROW(Direction::from_vector(0.0, 0.0), std::invalid_argument);
}

TEST(Lattice, DirectionInvariantsHoldForRandomVectors) {
    CounterRng rng(17);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform() * 2 - 1;
        const double b = rng.uniform() * 2 - 1;
        if (a == 0.0 && b == 0.0) continue;
        const auto d = Direction::from_vector(a, b);
        EXPECT_NEAR(std::hypot(d.ell1(), d.ell2()), 1.0, 1e-12);
        EXPECT_NEAR(d.ell1() * d.perp1() + d.ell2() * d.perp2(), 0.0, 1e-12);
        // counter-clockwise orientation
        EXPECT_GT(d.ell1() * d.perp2() - d.ell2() * d.perp1(), 0.0);
    }
}

TEST(Lattice, CheckStopExamples) {
    const auto e1 = Direction::e1();
    auto lower = StopSpec::slab(Threshold{0.0, true}, std::nullopt, 100);
    EXPECT_EQ(check_stop({-1, 0}, 3, lower, e1), StopVerdict::LowerCrossed);
    auto upper = StopSpec::slab(std::nullopt, Threshold{5.0, false}, 100);
    EXPECT_EQ(check_stop({5, 2}, 3, upper, e1), StopVerdict::UpperCrossed);
    auto both = StopSpec::slab(Threshold{-3.0, true}, Threshold{5.0, false}, 10);
    EXPECT_EQ(check_stop({0, 0}, 10, both, e1), StopVerdict::Censored);
    EXPECT_EQ(check_stop({0, 0}, 9, both, e1), StopVerdict::Continue);
}

TEST(Lattice, ComparatorsAreExact) {
    const auto e1 = Direction::e1();
    auto strict = StopSpec::slab(Threshold{0.0, true}, Threshold{3.0, true}, 100);
    EXPECT_EQ(check_stop({0, 0}, 0, strict, e1), StopVerdict::Continue);
    EXPECT_EQ(check_stop({3, 0}, 0, strict, e1), StopVerdict::Continue);
    auto loose = StopSpec::slab(Threshold{0.0, false}, Threshold{3.0, false}, 100);
    EXPECT_EQ(check_stop({0, 0}, 0, loose, e1), StopVerdict::LowerCrossed);
    EXPECT_EQ(check_stop({3, 0}, 0, loose, e1), StopVerdict::UpperCrossed);
}

TEST(Lattice, CheckStopPriorityOrder) {
    const auto e1 = Direction::e1();
    StopSpec s = StopSpec::slab(Threshold{0.0, false}, Threshold{0.0, false}, 1);
    s.targets.insert({0, 0});
    EXPECT_EQ(check_stop({0, 0}, 1, s, e1), StopVerdict::TargetHit);
    s.targets.clear();
    EXPECT_EQ(check_stop({0, 0}, 1, s, e1), StopVerdict::LowerCrossed);
    s.lower.reset();
    EXPECT_EQ(check_stop({0, 0}, 1, s, e1), StopVerdict::UpperCrossed);
    s.upper = Threshold{1.0, false};
    EXPECT_EQ(check_stop({0, 0}, 1, s, e1), StopVerdict::Censored);
}

TEST(Lattice, StopSpecValidation) {
    StopSpec empty;
    EXPECT_THROW(empty.validate(), std::invalid_argument);
    auto s = StopSpec::slab(Threshold{0.0, true}, std::nullopt, 0);
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.max_steps = 1;
    EXPECT_NO_THROW(s.validate());
}
