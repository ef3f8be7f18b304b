#include <gtest/gtest.h>

#include <cmath>

#include "rwre/environment.hpp"

using namespace rwre;

TEST(TransitionVector, Validate) {
    EXPECT_TRUE(validate({{0.25, 0.25, 0.25, 0.25}}, 0.2).passed());
    const auto degenerate = validate({{0.5, 0.5, 0.0, 0.0}}, 0.0);
    EXPECT_TRUE(degenerate.valid);
    EXPECT_FALSE(degenerate.passed());
    const auto heavy = validate({{0.3, 0.3, 0.3, 0.3}}, 0.0);
    EXPECT_FALSE(heavy.passed());
    EXPECT_NEAR(heavy.sum_deviation, 0.2, 1e-12);
    EXPECT_FALSE(validate({{1.1, -0.1, 0.0, 0.0}}, 0.0).valid);
    EXPECT_FALSE(validate({{0.25, 0.25, 0.25, 0.25}}, 0.25).passed());
}

TEST(IIDEnvironment, FixedLawReturnsVector) {
    IIDEnvironment env(9, FixedLaw{symmetric_vector()});
    EXPECT_EQ(env.site({5, -7}), symmetric_vector());
}

TEST(IIDEnvironment, SiteLookupIsPure) {
    IIDEnvironment env(42, DirichletLaw{});
    for (std::int64_t x = -20; x <= 20; ++x) {
        for (std::int64_t y = -3; y <= 3; ++y) {
            const auto a = env.site({x, y});
            const auto b = env.site({x, y});
            EXPECT_EQ(a, b);
        }
    }
    IIDEnvironment other(43, DirichletLaw{});
    EXPECT_NE(env.site({0, 0}), other.site({0, 0}));
}

TEST(IIDEnvironment, DirichletSitesAreElliptic) {
    IIDEnvironment env(7, DirichletLaw{});
    for (std::int64_t i = 0; i < 20000; ++i) {
        const auto tv = env.site({i, -i / 3});
        EXPECT_TRUE(tv.elliptic());
        EXPECT_NEAR(tv.sum(), 1.0, 1e-12);
    }
}

TEST(IIDEnvironment, UniformEllipticBoundAndMean) {
    const UniformEllipticLaw law{0.05, {}};
    IIDEnvironment env(11, law);
    double mean = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto tv = env.site({i % 317, i / 317});
        ASSERT_GT(tv.min_entry(), 0.05);
        mean += tv.east();
    }
    mean /= n;
    EXPECT_NEAR(mean, 0.25, 0.01);

    // Oracle: the law sampled directly from one stream, without site keying.
    CounterRng rng(12345);
    double direct = 0.0;
    for (int i = 0; i < n; ++i) direct += sample_law(rng, law).east();
    EXPECT_NEAR(direct / n, 0.25, 0.01);
}

TEST(IIDEnvironment, NeighbouringSitesUncorrelated) {
    IIDEnvironment env(5, DirichletLaw{});
    const int n = 100000;
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int i = 0; i < n; ++i) {
        const LatticePoint x{2 * (i % 400), i / 400};
        const double a = env.site(x).east();
        const double b = env.site(x + kEast).east();
        sa += a, sb += b, saa += a * a, sbb += b * b, sab += a * b;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    EXPECT_NEAR(corr, 0.0, 0.02);
}

TEST(IIDEnvironment, GammaSamplerMatchesDirichletMeans) {
    // Dirichlet(a) has mean a_i / sum(a); checks the non-unit shape path.
    const DirichletLaw law{{0.5, 2.0, 3.0, 4.5}};
    IIDEnvironment env(3, law);
    std::array<double, 4> mean{};
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        const auto tv = env.site({i, 0});
        for (int k = 0; k < 4; ++k) mean[k] += tv.p[k] / n;
    }
    EXPECT_NEAR(mean[0], 0.05, 0.005);
    EXPECT_NEAR(mean[1], 0.2, 0.005);
    EXPECT_NEAR(mean[2], 0.3, 0.005);
    EXPECT_NEAR(mean[3], 0.45, 0.005);
}

TEST(SiteLaw, RejectsBadParameters) {
    EXPECT_THROW(IIDEnvironment(1, DirichletLaw{{1, 0, 1, 1}}), std::invalid_argument);
    EXPECT_THROW(IIDEnvironment(1, UniformEllipticLaw{0.3, {}}), std::invalid_argument);
    EXPECT_THROW(IIDEnvironment(1, FixedLaw{{{0.3, 0.3, 0.3, 0.3}}}), std::invalid_argument);
    EXPECT_NO_THROW(IIDEnvironment(1, FixedLaw{deterministic(0)}));
}
