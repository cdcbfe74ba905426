#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gridrv/estimators.hpp"
#include "gridrv/path_sim.hpp"
#include "gridrv/validation.hpp"

using namespace gridrv;

namespace {

InternalPath hand_path(std::vector<PathPoint> pts, double horizon = 1.0)
{
    InternalPath p;
    p.horizon = horizon;
    p.points = std::move(pts);
    return p;
}

} // namespace

TEST(RealizedVariance, ConstantPathIsZero)
{
    const GridScheme g{0.1, 1.0};
    const auto s = extract_observations(hand_path({{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}}), g);
    EXPECT_EQ(realized_variance(s, 1.0), 0.0);
}

TEST(RealizedVariance, AdditiveAtObservationTimes)
{
    const GridScheme g{0.02, 1.0};
    ModelSpec m;
    m.jumps = JumpSpec::list({{0.4, 0.3}});
    Stream st(41);
    const auto s = extract_observations(simulate_exact(m, g, st), g);
    const double split = s.observations.at(s.observations.size() / 2).time;
    double tail = 0.0;
    for (std::size_t j = 1; j < s.observations.size(); ++j) {
        if (s.observations[j].time > split) tail += std::pow(s.observations[j].value - s.observations[j - 1].value, 2);
    }
    EXPECT_NEAR(realized_variance(s, 1.0), realized_variance(s, split) + tail, 1e-12);
}

TEST(QuadraticVariation, ContinuousAndJumpParts)
{
    ModelSpec m;
    m.vol = DeterministicFunction::sinusoidal(1.0, 0.5, 1.5, 0.2);
    const std::vector<JumpRecord> jumps{{1, 0.2, 0.5}, {2, 0.7, -1.0}};
    const auto qv = quadratic_variation(m, jumps, 0.5);
    EXPECT_NEAR(qv.continuous, m.vol.integral_of_square_numeric(0.5), 1e-12);
    EXPECT_DOUBLE_EQ(qv.jump, 0.25);
    EXPECT_DOUBLE_EQ(qv.total, qv.continuous + 0.25);
}

TEST(StandardizedStat, ScalesQuadraticallyWithPriceUnits)
{
    const double lambda = 3.0;
    ModelSpec m, ml;
    m.jumps = JumpSpec::list({{0.3, 0.2}});
    ml.vol = DeterministicFunction::constant(lambda);
    ml.jumps = JumpSpec::list({{0.3, lambda * 0.2}});
    const GridScheme g{0.05, 1.0}, gl{0.05, lambda};
    Stream a(42), b(42);
    const auto p = simulate_exact(m, g, a);
    const auto pl = simulate_exact(ml, gl, b);
    const auto s = extract_observations(p, g);
    const auto sl = extract_observations(pl, gl);
    ASSERT_EQ(s.observations.size(), sl.observations.size());
    const auto z = standardized_stat(s, m, p.jumps, 1.0, g);
    const auto zl = standardized_stat(sl, ml, pl.jumps, 1.0, gl);
    EXPECT_NEAR(zl.rv, lambda * lambda * z.rv, 1e-10);
    EXPECT_NEAR(zl.qv.total, lambda * lambda * z.qv.total, 1e-12);
    EXPECT_NEAR(zl.value, lambda * lambda * z.value, 1e-8);
}

TEST(BoundaryTerm, NonnegativeAndOrderEpsilon)
{
    ModelSpec m;
    for (double eps : {0.04, 0.01}) {
        const GridScheme g{eps, 1.0};
        double mean = 0.0;
        const int n = 500;
        for (int r = 0; r < n; ++r) {
            Stream st(43, StreamPurpose::replication, r);
            const auto s = extract_observations(simulate_exact(m, g, st), g);
            const double b = boundary_term(s, m, 1.0);
            ASSERT_GE(b, 0.0);
            mean += b / n;
        }
        // E[boundary] -> eps * E[age limit] = eps * c^2 * int z dG = eps * 5/6
        EXPECT_LT(mean, 2.0 * eps) << eps;
        EXPECT_GT(mean, 0.4 * eps) << eps;
    }
}

TEST(Equidistant, SingleStepIsSquaredIncrement)
{
    const auto p = hand_path({{0.0, 0.0}, {0.5, 0.2}, {1.0, -0.3}});
    ModelSpec m;
    m.vol = DeterministicFunction::constant(1.0);
    EXPECT_THROW(equidistant_rv(p, m, 4, 1.0), ConfigError);
    const auto r = equidistant_rv(p, m, 2, 1.0);
    EXPECT_NEAR(r.rv, 0.04 + 0.25, 1e-15);
    const auto one = equidistant_rv(hand_path({{0.0, 0.0}, {1.0, 0.7}}), m, 1, 1.0);
    EXPECT_NEAR(one.rv, 0.49, 1e-15);
    EXPECT_NEAR(one.standardized, 0.49 - 1.0, 1e-15);
}

TEST(Equidistant, ConstantPathIsZero)
{
    const auto p = hand_path({{0.0, 1.0}, {0.25, 1.0}, {0.5, 1.0}, {0.75, 1.0}, {1.0, 1.0}});
    ModelSpec m;
    EXPECT_EQ(equidistant_rv(p, m, 4, 1.0).rv, 0.0);
}

TEST(Equidistant, VarianceOfStandardizedErrorIsTwo)
{
    ModelSpec m;
    const GridScheme g{0.5, 1.0};
    const std::size_t n = 500;
    std::vector<double> z;
    for (int r = 0; r < 4000; ++r) {
        Stream st(44, StreamPurpose::replication, r);
        z.push_back(equidistant_rv(simulate_euler_bridge(m, g, 1.0 / n, st), m, n, 1.0).standardized);
    }
    const auto mo = moments(z);
    EXPECT_NEAR(mo.variance, 2.0, 4.0 * mo.se_variance);
}
