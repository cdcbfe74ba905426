#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gridrv/limit_law.hpp"
#include "gridrv/validation.hpp"
#include "oracle.hpp"

using namespace gridrv;
using namespace gridrv::limit_law;

namespace {

// Frozen from oracle.hpp (raw image sums, composite Gauss-Legendre).
constexpr double exit_cdf_005 = 1.5488432862e-5;
constexpr double exit_cdf_025 = 0.091000523846366;
constexpr double exit_cdf_1 = 0.629222570200476;
constexpr double exit_cdf_2 = 0.892022955555891;
constexpr double age_cdf_05 = 0.443211836556816;
constexpr double age_cdf_1 = 0.699454529573875;
constexpr double age_cdf_3 = 0.974512200827892;

const EtaDistribution& eta()
{
    static const EtaDistribution e;
    return e;
}

} // namespace

TEST(OccupationDensity, OracleIsTriangular)
{
    for (double y : {0.0, 0.25, -0.5, 0.9, 0.999}) EXPECT_NEAR(oracle::h(y), 1.0 - std::abs(y), 1e-12) << y;
}

TEST(OccupationDensity, MatchesOracle)
{
    for (double y : {-0.95, -0.6, -0.2, 0.0, 0.1, 0.33, 0.75, 0.999}) {
        EXPECT_NEAR(eval_h(y), oracle::h(y), 1e-8) << y;
    }
}

TEST(OccupationDensity, EndpointsAndOutside)
{
    EXPECT_EQ(eval_h(1.0), 0.0);
    EXPECT_EQ(eval_h(-1.0), 0.0);
    EXPECT_EQ(eval_h(1.5), 0.0);
    EXPECT_NEAR(eval_h(0.0), 1.0, 1e-8);
    EXPECT_EQ(eval_h_closed(0.5), 0.5);
    EXPECT_EQ(eval_h_closed(-3.0), 0.0);
}

TEST(OccupationDensity, NonFiniteIsDomainError)
{
    EXPECT_THROW(eval_h(std::nan("")), DomainError);
    EXPECT_THROW(eval_h(INFINITY), DomainError);
}

TEST(OccupationDensity, SymmetricOnGrid)
{
    const auto y = eta().grid();
    const auto h = eta().density();
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(h[i], h[y.size() - 1 - i], 1e-9);
}

TEST(EtaLaw, ClosedFormVerifiedAgainstQuadrature)
{
    EXPECT_LE(eta().max_closed_form_deviation(), 10.0 * eta().tol());
    EXPECT_TRUE(eta().closed_form_verified());
}

TEST(EtaLaw, MassAndVariance)
{
    EXPECT_NEAR(eta().mass(), 1.0, 1e-7);
    // int y^2 h(y) dy over the oracle density
    const double v = oracle::panels_integral([](double y) { return y * y * oracle::h(y); }, -1.0, 1.0, 4);
    EXPECT_NEAR(v, 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(eta().variance(), v, 1e-9);
}

TEST(EtaLaw, CdfShape)
{
    EXPECT_EQ(eta().cdf(-1.0), 0.0);
    EXPECT_EQ(eta().cdf(1.0), 1.0);
    EXPECT_NEAR(eta().tabulated_cdf(0.0), 0.5, 1e-9);
    const auto f = eta().cdf_values();
    EXPECT_TRUE(std::is_sorted(f.begin(), f.end()));
    for (double y : {-0.7, -0.1, 0.4, 0.95}) EXPECT_NEAR(eta().tabulated_cdf(y), eta_cdf_closed(y), 1e-8);
}

TEST(EtaLaw, SampleMoments)
{
    const std::size_t n = 1000000;
    std::vector<double> x(n);
    Stream s(21);
    for (auto& v : x) v = sample_eta(s, eta());
    EXPECT_TRUE(std::all_of(x.begin(), x.end(), [](double v) { return v >= -1.0 && v <= 1.0; }));
    const auto m = moments(x);
    EXPECT_LE(std::abs(m.mean), 3.0 * m.se_mean);
    EXPECT_LE(std::abs(m.variance - 1.0 / 6.0), 3.0 * m.se_variance);
}

TEST(EtaLaw, TabulatedSamplerAgreesWithClosedForm)
{
    std::vector<double> x(100000);
    Stream s(22);
    for (auto& v : x) v = eta().sample_tabulated(s);
    EXPECT_LT(ks_one_sample(x, eta_cdf_closed), 0.0163); // 99% DKW band at 1e5
}

TEST(ConfinedKernel, SeriesAgree)
{
    for (double z : {0.3, 1.0, 2.5}) {
        for (double y : {-0.9, -0.3, 0.0, 0.6}) {
            EXPECT_NEAR(confined_kernel_images(z, y, 1e-13), confined_kernel_spectral(z, y, 1e-13), 1e-11);
        }
    }
}

TEST(ConfinedKernel, MatchesRawImageSum)
{
    for (double z : {0.05, 0.7, 3.0}) {
        for (double y : {-0.5, 0.0, 0.8}) EXPECT_NEAR(confined_kernel(z, y, 1e-12), oracle::killed_density(z, y), 1e-10);
    }
}

TEST(ConfinedKernel, VanishesAtBoundaryAndIntegratesToSurvival)
{
    EXPECT_EQ(confined_kernel(0.5, 1.0), 0.0);
    EXPECT_EQ(confined_kernel(0.5, -1.0), 0.0);
    for (double z : {0.2, 1.0, 4.0}) {
        const double mass = oracle::panels_integral([&](double y) { return confined_kernel(z, y, 1e-13); }, -1.0, 1.0, 32);
        EXPECT_NEAR(mass, unit_exit_survival(z, 1e-13), 1e-10);
        EXPECT_NEAR(confined_cdf(z, 1.0, 1e-13), mass, 1e-10);
    }
}

TEST(ConfinedKernel, NonPositiveTimeIsDomainError)
{
    EXPECT_THROW(confined_kernel(0.0, 0.1), DomainError);
    EXPECT_THROW(confined_kernel(-1.0, 0.1), DomainError);
}

TEST(ExitTime, FrozenOracleValues)
{
    EXPECT_NEAR(unit_exit_cdf(0.05), exit_cdf_005, 1e-12);
    EXPECT_NEAR(unit_exit_cdf(0.25), exit_cdf_025, 1e-10);
    EXPECT_NEAR(unit_exit_cdf(1.0), exit_cdf_1, 1e-10);
    EXPECT_NEAR(unit_exit_cdf(2.0), exit_cdf_2, 1e-10);
}

TEST(ExitTime, ShapeAndLimits)
{
    EXPECT_EQ(unit_exit_cdf(0.0), 0.0);
    EXPECT_NEAR(unit_exit_cdf(60.0), 1.0, 1e-15);
    double prev = 0.0;
    for (int i = 1; i <= 400; ++i) {
        const double f = unit_exit_cdf(0.01 * i);
        EXPECT_GE(f, prev);
        prev = f;
    }
    EXPECT_THROW(unit_exit_cdf(-0.1), DomainError);
}

TEST(ExitTime, ScaledMeanAndVariance)
{
    for (auto [c, sigma] : {std::pair{1.0, 1.0}, {0.5, 2.0}, {3.0, 0.7}}) {
        const ExitTimeDistribution d(c, sigma);
        const double scale = c * c / (sigma * sigma);
        EXPECT_NEAR(d.mean_from_survival(), scale, 1e-8 * scale);
        const double second = 2.0 * numerics::integrate([&](double z) { return z * d.survival(z); }, 0.0, 60.0 * scale,
                                                        1e-10 * scale * scale).value;
        EXPECT_NEAR(second - scale * scale, 2.0 / 3.0 * scale * scale, 1e-7 * scale * scale);
        EXPECT_NEAR(exit_time_cdf(scale, c, sigma), exit_cdf_1, 1e-10);
    }
}

TEST(ExitTime, SamplerMatchesCdf)
{
    const auto& sampler = UnitExitSampler::instance();
    EXPECT_LT(sampler.max_interpolation_error(), 1e-7);
    std::vector<double> x(200000);
    Stream s(23);
    int up = 0;
    for (auto& v : x) {
        const auto d = sample_exit(s, 1.0, 1.0);
        v = d.time;
        up += d.side > 0;
    }
    EXPECT_LT(ks_one_sample(x, [](double z) { return unit_exit_cdf(z); }), 0.0115);
    EXPECT_NEAR(up / 200000.0, 0.5, 3.0 * 0.5 / std::sqrt(200000.0));
}

TEST(RenewalAge, FrozenOracleValues)
{
    EXPECT_NEAR(renewal_age_cdf(0.5), age_cdf_05, 1e-9);
    EXPECT_NEAR(renewal_age_cdf(1.0), age_cdf_1, 1e-9);
    EXPECT_NEAR(renewal_age_cdf(3.0), age_cdf_3, 1e-9);
}

TEST(RenewalAge, SpectralClosedForm)
{
    // 1 - (32/pi^3) sum_k (-1)^k exp(-lambda_k w) / (2k+1)^3
    auto spectral = [](double w) {
        double s = 0.0;
        for (int k = 0; k < 200; ++k) {
            const double m = 2.0 * k + 1.0;
            s += (k % 2 ? -1.0 : 1.0) * std::exp(-m * m * oracle::pi * oracle::pi / 8.0 * w) / (m * m * m);
        }
        return 1.0 - 32.0 / (oracle::pi * oracle::pi * oracle::pi) * s;
    };
    for (double w : {0.1, 0.5, 1.0, 2.0, 7.0}) EXPECT_NEAR(renewal_age_cdf(w), spectral(w), 1e-9) << w;
}

TEST(RenewalAge, ScalingTableAndSlope)
{
    const RenewalAgeDistribution g(2.0, 0.5);
    const double scale = 16.0;
    EXPECT_EQ(g.cdf(0.0), 0.0);
    EXPECT_EQ(g.cdf(INFINITY), 1.0);
    EXPECT_NEAR(g.cdf(scale), age_cdf_1, 1e-9);
    // G'(0) = sigma^2 / c^2
    EXPECT_NEAR(g.cdf(1e-6) / 1e-6, 1.0 / scale, 1e-8);
    for (double z : {0.3, 5.0, 30.0, 100.0, 400.0}) EXPECT_NEAR(g.tabulated_cdf(z), g.cdf(z), 1e-8);
    EXPECT_THROW(g.cdf(-1.0), DomainError);
}

TEST(RenewalAge, SamplerMatchesCdf)
{
    const RenewalAgeDistribution g(1.0, 1.0);
    std::vector<double> x(100000);
    Stream s(24);
    for (auto& v : x) v = g.sample(s);
    EXPECT_LT(ks_one_sample(x, [&](double z) { return g.tabulated_cdf(z); }), 0.0163);
}

TEST(ConfinedPosition, MatchesKernelLaw)
{
    for (double z : {0.05, 0.8, 3.0}) {
        std::vector<double> x(50000);
        Stream s(25, StreamPurpose::aux, static_cast<std::uint64_t>(z * 100));
        for (auto& v : x) v = sample_confined_position(z, s);
        const double total = confined_cdf(z, 1.0, 1e-13);
        EXPECT_LT(ks_one_sample(x, [&](double y) { return confined_cdf(z, y, 1e-13) / total; }), 0.0231) << z;
    }
}

// Position of the confined motion at a renewal-distributed age is the
// overshoot law.
TEST(ConfinedPosition, RenewalMixtureReproducesEta)
{
    const RenewalAgeDistribution g(1.0, 1.0);
    std::vector<double> x(1000000);
    Stream s(26);
    for (auto& v : x) v = sample_confined_position(g.sample(s), s);
    EXPECT_LT(ks_one_sample(x, eta_cdf_closed), 0.01);
}
