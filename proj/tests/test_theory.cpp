// Cumulants, characteristic function, PMF inversion, ACF and power variation.

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/distributions/poisson.hpp>
#include <gtest/gtest.h>

#include "trawl/trawl_all.hpp"

using namespace trawl;

namespace {

ModelParams paper_params(double b = 0.396)
{
    return {LevyMeasure({{1, 0.0138}, {-1, 0.0131}}), TrawlSpec(b, Exponential{0.681})};
}

// P(N1 - N2 = y) for independent Poisson(mu_up), Poisson(mu_down), by direct
// convolution of truncated mass functions.
double skellam_oracle(double mu_up, double mu_down, std::int64_t y)
{
    boost::math::poisson_distribution<double> up(mu_up);
    boost::math::poisson_distribution<double> down(mu_down);
    double s = 0.0;
    for (std::int64_t n = std::max<std::int64_t>(0, -y); n < 400; ++n)
    {
        const double term = boost::math::pdf(down, static_cast<double>(n)) * boost::math::pdf(up, static_cast<double>(n + y));
        s += term;
        if (n > 5 * (mu_up + mu_down) + 20 && term < 1e-300)
            break;
    }
    return s;
}

// For +-1 support the law of P_t - P_0 is Skellam with these rates.
std::pair<double, double> skellam_rates(const ModelParams& params, double t)
{
    const double bt = params.b() * t;
    const double inc = params.trawl.increment(t);
    const double up = params.levy(1);
    const double down = params.levy(-1);
    return {bt * up + inc * (up + down), bt * down + inc * (up + down)};
}

ModelParams random_params(std::mt19937_64& rng, int family)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double b = unit(rng);
    TrawlFamily f;
    switch (family)
    {
    case 0:
        f = Exponential{std::exp(-4.0 + 8.0 * unit(rng))};
        break;
    case 1:
        f = SupGamma{std::exp(-4.0 + 8.0 * unit(rng)), 1.0 + 1e-3 + 6.0 * unit(rng)};
        break;
    default:
        if (unit(rng) < 0.2)
            f = SupGig{0.0, std::exp(-3.0 + 5.0 * unit(rng)), -0.01 - 5.0 * unit(rng)};
        else
            f = SupGig{std::exp(-3.0 + 5.0 * unit(rng)), std::exp(-3.0 + 5.0 * unit(rng)), -5.0 + 10.0 * unit(rng)};
    }
    return {LevyMeasure({{1, 0.05 + unit(rng)}, {-1, 0.05 + unit(rng)}, {2, 0.1 * unit(rng)}}), TrawlSpec(b, f)};
}

} // namespace

TEST(Cumulant, PaperVariance)
{
    const auto params = paper_params();
    EXPECT_NEAR(return_cumulant(params, 1.0, 2), (0.396 + 2.0 * params.trawl.increment(1.0)) * 0.0269, 1e-15);
    EXPECT_NEAR(return_cumulant(params, 1.0, 2), 0.034219, 5e-7);
    EXPECT_NEAR(return_cumulant(params, 1.0, 1), 0.396 * 0.0007, 1e-15);
    for (int j = 1; j <= 4; ++j)
        EXPECT_DOUBLE_EQ(return_cumulant(params, 0.0, j), 0.0);
    const ModelParams symmetric{LevyMeasure({{1, 0.2}, {-1, 0.2}}), TrawlSpec(0.3, SupGamma{1.0, 1.5})};
    EXPECT_DOUBLE_EQ(return_cumulant(symmetric, 7.0, 1), 0.0);
}

TEST(CharacteristicFunction, Examples)
{
    const auto params = paper_params();
    EXPECT_EQ(return_cf(params, 3.0, 0.0), std::complex<double>(0.0, 0.0));
    const ModelParams skellam{LevyMeasure({{1, 0.5}, {-1, 0.5}}), TrawlSpec(1.0, Exponential{1.0})};
    const auto v = return_cf(skellam, 1.0, std::numbers::pi);
    EXPECT_NEAR(v.real(), -2.0, 1e-14);
    EXPECT_NEAR(v.imag(), 0.0, 1e-14);
    const ModelParams symmetric{LevyMeasure({{1, 0.2}, {-1, 0.2}, {2, 0.1}, {-2, 0.1}}), TrawlSpec(0.3, Exponential{2.0})};
    for (double theta : {0.3, 1.0, 2.5})
        EXPECT_EQ(return_cf(symmetric, 2.0, theta).imag(), 0.0);
}

TEST(CharacteristicFunction, DerivativesMatchCumulants)
{
    const ModelParams params{LevyMeasure({{1, 0.3}, {-1, 0.2}, {2, 0.1}, {-3, 0.05}}), TrawlSpec(0.4, SupGamma{0.8, 1.7})};
    const double t = 2.0;
    auto f = [&](double th) { return return_cf(params, t, th); };
    // central differences for derivatives 1..4
    auto diff = [&](int j, double h) -> std::complex<double> {
        switch (j)
        {
        case 1:
            return (f(h) - f(-h)) / (2.0 * h);
        case 2:
            return (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        case 3:
            return (f(2 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2 * h)) / (2.0 * h * h * h);
        default:
            return (f(2 * h) - 4.0 * f(h) + 6.0 * f(0.0) - 4.0 * f(-h) + f(-2 * h)) / (h * h * h * h);
        }
    };
    const std::complex<double> i(0.0, 1.0);
    for (int j = 1; j <= 4; ++j)
    {
        const double h = 1e-3;
        const auto richardson = (4.0 * diff(j, h / 2.0) - diff(j, h)) / 3.0;
        const auto expected = std::pow(i, j) * return_cumulant(params, t, j);
        EXPECT_NEAR(std::abs(richardson - expected) / std::abs(expected), 0.0, 1e-4) << "j=" << j;
    }
}

TEST(Pmf, SkellamMatchesConvolutionOracle)
{
    const ModelParams skellam{LevyMeasure({{1, 0.5}, {-1, 0.5}}), TrawlSpec(1.0, Exponential{1.0})};
    const auto pmf = return_pmf(skellam, 1.0);
    EXPECT_NEAR(pmf.at(0), 0.46576, 5e-6);
    EXPECT_NEAR(pmf.at(1), 0.20791, 5e-6);
    EXPECT_NEAR(pmf.at(-1), pmf.at(1), 1e-15);
    double max_err = 0.0;
    for (std::int64_t y = -pmf.max_abs; y <= pmf.max_abs; ++y)
        max_err = std::max(max_err, std::fabs(pmf.at(y) - skellam_oracle(0.5, 0.5, y)));
    EXPECT_LT(max_err, 1e-12);
    EXPECT_LE(pmf.aliasing_bound, 1e-10);
    EXPECT_LE(std::fabs(pmf.sum() - 1.0), pmf.aliasing_bound);
}

TEST(Pmf, SquashedTrawlMatchesOracle)
{
    for (double t : {0.1, 1.0, 60.0, 600.0})
    {
        const auto params = paper_params();
        const auto pmf = return_pmf(params, t);
        const auto [up, down] = skellam_rates(params, t);
        for (std::int64_t y = -pmf.max_abs; y <= pmf.max_abs; ++y)
            EXPECT_NEAR(pmf.at(y), skellam_oracle(up, down, y), 1e-12) << "t=" << t << " y=" << y;
        EXPECT_LE(std::fabs(pmf.sum() - 1.0), pmf.aliasing_bound);
    }
}

TEST(Pmf, PaperTransformLength)
{
    const auto params = paper_params();
    const auto pmf = return_pmf(params, 60.0, 60);
    EXPECT_EQ(pmf.max_abs, 29);
    EXPECT_EQ(pmf.n_points, 60u);
    const auto [up, down] = skellam_rates(params, 60.0);
    for (std::int64_t y = -29; y <= 29; ++y)
        EXPECT_NEAR(pmf.at(y), skellam_oracle(up, down, y), 1e-12);
}

TEST(Pmf, MomentsMatchCumulants)
{
    const ModelParams params{LevyMeasure({{1, 0.3}, {-1, 0.2}, {2, 0.1}, {-3, 0.05}}), TrawlSpec(0.4, SupGamma{0.8, 1.7})};
    for (double t : {0.5, 5.0, 30.0})
    {
        const auto pmf = return_pmf(params, t);
        double mean = 0.0;
        double second = 0.0;
        for (std::int64_t y = -pmf.max_abs; y <= pmf.max_abs; ++y)
        {
            mean += static_cast<double>(y) * pmf.at(y);
            second += static_cast<double>(y * y) * pmf.at(y);
        }
        const double tol = pmf.aliasing_bound + 1e-8;
        EXPECT_NEAR(mean, return_cumulant(params, t, 1), tol);
        EXPECT_NEAR(second - mean * mean, return_cumulant(params, t, 2), tol);
    }
}

TEST(Pmf, EdgeCases)
{
    const auto params = paper_params();
    EXPECT_THROW(return_pmf(params, 1.0, 61), std::invalid_argument);
    const ModelParams one_sided{LevyMeasure({{1, 2.0}}), TrawlSpec(1.0, Exponential{1.0})};
    EXPECT_NEAR(return_pmf(one_sided, 1e-9).at(0), 1.0, 1e-8);
    EXPECT_NEAR(return_pmf(one_sided, 0.0).at(0), 1.0, 1e-15);
    for (const auto& p : return_pmf(params, 10.0).probabilities)
        EXPECT_GE(p, 0.0);
}

TEST(JumpDistribution, Examples)
{
    const auto dist = jump_distribution(paper_params());
    EXPECT_NEAR(dist.at(1), 0.50321, 5e-6);
    EXPECT_NEAR(dist.at(-1), 0.49679, 5e-6);
    const ModelParams levy_only{LevyMeasure({{1, 0.3}, {-2, 0.1}}), TrawlSpec(1.0, Exponential{1.0})};
    const auto pure = jump_distribution(levy_only);
    EXPECT_NEAR(pure.at(1), 0.75, 1e-15);
    EXPECT_NEAR(pure.at(-2), 0.25, 1e-15);
    EXPECT_NEAR(pure.count(2) ? pure.at(2) : 0.0, 0.0, 1e-15);
    const ModelParams symmetric{LevyMeasure({{1, 0.3}, {-1, 0.3}, {2, 0.1}, {-2, 0.1}}), TrawlSpec(0.2, Exponential{1.0})};
    const auto sym = jump_distribution(symmetric);
    EXPECT_NEAR(sym.at(1), 0.375, 1e-15);
    EXPECT_NEAR(sym.at(-2), 0.125, 1e-15);
}

TEST(Acf, PaperFirstLag)
{
    const auto result = acf(paper_params(), 1.0, 5);
    EXPECT_NEAR(result.rho[0], -0.1701, 5e-5);
    EXPECT_NEAR(result.variance, 0.034219, 5e-7);
    const auto pure = acf(paper_params(1.0), 0.7, 20);
    for (double r : pure.rho)
        EXPECT_EQ(r, 0.0);
    EXPECT_LT(std::fabs(acf(paper_params(), 1e-4, 1).rho[0]), 0.01);
    EXPECT_LT(std::fabs(acf(paper_params(), 1e4, 1).rho[0]), 0.01);
}

TEST(Acf, VariogramIdentity)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i)
    {
        const auto params = random_params(rng, i % 3);
        const double delta = std::exp(std::uniform_real_distribution<double>(-3.0, 3.0)(rng));
        const auto result = acf(params, delta, 20);
        auto var = [&](int m) { return return_cumulant(params, m * delta, 2); };
        for (int k = 1; k <= 20; ++k)
        {
            const double reconstructed = 0.5 * var(k + 1) - var(k) + 0.5 * var(k - 1);
            // the reconstruction cancels O(Var) terms, so the tolerance scales with Var
            const double scale = std::max(1.0, var(k + 1));
            EXPECT_NEAR(result.gamma[static_cast<std::size_t>(k - 1)], reconstructed, 1e-12 * scale)
                << to_string(params.trawl.tag()) << " k=" << k;
        }
    }
}

TEST(Acf, NonPositiveForEveryFamily)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 600; ++i)
    {
        const auto params = random_params(rng, i % 3);
        const double delta = std::exp(std::uniform_real_distribution<double>(-5.0, 5.0)(rng));
        const auto result = acf(params, delta, 100);
        for (double r : result.rho)
            ASSERT_LE(r, 0.0) << to_string(params.trawl.tag());
    }
}

TEST(PowerVariation, ExpectationsAndLimits)
{
    const auto params = paper_params();
    EXPECT_NEAR(expected_pv(params, 1.0, 0.0), 1.604 * 0.0269, 1e-15);
    EXPECT_NEAR(expected_pv(params, 1.0, 0.0), 0.043148, 5e-7);
    const ModelParams other{params.levy, TrawlSpec(0.396, SupGig{0.5, 2.0, -0.3})};
    EXPECT_DOUBLE_EQ(expected_pv(params, 17.0, 1.5), expected_pv(other, 17.0, 1.5));
    EXPECT_NEAR(expected_pv(paper_params(1.0), 3.0, 0.0), 3.0 * 0.0269, 1e-15);

    EXPECT_NEAR(expected_rv(params, 3600.0, 3600), 123.19, 5e-3);
    const double limit = (2.0 - 0.396) * 3600.0 * 0.0269;
    EXPECT_NEAR(expected_rv(params, 3600.0, 1000000) / limit, 1.0, 1e-3);
    const auto pure = paper_params(1.0);
    EXPECT_NEAR(expected_rv(pure, 100.0, 50), 100.0 * 0.0269 + 100.0 * 2.0 * 0.0007 * 0.0007, 1e-14);
}

TEST(Cumulant, BrownianScaling)
{
    const auto params = paper_params();
    auto kurtosis = [&](double t) { return return_cumulant(params, t, 4) / std::pow(return_cumulant(params, t, 2), 2); };
    EXPECT_NEAR(kurtosis(1e3) / kurtosis(1e4), 10.0, 0.5);
}
