// Lévy measure, trawl geometry and Bessel K.

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include "trawl/trawl_all.hpp"

using namespace trawl;

namespace {

const LevyMeasure paper_levy({{1, 0.0138}, {-1, 0.0131}});

// Shape functions written out independently of the library.
double oracle_shape(const TrawlFamily& family, double u)
{
    if (const auto* e = std::get_if<Exponential>(&family))
        return std::exp(-e->lambda * u);
    if (const auto* g = std::get_if<SupGamma>(&family))
        return std::pow(1.0 + u / g->alpha, -g->H);
    const auto& f = std::get<SupGig>(family);
    const double r = 1.0 + 2.0 * u / (f.gamma * f.gamma);
    const double x = f.gamma * f.delta;
    return std::pow(r, -f.order / 2.0) * boost::math::cyl_bessel_k(f.order, x * std::sqrt(r)) /
           boost::math::cyl_bessel_k(f.order, x);
}

double oracle_tail(const TrawlFamily& family, double t)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [&](double v) { return oracle_shape(family, t + v); };
    return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
}

} // namespace

// --- Lévy measure ------------------------------------------------------------

TEST(Levy, CumulantsOfPaperBasis)
{
    EXPECT_NEAR(levy_cumulant(paper_levy, 1), 0.0007, 1e-15);
    EXPECT_NEAR(levy_cumulant(paper_levy, 2), 0.0269, 1e-15);
    const LevyMeasure symmetric({{1, 0.3}, {-1, 0.3}, {3, 0.1}, {-3, 0.1}});
    EXPECT_DOUBLE_EQ(levy_cumulant(symmetric, 1), 0.0);
    EXPECT_DOUBLE_EQ(levy_cumulant(symmetric, 3), 0.0);
}

TEST(Levy, AbsoluteMoments)
{
    EXPECT_NEAR(levy_abs_moment(paper_levy, 0), 0.0269, 1e-15);
    EXPECT_NEAR(levy_abs_moment(paper_levy, 2), 0.0269, 1e-15);
    EXPECT_DOUBLE_EQ(levy_abs_moment(LevyMeasure({{2, 0.5}}), 2), 2.0);
    EXPECT_DOUBLE_EQ(paper_levy.total_mass(), levy_abs_moment(paper_levy, 0));
}

TEST(Levy, RejectsBadEntries)
{
    EXPECT_THROW(LevyMeasure({{0, 0.1}}), std::invalid_argument);
    EXPECT_THROW(LevyMeasure({{1, -0.1}}), std::invalid_argument);
    EXPECT_THROW(LevyMeasure({{1, 0.0}}), std::invalid_argument);
    EXPECT_THROW(LevyMeasure(LevyMeasure::Map{}), std::invalid_argument);
}

// --- Bessel K ------------------------------------------------------------------

TEST(Bessel, HalfIntegerClosedForms)
{
    for (double x : {1e-6, 1e-3, 0.1, 1.0, 1.9, 2.0, 2.1, 10.0, 100.0, 600.0})
    {
        const double k_half = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
        const double k_three_halves = k_half * (1.0 + 1.0 / x);
        const double k_five_halves = k_half * (1.0 + 3.0 / x + 3.0 / (x * x));
        EXPECT_NEAR(bessel_k(0.5, x) / k_half, 1.0, 1e-12) << x;
        EXPECT_NEAR(bessel_k(-0.5, x) / k_half, 1.0, 1e-12) << x;
        EXPECT_NEAR(bessel_k(1.5, x) / k_three_halves, 1.0, 1e-12) << x;
        EXPECT_NEAR(bessel_k(2.5, x) / k_five_halves, 1.0, 1e-12) << x;
    }
    EXPECT_NEAR(bessel_k(0.5, 1.0), 0.4610685, 1e-7);
}

TEST(Bessel, ReferenceValues)
{
    EXPECT_NEAR(bessel_k(0.0, 1.0) / 0.42102443824070833334, 1.0, 1e-13);
    EXPECT_NEAR(bessel_k(1.0, 1.0) / 0.60190723019723457474, 1.0, 1e-13);
    EXPECT_NEAR(bessel_k(2.0, 2.0) / 0.25375975456605586, 1.0, 1e-13);
}

TEST(Bessel, AgreesWithBoostOverRange)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> order(-20.0, 20.0);
    std::uniform_real_distribution<double> log_x(std::log(1e-6), std::log(700.0));
    for (int i = 0; i < 2000; ++i)
    {
        const double nu = order(rng);
        const double x = std::exp(log_x(rng));
        const double reference = boost::math::cyl_bessel_k(nu, x);
        if (!std::isfinite(reference) || reference > 1e300)
            continue;
        EXPECT_NEAR(bessel_k(nu, x) / reference, 1.0, 1e-10) << "nu=" << nu << " x=" << x;
    }
}

TEST(Bessel, LogFormCoversExtremes)
{
    EXPECT_NEAR(log_bessel_k(20.0, 1e-6), std::log(boost::math::cyl_bessel_k(20.0, 1e-6)), 1e-9);
    EXPECT_NEAR(log_bessel_k(0.0, 1000.0) + 1000.0, std::log(bessel_k_scaled(0.0, 1000.0)), 1e-12);
    EXPECT_NEAR(log_bessel_k(3.3, 0.7), log_bessel_k(-3.3, 0.7), 1e-14);
}

TEST(Bessel, ErrorsAreSignalled)
{
    EXPECT_THROW(bessel_k(0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(bessel_k(1.0, -1.0), std::invalid_argument);
    EXPECT_THROW(bessel_k(0.0, 800.0), std::underflow_error);
    EXPECT_THROW(bessel_k(20.0, 1e-20), std::overflow_error);
}

// --- trawl geometry ------------------------------------------------------------

TEST(Trawl, ExponentialExamples)
{
    const TrawlSpec spec(0.396, Exponential{0.681});
    EXPECT_DOUBLE_EQ(trawl_d(spec, 0.0), 1.0);
    EXPECT_NEAR(trawl_d(spec, -1.0), 0.396 + 0.604 * std::exp(-0.681), 1e-15);
    EXPECT_NEAR(trawl_d(spec, -1.0), 0.70169, 5e-6);
    EXPECT_NEAR(trawl_leb_a(spec), 0.88693, 5e-6);
    EXPECT_NEAR(trawl_overlap(spec, 1.0), 0.44889, 5e-6);
    EXPECT_DOUBLE_EQ(trawl_overlap(spec, 0.0), trawl_leb_a(spec));
    EXPECT_NEAR(trawl_increment(spec, 1.0), 0.88693 - 0.44889, 1e-5);
    EXPECT_DOUBLE_EQ(trawl_increment(spec, 0.0), 0.0);
    EXPECT_NEAR(trawl_increment(spec, 1e6), trawl_leb_a(spec), 1e-12);
    EXPECT_NEAR(lifetime_quantile(spec, 0.5), std::log(2.0) / 0.681, 1e-12);
    EXPECT_NEAR(lifetime_quantile(spec, 0.5), 1.01784, 5e-6);
    EXPECT_DOUBLE_EQ(lifetime_quantile(spec, 0.0), 0.0);
}

TEST(Trawl, SupGammaExamples)
{
    const TrawlSpec spec(0.0, SupGamma{1.0, 2.0});
    EXPECT_NEAR(trawl_d(spec, -1.0), 0.25, 1e-15);
    EXPECT_NEAR(trawl_leb_a(spec), 1.0, 1e-15);
    EXPECT_NEAR(trawl_overlap(spec, 1.0), 0.5, 1e-15);
    EXPECT_NEAR(lifetime_quantile(spec, 0.5), std::sqrt(2.0) - 1.0, 1e-12);
}

TEST(Trawl, SupGigHalfOrderArea)
{
    const TrawlSpec spec(0.0, SupGig{1.0, 1.0, 0.5});
    EXPECT_NEAR(trawl_leb_a(spec), 1.0, 1e-12);
}

TEST(Trawl, RejectsInvalidInput)
{
    const TrawlSpec spec(0.396, Exponential{0.681});
    EXPECT_THROW(trawl_d(spec, 0.1), std::invalid_argument);
    EXPECT_THROW(lifetime_quantile(spec, 1.0), std::invalid_argument);
    EXPECT_THROW(lifetime_quantile(spec, -0.1), std::invalid_argument);
    EXPECT_THROW(TrawlSpec(0.0, SupGamma{1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(TrawlSpec(0.0, SupGamma{1.0, 0.5}), std::invalid_argument);
    EXPECT_THROW(TrawlSpec(0.0, Exponential{0.0}), std::invalid_argument);
    EXPECT_THROW(TrawlSpec(1.5, Exponential{1.0}), std::invalid_argument);
    EXPECT_THROW(TrawlSpec(0.0, SupGig{0.0, 1.0, 0.5}), std::invalid_argument);
    EXPECT_THROW(TrawlSpec(0.0, SupGig{1.0, 0.0, 0.5}), std::invalid_argument);
}

TEST(Trawl, OverlapMatchesQuadratureForRandomParameters)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 60; ++i)
    {
        TrawlFamily family;
        switch (i % 3)
        {
        case 0:
            family = Exponential{0.05 + 5.0 * unit(rng)};
            break;
        case 1:
            family = SupGamma{0.1 + 5.0 * unit(rng), 1.3 + 4.0 * unit(rng)};
            break;
        default:
            family = SupGig{0.2 + 3.0 * unit(rng), 0.2 + 3.0 * unit(rng), -2.0 + 4.0 * unit(rng)};
        }
        const double b = unit(rng);
        const TrawlSpec spec(b, family);
        for (double t : {0.0, 0.3, 1.0, 4.0, 20.0})
        {
            const double expected = (1.0 - b) * oracle_tail(family, t);
            EXPECT_NEAR(trawl_overlap(spec, t) / expected, 1.0, 1e-6) << "case " << i << " t=" << t;
            EXPECT_NEAR(trawl_d(spec, -t), b + (1.0 - b) * oracle_shape(family, t), 1e-12);
        }
    }
}

TEST(Trawl, TabulatedMatchesPiecewiseQuadrature)
{
    const Tabulated table{{0.0, 0.5, 1.0, 3.0, 10.0}, {1.0, 0.6, 0.5, 0.2, 0.0}};
    const TrawlSpec spec(0.25, table);
    auto shape = [&](double u) {
        for (std::size_t i = 1; i < table.lags.size(); ++i)
            if (u <= table.lags[i])
            {
                const double w = (u - table.lags[i - 1]) / (table.lags[i] - table.lags[i - 1]);
                return table.values[i - 1] + w * (table.values[i] - table.values[i - 1]);
            }
        return 0.0;
    };
    for (double t : {0.0, 0.25, 0.5, 2.0, 7.0, 12.0})
    {
        double expected = 0.0;
        double lo = t;
        for (double knot : table.lags)
            if (knot > lo)
            {
                expected += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(shape, lo, knot);
                lo = knot;
            }
        EXPECT_NEAR(trawl_overlap(spec, t), 0.75 * expected, 1e-13) << t;
    }
    EXPECT_NEAR(trawl_d(spec, -0.25), 0.25 + 0.75 * 0.8, 1e-15);
    EXPECT_DOUBLE_EQ(trawl_d(spec, -50.0), 0.25);
}

TEST(Trawl, OverlapIsConvexAndDecreasing)
{
    const std::vector<TrawlSpec> specs = {
        TrawlSpec(0.396, Exponential{0.681}),
        TrawlSpec(0.1, SupGamma{0.7, 1.05}),
        TrawlSpec(0.5, SupGig{0.3, 2.0, -0.7}),
        TrawlSpec(0.5, SupGig{0.0, 1.5, -0.4}),
    };
    for (const auto& spec : specs)
    {
        double previous_value = spec.overlap(0.0);
        double previous_slope = -std::numeric_limits<double>::infinity();
        for (double t = 0.05; t < 200.0; t *= 1.3)
        {
            const double t_prev = t / 1.3;
            const double value = spec.overlap(t);
            const double slope = (value - spec.overlap(t_prev)) / (t - t_prev);
            EXPECT_LE(value, previous_value);
            EXPECT_GE(slope, previous_slope - 1e-12);
            previous_value = value;
            previous_slope = slope;
        }
    }
}

TEST(Trawl, QuantileInvertsShape)
{
    const std::vector<TrawlSpec> specs = {
        TrawlSpec(0.396, Exponential{0.681}),
        TrawlSpec(0.0, SupGamma{1.0, 2.0}),
        TrawlSpec(0.2, SupGig{1.2, 0.8, 0.3}),
        TrawlSpec(0.2, SupGig{0.0, 0.8, -1.3}),
        TrawlSpec(0.3, Tabulated{{0.0, 1.0, 5.0}, {1.0, 0.4, 0.0}}),
    };
    for (const auto& spec : specs)
        for (double p = 0.0; p <= 0.999; p += 0.0185)
        {
            const double t = spec.lifetime_quantile(p);
            EXPECT_NEAR(spec.shape(-t), 1.0 - p, 1e-9) << "p=" << p;
        }
}

TEST(Trawl, SupGigDegeneratesToSupGamma)
{
    for (auto [alpha, H] : {std::pair{1.0, 2.0}, std::pair{0.3, 1.4}, std::pair{5.0, 3.5}})
    {
        const TrawlSpec gamma_spec(0.2, SupGamma{alpha, H});
        const TrawlSpec gig_spec(0.2, SupGig{std::sqrt(2.0 * alpha), 1e-4, H});
        for (double s : {0.0, -0.01, -0.5, -1.0, -10.0, -100.0})
            EXPECT_NEAR(trawl_d(gig_spec, s), trawl_d(gamma_spec, s), 1e-3) << s;
    }
}

TEST(Trawl, SupGigContinuousAtZeroGamma)
{
    const TrawlSpec limit(0.3, SupGig{0.0, 1.3, -1.7});
    const TrawlSpec near(0.3, SupGig{1e-7, 1.3, -1.7});
    EXPECT_NEAR(limit.leb_a() / near.leb_a(), 1.0, 1e-6);
    for (double t : {0.0, 0.2, 1.0, 10.0, 1000.0})
    {
        EXPECT_NEAR(limit.d(-t), near.d(-t), 1e-7) << t;
        EXPECT_NEAR(limit.overlap(t) / near.overlap(t), 1.0, 1e-6) << t;
    }
    // area of the inverse-gamma mixture: 2 a / delta^2
    EXPECT_NEAR(limit.leb_a(), 0.7 * 2.0 * 1.7 / (1.3 * 1.3), 1e-12);
}

TEST(Model, JsonRoundTrip)
{
    for (const TrawlSpec& spec : {TrawlSpec(0.396, Exponential{0.681}), TrawlSpec(0.1, SupGamma{2.0, 1.5}),
                                  TrawlSpec(0.2, SupGig{0.0, 1.0, -0.5}),
                                  TrawlSpec(0.4, Tabulated{{0.0, 1.0}, {1.0, 0.5}})})
    {
        const ModelParams params{paper_levy, spec};
        const auto back = model_from_json(to_json(params));
        EXPECT_EQ(back.levy, params.levy);
        EXPECT_DOUBLE_EQ(back.b(), params.b());
        EXPECT_EQ(back.trawl.tag(), spec.tag());
        EXPECT_DOUBLE_EQ(back.trawl.overlap(0.7), spec.overlap(0.7));
    }
    const auto j = nlohmann::json::parse(
        R"({"b":0.396,"trawl":{"family":"exponential","params":{"lambda":0.681}},"levy":{"1":0.0138,"-1":0.0131}})");
    const auto params = model_from_json(j);
    EXPECT_DOUBLE_EQ(params.levy(1), 0.0138);
    EXPECT_DOUBLE_EQ(params.levy(-1), 0.0131);
    EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"b":0.3})")), DataError);
}
