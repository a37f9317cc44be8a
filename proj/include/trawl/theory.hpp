#pragma once

// Closed-form distributional quantities of the integer-valued price process
// P_t = V_0 + L(A_t) + L(B_t): cumulants and characteristic function of
// returns, the return PMF by Fourier inversion, the instantaneous jumping
// distribution, return autocovariances and power-variation expectations.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include "fft.hpp"
#include "model.hpp"

namespace trawl {

/// kappa_j(P_t - P_0): b t kappa_j(L_1) for odd j, (b t + 2 leb(A_t \ A)) kappa_j(L_1) for even j.
inline double return_cumulant(const ModelParams& params, double t, int j)
{
    detail::require(t >= 0.0, "return_cumulant: t must be >= 0");
    detail::require(j >= 1, "return_cumulant: order must be >= 1");
    const double kappa = params.levy.cumulant(j);
    const double bt = params.b() * t;
    if (j % 2 == 1)
        return bt * kappa;
    return (bt + 2.0 * params.trawl.increment(t)) * kappa;
}

/// log E exp(i theta L_1) = sum nu(y) (e^{i theta y} - 1). Sizes y and -y
/// are paired so a symmetric measure gives an exactly real value.
inline std::complex<double> levy_log_cf(const LevyMeasure& levy, double theta)
{
    double re = 0.0;
    double im = 0.0;
    for (const auto& [y, rate] : levy.entries())
    {
        if (y < 0 && levy.entries().count(-y) > 0)
            continue;
        const double pos = y > 0 ? rate : 0.0;
        const double neg = y > 0 ? levy(-y) : rate;
        const double a = theta * static_cast<double>(y < 0 ? -y : y);
        const double s = std::sin(0.5 * a);
        re -= 2.0 * (pos + neg) * s * s;
        im += (pos - neg) * std::sin(a);
    }
    return {re, im};
}

/// Log characteristic function of P_t - P_0 at theta.
inline std::complex<double> return_cf(const ModelParams& params, double t, double theta)
{
    detail::require(t >= 0.0, "return_cf: t must be >= 0");
    const auto c = levy_log_cf(params.levy, theta);
    const double inc = params.trawl.increment(t);
    // C(theta) + C(-theta) is real: twice the real part.
    return params.b() * t * c + std::complex<double>(2.0 * inc * c.real(), 0.0);
}

struct PmfResult
{
    std::int64_t max_abs = 0;          ///< support is [-max_abs, max_abs]
    std::vector<double> probabilities; ///< probabilities[y + max_abs]
    double aliasing_bound = 0.0;       ///< bound on |1 - sum| and on each entry's error
    std::size_t n_points = 0;

    double at(std::int64_t y) const
    {
        if (y < -max_abs || y > max_abs)
            return 0.0;
        return probabilities[static_cast<std::size_t>(y + max_abs)];
    }
    double sum() const
    {
        double s = 0.0;
        for (double p : probabilities)
            s += p;
        return s;
    }
};

namespace detail {

// P(K >= k) for K ~ Poisson(mean), summed from k upward.
inline double poisson_upper_tail(double mean, std::int64_t k)
{
    if (k <= 0)
        return 1.0;
    if (mean <= 0.0)
        return 0.0;
    if (static_cast<double>(k) <= mean)
        return 1.0; // not a useful bound here; callers only need it small
    double log_term = -mean + static_cast<double>(k) * std::log(mean) - std::lgamma(static_cast<double>(k) + 1.0);
    double term = std::exp(log_term);
    double sum = term;
    for (std::int64_t i = k + 1; i < k + 100000; ++i)
    {
        term *= mean / static_cast<double>(i);
        sum += term;
        if (term < 1e-20 * sum || term == 0.0)
            break;
    }
    return std::min(1.0, sum);
}

struct JumpCountBound
{
    double rate;           // mean number of jumps feeding P_t - P_0
    std::int64_t max_size; // largest |y| with nu(y) > 0
};

inline JumpCountBound jump_count_bound(const ModelParams& params, double t)
{
    std::int64_t m = 1;
    for (const auto& [y, rate] : params.levy.entries())
        if (rate > 0.0)
            m = std::max<std::int64_t>(m, y < 0 ? -y : y);
    const double lambda = params.levy.total_mass() * (params.b() * t + 2.0 * params.trawl.increment(t));
    return {lambda, m};
}

// P(|P_t - P_0| >= half): |P_t - P_0| <= max_size * K with K Poisson.
inline double outside_mass_bound(const JumpCountBound& bound, std::int64_t half)
{
    const std::int64_t k = (half + bound.max_size - 1) / bound.max_size;
    return poisson_upper_tail(bound.rate, k);
}

} // namespace detail

/// Smallest even N whose Poisson bound on the mass outside [-N/2+1, N/2-1]
/// is below tolerance.
inline std::size_t auto_pmf_points(const ModelParams& params, double t, double tolerance = 1e-10)
{
    const auto bound = detail::jump_count_bound(params, t);
    std::int64_t k = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(bound.rate)) + 1);
    while (detail::poisson_upper_tail(bound.rate, k) >= tolerance)
        ++k;
    // Need ceil((N/2) / M) >= k, i.e. N/2 >= M (k - 1) + 1.
    const std::int64_t half = bound.max_size * (k - 1) + 1;
    return static_cast<std::size_t>(2 * std::max<std::int64_t>(half, 1));
}

/// PMF of P_t - P_0 on y in [-(N/2 - 1), N/2 - 1] from one length-N DFT of the
/// characteristic function sampled at theta_k = 2 pi k / N. The result is the
/// exact PMF of the return wrapped modulo N; aliasing_bound bounds the mass
/// that wrapping can move plus a floating-point allowance. Negative entries
/// from roundoff are clamped to zero; nothing is renormalized.
inline PmfResult return_pmf(const ModelParams& params, double t, std::size_t n_points)
{
    detail::require(t >= 0.0, "return_pmf: t must be >= 0");
    detail::require(n_points >= 2 && n_points % 2 == 0, "return_pmf: n_points must be even and >= 2");

    const std::size_t n = n_points;
    std::vector<std::complex<double>> cf(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        cf[k] = std::exp(return_cf(params, t, theta));
    }
    const auto spectrum = detail::forward_dft(std::move(cf));

    PmfResult result;
    result.n_points = n;
    result.max_abs = static_cast<std::int64_t>(n / 2) - 1;
    result.probabilities.resize(static_cast<std::size_t>(2 * result.max_abs + 1));
    for (std::int64_t y = -result.max_abs; y <= result.max_abs; ++y)
    {
        const auto idx = static_cast<std::size_t>((y % static_cast<std::int64_t>(n) + static_cast<std::int64_t>(n)) %
                                                  static_cast<std::int64_t>(n));
        const double p = spectrum[idx].real() / static_cast<double>(n);
        result.probabilities[static_cast<std::size_t>(y + result.max_abs)] = std::max(0.0, p);
    }

    const auto bound = detail::jump_count_bound(params, t);
    const double roundoff = 16.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
    result.aliasing_bound = detail::outside_mass_bound(bound, static_cast<std::int64_t>(n / 2)) + roundoff;
    return result;
}

/// return_pmf with the length chosen by auto_pmf_points.
inline PmfResult return_pmf(const ModelParams& params, double t)
{
    return return_pmf(params, t, auto_pmf_points(params, t));
}

/// Conditional law of a jump's size given that the price moves:
/// (nu(y) + nu(-y)(1 - b)) / ((2 - b) ||nu||).
inline std::map<std::int64_t, double> jump_distribution(const ModelParams& params)
{
    const double b = params.b();
    const double denom = (2.0 - b) * params.levy.total_mass();
    detail::require(denom > 0.0, "jump_distribution: degenerate Levy measure");
    std::map<std::int64_t, double> out;
    for (const auto& [y, rate] : params.levy.entries())
    {
        out[y];
        out[-y];
    }
    for (auto& [y, prob] : out)
        prob = (params.levy(y) + params.levy(-y) * (1.0 - b)) / denom;
    return out;
}

struct AcfResult
{
    double delta = 0.0;
    double variance = 0.0;     ///< Var(P_delta - P_0)
    std::vector<double> gamma; ///< gamma[k-1], k = 1..k_max
    std::vector<double> rho;
};

/// Autocovariances and autocorrelations of returns sampled every delta seconds:
/// gamma_k = kappa_2 * (inc((k+1)delta) - 2 inc(k delta) + inc((k-1)delta)).
inline AcfResult acf(const ModelParams& params, double delta, int k_max)
{
    detail::require(delta > 0.0 && std::isfinite(delta), "acf: delta must be > 0");
    detail::require(k_max >= 1, "acf: k_max must be >= 1");
    const double kappa2 = params.levy.cumulant(2);
    const double one_minus_b = 1.0 - params.b();

    AcfResult out;
    out.delta = delta;
    out.variance = return_cumulant(params, delta, 2);
    out.gamma.resize(static_cast<std::size_t>(k_max));
    out.rho.resize(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k)
    {
        // inc = leb(A) - overlap, so its second difference is minus that of the tail.
        const double second = params.trawl.unit_tail_second_difference(k * delta, delta);
        const double g = -kappa2 * one_minus_b * second;
        out.gamma[static_cast<std::size_t>(k - 1)] = g;
        out.rho[static_cast<std::size_t>(k - 1)] = g / out.variance;
    }
    return out;
}

/// E {P}_t^[r] = (2 - b) t sum |y|^r nu(y); no dependence on the trawl shape.
inline double expected_pv(const ModelParams& params, double t, double r)
{
    detail::require(t >= 0.0, "expected_pv: t must be >= 0");
    detail::require(r >= 0.0, "expected_pv: r must be >= 0");
    return (2.0 - params.b()) * t * params.levy.abs_moment(r);
}

/// E RV^(n) over [0, T] with n equally spaced returns.
inline double expected_rv(const ModelParams& params, double horizon, std::int64_t n)
{
    detail::require(horizon > 0.0, "expected_rv: T must be > 0");
    detail::require(n >= 1, "expected_rv: n must be >= 1");
    const double b = params.b();
    const double dn = horizon / static_cast<double>(n);
    const double k1 = params.levy.cumulant(1);
    const double k2 = params.levy.cumulant(2);
    return (b + 2.0 * params.trawl.increment(dn) / dn) * horizon * k2 + b * b * horizon * dn * k1 * k1;
}

} // namespace trawl
