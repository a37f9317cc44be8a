#pragma once

// Modified Bessel function of the second kind K_v(x) for real order v and
// x > 0. Temme's series for x < 2, Steed's continued fraction CF2 otherwise,
// then forward recurrence in the order (stable for K). Every routine here
// works on a mantissa/binary-exponent pair so that huge orders at tiny
// arguments do not overflow before the caller decides what to do.

#include <array>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "error.hpp"

namespace trawl {
namespace detail {

// Taylor coefficients of 1/Gamma(1+z) about z = 0.
inline constexpr std::array<double, 30> rgamma1p_coeffs = {
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
    1.4123806553180317816e-18,
    -2.2987456844353702066e-19,
    1.7144063219273374334e-20,
};

struct TemmeGammas
{
    double gam1;  // (1/G(1-mu) - 1/G(1+mu)) / (2 mu)
    double gam2;  // (1/G(1-mu) + 1/G(1+mu)) / 2
    double gampl; // 1/G(1+mu)
    double gammi; // 1/G(1-mu)
};

// Valid for |mu| <= 1/2; the even/odd split avoids the 0/0 at mu = 0.
inline TemmeGammas temme_gammas(double mu)
{
    const double mu2 = mu * mu;
    double even = 0.0;
    double odd = 0.0;
    double power = 1.0;
    for (std::size_t k = 0; k + 1 < rgamma1p_coeffs.size(); k += 2)
    {
        even += rgamma1p_coeffs[k] * power;
        odd += rgamma1p_coeffs[k + 1] * power;
        power *= mu2;
    }
    TemmeGammas g;
    g.gam2 = even;
    g.gam1 = -odd;
    g.gampl = even + mu * odd;
    g.gammi = even - mu * odd;
    return g;
}

/// K_v(x) represented as mantissa * 2^exponent * exp(-x).
struct ScaledBesselK
{
    double mantissa;
    long exponent;
};

inline ScaledBesselK bessel_k_parts(double order, double x)
{
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::invalid_argument("bessel_k: argument must be positive and finite");
    if (!std::isfinite(order))
        throw std::invalid_argument("bessel_k: order must be finite");

    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr int max_iter = 100000;
    const double pi = std::numbers::pi;

    const double nu = std::fabs(order);
    const long nl = static_cast<long>(nu + 0.5);
    const double mu = nu - static_cast<double>(nl);
    const double mu2 = mu * mu;
    const double xi2 = 2.0 / x;

    double rkmu = 0.0; // K_mu(x) e^x
    double rk1 = 0.0;  // K_{mu+1}(x) e^x

    if (x < 2.0)
    {
        const double x2 = 0.5 * x;
        const double pimu = pi * mu;
        const double fact = std::fabs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
        double d = -std::log(x2);
        double e = mu * d;
        const double fact2 = std::fabs(e) < eps ? 1.0 : std::sinh(e) / e;
        const TemmeGammas g = temme_gammas(mu);
        double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
        double sum = ff;
        e = std::exp(e);
        double p = 0.5 * e / g.gampl;
        double q = 0.5 / (e * g.gammi);
        double c = 1.0;
        d = x2 * x2;
        double sum1 = p;
        int i = 1;
        for (; i <= max_iter; ++i)
        {
            const double di = i;
            ff = (di * ff + p + q) / (di * di - mu2);
            c *= d / di;
            p /= di - mu;
            q /= di + mu;
            const double del = c * ff;
            sum += del;
            sum1 += c * (p - di * ff);
            if (std::fabs(del) < std::fabs(sum) * eps)
                break;
        }
        if (i > max_iter)
            throw NumericalError("bessel_k: series failed to converge");
        const double ex = std::exp(x);
        rkmu = sum * ex;
        rk1 = sum1 * xi2 * ex;
    }
    else
    {
        double b = 2.0 * (1.0 + x);
        double d = 1.0 / b;
        double h = d;
        double delh = d;
        double q1 = 0.0;
        double q2 = 1.0;
        const double a1 = 0.25 - mu2;
        double q = a1;
        double c = a1;
        double a = -a1;
        double s = 1.0 + q * delh;
        int i = 2;
        for (; i <= max_iter; ++i)
        {
            a -= 2.0 * (i - 1);
            c = -a * c / i;
            const double qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            const double dels = q * delh;
            s += dels;
            if (std::fabs(dels / s) < eps)
                break;
        }
        if (i > max_iter)
            throw NumericalError("bessel_k: continued fraction failed to converge");
        h *= a1;
        rkmu = std::sqrt(pi / (2.0 * x)) / s;
        rk1 = rkmu * (mu + x + 0.5 - h) / x;
    }

    long exponent = 0;
    for (long i = 1; i <= nl; ++i)
    {
        const double next = (mu + static_cast<double>(i)) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = next;
        if (std::fabs(rk1) > 0x1p600)
        {
            rkmu = std::ldexp(rkmu, -600);
            rk1 = std::ldexp(rk1, -600);
            exponent += 600;
        }
    }
    // Re-normalize the mantissa so callers can combine parts safely.
    int e2 = 0;
    const double m = std::frexp(rkmu, &e2);
    return {m, exponent + e2};
}

} // namespace detail

/// Natural logarithm of K_v(x). Never overflows for x in (0, inf).
inline double log_bessel_k(double order, double x)
{
    const auto parts = detail::bessel_k_parts(order, x);
    return std::log(parts.mantissa) + static_cast<double>(parts.exponent) * std::numbers::ln2 - x;
}

/// e^x K_v(x).
inline double bessel_k_scaled(double order, double x)
{
    const auto parts = detail::bessel_k_parts(order, x);
    if (parts.exponent > DBL_MAX_EXP)
        throw std::overflow_error("bessel_k_scaled: result overflows");
    return std::ldexp(parts.mantissa, static_cast<int>(parts.exponent));
}

/// Modified Bessel function of the second kind, K_v(x) = K_{-v}(x).
inline double bessel_k(double order, double x)
{
    const auto parts = detail::bessel_k_parts(order, x);
    const double log_value =
        std::log(parts.mantissa) + static_cast<double>(parts.exponent) * std::numbers::ln2 - x;
    if (log_value > std::log(DBL_MAX))
        throw std::overflow_error("bessel_k: result overflows");
    if (log_value < std::log(DBL_MIN))
        throw std::underflow_error("bessel_k: result underflows");
    if (x > 700.0)
        return std::exp(log_value);
    // exp(-x) is applied to the unscaled mantissa so the result keeps full
    // relative precision whenever no binary rescaling took place.
    return std::ldexp(parts.mantissa * std::exp(-x), static_cast<int>(parts.exponent));
}

} // namespace trawl
