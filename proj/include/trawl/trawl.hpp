#pragma once

// Squashed trawl d(s) = b + (1 - b) * shape(s), s <= 0, and the geometry the
// price process needs from it. All areas are in seconds (heights are
// dimensionless). Write u = -s >= 0 for the lag; shape(-u) is the survival
// function of a fleeting move's lifetime.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "roots.hpp"
#include "special.hpp"

namespace trawl {

struct Exponential
{
    double lambda = 1.0; ///< decay rate, 1/seconds
};

struct SupGamma
{
    double alpha = 1.0; ///< seconds
    double H = 2.0;     ///< tail index, > 1
};

/// gamma = 0 is the inverse-gamma mixing limit and needs order < 0.
struct SupGig
{
    double gamma = 1.0;
    double delta = 1.0;
    double order = 0.5;
};

/// Piecewise-linear shape through (lag, value) knots; zero past the last knot.
struct Tabulated
{
    std::vector<double> lags;   ///< u = -s, strictly increasing, lags[0] == 0
    std::vector<double> values; ///< shape(-lag), values[0] == 1, non-increasing
};

using TrawlFamily = std::variant<Exponential, SupGamma, SupGig, Tabulated>;

enum class FamilyTag
{
    exponential,
    sup_gamma,
    sup_gig,
    tabulated
};

inline std::string to_string(FamilyTag tag)
{
    switch (tag)
    {
    case FamilyTag::exponential: return "exponential";
    case FamilyTag::sup_gamma: return "sup-gamma";
    case FamilyTag::sup_gig: return "sup-gig";
    case FamilyTag::tabulated: return "tabulated";
    }
    return "unknown";
}

inline FamilyTag family_from_string(const std::string& name)
{
    if (name == "exponential" || name == "exp")
        return FamilyTag::exponential;
    if (name == "sup-gamma")
        return FamilyTag::sup_gamma;
    if (name == "sup-gig")
        return FamilyTag::sup_gig;
    if (name == "tabulated")
        return FamilyTag::tabulated;
    throw std::invalid_argument("unknown trawl family '" + name + "'");
}

class TrawlSpec
{
  public:
    TrawlSpec() : TrawlSpec(0.0, Exponential{}) {}

    TrawlSpec(double b, TrawlFamily family) : b_(b), family_(std::move(family))
    {
        detail::require(std::isfinite(b_) && b_ >= 0.0 && b_ <= 1.0,
                        "TrawlSpec: permanence b must lie in [0, 1]");
        std::visit([this](auto& f) { validate(f); }, family_);
        area_ = std::visit([this](const auto& f) { return unit_area(f); }, family_);
    }

    double permanence() const noexcept { return b_; }
    const TrawlFamily& family() const noexcept { return family_; }
    FamilyTag tag() const noexcept { return static_cast<FamilyTag>(family_.index()); }

    /// shape(-u): probability a fleeting move is still alive after u seconds.
    double survival(double u) const
    {
        detail::require(u >= 0.0, "TrawlSpec::survival: lag must be >= 0");
        return std::visit([&](const auto& f) { return survival(f, u); }, family_);
    }

    /// Non-squashed trawl function d~(s), s <= 0.
    double shape(double s) const
    {
        detail::require(s <= 0.0, "TrawlSpec: trawl functions are defined for s <= 0 only");
        return survival(-s);
    }

    /// d(s) = b + (1 - b) d~(s), s <= 0.
    double d(double s) const { return b_ + (1.0 - b_) * shape(s); }

    /// leb(A) = (1 - b) * integral of d~.
    double leb_a() const { return (1.0 - b_) * area_; }

    /// leb(A_t intersect A) = integral_{-inf}^{-t} (d(s) - b) ds.
    double overlap(double t) const { return (1.0 - b_) * unit_tail(t); }

    /// leb(A_t \ A) = leb(A) - leb(A_t intersect A).
    double increment(double t) const { return (1.0 - b_) * unit_head(t); }

    /// Integral of d~ over lags [0, inf); the b-free part of leb(A).
    double unit_area() const noexcept { return area_; }

    /// Integral of d~ over lags [t, inf).
    double unit_tail(double t) const
    {
        detail::require(t >= 0.0, "TrawlSpec: time lag must be >= 0");
        if (t == 0.0)
            return area_;
        return std::visit([&](const auto& f) { return unit_tail(f, t); }, family_);
    }

    /// Integral of d~ over lags [0, t].
    double unit_head(double t) const
    {
        detail::require(t >= 0.0, "TrawlSpec: time lag must be >= 0");
        if (t == 0.0)
            return 0.0;
        return std::visit([&](const auto& f) { return unit_head(f, t); }, family_);
    }

    /// unit_tail(t + h) - 2 unit_tail(t) + unit_tail(t - h) for 0 <= h <= t,
    /// evaluated without cancellation where a closed form exists.
    /// Non-negative because the tail integral is convex.
    double unit_tail_second_difference(double t, double h) const
    {
        detail::require(h >= 0.0 && t >= h, "TrawlSpec: second difference needs 0 <= h <= t");
        if (h == 0.0)
            return 0.0;
        return std::visit([&](const auto& f) { return tail_second_difference(f, t, h); }, family_);
    }

    /// t solving d~(-t) = 1 - p: quantile of the fleeting lifetime.
    double lifetime_quantile(double p) const
    {
        detail::require(p >= 0.0 && p < 1.0, "lifetime_quantile: p must lie in [0, 1)");
        if (p == 0.0)
            return 0.0;
        return std::visit([&](const auto& f) { return lifetime_quantile(f, p); }, family_);
    }

    /// Quantile of the residual lifetime of a move alive at time 0, whose
    /// survival function is unit_tail(t) / unit_area().
    double residual_quantile(double p) const
    {
        detail::require(p >= 0.0 && p < 1.0, "residual_quantile: p must lie in [0, 1)");
        if (p == 0.0)
            return 0.0;
        return std::visit([&](const auto& f) { return residual_quantile(f, p); }, family_);
    }

  private:
    // Exponential ---------------------------------------------------------
    static void validate(const Exponential& f)
    {
        detail::require(std::isfinite(f.lambda) && f.lambda > 0.0, "exponential trawl: lambda must be > 0");
    }
    static double unit_area(const Exponential& f) { return 1.0 / f.lambda; }
    static double survival(const Exponential& f, double u) { return std::exp(-f.lambda * u); }
    static double unit_tail(const Exponential& f, double t) { return std::exp(-f.lambda * t) / f.lambda; }
    static double unit_head(const Exponential& f, double t) { return -std::expm1(-f.lambda * t) / f.lambda; }
    static double tail_second_difference(const Exponential& f, double t, double h)
    {
        // e^{-lambda (t - h)} (1 - e^{-lambda h})^2 / lambda, without overflow for large lambda h
        const double q = -std::expm1(-f.lambda * h);
        return std::exp(-f.lambda * (t - h)) * q * q / f.lambda;
    }
    static double lifetime_quantile(const Exponential& f, double p) { return -std::log1p(-p) / f.lambda; }
    static double residual_quantile(const Exponential& f, double p) { return -std::log1p(-p) / f.lambda; }

    // Superposition gamma --------------------------------------------------
    static void validate(const SupGamma& f)
    {
        detail::require(std::isfinite(f.alpha) && f.alpha > 0.0, "sup-gamma trawl: alpha must be > 0");
        detail::require(std::isfinite(f.H) && f.H > 1.0, "sup-gamma trawl: H must be > 1 (leb(A) is infinite otherwise)");
    }
    static double unit_area(const SupGamma& f) { return f.alpha / (f.H - 1.0); }
    static double survival(const SupGamma& f, double u) { return std::exp(-f.H * std::log1p(u / f.alpha)); }
    static double unit_tail(const SupGamma& f, double t)
    {
        return f.alpha / (f.H - 1.0) * std::exp((1.0 - f.H) * std::log1p(t / f.alpha));
    }
    static double unit_head(const SupGamma& f, double t)
    {
        return -f.alpha * std::expm1((1.0 - f.H) * std::log1p(t / f.alpha)) / (f.H - 1.0);
    }
    static double tail_second_difference(const SupGamma& f, double t, double h)
    {
        // tail(t +- h) = tail(t) * (1 +- r)^p with r = h / (alpha + t), p = 1 - H.
        const double p = 1.0 - f.H;
        const double r = h / (f.alpha + t);
        double g = 0.0;
        if (r < 0.1)
        {
            // (1+r)^p + (1-r)^p - 2 = 2 * sum_{m even >= 2} C(p, m) r^m, all terms >= 0 for p < 0.
            double coeff = 1.0;
            double rm = 1.0;
            for (int m = 1; m < 400; ++m)
            {
                coeff *= (p - m + 1) / m;
                rm *= r;
                if (m % 2 == 0)
                {
                    const double term = 2.0 * coeff * rm;
                    g += term;
                    if (term <= 1e-17 * g)
                        break;
                }
            }
        }
        else
        {
            g = std::expm1(p * std::log1p(r)) + std::expm1(p * std::log1p(-r));
        }
        return unit_tail(f, t) * g;
    }
    static double lifetime_quantile(const SupGamma& f, double p)
    {
        return f.alpha * std::expm1(-std::log1p(-p) / f.H);
    }
    static double residual_quantile(const SupGamma& f, double p)
    {
        return f.alpha * std::expm1(-std::log1p(-p) / (f.H - 1.0));
    }

    // Superposition GIG ----------------------------------------------------
    void validate(SupGig& f)
    {
        detail::require(std::isfinite(f.gamma) && f.gamma >= 0.0, "sup-gig trawl: gamma must be >= 0");
        detail::require(std::isfinite(f.delta) && f.delta > 0.0, "sup-gig trawl: delta must be > 0");
        detail::require(std::isfinite(f.order), "sup-gig trawl: nu must be finite");
        if (f.gamma == 0.0)
        {
            detail::require(f.order < 0.0, "sup-gig trawl: gamma = 0 (inverse-gamma limit) needs nu < 0");
            gig_.log_k_order = 0.0;
            gig_.log_k_order_m1 = 0.0;
        }
        else
        {
            const double gd = f.gamma * f.delta;
            gig_.log_k_order = log_bessel_k(f.order, gd);
            gig_.log_k_order_m1 = log_bessel_k(f.order - 1.0, gd);
        }
    }
    double unit_area(const SupGig& f) const
    {
        if (f.gamma == 0.0)
            return -2.0 * f.order / (f.delta * f.delta);
        return f.gamma / f.delta * std::exp(gig_.log_k_order_m1 - gig_.log_k_order);
    }
    double log_survival(const SupGig& f, double u) const
    {
        if (u == 0.0)
            return 0.0;
        if (f.gamma == 0.0)
        {
            const double a = -f.order;
            const double z = f.delta * std::sqrt(2.0 * u);
            return std::numbers::ln2 - std::lgamma(a) + a * std::log(0.5 * z) + log_bessel_k(a, z);
        }
        const double L = std::log1p(2.0 * u / (f.gamma * f.gamma));
        const double z = f.gamma * f.delta * std::exp(0.5 * L);
        return -0.5 * f.order * L + log_bessel_k(f.order, z) - gig_.log_k_order;
    }
    // log(tail(t) / area)
    double log_tail_ratio(const SupGig& f, double t) const
    {
        if (t == 0.0)
            return 0.0;
        if (f.gamma == 0.0)
        {
            const double a = -f.order;
            const double z = f.delta * std::sqrt(2.0 * t);
            return std::numbers::ln2 - std::lgamma(a + 1.0) + (a + 1.0) * std::log(0.5 * z) +
                   log_bessel_k(a + 1.0, z);
        }
        const double L = std::log1p(2.0 * t / (f.gamma * f.gamma));
        const double z = f.gamma * f.delta * std::exp(0.5 * L);
        return 0.5 * (1.0 - f.order) * L + log_bessel_k(f.order - 1.0, z) - gig_.log_k_order_m1;
    }
    double survival(const SupGig& f, double u) const { return std::min(1.0, std::exp(log_survival(f, u))); }
    double unit_tail(const SupGig& f, double t) const
    {
        return area_ * std::min(1.0, std::exp(log_tail_ratio(f, t)));
    }
    double unit_head(const SupGig& f, double t) const
    {
        return -area_ * std::expm1(std::min(0.0, log_tail_ratio(f, t)));
    }
    double tail_second_difference(const SupGig& f, double t, double h) const
    {
        return unit_tail(f, t + h) - 2.0 * unit_tail(f, t) + unit_tail(f, t - h);
    }
    double lifetime_quantile(const SupGig& f, double p) const
    {
        return solve_decreasing([&](double u) { return survival(f, u); }, 1.0 - p, area_);
    }
    double residual_quantile(const SupGig& f, double p) const
    {
        return solve_decreasing([&](double t) { return unit_tail(f, t) / area_; }, 1.0 - p, area_);
    }

    // Tabulated -------------------------------------------------------------
    void validate(Tabulated& f)
    {
        detail::require(f.lags.size() == f.values.size() && f.lags.size() >= 2,
                        "tabulated trawl: need at least two (lag, value) knots");
        detail::require(f.lags.front() == 0.0 && f.values.front() == 1.0,
                        "tabulated trawl: first knot must be (0, 1)");
        for (std::size_t i = 1; i < f.lags.size(); ++i)
        {
            detail::require(std::isfinite(f.lags[i]) && f.lags[i] > f.lags[i - 1],
                            "tabulated trawl: lags must be strictly increasing");
            detail::require(f.values[i] >= 0.0 && f.values[i] <= f.values[i - 1],
                            "tabulated trawl: values must be non-increasing and >= 0");
        }
        head_knots_.assign(f.lags.size(), 0.0);
        for (std::size_t i = 1; i < f.lags.size(); ++i)
            head_knots_[i] = head_knots_[i - 1] +
                             0.5 * (f.values[i] + f.values[i - 1]) * (f.lags[i] - f.lags[i - 1]);
    }
    double unit_area(const Tabulated&) const { return head_knots_.back(); }
    static std::size_t segment(const Tabulated& f, double u)
    {
        const auto it = std::upper_bound(f.lags.begin(), f.lags.end(), u);
        return static_cast<std::size_t>(it - f.lags.begin()) - 1;
    }
    static double survival(const Tabulated& f, double u)
    {
        if (u > f.lags.back())
            return 0.0;
        const std::size_t i = segment(f, u);
        if (i + 1 >= f.lags.size())
            return f.values.back();
        const double w = (u - f.lags[i]) / (f.lags[i + 1] - f.lags[i]);
        return f.values[i] + w * (f.values[i + 1] - f.values[i]);
    }
    double unit_head(const Tabulated& f, double t) const
    {
        if (t >= f.lags.back())
            return head_knots_.back();
        const std::size_t i = segment(f, t);
        return head_knots_[i] + 0.5 * (f.values[i] + survival(f, t)) * (t - f.lags[i]);
    }
    double unit_tail(const Tabulated& f, double t) const
    {
        if (t >= f.lags.back())
            return 0.0;
        const std::size_t i = segment(f, t);
        const double rest = head_knots_.back() - head_knots_[i + 1];
        return rest + 0.5 * (survival(f, t) + f.values[i + 1]) * (f.lags[i + 1] - t);
    }
    double tail_second_difference(const Tabulated& f, double t, double h) const
    {
        return unit_tail(f, t + h) - 2.0 * unit_tail(f, t) + unit_tail(f, t - h);
    }
    double lifetime_quantile(const Tabulated& f, double p) const
    {
        return solve_decreasing([&](double u) { return survival(f, u); }, 1.0 - p, f.lags[1]);
    }
    double residual_quantile(const Tabulated& f, double p) const
    {
        return solve_decreasing([&](double t) { return unit_tail(f, t) / area_; }, 1.0 - p, f.lags[1]);
    }

    struct GigCache
    {
        double log_k_order = 0.0;
        double log_k_order_m1 = 0.0;
    };

    double b_;
    TrawlFamily family_;
    double area_ = 0.0;
    GigCache gig_;
    std::vector<double> head_knots_;
};

inline double trawl_d(const TrawlSpec& spec, double s) { return spec.d(s); }
inline double trawl_leb_a(const TrawlSpec& spec) { return spec.leb_a(); }
inline double trawl_overlap(const TrawlSpec& spec, double t) { return spec.overlap(t); }
inline double trawl_increment(const TrawlSpec& spec, double t) { return spec.increment(t); }
inline double lifetime_quantile(const TrawlSpec& spec, double p) { return spec.lifetime_quantile(p); }

} // namespace trawl
