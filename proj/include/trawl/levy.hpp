#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "error.hpp"

namespace trawl {

/// Finite-support Levy measure on the non-zero integers: jump size (ticks)
/// to intensity (events per second).
class LevyMeasure
{
  public:
    using Map = std::map<std::int64_t, double>;

    LevyMeasure() = default;

    explicit LevyMeasure(Map entries) : entries_(std::move(entries))
    {
        total_ = 0.0;
        for (const auto& [y, rate] : entries_)
        {
            detail::require(y != 0, "LevyMeasure: jump size 0 is not allowed");
            detail::require(std::isfinite(rate) && rate >= 0.0,
                            "LevyMeasure: intensity for size " + std::to_string(y) +
                                " must be finite and non-negative");
            total_ += rate;
        }
        detail::require(total_ > 0.0, "LevyMeasure: total mass must be positive");
    }

    const Map& entries() const noexcept { return entries_; }

    /// ||nu||, the total jump intensity.
    double total_mass() const noexcept { return total_; }

    /// nu(y); zero off the support.
    double operator()(std::int64_t y) const
    {
        const auto it = entries_.find(y);
        return it == entries_.end() ? 0.0 : it->second;
    }

    /// Intensity of upward (downward) moves, summed over all sizes.
    double positive_mass() const
    {
        double s = 0.0;
        for (const auto& [y, rate] : entries_)
            if (y > 0)
                s += rate;
        return s;
    }
    double negative_mass() const
    {
        double s = 0.0;
        for (const auto& [y, rate] : entries_)
            if (y < 0)
                s += rate;
        return s;
    }

    /// kappa_j(L_1) = sum y^j nu(y). Sizes y and -y are combined first so
    /// odd cumulants of a symmetric measure are exactly 0.
    double cumulant(int j) const
    {
        detail::require(j >= 1, "LevyMeasure::cumulant: order must be >= 1");
        const double sign = j % 2 == 0 ? 1.0 : -1.0;
        double s = 0.0;
        for (const auto& [y, rate] : entries_)
        {
            if (y < 0 && entries_.count(-y) > 0)
                continue;
            const double a = static_cast<double>(y < 0 ? -y : y);
            const double pos = y > 0 ? rate : 0.0;
            const double neg = y > 0 ? (*this)(-y) : rate;
            s += std::pow(a, j) * (pos + sign * neg);
        }
        return s;
    }

    /// sum |y|^r nu(y); r = 0 gives the total mass.
    double abs_moment(double r) const
    {
        detail::require(r >= 0.0 && std::isfinite(r), "LevyMeasure::abs_moment: r must be >= 0");
        if (r == 0.0)
            return total_;
        double s = 0.0;
        for (const auto& [y, rate] : entries_)
            s += std::pow(std::fabs(static_cast<double>(y)), r) * rate;
        return s;
    }

    friend bool operator==(const LevyMeasure& a, const LevyMeasure& b)
    {
        return a.entries_ == b.entries_;
    }

  private:
    Map entries_;
    double total_ = 0.0;
};

inline double levy_cumulant(const LevyMeasure& levy, int j) { return levy.cumulant(j); }
inline double levy_abs_moment(const LevyMeasure& levy, double r) { return levy.abs_moment(r); }

} // namespace trawl
