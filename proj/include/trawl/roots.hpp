#pragma once

#include <cmath>
#include <limits>

#include "error.hpp"

namespace trawl {

/// Root of f on [lo, hi] where f(lo) and f(hi) have opposite signs (or one is
/// zero). Illinois false-position steps with a bisection fallback whenever a
/// step fails to halve the bracket. Stops when the bracket width is below
/// rel_tol * |hi| (or abs_tol).
template <class F>
double bracketed_root(F&& f, double lo, double hi, double rel_tol = 1e-13, double abs_tol = 0.0)
{
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw NumericalError("bracketed_root: interval does not bracket a root");

    int side = 0;
    for (int iter = 0; iter < 400; ++iter)
    {
        const double width = hi - lo;
        if (std::fabs(width) <= std::max(rel_tol * std::max(std::fabs(lo), std::fabs(hi)), abs_tol))
            break;

        double mid = hi - fhi * (hi - lo) / (fhi - flo);
        if (!(mid > std::min(lo, hi) && mid < std::max(lo, hi)))
            mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if (fmid == 0.0)
            return mid;

        const double old_width = std::fabs(width);
        if ((fmid > 0.0) == (fhi > 0.0))
        {
            hi = mid;
            fhi = fmid;
            if (side == -1)
                flo *= 0.5;
            side = -1;
        }
        else
        {
            lo = mid;
            flo = fmid;
            if (side == 1)
                fhi *= 0.5;
            side = 1;
        }
        if (std::fabs(hi - lo) > 0.5 * old_width)
        {
            const double bisect = 0.5 * (lo + hi);
            const double fb = f(bisect);
            if (fb == 0.0)
                return bisect;
            if ((fb > 0.0) == (fhi > 0.0))
            {
                hi = bisect;
                fhi = fb;
            }
            else
            {
                lo = bisect;
                flo = fb;
            }
            side = 0;
        }
    }
    return 0.5 * (lo + hi);
}

/// Smallest t >= 0 with f(t) <= target for a non-increasing f. The upper
/// bracket grows geometrically (doubling) from initial_step.
template <class F>
double solve_decreasing(F&& f, double target, double initial_step = 1.0, double rel_tol = 1e-13)
{
    auto g = [&](double t) { return f(t) - target; };
    if (g(0.0) <= 0.0)
        return 0.0;
    double lo = 0.0;
    double hi = initial_step > 0.0 ? initial_step : 1.0;
    while (g(hi) > 0.0)
    {
        lo = hi;
        hi *= 2.0;
        if (!(hi < 1e300))
            throw NumericalError("solve_decreasing: no bracket found");
    }
    return bracketed_root(g, lo, hi, rel_tol, std::numeric_limits<double>::min());
}

} // namespace trawl
