#pragma once

// Derivative-free minimization on a box: Nelder-Mead with every trial point
// projected back into the box, restarted from its own optimum until a
// restart stops improving, and Latin-hypercube multi-starts.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "error.hpp"
#include "random.hpp"

namespace trawl {

struct Box
{
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t size() const noexcept { return lower.size(); }

    std::vector<double> project(std::vector<double> x) const
    {
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = std::clamp(x[i], lower[i], upper[i]);
        return x;
    }
};

struct NelderMeadOptions
{
    int max_evaluations = 4000;
    double x_tolerance = 1e-10; ///< simplex size relative to the box width
    double f_tolerance = 1e-14; ///< value spread relative to |f_best|
    double initial_step = 0.05; ///< fraction of the box width
    int max_restarts = 6;
};

struct Minimum
{
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    bool converged = false;
};

namespace detail {

template <class F>
Minimum nelder_mead_once(F& f, const std::vector<double>& start, const Box& box, const NelderMeadOptions& opt,
                         int budget)
{
    const std::size_t n = start.size();
    std::vector<std::vector<double>> simplex(n + 1, box.project(start));
    for (std::size_t i = 0; i < n; ++i)
    {
        const double width = box.upper[i] - box.lower[i];
        double step = opt.initial_step * width;
        if (simplex[i + 1][i] + step > box.upper[i])
            step = -step;
        simplex[i + 1][i] += step;
        simplex[i + 1] = box.project(simplex[i + 1]);
    }
    std::vector<double> values(n + 1);
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    for (std::size_t i = 0; i <= n; ++i)
        values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    bool converged = false;
    while (evals < budget)
    {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        double size = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                size = std::max(size, std::fabs(simplex[i][j] - simplex[best][j]) / (box.upper[j] - box.lower[j]));
        const double spread = values[worst] - values[best];
        if (size <= opt.x_tolerance &&
            spread <= opt.f_tolerance * std::fabs(values[best]) + std::numeric_limits<double>::min())
        {
            converged = true;
            break;
        }
        if (size <= 1e-3 * opt.x_tolerance)
        {
            converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst)
                for (std::size_t j = 0; j < n; ++j)
                    centroid[j] += simplex[i][j] / static_cast<double>(n);
        auto along = [&](double coef) {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j)
                x[j] = centroid[j] + coef * (simplex[worst][j] - centroid[j]);
            return box.project(std::move(x));
        };

        const auto reflected = along(-1.0);
        const double fr = eval(reflected);
        if (fr < values[best])
        {
            const auto expanded = along(-2.0);
            const double fe = eval(expanded);
            if (fe < fr)
            {
                simplex[worst] = expanded;
                values[worst] = fe;
            }
            else
            {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second])
        {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        const auto contracted = along(outside ? -0.5 : 0.5);
        const double fc = eval(contracted);
        if (fc < (outside ? fr : values[worst]))
        {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i)
        {
            if (i == best)
                continue;
            for (std::size_t j = 0; j < n; ++j)
                simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            simplex[i] = box.project(simplex[i]);
            values[i] = eval(simplex[i]);
        }
    }
    const auto it = std::min_element(values.begin(), values.end());
    Minimum m;
    m.x = simplex[static_cast<std::size_t>(it - values.begin())];
    m.value = *it;
    m.evaluations = evals;
    m.converged = converged;
    return m;
}

} // namespace detail

/// Box-constrained Nelder-Mead from one start, restarted at its own optimum
/// until a restart no longer improves the value.
template <class F>
Minimum nelder_mead(F&& f, const std::vector<double>& start, const Box& box, const NelderMeadOptions& opt = {})
{
    detail::require(start.size() == box.size() && !start.empty(), "nelder_mead: dimension mismatch");
    Minimum best = detail::nelder_mead_once(f, start, box, opt, opt.max_evaluations);
    int total = best.evaluations;
    NelderMeadOptions restart = opt;
    restart.initial_step = opt.initial_step * 0.2;
    for (int r = 0; r < opt.max_restarts; ++r)
    {
        Minimum next = detail::nelder_mead_once(f, best.x, box, restart, opt.max_evaluations);
        total += next.evaluations;
        const bool improved = next.value < best.value - 1e-12 * std::fabs(best.value);
        if (next.value <= best.value)
            best = std::move(next);
        if (!improved)
            break;
    }
    best.evaluations = total;
    return best;
}

/// n points, one per stratum in each coordinate, stratum order shuffled.
inline std::vector<std::vector<double>> latin_hypercube(std::size_t n, const Box& box, RandomStream& rng)
{
    const std::size_t dim = box.size();
    std::vector<std::vector<double>> points(n, std::vector<double>(dim));
    std::vector<std::size_t> perm(n);
    for (std::size_t j = 0; j < dim; ++j)
    {
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = n; i > 1; --i)
        {
            const auto k = static_cast<std::size_t>(rng.next() % i);
            std::swap(perm[i - 1], perm[k]);
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            const double u = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
            points[i][j] = box.lower[j] + u * (box.upper[j] - box.lower[j]);
        }
    }
    return points;
}

} // namespace trawl
