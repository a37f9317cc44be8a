#pragma once

// Moment-based inference from a single price path:
//   * jump-size frequencies and power-variation slopes,
//   * the Levy measure implied by them for a given permanence b,
//   * a variance-signature least-squares fit of (b, trawl parameters),
//   * a model-based bootstrap for standard errors,
//   * a non-parametric trawl estimate from the slope of the variogram.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "model.hpp"
#include "optimize.hpp"
#include "simulate.hpp"
#include "theory.hpp"

namespace trawl {

struct VarPoint
{
    double delta;          ///< sampling interval, seconds
    double variance;       ///< sample variance of delta-returns (n - 1 denominator)
    std::int64_t count;    ///< number of returns
};

struct EmpiricalStats
{
    std::map<std::int64_t, double> alpha; ///< jump-size frequencies, sum to 1
    std::map<double, double> beta;        ///< r -> {P}^[r]_T / T, per second
    std::vector<VarPoint> var_grid;

    double beta0() const
    {
        const auto it = beta.find(0.0);
        detail::require(it != beta.end(), "EmpiricalStats: beta_0 missing");
        return it->second;
    }

    /// sum y^2 alpha_y beta_0: the slope of the variogram at delta -> 0.
    double short_slope() const
    {
        double s = 0.0;
        for (const auto& [y, a] : alpha)
            s += static_cast<double>(y) * static_cast<double>(y) * a;
        return s * beta0();
    }
};

/// Jump-size frequencies and power-variation slopes. r = 0 is always included.
inline EmpiricalStats jump_empirics(const PricePath& path, std::vector<double> r_list = {0.0, 2.0})
{
    const auto& events = path.events();
    if (events.empty())
        throw DataError("jump_empirics: path has no price moves");
    EmpiricalStats stats;
    for (const auto& e : events)
        stats.alpha[e.jump] += 1.0;
    const double n = static_cast<double>(events.size());
    for (auto& [y, a] : stats.alpha)
        a /= n;
    if (std::find(r_list.begin(), r_list.end(), 0.0) == r_list.end())
        r_list.push_back(0.0);
    for (double r : r_list)
        stats.beta[r] = realized_pv(path, r) / path.span();
    return stats;
}

/// Sample autocorrelations r_1..r_kmax of a series (biased, 1/n normalization).
inline std::vector<double> sample_acf(const std::vector<std::int64_t>& series, int k_max)
{
    detail::require(k_max >= 1, "sample_acf: k_max must be >= 1");
    const std::size_t n = series.size();
    std::vector<double> out(static_cast<std::size_t>(k_max), 0.0);
    if (n < 2)
        return out;
    double mean = 0.0;
    for (auto v : series)
        mean += static_cast<double>(v);
    mean /= static_cast<double>(n);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i)
        centered[i] = static_cast<double>(series[i]) - mean;
    double denom = 0.0;
    for (double c : centered)
        denom += c * c;
    if (denom == 0.0)
        return out;
    for (int k = 1; k <= k_max && static_cast<std::size_t>(k) < n; ++k)
    {
        double num = 0.0;
        for (std::size_t i = static_cast<std::size_t>(k); i < n; ++i)
            num += centered[i] * centered[i - static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(k - 1)] = num / denom;
    }
    return out;
}

/// n points equally spaced in log(delta) on [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t n)
{
    detail::require(lo > 0.0 && hi >= lo, "log_grid: need 0 < lo <= hi");
    detail::require(n >= 1, "log_grid: need at least one point");
    std::vector<double> grid(n);
    if (n == 1)
    {
        grid[0] = lo;
        return grid;
    }
    const double a = std::log(lo);
    const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = std::exp(a + step * static_cast<double>(i));
    grid.back() = hi;
    return grid;
}

/// The default grid: 60 log-spaced points from 0.1 s to 60 s.
inline std::vector<double> default_grid() { return log_grid(0.1, 60.0, 60); }

/// Sample variances of delta-returns over the grid.
inline std::vector<VarPoint> variance_grid(const PricePath& path, const std::vector<double>& grid)
{
    std::vector<VarPoint> out;
    out.reserve(grid.size());
    double previous = 0.0;
    for (double delta : grid)
    {
        detail::require(delta > previous, "variance_grid: grid must be positive and strictly increasing");
        detail::require(delta <= 0.5 * path.span(), "variance_grid: delta exceeds half the path span");
        previous = delta;
        const auto m = return_moments(path, delta);
        out.push_back({delta, m.sample_variance(), m.count});
    }
    return out;
}

/// Grid points usable on a path of the given span; the rest are reported.
inline std::vector<double> usable_grid(const std::vector<double>& grid, double span,
                                       std::vector<std::string>* warnings = nullptr)
{
    std::vector<double> out;
    for (double delta : grid)
    {
        if (delta > 0.0 && delta <= 0.5 * span)
            out.push_back(delta);
        else if (warnings)
            warnings->push_back("dropping grid point delta=" + std::to_string(delta) +
                                " (needs 0 < delta <= span/2 = " + std::to_string(0.5 * span) + ")");
    }
    return out;
}

/// jump_empirics plus variance_grid on the usable part of the grid.
inline EmpiricalStats path_statistics(const PricePath& path, const std::vector<double>& grid,
                                      std::vector<std::string>* warnings = nullptr)
{
    auto stats = jump_empirics(path);
    stats.var_grid = variance_grid(path, usable_grid(grid, path.span(), warnings));
    return stats;
}

/// Levy measure matching the jump frequencies and the move rate for a given b:
///   nu(y) = (alpha_y - (1 - b) alpha_{-y}) / ((2 - b) b) * beta_0.
/// A negative value is set to zero and its mirror takes the whole pair mass
/// (alpha_y + alpha_{-y}) beta_0 / (2 - b), which keeps every absolute moment.
inline LevyMeasure levy_from_moments(const std::map<std::int64_t, double>& alpha, double beta0, double b)
{
    detail::require(b > 0.0 && b <= 1.0, "levy_from_moments: b must lie in (0, 1]");
    detail::require(beta0 > 0.0, "levy_from_moments: beta_0 must be > 0");
    auto freq = [&](std::int64_t y) {
        const auto it = alpha.find(y);
        return it == alpha.end() ? 0.0 : it->second;
    };
    LevyMeasure::Map entries;
    for (const auto& [key, a] : alpha)
    {
        detail::require(key != 0 && a >= 0.0, "levy_from_moments: invalid jump frequency");
        const std::int64_t y = key < 0 ? -key : key;
        if (entries.count(y))
            continue;
        const double up = freq(y);
        const double down = freq(-y);
        double nu_up = (up - (1.0 - b) * down) / ((2.0 - b) * b) * beta0;
        double nu_down = (down - (1.0 - b) * up) / ((2.0 - b) * b) * beta0;
        const double pair = (up + down) * beta0 / (2.0 - b);
        if (nu_up < 0.0)
        {
            nu_up = 0.0;
            nu_down = pair;
        }
        else if (nu_down < 0.0)
        {
            nu_down = 0.0;
            nu_up = pair;
        }
        if (up > 0.0 || nu_up > 0.0)
            entries[y] = nu_up;
        if (down > 0.0 || nu_down > 0.0)
            entries[-y] = nu_down;
    }
    return LevyMeasure(std::move(entries));
}

// ---------------------------------------------------------------------------
// Variance-signature fit

struct FitOptions
{
    int starts = 20;
    std::uint64_t seed = 20100322;
    NelderMeadOptions optimizer{};
};

struct FitResult
{
    ModelParams params;
    double objective = 0.0;
    std::vector<double> grid;
    std::vector<double> empirical; ///< sigma^2_delta / delta
    std::vector<double> fitted;    ///< model value of sigma^2_delta / delta
    bool converged = false;
    std::vector<std::string> boundary_flags;
};

namespace detail {

struct SignatureModel
{
    FamilyTag family;
    Box box;
    std::vector<std::string> names;

    // Internal coordinates: b first, then the family parameters with scale
    // parameters on a log axis.
    static SignatureModel make(FamilyTag family)
    {
        SignatureModel m{family, {}, {}};
        const double log_lo = std::log(1e-3);
        switch (family)
        {
        case FamilyTag::exponential:
            m.box = {{1e-4, log_lo}, {1.0, std::log(1e3)}};
            m.names = {"b", "lambda"};
            break;
        case FamilyTag::sup_gamma:
            m.box = {{1e-4, log_lo, 1.0 + 1e-6}, {1.0, std::log(1e3), 20.0}};
            m.names = {"b", "alpha", "H"};
            break;
        case FamilyTag::sup_gig:
            m.box = {{1e-4, 0.0, log_lo, -10.0}, {1.0, 20.0, std::log(1e2), 10.0}};
            m.names = {"b", "gamma", "delta", "nu"};
            break;
        case FamilyTag::tabulated:
            throw std::invalid_argument("fit_signature: tabulated trawls are estimated non-parametrically");
        }
        return m;
    }

    TrawlFamily family_of(const std::vector<double>& x) const
    {
        switch (family)
        {
        case FamilyTag::exponential: return Exponential{std::exp(x[1])};
        case FamilyTag::sup_gamma: return SupGamma{std::exp(x[1]), x[2]};
        case FamilyTag::sup_gig: return SupGig{x[1], std::exp(x[2]), x[3]};
        default: break;
        }
        throw std::invalid_argument("fit_signature: unsupported family");
    }

    std::vector<double> natural(const std::vector<double>& x) const
    {
        std::vector<double> v = x;
        switch (family)
        {
        case FamilyTag::exponential: v[1] = std::exp(x[1]); break;
        case FamilyTag::sup_gamma: v[1] = std::exp(x[1]); break;
        case FamilyTag::sup_gig: v[2] = std::exp(x[2]); break;
        default: break;
        }
        return v;
    }
};

// (b delta + 2 leb(A_delta \ A)) / ((2 - b) delta) * s0
inline double signature_value(const TrawlSpec& spec, double delta, double s0)
{
    const double b = spec.permanence();
    return (b * delta + 2.0 * spec.increment(delta)) / ((2.0 - b) * delta) * s0;
}

} // namespace detail

/// Model value of sigma^2_delta / delta given the empirical short slope s0.
inline double signature_model(const TrawlSpec& spec, double delta, double s0)
{
    return detail::signature_value(spec, delta, s0);
}

/// Residual sum of squares of the signature plot for a trawl.
inline double signature_objective(const EmpiricalStats& stats, const TrawlSpec& spec)
{
    const double s0 = stats.short_slope();
    double sse = 0.0;
    for (const auto& p : stats.var_grid)
    {
        const double r = p.variance / p.delta - detail::signature_value(spec, p.delta, s0);
        sse += r * r;
    }
    return sse;
}

/// Least-squares fit of sigma^2_delta / delta over the grid for (b, trawl
/// parameters), multi-started from a Latin hypercube. The Levy measure is then
/// recovered with levy_from_moments at the fitted b.
inline FitResult fit_signature(const EmpiricalStats& stats, FamilyTag family, const FitOptions& options = {})
{
    detail::require(!stats.var_grid.empty(), "fit_signature: variance grid is empty");
    detail::require(!stats.alpha.empty(), "fit_signature: jump frequencies missing");
    detail::require(options.starts >= 1, "fit_signature: need at least one start");
    const auto model = detail::SignatureModel::make(family);
    const double s0 = stats.short_slope();

    auto objective = [&](const std::vector<double>& x) {
        try
        {
            const TrawlSpec spec(x[0], model.family_of(x));
            double sse = 0.0;
            for (const auto& p : stats.var_grid)
            {
                const double r = p.variance / p.delta - detail::signature_value(spec, p.delta, s0);
                sse += r * r;
            }
            return std::isfinite(sse) ? sse : std::numeric_limits<double>::max();
        }
        catch (const std::exception&)
        {
            return std::numeric_limits<double>::max();
        }
    };

    RandomStream rng(options.seed, 0x5167);
    const auto starts = latin_hypercube(static_cast<std::size_t>(options.starts), model.box, rng);
    Minimum best;
    for (const auto& start : starts)
    {
        auto m = nelder_mead(objective, start, model.box, options.optimizer);
        if (m.value < best.value)
            best = std::move(m);
    }
    if (best.value >= std::numeric_limits<double>::max())
        throw NumericalError("fit_signature: no admissible parameter found");

    FitResult out;
    TrawlSpec spec(best.x[0], model.family_of(best.x));
    out.params = {levy_from_moments(stats.alpha, stats.beta0(), best.x[0]), spec};
    out.objective = best.value;
    out.converged = best.converged;
    for (const auto& p : stats.var_grid)
    {
        out.grid.push_back(p.delta);
        out.empirical.push_back(p.variance / p.delta);
        out.fitted.push_back(detail::signature_value(spec, p.delta, s0));
    }
    for (std::size_t i = 0; i < best.x.size(); ++i)
    {
        const double width = model.box.upper[i] - model.box.lower[i];
        if (best.x[i] - model.box.lower[i] <= 1e-6 * width)
            out.boundary_flags.push_back(model.names[i] + ":lower");
        else if (model.box.upper[i] - best.x[i] <= 1e-6 * width)
            out.boundary_flags.push_back(model.names[i] + ":upper");
    }
    return out;
}

/// Named parameter values: b, nu+, nu-, then the trawl family's parameters.
inline std::map<std::string, double> parameter_values(const ModelParams& params)
{
    std::map<std::string, double> v;
    v["b"] = params.b();
    v["nu+"] = params.levy.positive_mass();
    v["nu-"] = params.levy.negative_mass();
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Exponential>)
                v["lambda"] = f.lambda;
            else if constexpr (std::is_same_v<T, SupGamma>)
            {
                v["alpha"] = f.alpha;
                v["H"] = f.H;
            }
            else if constexpr (std::is_same_v<T, SupGig>)
            {
                v["gamma"] = f.gamma;
                v["delta"] = f.delta;
                v["nu"] = f.order;
            }
        },
        params.trawl.family());
    return v;
}

// ---------------------------------------------------------------------------
// Model-based bootstrap

struct BootstrapOptions
{
    std::size_t n_paths = 500;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::vector<double> grid = default_grid();
    FitOptions fit{};
};

struct BootstrapResult
{
    std::vector<std::string> names;
    std::vector<std::vector<double>> estimates; ///< [path][parameter], failed paths omitted
    std::map<std::string, double> mean;
    std::map<std::string, double> se; ///< standard deviation across paths
    std::size_t non_converged = 0;
    std::size_t failed = 0;
};

/// Simulates n_paths paths at params (path i uses stream (seed, i)), re-fits
/// each one and reports the spread of the estimates. Results do not depend
/// on the number of threads.
inline BootstrapResult bootstrap(const ModelParams& params, double t_start, double t_end, std::int64_t v0,
                                 FamilyTag family, const BootstrapOptions& options)
{
    detail::require(options.n_paths >= 2, "bootstrap: need at least two paths");
    const std::size_t n = options.n_paths;

    struct Slot
    {
        bool ok = false;
        bool converged = false;
        std::map<std::string, double> values;
    };
    std::vector<Slot> slots(n);
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (std::size_t i = next++; i < n; i = next++)
        {
            try
            {
                RandomStream rng(options.seed, i);
                const auto path = simulate_path(params, t_start, t_end, v0, rng);
                const auto stats = path_statistics(path, options.grid);
                FitOptions fit = options.fit;
                fit.seed = options.fit.seed + 7919 * static_cast<std::uint64_t>(i);
                const auto result = fit_signature(stats, family, fit);
                slots[i].values = parameter_values(result.params);
                slots[i].converged = result.converged;
                slots[i].ok = true;
            }
            catch (const std::exception&)
            {
                slots[i].ok = false;
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(n)));
    if (threads == 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    BootstrapResult out;
    for (const auto& slot : slots)
    {
        if (!slot.ok)
        {
            ++out.failed;
            continue;
        }
        if (!slot.converged)
            ++out.non_converged;
        if (out.names.empty())
            for (const auto& [name, value] : slot.values)
                out.names.push_back(name);
        std::vector<double> row;
        for (const auto& name : out.names)
        {
            const auto it = slot.values.find(name);
            row.push_back(it == slot.values.end() ? 0.0 : it->second);
        }
        out.estimates.push_back(std::move(row));
    }
    const std::size_t m = out.estimates.size();
    for (std::size_t j = 0; j < out.names.size(); ++j)
    {
        double mean = 0.0;
        for (const auto& row : out.estimates)
            mean += row[j];
        mean /= static_cast<double>(std::max<std::size_t>(m, 1));
        double ss = 0.0;
        for (const auto& row : out.estimates)
            ss += (row[j] - mean) * (row[j] - mean);
        out.mean[out.names[j]] = mean;
        out.se[out.names[j]] = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Non-parametric trawl

struct NonparametricOptions
{
    double tail_fraction = 0.25; ///< share of the grid (largest deltas) used for the asymptotic slope
    int half_window = 1;         ///< local quadratic fit uses 2 * half_window + 1 grid points
};

struct NonparametricResult
{
    double b = 1.0;
    double s0 = 0.0;    ///< variogram slope at 0: sum y^2 alpha_y beta_0
    double s_inf = 0.0; ///< asymptotic variogram slope
    std::vector<double> grid;
    std::vector<double> slopes;    ///< estimated d sigma^2 / d delta
    std::vector<double> shape;     ///< d~(-delta), clamped and monotone
    TrawlSpec trawl;               ///< tabulated, knots (0, 1) then the grid
};

namespace detail {

// Derivative at x[i] of the least-squares quadratic through the window.
inline double local_quadratic_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t i,
                                    std::size_t half)
{
    const std::size_t n = x.size();
    const std::size_t width = std::min(n, 2 * half + 1);
    std::size_t lo = i >= half ? i - half : 0;
    if (lo + width > n)
        lo = n - width;
    const std::size_t hi = lo + width;
    const double scale = x[hi - 1] - x[lo];
    if (width == 2)
        return (y[hi - 1] - y[lo]) / scale;

    // Normal equations for y = c0 + c1 u + c2 u^2 with u = (x - x_i) / scale.
    double s[5] = {0, 0, 0, 0, 0};
    double t[3] = {0, 0, 0};
    for (std::size_t k = lo; k < hi; ++k)
    {
        const double u = (x[k] - x[i]) / scale;
        double p = 1.0;
        for (int m = 0; m < 5; ++m)
        {
            s[m] += p;
            if (m < 3)
                t[m] += p * y[k];
            p *= u;
        }
    }
    double a[3][4] = {{s[0], s[1], s[2], t[0]}, {s[1], s[2], s[3], t[1]}, {s[2], s[3], s[4], t[2]}};
    for (int c = 0; c < 3; ++c)
    {
        int pivot = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[pivot][c]))
                pivot = r;
        for (int k = 0; k < 4; ++k)
            std::swap(a[c][k], a[pivot][k]);
        for (int r = 0; r < 3; ++r)
        {
            if (r == c)
                continue;
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < 4; ++k)
                a[r][k] -= f * a[c][k];
        }
    }
    return a[1][3] / a[1][1] / scale;
}

// Least-squares non-increasing fit (pool adjacent violators).
inline std::vector<double> monotone_decreasing(const std::vector<double>& v)
{
    std::vector<double> level;
    std::vector<std::size_t> count;
    for (double x : v)
    {
        level.push_back(x);
        count.push_back(1);
        while (level.size() > 1 && level[level.size() - 2] < level.back())
        {
            const double w1 = static_cast<double>(count[count.size() - 2]);
            const double w2 = static_cast<double>(count.back());
            const double merged = (level[level.size() - 2] * w1 + level.back() * w2) / (w1 + w2);
            count[count.size() - 2] += count.back();
            level[level.size() - 2] = merged;
            level.pop_back();
            count.pop_back();
        }
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < level.size(); ++k)
        out.insert(out.end(), count[k], level[k]);
    return out;
}

} // namespace detail

/// b and d~ from the variogram slope: with s(delta) = d sigma^2 / d delta,
///   b = 2 s_inf / (s0 + s_inf),  d~(-delta) = (s(delta) - s_inf) / (s0 - s_inf).
inline NonparametricResult nonparametric_trawl(const EmpiricalStats& stats, const NonparametricOptions& options = {})
{
    const auto& g = stats.var_grid;
    detail::require(g.size() >= 4, "nonparametric_trawl: need at least four grid points");
    detail::require(g.back().delta >= 10.0 * g.front().delta,
                    "nonparametric_trawl: the grid must span at least one decade");
    detail::require(options.tail_fraction > 0.0 && options.tail_fraction <= 1.0,
                    "nonparametric_trawl: tail_fraction must lie in (0, 1]");

    NonparametricResult out;
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& p : g)
    {
        x.push_back(p.delta);
        y.push_back(p.variance);
    }
    out.grid = x;
    out.s0 = stats.short_slope();

    const std::size_t n = x.size();
    const std::size_t tail =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(options.tail_fraction * static_cast<double>(n))));
    {
        double mx = 0.0;
        double my = 0.0;
        for (std::size_t k = n - tail; k < n; ++k)
        {
            mx += x[k];
            my += y[k];
        }
        mx /= static_cast<double>(tail);
        my /= static_cast<double>(tail);
        double sxy = 0.0;
        double sxx = 0.0;
        for (std::size_t k = n - tail; k < n; ++k)
        {
            sxy += (x[k] - mx) * (y[k] - my);
            sxx += (x[k] - mx) * (x[k] - mx);
        }
        out.s_inf = sxy / sxx;
    }

    for (std::size_t i = 0; i < n; ++i)
        out.slopes.push_back(detail::local_quadratic_slope(x, y, i, static_cast<std::size_t>(options.half_window)));

    Tabulated table;
    table.lags.push_back(0.0);
    table.values.push_back(1.0);
    if (!(out.s0 - out.s_inf > 1e-12 * std::fabs(out.s0)))
    {
        out.b = 1.0;
        out.shape.assign(n, 1.0);
    }
    else
    {
        out.b = std::clamp(2.0 * out.s_inf / (out.s0 + out.s_inf), 1e-6, 1.0);
        std::vector<double> raw;
        for (double s : out.slopes)
            raw.push_back(std::clamp((s - out.s_inf) / (out.s0 - out.s_inf), 0.0, 1.0));
        out.shape = detail::monotone_decreasing(raw);
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        table.lags.push_back(x[i]);
        table.values.push_back(out.shape[i]);
    }
    out.trawl = TrawlSpec(out.b, std::move(table));
    return out;
}

} // namespace trawl
