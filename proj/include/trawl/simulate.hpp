#pragma once

// Exact event-level simulation of the price process through its generalized
// compound representation: a stationary set of fleeting moves alive at
// t_start (an M/G/inf queue in equilibrium), then Poisson arrivals of rate
// ||nu|| that are either permanent or fleeting with a random lifetime.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "random.hpp"

namespace trawl {

struct JumpEvent
{
    double time;       ///< seconds
    std::int64_t jump; ///< signed size in ticks, never 0
};

/// Piecewise-constant cadlag price path in integer ticks.
class PricePath
{
  public:
    PricePath(std::int64_t v0, double t_start, double t_end, std::vector<JumpEvent> events)
        : v0_(v0), t_start_(t_start), t_end_(t_end), events_(std::move(events))
    {
        detail::require(std::isfinite(t_start_) && std::isfinite(t_end_) && t_start_ < t_end_,
                        "PricePath: need finite t_start < t_end");
        prices_.reserve(events_.size());
        std::int64_t price = v0_;
        double previous = t_start_;
        for (const auto& e : events_)
        {
            detail::require(e.jump != 0, "PricePath: zero-size jump");
            detail::require(e.time > t_start_ && e.time <= t_end_, "PricePath: event outside (t_start, t_end]");
            detail::require(e.time >= previous, "PricePath: events must be in chronological order");
            previous = e.time;
            price += e.jump;
            prices_.push_back(price);
        }
    }

    std::int64_t v0() const noexcept { return v0_; }
    double t_start() const noexcept { return t_start_; }
    double t_end() const noexcept { return t_end_; }
    double span() const noexcept { return t_end_ - t_start_; }
    const std::vector<JumpEvent>& events() const noexcept { return events_; }
    /// Price immediately after each event.
    const std::vector<std::int64_t>& post_jump_prices() const noexcept { return prices_; }

    /// P_t = v0 + sum of jumps at times <= t.
    std::int64_t price_at(double t) const
    {
        const auto it = std::upper_bound(events_.begin(), events_.end(), t,
                                         [](double value, const JumpEvent& e) { return value < e.time; });
        if (it == events_.begin())
            return v0_;
        return prices_[static_cast<std::size_t>(it - events_.begin()) - 1];
    }

    std::int64_t final_price() const { return prices_.empty() ? v0_ : prices_.back(); }

    friend bool operator==(const PricePath& a, const PricePath& b)
    {
        if (a.v0_ != b.v0_ || a.t_start_ != b.t_start_ || a.t_end_ != b.t_end_ || a.events_.size() != b.events_.size())
            return false;
        for (std::size_t i = 0; i < a.events_.size(); ++i)
            if (a.events_[i].time != b.events_[i].time || a.events_[i].jump != b.events_[i].jump)
                return false;
        return true;
    }

  private:
    std::int64_t v0_;
    double t_start_;
    double t_end_;
    std::vector<JumpEvent> events_;
    std::vector<std::int64_t> prices_;
};

/// Draws jump sizes with probability nu(y) / ||nu||.
class JumpSizeSampler
{
  public:
    explicit JumpSizeSampler(const LevyMeasure& levy)
    {
        double acc = 0.0;
        for (const auto& [y, rate] : levy.entries())
        {
            if (rate <= 0.0)
                continue;
            acc += rate;
            sizes_.push_back(y);
            cumulative_.push_back(acc);
        }
    }

    std::int64_t operator()(RandomStream& rng) const
    {
        const double u = rng.uniform() * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), sizes_.size() - 1);
        return sizes_[idx];
    }

  private:
    std::vector<std::int64_t> sizes_;
    std::vector<double> cumulative_;
};

struct Survivor
{
    double residual_lifetime; ///< seconds until the move reverts
    std::int64_t size;
};

using SurvivorSet = std::vector<Survivor>;

/// Fleeting moves alive at the start of the window. Their count is
/// Poisson(||nu|| leb(A)); residual lifetimes have survival overlap(t)/leb(A).
inline SurvivorSet sample_initial_survivors(const ModelParams& params, RandomStream& rng)
{
    SurvivorSet out;
    const double mean = params.levy.total_mass() * params.trawl.leb_a();
    if (!(mean > 0.0))
        return out;
    const JumpSizeSampler sizes(params.levy);
    // Poisson count as the number of unit-rate arrivals in [0, mean].
    double clock = rng.exponential(1.0);
    while (clock <= mean)
    {
        const std::int64_t size = sizes(rng);
        const double residual = params.trawl.residual_quantile(rng.uniform());
        out.push_back({residual, size});
        clock += rng.exponential(1.0);
    }
    return out;
}

/// One stationary path on (t_start, t_end] starting from price v0.
///
/// Each arrival carries a height U ~ U(0,1). U <= b makes the move permanent.
/// Otherwise the move is fleeting and reverts once d(-age) drops to U, i.e.
/// after lifetime_quantile(1 - (U - b)/(1 - b)). Reversals after t_end are not
/// observed. Fleeting pairs whose reversal rounds onto the arrival time are
/// invisible and skipped.
inline PricePath simulate_path(const ModelParams& params, double t_start, double t_end, std::int64_t v0,
                               RandomStream& rng)
{
    detail::require(std::isfinite(t_start) && std::isfinite(t_end) && t_start < t_end,
                    "simulate_path: need finite t_start < t_end");
    const double b = params.b();

    struct Pending
    {
        double time;
        std::int64_t jump;
        std::uint64_t seq;
    };
    std::vector<Pending> pending;
    std::uint64_t seq = 0;

    for (const auto& s : sample_initial_survivors(params, rng))
    {
        const double when = t_start + s.residual_lifetime;
        if (when > t_start && when <= t_end)
            pending.push_back({when, -s.size, seq});
        ++seq;
    }

    const double rate = params.levy.total_mass();
    const JumpSizeSampler sizes(params.levy);
    double clock = t_start;
    while (true)
    {
        clock += rng.exponential(rate);
        if (!(clock <= t_end))
            break;
        const std::int64_t size = sizes(rng);
        const double height = rng.uniform();
        if (height <= b)
        {
            pending.push_back({clock, size, seq++});
            continue;
        }
        const double level = (height - b) / (1.0 - b);
        const double lifetime = params.trawl.lifetime_quantile(1.0 - level);
        const double departure = clock + lifetime;
        if (departure == clock)
            continue;
        pending.push_back({clock, size, seq++});
        if (departure <= t_end)
            pending.push_back({departure, -size, seq++});
    }

    std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
        return a.time < b.time || (a.time == b.time && a.seq < b.seq);
    });
    std::vector<JumpEvent> events;
    events.reserve(pending.size());
    for (const auto& p : pending)
        events.push_back({p.time, p.jump});
    return PricePath(v0, t_start, t_end, std::move(events));
}

namespace detail {

// Number of complete delta-returns in the window; tolerant of the span being
// an exact multiple of delta up to rounding.
inline std::int64_t return_count(double span, double delta)
{
    return static_cast<std::int64_t>(std::floor(span / delta * (1.0 + 1e-12)));
}

} // namespace detail

/// Returns P_{t_start + k delta} - P_{t_start + (k-1) delta}, k = 1..floor(span/delta).
inline std::vector<std::int64_t> returns_at(const PricePath& path, double delta)
{
    detail::require(delta > 0.0 && std::isfinite(delta), "returns_at: delta must be > 0");
    detail::require(delta <= path.span() * (1.0 + 1e-12), "returns_at: delta exceeds the path span");
    const std::int64_t n = detail::return_count(path.span(), delta);
    std::vector<std::int64_t> out(static_cast<std::size_t>(n));
    const auto& events = path.events();
    std::size_t next = 0;
    std::int64_t price = path.v0();
    std::int64_t previous = price;
    for (std::int64_t k = 1; k <= n; ++k)
    {
        const double grid = path.t_start() + static_cast<double>(k) * delta;
        while (next < events.size() && events[next].time <= grid)
            price += events[next++].jump;
        out[static_cast<std::size_t>(k - 1)] = price - previous;
        previous = price;
    }
    return out;
}

/// {P}^[r] over the window: sum of |jump|^r; r = 0 counts the moves.
inline double realized_pv(const PricePath& path, double r)
{
    detail::require(r >= 0.0, "realized_pv: r must be >= 0");
    if (r == 0.0)
        return static_cast<double>(path.events().size());
    double s = 0.0;
    for (const auto& e : path.events())
        s += std::pow(std::fabs(static_cast<double>(e.jump)), r);
    return s;
}

/// Count, sum and sum of squares of the delta-returns, without materializing
/// the (mostly zero) return series. Agrees exactly with returns_at.
struct ReturnMoments
{
    std::int64_t count = 0;
    std::int64_t sum = 0;
    std::int64_t sum_sq = 0;

    /// Sample variance with denominator n - 1.
    double sample_variance() const
    {
        if (count < 2)
            return 0.0;
        const long double n = static_cast<long double>(count);
        const long double s = static_cast<long double>(sum);
        const long double q = static_cast<long double>(sum_sq);
        return static_cast<double>((q - s * s / n) / (n - 1.0L));
    }
};

inline ReturnMoments return_moments(const PricePath& path, double delta)
{
    detail::require(delta > 0.0 && std::isfinite(delta), "return_moments: delta must be > 0");
    detail::require(delta <= path.span() * (1.0 + 1e-12), "return_moments: delta exceeds the path span");
    ReturnMoments m;
    m.count = detail::return_count(path.span(), delta);
    const double t0 = path.t_start();
    auto grid = [&](std::int64_t k) { return t0 + static_cast<double>(k) * delta; };

    std::int64_t bin = -1;
    std::int64_t accumulated = 0;
    for (const auto& e : path.events())
    {
        // Return k collects events with grid(k-1) < time <= grid(k).
        auto k = static_cast<std::int64_t>(std::ceil((e.time - t0) / delta));
        while (k > 1 && grid(k - 1) >= e.time)
            --k;
        while (grid(k) < e.time)
            ++k;
        if (k > m.count)
            break;
        if (k != bin)
        {
            m.sum += accumulated;
            m.sum_sq += accumulated * accumulated;
            accumulated = 0;
            bin = k;
        }
        accumulated += e.jump;
    }
    m.sum += accumulated;
    m.sum_sq += accumulated * accumulated;
    return m;
}

} // namespace trawl
