#pragma once

// Tick-data cleaning: raw quote/trade records -> strictly alternating jump
// series in integer ticks.
//   Step 1 (optional) drop trades outside [bid - M tick, ask + M tick] after
//          forward-filling bid and ask;
//   Step 2 keep trade records only;
//   Step 3 one price per time tag: the candidate closest to the previous
//          tag's price, except that exactly {prev - 1, prev + 1} keeps prev;
//   Step 4 keep only price changes.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "simulate.hpp"

namespace trawl {

struct RawTick
{
    double log_t = 0.0; ///< seconds since midnight
    std::optional<double> bid;
    std::optional<double> bidsz;
    std::optional<double> ask;
    std::optional<double> asksz;
    std::optional<double> trade;
    std::optional<double> tradesz;
    std::size_t line = 0; ///< source line for diagnostics (0 if synthetic)
};

struct CleanConfig
{
    double tick_size = 1.0;
    double m_factor = 9.5;
    bool apply_step1 = false;
};

struct CleanDiagnostic
{
    std::size_t line;
    double log_t;
    std::string rule;
    std::string detail;
};

struct CleanResult
{
    PricePath path;
    std::vector<CleanDiagnostic> diagnostics;
};

namespace detail {

inline std::string format_price(double p)
{
    std::ostringstream os;
    os.precision(12);
    os << p;
    return os.str();
}

} // namespace detail

inline CleanResult clean_ticks(const std::vector<RawTick>& records, const CleanConfig& config)
{
    detail::require(config.tick_size > 0.0 && std::isfinite(config.tick_size), "clean_ticks: tick_size must be > 0");
    detail::require(config.m_factor >= 0.0, "clean_ticks: m_factor must be >= 0");
    if (records.empty())
        throw DataError("clean_ticks: no records");

    std::vector<CleanDiagnostic> diag;
    auto note = [&](const RawTick& r, std::string rule, std::string detail) {
        diag.push_back({r.line, r.log_t, std::move(rule), std::move(detail)});
    };

    struct Trade
    {
        double time;
        std::int64_t ticks;
        const RawTick* source;
    };
    std::vector<Trade> trades;

    std::optional<double> bid;
    std::optional<double> ask;
    double last_time = -std::numeric_limits<double>::infinity();
    for (const auto& r : records)
    {
        if (r.log_t < last_time)
            throw DataError("clean_ticks: records are not time-ordered at line " + std::to_string(r.line));
        last_time = r.log_t;
        if (r.bid)
            bid = r.bid;
        if (r.ask)
            ask = r.ask;

        if (!r.trade)
        {
            note(r, "step2-no-trade", "quote-only record");
            continue;
        }
        const double price = *r.trade;
        if (config.apply_step1 && bid && ask)
        {
            const double band = config.m_factor * config.tick_size;
            if (price < *bid - band || price > *ask + band)
            {
                note(r, "step1-out-of-band",
                     "trade " + detail::format_price(price) + " outside [" + detail::format_price(*bid - band) + ", " +
                         detail::format_price(*ask + band) + "]");
                continue;
            }
        }
        const double q = price / config.tick_size;
        const double rounded = std::round(q);
        if (!std::isfinite(q) || std::fabs(q - rounded) > 1e-6 * std::max(1.0, std::fabs(q)))
        {
            note(r, "tick-misaligned", "trade " + detail::format_price(price) + " is not a multiple of the tick size");
            continue;
        }
        trades.push_back({r.log_t, static_cast<std::int64_t>(rounded), &r});
    }
    if (trades.empty())
        throw DataError("clean_ticks: no usable trade records");

    // Step 3: one price per time tag.
    struct Tag
    {
        double time;
        std::int64_t ticks;
        std::size_t line;
    };
    std::vector<Tag> tagged;
    std::optional<std::int64_t> previous;
    for (std::size_t i = 0; i < trades.size();)
    {
        std::size_t j = i;
        while (j < trades.size() && trades[j].time == trades[i].time)
            ++j;
        std::int64_t chosen = trades[i].ticks;
        std::size_t chosen_index = i;
        bool ambiguous = false;
        if (previous && j - i > 1)
        {
            const std::int64_t prev = *previous;
            bool has_up = false;
            bool has_down = false;
            bool other = false;
            for (std::size_t k = i; k < j; ++k)
            {
                if (trades[k].ticks == prev + 1)
                    has_up = true;
                else if (trades[k].ticks == prev - 1)
                    has_down = true;
                else
                    other = true;
            }
            if (has_up && has_down && !other)
            {
                ambiguous = true;
                chosen = prev;
            }
            else
            {
                // Closest to prev; strict improvement only, so ties go to the earlier record.
                std::int64_t best_distance = std::numeric_limits<std::int64_t>::max();
                for (std::size_t k = i; k < j; ++k)
                {
                    const std::int64_t dist = std::llabs(trades[k].ticks - prev);
                    if (dist < best_distance)
                    {
                        best_distance = dist;
                        chosen = trades[k].ticks;
                        chosen_index = k;
                    }
                }
            }
        }
        for (std::size_t k = i; k < j; ++k)
        {
            if (ambiguous)
                note(*trades[k].source, "step3-2-ambiguous",
                     "two prices one tick either side of " + std::to_string(chosen) + "; previous price kept");
            else if (k != chosen_index)
                note(*trades[k].source, "step3-1-duplicate-tag",
                     "price " + std::to_string(trades[k].ticks) + " replaced by " + std::to_string(chosen));
        }
        tagged.push_back({trades[i].time, chosen, trades[chosen_index].source->line});
        previous = chosen;
        i = j;
    }

    // Step 4: keep only jumps.
    const double t_start = tagged.front().time;
    const std::int64_t v0 = tagged.front().ticks;
    std::vector<JumpEvent> events;
    std::int64_t price = v0;
    for (std::size_t k = 1; k < tagged.size(); ++k)
    {
        if (tagged[k].ticks == price)
        {
            diag.push_back({tagged[k].line, tagged[k].time, "step4-no-change", "price " + std::to_string(price) + " repeated"});
            continue;
        }
        events.push_back({tagged[k].time, tagged[k].ticks - price});
        price = tagged[k].ticks;
    }
    const double t_end = records.back().log_t;
    if (!(t_end > t_start))
        throw DataError("clean_ticks: cleaned series spans no time");
    return {PricePath(v0, t_start, t_end, std::move(events)), std::move(diag)};
}

/// One diagnostics line: `line=<n> log_t=<t> rule=<id> <detail>`.
inline std::string format_diagnostic(const CleanDiagnostic& d)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), d.log_t);
    return "line=" + std::to_string(d.line) + " log_t=" + std::string(buf, res.ptr) + " rule=" + d.rule + " " + d.detail;
}

/// Parses `log_t,bid,bidsz,ask,asksz,trade,tradesz` (empty field = missing).
inline std::vector<RawTick> read_raw_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw DataError("raw csv: empty input");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const std::vector<std::string> expected = {"log_t", "bid", "bidsz", "ask", "asksz", "trade", "tradesz"};
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            header.push_back(field);
    }
    if (header != expected)
        throw DataError("raw csv: header must be log_t,bid,bidsz,ask,asksz,trade,tradesz");

    std::vector<RawTick> out;
    std::size_t line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true)
        {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        if (fields.size() != 7)
            throw DataError("raw csv: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                            " fields, expected 7");
        auto number = [&](const std::string& s) -> std::optional<double> {
            if (s.empty())
                return std::nullopt;
            std::size_t used = 0;
            double v = 0.0;
            try
            {
                v = std::stod(s, &used);
            }
            catch (const std::exception&)
            {
                used = 0;
            }
            if (used != s.size())
                throw DataError("raw csv: line " + std::to_string(line_no) + ": bad number '" + s + "'");
            return v;
        };
        RawTick r;
        const auto t = number(fields[0]);
        if (!t)
            throw DataError("raw csv: line " + std::to_string(line_no) + ": missing log_t");
        r.log_t = *t;
        r.bid = number(fields[1]);
        r.bidsz = number(fields[2]);
        r.ask = number(fields[3]);
        r.asksz = number(fields[4]);
        r.trade = number(fields[5]);
        r.tradesz = number(fields[6]);
        r.line = line_no;
        out.push_back(r);
    }
    return out;
}

/// Trade records reproducing a clean path, plus a quote-only record at t_end
/// so that cleaning them returns the same path.
inline std::vector<RawTick> raw_from_path(const PricePath& path, double tick_size)
{
    std::vector<RawTick> out;
    RawTick first;
    first.log_t = path.t_start();
    first.trade = static_cast<double>(path.v0()) * tick_size;
    first.tradesz = 1.0;
    out.push_back(first);
    const auto& prices = path.post_jump_prices();
    for (std::size_t i = 0; i < prices.size(); ++i)
    {
        RawTick r;
        r.log_t = path.events()[i].time;
        r.trade = static_cast<double>(prices[i]) * tick_size;
        r.tradesz = 1.0;
        out.push_back(r);
    }
    RawTick last;
    last.log_t = path.t_end();
    last.bid = static_cast<double>(path.final_price()) * tick_size;
    out.push_back(last);
    return out;
}

} // namespace trawl
