#pragma once

// File formats shared by the library and the command-line tool.
//   Path CSV:      `time,price_ticks`, one row per event (post-jump price)
//   Path sidecar:  JSON {"v0", "t_start", "t_end", "seed"} next to the CSV
//   PMF CSV:       `y,probability`
//   ACF CSV:       `k,gamma,rho`
//   Signature CSV: `delta,empirical,fitted`

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#include "estimate.hpp"
#include "simulate.hpp"
#include "theory.hpp"

namespace trawl::io {

/// Shortest decimal text that reads back to the same double.
inline std::string format(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv)
{
    auto p = csv;
    p.replace_extension(".json");
    return p;
}

inline void write_path_csv(std::ostream& out, const PricePath& path)
{
    out << "time,price_ticks\n";
    const auto& prices = path.post_jump_prices();
    for (std::size_t i = 0; i < prices.size(); ++i)
        out << format(path.events()[i].time) << ',' << prices[i] << '\n';
}

inline nlohmann::json path_sidecar(const PricePath& path, std::optional<std::uint64_t> seed)
{
    nlohmann::json j = {{"v0", path.v0()}, {"t_start", path.t_start()}, {"t_end", path.t_end()}};
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    return j;
}

/// Writes content to a temporary file next to target and renames it over target.
inline void write_atomically(const std::filesystem::path& target, const std::string& content)
{
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot write " + tmp.string());
        out << content;
        if (!out)
            throw DataError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

inline void save_path(const std::filesystem::path& csv, const PricePath& path, std::optional<std::uint64_t> seed)
{
    std::ostringstream body;
    write_path_csv(body, path);
    write_atomically(csv, body.str());
    write_atomically(sidecar_path(csv), path_sidecar(path, seed).dump(2) + "\n");
}

/// Reads a path CSV. With a sidecar, v0 and the window come from it; without
/// one, the first row is the starting price and the last row closes the window.
inline PricePath read_path(std::istream& in, const std::optional<nlohmann::json>& sidecar)
{
    std::string line;
    if (!std::getline(in, line))
        throw DataError("path csv: empty input");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "time,price_ticks")
        throw DataError("path csv: header must be time,price_ticks");
    std::vector<std::pair<double, std::int64_t>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError("path csv: line " + std::to_string(line_no) + " lacks a comma");
        double t = 0.0;
        std::int64_t p = 0;
        const auto r1 = std::from_chars(line.data(), line.data() + comma, t);
        const auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), p);
        if (r1.ec != std::errc() || r1.ptr != line.data() + comma || r2.ec != std::errc() ||
            r2.ptr != line.data() + line.size())
            throw DataError("path csv: line " + std::to_string(line_no) + " is malformed");
        rows.emplace_back(t, p);
    }

    std::int64_t v0 = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t first = 0;
    if (sidecar)
    {
        v0 = sidecar->at("v0").get<std::int64_t>();
        t_start = sidecar->at("t_start").get<double>();
        t_end = sidecar->at("t_end").get<double>();
    }
    else
    {
        if (rows.size() < 2)
            throw DataError("path csv: need a sidecar or at least two rows");
        v0 = rows.front().second;
        t_start = rows.front().first;
        t_end = rows.back().first;
        first = 1;
    }
    std::vector<JumpEvent> events;
    std::int64_t price = v0;
    for (std::size_t i = first; i < rows.size(); ++i)
    {
        const std::int64_t jump = rows[i].second - price;
        if (jump == 0)
            throw DataError("path csv: row " + std::to_string(i + 2) + " repeats the previous price");
        events.push_back({rows[i].first, jump});
        price = rows[i].second;
    }
    try
    {
        return PricePath(v0, t_start, t_end, std::move(events));
    }
    catch (const std::invalid_argument& e)
    {
        throw DataError(std::string("path csv: ") + e.what());
    }
}

inline PricePath load_path(const std::filesystem::path& csv)
{
    std::ifstream in(csv);
    if (!in)
        throw DataError("cannot open " + csv.string());
    std::optional<nlohmann::json> sidecar;
    const auto side = sidecar_path(csv);
    if (std::filesystem::exists(side))
    {
        std::ifstream sin(side);
        try
        {
            sidecar = nlohmann::json::parse(sin);
        }
        catch (const nlohmann::json::exception& e)
        {
            throw DataError("bad sidecar " + side.string() + ": " + e.what());
        }
    }
    return read_path(in, sidecar);
}

inline void write_pmf_csv(std::ostream& out, const PmfResult& pmf)
{
    out << "y,probability\n";
    for (std::int64_t y = -pmf.max_abs; y <= pmf.max_abs; ++y)
        out << y << ',' << format(pmf.at(y)) << '\n';
}

inline void write_acf_csv(std::ostream& out, const AcfResult& acf)
{
    out << "k,gamma,rho\n";
    for (std::size_t k = 0; k < acf.gamma.size(); ++k)
        out << (k + 1) << ',' << format(acf.gamma[k]) << ',' << format(acf.rho[k]) << '\n';
}

inline nlohmann::json to_json(const FitResult& fit)
{
    auto j = trawl::to_json(fit.params);
    j["objective"] = fit.objective;
    j["converged"] = fit.converged;
    j["boundary_flags"] = fit.boundary_flags;
    return j;
}

inline ModelParams load_params(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw DataError("cannot open " + file.string());
    try
    {
        return model_from_json(nlohmann::json::parse(in));
    }
    catch (const nlohmann::json::exception& e)
    {
        throw DataError("bad parameter file " + file.string() + ": " + e.what());
    }
    catch (const std::invalid_argument& e)
    {
        throw DataError("bad parameter file " + file.string() + ": " + e.what());
    }
}

} // namespace trawl::io
