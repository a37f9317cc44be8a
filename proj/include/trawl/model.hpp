#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "levy.hpp"
#include "trawl.hpp"

namespace trawl {

/// Full parameter vector: Levy measure plus squashed trawl.
struct ModelParams
{
    LevyMeasure levy;
    TrawlSpec trawl;

    double b() const noexcept { return trawl.permanence(); }
};

// JSON layout:
//   {"b": 0.396,
//    "trawl": {"family": "exponential", "params": {"lambda": 0.681}},
//    "levy": {"1": 0.0138, "-1": 0.0131}}

inline nlohmann::json family_to_json(const TrawlSpec& spec)
{
    nlohmann::json params;
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Exponential>)
                params = {{"lambda", f.lambda}};
            else if constexpr (std::is_same_v<T, SupGamma>)
                params = {{"alpha", f.alpha}, {"H", f.H}};
            else if constexpr (std::is_same_v<T, SupGig>)
                params = {{"gamma", f.gamma}, {"delta", f.delta}, {"nu", f.order}};
            else
            {
                std::vector<double> s(f.lags.size());
                for (std::size_t i = 0; i < s.size(); ++i)
                    s[i] = -f.lags[i];
                params = {{"s", s}, {"d", f.values}};
            }
        },
        spec.family());
    return {{"family", to_string(spec.tag())}, {"params", params}};
}

inline TrawlFamily family_from_json(const nlohmann::json& j)
{
    const auto tag = family_from_string(j.at("family").get<std::string>());
    const auto& p = j.at("params");
    switch (tag)
    {
    case FamilyTag::exponential: return Exponential{p.at("lambda").get<double>()};
    case FamilyTag::sup_gamma: return SupGamma{p.at("alpha").get<double>(), p.at("H").get<double>()};
    case FamilyTag::sup_gig:
        return SupGig{p.at("gamma").get<double>(), p.at("delta").get<double>(), p.at("nu").get<double>()};
    case FamilyTag::tabulated: {
        auto s = p.at("s").get<std::vector<double>>();
        auto d = p.at("d").get<std::vector<double>>();
        detail::require(s.size() == d.size(), "tabulated trawl: 's' and 'd' lengths differ");
        std::vector<std::size_t> order(s.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        // Sort by lag u = -s ascending.
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
        Tabulated t;
        for (auto i : order)
        {
            detail::require(s[i] <= 0.0, "tabulated trawl: grid points must satisfy s <= 0");
            t.lags.push_back(-s[i]);
            t.values.push_back(d[i]);
        }
        return t;
    }
    }
    throw std::invalid_argument("unknown trawl family");
}

inline nlohmann::json to_json(const ModelParams& params)
{
    nlohmann::json levy = nlohmann::json::object();
    for (const auto& [y, rate] : params.levy.entries())
        levy[std::to_string(y)] = rate;
    return {{"b", params.b()}, {"trawl", family_to_json(params.trawl)}, {"levy", levy}};
}

inline ModelParams model_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("b") || !j.contains("trawl") || !j.contains("levy"))
        throw DataError("parameter JSON needs \"b\", \"trawl\" and \"levy\"");
    LevyMeasure::Map entries;
    for (const auto& [key, value] : j.at("levy").items())
    {
        std::size_t used = 0;
        const long long y = std::stoll(key, &used);
        detail::require(used == key.size(), "levy: key '" + key + "' is not an integer");
        entries[y] = value.get<double>();
    }
    return {LevyMeasure(std::move(entries)), TrawlSpec(j.at("b").get<double>(), family_from_json(j.at("trawl")))};
}

} // namespace trawl
