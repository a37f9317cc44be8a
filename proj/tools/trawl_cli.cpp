// Command-line front end: simulate, clean, fit, pmf, acf, signature, bootstrap.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence
// (outputs are still written).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "trawl/trawl_all.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_nonconvergence = 3;

/// Serializes resolved option values as a flat JSON object.
class JsonConfig : public CLI::Config
{
  public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override
    {
        json j = json::object();
        for (const CLI::Option* opt : app->get_options())
        {
            if (opt->get_lnames().empty() || opt->get_configurable() == false)
                continue;
            const std::string name = opt->get_lnames().front();
            if (name == "help" || name == "config")
                continue;
            if (opt->count() > 0)
            {
                const auto& results = opt->results();
                j[name] = opt->get_type_size() == 0 ? std::string("true") : results.back();
            }
            else if (default_also && !opt->get_default_str().empty())
            {
                j[name] = opt->get_default_str();
            }
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream&) const override { return {}; }
};

/// Expands `--config FILE` into `--name=value` arguments placed before the
/// ones given on the command line, so explicit flags win. FILE is a flat JSON
/// object or a run manifest (its "config" member is used).
std::vector<std::string> expand_config(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    std::string file;
    for (std::size_t i = 2; i < args.size(); ++i)
    {
        if (args[i] == "--config" && i + 1 < args.size())
            file = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            file = args[i].substr(9);
    }
    if (file.empty() || args.size() < 2)
        return args;
    std::ifstream in(file);
    if (!in)
        throw CLI::FileError::Missing(file);
    json j;
    try
    {
        j = json::parse(in);
    }
    catch (const json::exception& e)
    {
        throw CLI::ConversionError(std::string("config ") + file + ": " + e.what());
    }
    if (j.contains("command") && j.contains("config"))
        j = j["config"];
    if (!j.is_object())
        throw CLI::ConversionError("config " + file + ": expected a JSON object");
    std::vector<std::string> injected;
    for (const auto& [key, value] : j.items())
    {
        if (value.is_null() || key == "config")
            continue;
        std::string text;
        if (value.is_string())
            text = value.get<std::string>();
        else if (value.is_boolean())
            text = value.get<bool>() ? "true" : "false";
        else
            text = value.dump();
        injected.push_back("--" + key + "=" + text);
    }
    args.insert(args.begin() + 2, injected.begin(), injected.end());
    return args;
}

unsigned default_threads()
{
    if (const char* env = std::getenv("TRAWL_THREADS"))
    {
        try
        {
            const long v = std::stol(env);
            if (v > 0)
                return static_cast<unsigned>(v);
        }
        catch (const std::exception&)
        {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void write_text(const fs::path& target, const std::string& content) { trawl::io::write_atomically(target, content); }

struct RunContext
{
    std::string command;
    CLI::App* app = nullptr;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void write_manifests() const
    {
        const auto elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        json manifest = {
            {"command", command},
            {"config", json::parse(JsonConfig().to_config(app, true, false, ""))},
            {"seed", seed ? json(*seed) : json(nullptr)},
            {"inputs", inputs},
            {"outputs", outputs},
            {"version", trawl::version},
            {"runtime_seconds", elapsed},
        };
        for (const auto& out : outputs)
            write_text(out + ".manifest.json", manifest.dump(2) + "\n");
    }
};

struct GridFlags
{
    double min = 0.1;
    double max = 60.0;
    std::size_t points = 60;

    void add(CLI::App* sub)
    {
        sub->add_option("--grid-min", min, "Smallest sampling interval (seconds)")->check(CLI::PositiveNumber);
        sub->add_option("--grid-max", max, "Largest sampling interval (seconds)")->check(CLI::PositiveNumber);
        sub->add_option("--grid-points", points, "Number of log-spaced grid points")->check(CLI::PositiveNumber);
    }
    std::vector<double> grid() const { return trawl::log_grid(min, max, points); }
};

std::string signature_csv(const std::vector<double>& grid, const std::vector<double>& empirical,
                          const std::vector<double>& fitted)
{
    std::ostringstream os;
    os << "delta,empirical,fitted\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        os << trawl::io::format(grid[i]) << ',' << trawl::io::format(empirical[i]) << ',';
        if (i < fitted.size())
            os << trawl::io::format(fitted[i]);
        os << '\n';
    }
    return os.str();
}

std::vector<std::string> filtered_grid_warnings(const std::vector<double>& grid, double span, std::vector<double>& out)
{
    std::vector<std::string> warnings;
    out = trawl::usable_grid(grid, span, &warnings);
    for (const auto& w : warnings)
        std::cerr << "warning: " << w << '\n';
    if (out.empty())
        throw trawl::DataError("no grid point fits inside half the path span");
    return warnings;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Integer-valued trawl price process: simulation, theory, estimation and tick cleaning"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(trawl::version));
    app.option_defaults()->always_capture_default();

    auto with_config = [&](CLI::App* sub) {
        sub->add_option("--config", "JSON file with option values (or a run manifest to replay)")
            ->configurable(false);
        sub->option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    };

    RunContext ctx;

    // simulate ---------------------------------------------------------------
    struct
    {
        std::string params, output;
        double t0 = 72.03, t1 = 75600.0;
        std::int64_t v0 = 7486;
        std::uint64_t seed = 20100322, index = 0;
    } sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate one price path to a path CSV");
    with_config(simulate);
    simulate->add_option("--params", sim.params, "Model parameter JSON")->required();
    simulate->add_option("--t0", sim.t0, "Window start (seconds)");
    simulate->add_option("--t1", sim.t1, "Window end (seconds)");
    simulate->add_option("--v0", sim.v0, "Price at the window start (ticks)");
    simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_option("--index", sim.index, "Stream index under the seed");
    simulate->add_option("--output,-o", sim.output, "Path CSV to write")->required();

    // clean ------------------------------------------------------------------
    struct
    {
        std::string input, output, diagnostics;
        double tick_size = 0.0, m_factor = 9.5;
        bool step1 = false;
    } cln;
    auto* clean = app.add_subcommand("clean", "Clean raw quote/trade records into a path CSV");
    with_config(clean);
    clean->add_option("--input,-i", cln.input, "Raw CSV (log_t,bid,bidsz,ask,asksz,trade,tradesz)")->required();
    clean->add_option("--tick-size", cln.tick_size, "Tick size in price units")->required()->check(CLI::PositiveNumber);
    clean->add_option("--m-factor", cln.m_factor, "Band half-width in ticks for the out-of-band rule");
    clean->add_flag("--step1", cln.step1, "Drop trades outside [bid - M tick, ask + M tick]");
    clean->add_option("--output,-o", cln.output, "Path CSV to write")->required();
    clean->add_option("--diagnostics", cln.diagnostics, "Diagnostics file (default: stderr)");

    // fit --------------------------------------------------------------------
    struct
    {
        std::string input, output, signature, trawl = "exponential";
        int starts = 20;
        std::uint64_t seed = 20100322;
        GridFlags grid;
    } ft;
    auto* fit = app.add_subcommand("fit", "Moment-based fit of a path: Levy measure + variance signature");
    with_config(fit);
    fit->add_option("--input,-i", ft.input, "Path CSV")->required();
    fit->add_option("--trawl", ft.trawl, "Trawl family")
        ->check(CLI::IsMember({"exponential", "sup-gamma", "sup-gig"}));
    ft.grid.add(fit);
    fit->add_option("--starts", ft.starts, "Multi-start count")->check(CLI::PositiveNumber);
    fit->add_option("--seed", ft.seed, "Seed for the start points");
    fit->add_option("--output,-o", ft.output, "FitResult JSON to write")->required();
    fit->add_option("--signature", ft.signature, "Signature-plot CSV to write");

    // pmf --------------------------------------------------------------------
    struct
    {
        std::string params, output;
        double t = 1.0;
        std::size_t n_points = 0;
    } pm;
    auto* pmf = app.add_subcommand("pmf", "Probability mass function of P_t - P_0");
    with_config(pmf);
    pmf->add_option("--params", pm.params, "Model parameter JSON")->required();
    pmf->add_option("--t", pm.t, "Horizon (seconds)")->check(CLI::NonNegativeNumber);
    pmf->add_option("--n-points", pm.n_points, "Even transform length (0 = automatic)");
    pmf->add_option("--output,-o", pm.output, "PMF CSV to write")->required();

    // acf --------------------------------------------------------------------
    struct
    {
        std::string params, input, output;
        double delta = 1.0;
        int k_max = 20;
    } ac;
    auto* acf_cmd = app.add_subcommand("acf", "Theoretical (and empirical) return autocorrelations");
    with_config(acf_cmd);
    acf_cmd->add_option("--params", ac.params, "Model parameter JSON")->required();
    acf_cmd->add_option("--input,-i", ac.input, "Path CSV for the empirical column");
    acf_cmd->add_option("--delta", ac.delta, "Sampling interval (seconds)")->check(CLI::PositiveNumber);
    acf_cmd->add_option("--k-max", ac.k_max, "Largest lag")->check(CLI::PositiveNumber);
    acf_cmd->add_option("--output,-o", ac.output, "CSV to write")->required();

    // signature --------------------------------------------------------------
    struct
    {
        std::string input, params, output;
        GridFlags grid;
    } sg;
    auto* signature = app.add_subcommand("signature", "Variance signature plot data");
    with_config(signature);
    signature->add_option("--input,-i", sg.input, "Path CSV")->required();
    signature->add_option("--params", sg.params, "Parameter JSON for the fitted column");
    sg.grid.add(signature);
    signature->add_option("--output,-o", sg.output, "CSV to write")->required();

    // bootstrap --------------------------------------------------------------
    struct
    {
        std::string params, output, trawl = "exponential";
        double t0 = 72.03, t1 = 75600.0;
        std::int64_t v0 = 7486;
        std::size_t n_paths = 500;
        std::uint64_t seed = 20100322;
        unsigned threads = 0;
        int starts = 20;
        GridFlags grid;
    } bs;
    auto* boot = app.add_subcommand("bootstrap", "Model-based bootstrap standard errors");
    with_config(boot);
    boot->add_option("--params", bs.params, "Model parameter JSON")->required();
    boot->add_option("--t0", bs.t0, "Window start (seconds)");
    boot->add_option("--t1", bs.t1, "Window end (seconds)");
    boot->add_option("--v0", bs.v0, "Starting price (ticks)");
    boot->add_option("--n-paths", bs.n_paths, "Number of simulated paths")->check(CLI::Range(2, 100000000));
    boot->add_option("--trawl", bs.trawl, "Trawl family to re-fit")
        ->check(CLI::IsMember({"exponential", "sup-gamma", "sup-gig"}));
    boot->add_option("--seed", bs.seed, "Random seed");
    boot->add_option("--threads", bs.threads, "Worker threads (0 = TRAWL_THREADS or all cores)");
    boot->add_option("--starts", bs.starts, "Multi-start count per fit")->check(CLI::PositiveNumber);
    bs.grid.add(boot);
    boot->add_option("--output,-o", bs.output, "SE JSON to write")->required();

    try
    {
        auto args = expand_config(argc, argv);
        std::vector<char*> ptrs;
        for (auto& a : args)
            ptrs.push_back(a.data());
        app.parse(static_cast<int>(ptrs.size()), ptrs.data());
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    int status = exit_ok;
    try
    {
        if (simulate->parsed())
        {
            ctx = {"simulate", simulate, sim.seed, {sim.params}, {sim.output}};
            const auto params = trawl::io::load_params(sim.params);
            if (!(sim.t0 < sim.t1))
                throw std::invalid_argument("--t0 must be smaller than --t1");
            trawl::RandomStream rng(sim.seed, sim.index);
            const auto path = trawl::simulate_path(params, sim.t0, sim.t1, sim.v0, rng);
            trawl::io::save_path(sim.output, path, sim.seed);
        }
        else if (clean->parsed())
        {
            ctx = {"clean", clean, std::nullopt, {cln.input}, {cln.output}};
            std::ifstream in(cln.input);
            if (!in)
                throw trawl::DataError("cannot open " + cln.input);
            const auto records = trawl::read_raw_csv(in);
            const auto result = trawl::clean_ticks(records, {cln.tick_size, cln.m_factor, cln.step1});
            std::ostringstream diag;
            for (const auto& d : result.diagnostics)
                diag << trawl::format_diagnostic(d) << '\n';
            if (cln.diagnostics.empty())
                std::cerr << diag.str();
            else
            {
                write_text(cln.diagnostics, diag.str());
                ctx.outputs.push_back(cln.diagnostics);
            }
            trawl::io::save_path(cln.output, result.path, std::nullopt);
        }
        else if (fit->parsed())
        {
            ctx = {"fit", fit, ft.seed, {ft.input}, {ft.output}};
            const auto path = trawl::io::load_path(ft.input);
            std::vector<double> grid;
            filtered_grid_warnings(ft.grid.grid(), path.span(), grid);
            const auto stats = trawl::path_statistics(path, grid);
            trawl::FitOptions options;
            options.starts = ft.starts;
            options.seed = ft.seed;
            const auto result = trawl::fit_signature(stats, trawl::family_from_string(ft.trawl), options);
            write_text(ft.output, trawl::io::to_json(result).dump(2) + "\n");
            if (!ft.signature.empty())
            {
                write_text(ft.signature, signature_csv(result.grid, result.empirical, result.fitted));
                ctx.outputs.push_back(ft.signature);
            }
            if (!result.converged)
            {
                std::cerr << "warning: optimizer did not meet its convergence tolerance\n";
                status = exit_nonconvergence;
            }
        }
        else if (pmf->parsed())
        {
            ctx = {"pmf", pmf, std::nullopt, {pm.params}, {pm.output}};
            const auto params = trawl::io::load_params(pm.params);
            const auto result =
                pm.n_points == 0 ? trawl::return_pmf(params, pm.t) : trawl::return_pmf(params, pm.t, pm.n_points);
            std::ostringstream os;
            trawl::io::write_pmf_csv(os, result);
            write_text(pm.output, os.str());
            std::cerr << "n_points=" << result.n_points << " aliasing_bound=" << result.aliasing_bound << '\n';
        }
        else if (acf_cmd->parsed())
        {
            ctx = {"acf", acf_cmd, std::nullopt, {ac.params}, {ac.output}};
            const auto params = trawl::io::load_params(ac.params);
            const auto theory = trawl::acf(params, ac.delta, ac.k_max);
            std::ostringstream os;
            if (ac.input.empty())
                trawl::io::write_acf_csv(os, theory);
            else
            {
                ctx.inputs.push_back(ac.input);
                const auto path = trawl::io::load_path(ac.input);
                const auto returns = trawl::returns_at(path, ac.delta);
                const auto empirical = trawl::sample_acf(returns, ac.k_max);
                const double band = 2.0 / std::sqrt(static_cast<double>(returns.size()));
                os << "k,empirical,theoretical,band\n";
                for (int k = 1; k <= ac.k_max; ++k)
                    os << k << ',' << trawl::io::format(empirical[static_cast<std::size_t>(k - 1)]) << ','
                       << trawl::io::format(theory.rho[static_cast<std::size_t>(k - 1)]) << ','
                       << trawl::io::format(band) << '\n';
            }
            write_text(ac.output, os.str());
        }
        else if (signature->parsed())
        {
            ctx = {"signature", signature, std::nullopt, {sg.input}, {sg.output}};
            const auto path = trawl::io::load_path(sg.input);
            std::vector<double> grid;
            filtered_grid_warnings(sg.grid.grid(), path.span(), grid);
            const auto points = trawl::variance_grid(path, grid);
            std::vector<double> empirical;
            std::vector<double> fitted;
            for (const auto& p : points)
                empirical.push_back(p.variance / p.delta);
            if (!sg.params.empty())
            {
                ctx.inputs.push_back(sg.params);
                const auto params = trawl::io::load_params(sg.params);
                for (double d : grid)
                    fitted.push_back(trawl::return_cumulant(params, d, 2) / d);
            }
            write_text(sg.output, signature_csv(grid, empirical, fitted));
        }
        else if (boot->parsed())
        {
            ctx = {"bootstrap", boot, bs.seed, {bs.params}, {bs.output}};
            const auto params = trawl::io::load_params(bs.params);
            trawl::BootstrapOptions options;
            options.n_paths = bs.n_paths;
            options.seed = bs.seed;
            options.threads = bs.threads == 0 ? default_threads() : bs.threads;
            options.grid = bs.grid.grid();
            options.fit.starts = bs.starts;
            const auto result =
                trawl::bootstrap(params, bs.t0, bs.t1, bs.v0, trawl::family_from_string(bs.trawl), options);
            json out = {{"se", result.se},
                        {"mean", result.mean},
                        {"n_paths", bs.n_paths},
                        {"used_paths", result.estimates.size()},
                        {"non_converged", result.non_converged},
                        {"failed", result.failed}};
            write_text(bs.output, out.dump(2) + "\n");
            if (result.non_converged > 0 || result.failed > 0)
                status = exit_nonconvergence;
        }
        ctx.write_manifests();
    }
    catch (const trawl::DataError& e)
    {
        std::cerr << "data error: " << e.what() << '\n';
        return exit_data;
    }
    catch (const std::invalid_argument& e)
    {
        std::cerr << "data error: " << e.what() << '\n';
        return exit_data;
    }
    catch (const nlohmann::json::exception& e)
    {
        std::cerr << "data error: " << e.what() << '\n';
        return exit_data;
    }
    catch (const trawl::NumericalError& e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_nonconvergence;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data;
    }
    return status;
}
