// Command-line front end: `simulate` runs a campaign, `tables` cuts figure
// panels out of a summary.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <uavtrack/uavtrack.hpp>

namespace {

constexpr int exit_config = 2;
constexpr int exit_io = 3;

std::string key_reference()
{
    std::string out = "Configuration keys (file: 'section.key = value', env: UAVTRACK_SECTION_KEY):\n";
    const uavtrack::ScenarioConfig defaults;
    for (const uavtrack::ConfigKey& k : uavtrack::config_keys()) {
        std::string line = "  " + k.name;
        line.resize(std::max<std::size_t>(line.size() + 1, 36), ' ');
        out += line + k.help + " [" + k.get(defaults) + "]\n";
    }
    out += "Precedence: defaults < config file < environment < command-line options.\n";
    out += "Exit codes: 0 success, 2 configuration error, 3 I/O error.\n";
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"UAV beam tracking with GPS/INS-aided GPR refinement"};
    app.require_subcommand(1);
    app.footer(key_reference());

    CLI::App* sim = app.add_subcommand("simulate", "run a Monte Carlo campaign and write trace.csv, summary.csv");
    std::string config_path;
    std::string out_dir = "out";
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::string schemes, snr_list;
    std::vector<std::string> overrides;
    bool print_config = false;
    sim->add_option("--config", config_path, "scenario config file")->required();
    sim->add_option("--trials", trials, "override campaign.trials");
    sim->add_option("--seed", seed, "override campaign.seed");
    sim->add_option("--out", out_dir, "output directory")->capture_default_str();
    sim->add_option("--schemes", schemes, "override campaign.schemes (comma-separated)");
    sim->add_option("--snr-db", snr_list, "override campaign.snr_db (comma-separated)");
    sim->add_option("--set", overrides, "override any key: section.key=value (repeatable)");
    sim->add_flag("--print-config", print_config, "print the effective configuration before running");

    CLI::App* tab = app.add_subcommand("tables", "write the tidy CSV panels of one figure from a summary");
    std::string summary_path, figure, tables_out;
    tab->add_option("--summary", summary_path, "summary.csv from simulate")->required();
    tab->add_option("--figure", figure, "fig5 | fig6 | fig7 | fig8 | fig9")
        ->required()
        ->check(CLI::IsMember({"fig5", "fig6", "fig7", "fig8", "fig9"}));
    tab->add_option("--out", tables_out, "output directory (default: next to the summary)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    try {
        if (*sim) {
            uavtrack::ScenarioConfig cfg = uavtrack::load_config(config_path);
            if (trials)
                uavtrack::set_config_value(cfg, "campaign.trials", std::to_string(*trials), "--trials");
            if (seed)
                uavtrack::set_config_value(cfg, "campaign.seed", std::to_string(*seed), "--seed");
            if (!schemes.empty())
                uavtrack::set_config_value(cfg, "campaign.schemes", schemes, "--schemes");
            if (!snr_list.empty())
                uavtrack::set_config_value(cfg, "campaign.snr_db", snr_list, "--snr-db");
            for (const std::string& kv : overrides) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw uavtrack::ConfigError("--set: expected key=value, got '" + kv + "'");
                uavtrack::set_config_value(cfg, uavtrack::config_detail::trim(kv.substr(0, eq)), kv.substr(eq + 1),
                                           "--set");
            }
            try {
                cfg.validate();
            } catch (const uavtrack::InvalidArgumentError& e) {
                throw uavtrack::ConfigError(e.what());
            }
            if (print_config)
                std::cout << uavtrack::dump_config(cfg);
            const uavtrack::CampaignOutputs o = uavtrack::run_campaign(cfg, out_dir);
            std::cout << "wrote " << o.trace.string() << " (" << o.rows.size() << " rows)\n";
            std::cout << "wrote " << o.summary.string() << '\n';
        } else {
            const uavtrack::SummaryTable t = uavtrack::read_summary(summary_path);
            const std::filesystem::path dir =
                tables_out.empty() ? std::filesystem::path(summary_path).parent_path() : std::filesystem::path(tables_out);
            for (const auto& p : uavtrack::emit_figure_tables(t, figure, dir))
                std::cout << "wrote " << p.string() << '\n';
        }
    } catch (const uavtrack::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const uavtrack::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return exit_io;
    } catch (const uavtrack::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
    return 0;
}
