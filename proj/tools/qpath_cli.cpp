// qpath command-line experiment runner.
//
// Usage:
//   qpath run <config> [--override key=value ...] [--seed N] [--out DIR] [--workers N]
//   qpath validate <config>
//
// Exit codes: 0 success, 1 configuration error, 2 numeric failure.

#include <CLI11.hpp>

#include <csignal>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qpath/qpath.hpp"

namespace {

void handle_signal(int) { qpath::request_stop(); }

qpath::ExperimentConfig load_config(const std::string& path,
                                    const std::vector<std::string>& overrides,
                                    const std::optional<std::uint64_t>& seed,
                                    const std::optional<std::string>& out_dir,
                                    const std::optional<std::size_t>& workers) {
    qpath::KeyValueConfig kv = qpath::KeyValueConfig::parse_file(path);
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw qpath::ConfigError("--override expects key=value, got: " + item);
        kv.set(qpath::detail::trim(item.substr(0, eq)), qpath::detail::trim(item.substr(eq + 1)));
    }
    if (seed) kv.set("ensemble.master_seed", std::to_string(*seed));
    if (out_dir) kv.set("output.dir", *out_dir);
    if (workers) kv.set("workers", std::to_string(*workers));
    return qpath::ExperimentConfig::from_key_values(kv);
}

void print_summary(const qpath::ExperimentResult& result) {
    const auto& primary = result.tables.front();
    std::cout << "mode: " << qpath::mode_name(result.config.mode) << "\n";
    for (const auto& table : result.tables)
        std::cout << "table '" << table.name << "': " << table.rows.size() << " rows"
                  << (table.partial ? " (partial)" : "") << "\n";
    if (primary.name == "summary" && !primary.rows.empty()) {
        for (std::size_t i = 0; i < primary.columns.size(); ++i)
            std::cout << (i ? "  " : "") << primary.columns[i] << " = "
                      << qpath::format_double(primary.rows.back()[i]);
        std::cout << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential Gaussian position measurements on a free particle: "
                 "closed-form and Monte-Carlo experiments with Hausdorff-dimension fits"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> workers;

    CLI::App* run = app.add_subcommand("run", "run an experiment config and emit result tables");
    run->add_option("config", config_path, "config file (key = value lines)")->required();
    run->add_option("--override", overrides, "override a config key, e.g. schedule.T=1e5");
    run->add_option("--seed", seed, "master seed (overrides ensemble.master_seed)");
    run->add_option("--out", out_dir, "output directory (overrides output.dir)");
    run->add_option("--workers", workers, "worker threads, 0 = all cores (overrides workers)");

    CLI::App* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", config_path, "config file to validate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (validate->parsed()) {
            const qpath::ExperimentConfig cfg = load_config(config_path, {}, {}, {}, {});
            std::cout << "configuration OK (mode = " << qpath::mode_name(cfg.mode) << ")\n";
            return 0;
        }
        const qpath::ExperimentConfig cfg =
            load_config(config_path, overrides, seed, out_dir, workers);
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        const qpath::ExperimentResult result = qpath::run_experiment(cfg);
        const auto written = qpath::emit_results(result, cfg.out_dir);
        print_summary(result);
        for (const auto& path : written) std::cout << "wrote " << path << "\n";
        return 0;
    } catch (const qpath::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const qpath::NumericRangeError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
