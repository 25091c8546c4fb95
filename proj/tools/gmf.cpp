#include "gmf/errors.hpp"
#include "gmf/report.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

int fail(const std::string& module, const std::string& kind, const std::string& message, int code)
{
    nlohmann::json err = {{"error", {{"module", module}, {"kind", kind}, {"message", message}}}};
    std::cerr << err.dump() << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Optimal and minimax-robust filtering for sequences with periodically stationary GM increments"};
    app.require_subcommand(1);
    std::string config_path, output_path, format;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid_size, truncation;
    int length = -1;

    const std::vector<std::pair<std::string, std::string>> tasks = {
        {"expand", "expand the increment operator"},
        {"factorize", "factorize the weighted observed density"},
        {"filter", "optimal filter via spectral factorization"},
        {"oracle", "filter plus the Fourier-coefficient and projection oracles"},
        {"minimax", "least favorable densities and minimax filter"},
        {"report", "every applicable stage"},
        {"demo", "seeded Gaussian path of the observed increments"},
    };
    for (const auto& [name, help] : tasks) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--output", output_path, "write the result here instead of stdout");
        sub->add_option("--format", format, "json, text or csv")->check(CLI::IsMember({"json", "text", "csv"}));
        sub->add_option("--seed", seed, "overrides the seeds in the config");
        sub->add_option("--grid-size", grid_size, "number of frequency nodes (power of two)");
        sub->add_option("--truncation", truncation, "truncation length L of the factor series");
        if (name == "demo") sub->add_option("--length", length, "path length (default from config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    const std::string task = app.get_subcommands().front()->get_name();

    gmf::RunConfig cfg;
    try {
        cfg = gmf::load_config(config_path);
    } catch (const gmf::ConfigError& e) {
        return fail("config", "config", e.what(), 2);
    }
    cfg.task = task;
    if (grid_size) cfg.grid_size = *grid_size;
    if (truncation) cfg.L = *truncation;
    if (seed) {
        cfg.seed = *seed;
        if (cfg.minimax) cfg.minimax->seed = *seed;
    }
    if (!format.empty()) cfg.output_format = format;
    if (!output_path.empty()) cfg.output_path = output_path;

    std::string text;
    try {
        if (task == "demo") {
            const gmf::DemoSample s = gmf::demo_sample(cfg, cfg.seed, length >= 0 ? length : cfg.demo_length);
            if (cfg.output_format == "csv") {
                text = s.to_csv();
            } else if (cfg.output_format == "text") {
                std::ostringstream os;
                os << "length " << s.values.size() << "\nempirical lag-0 covariance\n"
                   << s.empirical_covariance << "\nmodel lag-0 covariance\n" << s.model_covariance << "\n";
                text = os.str();
            } else {
                text = s.to_json().dump(2) + "\n";
            }
        } else {
            const gmf::RunReport rep = gmf::run(cfg);
            text = cfg.output_format == "csv" ? rep.to_csv() : cfg.output_format == "text" ? rep.to_text() : rep.to_json();
        }
    } catch (const gmf::StageError& e) {
        return fail(e.module, e.kind, e.what(), e.exit_code());
    } catch (const gmf::ConfigError& e) {
        return fail(task, "config", e.what(), 2);
    } catch (const gmf::InfeasibleClassError& e) {
        return fail(task, "infeasible", e.what(), 4);
    } catch (const std::exception& e) {
        return fail(task, "numerical", e.what(), 3);
    }

    if (cfg.output_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(cfg.output_path);
        if (!out) return fail("cli", "config", "cannot write '" + cfg.output_path + "'", 2);
        out << text;
    }
    return 0;
}
