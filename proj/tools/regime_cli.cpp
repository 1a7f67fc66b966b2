// Command-line front end: regime <pipeline> [options]
#include <regime/error.hpp>
#include <regime/pipeline.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Flags {
    std::string config;
    std::vector<std::string> sets;
    // Values that map one-to-one onto settings keys.
    std::vector<std::pair<std::string, std::string>> direct;
};

void add_flag(CLI::App* app, Flags& flags, const std::string& name, const std::string& key,
              const std::string& help) {
    app->add_option_function<std::string>(
        name, [&flags, key](const std::string& v) { flags.direct.emplace_back(key, v); }, help);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regime-shift screening for return panels and firm histories", "regime"};
    app.require_subcommand(1);

    Flags flags;
    std::optional<regime::Pipeline> chosen;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "key = value configuration file");
        sub->add_option("--set", flags.sets, "Override a setting, key=value (repeatable)");
        add_flag(sub, flags, "--out", "out", "Output directory");
        add_flag(sub, flags, "--seed", "seed", "Random seed");
        add_flag(sub, flags, "--threads", "threads", "Worker threads");
    };

    auto* contagion = app.add_subcommand("contagion", "Rolling-window conditional independence graphs");
    add_common(contagion);
    add_flag(contagion, flags, "--returns", "returns", "Return panel CSV");
    add_flag(contagion, flags, "--factors", "factors", "Factor panel CSV (optional)");
    add_flag(contagion, flags, "--window", "window", "Window length in rows");
    add_flag(contagion, flags, "--step", "step", "Rows between window starts");
    add_flag(contagion, flags, "--estimator", "estimator", "bic-subset | ols | ridge | lasso");
    add_flag(contagion, flags, "--lambda", "lambda", "Ridge/lasso penalty");
    add_flag(contagion, flags, "--edge-rule", "edge_rule", "and | or");
    contagion->callback([&] { chosen = regime::Pipeline::Contagion; });

    auto* scr = app.add_subcommand("screen", "Bayesian changepoint screening of firm histories");
    add_common(scr);
    add_flag(scr, flags, "--firms", "firms", "Firm CSV (firm_id,year,value)");
    add_flag(scr, flags, "--iters", "iters", "Gibbs iterations");
    add_flag(scr, flags, "--burn-in", "burn_in", "Discarded iterations");
    add_flag(scr, flags, "--cutoff", "cutoff", "Posterior mass threshold for a hit");
    add_flag(scr, flags, "--min-obs", "min_obs", "Minimum observed years per firm");
    scr->callback([&] { chosen = regime::Pipeline::Screen; });

    auto* simc = app.add_subcommand("simulate-contagion", "Simulate a two-regime return panel");
    add_common(simc);
    simc->callback([&] { chosen = regime::Pipeline::SimulateContagion; });

    auto* simf = app.add_subcommand("simulate-firms", "Simulate a firm cohort with planted changepoints");
    add_common(simf);
    simf->callback([&] { chosen = regime::Pipeline::SimulateFirms; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return regime::kExitValidation;
    }

    try {
        regime::Settings settings;
        if (!flags.config.empty()) {
            settings = regime::load_settings(flags.config);
        }
        for (const auto& s : flags.sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw regime::ValidationError("--set expects key=value, got '" + s + "'");
            }
            settings[s.substr(0, eq)] = s.substr(eq + 1);
        }
        for (const auto& [k, v] : flags.direct) {
            settings[k] = v;
        }
        const auto config = regime::RunConfig::from_settings(*chosen, settings);
        const auto result = regime::run(config);
        if (result.exit_code != regime::kExitOk) {
            std::cerr << "error: " << result.message << '\n';
        } else {
            std::cout << "wrote " << result.artifacts.size() << " artifacts to "
                      << config.out_dir.string() << '\n';
        }
        return result.exit_code;
    } catch (const regime::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return regime::kExitValidation;
    } catch (const regime::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return regime::kExitNumerical;
    }
}
