#pragma once

#include <regime/changepoint.hpp>
#include <regime/graph_select.hpp>
#include <regime/simulate.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace regime {

enum class Pipeline { Contagion, Screen, SimulateContagion, SimulateFirms };

Pipeline parse_pipeline(std::string_view name);
std::string_view to_string(Pipeline p);

/// Flat key/value configuration. Text form is one `key = value` per line,
/// `#` starts a comment.
using Settings = std::map<std::string, std::string>;

Settings read_settings(std::istream& in, const std::string& source = "<stream>");
Settings load_settings(const std::filesystem::path& path);
void write_settings(std::ostream& out, const Settings& settings);

/// Every knob of a run. Keys of the text form are listed in README.md.
struct RunConfig {
    Pipeline pipeline = Pipeline::Contagion;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    // contagion
    std::filesystem::path returns;
    std::filesystem::path factors;
    WindowSpec window;
    Estimator estimator = Estimator::BicSubset;
    double lambda = 1.0;
    EdgeRule edge_rule = EdgeRule::And;
    bool factor_intercept = true;

    // screen
    std::filesystem::path firms;
    int iters = 3000;
    int burn_in = 500;
    double cutoff = 0.95;
    std::size_t min_obs = 20;
    double a = 2.0;
    double b = 2.0;
    double tau2 = 10.0;
    double alpha0 = 0.8;
    double alpha_n = 0.1;
    double alpha_interior = 0.1;
    DofConvention dof = DofConvention::Augmented;
    bool rao_blackwell = false;

    // simulate-contagion
    std::size_t sim_rows = 1250;
    std::size_t sim_boundary = 625;
    double sim_edge_strength = 0.4;
    double sim_scale = 0.01;
    bool sim_factors = true;
    std::string sim_start = "2006-01-02";

    // simulate-firms
    FirmSimSpec firm_sim;

    /// Unknown keys and malformed values raise ValidationError.
    static RunConfig from_settings(Pipeline pipeline, const Settings& settings);
    /// The keys that matter for this pipeline, fully resolved.
    Settings to_settings() const;
    /// Range checks and input-path existence.
    void validate() const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

struct RunResult {
    int exit_code = kExitOk;
    std::string message;
    /// File names written under out_dir, manifest excluded.
    std::vector<std::string> artifacts;
};

/// Executes the configured pipeline, writing artifacts plus `manifest.json`
/// and `config.resolved` (rerunnable with --config) into out_dir.
RunResult run(const RunConfig& config);

}  // namespace regime
