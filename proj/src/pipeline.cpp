#include <regime/pipeline.hpp>

#include <regime/error.hpp>
#include <regime/factor_model.hpp>
#include <regime/io.hpp>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include <chrono>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>

namespace regime {
namespace {

constexpr const char* kToolVersion = "1.0.0";

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "out", "seed", "threads",
        "returns", "factors", "window", "step", "estimator", "lambda", "edge_rule",
        "factor_intercept",
        "firms", "iters", "burn_in", "cutoff", "min_obs", "a", "b", "tau2", "alpha0", "alpha_n",
        "alpha_interior", "dof", "rao_blackwell",
        "sim.rows", "sim.boundary", "sim.edge_strength", "sim.scale", "sim.factors", "sim.start",
        "sim.firms", "sim.n", "sim.first_year", "sim.changepoint_fraction", "sim.global_fraction",
        "sim.min_location", "sim.max_location", "sim.locations", "sim.jump", "sim.noise_sd_min", "sim.noise_sd_max",
        "sim.obs_per_firm", "sim.missing_rate", "sim.identifiable"};
    return keys;
}

class Reader {
public:
    explicit Reader(const Settings& s) : s_(s) {}

    const std::string* find(const std::string& key) const {
        const auto it = s_.find(key);
        return it == s_.end() ? nullptr : &it->second;
    }

    template <class T>
    void number(const std::string& key, T& out) const {
        if (const auto* v = find(key)) {
            T parsed{};
            const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), parsed);
            if (v->empty() || ec != std::errc{} || ptr != v->data() + v->size()) {
                throw ValidationError(fmt::format("setting {}: '{}' is not a valid number", key, *v));
            }
            out = parsed;
        }
    }

    void flag(const std::string& key, bool& out) const {
        if (const auto* v = find(key)) {
            if (*v == "true" || *v == "1" || *v == "yes") {
                out = true;
            } else if (*v == "false" || *v == "0" || *v == "no") {
                out = false;
            } else {
                throw ValidationError(fmt::format("setting {}: '{}' is not a boolean", key, *v));
            }
        }
    }

    void path(const std::string& key, std::filesystem::path& out) const {
        if (const auto* v = find(key)) {
            out = *v;
        }
    }

    void text(const std::string& key, std::string& out) const {
        if (const auto* v = find(key)) {
            out = *v;
        }
    }

private:
    const Settings& s_;
};

std::vector<int> parse_int_list(const std::string& key, std::string_view text) {
    std::vector<int> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = trim(text.substr(0, comma));
        int v = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
            throw ValidationError(fmt::format("setting {}: '{}' is not an integer list", key, text));
        }
        out.push_back(v);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    }
    return out;
}

std::string bool_text(bool v) {
    return v ? "true" : "false";
}

std::string_view to_string(DofConvention d) {
    return d == DofConvention::Augmented ? "augmented" : "prior";
}

DofConvention parse_dof(std::string_view s) {
    if (s == "augmented") return DofConvention::Augmented;
    if (s == "prior") return DofConvention::Prior;
    throw ValidationError(fmt::format("unknown dof convention '{}' (augmented|prior)", s));
}

void require_file(const std::filesystem::path& p, const char* key) {
    if (p.empty()) {
        throw ValidationError(fmt::format("setting '{}' is required", key));
    }
    if (!std::filesystem::is_regular_file(p)) {
        throw ValidationError(fmt::format("{} '{}' does not exist", key, p.string()));
    }
}

/// Writes artifacts into the output directory and remembers their names.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) {
            throw ValidationError(fmt::format("cannot write '{}'", (dir_ / name).string()));
        }
        body(out);
        if (!out) {
            throw ValidationError(fmt::format("failed writing '{}'", (dir_ / name).string()));
        }
        names_.push_back(name);
    }

    const std::vector<std::string>& names() const noexcept { return names_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> names_;
};

nlohmann::ordered_json run_contagion(const RunConfig& c, ArtifactWriter& out) {
    nlohmann::ordered_json summary;
    const ReturnPanel returns = load_return_panel(c.returns);
    returns.validate();
    ResidualPanel residuals;
    if (!c.factors.empty()) {
        const FactorPanel factors = load_factor_panel(c.factors);
        ResidualBuild built = build_residual_panel(returns, factors, {c.factor_intercept});
        residuals = std::move(built.residuals);
        out.write("residuals.csv", [&](std::ostream& os) { write_panel_csv(os, residuals); });
        out.write("factor_fits.json", [&](std::ostream& os) {
            nlohmann::ordered_json j;
            j["schema_version"] = kSchemaVersion;
            j["intercept"] = c.factor_intercept;
            for (const auto& f : built.fits) {
                j["fits"].push_back({{"index_id", f.index_id},
                                     {"intercept", f.intercept},
                                     {"beta_us", f.beta_us},
                                     {"beta_eu", f.beta_eu},
                                     {"gamma_us", f.gamma_us},
                                     {"gamma_eu", f.gamma_eu}});
            }
            os << j.dump(2) << '\n';
        });
        summary["residual_source"] = "four-factor";
    } else {
        residuals = returns;
        summary["residual_source"] = "input";
    }

    SelectionOptions sel;
    sel.estimator = c.estimator;
    sel.lambda = c.lambda;
    sel.rule = c.edge_rule;
    sel.threads = c.threads;
    const auto snapshots = rolling_graphs(residuals, c.window, sel);

    out.write("snapshots.jsonl", [&](std::ostream& os) { write_snapshots_jsonl(os, snapshots); });

    std::vector<SeriesColumn> degree;
    std::vector<SeriesColumn> sizes;
    std::vector<SeriesColumn> coefs;
    for (std::size_t i = 0; i < residuals.cols(); ++i) {
        const auto d = degree_series(snapshots, i);
        const auto s = neighborhood_size_series(snapshots, i);
        degree.push_back({residuals.labels[i], {d.begin(), d.end()}});
        sizes.push_back({residuals.labels[i], {s.begin(), s.end()}});
        for (std::size_t j = 0; j < residuals.cols(); ++j) {
            if (i != j) {
                coefs.push_back({residuals.labels[i] + "<-" + residuals.labels[j],
                                 coefficient_series(snapshots, i, j)});
            }
        }
    }
    out.write("degree.csv",
              [&](std::ostream& os) { write_window_series_csv(os, snapshots, degree); });
    out.write("neighborhood_size.csv",
              [&](std::ostream& os) { write_window_series_csv(os, snapshots, sizes); });
    out.write("coefficients.csv",
              [&](std::ostream& os) { write_window_series_csv(os, snapshots, coefs); });

    summary["rows"] = residuals.rows();
    summary["columns"] = residuals.cols();
    summary["windows"] = snapshots.size();
    summary["candidates_per_node"] =
        snapshots.empty() ? 0 : snapshots.front().neighborhoods.front().candidates_evaluated;
    return summary;
}

nlohmann::ordered_json run_screen(const RunConfig& c, ArtifactWriter& out) {
    const FirmCohort cohort = load_firm_csv(c.firms);
    const CohortFilter kept = filter_cohort(cohort.firms, c.min_obs);
    if (kept.firms.empty()) {
        throw ValidationError(
            fmt::format("no firm has at least {} observations", c.min_obs));
    }

    Hyper hyper;
    hyper.a = c.a;
    hyper.b = c.b;
    hyper.tau2 = c.tau2;
    hyper.n = cohort.n();
    hyper.dof = c.dof;
    hyper.alpha = Hyper::make_alpha(hyper.n, c.alpha0, c.alpha_n, c.alpha_interior);

    GibbsOptions opts;
    opts.iters = c.iters;
    opts.burn_in = c.burn_in;
    opts.seed = c.seed;
    opts.threads = c.threads;
    opts.rao_blackwell = c.rao_blackwell;
    const ScreenResult result = gibbs_screen(kept.firms, hyper, opts);
    const auto hits = screen(result.posteriors, c.cutoff);

    auto year_of = [&](std::size_t k) { return cohort.years.at(k - 1); };

    out.write("posterior.csv",
              [&](std::ostream& os) { write_posterior_csv(os, result.posteriors); });
    out.write("omega.csv",
              [&](std::ostream& os) { write_omega_csv(os, result.omega_mean, cohort.years); });
    out.write("pm.csv", [&](std::ostream& os) {
        os << "# schema_version: " << kSchemaVersion << '\n' << "firm_id,pm,argmax_year\n";
        for (const auto& p : result.posteriors) {
            os << p.firm_id << ',' << format_double(p.pm) << ',';
            if (p.argmax_interior != 0) {
                os << year_of(p.argmax_interior);
            }
            os << '\n';
        }
    });
    out.write("report.json", [&](std::ostream& os) {
        nlohmann::ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["cutoff"] = c.cutoff;
        j["firms_loaded"] = cohort.firms.size();
        j["firms_retained"] = kept.retained;
        j["firms_dropped"] = kept.dropped;
        j["min_obs"] = c.min_obs;
        j["grid_years"] = cohort.years;
        j["hits"] = nlohmann::ordered_json::array();
        for (const auto& h : hits) {
            j["hits"].push_back({{"firm_id", h.firm_id},
                                 {"pm", h.pm},
                                 {"argmax_year", year_of(h.changepoint)},
                                 {"k", h.changepoint},
                                 {"rank", h.rank}});
        }
        os << j.dump(2) << '\n';
    });

    nlohmann::ordered_json summary;
    summary["firms_loaded"] = cohort.firms.size();
    summary["firms_retained"] = kept.retained;
    summary["grid_length"] = hyper.n;
    summary["hits"] = hits.size();
    return summary;
}

nlohmann::ordered_json run_simulate_contagion(const RunConfig& c, ArtifactWriter& out) {
    ContagionSimSpec spec = regime_flip_spec(c.sim_rows, c.sim_boundary, c.sim_edge_strength);
    spec.scale = c.sim_scale;
    spec.factor_structure = c.sim_factors;
    spec.start = Date::parse(c.sim_start);
    const ContagionSim sim = simulate_contagion(spec, c.seed);

    out.write("returns.csv", [&](std::ostream& os) { write_panel_csv(os, sim.returns); });
    if (sim.factors) {
        out.write("factors.csv", [&](std::ostream& os) { write_factor_csv(os, *sim.factors); });
    }
    out.write("noise.csv", [&](std::ostream& os) { write_panel_csv(os, sim.noise); });
    out.write("truth.json", [&](std::ostream& os) {
        nlohmann::ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["labels"] = spec.labels;
        for (std::size_t r = 0; r < spec.precisions.size(); ++r) {
            const auto& m = spec.precisions[r];
            std::vector<double> prec(m.data(), m.data() + m.size());
            std::vector<int> adj(sim.truth[r].data(), sim.truth[r].data() + sim.truth[r].size());
            j["regimes"].push_back({{"start_row", sim.regime_starts[r]},
                                    {"start_date", sim.returns.dates[sim.regime_starts[r]].iso()},
                                    {"precision", prec},
                                    {"adjacency", adj}});
        }
        os << j.dump(2) << '\n';
    });
    nlohmann::ordered_json summary;
    summary["rows"] = spec.rows;
    summary["regimes"] = spec.precisions.size();
    return summary;
}

nlohmann::ordered_json run_simulate_firms(const RunConfig& c, ArtifactWriter& out) {
    const FirmSim sim = simulate_firms(c.firm_sim, c.seed);
    out.write("firms.csv", [&](std::ostream& os) { write_firm_csv(os, sim.cohort); });
    out.write("truth.csv", [&](std::ostream& os) {
        os << "# schema_version: " << kSchemaVersion << '\n' << "firm_id,gamma,changepoint_year\n";
        for (std::size_t i = 0; i < sim.truth.size(); ++i) {
            const int g = sim.truth[i];
            os << sim.cohort.firms[i].firm_id << ',' << g << ',';
            if (g > 0 && g < sim.cohort.n()) {
                os << sim.cohort.years[static_cast<std::size_t>(g - 1)];
            }
            os << '\n';
        }
    });
    nlohmann::ordered_json summary;
    summary["firms"] = sim.cohort.firms.size();
    return summary;
}

}  // namespace

Pipeline parse_pipeline(std::string_view name) {
    if (name == "contagion") return Pipeline::Contagion;
    if (name == "screen") return Pipeline::Screen;
    if (name == "simulate-contagion") return Pipeline::SimulateContagion;
    if (name == "simulate-firms") return Pipeline::SimulateFirms;
    throw ValidationError(fmt::format("unknown pipeline '{}'", name));
}

std::string_view to_string(Pipeline p) {
    switch (p) {
        case Pipeline::Contagion: return "contagion";
        case Pipeline::Screen: return "screen";
        case Pipeline::SimulateContagion: return "simulate-contagion";
        case Pipeline::SimulateFirms: return "simulate-firms";
    }
    return "?";
}

Settings read_settings(std::istream& in, const std::string& source) {
    Settings s;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError(fmt::format("{}:{}: expected 'key = value'", source, no));
        }
        const std::string key(trim(t.substr(0, eq)));
        const std::string value(trim(t.substr(eq + 1)));
        if (key.empty()) {
            throw ValidationError(fmt::format("{}:{}: empty key", source, no));
        }
        s[key] = value;
    }
    return s;
}

Settings load_settings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError(fmt::format("cannot open config '{}'", path.string()));
    }
    return read_settings(in, path.string());
}

void write_settings(std::ostream& out, const Settings& settings) {
    for (const auto& [k, v] : settings) {
        out << k << " = " << v << '\n';
    }
}

RunConfig RunConfig::from_settings(Pipeline pipeline, const Settings& settings) {
    for (const auto& [k, v] : settings) {
        if (!known_keys().contains(k)) {
            throw ValidationError(fmt::format("unknown setting '{}'", k));
        }
    }
    RunConfig c;
    c.pipeline = pipeline;
    const Reader r(settings);
    r.path("out", c.out_dir);
    r.number("seed", c.seed);
    r.number("threads", c.threads);

    r.path("returns", c.returns);
    r.path("factors", c.factors);
    r.number("window", c.window.length);
    r.number("step", c.window.step);
    if (const auto* v = r.find("estimator")) c.estimator = parse_estimator(*v);
    r.number("lambda", c.lambda);
    if (const auto* v = r.find("edge_rule")) c.edge_rule = parse_edge_rule(*v);
    r.flag("factor_intercept", c.factor_intercept);

    r.path("firms", c.firms);
    r.number("iters", c.iters);
    r.number("burn_in", c.burn_in);
    r.number("cutoff", c.cutoff);
    r.number("min_obs", c.min_obs);
    r.number("a", c.a);
    r.number("b", c.b);
    r.number("tau2", c.tau2);
    r.number("alpha0", c.alpha0);
    r.number("alpha_n", c.alpha_n);
    r.number("alpha_interior", c.alpha_interior);
    if (const auto* v = r.find("dof")) c.dof = parse_dof(*v);
    r.flag("rao_blackwell", c.rao_blackwell);

    r.number("sim.rows", c.sim_rows);
    r.number("sim.boundary", c.sim_boundary);
    r.number("sim.edge_strength", c.sim_edge_strength);
    r.number("sim.scale", c.sim_scale);
    r.flag("sim.factors", c.sim_factors);
    r.text("sim.start", c.sim_start);

    auto& f = c.firm_sim;
    r.number("sim.firms", f.firms);
    r.number("sim.n", f.n);
    // The location range follows n unless given explicitly.
    f.min_location = std::min(5, f.n - 1);
    f.max_location = std::max(f.min_location, f.n - 5);
    r.number("sim.first_year", f.first_year);
    r.number("sim.changepoint_fraction", f.changepoint_fraction);
    r.number("sim.global_fraction", f.global_fraction);
    r.number("sim.min_location", f.min_location);
    r.number("sim.max_location", f.max_location);
    if (const auto* v = r.find("sim.locations")) {
        f.locations = parse_int_list("sim.locations", *v);
    }
    r.number("sim.jump", f.jump);
    r.number("sim.noise_sd_min", f.noise_sd_min);
    r.number("sim.noise_sd_max", f.noise_sd_max);
    r.number("sim.obs_per_firm", f.obs_per_firm);
    r.number("sim.missing_rate", f.missing_rate);
    r.flag("sim.identifiable", f.identifiable);
    return c;
}

Settings RunConfig::to_settings() const {
    Settings s;
    s["out"] = out_dir.string();
    s["seed"] = std::to_string(seed);
    s["threads"] = std::to_string(threads);
    switch (pipeline) {
        case Pipeline::Contagion:
            s["returns"] = returns.string();
            if (!factors.empty()) s["factors"] = factors.string();
            s["window"] = std::to_string(window.length);
            s["step"] = std::to_string(window.step);
            s["estimator"] = std::string(to_string(estimator));
            s["lambda"] = format_double(lambda);
            s["edge_rule"] = std::string(to_string(edge_rule));
            s["factor_intercept"] = bool_text(factor_intercept);
            break;
        case Pipeline::Screen:
            s["firms"] = firms.string();
            s["iters"] = std::to_string(iters);
            s["burn_in"] = std::to_string(burn_in);
            s["cutoff"] = format_double(cutoff);
            s["min_obs"] = std::to_string(min_obs);
            s["a"] = format_double(a);
            s["b"] = format_double(b);
            s["tau2"] = format_double(tau2);
            s["alpha0"] = format_double(alpha0);
            s["alpha_n"] = format_double(alpha_n);
            s["alpha_interior"] = format_double(alpha_interior);
            s["dof"] = std::string(to_string(dof));
            s["rao_blackwell"] = bool_text(rao_blackwell);
            break;
        case Pipeline::SimulateContagion:
            s["sim.rows"] = std::to_string(sim_rows);
            s["sim.boundary"] = std::to_string(sim_boundary);
            s["sim.edge_strength"] = format_double(sim_edge_strength);
            s["sim.scale"] = format_double(sim_scale);
            s["sim.factors"] = bool_text(sim_factors);
            s["sim.start"] = sim_start;
            break;
        case Pipeline::SimulateFirms:
            s["sim.firms"] = std::to_string(firm_sim.firms);
            s["sim.n"] = std::to_string(firm_sim.n);
            s["sim.first_year"] = std::to_string(firm_sim.first_year);
            s["sim.changepoint_fraction"] = format_double(firm_sim.changepoint_fraction);
            s["sim.global_fraction"] = format_double(firm_sim.global_fraction);
            s["sim.min_location"] = std::to_string(firm_sim.min_location);
            s["sim.max_location"] = std::to_string(firm_sim.max_location);
            if (!firm_sim.locations.empty()) {
                s["sim.locations"] = fmt::format("{}", fmt::join(firm_sim.locations, ","));
            }
            s["sim.jump"] = format_double(firm_sim.jump);
            s["sim.noise_sd_min"] = format_double(firm_sim.noise_sd_min);
            s["sim.noise_sd_max"] = format_double(firm_sim.noise_sd_max);
            s["sim.obs_per_firm"] = std::to_string(firm_sim.obs_per_firm);
            s["sim.missing_rate"] = format_double(firm_sim.missing_rate);
            s["sim.identifiable"] = bool_text(firm_sim.identifiable);
            break;
    }
    return s;
}

void RunConfig::validate() const {
    if (out_dir.empty()) {
        throw ValidationError("an output directory is required");
    }
    if (threads < 1) {
        throw ValidationError("threads must be at least 1");
    }
    switch (pipeline) {
        case Pipeline::Contagion:
            require_file(returns, "returns");
            if (!factors.empty()) {
                require_file(factors, "factors");
            }
            if (window.step < 1 || window.length < 3) {
                throw ValidationError("window must be at least 3 rows with step >= 1");
            }
            if (!(lambda >= 0.0)) {
                throw ValidationError("lambda must be nonnegative");
            }
            break;
        case Pipeline::Screen:
            require_file(firms, "firms");
            if (burn_in < 0 || iters <= burn_in) {
                throw ValidationError("need iters > burn_in >= 0");
            }
            if (!(cutoff > 0.0 && cutoff <= 1.0)) {
                throw ValidationError("cutoff must lie in (0, 1]");
            }
            if (min_obs < 1) {
                throw ValidationError("min_obs must be at least 1");
            }
            if (!(a > 0.0) || !(b > 0.0) || !(tau2 > 0.0)) {
                throw ValidationError("a, b and tau2 must be positive");
            }
            if (!(alpha0 >= 0.0) || !(alpha_n >= 0.0) || !(alpha_interior >= 0.0) ||
                !(alpha0 + alpha_n + alpha_interior > 0.0)) {
                throw ValidationError("alpha masses must be nonnegative with a positive total");
            }
            break;
        case Pipeline::SimulateContagion:
            if (sim_boundary == 0 || sim_boundary >= sim_rows) {
                throw ValidationError("sim.boundary must lie strictly inside the simulated rows");
            }
            (void)Date::parse(sim_start);
            break;
        case Pipeline::SimulateFirms:
            firm_sim.validate();
            break;
    }
}

RunResult run(const RunConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    RunResult result;

    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) {
        result.exit_code = kExitValidation;
        result.message = fmt::format("cannot create output directory '{}': {}",
                                     config.out_dir.string(), ec.message());
        return result;
    }

    ArtifactWriter out(config.out_dir);
    nlohmann::ordered_json summary;
    const Settings settings = config.to_settings();
    try {
        {
            std::ofstream cfg(config.out_dir / "config.resolved");
            cfg << "# pipeline: " << to_string(config.pipeline) << '\n';
            write_settings(cfg, settings);
        }
        config.validate();
        switch (config.pipeline) {
            case Pipeline::Contagion: summary = run_contagion(config, out); break;
            case Pipeline::Screen: summary = run_screen(config, out); break;
            case Pipeline::SimulateContagion: summary = run_simulate_contagion(config, out); break;
            case Pipeline::SimulateFirms: summary = run_simulate_firms(config, out); break;
        }
    } catch (const ValidationError& e) {
        result.exit_code = kExitValidation;
        result.message = e.what();
    } catch (const NumericalError& e) {
        result.exit_code = kExitNumerical;
        result.message = e.what();
    } catch (const std::exception& e) {
        result.exit_code = kExitNumerical;
        result.message = fmt::format("unexpected failure: {}", e.what());
    }
    result.artifacts = out.names();

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    nlohmann::ordered_json manifest;
    manifest["schema_version"] = kSchemaVersion;
    manifest["tool"] = "regime";
    manifest["version"] = kToolVersion;
    manifest["libraries"] = {
        {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                              EIGEN_MINOR_VERSION)},
        {"boost", fmt::format("{}.{}.{}", BOOST_VERSION / 100000, BOOST_VERSION / 100 % 1000,
                              BOOST_VERSION % 100)},
        {"fmt", FMT_VERSION}};
    manifest["pipeline"] = to_string(config.pipeline);
    manifest["seed"] = config.seed;
    manifest["config_file"] = "config.resolved";
    manifest["config"] = settings;
    manifest["status"] = result.exit_code == kExitOk ? "ok" : "failed";
    manifest["exit_code"] = result.exit_code;
    manifest["error"] = result.message.empty() ? nlohmann::ordered_json(nullptr)
                                               : nlohmann::ordered_json(result.message);
    manifest["partial"] = result.exit_code != kExitOk && !result.artifacts.empty();
    manifest["artifacts"] = result.artifacts;
    manifest["summary"] = summary;
    manifest["wall_time_seconds"] = seconds;
    std::ofstream(config.out_dir / "manifest.json") << manifest.dump(2) << '\n';
    return result;
}

}  // namespace regime
