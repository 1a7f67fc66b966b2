// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails.

#include "oracles.hpp"

#include <regime/changepoint.hpp>
#include <regime/graph_select.hpp>
#include <regime/pipeline.hpp>
#include <regime/regression.hpp>
#include <regime/simulate.hpp>

#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

using namespace regime;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double time_limit,
               const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, fmt::format("threw: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt::format("{:.2f}s", secs);
    if (time_limit > 0.0) {
        timing += fmt::format(" of {:.0f}s", time_limit);
        if (secs >= time_limit) o.pass = false;
    }
    fmt::print("{} [{}] {}: {} ({})\n", o.pass ? "PASS" : "FAIL", id, name, o.detail, timing);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
}

double dense_block(const std::vector<double>& y, const Hyper& h, bool signal) {
    if (y.empty()) return 0.0;
    const auto d = static_cast<Eigen::Index>(y.size());
    Eigen::MatrixXd scale = Eigen::MatrixXd::Identity(d, d);
    if (signal) scale += h.tau2 * Eigen::MatrixXd::Ones(d, d);
    scale *= h.b / h.a;
    const double dof = h.dof == DofConvention::Augmented ? h.a + static_cast<double>(d) : h.a;
    return oracle::mvt_log_density(Eigen::Map<const Eigen::VectorXd>(y.data(), d), scale, dof);
}

std::vector<double> prior_mean(const Hyper& h) {
    const double total = std::accumulate(h.alpha.begin(), h.alpha.end(), 0.0);
    std::vector<double> w;
    for (double a : h.alpha) w.push_back(a / total);
    return w;
}

struct Recovery {
    int found = 0;
    int false_pos = 0;
    int missed = 0;
};

Recovery planted_recovery(const FirmSimSpec& spec, std::uint64_t seed) {
    const auto sim = simulate_firms(spec, seed);
    GibbsOptions opts;
    opts.seed = seed + 1000;
    const auto res = gibbs_screen(sim.cohort.firms, Hyper::defaults(spec.n), opts);
    Recovery r;
    for (const auto& hit : screen(res.posteriors, 0.95)) {
        std::size_t i = 0;
        while (sim.cohort.firms[i].firm_id != hit.firm_id) ++i;
        const int truth = sim.truth[i];
        if (truth > 0 && truth < spec.n &&
            std::abs(static_cast<int>(hit.changepoint) - truth) <= 1) {
            ++r.found;
        } else {
            ++r.false_pos;
        }
    }
    int planted = 0;
    for (int g : sim.truth) planted += g > 0 && g < spec.n;
    r.missed = planted - r.found;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Runs once, reruns from the written config.resolved elsewhere and compares
/// every listed artifact byte for byte.
bool rerun_identical(Pipeline p, const Settings& settings, const fs::path& dir,
                     std::string& note) {
    Settings first = settings;
    first["out"] = (dir / "first").string();
    const auto a = run(RunConfig::from_settings(p, first));
    if (a.exit_code != kExitOk) {
        note = fmt::format("{} failed: {}", to_string(p), a.message);
        return false;
    }
    Settings again = load_settings(dir / "first" / "config.resolved");
    again["out"] = (dir / "second").string();
    const auto b = run(RunConfig::from_settings(p, again));
    if (b.exit_code != kExitOk || b.artifacts != a.artifacts) {
        note = fmt::format("{} rerun differs in status or artifact list", to_string(p));
        return false;
    }
    for (const auto& name : a.artifacts) {
        if (slurp(dir / "first" / name) != slurp(dir / "second" / name)) {
            note = fmt::format("{}: {} differs", to_string(p), name);
            return false;
        }
    }
    note += fmt::format("{}{} {} files", note.empty() ? "" : ", ", to_string(p), a.artifacts.size());
    return true;
}

}  // namespace

int main() {
    criterion(1, "T-marginal matches dense oracle", 10.0, [] {
        std::mt19937_64 rng(101);
        std::uniform_int_distribution<int> len(1, 30);
        std::uniform_real_distribution<double> unif(0.2, 5.0);
        double worst = 0.0;
        for (int rep = 0; rep < 1000; ++rep) {
            Hyper h = Hyper::defaults(30);
            h.a = unif(rng);
            h.b = unif(rng);
            h.tau2 = 2.0 * unif(rng);
            h.dof = rep % 2 ? DofConvention::Prior : DofConvention::Augmented;
            const bool signal = rep % 4 < 2;
            const int d = len(rng);
            const Eigen::VectorXd g = oracle::gaussian(d, rng);
            const double shift = signal ? 3.0 * unif(rng) : 0.0;
            std::vector<double> y(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) y[static_cast<std::size_t>(i)] = shift + g(i);
            worst = std::max(worst, std::abs(block_log_marginal(y, h, signal) -
                                             dense_block(y, h, signal)));
        }
        return Outcome{worst < 1e-10, fmt::format("1000 inputs, max abs error {:.2e}", worst)};
    });

    criterion(2, "fixed-omega sampler frequencies", 60.0, [] {
        FirmSimSpec spec;
        spec.firms = 10;
        spec.changepoint_fraction = 0.5;
        spec.jump = 2.0;
        spec.missing_rate = 0.3;
        const auto sim = simulate_firms(spec, 202);
        const auto h = Hyper::defaults(spec.n);
        GibbsOptions opts;
        opts.iters = 100000;
        opts.burn_in = 0;
        opts.seed = 203;
        opts.fixed_omega = prior_mean(h);
        const auto res = gibbs_screen(sim.cohort.firms, h, opts);
        double worst = 0.0;
        for (std::size_t i = 0; i < sim.cohort.firms.size(); ++i) {
            const auto exact =
                gamma_conditional(precompute_marginals(sim.cohort.firms[i], h), *opts.fixed_omega);
            worst = std::max(worst, oracle::total_variation(res.posteriors[i].probs, exact));
        }
        return Outcome{worst <= 0.01,
                       fmt::format("10 firms x 100000 draws, max TV {:.4f}", worst)};
    });

    criterion(3, "planted changepoint recovery", 0.0, [] {
        FirmSimSpec spec;
        spec.obs_per_firm = 25;
        spec.jump = 6.0;
        spec.locations = {8, 13, 18, 23};
        const auto r = planted_recovery(spec, 303);
        return Outcome{r.found == 20 && r.false_pos <= 1,
                       fmt::format("200 firms, 20 planted at years 8/13/18/23: found {}, "
                                   "false positives {}",
                                   r.found, r.false_pos)};
    });
    {
        FirmSimSpec spec;
        spec.obs_per_firm = 25;
        const auto r = planted_recovery(spec, 303);
        fmt::print("INFO [3] diagnostic, planted years spread uniformly over 5..25: found {}, "
                   "missed {}, false positives {}\n",
                   r.found, r.missed, r.false_pos);
    }

    criterion(4, "subset search, ridge and lasso oracles", 0.0, [] {
        std::mt19937_64 rng(404);
        std::uniform_int_distribution<int> pick_p(1, 8);
        std::uniform_int_distribution<int> pick_n(20, 60);
        std::uniform_real_distribution<double> coef(-1.0, 1.0);
        int subset_mismatch = 0;
        for (int rep = 0; rep < 500; ++rep) {
            const int p = pick_p(rng);
            const int n = pick_n(rng);
            const Eigen::MatrixXd x = oracle::gaussian(n, p, rng);
            Eigen::VectorXd y = oracle::gaussian(n, rng);
            for (int j = 0; j < p; ++j) {
                if (rng() % 2) y += coef(rng) * x.col(j);
            }
            const auto m = best_subset_bic(DesignMatrix::with_intercept(x), y);
            const auto ref = oracle::naive_best_subset(x, y);
            if (m.subset != ref.subset || std::abs(m.bic - ref.bic) > 1e-8) ++subset_mismatch;
        }
        double ridge_err = 0.0;
        double kkt = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
            const int p = pick_p(rng);
            const Eigen::MatrixXd x = oracle::gaussian(40, p, rng);
            const Eigen::VectorXd y = x.col(0) + oracle::gaussian(40, rng);
            const double lambda = std::pow(10.0, coef(rng) * 2.0);
            const auto d = DesignMatrix::with_intercept(x);
            const auto fit = ridge_fit(d, y, lambda);
            const Eigen::VectorXd ref = oracle::ridge_closed_form(d.values(), y, lambda, true);
            ridge_err = std::max({ridge_err, std::abs(fit.intercept - ref(0)),
                                  (fit.coefficients - ref.tail(p)).cwiseAbs().maxCoeff()});
            const double l1 = 0.3 * std::abs(coef(rng));
            kkt = std::max(kkt, lasso_kkt_violation(d, lasso_fit(d, y, l1), l1));
        }
        return Outcome{subset_mismatch == 0 && ridge_err < 1e-8 && kkt <= 1e-7,
                       fmt::format("subset mismatches {}/500, ridge max error {:.1e}, "
                                   "lasso max KKT violation {:.1e}",
                                   subset_mismatch, ridge_err, kkt)};
    });

    criterion(5, "graph recovery on block-sparse panel", 0.0, [] {
        const auto spec = regime_flip_spec(1250, 625);
        const auto sim = simulate_contagion(spec, 505);
        const WindowSpec win{150, 5};
        const auto snaps = rolling_graphs(sim.noise, win);
        double f1 = 0.0;
        int inside = 0;
        bool symmetric = true;
        bool candidates = true;
        for (const auto& s : snaps) {
            symmetric = symmetric && s.adjacency == s.adjacency.transpose();
            for (const auto& nb : s.neighborhoods) candidates = candidates && nb.candidates_evaluated == 512;
            const std::size_t end = s.start_row + win.length;
            int regime = -1;
            if (end <= spec.boundaries[0]) regime = 0;
            if (s.start_row >= spec.boundaries[0]) regime = 1;
            if (regime < 0) continue;
            f1 += oracle::edge_f1(s.adjacency, sim.truth[static_cast<std::size_t>(regime)]);
            ++inside;
        }
        f1 /= inside;
        return Outcome{f1 >= 0.8 && symmetric && candidates && snaps.size() == 221,
                       fmt::format("{} windows ({} inside one regime), mean F1 {:.3f}, "
                                   "AND symmetric {}, 512 candidates {}",
                                   snaps.size(), inside, f1, symmetric, candidates)};
    });

    criterion(6, "null behavior", 0.0, [] {
        std::mt19937_64 rng(606);
        std::vector<double> p;
        for (int rep = 0; rep < 5000; ++rep) {
            p.push_back(empty_graph_test(oracle::gaussian(150, 10, rng)).pvalue);
        }
        const double ks = oracle::ks_uniform(p);

        FirmSimSpec spec;
        spec.changepoint_fraction = 0.0;
        const auto sim = simulate_firms(spec, 607);
        GibbsOptions opts;
        opts.seed = 608;
        const auto res = gibbs_screen(sim.cohort.firms, Hyper::defaults(30), opts);
        const auto top = std::max_element(res.omega_mean.begin(), res.omega_mean.end());
        const bool omega0_max = top == res.omega_mean.begin();
        const auto hits = screen(res.posteriors, 0.95).size();
        const double share = static_cast<double>(hits) / 200.0;
        return Outcome{ks < 0.02 && omega0_max && share <= 0.01,
                       fmt::format("(a) KS {:.4f} over 5000 windows; (b) omega_0 {:.3f} maximal "
                                   "{}, {} of 200 null firms pass 0.95",
                                   ks, res.omega_mean[0], omega0_max, hits)};
    });

    criterion(7, "regime flip changes the coefficient sign", 0.0, [] {
        const auto spec = regime_flip_spec(1250, 625);
        const auto sim = simulate_contagion(spec, 707);
        const WindowSpec win{150, 5};
        const auto snaps = rolling_graphs(sim.noise, win);
        const auto series = coefficient_series(snaps, "DEU", "ITA");
        // Best single step from positive to negative: the split that
        // minimizes sign disagreements.
        std::size_t best = 0;
        long best_err = std::numeric_limits<long>::max();
        for (std::size_t c = 1; c < series.size(); ++c) {
            long err = 0;
            for (std::size_t w = 0; w < series.size(); ++w) {
                err += w < c ? series[w] <= 0.0 : series[w] >= 0.0;
            }
            if (err < best_err) {
                best_err = err;
                best = c;
            }
        }
        // The crossing lies between the centers of windows best-1 and best.
        const double crossing =
            static_cast<double>(snaps[best - 1].start_row + snaps[best].start_row + win.length) /
            2.0;
        const double distance = std::abs(crossing - static_cast<double>(spec.boundaries[0]));
        const bool flips = series.front() > 0.0 && series.back() < 0.0;
        return Outcome{flips && distance <= static_cast<double>(win.length),
                       fmt::format("first {:.3f}, last {:.3f}, zero crossing at row {:.0f}, "
                                   "{:.0f} rows from the boundary (limit {})",
                                   series.front(), series.back(), crossing, distance,
                                   win.length)};
    });

    criterion(8, "reruns from the manifest are byte-identical", 0.0, [] {
        const fs::path root = fs::temp_directory_path() / "regime_acceptance";
        fs::remove_all(root);
        std::string note;
        bool ok = rerun_identical(Pipeline::SimulateContagion, {{"seed", "808"}},
                                  root / "simulate-contagion", note);
        ok = ok && rerun_identical(Pipeline::SimulateFirms, {{"seed", "809"}},
                                   root / "simulate-firms", note);
        const fs::path sim_c = root / "simulate-contagion" / "first";
        ok = ok && rerun_identical(Pipeline::Contagion,
                                   {{"returns", (sim_c / "returns.csv").string()},
                                    {"factors", (sim_c / "factors.csv").string()},
                                    {"threads", "2"}},
                                   root / "contagion", note);
        ok = ok && rerun_identical(
                       Pipeline::Screen,
                       {{"firms", (root / "simulate-firms" / "first" / "firms.csv").string()},
                        {"seed", "810"}},
                       root / "screen", note);
        return Outcome{ok, note};
    });

    fmt::print("{} of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
