#include <regime/simulate.hpp>

#include <regime/error.hpp>
#include <regime/random.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace regime {
namespace {

Eigen::VectorXd normal_vector(Eigen::Index size, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        z(i) = normal(rng);
    }
    return z;
}

}  // namespace

void ContagionSimSpec::validate() const {
    const auto p = static_cast<Eigen::Index>(labels.size());
    if (p < 1) {
        throw ValidationError("simulation needs at least one series");
    }
    if (rows < 1) {
        throw ValidationError("simulation needs at least one row");
    }
    if (precisions.size() != boundaries.size() + 1) {
        throw ValidationError(fmt::format("{} boundaries need {} precision matrices, got {}",
                                          boundaries.size(), boundaries.size() + 1,
                                          precisions.size()));
    }
    std::size_t prev = 0;
    for (auto b : boundaries) {
        if (b <= prev || b >= rows) {
            throw ValidationError("regime boundaries must be increasing and inside (0, rows)");
        }
        prev = b;
    }
    for (std::size_t r = 0; r < precisions.size(); ++r) {
        const auto& m = precisions[r];
        if (m.rows() != p || m.cols() != p) {
            throw ValidationError(fmt::format("precision {} is not {}x{}", r, p, p));
        }
        if (!m.isApprox(m.transpose(), 1e-12)) {
            throw ValidationError(fmt::format("precision {} is not symmetric", r));
        }
        if (Eigen::LLT<Eigen::MatrixXd>(m).info() != Eigen::Success) {
            throw ValidationError(fmt::format("precision {} is not positive definite", r));
        }
    }
    if (!(scale > 0.0)) {
        throw ValidationError("simulation scale must be positive");
    }
}

Adjacency precision_support(const Eigen::MatrixXd& precision) {
    Adjacency a = Adjacency::Zero(precision.rows(), precision.cols());
    for (Eigen::Index i = 0; i < precision.rows(); ++i) {
        for (Eigen::Index j = 0; j < precision.cols(); ++j) {
            a(i, j) = (i != j && precision(i, j) != 0.0) ? 1 : 0;
        }
    }
    return a;
}

ContagionSimSpec regime_flip_spec(std::size_t rows, std::size_t boundary, double edge_strength) {
    ContagionSimSpec spec;
    spec.labels = {"DEU", "ITA", "ESP", "FRA", "BEL", "GBR", "CHE", "SWE", "NLD", "EUR"};
    spec.rows = rows;
    spec.boundaries = {boundary};

    Eigen::MatrixXd calm = Eigen::MatrixXd::Identity(10, 10);
    for (int block : {0, 5}) {
        for (int i = block; i < block + 4; ++i) {
            calm(i, i + 1) = -edge_strength;
            calm(i + 1, i) = -edge_strength;
        }
    }
    Eigen::MatrixXd crisis = calm;
    crisis(0, 1) = edge_strength;
    crisis(1, 0) = edge_strength;
    spec.precisions = {calm, crisis};
    return spec;
}

ContagionSim simulate_contagion(const ContagionSimSpec& spec, std::uint64_t seed) {
    spec.validate();
    const auto p = static_cast<Eigen::Index>(spec.labels.size());
    const auto rows = static_cast<Eigen::Index>(spec.rows);

    ContagionSim sim;
    sim.regime_starts.push_back(0);
    sim.regime_starts.insert(sim.regime_starts.end(), spec.boundaries.begin(),
                             spec.boundaries.end());
    for (const auto& m : spec.precisions) {
        sim.truth.push_back(precision_support(m));
    }

    sim.noise.dates = business_days(spec.start, spec.rows);
    sim.noise.labels = spec.labels;
    sim.noise.values.resize(rows, p);
    auto rng = derive_stream(seed, StreamTag::ContagionNoise, 0);
    for (std::size_t r = 0; r < spec.precisions.size(); ++r) {
        const auto begin = static_cast<Eigen::Index>(sim.regime_starts[r]);
        const auto end =
            r + 1 < sim.regime_starts.size() ? static_cast<Eigen::Index>(sim.regime_starts[r + 1]) : rows;
        const Eigen::LLT<Eigen::MatrixXd> llt(spec.precisions[r]);
        // x = L^{-T} z has covariance (L L')^{-1}.
        const auto upper = llt.matrixU();
        for (Eigen::Index t = begin; t < end; ++t) {
            const Eigen::VectorXd z = normal_vector(p, rng);
            sim.noise.values.row(t) = spec.scale * upper.solve(z).transpose();
        }
    }

    sim.returns = sim.noise;
    if (spec.factor_structure) {
        auto frng = derive_stream(seed, StreamTag::ContagionFactors, 0);
        std::normal_distribution<double> normal;
        FactorPanel f;
        f.dates = sim.noise.dates;
        f.x_us.resize(rows);
        f.x_eu.resize(rows);
        f.delta_us.resize(rows);
        f.delta_eu.resize(rows);
        for (Eigen::Index t = 0; t < rows; ++t) {
            f.x_us(t) = 0.01 * normal(frng);
            f.x_eu(t) = 0.6 * f.x_us(t) + 0.008 * normal(frng);
            f.delta_us(t) = 0.5 * normal(frng);
            f.delta_eu(t) = 0.8 * f.delta_us(t) + 0.3 * normal(frng);
        }
        const Eigen::VectorXd excess = excess_eu_volatility(f.delta_us, f.delta_eu);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (Eigen::Index j = 0; j < p; ++j) {
            const double beta_us = 0.2 + 0.4 * unif(frng);
            const double beta_eu = 0.6 + 0.6 * unif(frng);
            const double gamma_us = -0.005 * unif(frng);
            const double gamma_eu = -0.005 * unif(frng);
            sim.returns.values.col(j) += beta_us * f.x_us + beta_eu * f.x_eu +
                                         gamma_us * f.delta_us + gamma_eu * excess;
        }
        sim.factors = std::move(f);
    }
    return sim;
}

void FirmSimSpec::validate() const {
    if (firms < 1) {
        throw ValidationError("firm simulation needs at least one firm");
    }
    if (n < 2) {
        throw ValidationError("firm simulation needs n >= 2");
    }
    if (!(changepoint_fraction >= 0.0) || !(global_fraction >= 0.0) ||
        changepoint_fraction + global_fraction > 1.0) {
        throw ValidationError("firm fractions must be nonnegative and sum to at most 1");
    }
    if (min_location < 1 || max_location > n - 1 || min_location > max_location) {
        throw ValidationError(
            fmt::format("changepoint range [{}, {}] must lie inside 1..n-1 = 1..{}", min_location,
                        max_location, n - 1));
    }
    for (int loc : locations) {
        if (loc < 1 || loc > n - 1) {
            throw ValidationError(fmt::format("planted location {} outside 1..{}", loc, n - 1));
        }
    }
    if (!(noise_sd_min > 0.0) || noise_sd_max < noise_sd_min) {
        throw ValidationError("noise standard deviation range is invalid");
    }
    if (obs_per_firm > static_cast<std::size_t>(n)) {
        throw ValidationError("obs_per_firm exceeds the grid length");
    }
    if (identifiable && obs_per_firm == 1) {
        throw ValidationError("identifiable changepoints need at least 2 observations per firm");
    }
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
        throw ValidationError("missing_rate must lie in [0, 1)");
    }
    if (!std::isfinite(jump)) {
        throw ValidationError("jump must be finite");
    }
}

FirmSim simulate_firms(const FirmSimSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t planted =
        static_cast<std::size_t>(std::llround(spec.changepoint_fraction * static_cast<double>(spec.firms)));
    const std::size_t global =
        static_cast<std::size_t>(std::llround(spec.global_fraction * static_cast<double>(spec.firms)));
    if (planted + global > spec.firms) {
        throw ValidationError("rounded firm fractions exceed the cohort size");
    }

    auto rng = derive_stream(seed, StreamTag::FirmSimulation, 0);
    std::vector<int> kind(spec.firms, 0);  // 0 null, 1 changepoint, 2 global
    std::fill_n(kind.begin(), planted, 1);
    std::fill_n(kind.begin() + static_cast<std::ptrdiff_t>(planted), global, 2);
    std::shuffle(kind.begin(), kind.end(), rng);

    FirmSim sim;
    std::size_t next_location = 0;
    for (int y = 0; y < spec.n; ++y) {
        sim.cohort.years.push_back(spec.first_year + y);
    }
    const int width = static_cast<int>(fmt::format("{}", spec.firms).size());

    for (std::size_t i = 0; i < spec.firms; ++i) {
        auto frng = derive_stream(seed, StreamTag::FirmSimulation, i + 1);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> normal;

        const double sd = spec.noise_sd_min + (spec.noise_sd_max - spec.noise_sd_min) * unif(frng);
        const double sign = unif(frng) < 0.5 ? -1.0 : 1.0;
        int gamma = 0;
        if (kind[i] == 1 && !spec.locations.empty()) {
            gamma = spec.locations[next_location++ % spec.locations.size()];
        } else if (kind[i] == 1) {
            gamma = std::uniform_int_distribution<int>(spec.min_location, spec.max_location)(frng);
        } else if (kind[i] == 2) {
            gamma = spec.n;
        }

        std::vector<int> forced;
        if (gamma > 0 && gamma < spec.n && spec.identifiable) {
            forced = {gamma, gamma + 1};
        }
        std::vector<int> times;
        if (spec.obs_per_firm > 0) {
            std::vector<int> pool;
            for (int t = 1; t <= spec.n; ++t) {
                if (std::find(forced.begin(), forced.end(), t) == forced.end()) {
                    pool.push_back(t);
                }
            }
            std::shuffle(pool.begin(), pool.end(), frng);
            times = forced;
            times.insert(times.end(), pool.begin(),
                         pool.begin() + static_cast<std::ptrdiff_t>(spec.obs_per_firm - forced.size()));
        } else {
            for (int t = 1; t <= spec.n; ++t) {
                const bool keep = unif(frng) >= spec.missing_rate;
                if (keep || std::find(forced.begin(), forced.end(), t) != forced.end()) {
                    times.push_back(t);
                }
            }
            if (times.empty()) {
                times.push_back(std::uniform_int_distribution<int>(1, spec.n)(frng));
            }
        }
        std::sort(times.begin(), times.end());

        FirmSeries f;
        f.firm_id = fmt::format("F{:0{}}", i + 1, width);
        f.times = times;
        for (int t : times) {
            double level = 0.0;
            if (gamma == spec.n || (gamma > 0 && t > gamma)) {
                level = sign * spec.jump * sd;
            }
            f.values.push_back(level + sd * normal(frng));
        }
        sim.cohort.firms.push_back(std::move(f));
        sim.truth.push_back(gamma);
    }
    return sim;
}

}  // namespace regime
