#pragma once

#include <regime/changepoint.hpp>
#include <regime/factor_model.hpp>
#include <regime/graph_select.hpp>
#include <regime/panel.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace regime {

/// Piecewise-stationary Gaussian panel with a known precision matrix per regime.
struct ContagionSimSpec {
    std::vector<std::string> labels;
    std::size_t rows = 1250;
    /// First row of each regime after the first, ascending.
    std::vector<std::size_t> boundaries;
    /// One symmetric positive-definite matrix per regime.
    std::vector<Eigen::MatrixXd> precisions;
    /// Multiplies every residual draw.
    double scale = 0.01;
    /// Also draw four factors and load every column on them.
    bool factor_structure = false;
    Date start = Date::parse("2006-01-02");

    void validate() const;
};

struct ContagionSim {
    ReturnPanel returns;
    /// Present when factor_structure was requested.
    std::optional<FactorPanel> factors;
    /// The residual draws, before any factor loading.
    ResidualPanel noise;
    std::vector<std::size_t> regime_starts;
    std::vector<Adjacency> truth;
};

/// Edges of a precision matrix (nonzero off-diagonal entries).
Adjacency precision_support(const Eigen::MatrixXd& precision);

/// Ten series in two chain-structured blocks. The partial correlation between
/// the first two nodes changes sign at `boundary`; nothing else changes.
ContagionSimSpec regime_flip_spec(std::size_t rows = 1250, std::size_t boundary = 625,
                                  double edge_strength = 0.4);

ContagionSim simulate_contagion(const ContagionSimSpec& spec, std::uint64_t seed);

/// Firm cohort drawn from the piecewise-constant model.
struct FirmSimSpec {
    std::size_t firms = 200;
    int n = 30;
    int first_year = 1970;
    /// Share of firms with one planted changepoint (rounded to a count).
    double changepoint_fraction = 0.1;
    /// Share of firms with a constant nonzero level and no split.
    double global_fraction = 0.0;
    /// Changepoint grid times (last year of the first epoch) are drawn from this range.
    int min_location = 5;
    int max_location = 25;
    /// When non-empty, planted firms take these grid times in turn instead.
    std::vector<int> locations;
    /// Level shift in units of the firm's noise standard deviation; sign is random.
    double jump = 6.0;
    double noise_sd_min = 1.0;
    double noise_sd_max = 1.0;
    /// Exactly this many observed years per firm when nonzero; otherwise each
    /// year is dropped with probability missing_rate.
    std::size_t obs_per_firm = 0;
    double missing_rate = 0.0;
    /// Keep the years on both sides of a planted changepoint observed.
    bool identifiable = true;

    void validate() const;
};

struct FirmSim {
    FirmCohort cohort;
    /// Generating hypothesis per firm: 0 null, k in 1..n-1 changepoint, n global level.
    std::vector<int> truth;
};

FirmSim simulate_firms(const FirmSimSpec& spec, std::uint64_t seed);

}  // namespace regime
