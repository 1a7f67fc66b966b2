#pragma once

#include <regime/random.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace regime {

/// One firm's benchmarked performance, observed at a subset of grid times 1..n.
struct FirmSeries {
    std::string firm_id;
    /// Strictly increasing grid times in 1..n.
    std::vector<int> times;
    std::vector<double> values;

    std::size_t size() const noexcept { return times.size(); }
    /// Throws ValidationError unless the series is well formed on the grid 1..n.
    void validate(int n) const;
};

/// Degrees of freedom of the block marginal for a block of size |s|.
enum class DofConvention {
    /// a + |s|
    Augmented,
    /// a, the usual normal/inverse-gamma result
    Prior,
};

/// Prior settings for the piecewise-constant changepoint model.
///
/// Block variances are IG(a/2, b/2), the block level is N(0, sigma^2 tau2),
/// and omega ~ Dirichlet(alpha) over hypotheses 0..n.
struct Hyper {
    double a = 2.0;
    double b = 2.0;
    double tau2 = 10.0;
    int n = 0;
    std::vector<double> alpha;
    DofConvention dof = DofConvention::Augmented;

    /// alpha_0 = 0.8, alpha_n = 0.1, alpha_k = 0.1 / (n - 1) in between.
    static Hyper defaults(int n);
    /// Same shape, with custom end masses; interior mass is split evenly.
    static std::vector<double> make_alpha(int n, double alpha0, double alpha_n,
                                          double interior_total);
    void validate() const;
    double degrees_of_freedom(std::size_t block_size) const;
};

struct MarginalTable {
    std::string firm_id;
    /// Entry k is log p(y | gamma = k), k = 0..n.
    std::vector<double> log_lik;
};

struct ChangepointPosterior {
    std::string firm_id;
    std::vector<double> probs;
    /// max over 0 < j < n of probs[j]; zero when n < 2.
    double pm = 0.0;
    /// The maximizing j (0 when there is no interior hypothesis).
    std::size_t argmax_interior = 0;
};

struct OmegaState {
    std::vector<double> omega;
    std::vector<long> counts;
};

/// Log density of the block's multivariate-T marginal.
///
/// Scale matrix (b/a)(I + tau2 11') for a signal block and (b/a) I otherwise,
/// evaluated through the rank-one determinant and Sherman-Morrison quadratic
/// form. An empty block contributes 0.
double block_log_marginal(std::span<const double> y, const Hyper& hyper, bool signal);

/// Same density from sufficient statistics (size, sum, sum of squares).
double block_log_marginal(std::size_t size, double sum, double sum_sq, const Hyper& hyper,
                          bool signal);

/// All n + 1 hypothesis log-likelihoods for one firm.
MarginalTable precompute_marginals(const FirmSeries& firm, const Hyper& hyper);

/// p(gamma = k | y, omega), normalized in log space.
std::vector<double> gamma_conditional(const MarginalTable& table, std::span<const double> omega);

/// One draw from Dirichlet(alpha + counts). Small shapes are drawn in log space.
std::vector<double> sample_omega(std::span<const long> counts, std::span<const double> alpha,
                                 std::mt19937_64& rng);

struct GibbsOptions {
    int iters = 3000;
    int burn_in = 500;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    /// Average gamma_conditional over sweeps instead of counting draws.
    bool rao_blackwell = false;
    /// Hold omega at this vector and skip its update.
    std::optional<std::vector<double>> fixed_omega;
};

struct ScreenResult {
    std::vector<ChangepointPosterior> posteriors;
    /// Post-burn-in average of the omega draws.
    std::vector<double> omega_mean;
    /// Final sampler state.
    OmegaState last;
};

/// Collapsed Gibbs sampler over the changepoint indicators and omega.
///
/// Each sweep draws every firm's indicator from its conditional and then
/// omega from its Dirichlet conditional. Firm i consumes one uniform per sweep
/// from its own stream derive_stream(seed, 1, i), so results do not depend on
/// the thread count.
ScreenResult gibbs_screen(const std::vector<FirmSeries>& firms, const Hyper& hyper,
                          const GibbsOptions& options = {});

/// Fills pm and argmax_interior from probs.
ChangepointPosterior summarize_posterior(std::string firm_id, std::vector<double> probs);

struct ScreenHit {
    std::string firm_id;
    double pm = 0.0;
    /// Grid time of the most probable interior changepoint.
    std::size_t changepoint = 0;
    std::size_t rank = 0;
};

/// Firms with pm >= cutoff, by pm descending then firm id.
std::vector<ScreenHit> screen(const std::vector<ChangepointPosterior>& posteriors, double cutoff);

/// Firms placed on a shared grid of years; grid time k is years[k - 1].
struct FirmCohort {
    std::vector<int> years;
    std::vector<FirmSeries> firms;

    int n() const noexcept { return static_cast<int>(years.size()); }
};

struct CohortFilter {
    std::vector<FirmSeries> firms;
    std::size_t retained = 0;
    std::size_t dropped = 0;
};

/// Keeps firms with at least `min_obs` observations.
CohortFilter filter_cohort(const std::vector<FirmSeries>& firms, std::size_t min_obs);

}  // namespace regime
