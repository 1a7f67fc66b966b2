#pragma once

#include <regime/error.hpp>

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace regime {

/// Regressor matrix with an optional leading column of ones.
///
/// Predictor indices used throughout the library exclude the intercept
/// column: predictor j lives in column j + 1 when an intercept is present.
class DesignMatrix {
public:
    static DesignMatrix with_intercept(const Eigen::MatrixXd& predictors);
    static DesignMatrix without_intercept(const Eigen::MatrixXd& predictors);

    /// Takes a full matrix as-is. When `intercept_included` the first column must be all ones.
    DesignMatrix(Eigen::MatrixXd values, bool intercept_included);

    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }
    /// Number of non-intercept columns.
    Eigen::Index predictors() const noexcept { return values_.cols() - (intercept_ ? 1 : 0); }
    bool intercept_included() const noexcept { return intercept_; }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    /// The predictor block, i.e. values() without the intercept column.
    Eigen::MatrixXd predictor_block() const;

private:
    Eigen::MatrixXd values_;
    bool intercept_;
};

struct RegressionFit {
    /// Zero when the design had no intercept.
    double intercept = 0.0;
    /// One coefficient per entry of `subset`.
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    double rss = 0.0;
    /// Predictor indices (intercept excluded), ascending.
    std::vector<std::size_t> subset;
};

struct SubsetModel {
    std::vector<std::size_t> subset;
    RegressionFit fit;
    double bic = 0.0;
    /// Candidate subsets visited, including skipped ones (2^p).
    std::size_t candidates_evaluated = 0;
    /// Candidate subsets dropped for rank deficiency.
    std::vector<std::vector<std::size_t>> skipped;
};

/// Lasso did not reach the KKT tolerance within the sweep budget.
class LassoNonConvergence : public NumericalError {
public:
    LassoNonConvergence(const std::string& what, Eigen::VectorXd last_iterate, double kkt_violation)
        : NumericalError(what), last_iterate_(std::move(last_iterate)), violation_(kkt_violation) {}

    const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
    double kkt_violation() const noexcept { return violation_; }

private:
    Eigen::VectorXd last_iterate_;
    double violation_;
};

/// Floor applied to the residual sum of squares before taking logs.
inline constexpr double kRssFloor = 1e-12;
/// Largest predictor count accepted by exhaustive subset search.
inline constexpr std::size_t kMaxSubsetPredictors = 25;

/// Least squares via column-pivoted QR. Throws RankDeficientError naming the
/// dependent design columns.
RegressionFit ols_fit(const DesignMatrix& x, const Eigen::VectorXd& y);

/// Gaussian-likelihood BIC: n ln(max(rss, kRssFloor) / n) + k ln(n).
double bic_score(double rss, std::size_t n, std::size_t k);

/// Exhaustive search over all 2^p predictor subsets, minimizing BIC.
///
/// The intercept (when present) is in every candidate and is not counted in k.
/// Ties go to the smaller subset, then to the lexicographically smaller index
/// list. Candidates whose columns are collinear are skipped and recorded.
SubsetModel best_subset_bic(const DesignMatrix& x, const Eigen::VectorXd& y);

/// argmin ||y - X b||^2 + lambda ||b||^2 with the intercept unpenalized.
RegressionFit ridge_fit(const DesignMatrix& x, const Eigen::VectorXd& y, double lambda);

struct LassoOptions {
    int max_sweeps = 10000;
    double kkt_tolerance = 1e-7;
};

/// Coordinate descent for (1/2n)||y - X b||^2 + lambda ||b||_1.
///
/// Columns are centered (with an intercept) and scaled to unit variance for the
/// sweeps only; the penalty and the KKT conditions refer to the original
/// columns, so |x_j' r / n| <= lambda holds for inactive j and equality with
/// sign(b_j) for active j, each to within `kkt_tolerance`.
RegressionFit lasso_fit(const DesignMatrix& x, const Eigen::VectorXd& y, double lambda,
                        const LassoOptions& options = {});

/// Largest |x_j' r / n| deviation from the lasso stationarity conditions at `fit`.
double lasso_kkt_violation(const DesignMatrix& x, const RegressionFit& fit, double lambda);

}  // namespace regime
