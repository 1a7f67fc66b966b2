#pragma once

#include <regime/panel.hpp>

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace regime {

/// Rolling-window geometry, counted in observations.
struct WindowSpec {
    std::size_t length = 150;
    std::size_t step = 5;

    /// Requires length >= columns + 2 and step >= 1.
    void validate(std::size_t columns) const;
};

/// Number of complete windows over `rows` observations; trailing partial windows are dropped.
std::size_t window_count(std::size_t rows, const WindowSpec& spec);

enum class Estimator { BicSubset, Ols, Ridge, Lasso };
enum class EdgeRule { And, Or };

Estimator parse_estimator(std::string_view name);
std::string_view to_string(Estimator e);
EdgeRule parse_edge_rule(std::string_view name);
std::string_view to_string(EdgeRule r);

struct SelectionOptions {
    Estimator estimator = Estimator::BicSubset;
    /// Penalty for the ridge and lasso baselines.
    double lambda = 1.0;
    EdgeRule rule = EdgeRule::And;
    /// Worker count for rolling_graphs.
    std::size_t threads = 1;
};

/// The regression of one node on all the others in a window.
struct NeighborhoodSet {
    std::size_t node = 0;
    std::string label;
    /// Node indices with a nonzero coefficient, ascending; never contains `node`.
    std::vector<std::size_t> neighbors;
    /// Aligned with `neighbors`.
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    double rss = 0.0;
    std::size_t observations = 0;
    /// rss / (n - k - 1).
    double residual_variance = 0.0;
    /// Models scored while choosing the neighborhood (2^(p-1) for subset search).
    std::size_t candidates_evaluated = 0;

    /// Coefficient on node j, zero when j was not selected.
    double coefficient(std::size_t j) const;
    /// rss / (n - 1); the conditional variance that inverts the sample covariance.
    double conditional_variance() const;
};

/// Symmetric 0/1 matrix with a zero diagonal.
using Adjacency = Eigen::MatrixXi;

struct CovarianceEstimate {
    Eigen::MatrixXd sigma;
    Eigen::MatrixXd omega;
    /// Diagonal shift applied to omega to restore positive definiteness (0 if none).
    double eigen_shift = 0.0;
};

struct IndependenceTest {
    double statistic = 0.0;
    double pvalue = 1.0;
    std::size_t dof = 0;
};

struct GraphSnapshot {
    std::size_t window_index = 0;
    std::size_t start_row = 0;
    Date window_start;
    Adjacency adjacency;
    Eigen::MatrixXd sigma;
    Eigen::MatrixXd omega;
    double eigen_shift = 0.0;
    IndependenceTest empty_graph;
    std::vector<NeighborhoodSet> neighborhoods;
};

/// Regresses column `node` of `window` on every other column using the configured estimator.
NeighborhoodSet select_neighborhood(const Eigen::MatrixXd& window, std::size_t node,
                                    const SelectionOptions& options = {},
                                    std::string label = {});

/// AND rule: edge iff each node selected the other. OR rule: either selected the other.
Adjacency assemble_adjacency(const std::vector<NeighborhoodSet>& neighborhoods,
                             EdgeRule rule = EdgeRule::And);

/// Builds a precision matrix from the node regressions and inverts it.
///
/// omega_ii = 1 / v_i and omega_ij = -b_{i<-j} / v_i, with v_i the conditional
/// variance of node i. Off-diagonal entries are averaged with their transpose
/// on edges and set to zero elsewhere. If the result is not positive definite
/// its diagonal is raised by |lambda_min| + 1e-8.
CovarianceEstimate reconstruct_covariance(const std::vector<NeighborhoodSet>& neighborhoods,
                                          const Adjacency& adjacency);

/// Bartlett-corrected likelihood-ratio test of mutual independence:
/// -(n - 1 - (2p + 5) / 6) ln det R against chi-square with p(p - 1)/2 dof.
IndependenceTest empty_graph_test(const Eigen::MatrixXd& window);

/// Full selection procedure on one window (rows are observations).
GraphSnapshot analyze_window(const Eigen::MatrixXd& window, const std::vector<std::string>& labels,
                             const SelectionOptions& options = {});

/// One snapshot per window start 0, step, 2 step, ...
std::vector<GraphSnapshot> rolling_graphs(const ResidualPanel& panel, const WindowSpec& spec,
                                          const SelectionOptions& options = {});

/// Node index for `label` in the snapshots' neighborhoods.
std::size_t node_index(const std::vector<GraphSnapshot>& snapshots, std::string_view label);

/// Row sums of the adjacency matrix for `node`.
std::vector<int> degree_series(const std::vector<GraphSnapshot>& snapshots, std::size_t node);
std::vector<int> degree_series(const std::vector<GraphSnapshot>& snapshots,
                               std::string_view label);

/// Raw neighborhood sizes for `node`, before the edge rule is applied.
std::vector<int> neighborhood_size_series(const std::vector<GraphSnapshot>& snapshots,
                                          std::size_t node);

/// Coefficient of j in i's selected regression, window by window.
std::vector<double> coefficient_series(const std::vector<GraphSnapshot>& snapshots,
                                       std::size_t i, std::size_t j);
std::vector<double> coefficient_series(const std::vector<GraphSnapshot>& snapshots,
                                       std::string_view i, std::string_view j);

}  // namespace regime
