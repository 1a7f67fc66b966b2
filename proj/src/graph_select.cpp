#include <regime/graph_select.hpp>

#include <regime/error.hpp>
#include <regime/parallel.hpp>
#include <regime/regression.hpp>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace regime {
namespace {

constexpr double kEigenShiftMargin = 1e-8;

void check_node(std::size_t node, std::size_t p) {
    if (node >= p) {
        throw ValidationError(fmt::format("node {} out of range for {} columns", node, p));
    }
}

template <class E>
[[noreturn]] void rethrow_for_window(const E& e, std::size_t w) {
    throw E(fmt::format("window {}: {}", w, e.what()));
}

}  // namespace

void WindowSpec::validate(std::size_t columns) const {
    if (step < 1) {
        throw ValidationError("window step must be at least 1");
    }
    if (length < columns + 2) {
        throw ValidationError(fmt::format("window length {} is shorter than columns + 2 = {}",
                                          length, columns + 2));
    }
}

std::size_t window_count(std::size_t rows, const WindowSpec& spec) {
    if (spec.step < 1) {
        throw ValidationError("window step must be at least 1");
    }
    if (rows < spec.length) {
        return 0;
    }
    return (rows - spec.length) / spec.step + 1;
}

Estimator parse_estimator(std::string_view name) {
    if (name == "bic-subset") return Estimator::BicSubset;
    if (name == "ols") return Estimator::Ols;
    if (name == "ridge") return Estimator::Ridge;
    if (name == "lasso") return Estimator::Lasso;
    throw ValidationError(fmt::format("unknown estimator '{}'", name));
}

std::string_view to_string(Estimator e) {
    switch (e) {
        case Estimator::BicSubset: return "bic-subset";
        case Estimator::Ols: return "ols";
        case Estimator::Ridge: return "ridge";
        case Estimator::Lasso: return "lasso";
    }
    return "?";
}

EdgeRule parse_edge_rule(std::string_view name) {
    if (name == "and") return EdgeRule::And;
    if (name == "or") return EdgeRule::Or;
    throw ValidationError(fmt::format("unknown edge rule '{}'", name));
}

std::string_view to_string(EdgeRule r) {
    return r == EdgeRule::And ? "and" : "or";
}

double NeighborhoodSet::coefficient(std::size_t j) const {
    const auto it = std::lower_bound(neighbors.begin(), neighbors.end(), j);
    if (it == neighbors.end() || *it != j) {
        return 0.0;
    }
    return coefficients(it - neighbors.begin());
}

double NeighborhoodSet::conditional_variance() const {
    return rss / static_cast<double>(observations - 1);
}

NeighborhoodSet select_neighborhood(const Eigen::MatrixXd& window, std::size_t node,
                                    const SelectionOptions& options, std::string label) {
    const auto p = static_cast<std::size_t>(window.cols());
    const auto n = static_cast<std::size_t>(window.rows());
    check_node(node, p);
    if (n < p + 2) {
        throw ValidationError(fmt::format("window has {} rows; need at least {}", n, p + 2));
    }

    // Predictor a of the node regression is node a (a < node) or a + 1.
    Eigen::MatrixXd others(window.rows(), window.cols() - 1);
    std::vector<std::size_t> node_of(p - 1);
    for (std::size_t a = 0, j = 0; j < p; ++j) {
        if (j == node) {
            continue;
        }
        others.col(static_cast<Eigen::Index>(a)) = window.col(static_cast<Eigen::Index>(j));
        node_of[a++] = j;
    }
    const Eigen::VectorXd y = window.col(static_cast<Eigen::Index>(node));
    const DesignMatrix x = DesignMatrix::with_intercept(others);

    RegressionFit fit;
    std::size_t evaluated = 1;
    switch (options.estimator) {
        case Estimator::BicSubset: {
            SubsetModel m = best_subset_bic(x, y);
            evaluated = m.candidates_evaluated;
            fit = std::move(m.fit);
            break;
        }
        case Estimator::Ols: fit = ols_fit(x, y); break;
        case Estimator::Ridge: fit = ridge_fit(x, y, options.lambda); break;
        case Estimator::Lasso: fit = lasso_fit(x, y, options.lambda); break;
    }

    NeighborhoodSet out;
    out.node = node;
    out.label = std::move(label);
    out.intercept = fit.intercept;
    out.rss = fit.rss;
    out.observations = n;
    out.candidates_evaluated = evaluated;
    std::vector<double> coefs;
    for (std::size_t a = 0; a < fit.subset.size(); ++a) {
        const double b = fit.coefficients(static_cast<Eigen::Index>(a));
        if (b != 0.0) {
            out.neighbors.push_back(node_of[fit.subset[a]]);
            coefs.push_back(b);
        }
    }
    out.coefficients = Eigen::Map<const Eigen::VectorXd>(coefs.data(),
                                                         static_cast<Eigen::Index>(coefs.size()));
    const auto k = out.neighbors.size();
    out.residual_variance = fit.rss / static_cast<double>(n - k - 1);
    return out;
}

Adjacency assemble_adjacency(const std::vector<NeighborhoodSet>& neighborhoods, EdgeRule rule) {
    const auto p = static_cast<Eigen::Index>(neighborhoods.size());
    Adjacency selected = Adjacency::Zero(p, p);
    for (const auto& nb : neighborhoods) {
        check_node(nb.node, neighborhoods.size());
        for (auto j : nb.neighbors) {
            check_node(j, neighborhoods.size());
            if (j == nb.node) {
                throw ValidationError(fmt::format("node {} lists itself as a neighbor", j));
            }
            selected(static_cast<Eigen::Index>(nb.node), static_cast<Eigen::Index>(j)) = 1;
        }
    }
    const Adjacency transposed = selected.transpose();
    if (rule == EdgeRule::And) {
        return selected.cwiseMin(transposed);
    }
    return selected.cwiseMax(transposed);
}

CovarianceEstimate reconstruct_covariance(const std::vector<NeighborhoodSet>& neighborhoods,
                                          const Adjacency& adjacency) {
    const auto p = static_cast<Eigen::Index>(neighborhoods.size());
    if (adjacency.rows() != p || adjacency.cols() != p) {
        throw ValidationError("adjacency shape does not match the neighborhood count");
    }
    std::vector<const NeighborhoodSet*> by_node(neighborhoods.size(), nullptr);
    for (const auto& nb : neighborhoods) {
        check_node(nb.node, neighborhoods.size());
        by_node[nb.node] = &nb;
    }

    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const auto& nb = *by_node[static_cast<std::size_t>(i)];
        const double v = nb.conditional_variance();
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw NumericalError(
                fmt::format("node {} has a non-positive conditional variance", i));
        }
        raw(i, i) = 1.0 / v;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (j != i) {
                raw(i, j) = -nb.coefficient(static_cast<std::size_t>(j)) / v;
            }
        }
    }

    CovarianceEstimate est;
    est.omega = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        est.omega(i, i) = raw(i, i);
        for (Eigen::Index j = i + 1; j < p; ++j) {
            if (adjacency(i, j) != 0) {
                const double w = 0.5 * (raw(i, j) + raw(j, i));
                est.omega(i, j) = w;
                est.omega(j, i) = w;
            }
        }
    }

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(est.omega,
                                                             Eigen::EigenvaluesOnly);
    const double lambda_min = eig.eigenvalues().minCoeff();
    if (!(lambda_min > 0.0)) {
        est.eigen_shift = std::abs(lambda_min) + kEigenShiftMargin;
        est.omega.diagonal().array() += est.eigen_shift;
    }

    const Eigen::LLT<Eigen::MatrixXd> llt(est.omega);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("reconstructed precision matrix is singular");
    }
    est.sigma = llt.solve(Eigen::MatrixXd::Identity(p, p));
    est.sigma = 0.5 * (est.sigma + est.sigma.transpose()).eval();
    return est;
}

IndependenceTest empty_graph_test(const Eigen::MatrixXd& window) {
    const auto n = window.rows();
    const auto p = window.cols();
    if (n <= p) {
        throw ValidationError(
            fmt::format("independence test needs more rows ({}) than columns ({})", n, p));
    }
    IndependenceTest out;
    out.dof = static_cast<std::size_t>(p * (p - 1) / 2);
    if (p < 2) {
        return out;
    }

    const Eigen::MatrixXd centered = window.rowwise() - window.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered;
    const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    if (!(sd.minCoeff() > 0.0)) {
        throw NumericalError("correlation matrix is degenerate (constant column)");
    }
    const Eigen::MatrixXd corr = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
    const Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("correlation matrix is not positive definite");
    }
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();

    const double factor = static_cast<double>(n) - 1.0 - (2.0 * static_cast<double>(p) + 5.0) / 6.0;
    out.statistic = std::max(0.0, -factor * log_det);
    const boost::math::chi_squared dist(static_cast<double>(out.dof));
    out.pvalue = boost::math::cdf(boost::math::complement(dist, out.statistic));
    return out;
}

GraphSnapshot analyze_window(const Eigen::MatrixXd& window, const std::vector<std::string>& labels,
                             const SelectionOptions& options) {
    const auto p = static_cast<std::size_t>(window.cols());
    if (!labels.empty() && labels.size() != p) {
        throw ValidationError("label count does not match window columns");
    }
    GraphSnapshot snap;
    snap.neighborhoods.reserve(p);
    for (std::size_t i = 0; i < p; ++i) {
        snap.neighborhoods.push_back(select_neighborhood(
            window, i, options, labels.empty() ? std::to_string(i) : labels[i]));
    }
    snap.adjacency = assemble_adjacency(snap.neighborhoods, options.rule);
    CovarianceEstimate est = reconstruct_covariance(snap.neighborhoods, snap.adjacency);
    snap.sigma = std::move(est.sigma);
    snap.omega = std::move(est.omega);
    snap.eigen_shift = est.eigen_shift;
    snap.empty_graph = empty_graph_test(window);
    return snap;
}

std::vector<GraphSnapshot> rolling_graphs(const ResidualPanel& panel, const WindowSpec& spec,
                                          const SelectionOptions& options) {
    panel.validate();
    spec.validate(panel.cols());
    if (panel.rows() < spec.length) {
        throw ValidationError(fmt::format("panel has {} rows; window length is {}", panel.rows(),
                                          spec.length));
    }
    const std::size_t count = window_count(panel.rows(), spec);
    std::vector<GraphSnapshot> out(count);
    parallel_for(count, options.threads, [&](std::size_t w) {
        const std::size_t start = w * spec.step;
        try {
            const Eigen::MatrixXd window = panel.values.middleRows(
                static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(spec.length));
            GraphSnapshot snap = analyze_window(window, panel.labels, options);
            snap.window_index = w;
            snap.start_row = start;
            snap.window_start = panel.dates[start];
            out[w] = std::move(snap);
        } catch (const RankDeficientError& e) {
            throw RankDeficientError(fmt::format("window {}: {}", w, e.what()), e.columns());
        } catch (const NumericalError& e) {
            rethrow_for_window(e, w);
        } catch (const ValidationError& e) {
            rethrow_for_window(e, w);
        }
    });
    return out;
}

std::size_t node_index(const std::vector<GraphSnapshot>& snapshots, std::string_view label) {
    if (!snapshots.empty()) {
        for (const auto& nb : snapshots.front().neighborhoods) {
            if (nb.label == label) {
                return nb.node;
            }
        }
    }
    throw ValidationError(fmt::format("unknown node label '{}'", label));
}

std::vector<int> degree_series(const std::vector<GraphSnapshot>& snapshots, std::size_t node) {
    std::vector<int> out;
    out.reserve(snapshots.size());
    for (const auto& s : snapshots) {
        check_node(node, static_cast<std::size_t>(s.adjacency.rows()));
        out.push_back(s.adjacency.row(static_cast<Eigen::Index>(node)).sum());
    }
    return out;
}

std::vector<int> degree_series(const std::vector<GraphSnapshot>& snapshots,
                               std::string_view label) {
    return degree_series(snapshots, node_index(snapshots, label));
}

std::vector<int> neighborhood_size_series(const std::vector<GraphSnapshot>& snapshots,
                                          std::size_t node) {
    std::vector<int> out;
    out.reserve(snapshots.size());
    for (const auto& s : snapshots) {
        check_node(node, s.neighborhoods.size());
        out.push_back(static_cast<int>(s.neighborhoods[node].neighbors.size()));
    }
    return out;
}

std::vector<double> coefficient_series(const std::vector<GraphSnapshot>& snapshots,
                                       std::size_t i, std::size_t j) {
    if (i == j) {
        throw ValidationError("coefficient series needs two distinct nodes");
    }
    std::vector<double> out;
    out.reserve(snapshots.size());
    for (const auto& s : snapshots) {
        check_node(i, s.neighborhoods.size());
        check_node(j, s.neighborhoods.size());
        out.push_back(s.neighborhoods[i].coefficient(j));
    }
    return out;
}

std::vector<double> coefficient_series(const std::vector<GraphSnapshot>& snapshots,
                                       std::string_view i, std::string_view j) {
    return coefficient_series(snapshots, node_index(snapshots, i), node_index(snapshots, j));
}

}  // namespace regime
