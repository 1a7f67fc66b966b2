#include <regime/regression.hpp>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace regime {
namespace {

constexpr double kQrRankThreshold = 1e-10;
// Relative pivot size below which a candidate Gram block counts as singular.
constexpr double kGramPivotThreshold = 1e-12;

void check_finite(const Eigen::MatrixXd& values, const char* what) {
    if (!values.allFinite()) {
        throw ValidationError(fmt::format("{} contains non-finite values", what));
    }
}

void check_rows(const DesignMatrix& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) {
        throw ValidationError(
            fmt::format("design has {} rows but response has {} entries", x.rows(), y.size()));
    }
    check_finite(y, "response");
}

std::vector<std::size_t> all_predictors(const DesignMatrix& x) {
    std::vector<std::size_t> out(static_cast<std::size_t>(x.predictors()));
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = j;
    }
    return out;
}

// Centered copies when an intercept is fitted, raw copies otherwise.
struct Centered {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    Eigen::RowVectorXd x_mean;
    double y_mean = 0.0;
};

Centered center(const DesignMatrix& design, const Eigen::VectorXd& y) {
    Centered c;
    c.x = design.predictor_block();
    c.y = y;
    c.x_mean = Eigen::RowVectorXd::Zero(c.x.cols());
    if (design.intercept_included()) {
        c.x_mean = c.x.colwise().mean();
        c.y_mean = y.mean();
        c.x.rowwise() -= c.x_mean;
        c.y.array() -= c.y_mean;
    }
    return c;
}

bool lex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

double soft_threshold(double z, double gamma) {
    if (z > gamma) {
        return z - gamma;
    }
    if (z < -gamma) {
        return z + gamma;
    }
    return 0.0;
}

}  // namespace

DesignMatrix::DesignMatrix(Eigen::MatrixXd values, bool intercept_included)
    : values_(std::move(values)), intercept_(intercept_included) {
    if (values_.rows() < 1) {
        throw ValidationError("design matrix needs at least one row");
    }
    check_finite(values_, "design matrix");
    if (intercept_) {
        if (values_.cols() < 1 || !(values_.col(0).array() == 1.0).all()) {
            throw ValidationError("intercept column must be all ones");
        }
    }
}

DesignMatrix DesignMatrix::with_intercept(const Eigen::MatrixXd& predictors) {
    Eigen::MatrixXd values(predictors.rows(), predictors.cols() + 1);
    values.col(0).setOnes();
    values.rightCols(predictors.cols()) = predictors;
    return DesignMatrix(std::move(values), true);
}

DesignMatrix DesignMatrix::without_intercept(const Eigen::MatrixXd& predictors) {
    return DesignMatrix(predictors, false);
}

Eigen::MatrixXd DesignMatrix::predictor_block() const {
    return values_.rightCols(predictors());
}

RegressionFit ols_fit(const DesignMatrix& x, const Eigen::VectorXd& y) {
    check_rows(x, y);
    RegressionFit fit;
    fit.subset = all_predictors(x);
    if (x.cols() == 0) {
        fit.coefficients.resize(0);
        fit.residuals = y;
        fit.rss = y.squaredNorm();
        return fit;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.values());
    qr.setThreshold(kQrRankThreshold);
    if (qr.rank() < x.cols()) {
        std::vector<std::size_t> dependent;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < x.cols(); ++i) {
            dependent.push_back(static_cast<std::size_t>(perm(i)));
        }
        std::sort(dependent.begin(), dependent.end());
        throw RankDeficientError(
            fmt::format("design matrix is rank deficient (rank {} of {}); dependent columns {}",
                        qr.rank(), x.cols(), dependent),
            dependent);
    }

    const Eigen::VectorXd beta = qr.solve(y);
    fit.residuals = y - x.values() * beta;
    fit.rss = fit.residuals.squaredNorm();
    if (x.intercept_included()) {
        fit.intercept = beta(0);
        fit.coefficients = beta.tail(beta.size() - 1);
    } else {
        fit.coefficients = beta;
    }
    return fit;
}

double bic_score(double rss, std::size_t n, std::size_t k) {
    if (n == 0) {
        throw ValidationError("BIC needs at least one observation");
    }
    if (!(rss >= 0.0)) {
        throw ValidationError("BIC needs a nonnegative residual sum of squares");
    }
    const double nn = static_cast<double>(n);
    return nn * std::log(std::max(rss, kRssFloor) / nn) + static_cast<double>(k) * std::log(nn);
}

SubsetModel best_subset_bic(const DesignMatrix& x, const Eigen::VectorXd& y) {
    check_rows(x, y);
    const auto p = static_cast<std::size_t>(x.predictors());
    const auto n = static_cast<std::size_t>(x.rows());
    if (p > kMaxSubsetPredictors) {
        throw ValidationError(fmt::format(
            "exhaustive subset search refuses {} predictors (limit {})", p, kMaxSubsetPredictors));
    }
    if (n <= p) {
        throw ValidationError(
            fmt::format("subset search needs more observations ({}) than predictors ({})", n, p));
    }

    const Centered c = center(x, y);
    const Eigen::MatrixXd gram = c.x.transpose() * c.x;
    const Eigen::VectorXd cross = c.x.transpose() * c.y;

    SubsetModel model;
    double best_bic = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best;
    bool found = false;

    std::vector<std::size_t> idx;
    idx.reserve(p);
    Eigen::VectorXd resid(c.y.size());
    const std::uint64_t count = std::uint64_t{1} << p;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        idx.clear();
        for (std::size_t j = 0; j < p; ++j) {
            if (mask & (std::uint64_t{1} << j)) {
                idx.push_back(j);
            }
        }
        ++model.candidates_evaluated;
        const auto k = idx.size();

        double rss = 0.0;
        if (k == 0) {
            rss = c.y.squaredNorm();
        } else {
            Eigen::MatrixXd g(k, k);
            Eigen::VectorXd rhs(k);
            for (std::size_t a = 0; a < k; ++a) {
                rhs(a) = cross(idx[a]);
                for (std::size_t b = 0; b < k; ++b) {
                    g(a, b) = gram(idx[a], idx[b]);
                }
            }
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
            const double scale = g.diagonal().maxCoeff();
            const double pivot = ldlt.vectorD().minCoeff();
            if (ldlt.info() != Eigen::Success || !(scale > 0.0) ||
                pivot <= kGramPivotThreshold * scale) {
                model.skipped.push_back(idx);
                continue;
            }
            const Eigen::VectorXd beta = ldlt.solve(rhs);
            resid = c.y;
            for (std::size_t a = 0; a < k; ++a) {
                resid.noalias() -= beta(a) * c.x.col(idx[a]);
            }
            rss = resid.squaredNorm();
        }

        const double bic = bic_score(rss, n, k);
        const bool better =
            !found || bic < best_bic ||
            (bic == best_bic && (k < best.size() || (k == best.size() && lex_less(idx, best))));
        if (better) {
            found = true;
            best_bic = bic;
            best = idx;
        }
    }

    // The empty subset never skips, so a winner always exists.
    const Eigen::MatrixXd full = x.predictor_block();
    Eigen::MatrixXd chosen(full.rows(), static_cast<Eigen::Index>(best.size()));
    for (std::size_t a = 0; a < best.size(); ++a) {
        chosen.col(static_cast<Eigen::Index>(a)) = full.col(static_cast<Eigen::Index>(best[a]));
    }
    const DesignMatrix sub = x.intercept_included() ? DesignMatrix::with_intercept(chosen)
                                                    : DesignMatrix::without_intercept(chosen);
    model.fit = ols_fit(sub, y);
    model.fit.subset = best;
    model.subset = best;
    model.bic = bic_score(model.fit.rss, n, best.size());
    return model;
}

RegressionFit ridge_fit(const DesignMatrix& x, const Eigen::VectorXd& y, double lambda) {
    check_rows(x, y);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ValidationError("ridge penalty must be a finite nonnegative number");
    }
    if (lambda == 0.0) {
        return ols_fit(x, y);
    }

    const Centered c = center(x, y);
    RegressionFit fit;
    fit.subset = all_predictors(x);
    Eigen::MatrixXd lhs = c.x.transpose() * c.x;
    lhs.diagonal().array() += lambda;
    fit.coefficients = lhs.llt().solve(c.x.transpose() * c.y);
    if (x.intercept_included()) {
        fit.intercept = c.y_mean - c.x_mean.dot(fit.coefficients);
    }
    fit.residuals = y - x.predictor_block() * fit.coefficients;
    fit.residuals.array() -= fit.intercept;
    fit.rss = fit.residuals.squaredNorm();
    return fit;
}

double lasso_kkt_violation(const DesignMatrix& x, const RegressionFit& fit, double lambda) {
    const Eigen::MatrixXd pred = x.predictor_block();
    const double n = static_cast<double>(x.rows());
    double worst = 0.0;
    for (Eigen::Index j = 0; j < pred.cols(); ++j) {
        Eigen::VectorXd col = pred.col(j);
        if (x.intercept_included()) {
            col.array() -= col.mean();
        }
        const double grad = col.dot(fit.residuals) / n;
        const double b = fit.coefficients(j);
        const double v = b == 0.0 ? std::max(0.0, std::abs(grad) - lambda)
                                  : std::abs(grad - std::copysign(lambda, b));
        worst = std::max(worst, v);
    }
    return worst;
}

RegressionFit lasso_fit(const DesignMatrix& x, const Eigen::VectorXd& y, double lambda,
                        const LassoOptions& options) {
    check_rows(x, y);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ValidationError("lasso penalty must be a finite nonnegative number");
    }

    const Centered c = center(x, y);
    const auto n = static_cast<double>(c.x.rows());
    const Eigen::Index p = c.x.cols();

    Eigen::VectorXd scale(p);
    Eigen::MatrixXd z = c.x;
    for (Eigen::Index j = 0; j < p; ++j) {
        scale(j) = std::sqrt(c.x.col(j).squaredNorm() / n);
        if (scale(j) > 0.0) {
            z.col(j) /= scale(j);
        }
    }

    // theta_j = scale_j * beta_j; the per-coordinate threshold lambda / scale_j
    // keeps the penalty on the original coefficients.
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd resid = c.y;
    const double target = 0.5 * options.kkt_tolerance;

    auto violation = [&]() {
        double worst = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (scale(j) == 0.0) {
                continue;
            }
            const double grad = scale(j) * z.col(j).dot(resid) / n;
            const double v = theta(j) == 0.0 ? std::max(0.0, std::abs(grad) - lambda)
                                             : std::abs(grad - std::copysign(lambda, theta(j)));
            worst = std::max(worst, v);
        }
        return worst;
    };

    double worst = violation();
    int sweep = 0;
    while (worst > target) {
        if (sweep == options.max_sweeps) {
            Eigen::VectorXd beta(p);
            for (Eigen::Index j = 0; j < p; ++j) {
                beta(j) = scale(j) > 0.0 ? theta(j) / scale(j) : 0.0;
            }
            throw LassoNonConvergence(
                fmt::format("lasso did not converge after {} sweeps (KKT violation {:.3e})",
                            options.max_sweeps, worst),
                beta, worst);
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            if (scale(j) == 0.0) {
                continue;
            }
            const double old = theta(j);
            const double rho = z.col(j).dot(resid) / n + old;
            const double updated = soft_threshold(rho, lambda / scale(j));
            if (updated != old) {
                resid.noalias() -= (updated - old) * z.col(j);
                theta(j) = updated;
            }
        }
        ++sweep;
        worst = violation();
    }

    RegressionFit fit;
    fit.subset = all_predictors(x);
    fit.coefficients.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        fit.coefficients(j) = scale(j) > 0.0 ? theta(j) / scale(j) : 0.0;
    }
    if (x.intercept_included()) {
        fit.intercept = c.y_mean - c.x_mean.dot(fit.coefficients);
    }
    fit.residuals = y - x.predictor_block() * fit.coefficients;
    fit.residuals.array() -= fit.intercept;
    fit.rss = fit.residuals.squaredNorm();
    return fit;
}

}  // namespace regime
