#include <regime/factor_model.hpp>

#include <regime/error.hpp>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <array>

namespace regime {
namespace {

constexpr std::array<const char*, 4> kFactorNames{"x_us", "x_eu", "delta_us", "delta_eu"};

DesignMatrix factor_design(const FactorPanel& f, const Eigen::VectorXd& excess, bool intercept) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(f.size()), 4);
    x.col(0) = f.x_us;
    x.col(1) = f.x_eu;
    x.col(2) = f.delta_us;
    x.col(3) = excess;
    return intercept ? DesignMatrix::with_intercept(x) : DesignMatrix::without_intercept(x);
}

}  // namespace

void FactorPanel::validate() const {
    const auto n = static_cast<Eigen::Index>(dates.size());
    if (x_us.size() != n || x_eu.size() != n || delta_us.size() != n || delta_eu.size() != n) {
        throw ValidationError("factor series lengths differ from the date count");
    }
    for (std::size_t t = 1; t < dates.size(); ++t) {
        if (!(dates[t - 1] < dates[t])) {
            throw ValidationError(
                fmt::format("factor dates not strictly increasing at row {}", t));
        }
    }
    if (!x_us.allFinite() || !x_eu.allFinite() || !delta_us.allFinite() ||
        !delta_eu.allFinite()) {
        throw ValidationError("factor panel contains missing or non-finite values");
    }
}

Eigen::VectorXd excess_eu_volatility(const Eigen::VectorXd& delta_us,
                                     const Eigen::VectorXd& delta_eu_raw) {
    if (delta_us.size() != delta_eu_raw.size()) {
        throw ValidationError("volatility shock series have different lengths");
    }
    if (delta_us.size() < 3) {
        throw ValidationError("orthogonalization needs at least 3 observations");
    }
    const DesignMatrix x = DesignMatrix::with_intercept(delta_us);
    return ols_fit(x, delta_eu_raw).residuals;
}

FactorDesign::FactorDesign(const FactorPanel& factors, FactorOptions options)
    : options_(options),
      excess_((factors.validate(), excess_eu_volatility(factors.delta_us, factors.delta_eu))),
      design_(factor_design(factors, excess_, options.intercept)) {}

FactorFit fit_four_factor(const Eigen::VectorXd& y, const FactorDesign& factors,
                          std::string index_id) {
    RegressionFit fit;
    try {
        fit = ols_fit(factors.design(), y);
    } catch (const RankDeficientError& e) {
        std::vector<std::string> names;
        for (auto c : e.columns()) {
            const std::size_t shift = factors.intercept() ? 1 : 0;
            names.emplace_back(c < shift ? "intercept" : kFactorNames[c - shift]);
        }
        throw RankDeficientError(fmt::format("collinear factors {}", names), e.columns());
    }
    FactorFit out;
    out.index_id = std::move(index_id);
    out.intercept = fit.intercept;
    out.beta_us = fit.coefficients(0);
    out.beta_eu = fit.coefficients(1);
    out.gamma_us = fit.coefficients(2);
    out.gamma_eu = fit.coefficients(3);
    out.residuals = std::move(fit.residuals);
    return out;
}

ResidualBuild build_residual_panel(const ReturnPanel& returns, const FactorPanel& factors,
                                   FactorOptions options) {
    returns.validate();
    if (returns.dates != factors.dates) {
        throw ValidationError("return panel and factor panel are not aligned on dates");
    }
    const FactorDesign design(factors, options);

    ResidualBuild out;
    out.residuals.dates = returns.dates;
    out.residuals.labels = returns.labels;
    out.residuals.values.resize(returns.values.rows(), returns.values.cols());
    out.fits.reserve(returns.cols());
    for (std::size_t j = 0; j < returns.cols(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        try {
            out.fits.push_back(fit_four_factor(returns.values.col(col), design, returns.labels[j]));
        } catch (const RankDeficientError& e) {
            throw RankDeficientError(fmt::format("column '{}': {}", returns.labels[j], e.what()),
                                     e.columns());
        } catch (const NumericalError& e) {
            throw NumericalError(fmt::format("column '{}': {}", returns.labels[j], e.what()));
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("column '{}': {}", returns.labels[j], e.what()));
        }
        out.residuals.values.col(col) = out.fits.back().residuals;
    }
    return out;
}

}  // namespace regime
