#pragma once

#include <regime/panel.hpp>
#include <regime/regression.hpp>

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace regime {

/// Market and volatility factors aligned with a return panel.
///
/// The volatility shocks are inputs; nothing here estimates them.
struct FactorPanel {
    std::vector<Date> dates;
    Eigen::VectorXd x_us;      // US market excess return
    Eigen::VectorXd x_eu;      // EU market excess return
    Eigen::VectorXd delta_us;  // US volatility shock
    Eigen::VectorXd delta_eu;  // EU volatility shock, before orthogonalization

    std::size_t size() const noexcept { return dates.size(); }
    void validate() const;
};

struct FactorOptions {
    /// Estimate an intercept alongside the four loadings.
    bool intercept = true;
};

struct FactorFit {
    std::string index_id;
    double beta_us = 0.0;
    double beta_eu = 0.0;
    double gamma_us = 0.0;
    double gamma_eu = 0.0;
    double intercept = 0.0;
    Eigen::VectorXd residuals;
};

/// Residual of the EU volatility shock after OLS on {1, US shock}.
Eigen::VectorXd excess_eu_volatility(const Eigen::VectorXd& delta_us,
                                     const Eigen::VectorXd& delta_eu_raw);

/// The four-factor regressor matrix with the EU shock already orthogonalized.
class FactorDesign {
public:
    explicit FactorDesign(const FactorPanel& factors, FactorOptions options = {});

    const DesignMatrix& design() const noexcept { return design_; }
    const Eigen::VectorXd& excess_delta_eu() const noexcept { return excess_; }
    bool intercept() const noexcept { return options_.intercept; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(design_.rows()); }

private:
    FactorOptions options_;
    Eigen::VectorXd excess_;
    DesignMatrix design_;
};

/// OLS of one index's excess returns on the four factors.
FactorFit fit_four_factor(const Eigen::VectorXd& y, const FactorDesign& factors,
                          std::string index_id = {});

struct ResidualBuild {
    ResidualPanel residuals;
    std::vector<FactorFit> fits;
};

/// Fits every column of `returns` and stacks the residual series column-wise.
ResidualBuild build_residual_panel(const ReturnPanel& returns, const FactorPanel& factors,
                                   FactorOptions options = {});

}  // namespace regime
