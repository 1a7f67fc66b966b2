#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include <regime/factor_model.hpp>

#include <cmath>

using namespace regime;

namespace {

FactorPanel random_factors(Eigen::Index n, std::mt19937_64& rng) {
    FactorPanel f;
    f.dates = business_days(Date::parse("2005-01-03"), static_cast<std::size_t>(n));
    f.x_us = 0.01 * oracle::gaussian(n, rng);
    f.x_eu = 0.5 * f.x_us + 0.01 * oracle::gaussian(n, rng);
    f.delta_us = oracle::gaussian(n, rng);
    f.delta_eu = 0.7 * f.delta_us + 0.5 * oracle::gaussian(n, rng);
    return f;
}

ReturnPanel panel_from(const FactorPanel& f, const Eigen::MatrixXd& values) {
    ReturnPanel p;
    p.dates = f.dates;
    p.values = values;
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        p.labels.push_back("IDX" + std::to_string(j));
    }
    return p;
}

Eigen::MatrixXd factor_columns(const FactorPanel& f) {
    const Eigen::VectorXd excess = excess_eu_volatility(f.delta_us, f.delta_eu);
    Eigen::MatrixXd x(f.x_us.size(), 5);
    x.col(0).setOnes();
    x.col(1) = f.x_us;
    x.col(2) = f.x_eu;
    x.col(3) = f.delta_us;
    x.col(4) = excess;
    return x;
}

}  // namespace

TEST_CASE("excess volatility of a collinear pair is zero") {
    std::mt19937_64 rng(1);
    const Eigen::VectorXd d = oracle::gaussian(50, rng);
    CHECK(excess_eu_volatility(d, d).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("excess volatility leaves an orthogonal mean-zero series untouched") {
    const Eigen::Index n = 64;
    Eigen::VectorXd us(n);
    Eigen::VectorXd eu(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        us(t) = std::cos(2.0 * M_PI * static_cast<double>(t) / static_cast<double>(n));
        eu(t) = std::sin(2.0 * M_PI * 3.0 * static_cast<double>(t) / static_cast<double>(n));
    }
    CHECK((excess_eu_volatility(us, eu) - eu).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("excess volatility matches the normal-equations residual") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::VectorXd us = oracle::gaussian(80, rng);
        const Eigen::VectorXd eu = 0.4 * us + oracle::gaussian(80, rng);
        const Eigen::VectorXd out = excess_eu_volatility(us, eu);
        Eigen::MatrixXd x(80, 2);
        x.col(0).setOnes();
        x.col(1) = us;
        const Eigen::VectorXd ref = eu - x * oracle::normal_equations(x, eu);
        CHECK((out - ref).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(out.dot(us)) < 1e-8);
        // Idempotent.
        CHECK((excess_eu_volatility(us, out) - out).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("excess volatility errors") {
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(10, 2.0);
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
    CHECK_THROWS_AS(excess_eu_volatility(c, v), RankDeficientError);
    CHECK_THROWS_AS(excess_eu_volatility(v.head(2), v.head(2)), ValidationError);
    CHECK_THROWS_AS(excess_eu_volatility(v, v.head(9)), ValidationError);
}

TEST_CASE("four-factor fit of y = x_us") {
    std::mt19937_64 rng(3);
    const auto f = random_factors(200, rng);
    const auto fit = fit_four_factor(f.x_us, FactorDesign(f), "US");
    CHECK(fit.index_id == "US");
    CHECK(fit.beta_us == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(fit.beta_eu) < 1e-10);
    CHECK(std::abs(fit.gamma_us) < 1e-10);
    CHECK(std::abs(fit.gamma_eu) < 1e-10);
    CHECK(std::abs(fit.intercept) < 1e-12);
    CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("four-factor loadings on white noise are within three standard errors of zero") {
    std::mt19937_64 rng(4);
    const Eigen::Index n = 10000;
    const auto f = random_factors(n, rng);
    const Eigen::VectorXd y = oracle::gaussian(n, rng);
    const auto fit = fit_four_factor(y, FactorDesign(f));
    const Eigen::MatrixXd x = factor_columns(f);
    const double s2 = fit.residuals.squaredNorm() / static_cast<double>(n - 5);
    const Eigen::MatrixXd cov = (x.transpose() * x).inverse() * s2;
    const double loadings[] = {fit.intercept, fit.beta_us, fit.beta_eu, fit.gamma_us, fit.gamma_eu};
    for (int k = 0; k < 5; ++k) {
        CHECK(std::abs(loadings[k]) < 3.0 * std::sqrt(cov(k, k)));
    }
}

TEST_CASE("four-factor loadings match the normal equations") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        const auto f = random_factors(120, rng);
        const Eigen::VectorXd y = 0.8 * f.x_eu + 0.1 * f.delta_us + 0.01 * oracle::gaussian(120, rng);
        const auto fit = fit_four_factor(y, FactorDesign(f));
        const Eigen::MatrixXd x = factor_columns(f);
        const Eigen::VectorXd ref = oracle::normal_equations(x, y);
        CHECK(std::abs(fit.intercept - ref(0)) < 1e-8);
        CHECK(std::abs(fit.beta_us - ref(1)) < 1e-8);
        CHECK(std::abs(fit.beta_eu - ref(2)) < 1e-8);
        CHECK(std::abs(fit.gamma_us - ref(3)) < 1e-8);
        CHECK(std::abs(fit.gamma_eu - ref(4)) < 1e-8);
        CHECK((x.transpose() * fit.residuals).cwiseAbs().maxCoeff() < 1e-8 * 120);
    }
}

TEST_CASE("collinear factors name the columns") {
    std::mt19937_64 rng(6);
    auto f = random_factors(50, rng);
    f.x_eu = 2.0 * f.x_us;
    try {
        fit_four_factor(oracle::gaussian(50, rng), FactorDesign(f));
        FAIL("expected a rank error");
    } catch (const RankDeficientError& e) {
        const std::string msg = e.what();
        CHECK((msg.find("x_us") != std::string::npos || msg.find("x_eu") != std::string::npos));
    }
}

TEST_CASE("factor intercept switch") {
    std::mt19937_64 rng(7);
    const auto f = random_factors(100, rng);
    const Eigen::VectorXd y = 0.3 + f.x_us.array();
    const auto with = fit_four_factor(y, FactorDesign(f, {true}));
    const auto without = fit_four_factor(y, FactorDesign(f, {false}));
    CHECK(with.intercept == doctest::Approx(0.3));
    CHECK(without.intercept == 0.0);
    CHECK(without.residuals.cwiseAbs().maxCoeff() > 0.01);
}

TEST_CASE("residual panel of x_eu copies is zero") {
    std::mt19937_64 rng(8);
    const auto f = random_factors(150, rng);
    Eigen::MatrixXd v(150, 4);
    for (int j = 0; j < 4; ++j) v.col(j) = f.x_eu;
    const auto built = build_residual_panel(panel_from(f, v), f);
    CHECK(built.residuals.values.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("residual panel shape, orthogonality and column independence") {
    std::mt19937_64 rng(9);
    const auto f = random_factors(300, rng);
    const Eigen::MatrixXd v = oracle::gaussian(300, 10, rng);
    const auto panel = panel_from(f, v);
    const auto built = build_residual_panel(panel, f);
    CHECK(built.fits.size() == 10);
    CHECK(built.residuals.rows() == 300);
    CHECK(built.residuals.cols() == 10);
    CHECK(built.residuals.labels == panel.labels);
    CHECK(built.residuals.dates == panel.dates);
    const Eigen::MatrixXd x = factor_columns(f);
    CHECK((x.transpose() * built.residuals.values).cwiseAbs().maxCoeff() < 1e-8 * 300);

    ReturnPanel swapped = panel;
    std::swap(swapped.labels[0], swapped.labels[7]);
    swapped.values.col(0).swap(swapped.values.col(7));
    const auto built2 = build_residual_panel(swapped, f);
    CHECK(built2.residuals.values.col(0) == built.residuals.values.col(7));
    CHECK(built2.residuals.values.col(7) == built.residuals.values.col(0));
    CHECK(built2.fits[0].index_id == "IDX7");
}

TEST_CASE("residual covariance recovers the generator noise covariance") {
    std::mt19937_64 rng(10);
    const Eigen::Index n = 20000;
    const auto f = random_factors(n, rng);
    Eigen::MatrixXd noise_cov(3, 3);
    noise_cov << 1.0, 0.5, 0.2, 0.5, 2.0, -0.3, 0.2, -0.3, 0.5;
    const Eigen::MatrixXd l = noise_cov.llt().matrixL();
    const Eigen::MatrixXd noise = oracle::gaussian(n, 3, rng) * l.transpose();
    const Eigen::VectorXd excess = excess_eu_volatility(f.delta_us, f.delta_eu);
    Eigen::MatrixXd v = noise;
    for (int j = 0; j < 3; ++j) {
        v.col(j) += (0.5 + j) * f.x_us + 0.9 * f.x_eu - 0.2 * f.delta_us + 0.1 * j * excess;
    }
    const auto built = build_residual_panel(panel_from(f, v), f);
    const Eigen::MatrixXd r = built.residuals.values;
    const Eigen::MatrixXd cov = r.transpose() * r / static_cast<double>(n - 5);
    CHECK((cov - noise_cov).cwiseAbs().maxCoeff() < 0.06);
}

TEST_CASE("residual panel errors carry the column label") {
    std::mt19937_64 rng(11);
    const auto f = random_factors(60, rng);
    auto panel = panel_from(f, oracle::gaussian(60, 3, rng));
    panel.values(5, 1) = std::nan("");
    try {
        build_residual_panel(panel, f);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).size() > 0);
    }

    auto flat = f;
    flat.delta_us.setConstant(1.0);
    try {
        build_residual_panel(panel_from(f, oracle::gaussian(60, 2, rng)), flat);
        FAIL("expected a rank error");
    } catch (const NumericalError&) {
    }

    auto shifted = panel_from(f, oracle::gaussian(60, 2, rng));
    shifted.dates = business_days(Date::parse("2006-01-02"), 60);
    CHECK_THROWS_AS(build_residual_panel(shifted, f), ValidationError);
}

TEST_CASE("rank failure inside one column names it") {
    std::mt19937_64 rng(12);
    auto f = random_factors(40, rng);
    f.x_eu = f.x_us;
    try {
        build_residual_panel(panel_from(f, oracle::gaussian(40, 2, rng)), f);
        FAIL("expected a rank error");
    } catch (const RankDeficientError& e) {
        CHECK(std::string(e.what()).find("IDX0") != std::string::npos);
    }
}
