#include <regime/changepoint.hpp>

#include <regime/error.hpp>
#include <regime/parallel.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace regime {
namespace {

double log_t_density(std::size_t d, double quad, double log_det, double dof) {
    const double dd = static_cast<double>(d);
    return std::lgamma(0.5 * (dof + dd)) - std::lgamma(0.5 * dof) -
           0.5 * dd * std::log(dof * std::numbers::pi) - 0.5 * log_det -
           0.5 * (dof + dd) * std::log1p(quad / dof);
}

std::size_t draw_index(std::span<const double> probs, double u) {
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (probs[k] <= 0.0) {
            continue;
        }
        acc += probs[k];
        last = k;
        if (u < acc) {
            return k;
        }
    }
    return last;
}

}  // namespace

void FirmSeries::validate(int n) const {
    if (times.empty()) {
        throw ValidationError(fmt::format("firm '{}' has no observations", firm_id));
    }
    if (times.size() != values.size()) {
        throw ValidationError(
            fmt::format("firm '{}' has {} times but {} values", firm_id, times.size(), values.size()));
    }
    for (std::size_t t = 0; t < times.size(); ++t) {
        if (times[t] < 1 || times[t] > n) {
            throw ValidationError(fmt::format("firm '{}': observation time {} outside grid 1..{}",
                                              firm_id, times[t], n));
        }
        if (t > 0 && times[t] <= times[t - 1]) {
            throw ValidationError(
                fmt::format("firm '{}': observation times not strictly increasing", firm_id));
        }
        if (!std::isfinite(values[t])) {
            throw ValidationError(fmt::format("firm '{}': non-finite value at time {}", firm_id,
                                              times[t]));
        }
    }
}

std::vector<double> Hyper::make_alpha(int n, double alpha0, double alpha_n,
                                      double interior_total) {
    if (n < 1) {
        throw ValidationError("changepoint grid needs n >= 1");
    }
    std::vector<double> alpha(static_cast<std::size_t>(n) + 1, 0.0);
    alpha.front() = alpha0;
    alpha.back() = alpha_n;
    for (int k = 1; k < n; ++k) {
        alpha[static_cast<std::size_t>(k)] = interior_total / static_cast<double>(n - 1);
    }
    return alpha;
}

Hyper Hyper::defaults(int n) {
    Hyper h;
    h.n = n;
    h.alpha = make_alpha(n, 0.8, 0.1, 0.1);
    return h;
}

void Hyper::validate() const {
    if (!(a > 0.0) || !(b > 0.0) || !(tau2 > 0.0) || !std::isfinite(a) || !std::isfinite(b) ||
        !std::isfinite(tau2)) {
        throw ValidationError("hyperparameters a, b and tau2 must be positive and finite");
    }
    if (n < 1) {
        throw ValidationError("changepoint grid needs n >= 1");
    }
    if (alpha.size() != static_cast<std::size_t>(n) + 1) {
        throw ValidationError(
            fmt::format("alpha has {} entries; expected n + 1 = {}", alpha.size(), n + 1));
    }
    double total = 0.0;
    for (double v : alpha) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ValidationError("alpha entries must be finite and nonnegative");
        }
        total += v;
    }
    if (!(total > 0.0)) {
        throw ValidationError("alpha must have positive total mass");
    }
}

double Hyper::degrees_of_freedom(std::size_t block_size) const {
    return dof == DofConvention::Augmented ? a + static_cast<double>(block_size) : a;
}

double block_log_marginal(std::size_t size, double sum, double sum_sq, const Hyper& hyper,
                          bool signal) {
    if (size == 0) {
        return 0.0;
    }
    if (!std::isfinite(sum) || !std::isfinite(sum_sq)) {
        throw ValidationError("block statistics must be finite");
    }
    const double d = static_cast<double>(size);
    const double scale = hyper.b / hyper.a;
    double quad = sum_sq;
    double log_det = d * std::log(scale);
    if (signal) {
        const double inflation = 1.0 + d * hyper.tau2;
        quad -= hyper.tau2 * sum * sum / inflation;
        log_det += std::log(inflation);
    }
    quad = std::max(quad, 0.0) / scale;
    return log_t_density(size, quad, log_det, hyper.degrees_of_freedom(size));
}

double block_log_marginal(std::span<const double> y, const Hyper& hyper, bool signal) {
    if (y.empty()) {
        return 0.0;
    }
    const double d = static_cast<double>(y.size());
    double sum = 0.0;
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw ValidationError("block values must be finite");
        }
        sum += v;
    }
    const double mean = sum / d;
    double centered = 0.0;
    for (double v : y) {
        centered += (v - mean) * (v - mean);
    }
    const double scale = hyper.b / hyper.a;
    double log_det = d * std::log(scale);
    // y'y - tau2 (sum y)^2 / (1 + d tau2) == centered + d mean^2 / (1 + d tau2)
    double quad = centered + d * mean * mean;
    if (signal) {
        const double inflation = 1.0 + d * hyper.tau2;
        quad = centered + d * mean * mean / inflation;
        log_det += std::log(inflation);
    }
    return log_t_density(y.size(), quad / scale, log_det, hyper.degrees_of_freedom(y.size()));
}

MarginalTable precompute_marginals(const FirmSeries& firm, const Hyper& hyper) {
    hyper.validate();
    firm.validate(hyper.n);

    const std::size_t m = firm.size();
    std::vector<double> sum(m + 1, 0.0);
    std::vector<double> sum_sq(m + 1, 0.0);
    for (std::size_t t = 0; t < m; ++t) {
        sum[t + 1] = sum[t] + firm.values[t];
        sum_sq[t + 1] = sum_sq[t] + firm.values[t] * firm.values[t];
    }

    MarginalTable table;
    table.firm_id = firm.firm_id;
    table.log_lik.resize(static_cast<std::size_t>(hyper.n) + 1);
    table.log_lik[0] = block_log_marginal(std::span<const double>(firm.values), hyper, false);

    std::size_t left = 0;  // observations with time <= k
    for (int k = 1; k <= hyper.n; ++k) {
        while (left < m && firm.times[left] <= k) {
            ++left;
        }
        const double l = block_log_marginal(left, sum[left], sum_sq[left], hyper, true);
        const double r = block_log_marginal(m - left, sum[m] - sum[left],
                                            sum_sq[m] - sum_sq[left], hyper, true);
        table.log_lik[static_cast<std::size_t>(k)] = l + r;
    }
    return table;
}

std::vector<double> gamma_conditional(const MarginalTable& table, std::span<const double> omega) {
    if (omega.size() != table.log_lik.size()) {
        throw ValidationError(fmt::format("omega has {} entries; table has {}", omega.size(),
                                          table.log_lik.size()));
    }
    std::vector<double> out(omega.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = omega[k] > 0.0 ? table.log_lik[k] + std::log(omega[k])
                                : -std::numeric_limits<double>::infinity();
        top = std::max(top, out[k]);
    }
    if (!std::isfinite(top)) {
        throw NumericalError(
            fmt::format("firm '{}': conditional posterior has no mass", table.firm_id));
    }
    double total = 0.0;
    for (double& v : out) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : out) {
        v /= total;
    }
    return out;
}

std::vector<double> sample_omega(std::span<const long> counts, std::span<const double> alpha,
                                 std::mt19937_64& rng) {
    if (counts.size() != alpha.size()) {
        throw ValidationError("counts and alpha have different lengths");
    }
    std::vector<double> log_g(alpha.size(), -std::numeric_limits<double>::infinity());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (counts[k] < 0) {
            throw ValidationError("counts must be nonnegative");
        }
        const double shape = alpha[k] + static_cast<double>(counts[k]);
        if (shape <= 0.0) {
            continue;
        }
        if (shape < 1.0) {
            // G(s) = G(s + 1) U^(1/s), kept in logs so tiny shapes do not underflow.
            std::gamma_distribution<double> g(shape + 1.0, 1.0);
            const double u = 1.0 - std::generate_canonical<double, 53>(rng);
            log_g[k] = std::log(g(rng)) + std::log(u) / shape;
        } else {
            std::gamma_distribution<double> g(shape, 1.0);
            log_g[k] = std::log(g(rng));
        }
        top = std::max(top, log_g[k]);
    }
    if (!std::isfinite(top)) {
        throw ValidationError("Dirichlet parameters have no positive entry");
    }
    std::vector<double> omega(alpha.size());
    double total = 0.0;
    for (std::size_t k = 0; k < omega.size(); ++k) {
        omega[k] = std::exp(log_g[k] - top);
        total += omega[k];
    }
    for (double& v : omega) {
        v /= total;
    }
    return omega;
}

ChangepointPosterior summarize_posterior(std::string firm_id, std::vector<double> probs) {
    ChangepointPosterior post;
    post.firm_id = std::move(firm_id);
    post.probs = std::move(probs);
    const std::size_t n = post.probs.empty() ? 0 : post.probs.size() - 1;
    for (std::size_t j = 1; j < n; ++j) {
        if (post.argmax_interior == 0 || post.probs[j] > post.pm) {
            post.pm = post.probs[j];
            post.argmax_interior = j;
        }
    }
    return post;
}

ScreenResult gibbs_screen(const std::vector<FirmSeries>& firms, const Hyper& hyper,
                          const GibbsOptions& options) {
    hyper.validate();
    if (firms.empty()) {
        throw ValidationError("changepoint screening needs at least one firm");
    }
    if (options.burn_in < 0 || options.iters <= options.burn_in) {
        throw ValidationError(fmt::format("need iters > burn_in >= 0 (got {} and {})",
                                          options.iters, options.burn_in));
    }
    const std::size_t width = static_cast<std::size_t>(hyper.n) + 1;
    const std::size_t count = firms.size();

    std::vector<MarginalTable> tables(count);
    parallel_for(count, options.threads,
                 [&](std::size_t i) { tables[i] = precompute_marginals(firms[i], hyper); });

    std::vector<double> omega;
    if (options.fixed_omega) {
        omega = *options.fixed_omega;
        if (omega.size() != width) {
            throw ValidationError("fixed omega has the wrong length");
        }
        for (double v : omega) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw ValidationError("fixed omega entries must be finite and nonnegative");
            }
        }
    } else {
        const double total = std::accumulate(hyper.alpha.begin(), hyper.alpha.end(), 0.0);
        omega.resize(width);
        for (std::size_t k = 0; k < width; ++k) {
            omega[k] = hyper.alpha[k] / total;
        }
    }

    std::vector<std::mt19937_64> firm_rng;
    firm_rng.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        firm_rng.push_back(derive_stream(options.seed, StreamTag::FirmIndicator, i));
    }
    std::mt19937_64 omega_rng = derive_stream(options.seed, StreamTag::Omega, 0);

    std::vector<std::size_t> gamma(count, 0);
    std::vector<std::vector<double>> accum(count, std::vector<double>(width, 0.0));
    std::vector<double> omega_sum(width, 0.0);
    std::vector<long> counts(width, 0);

    for (int sweep = 0; sweep < options.iters; ++sweep) {
        const bool keep = sweep >= options.burn_in;
        parallel_for(count, options.threads, [&](std::size_t i) {
            const std::vector<double> probs = gamma_conditional(tables[i], omega);
            const double u = std::generate_canonical<double, 53>(firm_rng[i]);
            gamma[i] = draw_index(probs, u);
            if (keep) {
                if (options.rao_blackwell) {
                    for (std::size_t k = 0; k < width; ++k) {
                        accum[i][k] += probs[k];
                    }
                } else {
                    accum[i][gamma[i]] += 1.0;
                }
            }
        });
        std::fill(counts.begin(), counts.end(), 0);
        for (auto g : gamma) {
            ++counts[g];
        }
        if (!options.fixed_omega) {
            omega = sample_omega(counts, hyper.alpha, omega_rng);
        }
        if (keep) {
            for (std::size_t k = 0; k < width; ++k) {
                omega_sum[k] += omega[k];
            }
        }
    }

    const double kept = static_cast<double>(options.iters - options.burn_in);
    ScreenResult result;
    result.posteriors.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> probs = std::move(accum[i]);
        for (double& v : probs) {
            v /= kept;
        }
        result.posteriors.push_back(summarize_posterior(firms[i].firm_id, std::move(probs)));
    }
    result.omega_mean = std::move(omega_sum);
    for (double& v : result.omega_mean) {
        v /= kept;
    }
    result.last.omega = std::move(omega);
    result.last.counts = std::move(counts);
    return result;
}

std::vector<ScreenHit> screen(const std::vector<ChangepointPosterior>& posteriors, double cutoff) {
    if (!(cutoff > 0.0 && cutoff <= 1.0)) {
        throw ValidationError(fmt::format("cutoff {} outside (0, 1]", cutoff));
    }
    std::vector<ScreenHit> hits;
    for (const auto& p : posteriors) {
        if (p.argmax_interior != 0 && p.pm >= cutoff) {
            hits.push_back({p.firm_id, p.pm, p.argmax_interior, 0});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const ScreenHit& x, const ScreenHit& y) {
        if (x.pm != y.pm) {
            return x.pm > y.pm;
        }
        return x.firm_id < y.firm_id;
    });
    for (std::size_t r = 0; r < hits.size(); ++r) {
        hits[r].rank = r + 1;
    }
    return hits;
}

CohortFilter filter_cohort(const std::vector<FirmSeries>& firms, std::size_t min_obs) {
    if (min_obs < 1) {
        throw ValidationError("min_obs must be at least 1");
    }
    CohortFilter out;
    for (const auto& f : firms) {
        if (f.size() >= min_obs) {
            out.firms.push_back(f);
        }
    }
    out.retained = out.firms.size();
    out.dropped = firms.size() - out.retained;
    return out;
}

}  // namespace regime
