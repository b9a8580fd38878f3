#ifndef GXLEARN_GLM_HPP
#define GXLEARN_GLM_HPP

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gxlearn/dataset.hpp"
#include "gxlearn/errors.hpp"
#include "gxlearn/parallel.hpp"
#include "gxlearn/stats.hpp"

namespace gxlearn {

enum class Family { gaussian_identity, binomial_logit };

struct GlmOptions {
    int max_iter = 50;
    double tol = 1e-8; // on the score norm (binomial)
};

struct GlmFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd wald_p_values;
    bool converged = false;
    Family family = Family::gaussian_identity;
    int iterations = 0;
    std::vector<double> ll_trace; // binomial log-likelihood after each accepted step
};

namespace detail {

inline void check_full_rank(const Eigen::MatrixXd& design) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    const Index rank = qr.rank();
    if (rank == design.cols()) return;
    // Pivot positions past the numerical rank are the redundant columns.
    const auto perm = qr.colsPermutation().indices();
    std::string cols;
    for (Index k = rank; k < design.cols(); ++k) {
        if (!cols.empty()) cols += ", ";
        cols += std::to_string(perm(k));
    }
    throw numeric_error("rank-deficient design: column(s) " + cols +
                        " linearly dependent on the others");
}

inline double binomial_log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    // sum_i y_i*eta_i - log(1 + exp(eta_i)), with a stable log1p form.
    double ll = 0.0;
    for (Index i = 0; i < eta.size(); ++i) {
        const double e = eta(i);
        const double log1pe = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        ll += y(i) * e - log1pe;
    }
    return ll;
}

// Fitted probabilities pinned to 0/1 beyond this linear-predictor magnitude
// indicate (quasi-)separation: the likelihood has no interior maximum and the
// score criterion alone would report false convergence.
inline constexpr double separation_eta = 30.0;

// Largest Newton step still compatible with having reached a stationary
// point. Under separation the score vanishes but the Hessian collapses with
// it, so the implied step stays O(1) instead of O(tol).
inline constexpr double stationary_step = 1e-3;

} // namespace detail

/// Fits y ~ design under the given family. The design is used as passed —
/// prepend an intercept column if one is wanted. Gaussian-identity is the
/// exact least-squares solution; binomial-logit runs IRLS with step-halving,
/// so the log-likelihood never decreases between iterations.
inline GlmFit fit_glm(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, Family family,
                      const GlmOptions& opts = {}) {
    const Index n = design.rows(), q = design.cols();
    if (n != y.size()) throw data_error("design rows and response length differ");
    if (q < 1) throw data_error("empty design");
    if (!design.allFinite() || !y.allFinite()) throw data_error("non-finite values in glm inputs");
    detail::check_full_rank(design);

    GlmFit fit;
    fit.family = family;

    if (family == Family::gaussian_identity) {
        Eigen::MatrixXd xtx = design.transpose() * design;
        Eigen::LLT<Eigen::MatrixXd> llt(xtx);
        if (llt.info() != Eigen::Success) throw numeric_error("normal equations not positive definite");
        fit.coefficients = llt.solve(design.transpose() * y);
        const Eigen::VectorXd resid = y - design * fit.coefficients;
        fit.standard_errors.resize(q);
        fit.wald_p_values.resize(q);
        if (n > q) {
            const double sigma2 = resid.squaredNorm() / static_cast<double>(n - q);
            const Eigen::MatrixXd cov = sigma2 * llt.solve(Eigen::MatrixXd::Identity(q, q));
            for (Index j = 0; j < q; ++j) {
                fit.standard_errors(j) = std::sqrt(std::max(cov(j, j), 0.0));
                fit.wald_p_values(j) = wald_p_value(fit.coefficients(j), fit.standard_errors(j));
            }
        } else { // saturated: no residual degrees of freedom
            fit.standard_errors.setConstant(q, std::numeric_limits<double>::quiet_NaN());
            fit.wald_p_values.setConstant(q, 1.0);
        }
        fit.converged = true;
        fit.iterations = 1;
        return fit;
    }

    for (Index i = 0; i < n; ++i)
        if (y(i) != 0.0 && y(i) != 1.0)
            throw data_error("binomial response must be 0/1; entry " + std::to_string(i) + " is " +
                             std::to_string(y(i)));

    Eigen::VectorXd coef = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    double ll = detail::binomial_log_likelihood(eta, y);
    fit.ll_trace.push_back(ll);

    while (fit.iterations < opts.max_iter) {
        const Eigen::VectorXd mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
        const Eigen::VectorXd score = design.transpose() * (y - mu);
        if (score.norm() < opts.tol) break;
        ++fit.iterations;

        const Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).cwiseMax(1e-12).matrix();
        const Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design;
        const Eigen::VectorXd step = info.ldlt().solve(score);
        if (!step.allFinite()) break;

        double t = 1.0;
        Eigen::VectorXd cand;
        double ll_cand = -std::numeric_limits<double>::infinity();
        bool improved = false;
        for (int h = 0; h < 50; ++h) {
            cand = coef + t * step;
            ll_cand = detail::binomial_log_likelihood(design * cand, y);
            if (ll_cand >= ll) {
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if (!improved) break; // no ascent direction left at this precision
        coef = cand;
        eta = design * coef;
        ll = ll_cand;
        fit.ll_trace.push_back(ll);
    }

    fit.coefficients = coef;
    const Eigen::VectorXd mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    const Eigen::VectorXd score = design.transpose() * (y - mu);
    const Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).cwiseMax(1e-12).matrix();
    const Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design;
    const Eigen::VectorXd residual_step = info.ldlt().solve(score);
    fit.converged = score.norm() < opts.tol && residual_step.allFinite() &&
                    residual_step.lpNorm<Eigen::Infinity>() < detail::stationary_step &&
                    eta.lpNorm<Eigen::Infinity>() < detail::separation_eta;

    Eigen::MatrixXd cov = info.inverse();
    fit.standard_errors.resize(q);
    fit.wald_p_values.resize(q);
    for (Index j = 0; j < q; ++j) {
        fit.standard_errors(j) = std::sqrt(std::max(cov(j, j), 0.0));
        fit.wald_p_values(j) = wald_p_value(fit.coefficients(j), fit.standard_errors(j));
    }
    return fit;
}

struct BatchSlopes {
    Eigen::VectorXd slope;      // coefficient of each gene in y ~ [1, controls, gene]
    Eigen::VectorXd p_value;    // its Wald p-value
    std::vector<bool> converged; // false marks a (quasi-)separated binomial fit
    std::vector<bool> excluded;  // under-observed or degenerate genes, forced to slope 0 / p 1
};

/// One small GLM per gene: y on [intercept, controls, x_j], restricted to the
/// rows where gene j is observed. Degenerate genes (constant within their
/// observed rows, or observed in fewer rows than the fit has parameters) are
/// zeroed rather than erroring, so one bad gene cannot abort a sweep.
/// Output order matches gene order regardless of worker count.
inline BatchSlopes univariate_slope_batch(const ExpressionMatrix& x, const Eigen::MatrixXd& controls,
                                          const Eigen::VectorXd& y, Family family,
                                          const GlmOptions& opts = {}) {
    const Index n = x.rows(), p = x.cols();
    const Index h = controls.cols();
    if (controls.rows() != n || y.size() != n)
        throw data_error("controls/response rows must match the expression matrix");
    if (!controls.allFinite()) throw data_error("controls must be complete");

    BatchSlopes out;
    out.slope.setZero(p);
    out.p_value.setConstant(p, 1.0);
    out.converged.assign(static_cast<std::size_t>(p), true);
    out.excluded.assign(static_cast<std::size_t>(p), false);

    parallel_for(static_cast<std::size_t>(p), [&](std::size_t sj) {
        const Index j = static_cast<Index>(sj);
        std::vector<Index> rows;
        rows.reserve(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i)
            if (x.mask(i, j)) rows.push_back(i);
        const Index m = static_cast<Index>(rows.size());
        if (m < h + 2) { // fewer observations than parameters
            out.excluded[sj] = true;
            return;
        }
        Eigen::MatrixXd design(m, h + 2);
        Eigen::VectorXd yr(m);
        for (Index r = 0; r < m; ++r) {
            const Index i = rows[static_cast<std::size_t>(r)];
            design(r, 0) = 1.0;
            design.block(r, 1, 1, h) = controls.row(i);
            design(r, h + 1) = x.values(i, j);
            yr(r) = y(i);
        }
        try {
            const GlmFit fit = fit_glm(design, yr, family, opts);
            out.slope(j) = fit.coefficients(h + 1);
            out.p_value(j) = fit.wald_p_values(h + 1);
            out.converged[sj] = fit.converged;
        } catch (const numeric_error&) { // rank-deficient: constant gene or collinear with controls
            out.excluded[sj] = true;
        }
    });
    return out;
}

} // namespace gxlearn

#endif
