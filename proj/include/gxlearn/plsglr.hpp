#ifndef GXLEARN_PLSGLR_HPP
#define GXLEARN_PLSGLR_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gxlearn/baselines.hpp"
#include "gxlearn/dataset.hpp"
#include "gxlearn/errors.hpp"
#include "gxlearn/glm.hpp"
#include "gxlearn/stats.hpp"

namespace gxlearn {

struct PlsGlrOptions {
    Family family = Family::binomial_logit;
    std::optional<double> sparsify_p = 0.05; // zero slopes with Wald p above this; nullopt disables
    bool stop_when_insignificant = true;     // stop early once a component has no surviving slope
    GlmOptions glm;
};

/// Latent components fitted by per-gene generalized linear regressions.
/// Each stage h regresses y on [t_1..t_{h-1}, x_j] gene by gene to get a
/// slope vector a_h, normalizes it into w_h, scores samples against the
/// current residual matrix over each row's observed entries, and deflates.
/// Because scoring touches only observed cells, rows with holes still get
/// finite components.
struct PlsGlrModel {
    Eigen::MatrixXd weights;      // p x m, unit columns w_h
    Eigen::MatrixXd x_weights;    // p x m, w*_h: complete rows satisfy t = (x - means) * Wstar
    Eigen::MatrixXd loadings;     // p x m deflation loadings, needed to score rows with holes
    Eigen::MatrixXd components;   // n x m training scores
    Eigen::VectorXd column_means; // p
    Family family = Family::binomial_logit;
    std::optional<double> sparsify_p;

    Index m() const { return weights.cols(); }
    Index gene_count() const { return column_means.size(); }
};

namespace detail {

inline Eigen::VectorXd response_vector(const Dataset& d, Family family) {
    if (family == Family::binomial_logit && d.y.class_count != 2)
        throw data_error("binomial components need a two-class response, got " +
                         std::to_string(d.y.class_count) + " classes");
    Eigen::VectorXd y(d.x.rows());
    for (Index i = 0; i < d.x.rows(); ++i) y(i) = static_cast<double>(d.y.labels[static_cast<std::size_t>(i)]);
    return y;
}

// Bound the slopes of (quasi-)separated per-gene fits by the 99th percentile
// of what the converged fits produced; with nothing converged there is no
// reference level and the slopes are left alone.
inline void clip_unconverged(Eigen::VectorXd& a, const BatchSlopes& batch) {
    std::vector<double> converged_abs;
    bool any_unconverged = false;
    for (Index j = 0; j < a.size(); ++j) {
        if (batch.excluded[static_cast<std::size_t>(j)]) continue;
        if (batch.converged[static_cast<std::size_t>(j)])
            converged_abs.push_back(std::abs(a(j)));
        else
            any_unconverged = true;
    }
    if (!any_unconverged || converged_abs.empty()) return;
    std::sort(converged_abs.begin(), converged_abs.end());
    const double cap = quantile_sorted(converged_abs, 0.99);
    for (Index j = 0; j < a.size(); ++j)
        if (!batch.converged[static_cast<std::size_t>(j)] && std::abs(a(j)) > cap)
            a(j) = a(j) > 0.0 ? cap : -cap;
}

} // namespace detail

inline PlsGlrModel extract_components(const Dataset& d, Index m, const PlsGlrOptions& opts = {}) {
    d.validate();
    if (m < 1) throw data_error("component count must be at least 1");
    const Index n = d.x.rows(), p = d.x.cols();

    const CenteredMatrix centered = center_columns(d.x);
    const Eigen::VectorXd y = detail::response_vector(d, opts.family);

    PlsGlrModel model;
    model.column_means = centered.means;
    model.family = opts.family;
    model.sparsify_p = opts.sparsify_p;
    model.weights.resize(p, m);
    model.x_weights.resize(p, m);
    model.loadings.resize(p, m);
    model.components.resize(n, m);

    ExpressionMatrix residual = centered.matrix;
    Index done = 0;

    for (Index h = 0; h < m; ++h) {
        Eigen::MatrixXd controls = model.components.leftCols(done);
        BatchSlopes batch =
            univariate_slope_batch(centered.matrix, controls, y, opts.family, opts.glm);
        Eigen::VectorXd a = batch.slope;
        // The p-threshold only means something for converged fits; a separated
        // gene reports a useless Wald p (its curvature collapsed), yet is
        // maximally informative — keep it and let the clip below bound it.
        if (opts.sparsify_p)
            for (Index j = 0; j < p; ++j)
                if (batch.converged[static_cast<std::size_t>(j)] &&
                    batch.p_value(j) > *opts.sparsify_p)
                    a(j) = 0.0;
        detail::clip_unconverged(a, batch);

        const double an = a.norm();
        if (an == 0.0) {
            if (opts.stop_when_insignificant) break;
            if (h == 0 && !opts.sparsify_p)
                throw numeric_error("no gene relates to the response: all first-stage slopes are zero");
            throw numeric_error("component " + std::to_string(h + 1) +
                                " has no nonzero slope; enable early stopping or reduce m");
        }

        Eigen::VectorXd w = a / an;
        detail::flip_to_positive_peak(w);

        // score each row over its observed entries; |w| = 1 is the denominator
        Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
        for (Index i = 0; i < n; ++i) {
            double s = 0.0;
            for (Index j = 0; j < p; ++j)
                if (residual.mask(i, j)) s += residual.values(i, j) * w(j);
            t(i) = s;
        }

        // per-column least squares of the residual block on t, observed cells only
        Eigen::VectorXd load(p);
        for (Index j = 0; j < p; ++j) {
            double num = 0.0, den = 0.0;
            for (Index i = 0; i < n; ++i) {
                if (!residual.mask(i, j)) continue;
                num += t(i) * residual.values(i, j);
                den += t(i) * t(i);
            }
            load(j) = den > 0.0 ? num / den : 0.0;
        }
        for (Index j = 0; j < p; ++j)
            for (Index i = 0; i < n; ++i)
                if (residual.mask(i, j)) residual.values(i, j) -= t(i) * load(j);

        model.weights.col(done) = w;
        model.loadings.col(done) = load;
        model.x_weights.col(done) =
            w - model.x_weights.leftCols(done) * (model.loadings.leftCols(done).transpose() * w);
        model.components.col(done) = t;
        ++done;
    }

    model.weights.conservativeResize(p, done);
    model.x_weights.conservativeResize(p, done);
    model.loadings.conservativeResize(p, done);
    model.components.conservativeResize(n, done);
    return model;
}

/// Scores new samples. Complete rows take the direct route through Wstar;
/// rows with holes replay the per-component residual recurrence over their
/// observed entries, which is what extraction itself does.
inline Eigen::MatrixXd project(const PlsGlrModel& model, const ExpressionMatrix& x_new) {
    const Index p = model.gene_count();
    if (x_new.cols() != p)
        throw data_error("query has " + std::to_string(x_new.cols()) + " genes, model expects " +
                         std::to_string(p));
    const Index n = x_new.rows(), m = model.m();
    Eigen::MatrixXd t(n, m);
    for (Index i = 0; i < n; ++i) {
        if (x_new.row_complete(i)) {
            t.row(i) =
                (x_new.values.row(i) - model.column_means.transpose()) * model.x_weights;
            continue;
        }
        Eigen::VectorXd r(p);
        for (Index j = 0; j < p; ++j)
            r(j) = x_new.mask(i, j) ? x_new.values(i, j) - model.column_means(j) : 0.0;
        for (Index h = 0; h < m; ++h) {
            double s = 0.0;
            for (Index j = 0; j < p; ++j)
                if (x_new.mask(i, j)) s += r(j) * model.weights(j, h);
            t(i, h) = s;
            for (Index j = 0; j < p; ++j)
                if (x_new.mask(i, j)) r(j) -= s * model.loadings(j, h);
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// classifier heads
// ---------------------------------------------------------------------------

struct PlsGlrLogHead {
    PlsGlrModel model;
    Eigen::VectorXd coefficients; // intercept + one slope per component
    bool link_converged = true;   // false when the component-space logit separated
};

inline PlsGlrLogHead fit_plsglr_log(const Dataset& d, Index m, PlsGlrOptions opts = {}) {
    if (d.y.class_count != 2) throw data_error("plsglr-log is a two-class classifier");
    opts.family = Family::binomial_logit;

    PlsGlrLogHead head;
    head.model = extract_components(d, m, opts);

    const Index mm = head.model.m();
    Eigen::MatrixXd design(d.x.rows(), mm + 1);
    design.col(0).setOnes();
    design.rightCols(mm) = head.model.components;
    const GlmFit fit = fit_glm(design, detail::response_vector(d, Family::binomial_logit),
                               Family::binomial_logit, opts.glm);
    // On separation the last iterate still ranks samples correctly; keep it.
    head.coefficients = fit.coefficients;
    head.link_converged = fit.converged;
    return head;
}

inline Eigen::VectorXd predict_probabilities(const PlsGlrLogHead& head, const ExpressionMatrix& x_new) {
    const Eigen::MatrixXd t = project(head.model, x_new);
    const Eigen::VectorXd eta =
        (head.coefficients(0) + (t * head.coefficients.tail(head.model.m())).array()).matrix();
    return (1.0 / (1.0 + (-eta.array()).exp())).matrix();
}

inline std::vector<int> predict(const PlsGlrLogHead& head, const ExpressionMatrix& x_new) {
    const Eigen::VectorXd prob = predict_probabilities(head, x_new);
    std::vector<int> out(static_cast<std::size_t>(prob.size()));
    for (Index i = 0; i < prob.size(); ++i) out[static_cast<std::size_t>(i)] = prob(i) > 0.5 ? 1 : 0;
    return out;
}

struct PlsGlrDaHead {
    PlsGlrModel model;
    LdaModel lda;                     // on the component scores
    std::vector<Index> excluded_rows; // training rows with holes, left out of the LDA fit
};

inline PlsGlrDaHead fit_plsglrda(const Dataset& d, Index m, PlsGlrOptions opts = {},
                                 double lda_ridge = 0.0) {
    if (d.y.class_count != 2) throw data_error("plsglrda is a two-class classifier");
    opts.family = Family::binomial_logit;

    PlsGlrDaHead head;
    head.model = extract_components(d, m, opts);

    std::vector<Index> rows;
    for (Index i = 0; i < d.x.rows(); ++i) {
        if (d.x.row_complete(i)) rows.push_back(i);
        else head.excluded_rows.push_back(i);
    }

    Eigen::MatrixXd scores(static_cast<Index>(rows.size()), head.model.m());
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        scores.row(static_cast<Index>(r)) = head.model.components.row(rows[r]);
        labels.push_back(d.y.labels[static_cast<std::size_t>(rows[r])]);
    }
    LabelVector yl = d.y;
    yl.labels = labels;
    head.lda = fit_lda(scores, yl, lda_ridge);
    return head;
}

inline std::vector<int> predict(const PlsGlrDaHead& head, const ExpressionMatrix& x_new) {
    return lda_predict(head.lda, project(head.model, x_new)).labels;
}

} // namespace gxlearn

#endif
