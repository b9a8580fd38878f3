#ifndef GXLEARN_BASELINES_HPP
#define GXLEARN_BASELINES_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gxlearn/dataset.hpp"
#include "gxlearn/errors.hpp"
#include "gxlearn/parallel.hpp"

namespace gxlearn {

// ---------------------------------------------------------------------------
// k-nearest neighbours
// ---------------------------------------------------------------------------

struct KnnConfig {
    Index k = 3;
    enum class Metric { euclidean } metric = Metric::euclidean;
};

/// Majority vote among the k nearest training rows. Distance ties resolve by
/// ascending training index, vote ties by smallest class label, so results
/// are reproducible. Masked cells are refused: imputation is not this
/// classifier's job.
inline std::vector<int> knn_classify(const Dataset& train, const KnnConfig& cfg,
                                     const ExpressionMatrix& x_new) {
    train.validate();
    if (!train.x.is_complete() || !x_new.is_complete())
        throw data_error("knn requires complete data");
    if (x_new.cols() != train.x.cols()) throw data_error("query gene count differs from training data");
    if (cfg.k < 1 || cfg.k > train.x.rows())
        throw data_error("k must lie in [1, training sample count]");

    const Index n = train.x.rows();
    std::vector<int> out(static_cast<std::size_t>(x_new.rows()));
    parallel_for(static_cast<std::size_t>(x_new.rows()), [&](std::size_t si) {
        const Index i = static_cast<Index>(si);
        std::vector<std::pair<double, Index>> dist;
        dist.reserve(static_cast<std::size_t>(n));
        for (Index r = 0; r < n; ++r)
            dist.emplace_back((train.x.values.row(r) - x_new.values.row(i)).squaredNorm(), r);
        std::sort(dist.begin(), dist.end()); // pair ordering = distance, then training index
        std::vector<int> votes(static_cast<std::size_t>(train.y.class_count), 0);
        for (Index t = 0; t < cfg.k; ++t)
            ++votes[static_cast<std::size_t>(
                train.y.labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(t)].second)])];
        int best = 0;
        for (int c = 1; c < train.y.class_count; ++c)
            if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
        out[si] = best;
    });
    return out;
}

// ---------------------------------------------------------------------------
// linear discriminant analysis
// ---------------------------------------------------------------------------

struct LdaModel {
    Eigen::MatrixXd class_means;   // C x q
    Eigen::MatrixXd sigma_inverse; // q x q
    Eigen::VectorXd log_priors;    // C
    double ridge_used = 0.0;

    int class_count() const { return static_cast<int>(log_priors.size()); }
    Index dim() const { return class_means.cols(); }
};

/// Pooled-covariance LDA. Sigma is the within-class covariance divided by
/// n - C; ridge > 0 adds ridge * (trace(Sigma)/q) * I before inversion, which
/// keeps the regularization scale-free.
inline LdaModel fit_lda(const Eigen::MatrixXd& x, const LabelVector& y, double ridge = 0.0) {
    const Index n = x.rows(), q = x.cols();
    y.validate();
    if (static_cast<Index>(y.labels.size()) != n) throw data_error("label/sample count mismatch");
    if (!x.allFinite()) throw data_error("lda requires complete, finite data");
    if (ridge < 0.0) throw data_error("ridge must be nonnegative");
    y.require_all_classes();
    const int C = y.class_count;
    const auto counts = y.class_counts();
    for (int c = 0; c < C; ++c)
        if (counts[static_cast<std::size_t>(c)] < 2)
            throw data_error("lda needs at least 2 samples per class; class " + std::to_string(c) +
                             " has " + std::to_string(counts[static_cast<std::size_t>(c)]));

    LdaModel m;
    m.ridge_used = ridge;
    m.class_means.setZero(C, q);
    for (Index i = 0; i < n; ++i) m.class_means.row(y.labels[static_cast<std::size_t>(i)]) += x.row(i);
    for (int c = 0; c < C; ++c) m.class_means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(q, q);
    for (Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd d = x.row(i) - m.class_means.row(y.labels[static_cast<std::size_t>(i)]);
        sigma.noalias() += d.transpose() * d;
    }
    sigma /= static_cast<double>(n - C);
    if (ridge > 0.0 && q > 0) sigma += ridge * (sigma.trace() / static_cast<double>(q)) * Eigen::MatrixXd::Identity(q, q);

    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (q > 0 && llt.info() != Eigen::Success)
        throw numeric_error("singular pooled covariance; use a positive ridge (feature count likely "
                            "exceeds sample count)");
    m.sigma_inverse = q > 0 ? llt.solve(Eigen::MatrixXd::Identity(q, q)) : Eigen::MatrixXd(0, 0);

    m.log_priors.resize(C);
    for (int c = 0; c < C; ++c)
        m.log_priors(c) = std::log(static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                                   static_cast<double>(n));
    return m;
}

inline LdaModel fit_lda(const Dataset& d, double ridge = 0.0) {
    d.validate();
    if (!d.x.is_complete()) throw data_error("lda requires complete data");
    return fit_lda(d.x.values, d.y, ridge);
}

struct LdaPrediction {
    std::vector<int> labels;
    Eigen::MatrixXd scores; // n x C discriminants
};

inline LdaPrediction lda_predict(const LdaModel& m, const Eigen::MatrixXd& x_new) {
    if (x_new.cols() != m.dim()) throw data_error("query feature count differs from the lda model");
    if (!x_new.allFinite()) throw data_error("lda requires complete, finite data");
    const int C = m.class_count();
    LdaPrediction out;
    out.labels.resize(static_cast<std::size_t>(x_new.rows()));
    out.scores.resize(x_new.rows(), C);

    Eigen::MatrixXd lin = m.class_means * m.sigma_inverse; // C x q
    Eigen::VectorXd offset(C);
    for (int c = 0; c < C; ++c)
        offset(c) = -0.5 * lin.row(c).dot(m.class_means.row(c)) + m.log_priors(c);

    parallel_for(static_cast<std::size_t>(x_new.rows()), [&](std::size_t si) {
        const Index i = static_cast<Index>(si);
        int best = 0;
        for (int c = 0; c < C; ++c) {
            const double s = (m.dim() > 0 ? lin.row(c).dot(x_new.row(i)) : 0.0) + offset(c);
            out.scores(i, c) = s;
            if (s > out.scores(i, best)) best = c; // strict: ties keep the smaller label
        }
        out.labels[si] = best;
    });
    return out;
}

// ---------------------------------------------------------------------------
// PLS discriminant analysis: two-block NIPALS scores, then LDA on them
// ---------------------------------------------------------------------------

struct PlsDaModel {
    Eigen::MatrixXd weights;      // p x m NIPALS weights (unit columns)
    Eigen::MatrixXd x_loadings;   // p x m
    Eigen::MatrixXd x_weights;    // p x m, scores = centered X * x_weights
    Eigen::VectorXd column_means; // p
    Eigen::MatrixXd scores;       // n x m training components
    LdaModel lda;
    int class_count = 0;

    Index m() const { return weights.cols(); }
};

namespace detail {

inline void flip_to_positive_peak(Eigen::VectorXd& v) {
    Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;
}

} // namespace detail

struct NipalsResult {
    Eigen::MatrixXd weights;    // p x m
    Eigen::MatrixXd x_loadings; // p x m
    Eigen::MatrixXd scores;     // n x m
};

/// Classical two-block NIPALS on already-centered X and Y. Stops early if a
/// component carries no variance; the returned matrices then have fewer than
/// m columns.
inline NipalsResult nipals_pls(Eigen::MatrixXd x, Eigen::MatrixXd y, Index m,
                               int max_iter = 500, double tol = 1e-12) {
    const Index n = x.rows(), p = x.cols();
    if (y.rows() != n) throw data_error("nipals block row mismatch");
    if (m < 1 || m > std::min(n, p)) throw data_error("component count out of range");

    NipalsResult r;
    r.weights.resize(p, m);
    r.x_loadings.resize(p, m);
    r.scores.resize(n, m);
    Index done = 0;

    for (Index h = 0; h < m; ++h) {
        // start u from the residual-Y column with the most variance (ties: first)
        Index ustart = 0;
        y.colwise().squaredNorm().maxCoeff(&ustart);
        Eigen::VectorXd u = y.col(ustart);
        if (u.squaredNorm() == 0.0) break;

        Eigen::VectorXd w(p), t(n), told = Eigen::VectorXd::Zero(n);
        for (int it = 0; it < max_iter; ++it) {
            w = x.transpose() * u;
            const double wn = w.norm();
            if (wn == 0.0) break;
            w /= wn;
            t = x * w;
            const Eigen::VectorXd c = y.transpose() * t / t.squaredNorm();
            u = y * c / c.squaredNorm();
            if ((t - told).norm() <= tol * std::max(1.0, t.norm())) break;
            told = t;
        }
        if (w.norm() == 0.0 || t.squaredNorm() == 0.0) break;

        detail::flip_to_positive_peak(w);
        t = x * w;
        const Eigen::VectorXd pl = x.transpose() * t / t.squaredNorm();
        const Eigen::VectorXd c = y.transpose() * t / t.squaredNorm();
        x -= t * pl.transpose();
        y -= t * c.transpose();

        r.weights.col(h) = w;
        r.x_loadings.col(h) = pl;
        r.scores.col(h) = t;
        ++done;
    }
    if (done == 0) throw numeric_error("nipals found no informative component");
    r.weights.conservativeResize(p, done);
    r.x_loadings.conservativeResize(p, done);
    r.scores.conservativeResize(r.scores.rows(), done);
    return r;
}

inline PlsDaModel fit_plsda(const Dataset& d, Index m, double lda_ridge = 0.0) {
    d.validate();
    if (!d.x.is_complete()) throw data_error("plsda requires complete data");
    d.y.require_all_classes();

    const Index n = d.x.rows();
    const int C = d.y.class_count;
    Eigen::MatrixXd dummy = Eigen::MatrixXd::Zero(n, C);
    for (Index i = 0; i < n; ++i) dummy(i, d.y.labels[static_cast<std::size_t>(i)]) = 1.0;
    dummy.rowwise() -= dummy.colwise().mean();

    PlsDaModel model;
    model.class_count = C;
    model.column_means = d.x.values.colwise().mean();
    Eigen::MatrixXd xc = d.x.values.rowwise() - model.column_means.transpose();

    auto nip = nipals_pls(xc, dummy, m);
    model.weights = nip.weights;
    model.x_loadings = nip.x_loadings;
    model.scores = nip.scores;

    // scores = Xc * Wstar with Wstar = W (P'W)^{-1}
    Eigen::MatrixXd ptw = nip.x_loadings.transpose() * nip.weights;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(ptw);
    model.x_weights = nip.weights * lu.inverse();

    model.lda = fit_lda(model.scores, d.y, lda_ridge);
    return model;
}

inline Eigen::MatrixXd plsda_project(const PlsDaModel& model, const ExpressionMatrix& x_new) {
    if (!x_new.is_complete()) throw data_error("plsda requires complete data");
    if (x_new.cols() != model.column_means.size()) throw data_error("query gene count differs from model");
    Eigen::MatrixXd xc = x_new.values.rowwise() - model.column_means.transpose();
    return xc * model.x_weights;
}

inline std::vector<int> plsda_predict(const PlsDaModel& model, const ExpressionMatrix& x_new) {
    return lda_predict(model.lda, plsda_project(model, x_new)).labels;
}

} // namespace gxlearn

#endif
