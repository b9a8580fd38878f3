#ifndef GXLEARN_PREPROCESS_HPP
#define GXLEARN_PREPROCESS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gxlearn/dataset.hpp"
#include "gxlearn/errors.hpp"
#include "gxlearn/stats.hpp"

namespace gxlearn {

/// Intensity preprocessing settings. The defaults are the customary
/// microarray values (clip to [100, 16000], drop genes with max/min <= 5
/// or max-min <= 500, log10, standardize); everything is overridable.
struct PreprocessConfig {
    double floor = 100.0;
    double ceil = 16000.0;
    double fold_min = 5.0;
    double span_min = 500.0;
    double log_base = 10.0;
    bool standardize = true;

    void validate() const {
        if (!(floor > 0.0) || !(floor < ceil)) throw data_error("require 0 < floor < ceil");
        if (!(fold_min > 0.0)) throw data_error("fold_min must be positive");
        if (!(span_min > 0.0)) throw data_error("span_min must be positive");
        if (!(log_base > 1.0)) throw data_error("log_base must exceed 1");
    }
};

inline ExpressionMatrix threshold_clip(const ExpressionMatrix& x, const PreprocessConfig& cfg = {}) {
    cfg.validate();
    ExpressionMatrix out = x;
    for (Index i = 0; i < out.rows(); ++i)
        for (Index j = 0; j < out.cols(); ++j)
            if (out.mask(i, j)) out.values(i, j) = std::clamp(out.values(i, j), cfg.floor, cfg.ceil);
    return out;
}

struct FilterResult {
    ExpressionMatrix matrix;
    std::vector<Index> kept_indices;
};

/// Keeps gene j iff max_j/min_j > fold_min AND max_j - min_j > span_min, both
/// strict, extrema over observed entries. Genes with no observed entries or a
/// nonpositive minimum never satisfy the ratio rule and are dropped.
inline FilterResult filter_genes(const ExpressionMatrix& x, const PreprocessConfig& cfg = {}) {
    cfg.validate();
    std::vector<Index> kept;
    for (Index j = 0; j < x.cols(); ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        bool any = false;
        for (Index i = 0; i < x.rows(); ++i) {
            if (!x.mask(i, j)) continue;
            any = true;
            lo = std::min(lo, x.values(i, j));
            hi = std::max(hi, x.values(i, j));
        }
        if (!any || lo <= 0.0) continue;
        if (hi / lo > cfg.fold_min && hi - lo > cfg.span_min) kept.push_back(j);
    }
    if (kept.empty()) throw data_error("empty filter result: no gene passes the fold/span rules");
    return {x.subset_columns(kept), kept};
}

inline ExpressionMatrix log_transform(const ExpressionMatrix& x, const PreprocessConfig& cfg = {}) {
    cfg.validate();
    ExpressionMatrix out = x;
    const double denom = std::log(cfg.log_base);
    for (Index i = 0; i < out.rows(); ++i)
        for (Index j = 0; j < out.cols(); ++j) {
            if (!out.mask(i, j)) continue;
            if (!(out.values(i, j) > 0.0))
                throw data_error("log transform requires positive values; cell (" + std::to_string(i) +
                                 "," + std::to_string(j) + ") is " + std::to_string(out.values(i, j)));
            out.values(i, j) = std::log(out.values(i, j)) / denom;
        }
    return out;
}

namespace detail {

inline void standardize_vector_span(ExpressionMatrix& x, bool per_row, Index k) {
    const Index len = per_row ? x.cols() : x.rows();
    double sum = 0.0;
    Index n_obs = 0;
    for (Index t = 0; t < len; ++t) {
        const Index i = per_row ? k : t, j = per_row ? t : k;
        if (!x.mask(i, j)) continue;
        sum += x.values(i, j);
        ++n_obs;
    }
    const char* unit = per_row ? "sample" : "gene";
    if (n_obs < 2)
        throw data_error(std::string(unit) + " " + std::to_string(k) + " has fewer than 2 observed values");
    const double mean = sum / static_cast<double>(n_obs);
    double ss = 0.0;
    for (Index t = 0; t < len; ++t) {
        const Index i = per_row ? k : t, j = per_row ? t : k;
        if (!x.mask(i, j)) continue;
        const double d = x.values(i, j) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n_obs)); // population convention
    if (sd == 0.0) throw data_error(std::string(unit) + " " + std::to_string(k) + " has zero variance");
    for (Index t = 0; t < len; ++t) {
        const Index i = per_row ? k : t, j = per_row ? t : k;
        if (x.mask(i, j)) x.values(i, j) = (x.values(i, j) - mean) / sd;
    }
}

} // namespace detail

/// Per-sample (row) mean-0 / sd-1 rescaling; population (divide-by-n) sd.
inline ExpressionMatrix standardize_samples(const ExpressionMatrix& x) {
    ExpressionMatrix out = x;
    for (Index i = 0; i < out.rows(); ++i) detail::standardize_vector_span(out, true, i);
    return out;
}

/// Per-gene (column) variant, for protocols that standardize gene profiles.
inline ExpressionMatrix standardize_genes(const ExpressionMatrix& x) {
    ExpressionMatrix out = x;
    for (Index j = 0; j < out.cols(); ++j) detail::standardize_vector_span(out, false, j);
    return out;
}

struct RleSummary {
    ExpressionMatrix residuals;       // x minus each gene's observed median
    std::vector<BoxStats> per_sample; // box statistics of each sample's residuals
};

/// Relative log expression: subtract each gene's median (over observed
/// entries), then summarize per sample. On well-normalized data every sample's
/// residual box hugs zero.
inline RleSummary rle_stats(const ExpressionMatrix& x) {
    RleSummary s;
    s.residuals = x;
    for (Index j = 0; j < x.cols(); ++j) {
        std::vector<double> col;
        col.reserve(static_cast<std::size_t>(x.rows()));
        for (Index i = 0; i < x.rows(); ++i)
            if (x.mask(i, j)) col.push_back(x.values(i, j));
        if (col.empty()) throw data_error("gene " + std::to_string(j) + " has no observed entries");
        const double med = median(col);
        for (Index i = 0; i < x.rows(); ++i)
            if (x.mask(i, j)) s.residuals.values(i, j) -= med;
    }
    s.per_sample.reserve(static_cast<std::size_t>(x.rows()));
    for (Index i = 0; i < x.rows(); ++i) {
        std::vector<double> row;
        for (Index j = 0; j < x.cols(); ++j)
            if (x.mask(i, j)) row.push_back(s.residuals.values(i, j));
        if (row.empty()) throw data_error("sample " + std::to_string(i) + " has no observed entries");
        s.per_sample.push_back(box_stats_from(row));
    }
    return s;
}

/// A sample passes when its residual box is centered (|median| <= center_max)
/// and narrow (IQR <= width_max); both bounds inclusive.
inline std::vector<bool> rle_quality(const RleSummary& summary, double width_max = 0.2,
                                     double center_max = 0.1) {
    std::vector<bool> pass;
    pass.reserve(summary.per_sample.size());
    for (const auto& b : summary.per_sample)
        pass.push_back(std::abs(b.median) <= center_max && b.iqr <= width_max);
    return pass;
}

/// Raw-value per-sample box statistics (no median centering).
inline std::vector<BoxStats> box_stats(const ExpressionMatrix& x) {
    std::vector<BoxStats> out;
    out.reserve(static_cast<std::size_t>(x.rows()));
    for (Index i = 0; i < x.rows(); ++i) {
        std::vector<double> row;
        for (Index j = 0; j < x.cols(); ++j)
            if (x.mask(i, j)) row.push_back(x.values(i, j));
        if (row.empty()) throw data_error("sample " + std::to_string(i) + " has no observed entries");
        out.push_back(box_stats_from(row));
    }
    return out;
}

struct PcaResult {
    Eigen::MatrixXd scores;               // n x k projections
    Eigen::MatrixXd directions;           // p x k right singular vectors
    Eigen::VectorXd explained_fractions;  // share of total variance, one per kept component
};

/// SVD of the column-centered matrix; requires complete data (run after
/// preprocessing). Sign convention: each direction's largest-magnitude entry
/// is positive, so scores are reproducible across runs.
inline PcaResult pca_scores(const ExpressionMatrix& x, Index k) {
    if (!x.is_complete())
        throw data_error("pca requires complete data; " +
                         std::to_string(static_cast<long long>((!x.mask).count())) + " cells are missing");
    const Index r = std::min(x.rows(), x.cols());
    if (k < 0 || k > r) throw data_error("pca component count out of range");

    PcaResult res;
    res.scores.resize(x.rows(), k);
    res.directions.resize(x.cols(), k);
    res.explained_fractions.resize(k);
    if (k == 0) return res;

    Eigen::MatrixXd c = x.values.rowwise() - x.values.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double total = sv.squaredNorm();

    for (Index a = 0; a < k; ++a) {
        Eigen::VectorXd v = svd.matrixV().col(a);
        Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0.0) v = -v;
        res.directions.col(a) = v;
        res.scores.col(a) = c * v;
        res.explained_fractions(a) = total > 0.0 ? sv(a) * sv(a) / total : 0.0;
    }
    return res;
}

} // namespace gxlearn

#endif
