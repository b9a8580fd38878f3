#ifndef GXLEARN_DATASET_HPP
#define GXLEARN_DATASET_HPP

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gxlearn/errors.hpp"

namespace gxlearn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using MaskArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Samples-as-rows matrix of feature values with an observed-entry mask.
/// Masked cells hold NaN and are never read by any arithmetic; every routine
/// either restricts itself to observed entries or requires a complete matrix.
struct ExpressionMatrix {
    MatrixXd values;                     // n x p, NaN at masked cells
    MaskArray mask;                      // n x p, true = observed
    std::vector<std::string> gene_ids;   // p
    std::vector<std::string> sample_ids; // n

    Index rows() const { return values.rows(); }
    Index cols() const { return values.cols(); }

    bool observed(Index i, Index j) const { return mask(i, j); }
    bool is_complete() const { return mask.all(); }

    bool row_complete(Index i) const {
        for (Index j = 0; j < cols(); ++j)
            if (!mask(i, j)) return false;
        return true;
    }

    /// Copy of values with masked cells replaced by zero; a compute buffer for
    /// masked sums expressed as dense products.
    MatrixXd values_or_zero() const {
        MatrixXd z = values;
        for (Index i = 0; i < rows(); ++i)
            for (Index j = 0; j < cols(); ++j)
                if (!mask(i, j)) z(i, j) = 0.0;
        return z;
    }

    MatrixXd mask_as_double() const { return mask.cast<double>().matrix(); }

    static std::vector<std::string> default_ids(Index n, const char* prefix) {
        std::vector<std::string> ids(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = std::string(prefix) + std::to_string(i + 1);
        return ids;
    }

    /// Builds a fully observed matrix; ids default to g1..gp / s1..sn.
    static ExpressionMatrix complete(MatrixXd v,
                                     std::vector<std::string> genes = {},
                                     std::vector<std::string> samples = {}) {
        ExpressionMatrix x;
        x.mask = MaskArray::Constant(v.rows(), v.cols(), true);
        x.values = std::move(v);
        x.gene_ids = genes.empty() ? default_ids(x.values.cols(), "g") : std::move(genes);
        x.sample_ids = samples.empty() ? default_ids(x.values.rows(), "s") : std::move(samples);
        x.validate();
        return x;
    }

    void validate() const {
        if (rows() < 1 || cols() < 1) throw data_error("matrix must have at least one row and one column");
        if (mask.rows() != rows() || mask.cols() != cols()) throw data_error("mask shape differs from values shape");
        if (static_cast<Index>(gene_ids.size()) != cols()) throw data_error("gene id count differs from column count");
        if (static_cast<Index>(sample_ids.size()) != rows()) throw data_error("sample id count differs from row count");
        for (Index i = 0; i < rows(); ++i)
            for (Index j = 0; j < cols(); ++j)
                if (mask(i, j) && !std::isfinite(values(i, j)))
                    throw data_error("non-finite observed entry at row " + std::to_string(i) +
                                     ", column " + std::to_string(j));
    }

    Index count_observed_in_column(Index j) const {
        Index c = 0;
        for (Index i = 0; i < rows(); ++i)
            if (mask(i, j)) ++c;
        return c;
    }

    ExpressionMatrix subset_rows(const std::vector<Index>& idx) const {
        ExpressionMatrix out;
        out.values.resize(static_cast<Index>(idx.size()), cols());
        out.mask.resize(static_cast<Index>(idx.size()), cols());
        out.sample_ids.reserve(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            out.values.row(static_cast<Index>(r)) = values.row(idx[r]);
            out.mask.row(static_cast<Index>(r)) = mask.row(idx[r]);
            out.sample_ids.push_back(sample_ids[static_cast<std::size_t>(idx[r])]);
        }
        out.gene_ids = gene_ids;
        return out;
    }

    ExpressionMatrix subset_columns(const std::vector<Index>& idx) const {
        ExpressionMatrix out;
        out.values.resize(rows(), static_cast<Index>(idx.size()));
        out.mask.resize(rows(), static_cast<Index>(idx.size()));
        out.gene_ids.reserve(idx.size());
        for (std::size_t c = 0; c < idx.size(); ++c) {
            out.values.col(static_cast<Index>(c)) = values.col(idx[c]);
            out.mask.col(static_cast<Index>(c)) = mask.col(idx[c]);
            out.gene_ids.push_back(gene_ids[static_cast<std::size_t>(idx[c])]);
        }
        out.sample_ids = sample_ids;
        return out;
    }
};

/// Class labels in {0,..,class_count-1}; class_names keeps the original
/// spellings in first-appearance order for readable reports.
struct LabelVector {
    std::vector<int> labels;
    int class_count = 0;
    std::vector<std::string> class_names;

    Index size() const { return static_cast<Index>(labels.size()); }

    void validate() const {
        if (labels.empty()) throw data_error("label vector is empty");
        if (class_count < 2) throw data_error("need at least two classes, got " + std::to_string(class_count));
        if (static_cast<int>(class_names.size()) != class_count)
            throw data_error("class name count differs from class count");
        for (int l : labels)
            if (l < 0 || l >= class_count)
                throw data_error("label " + std::to_string(l) + " outside [0, " +
                                 std::to_string(class_count) + ")");
    }

    /// Fitting precondition: every class occurs at least once.
    void require_all_classes() const {
        validate();
        std::vector<int> counts(static_cast<std::size_t>(class_count), 0);
        for (int l : labels) ++counts[static_cast<std::size_t>(l)];
        for (int c = 0; c < class_count; ++c)
            if (counts[static_cast<std::size_t>(c)] == 0)
                throw data_error("class " + class_names[static_cast<std::size_t>(c)] +
                                 " (index " + std::to_string(c) + ") has zero members");
    }

    std::vector<int> class_counts() const {
        std::vector<int> counts(static_cast<std::size_t>(class_count), 0);
        for (int l : labels) ++counts[static_cast<std::size_t>(l)];
        return counts;
    }

    /// Maps raw label strings to 0..C-1 in first-appearance order.
    static LabelVector from_strings(const std::vector<std::string>& raw) {
        LabelVector y;
        y.labels.reserve(raw.size());
        for (const auto& s : raw) {
            int idx = -1;
            for (std::size_t c = 0; c < y.class_names.size(); ++c)
                if (y.class_names[c] == s) { idx = static_cast<int>(c); break; }
            if (idx < 0) {
                idx = static_cast<int>(y.class_names.size());
                y.class_names.push_back(s);
            }
            y.labels.push_back(idx);
        }
        y.class_count = static_cast<int>(y.class_names.size());
        y.validate();
        return y;
    }

    static LabelVector from_ints(const std::vector<int>& raw) {
        std::vector<std::string> s;
        s.reserve(raw.size());
        for (int v : raw) s.push_back(std::to_string(v));
        return from_strings(s);
    }

    LabelVector subset(const std::vector<Index>& idx) const {
        LabelVector out;
        out.class_count = class_count;
        out.class_names = class_names;
        out.labels.reserve(idx.size());
        for (Index i : idx) out.labels.push_back(labels[static_cast<std::size_t>(i)]);
        return out;
    }

    VectorXd as_real() const {
        VectorXd v(size());
        for (Index i = 0; i < size(); ++i) v(i) = static_cast<double>(labels[static_cast<std::size_t>(i)]);
        return v;
    }
};

struct Dataset {
    ExpressionMatrix x;
    LabelVector y;

    void validate() const {
        x.validate();
        y.validate();
        if (x.rows() != y.size())
            throw data_error("label/sample count mismatch: " + std::to_string(x.rows()) +
                             " samples vs " + std::to_string(y.size()) + " labels");
    }

    Dataset subset_rows(const std::vector<Index>& idx) const {
        return Dataset{x.subset_rows(idx), y.subset(idx)};
    }

    Dataset subset_columns(const std::vector<Index>& idx) const {
        return Dataset{x.subset_columns(idx), y};
    }
};

struct CenteredMatrix {
    ExpressionMatrix matrix;
    VectorXd means; // per-column mean over observed entries
};

/// Centers each column to zero mean over its observed entries.
inline CenteredMatrix center_columns(const ExpressionMatrix& x) {
    CenteredMatrix out;
    out.matrix = x;
    out.means.resize(x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
        double sum = 0.0;
        Index n_obs = 0;
        for (Index i = 0; i < x.rows(); ++i) {
            if (x.mask(i, j)) { sum += x.values(i, j); ++n_obs; }
        }
        if (n_obs == 0) throw data_error("column " + std::to_string(j) + " has no observed entries");
        const double m = sum / static_cast<double>(n_obs);
        out.means(j) = m;
        for (Index i = 0; i < x.rows(); ++i)
            if (x.mask(i, j)) out.matrix.values(i, j) -= m;
    }
    return out;
}

} // namespace gxlearn

#endif
