#ifndef GXLEARN_FEATURE_SELECT_HPP
#define GXLEARN_FEATURE_SELECT_HPP

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "gxlearn/dataset.hpp"
#include "gxlearn/errors.hpp"

namespace gxlearn {

struct GeneRanking {
    std::vector<double> ratios; // per gene, original column order; +inf = perfectly separated
    std::vector<Index> order;   // gene indices by descending ratio, ties by ascending index
};

/// Between-group over within-group sum-of-squares ratio per gene:
///   BSS_j = sum_k n_k (mean_kj - mean_j)^2,  WSS_j = sum_k sum_{i in k} (x_ij - mean_kj)^2.
/// A perfectly separated gene (WSS 0, BSS > 0) gets +inf and ranks first; a
/// constant gene gets 0.
inline GeneRanking bss_wss_ranking(const Dataset& d) {
    d.validate();
    if (!d.x.is_complete()) throw data_error("gene ranking requires complete data");
    d.y.require_all_classes();

    const Index n = d.x.rows(), p = d.x.cols();
    const int C = d.y.class_count;
    const auto counts = d.y.class_counts();

    GeneRanking r;
    r.ratios.resize(static_cast<std::size_t>(p));

    Eigen::MatrixXd class_means(C, p);
    class_means.setZero();
    for (Index i = 0; i < n; ++i) class_means.row(d.y.labels[static_cast<std::size_t>(i)]) += d.x.values.row(i);
    for (int k = 0; k < C; ++k) class_means.row(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
    const Eigen::RowVectorXd overall = d.x.values.colwise().mean();

    for (Index j = 0; j < p; ++j) {
        double bss = 0.0;
        for (int k = 0; k < C; ++k) {
            const double dm = class_means(k, j) - overall(j);
            bss += static_cast<double>(counts[static_cast<std::size_t>(k)]) * dm * dm;
        }
        double wss = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double dv = d.x.values(i, j) - class_means(d.y.labels[static_cast<std::size_t>(i)], j);
            wss += dv * dv;
        }
        double ratio;
        if (wss > 0.0) ratio = bss / wss;
        else ratio = bss > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        r.ratios[static_cast<std::size_t>(j)] = ratio;
    }

    r.order.resize(static_cast<std::size_t>(p));
    std::iota(r.order.begin(), r.order.end(), Index{0});
    std::stable_sort(r.order.begin(), r.order.end(), [&](Index a, Index b) {
        return r.ratios[static_cast<std::size_t>(a)] > r.ratios[static_cast<std::size_t>(b)];
    });
    return r;
}

/// Keeps the p_keep top-ranked genes, preserving their original column order.
inline std::vector<Index> top_gene_indices(const GeneRanking& ranking, Index p_keep) {
    const Index p = static_cast<Index>(ranking.ratios.size());
    if (p_keep < 1 || p_keep > p) throw data_error("p_keep out of range [1, gene count]");
    std::vector<Index> keep(ranking.order.begin(), ranking.order.begin() + p_keep);
    std::sort(keep.begin(), keep.end());
    return keep;
}

inline Dataset select_top(const Dataset& d, const GeneRanking& ranking, Index p_keep) {
    return d.subset_columns(top_gene_indices(ranking, p_keep));
}

} // namespace gxlearn

#endif
