#ifndef GXLEARN_KMA_HPP
#define GXLEARN_KMA_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gxlearn/dataset.hpp"
#include "gxlearn/errors.hpp"
#include "gxlearn/parallel.hpp"
#include "gxlearn/stats.hpp"

namespace gxlearn {

enum class KernelKind { linear_plus_one, rbf, polynomial };

struct KernelSpec {
    KernelKind kind = KernelKind::rbf;
    double rbf_sigma = 1.0;
    int poly_degree = 2;
    double poly_offset = 1.0;

    void validate() const {
        if (kind == KernelKind::rbf && !(rbf_sigma > 0.0))
            throw data_error("rbf kernel width must be positive");
        if (kind == KernelKind::polynomial && poly_degree < 1)
            throw data_error("polynomial degree must be at least 1");
    }
};

/// Median pairwise euclidean distance, the usual default for the rbf width.
/// Falls back to 1 when there are no distinct pairs.
inline double median_pairwise_distance(const Eigen::MatrixXd& x) {
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(x.rows()) * (static_cast<std::size_t>(x.rows()) - 1) / 2);
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = i + 1; j < x.rows(); ++j) d.push_back((x.row(i) - x.row(j)).norm());
    if (d.empty()) return 1.0;
    const double m = median(d);
    return m > 0.0 ? m : 1.0;
}

inline Eigen::MatrixXd gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const KernelSpec& spec) {
    spec.validate();
    if (a.cols() != b.cols()) throw data_error("kernel blocks have different feature counts");
    Eigen::MatrixXd k(a.rows(), b.rows());
    switch (spec.kind) {
    case KernelKind::linear_plus_one:
        k.noalias() = a * b.transpose();
        k.array() += 1.0;
        break;
    case KernelKind::polynomial:
        k.noalias() = a * b.transpose();
        k.array() += spec.poly_offset;
        k = k.array().pow(spec.poly_degree).matrix();
        break;
    case KernelKind::rbf: {
        const double denom = 2.0 * spec.rbf_sigma * spec.rbf_sigma;
        parallel_for(static_cast<std::size_t>(a.rows()), [&](std::size_t si) {
            const Index i = static_cast<Index>(si);
            for (Index j = 0; j < b.rows(); ++j)
                k(i, j) = std::exp(-(a.row(i) - b.row(j)).squaredNorm() / denom);
        });
        break;
    }
    }
    return k;
}

struct MultilogitTarget {
    Eigen::MatrixXd theta; // n x (C-1)
    double smoothing_epsilon = 0.1;
};

/// Smoothed one-hot class probabilities mapped through the multilogit with
/// the largest label index as the reference category: the true class gets
/// 1-eps, every other class eps/(C-1), and theta_j = log(t_j / t_ref).
inline MultilogitTarget encode_targets(const LabelVector& y, double epsilon = 0.1) {
    y.validate();
    if (!(epsilon > 0.0) || !(epsilon < 0.5)) throw data_error("epsilon must lie in (0, 0.5)");
    const int C = y.class_count;
    const Index n = static_cast<Index>(y.labels.size());
    const double other = epsilon / static_cast<double>(C - 1);

    MultilogitTarget out;
    out.smoothing_epsilon = epsilon;
    out.theta.resize(n, C - 1);
    for (Index i = 0; i < n; ++i) {
        const int truth = y.labels[static_cast<std::size_t>(i)];
        const double t_ref = truth == C - 1 ? 1.0 - epsilon : other;
        for (int j = 0; j < C - 1; ++j) {
            const double t_j = truth == j ? 1.0 - epsilon : other;
            out.theta(i, j) = std::log(t_j / t_ref);
        }
    }
    return out;
}

/// Eq.-4 style inverse: softmax over [theta, 0], the reference class taking
/// the implicit zero. Rows sum to one by construction.
inline Eigen::MatrixXd inverse_multilogit(const Eigen::MatrixXd& theta) {
    const Index n = theta.rows();
    const int C = static_cast<int>(theta.cols()) + 1;
    Eigen::MatrixXd p(n, C);
    for (Index i = 0; i < n; ++i) {
        double mx = 0.0; // the reference logit
        for (int j = 0; j < C - 1; ++j) mx = std::max(mx, theta(i, j));
        double denom = std::exp(-mx); // reference term
        for (int j = 0; j < C - 1; ++j) denom += std::exp(theta(i, j) - mx);
        for (int j = 0; j < C - 1; ++j) p(i, j) = std::exp(theta(i, j) - mx) / denom;
        p(i, C - 1) = std::exp(-mx) / denom;
    }
    return p;
}

struct KmaModel {
    Eigen::MatrixXd gamma;   // n x (C-1) dual coefficients
    Eigen::MatrixXd train_x; // retained training rows
    KernelSpec kernel;
    double lambda = 1.0;
    double epsilon = 0.1;
    int class_count = 0;
    std::vector<std::string> class_names;
};

/// Kernel ridge fit of the multilogit targets: solve (K + lambda I) Gamma =
/// theta by Cholesky, with one jitter retry for numerically semidefinite
/// Gram matrices, then verify the solution actually satisfies the system.
inline KmaModel fit_kma(const Dataset& d, const KernelSpec& kernel, double lambda,
                        double epsilon = 0.1) {
    d.validate();
    if (!d.x.is_complete()) throw data_error("kma requires complete data");
    if (!(lambda > 0.0)) throw data_error("lambda must be positive");
    d.y.require_all_classes();

    const Index n = d.x.rows();
    const MultilogitTarget target = encode_targets(d.y, epsilon);

    Eigen::MatrixXd a = gram(d.x.values, d.x.values, kernel);
    a.diagonal().array() += lambda;

    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
        a.diagonal().array() += 1e-10 * a.trace() / static_cast<double>(n);
        llt.compute(a);
        if (llt.info() != Eigen::Success)
            throw numeric_error("kernel system is not positive definite even after jitter");
    }
    Eigen::MatrixXd gamma = llt.solve(target.theta);
    if (!gamma.allFinite()) throw numeric_error("kernel solve produced non-finite coefficients");

    const double resid = (a * gamma - target.theta).norm();
    const double scale = std::max(target.theta.norm(), 1e-30);
    if (resid > 1e-6 * scale)
        throw numeric_error("kernel solve residual " + std::to_string(resid / scale) +
                            " exceeds tolerance");

    KmaModel m;
    m.gamma = std::move(gamma);
    m.train_x = d.x.values;
    m.kernel = kernel;
    m.lambda = lambda;
    m.epsilon = epsilon;
    m.class_count = d.y.class_count;
    m.class_names = d.y.class_names;
    return m;
}

struct KmaPrediction {
    std::vector<int> labels;
    Eigen::MatrixXd probabilities; // n_new x C
};

inline KmaPrediction predict_kma(const KmaModel& m, const ExpressionMatrix& x_new) {
    if (!x_new.is_complete()) throw data_error("kma requires complete data");
    if (x_new.cols() != m.train_x.cols())
        throw data_error("query gene count differs from the kma model");

    const Eigen::MatrixXd theta = gram(x_new.values, m.train_x, m.kernel) * m.gamma;
    KmaPrediction out;
    out.probabilities = inverse_multilogit(theta);
    out.labels.resize(static_cast<std::size_t>(x_new.rows()));
    for (Index i = 0; i < x_new.rows(); ++i) {
        int best = 0;
        for (int c = 1; c < m.class_count; ++c)
            if (out.probabilities(i, c) > out.probabilities(i, best)) best = c;
        out.labels[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

} // namespace gxlearn

#endif
