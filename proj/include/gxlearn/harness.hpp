#ifndef GXLEARN_HARNESS_HPP
#define GXLEARN_HARNESS_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gxlearn/baselines.hpp"
#include "gxlearn/dataset.hpp"
#include "gxlearn/errors.hpp"
#include "gxlearn/feature_select.hpp"
#include "gxlearn/kma.hpp"
#include "gxlearn/parallel.hpp"
#include "gxlearn/plsglr.hpp"
#include "gxlearn/preprocess.hpp"

namespace gxlearn {

enum class Method { plsglr_log, plsglrda, knn, lda, plsda, kma, majority };

/// Stable identifiers used by flags, config files, and model files.
inline const char* method_key(Method m) {
    switch (m) {
    case Method::plsglr_log: return "plsglr-log";
    case Method::plsglrda: return "plsglrda";
    case Method::knn: return "knn";
    case Method::lda: return "lda";
    case Method::plsda: return "plsda";
    case Method::kma: return "kma";
    case Method::majority: return "majority";
    }
    return "?";
}

/// Display names in the comparison-table column order.
inline const char* method_display(Method m) {
    switch (m) {
    case Method::plsglr_log: return "PLSGLR-log";
    case Method::plsglrda: return "PLSGLRDA";
    case Method::knn: return "KNN";
    case Method::lda: return "LDA";
    case Method::plsda: return "PLSDA";
    case Method::kma: return "KMA";
    case Method::majority: return "Majority";
    }
    return "?";
}

inline Method parse_method(const std::string& name) {
    for (Method m : {Method::plsglr_log, Method::plsglrda, Method::knn, Method::lda,
                     Method::plsda, Method::kma, Method::majority})
        if (name == method_key(m)) return m;
    throw data_error("unknown method '" + name + "'");
}

/// Canonical column order for comparison tables.
inline std::vector<Method> method_table_order() {
    return {Method::plsglr_log, Method::plsglrda, Method::knn,
            Method::lda,        Method::plsda,    Method::kma};
}

struct ClassifierConfig {
    Method method = Method::plsglr_log;
    Index m = 1;                // latent components (plsglr-log, plsglrda, plsda)
    Index k = 3;                // knn neighbours
    double lambda = 1.0;        // kma ridge
    KernelSpec kernel{KernelKind::rbf, 0.0, 2, 1.0}; // rbf_sigma <= 0: median heuristic at fit
    double epsilon = 0.1;       // kma target smoothing
    double ridge = 0.0;         // lda ridge (also passed to the DA heads)
    bool lda_auto_ridge = true; // raise a zero lda ridge to 1e-3 when genes >= training rows
    PlsGlrOptions plsglr;

    void validate() const {
        if (m < 0) throw data_error("component count must be nonnegative");
        if (k < 1) throw data_error("k must be at least 1");
        if (method == Method::kma) {
            if (!(lambda > 0.0)) throw data_error("lambda must be positive");
            if (!(epsilon > 0.0) || !(epsilon < 0.5)) throw data_error("epsilon must lie in (0, 0.5)");
        }
        if (ridge < 0.0) throw data_error("ridge must be nonnegative");
    }
};

/// Fixed stage order: preprocess -> select -> classify.
struct PipelineSpec {
    std::optional<PreprocessConfig> preprocess; // nullopt: use the matrix as given
    Index p_keep = 0;                           // 0: keep every gene (no ranking step)
    bool in_fold_selection = true;              // recompute filter + ranking inside each training fold
    ClassifierConfig classifier;

    void validate() const {
        if (preprocess) preprocess->validate();
        if (p_keep < 0) throw data_error("p_keep must be nonnegative");
        classifier.validate();
    }
};

// ---------------------------------------------------------------------------
// Stratified k-fold assignment
// ---------------------------------------------------------------------------

struct FoldAssignment {
    std::vector<int> fold; // fold index per sample
    int k = 0;
    std::uint64_t seed = 0;

    std::vector<Index> test_indices(int f) const {
        std::vector<Index> idx;
        for (std::size_t i = 0; i < fold.size(); ++i)
            if (fold[i] == f) idx.push_back(static_cast<Index>(i));
        return idx;
    }

    std::vector<Index> train_indices(int f) const {
        std::vector<Index> idx;
        for (std::size_t i = 0; i < fold.size(); ++i)
            if (fold[i] != f) idx.push_back(static_cast<Index>(i));
        return idx;
    }
};

namespace detail {

/// Bias-free draw from [0, bound) by rejection; avoids the library-specific
/// behaviour of uniform_int_distribution so assignments are portable.
inline std::uint64_t bounded_u64(std::mt19937_64& eng, std::uint64_t bound) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % bound;
    std::uint64_t v = eng();
    while (v >= limit) v = eng();
    return v % bound;
}

inline void shuffle_indices(std::vector<Index>& v, std::mt19937_64& eng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[bounded_u64(eng, i)]);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace detail

/// Shuffles each class independently (one seeded engine, classes in label
/// order) and deals samples round-robin with a cursor that continues across
/// classes, so per-class fold counts differ by at most one and fold sizes
/// stay balanced. Strict mode insists every class can reach every fold.
inline FoldAssignment stratified_kfold(const LabelVector& y, int k, std::uint64_t seed,
                                       bool relaxed = false) {
    y.require_all_classes();
    if (k < 2) throw data_error("fold count must be at least 2");
    if (static_cast<Index>(k) > y.size()) throw data_error("fold count exceeds the sample count");
    const auto counts = y.class_counts();
    if (!relaxed) {
        for (int c = 0; c < y.class_count; ++c)
            if (counts[static_cast<std::size_t>(c)] < k)
                throw data_error("k=" + std::to_string(k) + " exceeds the size of class " +
                                 y.class_names[static_cast<std::size_t>(c)] + " (" +
                                 std::to_string(counts[static_cast<std::size_t>(c)]) +
                                 "); use fewer folds or relaxed mode");
    }

    FoldAssignment out;
    out.k = k;
    out.seed = seed;
    out.fold.assign(y.labels.size(), -1);

    std::mt19937_64 eng(seed);
    int cursor = 0;
    for (int c = 0; c < y.class_count; ++c) {
        std::vector<Index> members;
        for (std::size_t i = 0; i < y.labels.size(); ++i)
            if (y.labels[i] == c) members.push_back(static_cast<Index>(i));
        detail::shuffle_indices(members, eng);
        for (Index i : members) {
            out.fold[static_cast<std::size_t>(i)] = cursor % k;
            ++cursor;
        }
    }
    return out;
}

inline double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw data_error("prediction/truth length mismatch");
    if (truth.empty()) throw data_error("cannot score an empty prediction set");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (predicted[i] != truth[i]) ++wrong;
    return 100.0 * static_cast<double>(wrong) / static_cast<double>(truth.size());
}

// ---------------------------------------------------------------------------
// Pipeline: preprocess -> select -> classify, with frozen decisions
// ---------------------------------------------------------------------------

struct KnnClassifier {
    Dataset train;
    KnnConfig cfg;
};

struct MajorityClassifier {
    int label = 0;
};

using FittedClassifier = std::variant<PlsGlrLogHead, PlsGlrDaHead, KnnClassifier, LdaModel,
                                      PlsDaModel, KmaModel, MajorityClassifier>;

/// Everything needed to score new raw samples exactly as the training fold
/// was scored: the filter decision, the gene selection, and the classifier
/// are all frozen at fit time. Per-sample operations (clip, log,
/// standardize) carry no training statistics, so they are leakage-free by
/// construction.
struct FittedPipeline {
    PipelineSpec spec;              // resolved: effective sigma/ridge/p_keep recorded
    Index raw_gene_count = 0;
    std::vector<Index> filter_kept; // raw-gene indices surviving the fold-change filter
    std::vector<Index> selected;    // post-preprocess indices kept by the ranking; empty = all
    std::vector<std::string> gene_ids;
    int class_count = 0;
    std::vector<std::string> class_names;
    FittedClassifier classifier = MajorityClassifier{};
};

namespace detail {

inline ExpressionMatrix run_preprocess_stages(const ExpressionMatrix& raw,
                                              const PreprocessConfig& cfg,
                                              const std::vector<Index>& kept) {
    ExpressionMatrix x = threshold_clip(raw, cfg);
    x = x.subset_columns(kept);
    x = log_transform(x, cfg);
    if (cfg.standardize) x = standardize_samples(x);
    return x;
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

} // namespace detail

/// Human-readable summary of the hyperparameters a fitted pipeline actually
/// used, with per-fit resolutions (median-heuristic sigma, auto ridge,
/// clamped p_keep) already substituted.
inline std::string describe_settings(const FittedPipeline& fp) {
    const ClassifierConfig& c = fp.spec.classifier;
    std::string s;
    if (!fp.selected.empty()) s += "p_keep=" + std::to_string(fp.selected.size());
    auto add = [&s](const std::string& part) {
        if (!s.empty()) s += ",";
        s += part;
    };
    switch (c.method) {
    case Method::plsglr_log: add("m=" + std::to_string(c.m)); break;
    case Method::plsglrda:
    case Method::plsda:
        add("m=" + std::to_string(c.m));
        if (c.ridge > 0.0) add("ridge=" + detail::format_number(c.ridge));
        break;
    case Method::knn: add("k=" + std::to_string(c.k)); break;
    case Method::lda: add("ridge=" + detail::format_number(c.ridge)); break;
    case Method::kma:
        add("lambda=" + detail::format_number(c.lambda));
        if (c.kernel.kind == KernelKind::rbf)
            add("sigma=" + detail::format_number(c.kernel.rbf_sigma));
        else if (c.kernel.kind == KernelKind::polynomial)
            add("degree=" + std::to_string(c.kernel.poly_degree));
        break;
    case Method::majority: add("majority"); break;
    }
    return s;
}

inline FittedPipeline fit_pipeline(const Dataset& d, const PipelineSpec& spec) {
    spec.validate();
    d.validate();
    d.y.require_all_classes();

    FittedPipeline fp;
    fp.spec = spec;
    fp.raw_gene_count = d.x.cols();
    fp.class_count = d.y.class_count;
    fp.class_names = d.y.class_names;

    Dataset work = d;
    if (spec.preprocess) {
        FilterResult filtered = filter_genes(threshold_clip(d.x, *spec.preprocess), *spec.preprocess);
        fp.filter_kept = filtered.kept_indices;
        work.x = detail::run_preprocess_stages(d.x, *spec.preprocess, fp.filter_kept);
    }

    if (spec.p_keep > 0) {
        // A grid may ask for more genes than the fold's filter kept; cap it
        // rather than failing the whole search, and record the cap.
        const Index effective = std::min<Index>(spec.p_keep, work.x.cols());
        fp.spec.p_keep = effective;
        GeneRanking ranking = bss_wss_ranking(work);
        fp.selected = top_gene_indices(ranking, effective);
        work = work.subset_columns(fp.selected);
    }
    fp.gene_ids = work.x.gene_ids;

    ClassifierConfig& c = fp.spec.classifier;
    switch (c.method) {
    case Method::plsglr_log:
        fp.classifier = fit_plsglr_log(work, c.m, c.plsglr);
        break;
    case Method::plsglrda:
        fp.classifier = fit_plsglrda(work, c.m, c.plsglr, c.ridge);
        break;
    case Method::knn:
        fp.classifier = KnnClassifier{work, KnnConfig{c.k, KnnConfig::Metric::euclidean}};
        break;
    case Method::lda: {
        if (c.lda_auto_ridge && c.ridge == 0.0 && work.x.cols() >= work.x.rows()) c.ridge = 1e-3;
        fp.classifier = fit_lda(work, c.ridge);
        break;
    }
    case Method::plsda:
        fp.classifier = fit_plsda(work, c.m, c.ridge);
        break;
    case Method::kma: {
        if (c.kernel.kind == KernelKind::rbf && c.kernel.rbf_sigma <= 0.0) {
            if (!work.x.is_complete()) throw data_error("kma requires complete data");
            c.kernel.rbf_sigma = median_pairwise_distance(work.x.values);
        }
        fp.classifier = fit_kma(work, c.kernel, c.lambda, c.epsilon);
        break;
    }
    case Method::majority: {
        const auto counts = work.y.class_counts();
        int best = 0;
        for (int cl = 1; cl < work.y.class_count; ++cl)
            if (counts[static_cast<std::size_t>(cl)] > counts[static_cast<std::size_t>(best)])
                best = cl;
        fp.classifier = MajorityClassifier{best};
        break;
    }
    }
    return fp;
}

inline std::vector<int> predict_pipeline(const FittedPipeline& fp, const ExpressionMatrix& raw) {
    if (raw.cols() != fp.raw_gene_count)
        throw data_error("query gene count " + std::to_string(raw.cols()) +
                         " differs from the pipeline's " + std::to_string(fp.raw_gene_count));

    ExpressionMatrix x = raw;
    if (fp.spec.preprocess)
        x = detail::run_preprocess_stages(raw, *fp.spec.preprocess, fp.filter_kept);
    if (!fp.selected.empty()) x = x.subset_columns(fp.selected);

    return std::visit(
        [&x](const auto& model) -> std::vector<int> {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, PlsGlrLogHead> || std::is_same_v<T, PlsGlrDaHead>) {
                return predict(model, x);
            } else if constexpr (std::is_same_v<T, KnnClassifier>) {
                return knn_classify(model.train, model.cfg, x);
            } else if constexpr (std::is_same_v<T, LdaModel>) {
                if (!x.is_complete()) throw data_error("lda requires complete data");
                return lda_predict(model, x.values).labels;
            } else if constexpr (std::is_same_v<T, PlsDaModel>) {
                return plsda_predict(model, x);
            } else if constexpr (std::is_same_v<T, KmaModel>) {
                return predict_kma(model, x).labels;
            } else {
                return std::vector<int>(static_cast<std::size_t>(x.rows()), model.label);
            }
        },
        fp.classifier);
}

// ---------------------------------------------------------------------------
// Hyperparameter grids
// ---------------------------------------------------------------------------

struct HyperGrid {
    std::vector<Index> p_keep;
    std::vector<Index> m;
    std::vector<Index> k;
    std::vector<double> lambda;
    std::vector<double> sigma; // kma rbf width; <= 0 entries mean the median heuristic
    std::vector<double> ridge; // lda

    bool empty() const {
        return p_keep.empty() && m.empty() && k.empty() && lambda.empty() && sigma.empty() &&
               ridge.empty();
    }
};

struct GridPoint {
    Index p_keep = 0;
    Index m = 1;
    Index k = 3;
    double lambda = 1.0;
    double sigma = 0.0;
    double ridge = 0.0;
};

/// Simplicity order used to break inner-CV ties: fewer genes, fewer
/// components or neighbours, then heavier regularization (larger lambda,
/// wider sigma, larger ridge).
inline bool simpler_than(const GridPoint& a, const GridPoint& b) {
    if (a.p_keep != b.p_keep) return a.p_keep < b.p_keep;
    if (a.m != b.m) return a.m < b.m;
    if (a.k != b.k) return a.k < b.k;
    if (a.lambda != b.lambda) return a.lambda > b.lambda;
    if (a.sigma != b.sigma) return a.sigma > b.sigma;
    return a.ridge > b.ridge;
}

inline PipelineSpec apply_grid_point(PipelineSpec spec, const GridPoint& pt) {
    spec.p_keep = pt.p_keep;
    spec.classifier.m = pt.m;
    spec.classifier.k = pt.k;
    spec.classifier.lambda = pt.lambda;
    spec.classifier.kernel.rbf_sigma = pt.sigma;
    spec.classifier.ridge = pt.ridge;
    return spec;
}

/// Cartesian product over the axes that matter for the spec's method;
/// irrelevant axes collapse to the spec's own value so the search space
/// never multiplies across knobs the classifier ignores.
inline std::vector<GridPoint> enumerate_grid(const PipelineSpec& spec, const HyperGrid& grid) {
    const Method method = spec.classifier.method;
    const bool uses_m = method == Method::plsglr_log || method == Method::plsglrda ||
                        method == Method::plsda;
    const bool uses_rbf =
        method == Method::kma && spec.classifier.kernel.kind == KernelKind::rbf;

    auto axis = [](std::vector<Index> values, bool relevant, Index fallback) {
        if (!relevant || values.empty()) return std::vector<Index>{fallback};
        return values;
    };
    auto daxis = [](std::vector<double> values, bool relevant, double fallback) {
        if (!relevant || values.empty()) return std::vector<double>{fallback};
        return values;
    };

    const auto p_keeps = axis(grid.p_keep, true, spec.p_keep);
    const auto ms = axis(grid.m, uses_m, spec.classifier.m);
    const auto ks = axis(grid.k, method == Method::knn, spec.classifier.k);
    const auto lambdas = daxis(grid.lambda, method == Method::kma, spec.classifier.lambda);
    const auto sigmas = daxis(grid.sigma, uses_rbf, spec.classifier.kernel.rbf_sigma);
    const auto ridges = daxis(grid.ridge, method == Method::lda, spec.classifier.ridge);

    std::vector<GridPoint> points;
    for (Index p : p_keeps)
        for (Index m : ms)
            for (Index k : ks)
                for (double lambda : lambdas)
                    for (double sigma : sigmas)
                        for (double ridge : ridges)
                            points.push_back(GridPoint{p, m, k, lambda, sigma, ridge});
    return points;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct EvalReport {
    Method method = Method::majority;
    double error_percent = 0.0; // exact 100*wrong/total; rounding is the report layer's job
    int misclassified = 0;
    int total = 0;
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<int> fold_sizes;
    std::vector<int> fold_errors;
    std::vector<std::string> fold_settings;
    Eigen::MatrixXi confusion;    // truth x predicted
    std::vector<int> predictions; // aligned with the input sample order
    std::vector<std::string> class_names;
};

/// Test hook: sees each fold's training subset and held-out indices before
/// the fit, which is how the no-leakage contract is asserted mechanically.
struct FoldObserver {
    virtual ~FoldObserver() = default;
    virtual void on_fold(int fold, const Dataset& training, const std::vector<Index>& test_rows) = 0;
};

struct CvOptions {
    HyperGrid grid;      // empty: evaluate the spec as given
    int inner_folds = 5; // nested CV folds for the grid search
    FoldObserver* observer = nullptr;
};

struct GridSearchResult {
    GridPoint best;
    PipelineSpec best_spec;
    std::vector<std::pair<GridPoint, double>> table; // inner-CV error % per point
};

inline EvalReport cross_validate(const Dataset& d, const PipelineSpec& spec,
                                 const FoldAssignment& folds, const CvOptions& opts = {});

/// Plain (non-nested) CV error for every grid point over one shared inner
/// fold assignment; ties go to the simpler point.
inline GridSearchResult grid_search(const Dataset& d, const PipelineSpec& spec,
                                    const HyperGrid& grid, int inner_folds, std::uint64_t seed) {
    spec.validate();
    const std::vector<GridPoint> points = enumerate_grid(spec, grid);
    if (points.empty()) throw data_error("empty hyperparameter grid");

    const auto counts = d.y.class_counts();
    const int smallest = *std::min_element(counts.begin(), counts.end());
    const int k = std::min(inner_folds, smallest);
    if (k < 2)
        throw data_error("grid search needs at least two members of every class, got " +
                         std::to_string(smallest));
    const FoldAssignment inner = stratified_kfold(d.y, k, seed);

    GridSearchResult out;
    out.table.reserve(points.size());
    int best_wrong = -1;
    for (const GridPoint& pt : points) {
        const PipelineSpec candidate = apply_grid_point(spec, pt);
        const EvalReport report = cross_validate(d, candidate, inner);
        out.table.emplace_back(pt, report.error_percent);
        const bool better = best_wrong < 0 || report.misclassified < best_wrong ||
                            (report.misclassified == best_wrong && simpler_than(pt, out.best));
        if (better) {
            best_wrong = report.misclassified;
            out.best = pt;
            out.best_spec = candidate;
        }
    }
    return out;
}

inline EvalReport cross_validate(const Dataset& d, const PipelineSpec& spec,
                                 const FoldAssignment& folds, const CvOptions& opts) {
    spec.validate();
    d.validate();
    if (folds.fold.size() != d.y.labels.size())
        throw data_error("fold assignment covers " + std::to_string(folds.fold.size()) +
                         " samples, dataset has " + std::to_string(d.y.labels.size()));
    if (!spec.in_fold_selection && spec.p_keep > 0 && !opts.grid.p_keep.empty())
        throw data_error("global selection cannot search over p_keep");

    // Run-once-on-all-data selection protocol: freeze the ranking globally,
    // then cross-validate on the reduced matrix with selection disabled.
    if (!spec.in_fold_selection && spec.p_keep > 0) {
        Dataset global = d;
        PipelineSpec inner_spec = spec;
        if (spec.preprocess) {
            FilterResult filtered =
                filter_genes(threshold_clip(d.x, *spec.preprocess), *spec.preprocess);
            global.x = detail::run_preprocess_stages(d.x, *spec.preprocess, filtered.kept_indices);
            inner_spec.preprocess.reset(); // already applied
        }
        GeneRanking ranking = bss_wss_ranking(global);
        global = global.subset_columns(
            top_gene_indices(ranking, std::min<Index>(spec.p_keep, global.x.cols())));
        inner_spec.p_keep = 0;
        inner_spec.in_fold_selection = true;
        EvalReport report = cross_validate(global, inner_spec, folds, opts);
        report.method = spec.classifier.method;
        return report;
    }

    const int n = static_cast<int>(d.y.labels.size());
    EvalReport report;
    report.method = spec.classifier.method;
    report.k = folds.k;
    report.seed = folds.seed;
    report.total = n;
    report.fold_sizes.assign(static_cast<std::size_t>(folds.k), 0);
    report.fold_errors.assign(static_cast<std::size_t>(folds.k), 0);
    report.fold_settings.assign(static_cast<std::size_t>(folds.k), "");
    report.confusion = Eigen::MatrixXi::Zero(d.y.class_count, d.y.class_count);
    report.predictions.assign(static_cast<std::size_t>(n), -1);
    report.class_names = d.y.class_names;

    struct FoldOutcome {
        std::vector<Index> test;
        std::vector<int> predicted;
        std::string settings;
    };
    std::vector<FoldOutcome> outcomes(static_cast<std::size_t>(folds.k));

    // A grid that collapses to one candidate for this method forces the
    // outcome, so the inner folds would be pure waste.
    const std::vector<GridPoint> candidates =
        opts.grid.empty() ? std::vector<GridPoint>{} : enumerate_grid(spec, opts.grid);

    parallel_for(static_cast<std::size_t>(folds.k), [&](std::size_t sf) {
        const int f = static_cast<int>(sf);
        try {
            const std::vector<Index> train_idx = folds.train_indices(f);
            const std::vector<Index> test_idx = folds.test_indices(f);
            if (test_idx.empty()) throw data_error("fold is empty");
            Dataset training = d.subset_rows(train_idx);

            PipelineSpec fold_spec = spec;
            if (candidates.size() == 1)
                fold_spec = apply_grid_point(spec, candidates.front());
            else if (candidates.size() > 1)
                fold_spec = grid_search(training, spec, opts.grid, opts.inner_folds,
                                        detail::mix_seed(folds.seed, static_cast<std::uint64_t>(f)))
                                .best_spec;

            if (opts.observer) opts.observer->on_fold(f, training, test_idx);
            const FittedPipeline fitted = fit_pipeline(training, fold_spec);
            FoldOutcome& out = outcomes[sf];
            out.test = test_idx;
            out.predicted = predict_pipeline(fitted, d.x.subset_rows(test_idx));
            out.settings = describe_settings(fitted);
        } catch (const data_error& e) {
            throw data_error("fold " + std::to_string(f) + ": " + e.what());
        } catch (const numeric_error& e) {
            throw numeric_error("fold " + std::to_string(f) + ": " + e.what());
        }
    });

    for (int f = 0; f < folds.k; ++f) {
        const FoldOutcome& out = outcomes[static_cast<std::size_t>(f)];
        report.fold_sizes[static_cast<std::size_t>(f)] = static_cast<int>(out.test.size());
        report.fold_settings[static_cast<std::size_t>(f)] = out.settings;
        for (std::size_t i = 0; i < out.test.size(); ++i) {
            const std::size_t row = static_cast<std::size_t>(out.test[i]);
            const int truth = d.y.labels[row];
            const int pred = out.predicted[i];
            report.predictions[row] = pred;
            report.confusion(truth, pred) += 1;
            if (pred != truth) {
                report.fold_errors[static_cast<std::size_t>(f)] += 1;
                report.misclassified += 1;
            }
        }
    }
    report.error_percent =
        100.0 * static_cast<double>(report.misclassified) / static_cast<double>(n);
    return report;
}

} // namespace gxlearn

#endif
