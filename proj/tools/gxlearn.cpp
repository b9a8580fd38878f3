// gxlearn: preprocessing, diagnostics, gene selection, cross-validated method
// comparison, and train/predict for high-dimensional expression classifiers.
//
// Every subcommand writes its artifacts plus a provenance record (resolved
// configuration, seed, input checksums) into --out; identical inputs and
// arguments produce byte-identical artifacts. Exit codes: 0 success, 2 bad
// command line, 3 data error, 4 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gxlearn/harness.hpp"
#include "gxlearn/io.hpp"
#include "gxlearn/model_io.hpp"
#include "gxlearn/report.hpp"
#include "gxlearn/svg.hpp"

using namespace gxlearn;

namespace {

// ---------------------------------------------------------------------------
// Configuration file + flag binding (file < flags precedence)
// ---------------------------------------------------------------------------

/// Flat key=value configuration file: one pair per line, '#' comments, keys
/// carrying section prefixes like "classifier.m". Keys that the active
/// subcommand does not define are ignored so one file can serve the whole
/// workflow.
struct ConfigMap {
    std::map<std::string, std::string> kv;

    static std::string strip(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    static ConfigMap load(const std::string& path) {
        ConfigMap out;
        if (path.empty()) return out;
        std::ifstream in(path);
        if (!in) throw data_error("cannot open config file '" + path + "'");
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = strip(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw data_error("config line " + std::to_string(line_no) +
                                 " is not key=value: '" + line + "'");
            const std::string key = strip(line.substr(0, eq));
            if (key.empty()) throw data_error("config line " + std::to_string(line_no) + " has an empty key");
            out.kv[key] = strip(line.substr(eq + 1));
        }
        return out;
    }
};

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw data_error("config value " + key + "=" + v + " is not a number");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw data_error("config value " + key + "=" + v + " is not an integer");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw data_error("config value " + key + "=" + v + " is not a boolean");
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

/// Ties one CLI flag to one config key: after parsing, config supplies the
/// value when the flag was absent, and the resolved value is recorded for
/// the provenance file.
struct Bindings {
    struct Item {
        CLI::Option* opt;
        std::string key;
        std::function<void(const std::string&)> from_config;
        std::function<std::string()> resolved;
    };
    std::vector<Item> items;

    void real(CLI::App& cmd, const std::string& flag, const std::string& key, double& var,
              const std::string& desc) {
        auto* opt = cmd.add_option(flag, var, desc);
        items.push_back({opt, key, [&var, key](const std::string& v) { var = parse_real(key, v); },
                         [&var] { return format_real(var); }});
    }
    void integer(CLI::App& cmd, const std::string& flag, const std::string& key, Index& var,
                 const std::string& desc) {
        auto* opt = cmd.add_option(flag, var, desc);
        items.push_back({opt, key,
                         [&var, key](const std::string& v) { var = static_cast<Index>(parse_int(key, v)); },
                         [&var] { return std::to_string(var); }});
    }
    void uint64(CLI::App& cmd, const std::string& flag, const std::string& key, std::uint64_t& var,
                const std::string& desc) {
        auto* opt = cmd.add_option(flag, var, desc);
        items.push_back({opt, key,
                         [&var, key](const std::string& v) {
                             var = static_cast<std::uint64_t>(parse_int(key, v));
                         },
                         [&var] { return std::to_string(var); }});
    }
    void boolean(CLI::App& cmd, const std::string& flag, const std::string& key, bool& var,
                 const std::string& desc) {
        auto* opt = cmd.add_flag(flag, var, desc);
        items.push_back({opt, key, [&var, key](const std::string& v) { var = parse_bool(key, v); },
                         [&var] { return var ? "1" : "0"; }});
    }
    void text(CLI::App& cmd, const std::string& flag, const std::string& key, std::string& var,
              const std::string& desc) {
        auto* opt = cmd.add_option(flag, var, desc);
        items.push_back({opt, key, [&var](const std::string& v) { var = v; },
                         [&var] { return var; }});
    }

    void apply(const ConfigMap& cfg) {
        for (auto& item : items) {
            const auto it = cfg.kv.find(item.key);
            if (it != cfg.kv.end() && item.opt->count() == 0) item.from_config(it->second);
        }
    }

    void write_provenance(std::string& out) const {
        for (const auto& item : items) out += "config." + item.key + " " + item.resolved() + "\n";
    }
};

// ---------------------------------------------------------------------------
// Shared option groups
// ---------------------------------------------------------------------------

struct IoSettings {
    std::string data, labels, out = ".", config;
    std::string delimiter = "auto", na = "NA";
    bool genes_as_rows = false;

    LoadOptions load_options() const {
        LoadOptions o;
        if (delimiter == "auto") o.delimiter = '\0';
        else if (delimiter == "comma") o.delimiter = ',';
        else if (delimiter == "tab") o.delimiter = '\t';
        else if (delimiter.size() == 1) o.delimiter = delimiter[0];
        else throw data_error("delimiter must be auto, comma, tab, or a single character");
        o.na_token = na;
        o.genes_as_rows = genes_as_rows;
        return o;
    }
};

void add_io(CLI::App& cmd, Bindings& b, IoSettings& io, bool needs_labels) {
    cmd.add_option("--data", io.data, "input expression matrix (CSV/TSV)")->required();
    if (needs_labels) cmd.add_option("--labels", io.labels, "class label file, one label per line");
    cmd.add_option("--out", io.out, "output directory for artifacts (default: GXLEARN_OUT or .)")
        ->envname("GXLEARN_OUT");
    cmd.add_option("--config", io.config, "flat key=value configuration file (flags win)");
    b.text(cmd, "--delimiter", "io.delimiter", io.delimiter, "auto|comma|tab|<char>");
    b.text(cmd, "--na", "io.na", io.na, "missing-value token (empty cells always count)");
    b.boolean(cmd, "--genes-as-rows", "io.genes_as_rows", io.genes_as_rows,
              "input stores genes as rows, samples as columns");
}

struct PreprocessSettings {
    bool enabled = true;
    PreprocessConfig cfg;
};

void add_preprocess(CLI::App& cmd, Bindings& b, PreprocessSettings& pp, bool default_on) {
    pp.enabled = default_on;
    b.boolean(cmd, "--preprocess,!--no-preprocess", "preprocess.enabled", pp.enabled,
              "clip, fold-change filter, log, per-sample standardize");
    b.real(cmd, "--floor", "preprocess.floor", pp.cfg.floor, "clip floor");
    b.real(cmd, "--ceil", "preprocess.ceil", pp.cfg.ceil, "clip ceiling");
    b.real(cmd, "--fold-min", "preprocess.fold_min", pp.cfg.fold_min, "max/min filter threshold");
    b.real(cmd, "--span-min", "preprocess.span_min", pp.cfg.span_min, "max-min filter threshold");
    b.real(cmd, "--log-base", "preprocess.log_base", pp.cfg.log_base, "logarithm base");
    b.boolean(cmd, "--standardize,!--no-standardize", "preprocess.standardize",
              pp.cfg.standardize, "standardize each sample to mean 0, sd 1");
}

struct ClassifierSettings {
    std::string method = "plsglr-log";
    Index m = 1, k = 3;
    double lambda = 1.0, sigma = 0.0, epsilon = 0.1, ridge = 0.0;
    std::string kernel = "rbf", family = "binomial";
    double sparsify_p = 0.05;
    bool sparsify = true, stop_insignificant = true, auto_ridge = true;
    Index degree = 2;
    double offset = 1.0;

    ClassifierConfig build() const {
        ClassifierConfig c;
        c.method = parse_method(method);
        c.m = m;
        c.k = k;
        c.lambda = lambda;
        c.epsilon = epsilon;
        c.ridge = ridge;
        c.lda_auto_ridge = auto_ridge;
        if (kernel == "rbf") c.kernel.kind = KernelKind::rbf;
        else if (kernel == "linear-plus-one") c.kernel.kind = KernelKind::linear_plus_one;
        else if (kernel == "polynomial") c.kernel.kind = KernelKind::polynomial;
        else throw data_error("kernel must be rbf, linear-plus-one, or polynomial");
        c.kernel.rbf_sigma = sigma; // <= 0: median heuristic at fit time
        c.kernel.poly_degree = static_cast<int>(degree);
        c.kernel.poly_offset = offset;
        if (family == "binomial") c.plsglr.family = Family::binomial_logit;
        else if (family == "gaussian") c.plsglr.family = Family::gaussian_identity;
        else throw data_error("family must be binomial or gaussian");
        c.plsglr.sparsify_p = sparsify ? std::optional<double>(sparsify_p) : std::nullopt;
        c.plsglr.stop_when_insignificant = stop_insignificant;
        return c;
    }
};

void add_classifier(CLI::App& cmd, Bindings& b, ClassifierSettings& c, bool with_method = true) {
    if (with_method)
        b.text(cmd, "--method", "classifier.method", c.method,
               "plsglr-log|plsglrda|knn|lda|plsda|kma|majority");
    b.integer(cmd, "--m", "classifier.m", c.m, "latent component count");
    b.integer(cmd, "--neighbors,--knn-k", "classifier.k", c.k, "knn neighbour count");
    b.real(cmd, "--lambda", "classifier.lambda", c.lambda, "kma kernel ridge");
    b.real(cmd, "--sigma", "classifier.sigma", c.sigma,
           "kma rbf width; 0 = median pairwise distance of the training fold");
    b.real(cmd, "--epsilon", "classifier.epsilon", c.epsilon, "kma target smoothing in (0,0.5)");
    b.real(cmd, "--ridge", "classifier.ridge", c.ridge, "lda covariance ridge");
    b.text(cmd, "--kernel", "classifier.kernel", c.kernel, "rbf|linear-plus-one|polynomial");
    b.integer(cmd, "--degree", "classifier.degree", c.degree, "polynomial kernel degree");
    b.real(cmd, "--offset", "classifier.offset", c.offset, "polynomial kernel offset");
    b.text(cmd, "--family", "classifier.family", c.family, "plsglr response family");
    b.real(cmd, "--sparsify-p", "classifier.sparsify_p", c.sparsify_p,
           "zero plsglr slopes with Wald p above this");
    b.boolean(cmd, "--sparsify,!--no-sparsify", "classifier.sparsify", c.sparsify,
              "significance-sparsify plsglr slopes");
    b.boolean(cmd, "--stop-insignificant,!--no-stop-insignificant", "classifier.stop",
              c.stop_insignificant, "stop plsglr when a component has no surviving slope");
    b.boolean(cmd, "--auto-ridge,!--no-auto-ridge", "classifier.auto_ridge", c.auto_ridge,
              "raise a zero lda ridge to 1e-3 when genes >= training rows");
}

struct SelectionSettings {
    Index p_keep = 0;
    std::string mode = "in-fold";
};

void add_selection(CLI::App& cmd, Bindings& b, SelectionSettings& s) {
    b.integer(cmd, "--p-keep", "select.p_keep", s.p_keep,
              "keep the top-ranked genes (0 = keep all)");
    b.text(cmd, "--selection", "select.mode", s.mode,
           "in-fold (rank inside each training fold) or global (rank once)");
}

std::vector<Index> parse_index_list(const std::string& key, const std::string& csv) {
    std::vector<Index> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!ConfigMap::strip(tok).empty())
            out.push_back(static_cast<Index>(parse_int(key, ConfigMap::strip(tok))));
    return out;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!ConfigMap::strip(tok).empty()) out.push_back(parse_real(key, ConfigMap::strip(tok)));
    return out;
}

struct GridSettings {
    std::string p_keep, m, k, lambda, sigma, ridge;

    HyperGrid build() const {
        HyperGrid g;
        g.p_keep = parse_index_list("grid.p_keep", p_keep);
        g.m = parse_index_list("grid.m", m);
        g.k = parse_index_list("grid.k", k);
        g.lambda = parse_real_list("grid.lambda", lambda);
        g.sigma = parse_real_list("grid.sigma", sigma);
        g.ridge = parse_real_list("grid.ridge", ridge);
        return g;
    }
};

void add_grid(CLI::App& cmd, Bindings& b, GridSettings& g) {
    b.text(cmd, "--grid-p-keep", "grid.p_keep", g.p_keep, "comma list of p_keep candidates");
    b.text(cmd, "--grid-m", "grid.m", g.m, "comma list of component counts");
    b.text(cmd, "--grid-k", "grid.k", g.k, "comma list of knn neighbour counts");
    b.text(cmd, "--grid-lambda", "grid.lambda", g.lambda, "comma list of kma ridges");
    b.text(cmd, "--grid-sigma", "grid.sigma", g.sigma, "comma list of rbf widths");
    b.text(cmd, "--grid-ridge", "grid.ridge", g.ridge, "comma list of lda ridges");
}

// ---------------------------------------------------------------------------
// Artifact plumbing
// ---------------------------------------------------------------------------

void ensure_outdir(const std::string& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw data_error("cannot create output directory '" + out + "': " + ec.message());
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot write '" + path + "'");
    f << content;
    if (!f) throw data_error("failed while writing '" + path + "'");
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

struct Provenance {
    std::string command;
    std::vector<std::pair<std::string, std::string>> inputs; // role -> path
    const Bindings* bindings = nullptr;
    std::uint64_t seed = 0;
    bool has_seed = false;

    std::string render() const {
        std::string out = "gxlearn provenance v1\ncommand " + command + "\n";
        for (const auto& [role, path] : inputs)
            out += "input." + role + " " + path + " fnv1a64=" + fnv1a64_hex(path) + "\n";
        if (has_seed) out += "seed " + std::to_string(seed) + "\n";
        if (bindings) bindings->write_provenance(out);
        return out;
    }
};

void emit_provenance(const std::string& outdir, const Provenance& p) {
    write_text(join_path(outdir, "provenance.txt"), p.render());
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Subcommand actions
// ---------------------------------------------------------------------------

int run_preprocess(const IoSettings& io, const PreprocessSettings& pp, Provenance prov) {
    ensure_outdir(io.out);
    const ExpressionMatrix raw = load_matrix(io.data, io.load_options());
    pp.cfg.validate();

    const FilterResult filtered = filter_genes(threshold_clip(raw, pp.cfg), pp.cfg);
    ExpressionMatrix x = threshold_clip(raw, pp.cfg).subset_columns(filtered.kept_indices);
    x = log_transform(x, pp.cfg);
    if (pp.cfg.standardize) x = standardize_samples(x);

    save_matrix(x, join_path(io.out, "preprocessed.csv"));
    std::string kept = "schema,index,gene_id\n";
    for (Index j : filtered.kept_indices)
        kept += "gxlearn.kept_genes.v1," + std::to_string(j) + "," +
                csv_quote(raw.gene_ids[static_cast<std::size_t>(j)]) + "\n";
    write_text(join_path(io.out, "kept_genes.csv"), kept);
    emit_provenance(io.out, prov);

    std::printf("kept %zu of %lld genes; wrote preprocessed.csv, kept_genes.csv\n",
                filtered.kept_indices.size(), static_cast<long long>(raw.cols()));
    return 0;
}

int run_rle(const IoSettings& io, double width_max, double center_max, Provenance prov) {
    ensure_outdir(io.out);
    const ExpressionMatrix x = load_matrix(io.data, io.load_options());
    const RleSummary summary = rle_stats(x);
    const std::vector<bool> pass = rle_quality(summary, width_max, center_max);

    std::string csv = "schema,sample_id,median,q1,q3,iqr,whisker_lo,whisker_hi,pass\n";
    for (std::size_t i = 0; i < summary.per_sample.size(); ++i) {
        const BoxStats& b = summary.per_sample[i];
        csv += "gxlearn.rle.v1," + csv_quote(x.sample_ids[i]) + "," + exact(b.median) + "," +
               exact(b.q1) + "," + exact(b.q3) + "," + exact(b.iqr) + "," + exact(b.whisker_lo) +
               "," + exact(b.whisker_hi) + "," + (pass[i] ? "1" : "0") + "\n";
    }
    write_text(join_path(io.out, "rle.csv"), csv);
    write_text(join_path(io.out, "rle.svg"),
               box_plot_svg(summary.per_sample, x.sample_ids, "relative log expression"));
    emit_provenance(io.out, prov);

    std::size_t ok = 0;
    for (bool p : pass) ok += p ? 1 : 0;
    std::printf("%zu of %zu samples pass the RLE quality bounds; wrote rle.csv, rle.svg\n", ok,
                pass.size());
    return 0;
}

int run_boxstats(const IoSettings& io, Provenance prov) {
    ensure_outdir(io.out);
    const ExpressionMatrix x = load_matrix(io.data, io.load_options());
    const std::vector<BoxStats> stats = box_stats(x);

    std::string csv = "schema,sample_id,median,q1,q3,iqr,whisker_lo,whisker_hi\n";
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const BoxStats& b = stats[i];
        csv += "gxlearn.boxstats.v1," + csv_quote(x.sample_ids[i]) + "," + exact(b.median) + "," +
               exact(b.q1) + "," + exact(b.q3) + "," + exact(b.iqr) + "," + exact(b.whisker_lo) +
               "," + exact(b.whisker_hi) + "\n";
    }
    write_text(join_path(io.out, "boxstats.csv"), csv);
    write_text(join_path(io.out, "boxstats.svg"),
               box_plot_svg(stats, x.sample_ids, "expression per sample"));
    emit_provenance(io.out, prov);
    std::printf("wrote boxstats.csv, boxstats.svg for %zu samples\n", stats.size());
    return 0;
}

int run_pca(const IoSettings& io, Index components, Provenance prov) {
    ensure_outdir(io.out);
    const ExpressionMatrix x = load_matrix(io.data, io.load_options());
    const PcaResult pca = pca_scores(x, components);

    std::string scores = "schema,sample_id";
    for (Index c = 0; c < components; ++c) scores += ",pc" + std::to_string(c + 1);
    scores += "\n";
    for (Index i = 0; i < pca.scores.rows(); ++i) {
        scores += "gxlearn.pca_scores.v1," + csv_quote(x.sample_ids[static_cast<std::size_t>(i)]);
        for (Index c = 0; c < components; ++c) scores += "," + exact(pca.scores(i, c));
        scores += "\n";
    }
    write_text(join_path(io.out, "pca_scores.csv"), scores);

    std::string variance = "schema,component,explained_fraction\n";
    for (Index c = 0; c < components; ++c)
        variance += "gxlearn.pca_variance.v1," + std::to_string(c + 1) + "," +
                    exact(pca.explained_fractions(c)) + "\n";
    write_text(join_path(io.out, "pca_variance.csv"), variance);

    if (components >= 2) {
        std::vector<int> classes(static_cast<std::size_t>(x.rows()), 0);
        std::vector<std::string> names{"all samples"};
        if (!io.labels.empty()) {
            const LabelVector y = load_labels(io.labels);
            if (y.size() != x.rows())
                throw data_error("label/sample count mismatch between --labels and --data");
            classes = y.labels;
            names = y.class_names;
        }
        auto pct = [](double f) { return format_rate(100.0 * f) + "%"; };
        write_text(join_path(io.out, "pca.svg"),
                   scatter_svg(pca.scores.leftCols(2), classes, names, "principal component scores",
                               "PC1 (" + pct(pca.explained_fractions(0)) + ")",
                               "PC2 (" + pct(pca.explained_fractions(1)) + ")"));
    }
    emit_provenance(io.out, prov);
    std::printf("wrote pca_scores.csv, pca_variance.csv%s\n",
                components >= 2 ? ", pca.svg" : "");
    return 0;
}

int run_select(const IoSettings& io, const PreprocessSettings& pp, Index p_keep, Provenance prov) {
    ensure_outdir(io.out);
    Dataset d = load_dataset(io.data, io.labels, io.load_options());
    if (pp.enabled) {
        const FilterResult filtered = filter_genes(threshold_clip(d.x, pp.cfg), pp.cfg);
        ExpressionMatrix x = threshold_clip(d.x, pp.cfg).subset_columns(filtered.kept_indices);
        x = log_transform(x, pp.cfg);
        if (pp.cfg.standardize) x = standardize_samples(x);
        d.x = std::move(x);
    }
    if (p_keep < 1) throw data_error("select requires --p-keep >= 1");

    const GeneRanking ranking = bss_wss_ranking(d);
    std::string csv = "schema,rank,gene_index,gene_id,bss_wss\n";
    for (std::size_t r = 0; r < ranking.order.size(); ++r) {
        const Index j = ranking.order[r];
        csv += "gxlearn.gene_ranking.v1," + std::to_string(r + 1) + "," + std::to_string(j) + "," +
               csv_quote(d.x.gene_ids[static_cast<std::size_t>(j)]) + "," +
               exact(ranking.ratios[static_cast<std::size_t>(j)]) + "\n";
    }
    write_text(join_path(io.out, "ranking.csv"), csv);

    const Dataset reduced = select_top(d, ranking, std::min<Index>(p_keep, d.x.cols()));
    save_matrix(reduced.x, join_path(io.out, "selected.csv"));
    emit_provenance(io.out, prov);
    std::printf("ranked %lld genes, kept %lld; wrote ranking.csv, selected.csv\n",
                static_cast<long long>(d.x.cols()), static_cast<long long>(reduced.x.cols()));
    return 0;
}

PipelineSpec build_spec(const PreprocessSettings& pp, const SelectionSettings& sel,
                        const ClassifierSettings& cls) {
    PipelineSpec spec;
    if (pp.enabled) spec.preprocess = pp.cfg;
    spec.p_keep = sel.p_keep;
    if (sel.mode == "in-fold") spec.in_fold_selection = true;
    else if (sel.mode == "global") spec.in_fold_selection = false;
    else throw data_error("--selection must be in-fold or global");
    spec.classifier = cls.build();
    spec.validate();
    return spec;
}

int run_cv(const IoSettings& io, const PreprocessSettings& pp, const SelectionSettings& sel,
           ClassifierSettings cls, const GridSettings& grid, const std::string& methods_csv,
           Index folds_k, std::uint64_t seed, Index inner_folds, Provenance prov) {
    ensure_outdir(io.out);
    const Dataset d = load_dataset(io.data, io.labels, io.load_options());

    std::vector<std::string> methods;
    {
        std::stringstream ss(methods_csv);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!ConfigMap::strip(tok).empty()) methods.push_back(ConfigMap::strip(tok));
    }
    if (methods.empty()) throw data_error("no methods requested");

    const FoldAssignment assignment = stratified_kfold(d.y, static_cast<int>(folds_k), seed);
    CvOptions opts;
    opts.grid = grid.build();
    opts.inner_folds = static_cast<int>(inner_folds);

    std::vector<EvalReport> reports;
    for (const std::string& name : methods) {
        cls.method = name;
        reports.push_back(cross_validate(d, build_spec(pp, sel, cls), assignment, opts));
    }

    write_text(join_path(io.out, "cv_summary.csv"), summary_csv(reports));
    write_text(join_path(io.out, "cv_folds.csv"), folds_csv(reports));
    write_text(join_path(io.out, "cv_confusion.csv"), confusion_csv(reports));
    const std::string table = comparison_table(reports);
    write_text(join_path(io.out, "cv_table.txt"), table);
    emit_provenance(io.out, prov);
    std::fputs(table.c_str(), stdout);
    return 0;
}

int run_train(const IoSettings& io, const PreprocessSettings& pp, const SelectionSettings& sel,
              const ClassifierSettings& cls, const GridSettings& grid, std::string model_path,
              std::uint64_t seed, Index inner_folds, Provenance prov) {
    ensure_outdir(io.out);
    const Dataset d = load_dataset(io.data, io.labels, io.load_options());
    PipelineSpec spec = build_spec(pp, sel, cls);

    const HyperGrid hyper = grid.build();
    if (!hyper.empty())
        spec = grid_search(d, spec, hyper, static_cast<int>(inner_folds), seed).best_spec;

    const FittedPipeline fitted = fit_pipeline(d, spec);
    if (model_path.empty()) model_path = join_path(io.out, "model.gxm");
    save_model_file(model_path, fitted);
    emit_provenance(io.out, prov);
    std::printf("trained %s (%s); wrote %s\n", method_key(fitted.spec.classifier.method),
                describe_settings(fitted).c_str(), model_path.c_str());
    return 0;
}

int run_predict(const IoSettings& io, const std::string& model_path, Provenance prov) {
    ensure_outdir(io.out);
    const FittedPipeline fitted = load_model_file(model_path);
    const ExpressionMatrix x = load_matrix(io.data, io.load_options());
    const std::vector<int> labels = predict_pipeline(fitted, x);

    std::string csv = "schema,sample_id,predicted\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        csv += "gxlearn.predictions.v1," + csv_quote(x.sample_ids[i]) + "," +
               csv_quote(fitted.class_names[static_cast<std::size_t>(labels[i])]) + "\n";
    write_text(join_path(io.out, "predictions.csv"), csv);
    emit_provenance(io.out, prov);
    std::printf("predicted %zu samples with %s; wrote predictions.csv\n", labels.size(),
                method_key(fitted.spec.classifier.method));
    return 0;
}

std::string one_line(std::string s) {
    for (auto& c : s)
        if (c == '\n' || c == '\r') c = ';';
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gene-expression classification pipeline (preprocess, diagnose, select, "
                 "cross-validate, train, predict)"};
    app.require_subcommand(1);

    std::function<int()> action;

    // --- preprocess ---------------------------------------------------------
    auto* cmd_pp = app.add_subcommand("preprocess", "clip, filter, log, standardize a matrix");
    auto b_pp = std::make_shared<Bindings>();
    auto io_pp = std::make_shared<IoSettings>();
    auto pp_pp = std::make_shared<PreprocessSettings>();
    add_io(*cmd_pp, *b_pp, *io_pp, false);
    add_preprocess(*cmd_pp, *b_pp, *pp_pp, true);
    cmd_pp->callback([&action, b_pp, io_pp, pp_pp] {
        action = [b_pp, io_pp, pp_pp] {
            b_pp->apply(ConfigMap::load(io_pp->config));
            Provenance prov{"preprocess", {{"data", io_pp->data}}, b_pp.get()};
            return run_preprocess(*io_pp, *pp_pp, prov);
        };
    });

    // --- rle ----------------------------------------------------------------
    auto* cmd_rle = app.add_subcommand("rle", "relative log expression diagnostics");
    auto b_rle = std::make_shared<Bindings>();
    auto io_rle = std::make_shared<IoSettings>();
    auto width_max = std::make_shared<double>(0.2);
    auto center_max = std::make_shared<double>(0.1);
    add_io(*cmd_rle, *b_rle, *io_rle, false);
    b_rle->real(*cmd_rle, "--width-max", "rle.width_max", *width_max, "IQR quality bound");
    b_rle->real(*cmd_rle, "--center-max", "rle.center_max", *center_max, "|median| quality bound");
    cmd_rle->callback([&action, b_rle, io_rle, width_max, center_max] {
        action = [b_rle, io_rle, width_max, center_max] {
            b_rle->apply(ConfigMap::load(io_rle->config));
            Provenance prov{"rle", {{"data", io_rle->data}}, b_rle.get()};
            return run_rle(*io_rle, *width_max, *center_max, prov);
        };
    });

    // --- boxstats -----------------------------------------------------------
    auto* cmd_box = app.add_subcommand("boxstats", "per-sample box statistics");
    auto b_box = std::make_shared<Bindings>();
    auto io_box = std::make_shared<IoSettings>();
    add_io(*cmd_box, *b_box, *io_box, false);
    cmd_box->callback([&action, b_box, io_box] {
        action = [b_box, io_box] {
            b_box->apply(ConfigMap::load(io_box->config));
            Provenance prov{"boxstats", {{"data", io_box->data}}, b_box.get()};
            return run_boxstats(*io_box, prov);
        };
    });

    // --- pca ----------------------------------------------------------------
    auto* cmd_pca = app.add_subcommand("pca", "principal component scores and scatter");
    auto b_pca = std::make_shared<Bindings>();
    auto io_pca = std::make_shared<IoSettings>();
    auto components = std::make_shared<Index>(2);
    add_io(*cmd_pca, *b_pca, *io_pca, true);
    b_pca->integer(*cmd_pca, "--components", "pca.components", *components, "component count");
    cmd_pca->callback([&action, b_pca, io_pca, components] {
        action = [b_pca, io_pca, components] {
            b_pca->apply(ConfigMap::load(io_pca->config));
            Provenance prov{"pca", {{"data", io_pca->data}}, b_pca.get()};
            if (!io_pca->labels.empty()) prov.inputs.push_back({"labels", io_pca->labels});
            return run_pca(*io_pca, *components, prov);
        };
    });

    // --- select -------------------------------------------------------------
    auto* cmd_sel = app.add_subcommand("select", "rank genes by BSS/WSS and keep the top set");
    auto b_sel = std::make_shared<Bindings>();
    auto io_sel = std::make_shared<IoSettings>();
    auto pp_sel = std::make_shared<PreprocessSettings>();
    auto keep_sel = std::make_shared<Index>(100);
    add_io(*cmd_sel, *b_sel, *io_sel, true);
    add_preprocess(*cmd_sel, *b_sel, *pp_sel, false);
    b_sel->integer(*cmd_sel, "--p-keep", "select.p_keep", *keep_sel, "genes to keep");
    cmd_sel->callback([&action, b_sel, io_sel, pp_sel, keep_sel] {
        action = [b_sel, io_sel, pp_sel, keep_sel] {
            b_sel->apply(ConfigMap::load(io_sel->config));
            if (io_sel->labels.empty()) throw data_error("select requires --labels");
            Provenance prov{"select",
                            {{"data", io_sel->data}, {"labels", io_sel->labels}},
                            b_sel.get()};
            return run_select(*io_sel, *pp_sel, *keep_sel, prov);
        };
    });

    // --- cv -----------------------------------------------------------------
    auto* cmd_cv = app.add_subcommand("cv", "stratified k-fold comparison of the classifiers");
    auto b_cv = std::make_shared<Bindings>();
    auto io_cv = std::make_shared<IoSettings>();
    auto pp_cv = std::make_shared<PreprocessSettings>();
    auto sel_cv = std::make_shared<SelectionSettings>();
    auto cls_cv = std::make_shared<ClassifierSettings>();
    auto grid_cv = std::make_shared<GridSettings>();
    auto methods_cv = std::make_shared<std::string>("plsglr-log,plsglrda,knn,lda,plsda,kma");
    auto folds_cv = std::make_shared<Index>(10);
    auto seed_cv = std::make_shared<std::uint64_t>(1);
    auto inner_cv = std::make_shared<Index>(5);
    add_io(*cmd_cv, *b_cv, *io_cv, true);
    add_preprocess(*cmd_cv, *b_cv, *pp_cv, false);
    add_selection(*cmd_cv, *b_cv, *sel_cv);
    add_classifier(*cmd_cv, *b_cv, *cls_cv, false); // --method names the comparison list here
    add_grid(*cmd_cv, *b_cv, *grid_cv);
    b_cv->text(*cmd_cv, "--method,--methods", "cv.methods", *methods_cv,
               "comma list of methods to compare");
    b_cv->integer(*cmd_cv, "--k,--folds", "cv.k", *folds_cv, "fold count");
    b_cv->uint64(*cmd_cv, "--seed", "cv.seed", *seed_cv, "fold shuffle seed (always reported)");
    b_cv->integer(*cmd_cv, "--inner-folds", "cv.inner_folds", *inner_cv,
                  "folds for the nested hyperparameter search");
    cmd_cv->callback([&action, b_cv, io_cv, pp_cv, sel_cv, cls_cv, grid_cv, methods_cv, folds_cv,
                      seed_cv, inner_cv] {
        action = [b_cv, io_cv, pp_cv, sel_cv, cls_cv, grid_cv, methods_cv, folds_cv, seed_cv,
                  inner_cv] {
            b_cv->apply(ConfigMap::load(io_cv->config));
            if (io_cv->labels.empty()) throw data_error("cv requires --labels");
            Provenance prov{"cv", {{"data", io_cv->data}, {"labels", io_cv->labels}}, b_cv.get(),
                            *seed_cv, true};
            return run_cv(*io_cv, *pp_cv, *sel_cv, *cls_cv, *grid_cv, *methods_cv, *folds_cv,
                          *seed_cv, *inner_cv, prov);
        };
    });

    // --- train --------------------------------------------------------------
    auto* cmd_tr = app.add_subcommand("train", "fit one pipeline and save the model file");
    auto b_tr = std::make_shared<Bindings>();
    auto io_tr = std::make_shared<IoSettings>();
    auto pp_tr = std::make_shared<PreprocessSettings>();
    auto sel_tr = std::make_shared<SelectionSettings>();
    auto cls_tr = std::make_shared<ClassifierSettings>();
    auto grid_tr = std::make_shared<GridSettings>();
    auto model_tr = std::make_shared<std::string>();
    auto seed_tr = std::make_shared<std::uint64_t>(1);
    auto inner_tr = std::make_shared<Index>(5);
    add_io(*cmd_tr, *b_tr, *io_tr, true);
    add_preprocess(*cmd_tr, *b_tr, *pp_tr, false);
    add_selection(*cmd_tr, *b_tr, *sel_tr);
    add_classifier(*cmd_tr, *b_tr, *cls_tr);
    add_grid(*cmd_tr, *b_tr, *grid_tr);
    cmd_tr->add_option("--model", *model_tr, "model file to write (default <out>/model.gxm)");
    b_tr->uint64(*cmd_tr, "--seed", "train.seed", *seed_tr, "seed for the optional grid search");
    b_tr->integer(*cmd_tr, "--inner-folds", "train.inner_folds", *inner_tr,
                  "folds for the optional grid search");
    cmd_tr->callback([&action, b_tr, io_tr, pp_tr, sel_tr, cls_tr, grid_tr, model_tr, seed_tr,
                      inner_tr] {
        action = [b_tr, io_tr, pp_tr, sel_tr, cls_tr, grid_tr, model_tr, seed_tr, inner_tr] {
            b_tr->apply(ConfigMap::load(io_tr->config));
            if (io_tr->labels.empty()) throw data_error("train requires --labels");
            Provenance prov{"train", {{"data", io_tr->data}, {"labels", io_tr->labels}},
                            b_tr.get(), *seed_tr, true};
            return run_train(*io_tr, *pp_tr, *sel_tr, *cls_tr, *grid_tr, *model_tr, *seed_tr,
                             *inner_tr, prov);
        };
    });

    // --- predict ------------------------------------------------------------
    auto* cmd_pr = app.add_subcommand("predict", "classify new samples with a saved model");
    auto b_pr = std::make_shared<Bindings>();
    auto io_pr = std::make_shared<IoSettings>();
    auto model_pr = std::make_shared<std::string>();
    add_io(*cmd_pr, *b_pr, *io_pr, false);
    cmd_pr->add_option("--model", *model_pr, "model file written by train")->required();
    cmd_pr->callback([&action, b_pr, io_pr, model_pr] {
        action = [b_pr, io_pr, model_pr] {
            b_pr->apply(ConfigMap::load(io_pr->config));
            Provenance prov{"predict", {{"data", io_pr->data}, {"model", *model_pr}}, b_pr.get()};
            return run_predict(*io_pr, *model_pr, prov);
        };
    });

    try {
        app.parse(argc, argv);
        return action ? action() : 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: flag: %s\n", one_line(e.what()).c_str());
        return 2;
    } catch (const data_error& e) {
        std::fprintf(stderr, "error: data: %s\n", one_line(e.what()).c_str());
        return 3;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "error: numeric: %s\n", one_line(e.what()).c_str());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: internal: %s\n", one_line(e.what()).c_str());
        return 4;
    }
}
