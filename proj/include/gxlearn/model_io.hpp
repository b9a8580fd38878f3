#ifndef GXLEARN_MODEL_IO_HPP
#define GXLEARN_MODEL_IO_HPP

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gxlearn/harness.hpp"

namespace gxlearn {

// Versioned flat text model format. Line-oriented:
//   gxlearn-model v1
//   method <key>
//   int <key> <value>
//   real <key> <value>            (%.17g: doubles round-trip exactly)
//   text <key> <rest of line verbatim>
//   indices <key> <n>  followed by one line of n integers
//   matrix <key> <rows> <cols>  followed by <rows> lines of <cols> values
//   end
// Keys contain no whitespace; unknown keys are ignored on read so the format
// can grow without breaking old readers.

namespace modeldetail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Writer {
    std::ostream& out;

    void integer(const std::string& key, long long v) { out << "int " << key << " " << v << "\n"; }
    void real(const std::string& key, double v) { out << "real " << key << " " << fmt(v) << "\n"; }
    void text(const std::string& key, const std::string& v) {
        if (v.find('\n') != std::string::npos) throw data_error("model text field contains a newline");
        out << "text " << key << " " << v << "\n";
    }
    void indices(const std::string& key, const std::vector<Index>& v) {
        out << "indices " << key << " " << v.size() << "\n";
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
        out << "\n";
    }
    void ints(const std::string& key, const std::vector<int>& v) {
        std::vector<Index> idx(v.begin(), v.end());
        indices(key, idx);
    }
    void matrix(const std::string& key, const Eigen::MatrixXd& m) {
        out << "matrix " << key << " " << m.rows() << " " << m.cols() << "\n";
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << fmt(m(i, j));
            out << "\n";
        }
    }
    void vector(const std::string& key, const Eigen::VectorXd& v) {
        matrix(key, v); // a column matrix
    }
};

struct Reader {
    std::map<std::string, long long> ints;
    std::map<std::string, double> reals;
    std::map<std::string, std::string> texts;
    std::map<std::string, std::vector<Index>> index_lists;
    std::map<std::string, Eigen::MatrixXd> matrices;

    static Reader parse(std::istream& in) {
        std::string line;
        if (!std::getline(in, line) || line != "gxlearn-model v1")
            throw data_error("not a gxlearn model file (missing 'gxlearn-model v1' header)");
        Reader r;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (line == "end") return r;
            std::istringstream head(line);
            std::string tag, key;
            head >> tag >> key;
            if (tag == "int") {
                long long v;
                if (!(head >> v)) throw data_error("malformed int field '" + key + "'");
                r.ints[key] = v;
            } else if (tag == "real") {
                std::string tok;
                if (!(head >> tok)) throw data_error("malformed real field '" + key + "'");
                r.reals[key] = std::strtod(tok.c_str(), nullptr);
            } else if (tag == "text" || tag == "method") {
                std::string rest;
                std::getline(head, rest);
                if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
                r.texts[tag == "method" ? "method" : key] = tag == "method" ? key : rest;
            } else if (tag == "indices") {
                long long n;
                if (!(head >> n) || n < 0) throw data_error("malformed indices field '" + key + "'");
                if (!std::getline(in, line)) throw data_error("truncated indices field '" + key + "'");
                std::istringstream body(line);
                std::vector<Index> v(static_cast<std::size_t>(n));
                for (auto& e : v)
                    if (!(body >> e)) throw data_error("truncated indices field '" + key + "'");
                r.index_lists[key] = std::move(v);
            } else if (tag == "matrix") {
                long long rows, cols;
                if (!(head >> rows >> cols) || rows < 0 || cols < 0)
                    throw data_error("malformed matrix field '" + key + "'");
                Eigen::MatrixXd m(rows, cols);
                for (long long i = 0; i < rows; ++i) {
                    if (!std::getline(in, line)) throw data_error("truncated matrix field '" + key + "'");
                    std::istringstream body(line);
                    std::string tok;
                    for (long long j = 0; j < cols; ++j) {
                        if (!(body >> tok)) throw data_error("truncated matrix field '" + key + "'");
                        m(i, j) = std::strtod(tok.c_str(), nullptr);
                    }
                }
                r.matrices[key] = std::move(m);
            } else {
                throw data_error("unknown model file tag '" + tag + "'");
            }
        }
        throw data_error("model file has no 'end' marker");
    }

    long long integer(const std::string& key) const {
        auto it = ints.find(key);
        if (it == ints.end()) throw data_error("model file missing int field '" + key + "'");
        return it->second;
    }
    double real(const std::string& key) const {
        auto it = reals.find(key);
        if (it == reals.end()) throw data_error("model file missing real field '" + key + "'");
        return it->second;
    }
    std::string text(const std::string& key) const {
        auto it = texts.find(key);
        if (it == texts.end()) throw data_error("model file missing text field '" + key + "'");
        return it->second;
    }
    const std::vector<Index>& indices(const std::string& key) const {
        auto it = index_lists.find(key);
        if (it == index_lists.end()) throw data_error("model file missing indices field '" + key + "'");
        return it->second;
    }
    const Eigen::MatrixXd& matrix(const std::string& key) const {
        auto it = matrices.find(key);
        if (it == matrices.end()) throw data_error("model file missing matrix field '" + key + "'");
        return it->second;
    }
    bool has_real(const std::string& key) const { return reals.count(key) > 0; }
};

inline void write_lda(Writer& w, const std::string& prefix, const LdaModel& m) {
    w.matrix(prefix + ".means", m.class_means);
    w.matrix(prefix + ".sigma_inv", m.sigma_inverse);
    w.vector(prefix + ".log_priors", m.log_priors);
    w.real(prefix + ".ridge", m.ridge_used);
}

inline LdaModel read_lda(const Reader& r, const std::string& prefix) {
    LdaModel m;
    m.class_means = r.matrix(prefix + ".means");
    m.sigma_inverse = r.matrix(prefix + ".sigma_inv");
    m.log_priors = r.matrix(prefix + ".log_priors");
    m.ridge_used = r.real(prefix + ".ridge");
    return m;
}

inline void write_plsglr(Writer& w, const PlsGlrModel& m) {
    w.matrix("plsglr.weights", m.weights);
    w.matrix("plsglr.x_weights", m.x_weights);
    w.matrix("plsglr.loadings", m.loadings);
    w.vector("plsglr.means", m.column_means);
    w.integer("plsglr.family", m.family == Family::binomial_logit ? 1 : 0);
    if (m.sparsify_p) w.real("plsglr.sparsify_p", *m.sparsify_p);
}

inline PlsGlrModel read_plsglr(const Reader& r) {
    PlsGlrModel m;
    m.weights = r.matrix("plsglr.weights");
    m.x_weights = r.matrix("plsglr.x_weights");
    m.loadings = r.matrix("plsglr.loadings");
    m.column_means = r.matrix("plsglr.means");
    m.family = r.integer("plsglr.family") == 1 ? Family::binomial_logit : Family::gaussian_identity;
    if (r.has_real("plsglr.sparsify_p")) m.sparsify_p = r.real("plsglr.sparsify_p");
    return m;
}

inline void write_kernel(Writer& w, const KernelSpec& k) {
    const char* kind = k.kind == KernelKind::rbf ? "rbf"
                       : k.kind == KernelKind::linear_plus_one ? "linear-plus-one"
                                                               : "polynomial";
    w.text("kernel.kind", kind);
    w.real("kernel.sigma", k.rbf_sigma);
    w.integer("kernel.degree", k.poly_degree);
    w.real("kernel.offset", k.poly_offset);
}

inline KernelSpec read_kernel(const Reader& r) {
    KernelSpec k;
    const std::string kind = r.text("kernel.kind");
    if (kind == "rbf") k.kind = KernelKind::rbf;
    else if (kind == "linear-plus-one") k.kind = KernelKind::linear_plus_one;
    else if (kind == "polynomial") k.kind = KernelKind::polynomial;
    else throw data_error("unknown kernel kind '" + kind + "' in model file");
    k.rbf_sigma = r.real("kernel.sigma");
    k.poly_degree = static_cast<int>(r.integer("kernel.degree"));
    k.poly_offset = r.real("kernel.offset");
    return k;
}

} // namespace modeldetail

inline void write_model(std::ostream& out, const FittedPipeline& fp) {
    using modeldetail::Writer;
    out << "gxlearn-model v1\n";
    Writer w{out};
    const ClassifierConfig& c = fp.spec.classifier;
    out << "method " << method_key(c.method) << "\n";

    w.integer("raw_genes", fp.raw_gene_count);
    w.integer("classes", fp.class_count);
    for (std::size_t i = 0; i < fp.class_names.size(); ++i)
        w.text("class_name." + std::to_string(i), fp.class_names[i]);
    for (std::size_t i = 0; i < fp.gene_ids.size(); ++i)
        w.text("gene_id." + std::to_string(i), fp.gene_ids[i]);

    w.integer("preprocess", fp.spec.preprocess ? 1 : 0);
    if (fp.spec.preprocess) {
        const PreprocessConfig& pp = *fp.spec.preprocess;
        w.real("pp.floor", pp.floor);
        w.real("pp.ceil", pp.ceil);
        w.real("pp.fold_min", pp.fold_min);
        w.real("pp.span_min", pp.span_min);
        w.real("pp.log_base", pp.log_base);
        w.integer("pp.standardize", pp.standardize ? 1 : 0);
    }
    w.indices("filter_kept", fp.filter_kept);
    w.indices("selected", fp.selected);

    w.integer("cfg.m", c.m);
    w.integer("cfg.k", c.k);
    w.real("cfg.lambda", c.lambda);
    w.real("cfg.epsilon", c.epsilon);
    w.real("cfg.ridge", c.ridge);
    modeldetail::write_kernel(w, c.kernel);

    std::visit(
        [&w](const auto& model) {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, PlsGlrLogHead>) {
                modeldetail::write_plsglr(w, model.model);
                w.vector("loghead.coefficients", model.coefficients);
                w.integer("loghead.converged", model.link_converged ? 1 : 0);
            } else if constexpr (std::is_same_v<T, PlsGlrDaHead>) {
                modeldetail::write_plsglr(w, model.model);
                modeldetail::write_lda(w, "lda", model.lda);
            } else if constexpr (std::is_same_v<T, KnnClassifier>) {
                w.matrix("knn.x", model.train.x.values);
                w.ints("knn.labels", model.train.y.labels);
            } else if constexpr (std::is_same_v<T, LdaModel>) {
                modeldetail::write_lda(w, "lda", model);
            } else if constexpr (std::is_same_v<T, PlsDaModel>) {
                w.matrix("plsda.weights", model.weights);
                w.matrix("plsda.x_loadings", model.x_loadings);
                w.matrix("plsda.x_weights", model.x_weights);
                w.vector("plsda.means", model.column_means);
                modeldetail::write_lda(w, "lda", model.lda);
            } else if constexpr (std::is_same_v<T, KmaModel>) {
                w.real("kma.lambda", model.lambda);
                w.real("kma.epsilon", model.epsilon);
                w.matrix("kma.gamma", model.gamma);
                w.matrix("kma.train_x", model.train_x);
            } else {
                w.integer("majority.label", model.label);
            }
        },
        fp.classifier);
    out << "end\n";
}

inline FittedPipeline read_model(std::istream& in) {
    using modeldetail::Reader;
    const Reader r = Reader::parse(in);

    FittedPipeline fp;
    ClassifierConfig& c = fp.spec.classifier;
    c.method = parse_method(r.text("method"));
    fp.raw_gene_count = static_cast<Index>(r.integer("raw_genes"));
    fp.class_count = static_cast<int>(r.integer("classes"));
    for (int i = 0; i < fp.class_count; ++i)
        fp.class_names.push_back(r.text("class_name." + std::to_string(i)));

    if (r.integer("preprocess") == 1) {
        PreprocessConfig pp;
        pp.floor = r.real("pp.floor");
        pp.ceil = r.real("pp.ceil");
        pp.fold_min = r.real("pp.fold_min");
        pp.span_min = r.real("pp.span_min");
        pp.log_base = r.real("pp.log_base");
        pp.standardize = r.integer("pp.standardize") == 1;
        fp.spec.preprocess = pp;
    }
    fp.filter_kept = r.indices("filter_kept");
    fp.selected = r.indices("selected");
    fp.spec.p_keep = static_cast<Index>(fp.selected.size());

    c.m = static_cast<Index>(r.integer("cfg.m"));
    c.k = static_cast<Index>(r.integer("cfg.k"));
    c.lambda = r.real("cfg.lambda");
    c.epsilon = r.real("cfg.epsilon");
    c.ridge = r.real("cfg.ridge");
    c.kernel = modeldetail::read_kernel(r);

    // Gene ids are optional metadata: old files may lack some entries.
    for (std::size_t i = 0; r.texts.count("gene_id." + std::to_string(i)); ++i)
        fp.gene_ids.push_back(r.texts.at("gene_id." + std::to_string(i)));

    switch (c.method) {
    case Method::plsglr_log: {
        PlsGlrLogHead head;
        head.model = modeldetail::read_plsglr(r);
        head.coefficients = r.matrix("loghead.coefficients");
        head.link_converged = r.integer("loghead.converged") == 1;
        fp.classifier = std::move(head);
        break;
    }
    case Method::plsglrda: {
        PlsGlrDaHead head;
        head.model = modeldetail::read_plsglr(r);
        head.lda = modeldetail::read_lda(r, "lda");
        fp.classifier = std::move(head);
        break;
    }
    case Method::knn: {
        KnnClassifier knn;
        knn.cfg.k = c.k;
        knn.train.x = ExpressionMatrix::complete(r.matrix("knn.x"));
        LabelVector y;
        y.class_count = fp.class_count;
        y.class_names = fp.class_names;
        for (Index v : r.indices("knn.labels")) y.labels.push_back(static_cast<int>(v));
        y.validate();
        knn.train.y = std::move(y);
        fp.classifier = std::move(knn);
        break;
    }
    case Method::lda:
        fp.classifier = modeldetail::read_lda(r, "lda");
        break;
    case Method::plsda: {
        PlsDaModel m;
        m.weights = r.matrix("plsda.weights");
        m.x_loadings = r.matrix("plsda.x_loadings");
        m.x_weights = r.matrix("plsda.x_weights");
        m.column_means = r.matrix("plsda.means");
        m.lda = modeldetail::read_lda(r, "lda");
        m.class_count = fp.class_count;
        fp.classifier = std::move(m);
        break;
    }
    case Method::kma: {
        KmaModel m;
        m.kernel = c.kernel;
        m.lambda = r.real("kma.lambda");
        m.epsilon = r.real("kma.epsilon");
        m.gamma = r.matrix("kma.gamma");
        m.train_x = r.matrix("kma.train_x");
        m.class_count = fp.class_count;
        m.class_names = fp.class_names;
        fp.classifier = std::move(m);
        break;
    }
    case Method::majority:
        fp.classifier = MajorityClassifier{static_cast<int>(r.integer("majority.label"))};
        break;
    }
    return fp;
}

inline void save_model_file(const std::string& path, const FittedPipeline& fp) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write model file '" + path + "'");
    write_model(out, fp);
    if (!out) throw data_error("failed while writing model file '" + path + "'");
}

inline FittedPipeline load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot read model file '" + path + "'");
    return read_model(in);
}

} // namespace gxlearn

#endif
