#ifndef GXLEARN_IO_HPP
#define GXLEARN_IO_HPP

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gxlearn/dataset.hpp"
#include "gxlearn/errors.hpp"

namespace gxlearn {

struct LoadOptions {
    char delimiter = '\0';       // '\0' = auto-detect from extension (.tsv/.tab/.txt -> tab, else comma)
    std::string na_token = "NA"; // empty cells are also treated as missing
    bool genes_as_rows = false;  // transpose gene-rows exports into samples-as-rows
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + s.size();
}

inline std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

inline char delimiter_for(const std::string& path, char requested) {
    if (requested != '\0') return requested;
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == "tsv" || ext == "tab" || ext == "txt") return '\t';
    return ',';
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw data_error("file is empty: " + path);
    return lines;
}

inline bool numeric_or_na(const std::string& field, const std::string& na_token) {
    if (field.empty() || field == na_token) return true;
    double d;
    return parse_double(field, d);
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Loads a delimited matrix. Header row and leading id column are auto-detected:
/// a header is any first row containing a non-numeric, non-NA field; an id
/// column is any body column 0 containing such a field (numeric ids are then
/// indistinguishable from data and read as data). A header one field shorter
/// than the body rows implies an id column.
inline ExpressionMatrix load_matrix(const std::string& path, const LoadOptions& opts = {}) {
    const char delim = detail::delimiter_for(path, opts.delimiter);
    const auto lines = detail::read_lines(path);

    std::vector<std::vector<std::string>> rows;
    rows.reserve(lines.size());
    for (const auto& line : lines) rows.push_back(detail::split_line(line, delim));

    bool header = false;
    for (const auto& f : rows[0])
        if (!detail::numeric_or_na(f, opts.na_token)) { header = true; break; }
    if (header && rows.size() < 2) throw data_error(path + ": header row without data rows");

    const std::size_t first_body = header ? 1 : 0;
    const std::size_t body_width = rows[first_body].size();
    for (std::size_t r = first_body; r < rows.size(); ++r)
        if (rows[r].size() != body_width)
            throw data_error(path + ": ragged row at line " + std::to_string(r + 1) + " (" +
                             std::to_string(rows[r].size()) + " fields, expected " +
                             std::to_string(body_width) + ")");

    bool id_col = false;
    if (header && rows[0].size() == body_width - 1) {
        id_col = true; // R convention: header omits the id-column name
    } else {
        if (header && rows[0].size() != body_width)
            throw data_error(path + ": header has " + std::to_string(rows[0].size()) +
                             " fields, data rows have " + std::to_string(body_width));
        for (std::size_t r = first_body; r < rows.size(); ++r)
            if (!detail::numeric_or_na(rows[r][0], opts.na_token)) { id_col = true; break; }
    }

    const std::size_t n_rows = rows.size() - first_body;
    const std::size_t n_cols = body_width - (id_col ? 1 : 0);
    if (n_rows == 0 || n_cols == 0) throw data_error(path + ": no data cells found");

    ExpressionMatrix x;
    x.values.resize(static_cast<Index>(n_rows), static_cast<Index>(n_cols));
    x.mask.resize(static_cast<Index>(n_rows), static_cast<Index>(n_cols));
    std::vector<std::string> row_ids, col_ids;

    if (header) {
        const std::size_t skip = (id_col && rows[0].size() == body_width) ? 1 : 0;
        for (std::size_t c = skip; c < rows[0].size(); ++c) col_ids.push_back(rows[0][c]);
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
        const auto& fields = rows[r + first_body];
        if (id_col) row_ids.push_back(fields[0]);
        for (std::size_t c = 0; c < n_cols; ++c) {
            const std::string& f = fields[c + (id_col ? 1 : 0)];
            if (f.empty() || f == opts.na_token) {
                x.values(static_cast<Index>(r), static_cast<Index>(c)) = std::numeric_limits<double>::quiet_NaN();
                x.mask(static_cast<Index>(r), static_cast<Index>(c)) = false;
            } else {
                double v;
                if (!detail::parse_double(f, v))
                    throw data_error(path + ": unparseable cell \"" + f + "\" at line " +
                                     std::to_string(r + first_body + 1) + ", field " +
                                     std::to_string(c + (id_col ? 1 : 0) + 1));
                x.values(static_cast<Index>(r), static_cast<Index>(c)) = v;
                x.mask(static_cast<Index>(r), static_cast<Index>(c)) = true;
            }
        }
    }

    if (opts.genes_as_rows) {
        x.values.transposeInPlace();
        x.mask = MaskArray(x.mask.transpose());
        x.gene_ids = row_ids.empty() ? ExpressionMatrix::default_ids(x.cols(), "g") : row_ids;
        x.sample_ids = col_ids.empty() ? ExpressionMatrix::default_ids(x.rows(), "s") : col_ids;
    } else {
        x.gene_ids = col_ids.empty() ? ExpressionMatrix::default_ids(x.cols(), "g") : col_ids;
        x.sample_ids = row_ids.empty() ? ExpressionMatrix::default_ids(x.rows(), "s") : row_ids;
    }
    x.validate();
    return x;
}

/// Labels file: one label per line, integers or category strings, mapped to
/// 0..C-1 in first-appearance order.
inline LabelVector load_labels(const std::string& path) {
    const auto lines = detail::read_lines(path);
    std::vector<std::string> raw;
    raw.reserve(lines.size());
    for (const auto& line : lines) {
        const std::string t = detail::trim(line);
        if (t.empty()) throw data_error(path + ": empty label line");
        raw.push_back(t);
    }
    return LabelVector::from_strings(raw);
}

inline Dataset load_dataset(const std::string& matrix_path, const std::string& labels_path,
                            const LoadOptions& opts = {}) {
    Dataset d;
    d.x = load_matrix(matrix_path, opts);
    d.y = load_labels(labels_path);
    d.validate();
    d.y.require_all_classes();
    return d;
}

/// Writes samples-as-rows with a gene-id header and a leading sample-id
/// column; %.17g preserves doubles exactly across a reload.
inline void save_matrix(const ExpressionMatrix& x, const std::string& path, const LoadOptions& opts = {}) {
    const char delim = detail::delimiter_for(path, opts.delimiter);
    for (const auto& id : x.gene_ids)
        if (id.find(delim) != std::string::npos || id.find('\n') != std::string::npos)
            throw data_error("gene id contains the delimiter: " + id);
    for (const auto& id : x.sample_ids)
        if (id.find(delim) != std::string::npos || id.find('\n') != std::string::npos)
            throw data_error("sample id contains the delimiter: " + id);

    std::ofstream out(path);
    if (!out) throw data_error("cannot write file: " + path);
    out << "sample_id";
    for (const auto& g : x.gene_ids) out << delim << g;
    out << "\n";
    for (Index i = 0; i < x.rows(); ++i) {
        out << x.sample_ids[static_cast<std::size_t>(i)];
        for (Index j = 0; j < x.cols(); ++j) {
            out << delim;
            if (x.mask(i, j)) out << detail::format_double(x.values(i, j));
            else out << opts.na_token;
        }
        out << "\n";
    }
}

inline void save_labels(const LabelVector& y, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write file: " + path);
    for (int l : y.labels) out << y.class_names[static_cast<std::size_t>(l)] << "\n";
}

/// FNV-1a 64-bit content fingerprint, for provenance records.
inline std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open file: " + path);
    std::uint64_t h = 14695981039346656037ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& path) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64_file(path)));
    return buf;
}

} // namespace gxlearn

#endif
