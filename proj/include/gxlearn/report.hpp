#ifndef GXLEARN_REPORT_HPP
#define GXLEARN_REPORT_HPP

#include <cstdio>
#include <string>
#include <vector>

#include "gxlearn/harness.hpp"
#include "gxlearn/stats.hpp"

namespace gxlearn {

/// Table formatting for error percentages: one decimal, halves away from
/// zero, so 1/60 prints as 1.7.
inline std::string format_rate(double percent) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", round_half_away(percent, 1));
    return buf;
}

namespace detail {

/// Reports keep the canonical column order regardless of evaluation order;
/// methods outside the canonical set (e.g. majority) go last as given.
inline std::vector<const EvalReport*> ordered_rows(const std::vector<EvalReport>& reports) {
    std::vector<const EvalReport*> rows;
    for (Method m : method_table_order())
        for (const EvalReport& r : reports)
            if (r.method == m) rows.push_back(&r);
    for (const EvalReport& r : reports) {
        bool placed = false;
        for (const EvalReport* p : rows) placed = placed || p == &r;
        if (!placed) rows.push_back(&r);
    }
    return rows;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += "\"";
    return out;
}

} // namespace detail

/// One row per method: the headline numbers plus the run parameters needed
/// to reproduce them.
inline std::string summary_csv(const std::vector<EvalReport>& reports) {
    std::string out = "schema,method,error_percent,misclassified,total,folds,seed\n";
    for (const EvalReport* r : detail::ordered_rows(reports)) {
        out += "gxlearn.cv_summary.v1," + std::string(method_display(r->method)) + "," +
               format_rate(r->error_percent) + "," + std::to_string(r->misclassified) + "," +
               std::to_string(r->total) + "," + std::to_string(r->k) + "," +
               std::to_string(r->seed) + "\n";
    }
    return out;
}

/// One row per (method, fold): held-out size, misclassifications, and the
/// hyperparameters the nested search settled on for that fold.
inline std::string folds_csv(const std::vector<EvalReport>& reports) {
    std::string out = "schema,method,fold,test_size,misclassified,settings\n";
    for (const EvalReport* r : detail::ordered_rows(reports))
        for (std::size_t f = 0; f < r->fold_sizes.size(); ++f)
            out += "gxlearn.cv_folds.v1," + std::string(method_display(r->method)) + "," +
                   std::to_string(f) + "," + std::to_string(r->fold_sizes[f]) + "," +
                   std::to_string(r->fold_errors[f]) + "," +
                   detail::csv_quote(r->fold_settings[f]) + "\n";
    return out;
}

/// One row per (method, truth, predicted) cell of the confusion matrix,
/// labels spelled with the original class names.
inline std::string confusion_csv(const std::vector<EvalReport>& reports) {
    std::string out = "schema,method,truth,predicted,count\n";
    for (const EvalReport* r : detail::ordered_rows(reports))
        for (Eigen::Index t = 0; t < r->confusion.rows(); ++t)
            for (Eigen::Index p = 0; p < r->confusion.cols(); ++p)
                out += "gxlearn.cv_confusion.v1," + std::string(method_display(r->method)) + "," +
                       detail::csv_quote(r->class_names[static_cast<std::size_t>(t)]) + "," +
                       detail::csv_quote(r->class_names[static_cast<std::size_t>(p)]) + "," +
                       std::to_string(r->confusion(t, p)) + "\n";
    return out;
}

/// Aligned two-line text table, methods as columns in the canonical order,
/// one error rate per column.
inline std::string comparison_table(const std::vector<EvalReport>& reports) {
    const auto rows = detail::ordered_rows(reports);
    std::vector<std::string> heads, cells;
    for (const EvalReport* r : rows) {
        heads.push_back(method_display(r->method));
        cells.push_back(format_rate(r->error_percent));
    }
    std::string line1, line2;
    for (std::size_t i = 0; i < heads.size(); ++i) {
        const std::size_t width = std::max(heads[i].size(), cells[i].size());
        if (i) {
            line1 += "  ";
            line2 += "  ";
        }
        line1 += heads[i] + std::string(width - heads[i].size(), ' ');
        line2 += cells[i] + std::string(width - cells[i].size(), ' ');
    }
    return line1 + "\n" + line2 + "\n";
}

} // namespace gxlearn

#endif
