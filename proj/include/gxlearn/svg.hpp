#ifndef GXLEARN_SVG_HPP
#define GXLEARN_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gxlearn/errors.hpp"
#include "gxlearn/stats.hpp"

namespace gxlearn {

// Minimal static SVG emitter for the diagnostic figures: per-sample box
// plots (raw and RLE) and a 2-D score scatter. No timestamps, fixed
// palette, fixed "%.2f" coordinate formatting, so identical inputs give
// byte-identical files.

namespace svgdetail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline const char* palette(int c) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
    return colors[c % 6];
}

/// Maps [lo, hi] to pixel coordinates [px_lo, px_hi] (use px_lo > px_hi for
/// the y axis, which points down in SVG). Degenerate ranges map to the
/// middle.
struct LinearScale {
    double lo, hi, px_lo, px_hi;
    double operator()(double v) const {
        if (hi == lo) return (px_lo + px_hi) / 2.0;
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

inline std::string header(double width, double height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n" +
           "<rect width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"white\"/>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, const char* color = "#333333",
                        double stroke = 1.0) {
    return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
           num(y2) + "\" stroke=\"" + color + "\" stroke-width=\"" + num(stroke) + "\"/>\n";
}

inline std::string label(double x, double y, const std::string& s, const char* anchor = "middle",
                         double size = 11.0) {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
           num(size) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
}

} // namespace svgdetail

/// One box-and-whisker glyph per entry, drawn left to right; labels (usually
/// sample ids) are printed under every box when they fit, else every few.
inline std::string box_plot_svg(const std::vector<BoxStats>& stats,
                                const std::vector<std::string>& labels,
                                const std::string& title) {
    using namespace svgdetail;
    if (stats.empty()) throw data_error("box plot needs at least one sample");
    if (!labels.empty() && labels.size() != stats.size())
        throw data_error("box plot label count differs from sample count");

    const double step = 26.0, box_w = 14.0;
    const double margin_l = 56.0, margin_r = 16.0, margin_t = 34.0, margin_b = 44.0;
    const double width = margin_l + step * static_cast<double>(stats.size()) + margin_r;
    const double height = 320.0;

    double lo = stats[0].whisker_lo, hi = stats[0].whisker_hi;
    for (const auto& b : stats) {
        lo = std::min(lo, b.whisker_lo);
        hi = std::max(hi, b.whisker_hi);
    }
    const double pad = hi == lo ? 1.0 : 0.05 * (hi - lo);
    LinearScale y{lo - pad, hi + pad, height - margin_b, margin_t};

    std::string out = header(width, height);
    out += label(width / 2.0, 18.0, title, "middle", 13.0);

    // y axis with min / zero / max ticks
    out += line(margin_l, margin_t, margin_l, height - margin_b);
    for (double tick : {lo, hi}) {
        out += line(margin_l - 4.0, y(tick), margin_l, y(tick));
        out += label(margin_l - 7.0, y(tick) + 4.0, num(tick), "end", 10.0);
    }
    if (lo < 0.0 && hi > 0.0) out += line(margin_l, y(0.0), width - margin_r, y(0.0), "#bbbbbb");

    const std::size_t label_every = labels.empty() ? 0 : (stats.size() > 40 ? 5 : 1);
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const BoxStats& b = stats[i];
        const double cx = margin_l + step * (static_cast<double>(i) + 0.5);
        out += line(cx, y(b.whisker_lo), cx, y(b.q1));
        out += line(cx, y(b.q3), cx, y(b.whisker_hi));
        out += line(cx - box_w / 2.0, y(b.whisker_lo), cx + box_w / 2.0, y(b.whisker_lo));
        out += line(cx - box_w / 2.0, y(b.whisker_hi), cx + box_w / 2.0, y(b.whisker_hi));
        out += "<rect x=\"" + num(cx - box_w / 2.0) + "\" y=\"" + num(y(b.q3)) + "\" width=\"" +
               num(box_w) + "\" height=\"" + num(y(b.q1) - y(b.q3)) +
               "\" fill=\"#9ecae1\" stroke=\"#333333\"/>\n";
        out += line(cx - box_w / 2.0, y(b.median), cx + box_w / 2.0, y(b.median), "#d62728", 1.5);
        if (label_every && i % label_every == 0)
            out += label(cx, height - margin_b + 14.0, labels[i], "middle", 9.0);
    }
    out += "</svg>\n";
    return out;
}

/// 2-D score scatter (e.g. the first two principal components), colored by
/// class with a small legend.
inline std::string scatter_svg(const Eigen::MatrixXd& xy, const std::vector<int>& classes,
                               const std::vector<std::string>& class_names,
                               const std::string& title, const std::string& x_label,
                               const std::string& y_label) {
    using namespace svgdetail;
    if (xy.cols() != 2) throw data_error("scatter plot needs exactly two columns");
    if (xy.rows() < 1) throw data_error("scatter plot needs at least one point");
    if (static_cast<Eigen::Index>(classes.size()) != xy.rows())
        throw data_error("scatter class count differs from point count");

    const double width = 480.0, height = 360.0;
    const double margin_l = 56.0, margin_r = 16.0, margin_t = 34.0, margin_b = 46.0;

    double xlo = xy.col(0).minCoeff(), xhi = xy.col(0).maxCoeff();
    double ylo = xy.col(1).minCoeff(), yhi = xy.col(1).maxCoeff();
    const double xpad = xhi == xlo ? 1.0 : 0.05 * (xhi - xlo);
    const double ypad = yhi == ylo ? 1.0 : 0.05 * (yhi - ylo);
    LinearScale sx{xlo - xpad, xhi + xpad, margin_l, width - margin_r};
    LinearScale sy{ylo - ypad, yhi + ypad, height - margin_b, margin_t};

    std::string out = header(width, height);
    out += label(width / 2.0, 18.0, title, "middle", 13.0);
    out += line(margin_l, height - margin_b, width - margin_r, height - margin_b);
    out += line(margin_l, margin_t, margin_l, height - margin_b);
    out += label(width / 2.0, height - 10.0, x_label);
    out += label(16.0, margin_t - 8.0, y_label, "start", 10.0);
    for (double tick : {xlo, xhi}) {
        out += line(sx(tick), height - margin_b, sx(tick), height - margin_b + 4.0);
        out += label(sx(tick), height - margin_b + 16.0, num(tick), "middle", 10.0);
    }
    for (double tick : {ylo, yhi}) {
        out += line(margin_l - 4.0, sy(tick), margin_l, sy(tick));
        out += label(margin_l - 7.0, sy(tick) + 4.0, num(tick), "end", 10.0);
    }

    for (Eigen::Index i = 0; i < xy.rows(); ++i)
        out += "<circle cx=\"" + num(sx(xy(i, 0))) + "\" cy=\"" + num(sy(xy(i, 1))) +
               "\" r=\"3\" fill=\"" + palette(classes[static_cast<std::size_t>(i)]) + "\"/>\n";

    for (std::size_t c = 0; c < class_names.size(); ++c) {
        const double lx = width - margin_r - 110.0;
        const double ly = margin_t + 14.0 * static_cast<double>(c);
        out += "<circle cx=\"" + num(lx) + "\" cy=\"" + num(ly) + "\" r=\"4\" fill=\"" +
               palette(static_cast<int>(c)) + "\"/>\n";
        out += label(lx + 8.0, ly + 4.0, class_names[c], "start", 10.0);
    }
    out += "</svg>\n";
    return out;
}

} // namespace gxlearn

#endif
