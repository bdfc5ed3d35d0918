#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dicnn/experiments.hpp"

namespace dicnn {

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string fmt1(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("report: cannot open for writing: " + path);
    f << text;
    if (!f) throw std::runtime_error("report: write failed: " + path);
}

}  // namespace detail

inline std::string eval_report_csv(const EvalReport& r) {
    std::string out = "class,before,after,abs_delta\n";
    for (int c = 0; c < kNumClasses; ++c) {
        out += std::string(to_string(static_cast<SignalClass>(c))) + "," +
               detail::fmt(r.before[c]) + "," + detail::fmt(r.after[c]) + "," +
               detail::fmt(r.abs_delta[c]) + "\n";
    }
    out += "total,,," + detail::fmt(r.total_abs_delta) + "\n";
    return out;
}

inline void write_eval_csv(const EvalReport& r, const std::string& path) {
    detail::write_text_file(path, eval_report_csv(r));
}

inline std::string sweep_report_csv(const SweepReport& r) {
    if (r.cells.empty()) throw std::invalid_argument("report: empty sweep report");
    std::string out = "padding,stride,total_abs_delta,condition_ok\n";
    for (const auto& cell : r.cells)
        out += std::to_string(cell.pad) + "," + std::to_string(cell.stride) + "," +
               detail::fmt(cell.total_abs_delta) + "," + (cell.condition_ok ? "1" : "0") + "\n";
    return out;
}

inline void write_sweep_csv(const SweepReport& r, const std::string& path) {
    detail::write_text_file(path, sweep_report_csv(r));
}

namespace detail {

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (x, y) in data units
};

/// Minimal line-plot writer: fixed canvas, linear axes, one polyline per
/// series with a small legend.
inline std::string render_line_svg(const std::string& title, const std::string& x_label,
                                   const std::string& y_label,
                                   const std::vector<SvgSeries>& series) {
    const double W = 720, H = 480;
    const double ml = 70, mr = 160, mt = 50, mb = 55;
    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymax = std::max(ymax, y);
        }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;
    ymax *= 1.05;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf"};
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt1(W) + "\" height=\"" +
           fmt1(H) + "\" viewBox=\"0 0 " + fmt1(W) + " " + fmt1(H) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt1(W / 2) + "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\" "
           "font-family=\"sans-serif\">" + title + "</text>\n";

    // Axes and ticks.
    svg += "<line x1=\"" + fmt1(ml) + "\" y1=\"" + fmt1(H - mb) + "\" x2=\"" + fmt1(W - mr) +
           "\" y2=\"" + fmt1(H - mb) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt1(ml) + "\" y1=\"" + fmt1(mt) + "\" x2=\"" + fmt1(ml) + "\" y2=\"" +
           fmt1(H - mb) + "\" stroke=\"black\"/>\n";
    const int ticks = 5;
    for (int t = 0; t <= ticks; ++t) {
        const double xv = xmin + (xmax - xmin) * t / ticks;
        const double yv = ymin + (ymax - ymin) * t / ticks;
        svg += "<line x1=\"" + fmt1(px(xv)) + "\" y1=\"" + fmt1(H - mb) + "\" x2=\"" +
               fmt1(px(xv)) + "\" y2=\"" + fmt1(H - mb + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt1(px(xv)) + "\" y=\"" + fmt1(H - mb + 20) +
               "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" +
               fmt1(xv) + "</text>\n";
        svg += "<line x1=\"" + fmt1(ml - 5) + "\" y1=\"" + fmt1(py(yv)) + "\" x2=\"" + fmt1(ml) +
               "\" y2=\"" + fmt1(py(yv)) + "\" stroke=\"black\"/>\n";
        char ybuf[32];
        std::snprintf(ybuf, sizeof(ybuf), "%.3f", yv);
        svg += "<text x=\"" + fmt1(ml - 8) + "\" y=\"" + fmt1(py(yv) + 4) +
               "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" + ybuf +
               "</text>\n";
    }
    svg += "<text x=\"" + fmt1((ml + W - mr) / 2) + "\" y=\"" + fmt1(H - 12) +
           "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" + x_label +
           "</text>\n";
    svg += "<text x=\"18\" y=\"" + fmt1((mt + H - mb) / 2) +
           "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 18 " + fmt1((mt + H - mb) / 2) + ")\">" + y_label + "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kColors[i % 7];
        std::string pts;
        for (const auto& [x, y] : series[i].points)
            pts += fmt1(px(x)) + "," + fmt1(py(y)) + " ";
        svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        for (const auto& [x, y] : series[i].points)
            svg += "<circle cx=\"" + fmt1(px(x)) + "\" cy=\"" + fmt1(py(y)) +
                   "\" r=\"3\" fill=\"" + color + "\"/>\n";
        const double ly = mt + 20.0 * static_cast<double>(i);
        svg += "<line x1=\"" + fmt1(W - mr + 12) + "\" y1=\"" + fmt1(ly) + "\" x2=\"" +
               fmt1(W - mr + 40) + "\" y2=\"" + fmt1(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt1(W - mr + 46) + "\" y=\"" + fmt1(ly + 4) +
               "\" font-size=\"12\" font-family=\"sans-serif\">" + series[i].label + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace detail

/// One SVG per signal class: absolute accuracy change vs padding, one
/// polyline per stride. Returns the written paths.
inline std::vector<std::string> write_sweep_svgs(const SweepReport& r, const std::string& dir,
                                                 const std::string& prefix = "sweep") {
    if (r.cells.empty()) throw std::invalid_argument("report: empty sweep report");
    std::set<int> strides;
    for (const auto& c : r.cells) strides.insert(c.stride);

    std::vector<std::string> paths;
    for (int cls = 0; cls < kNumClasses; ++cls) {
        std::vector<detail::SvgSeries> series;
        for (int s : strides) {
            detail::SvgSeries sr;
            sr.label = "stride " + std::to_string(s);
            for (const auto& cell : r.cells)
                if (cell.stride == s)
                    sr.points.emplace_back(cell.pad, cell.per_class_delta[cls]);
            std::sort(sr.points.begin(), sr.points.end());
            series.push_back(std::move(sr));
        }
        const std::string cls_name = to_string(static_cast<SignalClass>(cls));
        const std::string path = dir + "/" + prefix + "_" + cls_name + ".svg";
        detail::write_text_file(
            path, detail::render_line_svg("Absolute Accuracy Change (" + cls_name + ") vs Padding",
                                          "padding", "|delta| accuracy", series));
        paths.push_back(path);
    }
    return paths;
}

/// Bar chart of before/after accuracy per class for a single eval report.
inline void write_eval_svg(const EvalReport& r, const std::string& path) {
    const double W = 720, H = 480, ml = 60, mb = 70, mt = 50;
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt1(W) +
           "\" height=\"" + detail::fmt1(H) + "\">\n<rect width=\"100%\" height=\"100%\" "
           "fill=\"white\"/>\n";
    svg += "<text x=\"" + detail::fmt1(W / 2) +
           "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\" font-family=\"sans-serif\">"
           "Accuracy before/after</text>\n";
    const double plot_h = H - mt - mb;
    const double band = (W - ml - 20) / kNumClasses;
    for (int c = 0; c < kNumClasses; ++c) {
        const double x0 = ml + band * c;
        const double hb = r.before[c] * plot_h;
        const double ha = r.after[c] * plot_h;
        svg += "<rect x=\"" + detail::fmt1(x0 + band * 0.15) + "\" y=\"" +
               detail::fmt1(mt + plot_h - hb) + "\" width=\"" + detail::fmt1(band * 0.3) +
               "\" height=\"" + detail::fmt1(hb) + "\" fill=\"#1f77b4\"/>\n";
        svg += "<rect x=\"" + detail::fmt1(x0 + band * 0.55) + "\" y=\"" +
               detail::fmt1(mt + plot_h - ha) + "\" width=\"" + detail::fmt1(band * 0.3) +
               "\" height=\"" + detail::fmt1(ha) + "\" fill=\"#d62728\"/>\n";
        svg += "<text x=\"" + detail::fmt1(x0 + band / 2) + "\" y=\"" + detail::fmt1(H - mb + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" +
               to_string(static_cast<SignalClass>(c)) + "</text>\n";
    }
    svg += "<rect x=\"" + detail::fmt1(ml) + "\" y=\"" + detail::fmt1(H - 36) +
           "\" width=\"12\" height=\"12\" fill=\"#1f77b4\"/><text x=\"" + detail::fmt1(ml + 18) +
           "\" y=\"" + detail::fmt1(H - 26) +
           "\" font-size=\"12\" font-family=\"sans-serif\">before</text>\n";
    svg += "<rect x=\"" + detail::fmt1(ml + 90) + "\" y=\"" + detail::fmt1(H - 36) +
           "\" width=\"12\" height=\"12\" fill=\"#d62728\"/><text x=\"" + detail::fmt1(ml + 108) +
           "\" y=\"" + detail::fmt1(H - 26) +
           "\" font-size=\"12\" font-family=\"sans-serif\">after</text>\n";
    svg += "</svg>\n";
    detail::write_text_file(path, svg);
}

/// Render a sweep CSV (schema padding,stride,total_abs_delta,condition_ok)
/// into a single total-|delta| plot. Used by the CLI `report` command.
inline void render_sweep_csv_to_svg(const std::string& csv_path, const std::string& svg_path) {
    std::ifstream f(csv_path);
    if (!f) throw std::runtime_error("report: cannot open: " + csv_path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("padding,stride,total_abs_delta", 0) != 0)
        throw std::runtime_error("report: not a sweep CSV: " + csv_path);
    std::map<int, detail::SvgSeries> by_stride;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        int pad = 0, stride = 0, cond = 0;
        double delta = 0.0;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%d", &pad, &stride, &delta, &cond) != 4)
            throw std::runtime_error("report: malformed sweep CSV row: " + line);
        auto& s = by_stride[stride];
        s.label = "stride " + std::to_string(stride);
        s.points.emplace_back(pad, delta);
    }
    if (by_stride.empty()) throw std::runtime_error("report: empty sweep CSV");
    std::vector<detail::SvgSeries> series;
    for (auto& [k, v] : by_stride) {
        std::sort(v.points.begin(), v.points.end());
        series.push_back(v);
    }
    detail::write_text_file(svg_path,
                            detail::render_line_svg("Total Absolute Accuracy Change vs Padding",
                                                    "padding", "total |delta| accuracy", series));
}

}  // namespace dicnn
