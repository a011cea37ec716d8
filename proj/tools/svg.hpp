#pragma once

// Minimal deterministic SVG line plots for the suite reports.

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

namespace hbvtool {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string line_plot(const std::string& title, const std::vector<Series>& series,
                             const std::string& xlabel = "", const std::string& ylabel = "") {
    const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    const auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(W) + "\" height=\"" + svg_num(H) +
           "\" viewBox=\"0 0 " + svg_num(W) + " " + svg_num(H) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + svg_num(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + title +
           "</text>\n";
    out += "<rect x=\"" + svg_num(ml) + "\" y=\"" + svg_num(mt) + "\" width=\"" + svg_num(W - ml - mr) +
           "\" height=\"" + svg_num(H - mt - mb) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = xmin + t * (xmax - xmin) / 4, yv = ymin + t * (ymax - ymin) / 4;
        out += "<text x=\"" + svg_num(px(xv)) + "\" y=\"" + svg_num(H - mb + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + svg_num(xv) + "</text>\n";
        out += "<text x=\"" + svg_num(ml - 8) + "\" y=\"" + svg_num(py(yv) + 4) +
               "\" text-anchor=\"end\" font-size=\"11\">" + svg_num(yv) + "</text>\n";
    }
    if (!xlabel.empty())
        out += "<text x=\"" + svg_num(W / 2) + "\" y=\"" + svg_num(H - 12) +
               "\" text-anchor=\"middle\" font-size=\"12\">" + xlabel + "</text>\n";
    if (!ylabel.empty())
        out += "<text x=\"16\" y=\"" + svg_num(H / 2) + "\" font-size=\"12\" transform=\"rotate(-90 16 " +
               svg_num(H / 2) + ")\" text-anchor=\"middle\">" + ylabel + "</text>\n";
    int ci = 0;
    for (const auto& s : series) {
        const char* color = colors[ci % 6];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            pts += svg_num(px(s.x[i])) + "," + svg_num(py(s.y[i])) + " ";
        out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out += "<circle cx=\"" + svg_num(px(s.x[i])) + "\" cy=\"" + svg_num(py(s.y[i])) +
                   "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
        out += "<text x=\"" + svg_num(W - mr - 8) + "\" y=\"" + svg_num(mt + 16 + 16 * ci) +
               "\" text-anchor=\"end\" font-size=\"12\" fill=\"" + color + "\">" + s.label + "</text>\n";
        ++ci;
    }
    out += "</svg>\n";
    return out;
}

}  // namespace hbvtool
