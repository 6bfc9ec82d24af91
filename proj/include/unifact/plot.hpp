#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "unifact/errors.hpp"

namespace unifact {

/// Minimal static SVG line chart, one polyline per series.
struct SvgSeries {
    std::string label;
    std::vector<double> ys;
};

inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::vector<double>& xs, const std::vector<SvgSeries>& series,
                            bool log_y = false) {
    const int w = 720, h = 400, ml = 60, mr = 20, mt = 40, mb = 40;
    double xmin = xs.empty() ? 0.0 : xs.front(), xmax = xs.empty() ? 1.0 : xs.back();
    if (xmax == xmin) xmax = xmin + 1.0;
    double ymin = 1e300, ymax = -1e300;
    auto yval = [&](double y) {
        if (!log_y) return y;
        return std::log10(std::max(y, 1e-18));
    };
    for (const auto& s : series)
        for (double y : s.ys) {
            ymin = std::min(ymin, yval(y));
            ymax = std::max(ymax, yval(y));
        }
    if (ymin > ymax) {
        ymin = 0;
        ymax = 1;
    }
    if (ymax == ymin) ymax = ymin + 1.0;
    auto px = [&](double x) {
        return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr);
    };
    auto py = [&](double y) {
        return h - mb - (yval(y) - ymin) / (ymax - ymin) * (h - mt - mb);
    };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw BadInput("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
        << h - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[s % 5] << "\" points=\"";
        for (std::size_t i = 0; i < series[s].ys.size() && i < xs.size(); ++i)
            out << px(xs[i]) << "," << py(series[s].ys[i]) << " ";
        out << "\"/>\n";
        out << "<text x=\"" << ml + 8 << "\" y=\"" << mt + 16 * (s + 1) << "\" fill=\""
            << colors[s % 5] << "\" font-size=\"12\">" << series[s].label << "</text>\n";
    }
    if (log_y)
        out << "<text x=\"8\" y=\"" << mt << "\" font-size=\"11\">log10</text>\n";
    out << "</svg>\n";
}

} // namespace unifact
