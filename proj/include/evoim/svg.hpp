#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace evoim {

struct SvgSeries {
    std::string name;
    std::vector<double> values;  // indexed by trial
};

// Minimal multi-series line chart; x axis is the series index (trial).
inline void write_line_chart(std::ostream& out, const std::string& title, const std::vector<SvgSeries>& series) {
    const int width = 640, height = 400, margin = 50;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    double lo = 0, hi = 1;
    size_t max_len = 1;
    bool first = true;
    for (const auto& s : series) {
        max_len = std::max(max_len, s.values.size());
        for (double v : s.values) {
            if (!std::isfinite(v)) continue;
            if (first) {
                lo = hi = v;
                first = false;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (hi <= lo) hi = lo + 1;
    lo = std::min(lo, 0.0);

    auto px = [&](size_t i) {
        return margin + (width - 2.0 * margin) * (max_len > 1 ? static_cast<double>(i) / (max_len - 1) : 0.5);
    };
    auto py = [&](double v) { return height - margin - (height - 2.0 * margin) * (v - lo) / (hi - lo); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << margin - 6 << "\" y=\"" << py(lo) << "\" text-anchor=\"end\" font-size=\"10\">" << lo
        << "</text>\n";
    out << "<text x=\"" << margin - 6 << "\" y=\"" << py(hi) << "\" text-anchor=\"end\" font-size=\"10\">" << hi
        << "</text>\n";

    for (size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = palette[k % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.values.size(); ++i) {
            if (!std::isfinite(s.values[i])) continue;
            out << px(i) << "," << py(s.values[i]) << " ";
        }
        out << "\"/>\n";
        out << "<text x=\"" << width - margin + 4 << "\" y=\"" << margin + 14 * k << "\" font-size=\"11\" fill=\""
            << color << "\">" << s.name << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace evoim
