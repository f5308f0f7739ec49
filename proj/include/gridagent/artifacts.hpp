#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "gridagent/util.hpp"

namespace gridagent {

using BusSeries = std::vector<std::pair<int, double>>; // (bus id, value), caller-ordered

inline std::string render_csv(const BusSeries& rows) {
    std::string out = "bus,value\n";
    for (const auto& [bus, value] : rows)
        out += std::to_string(bus) + "," + format_fixed6(value) + "\n";
    return out;
}

// Presentation-only bar chart; excluded from digests, so layout details are
// free to change.
inline std::string render_svg_bars(const BusSeries& rows, const std::string& title) {
    const int bar_w = 28, gap = 8, height = 220, margin = 40;
    const int width = margin * 2 + static_cast<int>(rows.size()) * (bar_w + gap);
    double vmax = 0.0;
    for (const auto& [bus, value] : rows) vmax = std::max(vmax, std::abs(value));
    if (vmax <= 0.0) vmax = 1.0;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height + 2 * margin) + "\">\n";
    svg += "<text x=\"" + std::to_string(margin) + "\" y=\"20\" font-size=\"14\">" + title + "</text>\n";
    int x = margin;
    for (const auto& [bus, value] : rows) {
        const int h = static_cast<int>(height * std::abs(value) / vmax);
        const int y = margin + height - h;
        svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
               "\" width=\"" + std::to_string(bar_w) + "\" height=\"" + std::to_string(h) +
               "\" fill=\"#4477aa\"/>\n";
        svg += "<text x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(margin + height + 16) +
               "\" font-size=\"10\">" + std::to_string(bus) + "</text>\n";
        x += bar_w + gap;
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace gridagent
