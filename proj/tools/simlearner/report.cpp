#include "simlearner/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iterator>

namespace simlearner::cli {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string xml_escape(const std::string& s) {
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

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

// White (0) to dark blue (1).
std::string shade(double v) {
    v = std::clamp(v, 0.0, 1.0);
    auto ch = [&](int from, int to) { return static_cast<int>(std::lround(from + (to - from) * v)); };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", ch(255, 8), ch(255, 48), ch(255, 107));
    return buf;
}

}  // namespace

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
    }
    return out + "\n";
}

std::string fmt_number(double v) {
    char buf[64];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, double y_max) {
    const double w = 640, h = 400, left = 60, right = 150, top = 40, bottom = 50;
    const double pw = w - left - right, ph = h - top - bottom;

    double x_min = 0, x_max = 1;
    bool first = true;
    for (const auto& s : series) {
        for (const auto& [x, _] : s.points) {
            if (first) x_min = x_max = x, first = false;
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
        }
    }
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max <= 0) y_max = 1;
    auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * pw; };
    auto sy = [&](double y) { return top + ph - y / y_max * ph; };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(w) + "\" height=\"" + px(h) +
                      "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + px(w / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + xml_escape(title) +
           "</text>\n";
    out += "<line x1=\"" + px(left) + "\" y1=\"" + px(top + ph) + "\" x2=\"" + px(left + pw) + "\" y2=\"" +
           px(top + ph) + "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + px(left) + "\" y1=\"" + px(top) + "\" x2=\"" + px(left) + "\" y2=\"" + px(top + ph) +
           "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double y = y_max * i / 4.0;
        out += "<text x=\"" + px(left - 6) + "\" y=\"" + px(sy(y) + 4) + "\" text-anchor=\"end\">" +
               fmt_number(std::round(y * 100) / 100) + "</text>\n";
    }
    for (double x = std::ceil(x_min); x <= x_max; x += 1.0) {
        out += "<text x=\"" + px(sx(x)) + "\" y=\"" + px(top + ph + 18) + "\" text-anchor=\"middle\">" +
               fmt_number(x) + "</text>\n";
    }
    out += "<text x=\"" + px(left + pw / 2) + "\" y=\"" + px(h - 10) + "\" text-anchor=\"middle\">" +
           xml_escape(x_label) + "</text>\n";
    out += "<text x=\"16\" y=\"" + px(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           px(top + ph / 2) + ")\">" + xml_escape(y_label) + "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const std::string color = kPalette[i % std::size(kPalette)];
        std::string pts;
        for (const auto& [x, y] : s.points) pts += px(sx(x)) + "," + px(sy(y)) + " ";
        if (!pts.empty()) pts.pop_back();
        out += "<polyline class=\"series\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"" +
               (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + " points=\"" + pts + "\"/>\n";
        const double ly = top + 14 + 18 * static_cast<double>(i);
        out += "<line x1=\"" + px(left + pw + 12) + "\" y1=\"" + px(ly - 4) + "\" x2=\"" + px(left + pw + 32) +
               "\" y2=\"" + px(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + px(left + pw + 38) + "\" y=\"" + px(ly) + "\">" + xml_escape(s.label) + "</text>\n";
    }
    return out + "</svg>\n";
}

std::string heatmap_svg(const std::string& title, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::vector<std::vector<double>>& values) {
    const double cell = 18, left = 90, top = 40, label_band = 80;
    const double w = left + cell * static_cast<double>(col_labels.size()) + 20;
    const double h = top + cell * static_cast<double>(row_labels.size()) + label_band;

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(w) + "\" height=\"" + px(h) +
                      "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + px(left) + "\" y=\"22\" font-size=\"14\">" + xml_escape(title) + "</text>\n";
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
        const double y = top + cell * static_cast<double>(r);
        out += "<text x=\"" + px(left - 6) + "\" y=\"" + px(y + cell * 0.7) + "\" text-anchor=\"end\">" +
               xml_escape(row_labels[r]) + "</text>\n";
        for (std::size_t c = 0; c < col_labels.size(); ++c) {
            const double v = r < values.size() && c < values[r].size() ? values[r][c] : 0.0;
            out += "<rect class=\"cell\" x=\"" + px(left + cell * static_cast<double>(c)) + "\" y=\"" + px(y) +
                   "\" width=\"" + px(cell) + "\" height=\"" + px(cell) + "\" fill=\"" + shade(v) +
                   "\" stroke=\"#dddddd\"><title>" + xml_escape(row_labels[r] + " / " + col_labels[c]) + ": " +
                   fmt_number(std::round(v * 1000) / 1000) + "</title></rect>\n";
        }
    }
    const double ly = top + cell * static_cast<double>(row_labels.size()) + 6;
    for (std::size_t c = 0; c < col_labels.size(); ++c) {
        const double x = left + cell * (static_cast<double>(c) + 0.6);
        out += "<text x=\"" + px(x) + "\" y=\"" + px(ly) + "\" transform=\"rotate(90 " + px(x) + " " + px(ly) +
               ")\">" + xml_escape(col_labels[c]) + "</text>\n";
    }
    return out + "</svg>\n";
}

}  // namespace simlearner::cli
