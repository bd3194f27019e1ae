#pragma once
// CSV tables and SVG charts for run reports.

#include <map>
#include <string>
#include <vector>

namespace simlearner::cli {

std::string csv_field(const std::string& s);
std::string csv_row(const std::vector<std::string>& fields);
// Shortest round-trippable decimal form; "0.5", not "0.500000".
std::string fmt_number(double v);

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
    bool dashed = false;
};

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, double y_max);

// One <rect class="cell"> per (row, column); values in [0, 1].
std::string heatmap_svg(const std::string& title, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::vector<std::vector<double>>& values);

}  // namespace simlearner::cli
