#pragma once

#include <string>
#include <vector>

namespace egtw {

// Minimal CSV table: string cells, first row is the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void save(const std::string& path) const;
    static CsvTable load(const std::string& path);

    int column(const std::string& name) const; // -1 if absent
};

std::string format_double(double v, int precision = 9);

// Single-panel SVG line/bar plot, enough for loss curves and metric bars.
struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

void write_svg_line_plot(const std::string& path, const std::string& title,
                         const std::vector<SvgSeries>& series,
                         const std::string& x_label, const std::string& y_label,
                         bool log_y = false);

void write_svg_bar_plot(const std::string& path, const std::string& title,
                        const std::vector<std::string>& labels,
                        const std::vector<double>& values);

} // namespace egtw
