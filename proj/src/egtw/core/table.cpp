#include "egtw/core/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "egtw/core/error.hpp"

namespace egtw {

namespace {

std::string escape_csv(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

} // namespace

void CsvTable::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open for writing: " + path);
    auto write_row = [&os](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << escape_csv(row[i]);
        }
        os << '\n';
    };
    write_row(header);
    for (const auto& r : rows) write_row(r);
}

CsvTable CsvTable::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open: " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (first) {
            t.header = cells;
            first = false;
        } else {
            t.rows.push_back(cells);
        }
    }
    return t;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::string format_double(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

namespace {

constexpr double kW = 760, kH = 460;
constexpr double kL = 70, kR = 20, kT = 40, kB = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

} // namespace

void write_svg_line_plot(const std::string& path, const std::string& title,
                         const std::vector<SvgSeries>& series,
                         const std::string& x_label, const std::string& y_label,
                         bool log_y) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (log_y) {
                if (y <= 0) continue;
                y = std::log10(y);
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;

    auto px = [&](double x) { return kL + (x - xmin) / (xmax - xmin) * (kW - kL - kR); };
    auto py = [&](double y) {
        if (log_y) y = std::log10(std::max(y, 1e-300));
        return kH - kB - (y - ymin) / (ymax - ymin) * (kH - kT - kB);
    };

    std::ofstream os(path);
    if (!os) throw FormatError("cannot open for writing: " + path);
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << kW / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title << "</text>\n";
    os << "<line x1='" << kL << "' y1='" << kH - kB << "' x2='" << kW - kR << "' y2='" << kH - kB << "' stroke='black'/>\n";
    os << "<line x1='" << kL << "' y1='" << kT << "' x2='" << kL << "' y2='" << kH - kB << "' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy_log = ymin + (ymax - ymin) * i / 4.0;
        const double fy = log_y ? std::pow(10.0, fy_log) : fy_log;
        os << "<text x='" << px(fx) << "' y='" << kH - kB + 18 << "' text-anchor='middle' font-size='11'>"
           << format_double(fx, 4) << "</text>\n";
        os << "<text x='" << kL - 6 << "' y='" << (kH - kB - (kH - kT - kB) * i / 4.0 + 4)
           << "' text-anchor='end' font-size='11'>" << format_double(fy, 3) << "</text>\n";
    }
    os << "<text x='" << kW / 2 << "' y='" << kH - 12 << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n";
    os << "<text x='16' y='" << kH / 2 << "' font-size='12' transform='rotate(-90 16 " << kH / 2 << ")' text-anchor='middle'>"
       << y_label << "</text>\n";
    int ci = 0;
    for (const auto& s : series) {
        const std::string color = s.color.empty() ? kPalette[ci % 6] : s.color;
        os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (log_y && s.y[i] <= 0) continue;
            os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        os << "'/>\n";
        os << "<text x='" << kW - kR - 6 << "' y='" << kT + 16 + 16 * ci << "' text-anchor='end' font-size='12' fill='"
           << color << "'>" << s.label << "</text>\n";
        ++ci;
    }
    os << "</svg>\n";
}

void write_svg_bar_plot(const std::string& path, const std::string& title,
                        const std::vector<std::string>& labels,
                        const std::vector<double>& values) {
    if (labels.size() != values.size()) throw ValidationError("bar plot labels/values mismatch");
    double vmax = 1e-12;
    for (double v : values) vmax = std::max(vmax, v);
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open for writing: " + path);
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << kW / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title << "</text>\n";
    const double span = kW - kL - kR;
    const double bw = span / std::max<std::size_t>(1, labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double h = (kH - kT - kB) * values[i] / vmax;
        const double x = kL + bw * static_cast<double>(i) + bw * 0.15;
        os << "<rect x='" << x << "' y='" << kH - kB - h << "' width='" << bw * 0.7 << "' height='" << h
           << "' fill='" << kPalette[i % 6] << "'/>\n";
        os << "<text x='" << x + bw * 0.35 << "' y='" << kH - kB + 16 << "' text-anchor='middle' font-size='11'>"
           << labels[i] << "</text>\n";
        os << "<text x='" << x + bw * 0.35 << "' y='" << kH - kB - h - 4 << "' text-anchor='middle' font-size='11'>"
           << format_double(values[i], 4) << "</text>\n";
    }
    os << "</svg>\n";
}

} // namespace egtw
