#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oclaser/errors.hpp"

// Flat-file emission: CSV with a header line, '.' decimal separator and 17
// significant digits, plus a dependency-free SVG line plot.

namespace oclaser {

inline std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(const std::vector<std::string>& row) { rows.push_back(row); }

    std::string to_string() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) os << ',';
            os << header[i];
        }
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) os << ',';
                os << row[i];
            }
            os << '\n';
        }
        return os.str();
    }

    void write(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw validation_error("cannot open for writing: " + path);
        f << to_string();
    }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw validation_error("cannot open for reading: " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t pos = line.find(',', start);
            if (pos == std::string::npos) {
                cells.push_back(line.substr(start));
                break;
            }
            cells.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (first) {
            t.header = cells;
            first = false;
        } else {
            t.rows.push_back(cells);
        }
    }
    return t;
}

// Minimal line plot: one polyline with ticks and axis labels, fixed-format
// numbers so repeated runs are byte-identical.
inline void write_svg_line_plot(const std::string& path, const std::vector<double>& x,
                                const std::vector<double>& y, const std::string& xlabel,
                                const std::string& ylabel, const std::string& title) {
    if (x.size() != y.size()) throw validation_error("svg plot: x/y size mismatch");
    const int W = 720, H = 480, ML = 80, MR = 30, MT = 40, MB = 60;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        if (!any) {
            xmin = xmax = x[i];
            ymin = ymax = y[i];
            any = true;
        } else {
            xmin = std::min(xmin, x[i]);
            xmax = std::max(xmax, x[i]);
            ymin = std::min(ymin, y[i]);
            ymax = std::max(ymax, y[i]);
        }
    }
    if (!any) {
        xmin = ymin = 0;
        xmax = ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double v) { return ML + (v - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto py = [&](double v) { return H - MB - (v - ymin) / (ymax - ymin) * (H - MT - MB); };
    auto num = [](double v) {
        char b[32];
        std::snprintf(b, sizeof(b), "%.6g", v);
        return std::string(b);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"16\">" << title << "</text>\n";
    // axes
    os << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\"" << H - MB
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
       << "\" stroke=\"black\"/>\n";
    // ticks
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 5.0;
        const double yv = ymin + (ymax - ymin) * i / 5.0;
        os << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << H - MB << "\" x2=\"" << num(px(xv))
           << "\" y2=\"" << H - MB + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << num(px(xv)) << "\" y=\"" << H - MB + 20
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(xv)
           << "</text>\n";
        os << "<line x1=\"" << ML - 5 << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << ML << "\" y2=\""
           << num(py(yv)) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << ML - 8 << "\" y=\"" << num(py(yv) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(yv)
           << "</text>\n";
    }
    os << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 15
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xlabel
       << "</text>\n";
    os << "<text x=\"18\" y=\"" << (MT + H - MB) / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 "
          "18 " << (MT + H - MB) / 2 << ")\">" << ylabel << "</text>\n";
    // data
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    bool started = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        if (started) os << ' ';
        os << num(px(x[i])) << ',' << num(py(y[i]));
        started = true;
    }
    os << "\"/>\n</svg>\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot open for writing: " + path);
    f << os.str();
}

}  // namespace oclaser
