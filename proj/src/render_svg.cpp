#include "vmi/render_svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace vmi {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

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

} // namespace

std::string ramp_color(double value, double lo, double hi) {
    double u = hi > lo ? (value - lo) / (hi - lo) : 0.5;
    u = std::clamp(u, 0.0, 1.0);
    // quantize to the fixed 256-step ramp
    const int step = std::min(255, static_cast<int>(u * 256.0));
    const double t = static_cast<double>(step) / 255.0;
    int r, g, b;
    if (t < 0.5) {
        const double s = t * 2.0; // blue -> white
        r = static_cast<int>(std::lround(255.0 * s));
        g = static_cast<int>(std::lround(255.0 * s));
        b = 255;
    } else {
        const double s = (t - 0.5) * 2.0; // white -> red
        r = 255;
        g = static_cast<int>(std::lround(255.0 * (1.0 - s)));
        b = static_cast<int>(std::lround(255.0 * (1.0 - s)));
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string svg_heatmap(const Eigen::MatrixXd& values, double x_lo, double x_hi,
                        double y_lo, double y_hi, const std::string& title,
                        double clip_lo, double clip_hi) {
    const int n_rows = static_cast<int>(values.rows());
    const int n_cols = static_cast<int>(values.cols());
    const double cell_w = 4.0, cell_h = 8.0;
    const double margin = 40.0;
    const double plot_w = cell_w * n_cols, plot_h = cell_h * n_rows;
    const double width = plot_w + 2.0 * margin, height = plot_h + 2.0 * margin;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
        << "\" height=\"" << fmt(height) << "\">\n";
    svg << "<rect width=\"" << fmt(width) << "\" height=\"" << fmt(height)
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fmt(margin) << "\" y=\"24\" font-family=\"monospace\" "
           "font-size=\"14\">"
        << xml_escape(title) << "</text>\n";

    for (int i = 0; i < n_rows; ++i) {
        // row 0 at the bottom of the plot
        const double y = margin + plot_h - cell_h * static_cast<double>(i + 1);
        for (int j = 0; j < n_cols; ++j) {
            const double x = margin + cell_w * static_cast<double>(j);
            svg << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
                << fmt(cell_w) << "\" height=\"" << fmt(cell_h) << "\" fill=\""
                << ramp_color(values(i, j), clip_lo, clip_hi) << "\"/>\n";
        }
    }

    svg << "<text x=\"" << fmt(margin) << "\" y=\"" << fmt(height - 8.0)
        << "\" font-family=\"monospace\" font-size=\"12\">" << fmt(x_lo) << "</text>\n";
    svg << "<text x=\"" << fmt(margin + plot_w - 30.0) << "\" y=\"" << fmt(height - 8.0)
        << "\" font-family=\"monospace\" font-size=\"12\">" << fmt(x_hi) << "</text>\n";
    svg << "<text x=\"4\" y=\"" << fmt(margin + plot_h)
        << "\" font-family=\"monospace\" font-size=\"12\">" << fmt(y_lo) << "</text>\n";
    svg << "<text x=\"4\" y=\"" << fmt(margin + 12.0)
        << "\" font-family=\"monospace\" font-size=\"12\">" << fmt(y_hi) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string svg_scalp_map(const Eigen::MatrixXd& grid, const montage& m,
                          const std::string& title, double clip_lo, double clip_hi) {
    const int n = static_cast<int>(grid.rows());
    const double size = 480.0;
    const double margin = 40.0;
    const double plot = size - 2.0 * margin;
    const double cell = plot / static_cast<double>(n);
    // montage coordinates span [-1.2, 1.2]
    const auto px = [&](double x) { return margin + (x + 1.2) / 2.4 * plot; };
    const auto py = [&](double y) { return margin + (1.2 - y) / 2.4 * plot; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(size)
        << "\" height=\"" << fmt(size) << "\">\n";
    svg << "<rect width=\"" << fmt(size) << "\" height=\"" << fmt(size)
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fmt(margin) << "\" y=\"24\" font-family=\"monospace\" "
           "font-size=\"14\">"
        << xml_escape(title) << "</text>\n";

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = grid(i, j);
            if (std::isnan(v)) continue;
            svg << "<rect x=\"" << fmt(margin + cell * j) << "\" y=\""
                << fmt(margin + cell * i) << "\" width=\"" << fmt(cell)
                << "\" height=\"" << fmt(cell) << "\" fill=\""
                << ramp_color(v, clip_lo, clip_hi) << "\"/>\n";
        }
    }

    // head outline at unit radius, outer bound at 1.2
    svg << "<circle cx=\"" << fmt(px(0.0)) << "\" cy=\"" << fmt(py(0.0)) << "\" r=\""
        << fmt(plot / 2.4) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    svg << "<circle cx=\"" << fmt(px(0.0)) << "\" cy=\"" << fmt(py(0.0)) << "\" r=\""
        << fmt(1.2 * plot / 2.4)
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    for (const auto& ch : m.channels) {
        svg << "<circle cx=\"" << fmt(px(ch.x)) << "\" cy=\"" << fmt(py(ch.y))
            << "\" r=\"2\" fill=\"black\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace vmi
