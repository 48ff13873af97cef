#include "hdi/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "hdi/error.hpp"
#include "hdi/numfmt.hpp"

namespace hdi::plot {

namespace {

constexpr std::array<const char*, 8> kColors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                             "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) { return format_fixed(v, 2); }

std::string escape_xml(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

/// Marker shape cycles circle, square, triangle, diamond.
std::string marker(std::size_t cluster, double x, double y) {
    const std::string cls = "point cluster-" + std::to_string(cluster);
    const char* color = kColors[cluster % kColors.size()];
    const double r = 3.5;
    std::ostringstream out;
    switch (cluster % 4) {
        case 0:
            out << "<circle class=\"" << cls << "\" cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r)
                << "\" fill=\"" << color << "\"/>";
            break;
        case 1:
            out << "<rect class=\"" << cls << "\" x=\"" << num(x - r) << "\" y=\"" << num(y - r) << "\" width=\""
                << num(2 * r) << "\" height=\"" << num(2 * r) << "\" fill=\"" << color << "\"/>";
            break;
        case 2:
            out << "<polygon class=\"" << cls << "\" points=\"" << num(x) << ',' << num(y - r) << ' ' << num(x - r)
                << ',' << num(y + r) << ' ' << num(x + r) << ',' << num(y + r) << "\" fill=\"" << color << "\"/>";
            break;
        default:
            out << "<polygon class=\"" << cls << "\" points=\"" << num(x) << ',' << num(y - r) << ' ' << num(x + r)
                << ',' << num(y) << ' ' << num(x) << ',' << num(y + r) << ' ' << num(x - r) << ',' << num(y)
                << "\" fill=\"" << color << "\"/>";
            break;
    }
    return out.str();
}

struct Axis {
    double lo;
    double hi;
};

Axis padded_range(double lo, double hi) {
    if (hi <= lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

}  // namespace

std::string cluster_scatter_svg(const Matrix& points, std::span<const std::size_t> assignments,
                                const Matrix& centroids, const ScatterOptions& options) {
    if (points.rows() != assignments.size()) {
        throw_data("LengthMismatch", "scatter needs one assignment per point");
    }
    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
    bool first = true;
    auto extend = [&](double x, double y) {
        if (first) {
            xmin = xmax = x;
            ymin = ymax = y;
            first = false;
        }
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    };
    for (std::size_t i = 0; i < points.rows(); ++i) extend(points(i, 0), points(i, 1));
    for (std::size_t c = 0; c < centroids.rows(); ++c) extend(centroids(c, 0), centroids(c, 1));
    const Axis xa = padded_range(xmin, xmax);
    const Axis ya = padded_range(ymin, ymax);

    const double left = 70.0, right = 130.0, top = 40.0, bottom = 55.0;
    const double pw = options.width - left - right;
    const double ph = options.height - top - bottom;
    auto sx = [&](double x) { return left + (x - xa.lo) / (xa.hi - xa.lo) * pw; };
    auto sy = [&](double y) { return top + ph - (y - ya.lo) / (ya.hi - ya.lo) * ph; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(options.width) << "\" height=\""
        << num(options.height) << "\" viewBox=\"0 0 " << num(options.width) << ' ' << num(options.height) << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << num(options.width) << "\" height=\"" << num(options.height)
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(options.width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"15\">" << escape_xml(options.title) << "</text>\n";

    // Axes and ticks.
    svg << "<g class=\"axes\" stroke=\"#333\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(left + pw) << "\" y2=\""
        << num(top + ph) << "\"/>\n";
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
        << num(top + ph) << "\"/>\n";
    constexpr int ticks = 5;
    for (int t = 0; t <= ticks; ++t) {
        const double xv = xa.lo + (xa.hi - xa.lo) * t / ticks;
        const double yv = ya.lo + (ya.hi - ya.lo) * t / ticks;
        svg << "<line x1=\"" << num(sx(xv)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(sx(xv)) << "\" y2=\""
            << num(top + ph + 5) << "\"/>";
        svg << "<text stroke=\"none\" x=\"" << num(sx(xv)) << "\" y=\"" << num(top + ph + 18)
            << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
        svg << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(sy(yv)) << "\" x2=\"" << num(left) << "\" y2=\""
            << num(sy(yv)) << "\"/>";
        svg << "<text stroke=\"none\" x=\"" << num(left - 8) << "\" y=\"" << num(sy(yv) + 4)
            << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    }
    svg << "<text stroke=\"none\" x=\"" << num(left + pw / 2) << "\" y=\"" << num(options.height - 12)
        << "\" text-anchor=\"middle\">" << escape_xml(options.x_label) << "</text>\n";
    svg << "<text stroke=\"none\" x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << num(top + ph / 2) << ")\">" << escape_xml(options.y_label) << "</text>\n";
    svg << "</g>\n";

    svg << "<g class=\"points\">\n";
    for (std::size_t i = 0; i < points.rows(); ++i) {
        svg << marker(assignments[i], sx(points(i, 0)), sy(points(i, 1))) << '\n';
    }
    svg << "</g>\n";

    svg << "<g class=\"centroids\" stroke-width=\"2.5\">\n";
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double x = sx(centroids(c, 0));
        const double y = sy(centroids(c, 1));
        const double r = 8.0;
        svg << "<path class=\"centroid cluster-" << c << "\" d=\"M" << num(x - r) << ' ' << num(y - r) << " L"
            << num(x + r) << ' ' << num(y + r) << " M" << num(x - r) << ' ' << num(y + r) << " L" << num(x + r) << ' '
            << num(y - r) << "\" stroke=\"black\"/>\n";
    }
    svg << "</g>\n";

    // Legend uses the same 0-based numbering as the CSV outputs.
    svg << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double y = top + 10.0 + 20.0 * static_cast<double>(c);
        const double x = left + pw + 25.0;
        std::string m = marker(c, x, y);
        m.replace(m.find("class=\"point"), 12, "class=\"legend-key");
        svg << m << "<text x=\"" << num(x + 12) << "\" y=\"" << num(y + 4) << "\">cluster " << c << "</text>\n";
    }
    svg << "</g>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace hdi::plot
