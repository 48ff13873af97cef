#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "hdi/matrix.hpp"

namespace hdi::plot {

struct ScatterOptions {
    std::string title = "K-means clusters of HDI and GDP";
    std::string x_label = "HDI";
    std::string y_label = "GDP";
    double width = 720.0;
    double height = 480.0;
};

/// Standalone SVG scatter of (x, y) points, one marker shape and colour per
/// cluster, with each centroid drawn as a cross. Point markers carry
/// class="point cluster-N" and centroid markers class="centroid cluster-N".
std::string cluster_scatter_svg(const Matrix& points, std::span<const std::size_t> assignments,
                                const Matrix& centroids, const ScatterOptions& options = {});

}  // namespace hdi::plot
