#pragma once

// Independent reference computations used by the tests. None of these call
// into the library code they are checking.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hdi/matrix.hpp"

namespace oracle {

/// Multi-class perceptron. Returns true once an epoch makes no mistakes,
/// which proves the rows linearly separable.
inline bool perceptron_separates(const hdi::Matrix& x, std::span<const std::size_t> labels, std::size_t classes,
                                 std::size_t max_epochs = 10000) {
    const std::size_t d = x.cols();
    std::vector<std::vector<double>> w(classes, std::vector<double>(d + 1, 0.0));
    for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
        std::size_t mistakes = 0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            std::size_t best = 0;
            double best_score = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < classes; ++c) {
                double s = w[c][d];
                for (std::size_t j = 0; j < d; ++j) s += w[c][j] * x(i, j);
                if (s > best_score) {
                    best_score = s;
                    best = c;
                }
            }
            if (best != labels[i]) {
                ++mistakes;
                for (std::size_t j = 0; j < d; ++j) {
                    w[labels[i]][j] += x(i, j);
                    w[best][j] -= x(i, j);
                }
                w[labels[i]][d] += 1.0;
                w[best][d] -= 1.0;
            }
        }
        if (mistakes == 0) return true;
    }
    return false;
}

/// Central difference of a scalar function along one coordinate.
template <class F>
double central_difference(F f, double& coordinate, double h) {
    const double saved = coordinate;
    coordinate = saved + h;
    const double up = f();
    coordinate = saved - h;
    const double down = f();
    coordinate = saved;
    return (up - down) / (2.0 * h);
}

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

struct Partition {
    std::vector<std::size_t> labels;
    double wcss = std::numeric_limits<double>::infinity();
};

/// Minimum-WCSS partition of the rows into exactly k non-empty groups, by
/// enumerating all k^n labelings. Only for tiny n.
inline Partition brute_force_kmeans(const hdi::Matrix& points, std::size_t k) {
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();
    Partition best;
    std::vector<std::size_t> lab(n, 0);
    while (true) {
        std::vector<std::size_t> size(k, 0);
        std::vector<double> sum(k * d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            ++size[lab[i]];
            for (std::size_t j = 0; j < d; ++j) sum[lab[i] * d + j] += points(i, j);
        }
        if (std::all_of(size.begin(), size.end(), [](std::size_t s) { return s > 0; })) {
            double w = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    const double mean = sum[lab[i] * d + j] / static_cast<double>(size[lab[i]]);
                    w += (points(i, j) - mean) * (points(i, j) - mean);
                }
            }
            if (w < best.wcss) {
                best.wcss = w;
                best.labels = lab;
            }
        }
        std::size_t pos = 0;
        while (pos < n && ++lab[pos] == k) lab[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

/// True when the two labelings induce the same grouping, up to renaming.
inline bool same_partition(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            if ((a[i] == a[j]) != (b[i] == b[j])) return false;
        }
    }
    return true;
}

/// Adjusted Rand index from raw pair counts (no contingency table).
inline double pair_count_ari(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    double ss = 0, sd = 0, ds = 0, dd = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            if (sa && sb) ++ss;
            else if (sa) ++sd;
            else if (sb) ++ds;
            else ++dd;
        }
    }
    const double denom = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
    if (denom == 0.0) return 1.0;
    return 2.0 * (ss * dd - sd * ds) / denom;
}

}  // namespace oracle
