#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hdi/features.hpp"
#include "hdi/matrix.hpp"

namespace hdi::kmeans {

enum class InitMethod { KMeansPlusPlus, Random, Provided };

[[nodiscard]] std::string_view to_string(InitMethod m);
[[nodiscard]] std::optional<InitMethod> parse_init(std::string_view text);

struct KMeansConfig {
    std::size_t k = 4;
    InitMethod init = InitMethod::KMeansPlusPlus;
    Matrix provided_centroids;  ///< k x d, used with InitMethod::Provided
    std::uint64_t seed = 0;
    std::size_t max_iters = 300;
    /// Independently seeded initializations; the lowest final WCSS is kept.
    /// Ignored for provided centroids.
    std::size_t restarts = 10;
    double tol = 1e-6;
    /// Min-max scale each axis before clustering.
    bool prescale = false;
};

/// Fitted Lloyd clustering. Clusters are numbered by ascending mean of the
/// first coordinate (HDI), ties by original numbering.
struct ClusterModel {
    std::size_t k = 0;
    Matrix centroids;  ///< in the (possibly scaled) clustering space
    std::vector<std::size_t> assignments;
    std::size_t iterations_run = 0;
    bool converged = false;
    double wcss = 0.0;
    std::vector<double> wcss_trace;  ///< objective after each update step
    std::optional<features::Scaling> scaling;

    friend bool operator==(const ClusterModel&, const ClusterModel&) = default;
};

/// Lloyd's algorithm. Stops once an update moves no centroid by more than
/// `tol` and the next assignment step changes nothing, or after max_iters.
/// Throws TooFewPoints (n < k), DegenerateInput (fewer than k distinct points),
/// NonFiniteInput, or InvalidArgument.
ClusterModel kmeans_fit(const Matrix& points, const KMeansConfig& config);

/// Squared Euclidean distance.
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Nearest centroid of an unscaled point; ties go to the lower index.
std::size_t assign(const ClusterModel& model, std::span<const double> point);

/// Sum of squared distances of (scaled) points to their assigned centroids.
double compute_wcss(const Matrix& points, const Matrix& centroids, std::span<const std::size_t> assignments);

/// Applies the model's scaling (if any) to raw points.
Matrix to_model_space(const ClusterModel& model, const Matrix& raw_points);

/// Centroids mapped back to the unscaled input space.
Matrix centroids_in_input_space(const ClusterModel& model);

struct Range {
    double min = 0.0;
    double max = 0.0;
};

struct ClusterStats {
    std::size_t size = 0;
    double mean_hdi = 0.0;
    double mean_gdp = 0.0;
    HdiCategory hdi_category_of_mean = HdiCategory::Low;
    Range hdi_range;
    Range gdp_range;
};

struct ClusterSummary {
    std::vector<ClusterStats> clusters;
};

/// Per-cluster statistics on the unscaled (HDI, GDP) points.
ClusterSummary summarize(const ClusterModel& model, const Matrix& raw_points,
                         const features::CategoryThresholds& thresholds = {});

enum class Axis { Hdi, Gdp };

struct Overlap {
    std::size_t first = 0;
    std::size_t second = 0;
    Range interval;
};

/// Cluster pairs whose ranges on `axis` intersect, with the shared interval.
std::vector<Overlap> cluster_overlap_report(const ClusterSummary& summary, Axis axis);

nlohmann::json summary_to_json(const ClusterSummary& summary);
nlohmann::json overlaps_to_json(const std::vector<Overlap>& overlaps);

/// CSV `cluster,hdi,gdp` in clustering space; reloadable as provided centroids.
void write_centroids_csv(const ClusterModel& model, std::ostream& out);
Matrix read_centroids_csv(std::istream& in);

/// Full model, for bit-for-bit comparisons and reuse.
nlohmann::json model_to_json(const ClusterModel& model);

}  // namespace hdi::kmeans
