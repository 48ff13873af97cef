#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hdi/ingest.hpp"
#include "hdi/matrix.hpp"

namespace hdi {

/// UNDP development band. Ordered: Low < Medium < High < VeryHigh.
enum class HdiCategory : std::uint8_t { Low = 0, Medium = 1, High = 2, VeryHigh = 3 };

inline constexpr std::size_t kCategoryCount = 4;
inline constexpr std::array<HdiCategory, kCategoryCount> kAllCategories{
    HdiCategory::Low, HdiCategory::Medium, HdiCategory::High, HdiCategory::VeryHigh};

[[nodiscard]] std::string_view to_string(HdiCategory category);
/// Accepts the names produced by to_string, case-sensitively.
[[nodiscard]] std::optional<HdiCategory> parse_category(std::string_view text);
[[nodiscard]] inline std::size_t index_of(HdiCategory c) { return static_cast<std::size_t>(c); }
[[nodiscard]] inline HdiCategory category_at(std::size_t i) { return static_cast<HdiCategory>(i); }

}  // namespace hdi

namespace hdi::features {

/// Lower-inclusive cutoffs on the 0-100 HDI scale.
struct CategoryThresholds {
    double t1 = 60.0;
    double t2 = 70.0;
    double t3 = 80.0;

    /// Throws Usage/"InvalidThresholds" unless t1 < t2 < t3, all finite.
    void validate() const;
};

/// Throws Data/"NonFiniteInput" for NaN or infinite input.
HdiCategory categorize(double hdi, const CategoryThresholds& thresholds = {});

/// Source indicator strings for the six logical variables.
struct IndicatorNames {
    std::string hdi = "Human Development Index";
    std::string gdp = "Gross Domestic Product";
    std::string npp = "Number of Population in Poverty";
    std::string niu = "Number of Internet Users";
    std::string nl = "Number of Labors";
    std::string np = "Number of Population";

    /// The five predictors in fixed column order GDP, NPP, NIU, NL, NP.
    [[nodiscard]] std::vector<std::string> predictors() const { return {gdp, npp, niu, nl, np}; }
};

inline constexpr std::array<std::string_view, 5> kPredictorLabels{"GDP", "NPP", "NIU", "NL", "NP"};

enum class ScalingMethod { None, MinMax, ZScore };

[[nodiscard]] std::string_view to_string(ScalingMethod method);
[[nodiscard]] std::optional<ScalingMethod> parse_scaling(std::string_view text);

/// Parameters fitted on one column. min/max are always recorded so that
/// out-of-range inputs can be detected whatever the method.
struct ColumnScaling {
    ScalingMethod method = ScalingMethod::None;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0;

    /// Constant columns map to 0.0.
    [[nodiscard]] double apply(double x) const;
    [[nodiscard]] double invert(double y) const;

    friend bool operator==(const ColumnScaling&, const ColumnScaling&) = default;
};

struct Scaling {
    std::vector<ColumnScaling> columns;

    [[nodiscard]] Matrix apply(const Matrix& raw) const;
    [[nodiscard]] Matrix invert(const Matrix& scaled) const;
    /// True when every value lies within the fitted [min, max] of its column.
    [[nodiscard]] bool within_fitted_range(std::span<const double> raw_row) const;

    friend bool operator==(const Scaling&, const Scaling&) = default;
};

/// Population statistics, summed in row order.
Scaling fit_scaling(const Matrix& raw, ScalingMethod method);

nlohmann::json scaling_to_json(const Scaling& scaling);
Scaling scaling_from_json(const nlohmann::json& j);

struct LabeledDataset {
    std::vector<std::string> region_ids;
    Matrix raw_features;  ///< unscaled, columns GDP, NPP, NIU, NL, NP
    Matrix features;      ///< raw_features after `scaling`
    std::vector<HdiCategory> labels;
    Scaling scaling;

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
    /// Rows at `indices`; scaling parameters are carried over unchanged.
    [[nodiscard]] LabeledDataset subset(std::span<const std::size_t> indices) const;
};

struct DatasetOptions {
    IndicatorNames names;
    CategoryThresholds thresholds;
    ScalingMethod scaling = ScalingMethod::MinMax;
    /// Multiplier applied to source HDI before categorizing (100 for 0-1 inputs).
    double hdi_multiplier = 1.0;
};

/// Regions complete in HDI and all five predictors for `year`.
/// Throws MissingIndicator or EmptyResult.
LabeledDataset build_classification_dataset(const ingest::IndicatorTable& table, int year,
                                            const DatasetOptions& options = {});

/// Inputs for prediction: regions complete in the five predictors, with the
/// actual category where HDI is also present.
struct PredictionInputs {
    std::vector<std::string> region_ids;
    Matrix raw_features;
    std::vector<std::optional<HdiCategory>> actual;
};

PredictionInputs build_prediction_inputs(const ingest::IndicatorTable& table, int year,
                                         const DatasetOptions& options = {});

struct ClusteringDataset {
    std::vector<std::string> region_ids;
    Matrix points;  ///< columns HDI, GDP; unscaled
};

/// Throws MissingIndicator or EmptyResult.
ClusteringDataset build_clustering_dataset(const ingest::IndicatorTable& table, int year,
                                           const IndicatorNames& names = {}, double hdi_multiplier = 1.0);

struct SplitSpec {
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    bool stratified = true;

    /// Throws Usage/"InvalidSplit" unless 0 < test_fraction < 1.
    void validate() const;
    /// round(test_fraction * n) clamped to [1, n - 1].
    [[nodiscard]] std::size_t test_size(std::size_t n) const;
};

struct SplitIndices {
    std::vector<std::size_t> train;  ///< ascending
    std::vector<std::size_t> test;   ///< ascending
};

/// Deterministic partition of row indices. Stratified splits allot the test
/// size across classes by largest remainder. Throws TooSmall for n < 2.
SplitIndices split_indices(std::span<const HdiCategory> labels, const SplitSpec& spec);

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset, const SplitSpec& spec);

/// CSV with columns region,GDP,NPP,NIU,NL,NP,label holding raw values.
void write_dataset_csv(const LabeledDataset& dataset, std::ostream& out);
/// Reads the CSV above and refits scaling with `method`.
LabeledDataset read_dataset_csv(std::istream& in, ScalingMethod method = ScalingMethod::MinMax);

nlohmann::json dataset_to_json(const LabeledDataset& dataset);
LabeledDataset dataset_from_json(const nlohmann::json& j);

}  // namespace hdi::features
