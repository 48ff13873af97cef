#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdi/features.hpp"
#include "hdi/kmeans.hpp"
#include "hdi/matrix.hpp"

namespace hdi::eval {

/// Counts over all four categories in internal order Low, Medium, High,
/// VeryHigh. Rows are actual classes, columns predicted.
class ConfusionMatrix {
public:
    using Counts = std::array<std::array<std::uint64_t, kCategoryCount>, kCategoryCount>;

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(const Counts& counts);

    [[nodiscard]] std::uint64_t count(HdiCategory actual, HdiCategory predicted) const {
        return counts_[index_of(actual)][index_of(predicted)];
    }
    [[nodiscard]] const Counts& counts() const noexcept { return counts_; }
    [[nodiscard]] std::uint64_t total() const noexcept { return total_; }
    [[nodiscard]] std::uint64_t trace() const noexcept;
    [[nodiscard]] std::uint64_t row_sum(HdiCategory actual) const;
    [[nodiscard]] std::uint64_t column_sum(HdiCategory predicted) const;

    void add(HdiCategory actual, HdiCategory predicted, std::uint64_t n = 1);

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    Counts counts_{};
    std::uint64_t total_ = 0;
};

/// Throws LengthMismatch or EmptyInput.
ConfusionMatrix confusion(std::span<const HdiCategory> actual, std::span<const HdiCategory> predicted);

/// Builds a matrix from a square block of counts given over `classes`
/// (e.g. the High, Medium, Low display order); unlisted classes stay zero.
ConfusionMatrix from_counts(std::span<const HdiCategory> classes, const std::vector<std::vector<std::uint64_t>>& rows);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    bool precision_defined = true;  ///< false when nothing was predicted as this class
    bool recall_defined = true;     ///< false when the class never occurs
};

struct Metrics {
    std::uint64_t total = 0;
    std::uint64_t correct = 0;
    double accuracy = 0.0;
    double prediction_error_percent = 0.0;
    std::array<ClassMetrics, kCategoryCount> per_class{};
};

/// 0/0 precision or recall is reported as 0 and flagged undefined.
/// Throws EmptyInput when the matrix has no observations.
Metrics metrics(const ConfusionMatrix& matrix);

nlohmann::json metrics_to_json(const Metrics& m);

struct RenderOptions {
    std::vector<HdiCategory> order{HdiCategory::Low, HdiCategory::Medium, HdiCategory::High, HdiCategory::VeryHigh};
    /// Drop classes whose row and column are both zero.
    bool elide_empty = true;
};

/// Aligned text table with actual classes down the side.
std::string render_text(const ConfusionMatrix& matrix, const RenderOptions& options = {});
/// CSV `actual\predicted,<classes...>`.
std::string render_csv(const ConfusionMatrix& matrix, const RenderOptions& options = {});

/// Compares the matrix against separately stated totals (e.g. "90 correct of
/// 99") and describes every disagreement. Empty when consistent.
std::vector<std::string> consistency_notes(const ConfusionMatrix& matrix, std::optional<std::uint64_t> stated_total,
                                           std::optional<std::uint64_t> stated_correct);

/// Error percentage rendered with two decimals, e.g. "9.09%".
std::string format_percent(double percent);

/// Fraction of points whose nearest-centroid assignment equals `reference`.
/// Throws LengthMismatch.
double cluster_assignment_check(const kmeans::ClusterModel& model, const Matrix& raw_points,
                                std::span<const std::size_t> reference);

/// Hubert-Arabie adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace hdi::eval
