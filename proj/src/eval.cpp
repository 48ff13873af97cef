#include "hdi/eval.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "hdi/csv.hpp"
#include "hdi/error.hpp"
#include "hdi/numfmt.hpp"

namespace hdi::eval {

ConfusionMatrix::ConfusionMatrix(const Counts& counts) : counts_(counts) {
    for (const auto& row : counts_) {
        for (auto v : row) total_ += v;
    }
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < kCategoryCount; ++i) t += counts_[i][i];
    return t;
}

std::uint64_t ConfusionMatrix::row_sum(HdiCategory actual) const {
    std::uint64_t s = 0;
    for (auto v : counts_[index_of(actual)]) s += v;
    return s;
}

std::uint64_t ConfusionMatrix::column_sum(HdiCategory predicted) const {
    std::uint64_t s = 0;
    for (const auto& row : counts_) s += row[index_of(predicted)];
    return s;
}

void ConfusionMatrix::add(HdiCategory actual, HdiCategory predicted, std::uint64_t n) {
    counts_[index_of(actual)][index_of(predicted)] += n;
    total_ += n;
}

ConfusionMatrix confusion(std::span<const HdiCategory> actual, std::span<const HdiCategory> predicted) {
    if (actual.size() != predicted.size()) {
        throw_data("LengthMismatch", std::to_string(actual.size()) + " actual labels but " +
                                         std::to_string(predicted.size()) + " predictions");
    }
    if (actual.empty()) throw_data("EmptyInput", "confusion matrix needs at least one row");
    ConfusionMatrix m;
    for (std::size_t i = 0; i < actual.size(); ++i) m.add(actual[i], predicted[i]);
    return m;
}

ConfusionMatrix from_counts(std::span<const HdiCategory> classes, const std::vector<std::vector<std::uint64_t>>& rows) {
    if (rows.size() != classes.size()) throw_data("LengthMismatch", "count block must be square over the classes");
    ConfusionMatrix m;
    for (std::size_t a = 0; a < rows.size(); ++a) {
        if (rows[a].size() != classes.size()) throw_data("LengthMismatch", "count block must be square over the classes");
        for (std::size_t p = 0; p < rows[a].size(); ++p) m.add(classes[a], classes[p], rows[a][p]);
    }
    return m;
}

Metrics metrics(const ConfusionMatrix& matrix) {
    if (matrix.total() == 0) throw_data("EmptyInput", "metrics need at least one observation");
    Metrics m;
    m.total = matrix.total();
    m.correct = matrix.trace();
    m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.total);
    m.prediction_error_percent = 100.0 * static_cast<double>(m.total - m.correct) / static_cast<double>(m.total);
    for (auto c : kAllCategories) {
        auto& pc = m.per_class[index_of(c)];
        const auto tp = matrix.count(c, c);
        const auto predicted = matrix.column_sum(c);
        const auto actual = matrix.row_sum(c);
        pc.precision_defined = predicted > 0;
        pc.recall_defined = actual > 0;
        pc.precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        pc.recall = actual > 0 ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    }
    return m;
}

std::string format_percent(double percent) { return format_fixed(percent, 2) + "%"; }

nlohmann::json metrics_to_json(const Metrics& m) {
    nlohmann::json per_class = nlohmann::json::object();
    for (auto c : kAllCategories) {
        const auto& pc = m.per_class[index_of(c)];
        per_class[std::string(to_string(c))] = {{"precision", pc.precision},
                                                {"recall", pc.recall},
                                                {"precision_defined", pc.precision_defined},
                                                {"recall_defined", pc.recall_defined}};
    }
    return {{"total", m.total},
            {"correct", m.correct},
            {"misclassified", m.total - m.correct},
            {"accuracy", m.accuracy},
            {"prediction_error_percent", m.prediction_error_percent},
            {"prediction_error_display", format_percent(m.prediction_error_percent)},
            {"per_class", per_class}};
}

namespace {

std::vector<HdiCategory> visible_classes(const ConfusionMatrix& matrix, const RenderOptions& options) {
    std::vector<HdiCategory> out;
    for (auto c : options.order) {
        if (options.elide_empty && matrix.row_sum(c) == 0 && matrix.column_sum(c) == 0) continue;
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string render_text(const ConfusionMatrix& matrix, const RenderOptions& options) {
    const auto classes = visible_classes(matrix, options);
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"actual \\ predicted"});
    for (auto c : classes) cells[0].emplace_back(to_string(c));
    for (auto a : classes) {
        std::vector<std::string> row{std::string(to_string(a))};
        for (auto p : classes) row.push_back(std::to_string(matrix.count(a, p)));
        cells.push_back(std::move(row));
    }
    std::vector<std::size_t> width(classes.size() + 1, 0);
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::ostringstream out;
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == 0) {
                out << row[i] << std::string(width[i] - row[i].size(), ' ');
            } else {
                out << "  " << std::string(width[i] - row[i].size(), ' ') << row[i];
            }
        }
        out << '\n';
    }
    return out.str();
}

std::string render_csv(const ConfusionMatrix& matrix, const RenderOptions& options) {
    const auto classes = visible_classes(matrix, options);
    std::ostringstream out;
    std::vector<std::string> header{"actual\\predicted"};
    for (auto c : classes) header.emplace_back(to_string(c));
    out << csv::join(header) << '\n';
    for (auto a : classes) {
        std::vector<std::string> row{std::string(to_string(a))};
        for (auto p : classes) row.push_back(std::to_string(matrix.count(a, p)));
        out << csv::join(row) << '\n';
    }
    return out.str();
}

std::vector<std::string> consistency_notes(const ConfusionMatrix& matrix, std::optional<std::uint64_t> stated_total,
                                           std::optional<std::uint64_t> stated_correct) {
    std::vector<std::string> notes;
    const auto m = metrics(matrix);
    if (stated_total && *stated_total != matrix.total()) {
        notes.push_back("matrix entries sum to " + std::to_string(matrix.total()) + " but the stated total is " +
                        std::to_string(*stated_total));
    }
    if (stated_correct && *stated_correct != matrix.trace()) {
        notes.push_back("matrix diagonal sums to " + std::to_string(matrix.trace()) +
                        " but the stated correct count is " + std::to_string(*stated_correct));
    }
    if (stated_total && stated_correct && *stated_total > 0 && !notes.empty()) {
        const double stated_pct =
            100.0 * static_cast<double>(*stated_total - *stated_correct) / static_cast<double>(*stated_total);
        notes.push_back("prediction error from matrix entries: " + format_percent(m.prediction_error_percent) +
                        "; from stated counts: " + format_percent(stated_pct));
    }
    return notes;
}

double cluster_assignment_check(const kmeans::ClusterModel& model, const Matrix& raw_points,
                                std::span<const std::size_t> reference) {
    if (raw_points.rows() != reference.size()) {
        throw_data("LengthMismatch", std::to_string(raw_points.rows()) + " points but " +
                                         std::to_string(reference.size()) + " reference assignments");
    }
    if (reference.empty()) throw_data("EmptyInput", "assignment check needs at least one point");
    std::size_t matches = 0;
    for (std::size_t i = 0; i < raw_points.rows(); ++i) {
        if (kmeans::assign(model, raw_points.row(i)) == reference[i]) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(reference.size());
}

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) throw_data("LengthMismatch", "labelings differ in length");
    if (a.size() < 2) return 1.0;
    const double n = static_cast<double>(a.size());
    std::map<std::pair<std::size_t, std::size_t>, double> joint;
    std::map<std::size_t, double> rows;
    std::map<std::size_t, double> cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
    double sum_joint = 0.0;
    double sum_rows = 0.0;
    double sum_cols = 0.0;
    for (const auto& [key, v] : joint) sum_joint += pairs(v);
    for (const auto& [key, v] : rows) sum_rows += pairs(v);
    for (const auto& [key, v] : cols) sum_cols += pairs(v);
    const double expected = sum_rows * sum_cols / pairs(n);
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;  // both labelings trivial
    return (sum_joint - expected) / (max_index - expected);
}

}  // namespace hdi::eval
