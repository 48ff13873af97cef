#include "hdi/features.hpp"

#include <algorithm>
#include <cmath>

#include "hdi/csv.hpp"
#include "hdi/error.hpp"
#include "hdi/numfmt.hpp"
#include "hdi/rng.hpp"

namespace hdi {

std::string_view to_string(HdiCategory category) {
    switch (category) {
        case HdiCategory::Low: return "Low";
        case HdiCategory::Medium: return "Medium";
        case HdiCategory::High: return "High";
        case HdiCategory::VeryHigh: return "VeryHigh";
    }
    return "?";
}

std::optional<HdiCategory> parse_category(std::string_view text) {
    for (auto c : kAllCategories) {
        if (to_string(c) == text) return c;
    }
    return std::nullopt;
}

}  // namespace hdi

namespace hdi::features {

void CategoryThresholds::validate() const {
    const bool finite = std::isfinite(t1) && std::isfinite(t2) && std::isfinite(t3);
    if (!finite || !(t1 < t2 && t2 < t3)) {
        throw_usage("InvalidThresholds", "category thresholds must be finite with t1 < t2 < t3, got " +
                                             format_shortest(t1) + ", " + format_shortest(t2) + ", " +
                                             format_shortest(t3));
    }
}

HdiCategory categorize(double hdi, const CategoryThresholds& thresholds) {
    if (!std::isfinite(hdi)) throw_data("NonFiniteInput", "HDI value is not finite");
    thresholds.validate();
    if (hdi >= thresholds.t3) return HdiCategory::VeryHigh;
    if (hdi >= thresholds.t2) return HdiCategory::High;
    if (hdi >= thresholds.t1) return HdiCategory::Medium;
    return HdiCategory::Low;
}

std::string_view to_string(ScalingMethod method) {
    switch (method) {
        case ScalingMethod::None: return "none";
        case ScalingMethod::MinMax: return "min-max";
        case ScalingMethod::ZScore: return "z-score";
    }
    return "?";
}

std::optional<ScalingMethod> parse_scaling(std::string_view text) {
    for (auto m : {ScalingMethod::None, ScalingMethod::MinMax, ScalingMethod::ZScore}) {
        if (to_string(m) == text) return m;
    }
    return std::nullopt;
}

double ColumnScaling::apply(double x) const {
    switch (method) {
        case ScalingMethod::None: return x;
        case ScalingMethod::MinMax: {
            const double range = max - min;
            return range > 0.0 ? (x - min) / range : 0.0;
        }
        case ScalingMethod::ZScore: return stddev > 0.0 ? (x - mean) / stddev : 0.0;
    }
    return x;
}

double ColumnScaling::invert(double y) const {
    switch (method) {
        case ScalingMethod::None: return y;
        case ScalingMethod::MinMax: {
            const double range = max - min;
            return range > 0.0 ? y * range + min : min;
        }
        case ScalingMethod::ZScore: return stddev > 0.0 ? y * stddev + mean : mean;
    }
    return y;
}

Matrix Scaling::apply(const Matrix& raw) const {
    if (raw.cols() != columns.size() && raw.rows() > 0) {
        throw_data("DimensionMismatch", "scaling has " + std::to_string(columns.size()) + " columns, data has " +
                                            std::to_string(raw.cols()));
    }
    Matrix out(raw.rows(), columns.size());
    for (std::size_t r = 0; r < raw.rows(); ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) out(r, c) = columns[c].apply(raw(r, c));
    }
    return out;
}

Matrix Scaling::invert(const Matrix& scaled) const {
    Matrix out(scaled.rows(), columns.size());
    for (std::size_t r = 0; r < scaled.rows(); ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) out(r, c) = columns[c].invert(scaled(r, c));
    }
    return out;
}

bool Scaling::within_fitted_range(std::span<const double> raw_row) const {
    for (std::size_t c = 0; c < columns.size() && c < raw_row.size(); ++c) {
        if (raw_row[c] < columns[c].min || raw_row[c] > columns[c].max) return false;
    }
    return true;
}

Scaling fit_scaling(const Matrix& raw, ScalingMethod method) {
    Scaling scaling;
    const std::size_t n = raw.rows();
    for (std::size_t c = 0; c < raw.cols(); ++c) {
        ColumnScaling col;
        col.method = method;
        if (n > 0) {
            col.min = col.max = raw(0, c);
            double sum = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                col.min = std::min(col.min, raw(r, c));
                col.max = std::max(col.max, raw(r, c));
                sum += raw(r, c);
            }
            col.mean = sum / static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const double d = raw(r, c) - col.mean;
                ss += d * d;
            }
            col.stddev = std::sqrt(ss / static_cast<double>(n));
        }
        scaling.columns.push_back(col);
    }
    return scaling;
}

nlohmann::json scaling_to_json(const Scaling& scaling) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : scaling.columns) {
        cols.push_back({{"method", std::string(to_string(c.method))},
                        {"min", c.min},
                        {"max", c.max},
                        {"mean", c.mean},
                        {"stddev", c.stddev}});
    }
    return cols;
}

Scaling scaling_from_json(const nlohmann::json& j) {
    Scaling scaling;
    for (const auto& c : j) {
        ColumnScaling col;
        auto method = parse_scaling(c.at("method").get<std::string>());
        if (!method) throw_data("InvalidScaling", "unknown scaling method " + c.at("method").dump());
        col.method = *method;
        col.min = c.at("min").get<double>();
        col.max = c.at("max").get<double>();
        col.mean = c.at("mean").get<double>();
        col.stddev = c.at("stddev").get<double>();
        scaling.columns.push_back(col);
    }
    return scaling;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
    LabeledDataset out;
    out.raw_features = raw_features.select_rows(indices);
    out.features = features.select_rows(indices);
    out.scaling = scaling;
    for (std::size_t i : indices) {
        out.region_ids.push_back(region_ids[i]);
        out.labels.push_back(labels[i]);
    }
    return out;
}

namespace {

void require_indicators(const ingest::IndicatorTable& table, const std::vector<std::string>& names) {
    for (const auto& name : names) {
        if (!table.has_indicator(name)) throw_data("MissingIndicator", "indicator \"" + name + "\" is not in the table");
    }
}

std::map<std::string, std::vector<double>> complete_rows(const ingest::IndicatorTable& table,
                                                         const std::vector<std::string>& names, int year) {
    require_indicators(table, names);
    return ingest::slice(table, names, year);
}

}  // namespace

LabeledDataset build_classification_dataset(const ingest::IndicatorTable& table, int year,
                                            const DatasetOptions& options) {
    options.thresholds.validate();
    std::vector<std::string> names{options.names.hdi};
    for (auto& p : options.names.predictors()) names.push_back(std::move(p));
    const auto rows = complete_rows(table, names, year);

    LabeledDataset ds;
    ds.raw_features = Matrix(0, kPredictorLabels.size());
    for (const auto& [region, values] : rows) {
        ds.region_ids.push_back(region);
        ds.labels.push_back(categorize(values[0] * options.hdi_multiplier, options.thresholds));
        ds.raw_features.push_row(std::span<const double>(values).subspan(1));
    }
    ds.scaling = fit_scaling(ds.raw_features, options.scaling);
    ds.features = ds.scaling.apply(ds.raw_features);
    return ds;
}

PredictionInputs build_prediction_inputs(const ingest::IndicatorTable& table, int year, const DatasetOptions& options) {
    const auto rows = complete_rows(table, options.names.predictors(), year);
    PredictionInputs out;
    out.raw_features = Matrix(0, kPredictorLabels.size());
    const bool have_hdi = table.has_indicator(options.names.hdi);
    for (const auto& [region, values] : rows) {
        out.region_ids.push_back(region);
        out.raw_features.push_row(values);
        std::optional<HdiCategory> actual;
        if (have_hdi) {
            if (auto hdi = table.value(region, options.names.hdi, year)) {
                actual = categorize(*hdi * options.hdi_multiplier, options.thresholds);
            }
        }
        out.actual.push_back(actual);
    }
    return out;
}

ClusteringDataset build_clustering_dataset(const ingest::IndicatorTable& table, int year, const IndicatorNames& names,
                                           double hdi_multiplier) {
    const auto rows = complete_rows(table, {names.hdi, names.gdp}, year);
    ClusteringDataset ds;
    ds.points = Matrix(0, 2);
    for (const auto& [region, values] : rows) {
        ds.region_ids.push_back(region);
        const double point[2] = {values[0] * hdi_multiplier, values[1]};
        ds.points.push_row(point);
    }
    return ds;
}

void SplitSpec::validate() const {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw_usage("InvalidSplit", "test_fraction must lie strictly between 0 and 1, got " +
                                        format_shortest(test_fraction));
    }
}

std::size_t SplitSpec::test_size(std::size_t n) const {
    const auto rounded = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(rounded, 1, n - 1);
}

SplitIndices split_indices(std::span<const HdiCategory> labels, const SplitSpec& spec) {
    spec.validate();
    const std::size_t n = labels.size();
    if (n < 2) throw_data("TooSmall", "cannot split a dataset of " + std::to_string(n) + " rows");
    const std::size_t test_total = spec.test_size(n);
    Rng rng(spec.seed);

    std::vector<bool> in_test(n, false);
    if (spec.stratified) {
        std::array<std::vector<std::size_t>, kCategoryCount> members;
        for (std::size_t i = 0; i < n; ++i) members[index_of(labels[i])].push_back(i);

        // Largest-remainder allocation of test_total across classes.
        std::array<std::size_t, kCategoryCount> quota{};
        std::array<std::size_t, kCategoryCount> remainder{};
        std::size_t allotted = 0;
        for (std::size_t c = 0; c < kCategoryCount; ++c) {
            const std::size_t scaled = test_total * members[c].size();
            quota[c] = scaled / n;
            remainder[c] = scaled % n;
            allotted += quota[c];
        }
        std::array<std::size_t, kCategoryCount> order{0, 1, 2, 3};
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
        for (std::size_t i = 0; allotted < test_total; ++i) {
            const std::size_t c = order[i % kCategoryCount];
            if (quota[c] < members[c].size()) {
                ++quota[c];
                ++allotted;
            }
        }
        for (std::size_t c = 0; c < kCategoryCount; ++c) {
            rng.shuffle(members[c]);
            for (std::size_t i = 0; i < quota[c]; ++i) in_test[members[c][i]] = true;
        }
    } else {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        rng.shuffle(all);
        for (std::size_t i = 0; i < test_total; ++i) in_test[all[i]] = true;
    }

    SplitIndices out;
    for (std::size_t i = 0; i < n; ++i) (in_test[i] ? out.test : out.train).push_back(i);
    return out;
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset, const SplitSpec& spec) {
    const auto idx = split_indices(dataset.labels, spec);
    return {dataset.subset(idx.train), dataset.subset(idx.test)};
}

void write_dataset_csv(const LabeledDataset& dataset, std::ostream& out) {
    std::vector<std::string> header{"region"};
    for (auto label : kPredictorLabels) header.emplace_back(label);
    header.emplace_back("label");
    out << csv::join(header) << '\n';
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        std::vector<std::string> cells{dataset.region_ids[r]};
        for (double v : dataset.raw_features.row(r)) cells.push_back(format_shortest(v));
        cells.emplace_back(to_string(dataset.labels[r]));
        out << csv::join(cells) << '\n';
    }
}

LabeledDataset read_dataset_csv(std::istream& in, ScalingMethod method) {
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row) || row.fields.size() != kPredictorLabels.size() + 2) {
        throw ParseError("MalformedHeader", "dataset CSV must have columns region,GDP,NPP,NIU,NL,NP,label", 1, 0);
    }
    LabeledDataset ds;
    ds.raw_features = Matrix(0, kPredictorLabels.size());
    while (reader.next(row)) {
        if (csv::is_blank(row)) continue;
        if (row.fields.size() != kPredictorLabels.size() + 2) {
            throw ParseError("MalformedRow", "dataset row has wrong field count at line " + std::to_string(row.line),
                             row.line, 0);
        }
        std::vector<double> values;
        for (std::size_t c = 1; c <= kPredictorLabels.size(); ++c) {
            auto v = parse_decimal(trim(row.fields[c].text));
            if (!v) {
                throw ParseError("UnparsableCell", "unparsable value at line " + std::to_string(row.line), row.line,
                                 c + 1);
            }
            values.push_back(*v);
        }
        auto label = parse_category(trim(row.fields.back().text));
        if (!label) {
            throw ParseError("UnparsableCell", "unknown category at line " + std::to_string(row.line), row.line,
                             row.fields.size());
        }
        ds.region_ids.emplace_back(trim(row.fields[0].text));
        ds.raw_features.push_row(values);
        ds.labels.push_back(*label);
    }
    ds.scaling = fit_scaling(ds.raw_features, method);
    ds.features = ds.scaling.apply(ds.raw_features);
    return ds;
}

nlohmann::json dataset_to_json(const LabeledDataset& dataset) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        const auto raw = dataset.raw_features.row(r);
        rows.push_back({{"region", dataset.region_ids[r]},
                        {"features", std::vector<double>(raw.begin(), raw.end())},
                        {"label", std::string(to_string(dataset.labels[r]))}});
    }
    std::vector<std::string> columns(kPredictorLabels.begin(), kPredictorLabels.end());
    return {{"columns", columns}, {"scaling", scaling_to_json(dataset.scaling)}, {"rows", rows}};
}

LabeledDataset dataset_from_json(const nlohmann::json& j) {
    LabeledDataset ds;
    ds.scaling = scaling_from_json(j.at("scaling"));
    ds.raw_features = Matrix(0, kPredictorLabels.size());
    for (const auto& row : j.at("rows")) {
        ds.region_ids.push_back(row.at("region").get<std::string>());
        const auto values = row.at("features").get<std::vector<double>>();
        if (values.size() != kPredictorLabels.size()) throw_data("DimensionMismatch", "dataset row needs 5 features");
        ds.raw_features.push_row(values);
        auto label = parse_category(row.at("label").get<std::string>());
        if (!label) throw_data("UnparsableCell", "unknown category " + row.at("label").dump());
        ds.labels.push_back(*label);
    }
    ds.features = ds.scaling.apply(ds.raw_features);
    return ds;
}

}  // namespace hdi::features
