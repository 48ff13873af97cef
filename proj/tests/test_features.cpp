#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hdi/error.hpp"
#include "hdi/features.hpp"
#include "hdi/rng.hpp"
#include "hdi/synth.hpp"

using namespace hdi;
using namespace hdi::features;

namespace {

template <class F>
std::string error_code(F f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(-50.0, 500.0);
    return m;
}

}  // namespace

TEST(Categorize, CategoryAnchors) {
    EXPECT_EQ(categorize(52.30), HdiCategory::Low);
    EXPECT_EQ(categorize(67.80), HdiCategory::Medium);
    EXPECT_EQ(categorize(72.39), HdiCategory::High);
    EXPECT_EQ(categorize(76.82), HdiCategory::High);
}

TEST(Categorize, LowerInclusiveBoundaries) {
    EXPECT_EQ(categorize(59.999), HdiCategory::Low);
    EXPECT_EQ(categorize(60.0), HdiCategory::Medium);
    EXPECT_EQ(categorize(70.0), HdiCategory::High);
    EXPECT_EQ(categorize(80.0), HdiCategory::VeryHigh);
    EXPECT_EQ(categorize(0.0), HdiCategory::Low);
    EXPECT_EQ(categorize(100.0), HdiCategory::VeryHigh);
}

TEST(Categorize, MonotoneProperty) {
    Rng rng(3);
    for (int i = 0; i < 5000; ++i) {
        const double a = rng.uniform(0.0, 100.0);
        const double b = rng.uniform(0.0, 100.0);
        const auto ca = categorize(std::min(a, b));
        const auto cb = categorize(std::max(a, b));
        EXPECT_LE(index_of(ca), index_of(cb));
    }
}

TEST(Categorize, RejectsBadInput) {
    EXPECT_EQ(error_code([] { categorize(std::nan("")); }), "NonFiniteInput");
    EXPECT_EQ(error_code([] { categorize(std::numeric_limits<double>::infinity()); }), "NonFiniteInput");
    EXPECT_EQ(error_code([] { categorize(65.0, {70.0, 60.0, 80.0}); }), "InvalidThresholds");
    EXPECT_EQ(error_code([] { categorize(65.0, {60.0, 60.0, 80.0}); }), "InvalidThresholds");
}

TEST(Categories, NamesRoundTrip) {
    for (auto c : kAllCategories) EXPECT_EQ(parse_category(to_string(c)), c);
    EXPECT_FALSE(parse_category("high"));
    EXPECT_EQ(to_string(HdiCategory::VeryHigh), "VeryHigh");
}

TEST(Scaling, RoundTripProperty) {
    for (auto method : {ScalingMethod::None, ScalingMethod::MinMax, ScalingMethod::ZScore}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const Matrix raw = random_matrix(40, 5, seed);
            const Scaling s = fit_scaling(raw, method);
            const Matrix back = s.invert(s.apply(raw));
            for (std::size_t i = 0; i < raw.data().size(); ++i) {
                EXPECT_NEAR(back.data()[i], raw.data()[i], 1e-9 * (1.0 + std::abs(raw.data()[i])));
            }
        }
    }
}

TEST(Scaling, MinMaxMapsToUnitInterval) {
    const Matrix raw = random_matrix(30, 3, 9);
    const Matrix scaled = fit_scaling(raw, ScalingMethod::MinMax).apply(raw);
    for (std::size_t c = 0; c < 3; ++c) {
        double lo = 1e9, hi = -1e9;
        for (std::size_t r = 0; r < 30; ++r) {
            lo = std::min(lo, scaled(r, c));
            hi = std::max(hi, scaled(r, c));
        }
        EXPECT_DOUBLE_EQ(lo, 0.0);
        EXPECT_DOUBLE_EQ(hi, 1.0);
    }
}

TEST(Scaling, ZScoreUsesPopulationStatistics) {
    Matrix raw(0, 1);
    for (double v : {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0}) raw.push_row(std::span<const double>(&v, 1));
    const auto s = fit_scaling(raw, ScalingMethod::ZScore);
    EXPECT_DOUBLE_EQ(s.columns[0].mean, 5.0);
    EXPECT_DOUBLE_EQ(s.columns[0].stddev, 2.0);
    EXPECT_DOUBLE_EQ(s.columns[0].apply(9.0), 2.0);
}

TEST(Scaling, ConstantColumnMapsToZero) {
    Matrix raw(4, 2, 3.0);
    for (auto method : {ScalingMethod::MinMax, ScalingMethod::ZScore}) {
        const auto s = fit_scaling(raw, method);
        const Matrix scaled = s.apply(raw);
        for (double v : scaled.data()) EXPECT_EQ(v, 0.0);
    }
}

TEST(Scaling, FittedRangeAndJson) {
    const Matrix raw = random_matrix(20, 5, 4);
    const auto s = fit_scaling(raw, ScalingMethod::MinMax);
    for (std::size_t r = 0; r < raw.rows(); ++r) EXPECT_TRUE(s.within_fitted_range(raw.row(r)));
    std::vector<double> outside(raw.row(0).begin(), raw.row(0).end());
    outside[2] = 1e9;
    EXPECT_FALSE(s.within_fitted_range(outside));
    EXPECT_EQ(scaling_from_json(scaling_to_json(s)), s);
}

TEST(Dataset, BuildFromSyntheticTable) {
    const auto table = synth::indicator_table({60, 5, true});
    const auto ds = build_classification_dataset(table, 2010);
    EXPECT_EQ(ds.size(), 60u);
    EXPECT_EQ(ds.raw_features.cols(), 5u);
    EXPECT_TRUE(std::is_sorted(ds.region_ids.begin(), ds.region_ids.end()));
    const IndicatorNames names;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto hdi = table.value(ds.region_ids[i], names.hdi, 2010);
        ASSERT_TRUE(hdi);
        EXPECT_EQ(ds.labels[i], categorize(*hdi));
        EXPECT_EQ(ds.raw_features(i, 0), *table.value(ds.region_ids[i], names.gdp, 2010));
        EXPECT_EQ(ds.raw_features(i, 4), *table.value(ds.region_ids[i], names.np, 2010));
    }
    // 2012 lacks most census predictors, so fewer rows qualify.
    EXPECT_LT(build_classification_dataset(table, 2012).size(), 60u);
}

TEST(Dataset, UnitIntervalHdiIsRescaled) {
    std::vector<ingest::Record> recs;
    const IndicatorNames n;
    int i = 0;
    for (const auto& name : std::vector<std::string>{n.hdi, n.gdp, n.npp, n.niu, n.nl, n.np}) {
        recs.push_back({{"A", name, 2010}, name == n.hdi ? 0.7239 : 1.0 + i++});
    }
    const auto t = ingest::IndicatorTable::from_records(recs);
    DatasetOptions o;
    o.hdi_multiplier = 100.0;
    EXPECT_EQ(build_classification_dataset(t, 2010, o).labels[0], HdiCategory::High);
    EXPECT_EQ(build_classification_dataset(t, 2010).labels[0], HdiCategory::Low);
}

TEST(Dataset, MissingIndicatorAndEmpty) {
    const auto t = ingest::IndicatorTable::from_records({{{"A", "Human Development Index", 2010}, 70.0}});
    EXPECT_EQ(error_code([&] { build_classification_dataset(t, 2010); }), "MissingIndicator");
    const auto table = synth::indicator_table({10, 2, false});
    EXPECT_EQ(error_code([&] { build_classification_dataset(table, 2011); }), "EmptyResult");
}

TEST(Dataset, ClusteringPoints) {
    const auto table = synth::indicator_table({30, 8, false});
    const auto ds = build_clustering_dataset(table, 2012);
    EXPECT_EQ(ds.points.rows(), 30u);
    EXPECT_EQ(ds.points.cols(), 2u);
}

TEST(Dataset, CsvAndJsonRoundTrip) {
    const auto ds = build_classification_dataset(synth::indicator_table({40, 3, false}), 2010);
    std::stringstream buf;
    write_dataset_csv(ds, buf);
    const auto back = read_dataset_csv(buf);
    EXPECT_EQ(back.region_ids, ds.region_ids);
    EXPECT_EQ(back.raw_features, ds.raw_features);
    EXPECT_EQ(back.labels, ds.labels);
    EXPECT_EQ(back.features, ds.features);
    const auto j = dataset_from_json(dataset_to_json(ds));
    EXPECT_EQ(j.raw_features, ds.raw_features);
    EXPECT_EQ(j.scaling, ds.scaling);
}

TEST(Split, PartitionProperties) {
    Rng rng(11);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t n = 2 + rng.below(300);
        std::vector<HdiCategory> labels;
        for (std::size_t i = 0; i < n; ++i) labels.push_back(category_at(rng.below(4)));
        for (bool stratified : {true, false}) {
            SplitSpec spec{0.2, seed, stratified};
            const auto s = split_indices(labels, spec);
            EXPECT_EQ(s.test.size(), spec.test_size(n));
            EXPECT_EQ(s.train.size() + s.test.size(), n);
            EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
            EXPECT_TRUE(std::is_sorted(s.test.begin(), s.test.end()));
            std::vector<std::size_t> all = s.train;
            all.insert(all.end(), s.test.begin(), s.test.end());
            std::sort(all.begin(), all.end());
            for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(all[i], i);
            // Same seed, same split.
            const auto again = split_indices(labels, spec);
            EXPECT_EQ(again.test, s.test);
        }
    }
}

TEST(Split, StratifiedKeepsClassShares) {
    std::vector<HdiCategory> labels;
    for (int i = 0; i < 300; ++i) labels.push_back(HdiCategory::High);
    for (int i = 0; i < 100; ++i) labels.push_back(HdiCategory::Medium);
    for (int i = 0; i < 95; ++i) labels.push_back(HdiCategory::Low);
    const auto s = split_indices(labels, {0.2, 1, true});
    EXPECT_EQ(s.test.size(), 99u);
    std::array<std::size_t, 4> count{};
    for (auto i : s.test) ++count[index_of(labels[i])];
    // 99 * (95, 100, 300) / 495 = (19, 20, 60)
    EXPECT_EQ(count[0], 19u);
    EXPECT_EQ(count[1], 20u);
    EXPECT_EQ(count[2], 60u);
}

TEST(Split, Errors) {
    std::vector<HdiCategory> one{HdiCategory::Low};
    EXPECT_EQ(error_code([&] { split_indices(one, {}); }), "TooSmall");
    std::vector<HdiCategory> two{HdiCategory::Low, HdiCategory::High};
    EXPECT_EQ(error_code([&] { split_indices(two, {1.0, 0, true}); }), "InvalidSplit");
    EXPECT_EQ(error_code([&] { split_indices(two, {0.0, 0, true}); }), "InvalidSplit");
    EXPECT_EQ(split_indices(two, {0.01, 0, true}).test.size(), 1u);
}
