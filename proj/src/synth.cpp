#include "hdi/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hdi/rng.hpp"

namespace hdi::synth {

namespace {

// Group HDI centers echo the four cluster means discussed for the 2012 data.
constexpr std::array<double, 4> kHdiCenters{52.30, 67.80, 72.39, 76.82};
constexpr std::array<double, 4> kGdpCenters{12.0, 17.0, 20.0, 30.0};
constexpr std::array<double, 4> kGroupShare{0.10, 0.30, 0.35, 0.25};

std::size_t pick_group(Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t g = 0; g < kGroupShare.size(); ++g) {
        acc += kGroupShare[g];
        if (u < acc) return g;
    }
    return kGroupShare.size() - 1;
}

/// Rounds to `decimals` places so the CSV holds short, exact-looking decimals.
double round_to(double v, int decimals) {
    double scale = 1.0;
    for (int i = 0; i < decimals; ++i) scale *= 10.0;
    return static_cast<double>(std::llround(v * scale)) / scale;
}

}  // namespace

ingest::IndicatorTable indicator_table(const IndicatorOptions& options, const features::IndicatorNames& names) {
    Rng rng(options.seed);
    std::vector<ingest::Record> records;
    auto put = [&](const std::string& region, const std::string& indicator, int year, std::optional<double> v) {
        records.push_back({{region, indicator, year}, v});
    };

    for (std::size_t i = 0; i < options.regions; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "Region %03zu, Kota", i + 1);
        const std::string region = buf;
        const std::size_t g = pick_group(rng);

        const double hdi_2012 = round_to(kHdiCenters[g] + rng.uniform(-1.5, 1.5), 2);
        const double hdi_2010 = round_to(hdi_2012 - 0.9 + 0.3 * rng.approx_normal(), 2);
        const double gdp_2012 = round_to(std::max(0.5, kGdpCenters[g] + 2.0 * rng.approx_normal()), 3);
        const double gdp_2010 = round_to(gdp_2012 / 1.08, 3);

        // Development level drives the ratio predictors; population is free.
        const double dev = std::clamp((hdi_2010 - 45.0) / 40.0, 0.0, 1.0);
        const double population = round_to(50000.0 + 2950000.0 * rng.uniform() * rng.uniform(), 0);
        const double labor = round_to(population * (0.38 + 0.12 * rng.uniform()), 0);
        const double poverty = round_to(population * std::max(0.01, 0.32 - 0.28 * dev + 0.02 * rng.approx_normal()), 0);
        const double internet = round_to(population * std::max(0.01, 0.04 + 0.55 * dev + 0.03 * rng.approx_normal()), 0);

        const bool hdi_2011_present = rng.uniform() < 0.6;
        const double hdi_2011 = round_to((hdi_2010 + hdi_2012) / 2.0, 2);

        put(region, names.hdi, 2010, hdi_2010);
        put(region, names.hdi, 2011, hdi_2011_present ? std::optional<double>(hdi_2011) : std::nullopt);
        put(region, names.hdi, 2012, hdi_2012);
        put(region, names.gdp, 2010, gdp_2010);
        put(region, names.gdp, 2011, std::nullopt);
        put(region, names.gdp, 2012, gdp_2012);
        const bool later_census = rng.uniform() < 0.3;
        for (const auto& [name, value] : {std::pair{names.npp, poverty}, std::pair{names.niu, internet},
                                          std::pair{names.nl, labor}, std::pair{names.np, population}}) {
            put(region, name, 2010, value);
            put(region, name, 2011, std::nullopt);
            put(region, name, 2012, later_census ? std::optional<double>(round_to(value * 1.03, 0)) : std::nullopt);
        }
        if (options.extra_indicators) {
            const bool doctors = rng.uniform() < 0.7;
            const bool hospitals = rng.uniform() < 0.4;
            put(region, "Number of Doctors", 2010,
                doctors ? std::optional<double>(round_to(population / 2500.0, 0)) : std::nullopt);
            put(region, "Number of Doctors", 2011, std::nullopt);
            put(region, "Number of Doctors", 2012,
                doctors ? std::optional<double>(round_to(population / 2300.0, 0)) : std::nullopt);
            put(region, "Number of hospitals", 2010, std::nullopt);
            put(region, "Number of hospitals", 2011,
                hospitals ? std::optional<double>(round_to(population / 60000.0 + 1.0, 0)) : std::nullopt);
            put(region, "Number of hospitals", 2012, std::nullopt);
        }
    }
    return ingest::IndicatorTable::from_records(std::move(records));
}

std::string indicator_csv(const IndicatorOptions& options, const features::IndicatorNames& names) {
    std::ostringstream out;
    ingest::write_wide_csv(indicator_table(options, names), out);
    return out.str();
}

PlantedClusters planted_hdi_gdp(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    PlantedClusters out;
    out.points = Matrix(0, 2);
    out.centers = Matrix(0, 2);
    for (std::size_t g = 0; g < 4; ++g) {
        const double c[2] = {kHdiCenters[g], kGdpCenters[g]};
        out.centers.push_row(c);
    }
    for (std::size_t i = 0; i < n; ++i) {
        // Round-robin keeps every cluster populated even for small n.
        const std::size_t g = i % 4;
        // Narrow HDI bands keep the groups disjoint on that axis; GDP tails
        // of neighbouring groups still overlap.
        const double p[2] = {kHdiCenters[g] + rng.uniform(-1.0, 1.0),
                             std::max(0.5, kGdpCenters[g] + rng.approx_normal())};
        out.points.push_row(p);
        out.labels.push_back(g);
    }
    return out;
}

LabeledPoints linear_separable(std::size_t rows, std::size_t dims, std::size_t classes, std::uint64_t seed,
                               double margin) {
    Rng rng(seed);
    Matrix weights(classes, dims);
    for (double& w : weights.data()) w = rng.uniform(-1.0, 1.0);
    std::vector<double> bias(classes);
    for (double& b : bias) b = rng.uniform(-0.2, 0.2);

    LabeledPoints out;
    out.features = Matrix(0, dims);
    std::vector<double> x(dims);
    std::vector<double> score(classes);
    while (out.labels.size() < rows) {
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        for (std::size_t c = 0; c < classes; ++c) {
            score[c] = bias[c];
            for (std::size_t d = 0; d < dims; ++d) score[c] += weights(c, d) * x[d];
        }
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c) {
            if (score[c] > score[best]) best = c;
        }
        double runner_up = -1e300;
        for (std::size_t c = 0; c < classes; ++c) {
            if (c != best) runner_up = std::max(runner_up, score[c]);
        }
        if (score[best] - runner_up < margin) continue;
        out.features.push_row(x);
        out.labels.push_back(best);
    }
    return out;
}

}  // namespace hdi::synth
