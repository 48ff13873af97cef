#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hdi/features.hpp"
#include "hdi/ingest.hpp"
#include "hdi/matrix.hpp"

/// Seeded synthetic data in the shapes the pipeline consumes. Every generator
/// uses only Rng arithmetic, so output is identical on every platform.
namespace hdi::synth {

struct IndicatorOptions {
    std::size_t regions = 495;
    std::uint64_t seed = 1;
    /// Adds sparse indicators (doctors, hospitals) that are never complete.
    bool extra_indicators = true;
};

/// Regions named "Region NNN, Kota" in four development groups. HDI and GDP
/// are filled for 2010 and 2012, the other four predictors for 2010 only,
/// and 2011 is sparse, so the complete (indicator, year) pairs are exactly
/// HDI/GDP x {2010, 2012} plus NPP/NIU/NL/NP x 2010.
ingest::IndicatorTable indicator_table(const IndicatorOptions& options = {},
                                       const features::IndicatorNames& names = {});

/// Same table rendered as wide CSV.
std::string indicator_csv(const IndicatorOptions& options = {}, const features::IndicatorNames& names = {});

struct PlantedClusters {
    Matrix points;  ///< (HDI, GDP)
    std::vector<std::size_t> labels;
    Matrix centers;
};

/// Points around four (HDI, GDP) centers whose HDI bands are disjoint while
/// their GDP ranges overlap below 40.
PlantedClusters planted_hdi_gdp(std::size_t n, std::uint64_t seed);

struct LabeledPoints {
    Matrix features;
    std::vector<std::size_t> labels;
};

/// Rows in [-1, 1]^dims labelled by the argmax of `classes` random linear
/// scores; rows whose top two scores are closer than `margin` are redrawn.
LabeledPoints linear_separable(std::size_t rows, std::size_t dims, std::size_t classes, std::uint64_t seed,
                               double margin = 0.05);

}  // namespace hdi::synth
