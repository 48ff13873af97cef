#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdi/ann.hpp"
#include "hdi/eval.hpp"
#include "hdi/features.hpp"
#include "hdi/ingest.hpp"
#include "hdi/kmeans.hpp"

namespace hdi::pipeline {

inline constexpr int kConfigVersion = 1;

/// Everything one run of the workflow needs. Section seeds left unset are
/// derived from the global `seed`.
struct PipelineConfig {
    std::string input;
    std::string output_dir = "hdi-out";
    std::string model;        ///< model file for `classify predict`
    std::string predictions;  ///< predictions CSV for `evaluate`
    std::string matrix;       ///< count-matrix CSV for `evaluate`
    std::string centroids;    ///< centroid CSV for provided k-means init

    std::uint64_t seed = 42;
    std::size_t jobs = 1;

    ingest::WideCsvFormat csv;
    features::IndicatorNames indicators;
    int classification_year = 2010;
    int clustering_year = 2012;
    features::CategoryThresholds thresholds;
    bool hdi_unit_interval = false;
    features::ScalingMethod scaling = features::ScalingMethod::MinMax;

    features::SplitSpec split;
    std::optional<std::uint64_t> split_seed;

    ann::TrainConfig train;
    std::optional<std::uint64_t> train_seed;
    std::size_t hidden_neurons = 20;
    ann::Activation hidden_activation = ann::Activation::Sigmoid;

    ann::SweepConfig sweep;
    std::optional<std::uint64_t> sweep_seed;

    kmeans::KMeansConfig kmeans;
    std::optional<std::uint64_t> kmeans_seed;

    bool clamp = false;
    std::vector<HdiCategory> display_order{HdiCategory::Low, HdiCategory::Medium, HdiCategory::High,
                                           HdiCategory::VeryHigh};
    std::optional<std::uint64_t> stated_total;
    std::optional<std::uint64_t> stated_correct;

    /// Fills unset section seeds from the global seed and validates ranges.
    void resolve();
    [[nodiscard]] double hdi_multiplier() const { return hdi_unit_interval ? 100.0 : 1.0; }
    [[nodiscard]] features::DatasetOptions dataset_options() const;
};

/// Strict reader: unknown keys or a wrong version are usage errors.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const PipelineConfig& config);

/// Writes `text` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

struct IngestOutcome {
    ingest::IndicatorTable table;
    ingest::CompletenessReport report;
    ingest::NoiseReport noise;
};

/// Parses the input and writes completeness.csv / completeness.json.
IngestOutcome run_ingest(const PipelineConfig& config, const std::filesystem::path& out_dir);

struct ClassifyOutcome {
    features::LabeledDataset dataset;
    features::SplitIndices split;
    ann::NetworkModel model;
    std::vector<HdiCategory> test_predicted;
    std::optional<ann::SweepResult> sweep;
};

/// Trains one network of `hidden_neurons` units.
ClassifyOutcome run_train(const PipelineConfig& config, const ingest::IndicatorTable& table,
                          const std::filesystem::path& out_dir, std::ostream& log);
/// Runs the hidden-size sweep and keeps the best model.
ClassifyOutcome run_sweep(const PipelineConfig& config, const ingest::IndicatorTable& table,
                          const std::filesystem::path& out_dir, std::ostream& log);

struct PredictOutcome {
    std::vector<std::string> regions;
    std::vector<HdiCategory> predicted;
    std::size_t out_of_range_rows = 0;
};

/// Predicts with a saved model, warning on `log` about extrapolated rows.
PredictOutcome run_predict(const PipelineConfig& config, const ingest::IndicatorTable& table,
                           const ann::NetworkModel& model, const std::filesystem::path& out_dir, std::ostream& log);

struct ClusterOutcome {
    features::ClusteringDataset data;
    kmeans::ClusterModel model;
    kmeans::ClusterSummary summary;
    double assignment_check = 0.0;
};

ClusterOutcome run_cluster(const PipelineConfig& config, const ingest::IndicatorTable& table,
                           const std::filesystem::path& out_dir);

struct EvaluateOutcome {
    eval::ConfusionMatrix matrix;
    eval::Metrics metrics;
    std::vector<std::string> notes;
    std::size_t skipped_rows = 0;
};

/// Reads actual_category / predicted_category columns from a predictions CSV.
eval::ConfusionMatrix read_predictions_matrix(const std::filesystem::path& path, std::size_t* skipped = nullptr);
/// Reads a count block as written by eval::render_csv.
eval::ConfusionMatrix read_matrix_csv(const std::filesystem::path& path);

EvaluateOutcome run_evaluate(const PipelineConfig& config, const eval::ConfusionMatrix& matrix,
                             const std::filesystem::path& out_dir);

/// Whole workflow: ingest, sweep, evaluate the best model on the held-out
/// split, cluster, and write report.md / report.json.
void run_report(const PipelineConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace hdi::pipeline

namespace hdi::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Entry point of the `hdi` tool. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hdi::cli
