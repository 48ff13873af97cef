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

namespace hdi::ann {

enum class Activation { Sigmoid, Tanh, Softmax };

[[nodiscard]] std::string_view to_string(Activation a);
[[nodiscard]] std::optional<Activation> parse_activation(std::string_view text);

/// Fully connected feedforward classifier.
///
/// weights[l] maps layer l to layer l + 1 and has shape
/// layer_sizes[l + 1] x layer_sizes[l] (rows are destination units).
struct NetworkModel {
    std::vector<std::size_t> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    Activation hidden_activation = Activation::Sigmoid;
    Activation output_activation = Activation::Softmax;
    std::uint64_t seed = 0;
    /// Input scaling the model was trained under, when known.
    std::optional<features::Scaling> scaling;

    [[nodiscard]] std::size_t input_size() const { return layer_sizes.front(); }
    [[nodiscard]] std::size_t output_size() const { return layer_sizes.back(); }
    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] bool all_finite() const;

    /// Throws BadTopology when shapes disagree with layer_sizes.
    void validate() const;

    friend bool operator==(const NetworkModel&, const NetworkModel&) = default;
};

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
/// Needs at least three layers of positive size; throws BadTopology otherwise.
NetworkModel init_network(std::vector<std::size_t> layer_sizes, Activation hidden = Activation::Sigmoid,
                          std::uint64_t seed = 0);

/// Class probabilities for one input row. Throws DimensionMismatch or NonFiniteInput.
std::vector<double> forward(const NetworkModel& model, std::span<const double> input);

/// Pre-softmax output scores for one input row.
std::vector<double> forward_logits(const NetworkModel& model, std::span<const double> input);

/// Same shapes as the model's parameters.
struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

/// Mean cross-entropy over the rows of `inputs`; `targets` are class indices.
double loss(const NetworkModel& model, const Matrix& inputs, std::span<const std::size_t> targets);

/// Mean cross-entropy and its exact gradient by backpropagation.
double loss_and_gradients(const NetworkModel& model, const Matrix& inputs, std::span<const std::size_t> targets,
                          Gradients& grads);

enum class BatchMode { FullBatch, MiniBatch };

struct TrainConfig {
    std::size_t epochs = 2000;
    double learning_rate = 0.5;
    BatchMode batch_mode = BatchMode::FullBatch;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;  ///< drives minibatch shuffling only
    bool shuffle = false;

    /// Throws Usage/"InvalidTrainConfig".
    void validate() const;
};

struct TrainResult {
    NetworkModel model;
    std::vector<double> trace;  ///< mean training loss per epoch, measured before that epoch's updates
};

/// Plain gradient descent on mean cross-entropy. Throws DimensionMismatch, or
/// Numeric/"DivergedLoss" naming the epoch at which the loss went non-finite.
TrainResult train(NetworkModel model, const Matrix& inputs, std::span<const std::size_t> targets,
                  const TrainConfig& config);
TrainResult train(NetworkModel model, const features::LabeledDataset& data, const TrainConfig& config);

/// Index of the largest component; ties go to the lower index.
std::size_t argmax(std::span<const double> values);

/// Row-wise class probabilities.
Matrix predict_proba(const NetworkModel& model, const Matrix& inputs);
/// Row-wise most probable category. The model must have four outputs.
std::vector<HdiCategory> predict(const NetworkModel& model, const Matrix& inputs);

std::vector<std::size_t> to_targets(std::span<const HdiCategory> labels);

enum class ErrorMetric { MisclassificationCount, Sse, CrossEntropy };

[[nodiscard]] std::string_view to_string(ErrorMetric metric);
[[nodiscard]] std::optional<ErrorMetric> parse_error_metric(std::string_view text);

/// misclassification-count: rows whose argmax differs from the label.
/// sse: sum over rows and classes of (p - onehot)^2.
/// cross-entropy: mean negative log-probability of the true class.
double evaluate_error(const NetworkModel& model, const Matrix& inputs, std::span<const std::size_t> targets,
                      ErrorMetric metric);

struct SweepConfig {
    std::vector<std::size_t> hidden_sizes{10, 13, 16, 20};
    std::size_t runs_per_config = 10;
    std::uint64_t seed_base = 0;
    ErrorMetric metric = ErrorMetric::MisclassificationCount;
    Activation hidden_activation = Activation::Sigmoid;
    /// Worker threads; results never depend on this.
    std::size_t jobs = 1;

    void validate() const;
};

struct SweepEntry {
    std::size_t hidden_neurons = 0;
    std::vector<double> run_errors;  ///< +infinity for a diverged run
    std::vector<bool> diverged;
    double mean_error = 0.0;
};

struct SweepResult {
    std::vector<SweepEntry> entries;  ///< in hidden_sizes order
    std::size_t best = 0;             ///< index into entries
    std::vector<std::size_t> ties;    ///< entries sharing the best mean, including best; empty if unique
    std::size_t best_run = 0;         ///< lowest-error run of the best entry
    NetworkModel best_model;
};

/// Arithmetic mean in run order.
double mean_of(std::span<const double> values);

/// For each hidden size, `runs_per_config` trainings with seed seed_base + run
/// index, scored on `validation`. Diverged runs score +infinity and are
/// flagged. The lowest mean wins; ties go to the smaller hidden size.
SweepResult sweep(const features::LabeledDataset& train_set, const features::LabeledDataset& validation,
                  const SweepConfig& sweep_config, const TrainConfig& train_config);

/// Splits `dataset` per `split` and sweeps with the test part as validation.
SweepResult sweep(const features::LabeledDataset& dataset, const features::SplitSpec& split,
                  const SweepConfig& sweep_config, const TrainConfig& train_config);

/// CSV with header hidden_neurons,run_index,error.
void write_sweep_csv(const SweepResult& result, std::ostream& out);
nlohmann::json sweep_summary_json(const SweepResult& result, ErrorMetric metric);

inline constexpr std::string_view kModelMagic = "HDI-ANN-MODEL";
inline constexpr int kModelVersion = 1;

nlohmann::json model_to_json(const NetworkModel& model);
NetworkModel model_from_json(const nlohmann::json& j);

/// Versioned JSON with magic string and FNV-1a checksum of the model body.
void save_model(const NetworkModel& model, std::ostream& out);
/// Throws Data/"CorruptModelFile" on bad magic, version, checksum or structure.
NetworkModel load_model(std::istream& in);

std::string save_model_string(const NetworkModel& model);
NetworkModel load_model_string(std::string_view text);

}  // namespace hdi::ann
