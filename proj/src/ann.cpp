#include "hdi/ann.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iterator>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "hdi/error.hpp"
#include "hdi/numfmt.hpp"
#include "hdi/rng.hpp"

namespace hdi::ann {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
        case Activation::Softmax: return "softmax";
    }
    return "?";
}

std::optional<Activation> parse_activation(std::string_view text) {
    for (auto a : {Activation::Sigmoid, Activation::Tanh, Activation::Softmax}) {
        if (to_string(a) == text) return a;
    }
    return std::nullopt;
}

std::string_view to_string(ErrorMetric metric) {
    switch (metric) {
        case ErrorMetric::MisclassificationCount: return "misclassification-count";
        case ErrorMetric::Sse: return "sse";
        case ErrorMetric::CrossEntropy: return "cross-entropy";
    }
    return "?";
}

std::optional<ErrorMetric> parse_error_metric(std::string_view text) {
    for (auto m : {ErrorMetric::MisclassificationCount, ErrorMetric::Sse, ErrorMetric::CrossEntropy}) {
        if (to_string(m) == text) return m;
    }
    return std::nullopt;
}

std::size_t NetworkModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.data().size();
    for (const auto& b : biases) n += b.size();
    return n;
}

bool NetworkModel::all_finite() const {
    for (const auto& w : weights) {
        for (double v : w.data()) {
            if (!std::isfinite(v)) return false;
        }
    }
    for (const auto& b : biases) {
        for (double v : b) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

void NetworkModel::validate() const {
    if (layer_sizes.size() < 3) {
        throw_usage("BadTopology", "a network needs input, at least one hidden, and output layers; got " +
                                       std::to_string(layer_sizes.size()) + " layer(s)");
    }
    for (std::size_t s : layer_sizes) {
        if (s == 0) throw_usage("BadTopology", "layer sizes must be positive");
    }
    if (weights.size() != layer_sizes.size() - 1 || biases.size() != layer_sizes.size() - 1) {
        throw_usage("BadTopology", "parameter count does not match layer_sizes");
    }
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l] ||
            biases[l].size() != layer_sizes[l + 1]) {
            throw_usage("BadTopology", "parameter shapes of layer " + std::to_string(l + 1) +
                                           " do not match layer_sizes");
        }
    }
    if (hidden_activation == Activation::Softmax) {
        throw_usage("BadTopology", "softmax is only supported on the output layer");
    }
    if (output_activation != Activation::Softmax) {
        throw_usage("BadTopology", "the output layer must be softmax");
    }
}

NetworkModel init_network(std::vector<std::size_t> layer_sizes, Activation hidden, std::uint64_t seed) {
    NetworkModel model;
    model.layer_sizes = std::move(layer_sizes);
    model.hidden_activation = hidden;
    model.seed = seed;
    if (model.layer_sizes.size() < 3 ||
        std::any_of(model.layer_sizes.begin(), model.layer_sizes.end(), [](std::size_t s) { return s == 0; })) {
        model.validate();  // throws BadTopology with the specific reason
    }
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
        const std::size_t fan_in = model.layer_sizes[l];
        const std::size_t fan_out = model.layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (double& v : w.data()) v = rng.uniform(-limit, limit);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(fan_out, 0.0);
    }
    model.validate();
    return model;
}

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void apply_hidden(Activation a, std::vector<double>& v) {
    for (double& x : v) x = (a == Activation::Tanh) ? std::tanh(x) : sigmoid(x);
}

/// Derivative expressed through the activation's output value.
double hidden_derivative(Activation a, double out) {
    return (a == Activation::Tanh) ? 1.0 - out * out : out * (1.0 - out);
}

void softmax_inplace(std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

double log_sum_exp(const std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    return m + std::log(sum);
}

/// acts[0] is the input, acts[l] the post-activation of layer l, and the last
/// entry holds output logits.
void run_layers(const NetworkModel& model, std::span<const double> input, std::vector<std::vector<double>>& acts) {
    const std::size_t layers = model.layer_sizes.size();
    acts.resize(layers);
    acts[0].assign(input.begin(), input.end());
    for (std::size_t l = 0; l + 1 < layers; ++l) {
        const Matrix& w = model.weights[l];
        const auto& prev = acts[l];
        auto& next = acts[l + 1];
        next.assign(model.biases[l].begin(), model.biases[l].end());
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const auto wrow = w.row(r);
            double sum = 0.0;
            for (std::size_t c = 0; c < wrow.size(); ++c) sum += wrow[c] * prev[c];
            next[r] += sum;
        }
        if (l + 2 < layers) apply_hidden(model.hidden_activation, next);
    }
}

void check_input(const NetworkModel& model, std::span<const double> input) {
    if (input.size() != model.input_size()) {
        throw_data("DimensionMismatch", "input has " + std::to_string(input.size()) + " values, network expects " +
                                            std::to_string(model.input_size()));
    }
    for (double v : input) {
        if (!std::isfinite(v)) throw_data("NonFiniteInput", "network input contains a non-finite value");
    }
}

void check_batch(const NetworkModel& model, const Matrix& inputs, std::span<const std::size_t> targets) {
    if (inputs.rows() != targets.size()) {
        throw_data("DimensionMismatch", std::to_string(inputs.rows()) + " input rows but " +
                                            std::to_string(targets.size()) + " targets");
    }
    if (inputs.rows() > 0 && inputs.cols() != model.input_size()) {
        throw_data("DimensionMismatch", "inputs have " + std::to_string(inputs.cols()) +
                                            " columns, network expects " + std::to_string(model.input_size()));
    }
    for (std::size_t t : targets) {
        if (t >= model.output_size()) {
            throw_data("DimensionMismatch", "target class " + std::to_string(t) + " exceeds output layer size " +
                                                std::to_string(model.output_size()));
        }
    }
    for (double v : inputs.data()) {
        if (!std::isfinite(v)) throw_data("NonFiniteInput", "training inputs contain a non-finite value");
    }
}

Gradients zero_like(const NetworkModel& model) {
    Gradients g;
    for (const auto& w : model.weights) g.weights.emplace_back(w.rows(), w.cols(), 0.0);
    for (const auto& b : model.biases) g.biases.emplace_back(b.size(), 0.0);
    return g;
}

}  // namespace

std::vector<double> forward_logits(const NetworkModel& model, std::span<const double> input) {
    check_input(model, input);
    std::vector<std::vector<double>> acts;
    run_layers(model, input, acts);
    return std::move(acts.back());
}

std::vector<double> forward(const NetworkModel& model, std::span<const double> input) {
    auto out = forward_logits(model, input);
    softmax_inplace(out);
    return out;
}

double loss(const NetworkModel& model, const Matrix& inputs, std::span<const std::size_t> targets) {
    check_batch(model, inputs, targets);
    if (inputs.rows() == 0) return 0.0;
    std::vector<std::vector<double>> acts;
    double total = 0.0;
    for (std::size_t r = 0; r < inputs.rows(); ++r) {
        run_layers(model, inputs.row(r), acts);
        total += log_sum_exp(acts.back()) - acts.back()[targets[r]];
    }
    return total / static_cast<double>(inputs.rows());
}

double loss_and_gradients(const NetworkModel& model, const Matrix& inputs, std::span<const std::size_t> targets,
                          Gradients& grads) {
    check_batch(model, inputs, targets);
    grads = zero_like(model);
    const std::size_t n = inputs.rows();
    if (n == 0) return 0.0;

    const std::size_t layers = model.layer_sizes.size();
    std::vector<std::vector<double>> acts;
    std::vector<double> delta;
    std::vector<double> back;
    double total = 0.0;

    for (std::size_t r = 0; r < n; ++r) {
        run_layers(model, inputs.row(r), acts);
        total += log_sum_exp(acts.back()) - acts.back()[targets[r]];

        // Softmax with cross-entropy: dL/dz = p - onehot.
        delta = acts.back();
        softmax_inplace(delta);
        delta[targets[r]] -= 1.0;

        for (std::size_t l = layers - 1; l-- > 0;) {
            Matrix& gw = grads.weights[l];
            auto& gb = grads.biases[l];
            const auto& prev = acts[l];
            for (std::size_t i = 0; i < delta.size(); ++i) {
                gb[i] += delta[i];
                auto grow = gw.row(i);
                for (std::size_t j = 0; j < prev.size(); ++j) grow[j] += delta[i] * prev[j];
            }
            if (l == 0) break;
            const Matrix& w = model.weights[l];
            back.assign(prev.size(), 0.0);
            for (std::size_t i = 0; i < delta.size(); ++i) {
                const auto wrow = w.row(i);
                for (std::size_t j = 0; j < prev.size(); ++j) back[j] += wrow[j] * delta[i];
            }
            for (std::size_t j = 0; j < prev.size(); ++j) {
                back[j] *= hidden_derivative(model.hidden_activation, prev[j]);
            }
            delta.swap(back);
        }
    }

    const double inv = 1.0 / static_cast<double>(n);
    for (auto& gw : grads.weights) {
        for (double& v : gw.data()) v *= inv;
    }
    for (auto& gb : grads.biases) {
        for (double& v : gb) v *= inv;
    }
    return total * inv;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw_usage("InvalidTrainConfig", "epochs must be at least 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw_usage("InvalidTrainConfig", "learning_rate must be a finite non-negative number");
    }
    if (batch_mode == BatchMode::MiniBatch && batch_size < 1) {
        throw_usage("InvalidTrainConfig", "batch_size must be at least 1");
    }
}

namespace {

void apply_step(NetworkModel& model, const Gradients& g, double lr) {
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        auto& w = model.weights[l].data();
        const auto& gw = g.weights[l].data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * gw[i];
        auto& b = model.biases[l];
        for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lr * g.biases[l][i];
    }
}

[[noreturn]] void diverged(std::size_t epoch) {
    throw_numeric("DivergedLoss", "training loss became non-finite at epoch " + std::to_string(epoch));
}

}  // namespace

TrainResult train(NetworkModel model, const Matrix& inputs, std::span<const std::size_t> targets,
                  const TrainConfig& config) {
    config.validate();
    model.validate();
    check_batch(model, inputs, targets);
    if (inputs.rows() == 0) throw_data("EmptyResult", "cannot train on an empty dataset");

    TrainResult result;
    result.trace.reserve(config.epochs);
    Gradients grads;
    const std::size_t n = inputs.rows();

    if (config.batch_mode == BatchMode::FullBatch) {
        for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
            const double l = loss_and_gradients(model, inputs, targets, grads);
            if (!std::isfinite(l)) diverged(epoch);
            result.trace.push_back(l);
            apply_step(model, grads, config.learning_rate);
        }
    } else {
        Rng rng(config.seed);
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::vector<std::size_t> batch_targets;
        for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
            if (config.shuffle) rng.shuffle(order);
            double weighted = 0.0;
            for (std::size_t start = 0; start < n; start += config.batch_size) {
                const std::size_t stop = std::min(n, start + config.batch_size);
                const std::span<const std::size_t> idx(order.data() + start, stop - start);
                const Matrix batch = inputs.select_rows(idx);
                batch_targets.clear();
                for (std::size_t i : idx) batch_targets.push_back(targets[i]);
                const double l = loss_and_gradients(model, batch, batch_targets, grads);
                if (!std::isfinite(l)) diverged(epoch);
                weighted += l * static_cast<double>(idx.size());
                apply_step(model, grads, config.learning_rate);
            }
            result.trace.push_back(weighted / static_cast<double>(n));
        }
    }
    if (!model.all_finite()) diverged(config.epochs);
    result.model = std::move(model);
    return result;
}

std::vector<std::size_t> to_targets(std::span<const HdiCategory> labels) {
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (auto c : labels) out.push_back(index_of(c));
    return out;
}

TrainResult train(NetworkModel model, const features::LabeledDataset& data, const TrainConfig& config) {
    const auto targets = to_targets(data.labels);
    auto result = train(std::move(model), data.features, targets, config);
    result.model.scaling = data.scaling;
    return result;
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

Matrix predict_proba(const NetworkModel& model, const Matrix& inputs) {
    if (inputs.rows() > 0 && inputs.cols() != model.input_size()) {
        throw_data("DimensionMismatch", "inputs have " + std::to_string(inputs.cols()) + " columns, network expects " +
                                            std::to_string(model.input_size()));
    }
    Matrix out(inputs.rows(), model.output_size());
    for (std::size_t r = 0; r < inputs.rows(); ++r) {
        const auto p = forward(model, inputs.row(r));
        std::copy(p.begin(), p.end(), out.row(r).begin());
    }
    return out;
}

std::vector<HdiCategory> predict(const NetworkModel& model, const Matrix& inputs) {
    if (model.output_size() != kCategoryCount) {
        throw_data("DimensionMismatch", "category prediction needs a 4-output network");
    }
    const Matrix proba = predict_proba(model, inputs);
    std::vector<HdiCategory> out;
    out.reserve(proba.rows());
    for (std::size_t r = 0; r < proba.rows(); ++r) out.push_back(category_at(argmax(proba.row(r))));
    return out;
}

double evaluate_error(const NetworkModel& model, const Matrix& inputs, std::span<const std::size_t> targets,
                      ErrorMetric metric) {
    check_batch(model, inputs, targets);
    double total = 0.0;
    for (std::size_t r = 0; r < inputs.rows(); ++r) {
        const auto z = forward_logits(model, inputs.row(r));
        switch (metric) {
            case ErrorMetric::MisclassificationCount:
                if (argmax(z) != targets[r]) total += 1.0;
                break;
            case ErrorMetric::Sse: {
                auto p = z;
                softmax_inplace(p);
                for (std::size_t k = 0; k < p.size(); ++k) {
                    const double d = p[k] - (k == targets[r] ? 1.0 : 0.0);
                    total += d * d;
                }
                break;
            }
            case ErrorMetric::CrossEntropy: total += log_sum_exp(z) - z[targets[r]]; break;
        }
    }
    if (metric == ErrorMetric::CrossEntropy && inputs.rows() > 0) total /= static_cast<double>(inputs.rows());
    return total;
}

void SweepConfig::validate() const {
    if (hidden_sizes.empty()) throw_usage("InvalidSweep", "hidden_sizes must not be empty");
    for (std::size_t h : hidden_sizes) {
        if (h == 0) throw_usage("InvalidSweep", "hidden sizes must be positive");
    }
    if (runs_per_config < 1) throw_usage("InvalidSweep", "runs_per_config must be at least 1");
}

double mean_of(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

SweepResult sweep(const features::LabeledDataset& train_set, const features::LabeledDataset& validation,
                  const SweepConfig& sweep_config, const TrainConfig& train_config) {
    sweep_config.validate();
    train_config.validate();
    if (train_set.size() == 0 || validation.size() == 0) {
        throw_data("EmptyResult", "sweep needs non-empty training and validation sets");
    }
    const std::size_t inputs = train_set.features.cols();
    const std::size_t runs = sweep_config.runs_per_config;
    const std::size_t total = sweep_config.hidden_sizes.size() * runs;
    const auto val_targets = to_targets(validation.labels);

    struct Slot {
        double error = 0.0;
        bool diverged = false;
        std::optional<NetworkModel> model;
        std::exception_ptr failure;
    };
    std::vector<Slot> slots(total);

    auto run_one = [&](std::size_t task) {
        const std::size_t entry = task / runs;
        const std::size_t run = task % runs;
        const std::size_t hidden = sweep_config.hidden_sizes[entry];
        Slot& slot = slots[task];
        try {
            const std::uint64_t seed = sweep_config.seed_base + run;
            auto model = init_network({inputs, hidden, kCategoryCount}, sweep_config.hidden_activation, seed);
            TrainConfig cfg = train_config;
            cfg.seed = seed;
            try {
                auto trained = train(std::move(model), train_set, cfg);
                slot.error = evaluate_error(trained.model, validation.features, val_targets, sweep_config.metric);
                slot.model = std::move(trained.model);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Numeric) throw;
                slot.error = std::numeric_limits<double>::infinity();
                slot.diverged = true;
            }
        } catch (const Error& e) {
            slot.failure = std::make_exception_ptr(Error(e.kind(), e.code(),
                                                         "hidden size " + std::to_string(hidden) + ", run " +
                                                             std::to_string(run) + ": " + e.what()));
        } catch (...) {
            slot.failure = std::current_exception();
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(sweep_config.jobs, total));
    if (workers == 1) {
        for (std::size_t t = 0; t < total; ++t) run_one(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < total; t = next++) run_one(t);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (const auto& slot : slots) {
        if (slot.failure) std::rethrow_exception(slot.failure);
    }

    SweepResult result;
    for (std::size_t e = 0; e < sweep_config.hidden_sizes.size(); ++e) {
        SweepEntry entry;
        entry.hidden_neurons = sweep_config.hidden_sizes[e];
        for (std::size_t r = 0; r < runs; ++r) {
            entry.run_errors.push_back(slots[e * runs + r].error);
            entry.diverged.push_back(slots[e * runs + r].diverged);
        }
        entry.mean_error = mean_of(entry.run_errors);
        result.entries.push_back(std::move(entry));
    }

    auto better = [&](std::size_t a, std::size_t b) {
        const auto& ea = result.entries[a];
        const auto& eb = result.entries[b];
        if (ea.mean_error != eb.mean_error) return ea.mean_error < eb.mean_error;
        return ea.hidden_neurons < eb.hidden_neurons;
    };
    for (std::size_t e = 1; e < result.entries.size(); ++e) {
        if (better(e, result.best)) result.best = e;
    }
    const double best_mean = result.entries[result.best].mean_error;
    for (std::size_t e = 0; e < result.entries.size(); ++e) {
        if (result.entries[e].mean_error == best_mean) result.ties.push_back(e);
    }
    if (result.ties.size() < 2) result.ties.clear();

    const auto& best_errors = result.entries[result.best].run_errors;
    result.best_run = static_cast<std::size_t>(
        std::distance(best_errors.begin(), std::min_element(best_errors.begin(), best_errors.end())));
    if (auto& m = slots[result.best * runs + result.best_run].model) result.best_model = *m;
    return result;
}

SweepResult sweep(const features::LabeledDataset& dataset, const features::SplitSpec& split,
                  const SweepConfig& sweep_config, const TrainConfig& train_config) {
    auto [train_set, validation] = features::split(dataset, split);
    return sweep(train_set, validation, sweep_config, train_config);
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
    out << "hidden_neurons,run_index,error\n";
    for (const auto& e : result.entries) {
        for (std::size_t r = 0; r < e.run_errors.size(); ++r) {
            out << e.hidden_neurons << ',' << r << ',' << format_shortest(e.run_errors[r]) << '\n';
        }
    }
}

namespace {

// JSON has no infinity; diverged means are written as the string "inf".
nlohmann::json number_or_inf(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

}  // namespace

nlohmann::json sweep_summary_json(const SweepResult& result, ErrorMetric metric) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : result.entries) {
        nlohmann::json errors = nlohmann::json::array();
        for (double v : e.run_errors) errors.push_back(number_or_inf(v));
        std::vector<std::size_t> diverged_runs;
        for (std::size_t r = 0; r < e.diverged.size(); ++r) {
            if (e.diverged[r]) diverged_runs.push_back(r);
        }
        entries.push_back({{"hidden_neurons", e.hidden_neurons},
                           {"run_errors", errors},
                           {"mean_error", number_or_inf(e.mean_error)},
                           {"diverged_runs", diverged_runs}});
    }
    std::vector<std::size_t> tied_sizes;
    for (std::size_t t : result.ties) tied_sizes.push_back(result.entries[t].hidden_neurons);
    const auto& best = result.entries[result.best];
    return {{"metric", std::string(to_string(metric))},
            {"entries", entries},
            {"best", {{"hidden_neurons", best.hidden_neurons},
                      {"mean_error", number_or_inf(best.mean_error)},
                      {"best_run", result.best_run},
                      {"topology", result.best_model.layer_sizes}}},
            {"ties", tied_sizes}};
}

nlohmann::json model_to_json(const NetworkModel& model) {
    nlohmann::json weights = nlohmann::json::array();
    for (const auto& w : model.weights) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const auto row = w.row(r);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        weights.push_back(std::move(rows));
    }
    nlohmann::json j = {{"layer_sizes", model.layer_sizes},
                        {"hidden_activation", std::string(to_string(model.hidden_activation))},
                        {"output_activation", std::string(to_string(model.output_activation))},
                        {"seed", model.seed},
                        {"weights", weights},
                        {"biases", model.biases}};
    j["scaling"] = model.scaling ? features::scaling_to_json(*model.scaling) : nlohmann::json(nullptr);
    return j;
}

NetworkModel model_from_json(const nlohmann::json& j) {
    NetworkModel model;
    model.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    auto hidden = parse_activation(j.at("hidden_activation").get<std::string>());
    auto output = parse_activation(j.at("output_activation").get<std::string>());
    if (!hidden || !output) throw_data("CorruptModelFile", "unknown activation in model file");
    model.hidden_activation = *hidden;
    model.output_activation = *output;
    model.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& layer : j.at("weights")) {
        Matrix w;
        for (const auto& row : layer) w.push_row(row.get<std::vector<double>>());
        model.weights.push_back(std::move(w));
    }
    model.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    if (!j.at("scaling").is_null()) model.scaling = features::scaling_from_json(j.at("scaling"));
    return model;
}

namespace {

std::string fnv1a64_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

[[noreturn]] void corrupt(const std::string& why) { throw_data("CorruptModelFile", "corrupt model file: " + why); }

}  // namespace

void save_model(const NetworkModel& model, std::ostream& out) {
    model.validate();
    const nlohmann::json body = model_to_json(model);
    nlohmann::json doc = {{"magic", std::string(kModelMagic)},
                          {"version", kModelVersion},
                          {"checksum", "fnv1a64:" + fnv1a64_hex(body.dump())},
                          {"model", body}};
    out << doc.dump(2) << '\n';
}

NetworkModel load_model(std::istream& in) {
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        corrupt(std::string("not valid JSON (") + e.what() + ")");
    }
    try {
        if (!doc.is_object() || doc.value("magic", "") != kModelMagic) corrupt("magic string mismatch");
        if (!doc.contains("version") || !doc["version"].is_number_integer() ||
            doc["version"].get<int>() != kModelVersion) {
            corrupt("unsupported version " + (doc.contains("version") ? doc["version"].dump() : std::string("<none>")));
        }
        const auto& body = doc.at("model");
        if (doc.value("checksum", "") != "fnv1a64:" + fnv1a64_hex(body.dump())) corrupt("checksum mismatch");
        NetworkModel model = model_from_json(body);
        try {
            model.validate();
        } catch (const Error& e) {
            corrupt(e.what());
        }
        if (!model.all_finite()) corrupt("non-finite parameter");
        return model;
    } catch (const nlohmann::json::exception& e) {
        corrupt(std::string("missing or mistyped field (") + e.what() + ")");
    }
}

std::string save_model_string(const NetworkModel& model) {
    std::ostringstream out;
    save_model(model, out);
    return out.str();
}

NetworkModel load_model_string(std::string_view text) {
    std::istringstream in{std::string(text)};
    return load_model(in);
}

}  // namespace hdi::ann
