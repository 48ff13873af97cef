#include "hdi/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hdi/csv.hpp"
#include "hdi/error.hpp"
#include "hdi/numfmt.hpp"
#include "hdi/plot.hpp"
#include "hdi/rng.hpp"

namespace hdi::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Stream ids for seeds derived from the global seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kSweepStream = 2;
constexpr std::uint64_t kKMeansStream = 3;
constexpr std::uint64_t kTrainStream = 4;

[[noreturn]] void bad_config(const std::string& message) { throw_usage("InvalidConfig", message); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) bad_config(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            bad_config("unknown key '" + key + "' in " + where);
        }
    }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        bad_config(where + "." + key + " has the wrong type");
    }
}

void read_seed(const json& obj, const char* key, std::optional<std::uint64_t>& out, const std::string& where) {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    if (!obj.at(key).is_number_unsigned()) bad_config(where + "." + key + " must be a non-negative integer");
    out = obj.at(key).get<std::uint64_t>();
}

template <class E, class Parse>
void read_enum(const json& obj, const char* key, E& out, const std::string& where, Parse parse) {
    if (!obj.contains(key)) return;
    if (!obj.at(key).is_string()) bad_config(where + "." + key + " must be a string");
    auto parsed = parse(obj.at(key).get<std::string>());
    if (!parsed) bad_config(where + "." + key + ": unknown value '" + obj.at(key).get<std::string>() + "'");
    out = *parsed;
}

std::optional<ann::BatchMode> parse_batch_mode(std::string_view text) {
    if (text == "full-batch") return ann::BatchMode::FullBatch;
    if (text == "minibatch") return ann::BatchMode::MiniBatch;
    return std::nullopt;
}

std::string_view to_string(ann::BatchMode mode) {
    return mode == ann::BatchMode::FullBatch ? "full-batch" : "minibatch";
}

std::vector<std::string> category_names(const std::vector<HdiCategory>& order) {
    std::vector<std::string> out;
    for (auto c : order) out.emplace_back(hdi::to_string(c));
    return out;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("FileNotFound", "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

std::string num(double v) { return format_shortest(v); }

/// region,predicted_category,p_low,p_medium,p_high,p_very_high,actual_category
std::string predictions_csv(const std::vector<std::string>& regions, const Matrix& proba,
                            const std::vector<HdiCategory>& predicted,
                            const std::vector<std::optional<HdiCategory>>& actual) {
    std::ostringstream out;
    out << "region,predicted_category,p_low,p_medium,p_high,p_very_high,actual_category\n";
    for (std::size_t i = 0; i < regions.size(); ++i) {
        out << csv::escape(regions[i]) << ',' << hdi::to_string(predicted[i]);
        for (std::size_t c = 0; c < kCategoryCount; ++c) out << ',' << format_fixed(proba(i, c), 6);
        out << ',';
        if (i < actual.size() && actual[i]) out << hdi::to_string(*actual[i]);
        out << '\n';
    }
    return out.str();
}

std::string split_csv(const features::LabeledDataset& dataset, const features::SplitIndices& split) {
    std::vector<std::string> part(dataset.size(), "train");
    for (auto i : split.test) part[i] = "test";
    std::ostringstream out;
    out << "region,partition\n";
    for (std::size_t i = 0; i < dataset.size(); ++i) out << csv::escape(dataset.region_ids[i]) << ',' << part[i] << '\n';
    return out.str();
}

struct Prepared {
    features::LabeledDataset dataset;
    features::SplitIndices split;
    features::LabeledDataset train_set;
    features::LabeledDataset test_set;
};

Prepared prepare(const PipelineConfig& config, const ingest::IndicatorTable& table, const fs::path& out_dir) {
    Prepared p;
    p.dataset = features::build_classification_dataset(table, config.classification_year, config.dataset_options());
    p.split = features::split_indices(p.dataset.labels, config.split);
    // Scaling is refitted on the training rows so no test statistics leak in.
    auto train_raw = p.dataset.subset(p.split.train);
    const auto scaling = features::fit_scaling(train_raw.raw_features, config.scaling);
    p.dataset.scaling = scaling;
    p.dataset.features = scaling.apply(p.dataset.raw_features);
    p.train_set = p.dataset.subset(p.split.train);
    p.test_set = p.dataset.subset(p.split.test);

    std::ostringstream ds;
    features::write_dataset_csv(p.dataset, ds);
    write_file(out_dir / "dataset.csv", ds.str());
    write_json(out_dir / "dataset.json", features::dataset_to_json(p.dataset));
    write_file(out_dir / "split.csv", split_csv(p.dataset, p.split));
    return p;
}

std::vector<HdiCategory> write_test_predictions(const ann::NetworkModel& model, const Prepared& p,
                                                const fs::path& out_dir) {
    const Matrix proba = ann::predict_proba(model, p.test_set.features);
    std::vector<HdiCategory> predicted;
    for (std::size_t i = 0; i < proba.rows(); ++i) predicted.push_back(category_at(ann::argmax(proba.row(i))));
    std::vector<std::optional<HdiCategory>> actual(p.test_set.labels.begin(), p.test_set.labels.end());
    write_file(out_dir / "test_predictions.csv", predictions_csv(p.test_set.region_ids, proba, predicted, actual));
    return predicted;
}

}  // namespace

features::DatasetOptions PipelineConfig::dataset_options() const {
    features::DatasetOptions o;
    o.names = indicators;
    o.thresholds = thresholds;
    o.scaling = scaling;
    o.hdi_multiplier = hdi_multiplier();
    return o;
}

void PipelineConfig::resolve() {
    split.seed = split_seed.value_or(derive_seed(seed, kSplitStream));
    sweep.seed_base = sweep_seed.value_or(derive_seed(seed, kSweepStream));
    kmeans.seed = kmeans_seed.value_or(derive_seed(seed, kKMeansStream));
    train.seed = train_seed.value_or(derive_seed(seed, kTrainStream));
    sweep.jobs = jobs;
    sweep.hidden_activation = hidden_activation;

    if (classification_year <= 0 || clustering_year <= 0) bad_config("years must be positive integers");
    if (jobs == 0) bad_config("jobs must be at least 1");
    if (hidden_neurons == 0) bad_config("train.hidden_neurons must be positive");
    if (hidden_activation == ann::Activation::Softmax) bad_config("softmax is not a hidden activation");
    if (kmeans.k == 0) bad_config("kmeans.k must be positive");
    if (kmeans.restarts == 0) bad_config("kmeans.restarts must be positive");
    if (!(kmeans.tol >= 0.0) || !std::isfinite(kmeans.tol)) bad_config("kmeans.tol must be finite and >= 0");
    const std::vector<std::string> names{indicators.hdi, indicators.gdp, indicators.npp,
                                         indicators.niu, indicators.nl,  indicators.np};
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].empty()) bad_config("indicator mappings must be non-empty");
        for (std::size_t j = i + 1; j < names.size(); ++j) {
            if (names[i] == names[j]) bad_config("indicator '" + names[i] + "' is mapped twice");
        }
    }
    thresholds.validate();
    split.validate();
    train.validate();
    sweep.validate();
}

PipelineConfig config_from_json(const json& j) {
    check_keys(j, "config",
               {"version", "input", "output_dir", "seed", "jobs", "csv", "indicators", "years", "thresholds",
                "hdi_unit_interval", "scaling", "split", "train", "sweep", "kmeans", "predict", "evaluate"});
    if (!j.contains("version")) bad_config("config.version is required");
    if (j.at("version") != kConfigVersion) bad_config("unsupported config version " + j.at("version").dump());

    PipelineConfig c;
    const std::string top = "config";
    read(j, "input", c.input, top);
    read(j, "output_dir", c.output_dir, top);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) bad_config("config.seed must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    read(j, "jobs", c.jobs, top);
    read(j, "hdi_unit_interval", c.hdi_unit_interval, top);
    read_enum(j, "scaling", c.scaling, top, features::parse_scaling);

    if (j.contains("csv")) {
        const auto& s = j.at("csv");
        check_keys(s, "csv",
                   {"delimiter", "region_column", "indicator_column", "permissive_thousands", "drop_noise"});
        if (s.contains("delimiter")) {
            std::string d;
            read(s, "delimiter", d, "csv");
            if (d.size() != 1) bad_config("csv.delimiter must be a single character");
            c.csv.delimiter = d[0];
        }
        read(s, "region_column", c.csv.region_column, "csv");
        read(s, "indicator_column", c.csv.indicator_column, "csv");
        read(s, "permissive_thousands", c.csv.permissive_thousands, "csv");
        read(s, "drop_noise", c.csv.drop_noise, "csv");
    }
    if (j.contains("indicators")) {
        const auto& s = j.at("indicators");
        check_keys(s, "indicators", {"hdi", "gdp", "npp", "niu", "nl", "np"});
        read(s, "hdi", c.indicators.hdi, "indicators");
        read(s, "gdp", c.indicators.gdp, "indicators");
        read(s, "npp", c.indicators.npp, "indicators");
        read(s, "niu", c.indicators.niu, "indicators");
        read(s, "nl", c.indicators.nl, "indicators");
        read(s, "np", c.indicators.np, "indicators");
    }
    if (j.contains("years")) {
        const auto& s = j.at("years");
        check_keys(s, "years", {"classification", "clustering"});
        read(s, "classification", c.classification_year, "years");
        read(s, "clustering", c.clustering_year, "years");
    }
    if (j.contains("thresholds")) {
        const auto& s = j.at("thresholds");
        check_keys(s, "thresholds", {"t1", "t2", "t3"});
        read(s, "t1", c.thresholds.t1, "thresholds");
        read(s, "t2", c.thresholds.t2, "thresholds");
        read(s, "t3", c.thresholds.t3, "thresholds");
    }
    if (j.contains("split")) {
        const auto& s = j.at("split");
        check_keys(s, "split", {"test_fraction", "stratified", "seed"});
        read(s, "test_fraction", c.split.test_fraction, "split");
        read(s, "stratified", c.split.stratified, "split");
        read_seed(s, "seed", c.split_seed, "split");
    }
    if (j.contains("train")) {
        const auto& s = j.at("train");
        check_keys(s, "train",
                   {"epochs", "learning_rate", "batch_mode", "batch_size", "shuffle", "seed", "hidden_neurons",
                    "hidden_activation"});
        read(s, "epochs", c.train.epochs, "train");
        read(s, "learning_rate", c.train.learning_rate, "train");
        read_enum(s, "batch_mode", c.train.batch_mode, "train", parse_batch_mode);
        read(s, "batch_size", c.train.batch_size, "train");
        read(s, "shuffle", c.train.shuffle, "train");
        read_seed(s, "seed", c.train_seed, "train");
        read(s, "hidden_neurons", c.hidden_neurons, "train");
        read_enum(s, "hidden_activation", c.hidden_activation, "train", ann::parse_activation);
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        check_keys(s, "sweep", {"hidden_sizes", "runs_per_config", "metric", "seed_base"});
        read(s, "hidden_sizes", c.sweep.hidden_sizes, "sweep");
        read(s, "runs_per_config", c.sweep.runs_per_config, "sweep");
        read_enum(s, "metric", c.sweep.metric, "sweep", ann::parse_error_metric);
        read_seed(s, "seed_base", c.sweep_seed, "sweep");
    }
    if (j.contains("kmeans")) {
        const auto& s = j.at("kmeans");
        check_keys(s, "kmeans", {"k", "init", "max_iters", "restarts", "tol", "prescale", "seed", "centroids"});
        read(s, "k", c.kmeans.k, "kmeans");
        read_enum(s, "init", c.kmeans.init, "kmeans", kmeans::parse_init);
        read(s, "max_iters", c.kmeans.max_iters, "kmeans");
        read(s, "restarts", c.kmeans.restarts, "kmeans");
        read(s, "tol", c.kmeans.tol, "kmeans");
        read(s, "prescale", c.kmeans.prescale, "kmeans");
        read_seed(s, "seed", c.kmeans_seed, "kmeans");
        read(s, "centroids", c.centroids, "kmeans");
    }
    if (j.contains("predict")) {
        const auto& s = j.at("predict");
        check_keys(s, "predict", {"model", "clamp"});
        read(s, "model", c.model, "predict");
        read(s, "clamp", c.clamp, "predict");
    }
    if (j.contains("evaluate")) {
        const auto& s = j.at("evaluate");
        check_keys(s, "evaluate", {"predictions", "matrix", "display_order", "stated_total", "stated_correct"});
        read(s, "predictions", c.predictions, "evaluate");
        read(s, "matrix", c.matrix, "evaluate");
        if (s.contains("display_order")) {
            std::vector<std::string> names;
            read(s, "display_order", names, "evaluate");
            c.display_order.clear();
            for (const auto& n : names) {
                auto cat = parse_category(n);
                if (!cat) bad_config("evaluate.display_order: unknown category '" + n + "'");
                c.display_order.push_back(*cat);
            }
        }
        read_seed(s, "stated_total", c.stated_total, "evaluate");
        read_seed(s, "stated_correct", c.stated_correct, "evaluate");
    }
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    const std::string text = read_text(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        bad_config(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const PipelineConfig& c) {
    auto opt = [](const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(nullptr); };
    json j;
    j["version"] = kConfigVersion;
    j["input"] = c.input;
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["csv"] = {{"delimiter", std::string(1, c.csv.delimiter)},
                {"region_column", c.csv.region_column},
                {"indicator_column", c.csv.indicator_column},
                {"permissive_thousands", c.csv.permissive_thousands},
                {"drop_noise", c.csv.drop_noise}};
    j["indicators"] = {{"hdi", c.indicators.hdi}, {"gdp", c.indicators.gdp}, {"npp", c.indicators.npp},
                       {"niu", c.indicators.niu}, {"nl", c.indicators.nl},   {"np", c.indicators.np}};
    j["years"] = {{"classification", c.classification_year}, {"clustering", c.clustering_year}};
    j["thresholds"] = {{"t1", c.thresholds.t1}, {"t2", c.thresholds.t2}, {"t3", c.thresholds.t3}};
    j["hdi_unit_interval"] = c.hdi_unit_interval;
    j["scaling"] = std::string(features::to_string(c.scaling));
    // Seeds are written as resolved so the echoed config reruns identically.
    j["split"] = {{"test_fraction", c.split.test_fraction},
                  {"stratified", c.split.stratified},
                  {"seed", c.split_seed ? json(*c.split_seed) : json(c.split.seed)}};
    j["train"] = {{"epochs", c.train.epochs},
                  {"learning_rate", c.train.learning_rate},
                  {"batch_mode", std::string(to_string(c.train.batch_mode))},
                  {"batch_size", c.train.batch_size},
                  {"shuffle", c.train.shuffle},
                  {"seed", c.train_seed ? json(*c.train_seed) : json(c.train.seed)},
                  {"hidden_neurons", c.hidden_neurons},
                  {"hidden_activation", std::string(ann::to_string(c.hidden_activation))}};
    j["sweep"] = {{"hidden_sizes", c.sweep.hidden_sizes},
                  {"runs_per_config", c.sweep.runs_per_config},
                  {"metric", std::string(ann::to_string(c.sweep.metric))},
                  {"seed_base", c.sweep_seed ? json(*c.sweep_seed) : json(c.sweep.seed_base)}};
    j["kmeans"] = {{"k", c.kmeans.k},
                   {"init", std::string(kmeans::to_string(c.kmeans.init))},
                   {"max_iters", c.kmeans.max_iters},
                   {"restarts", c.kmeans.restarts},
                   {"tol", c.kmeans.tol},
                   {"prescale", c.kmeans.prescale},
                   {"seed", c.kmeans_seed ? json(*c.kmeans_seed) : json(c.kmeans.seed)},
                   {"centroids", c.centroids}};
    j["predict"] = {{"model", c.model}, {"clamp", c.clamp}};
    j["evaluate"] = {{"predictions", c.predictions},
                     {"matrix", c.matrix},
                     {"display_order", category_names(c.display_order)},
                     {"stated_total", opt(c.stated_total)},
                     {"stated_correct", opt(c.stated_correct)}};
    return j;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_data("WriteFailed", "cannot write " + path.string());
    out << text;
    if (!out) throw_data("WriteFailed", "cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_file(path, json_text(j)); }

IngestOutcome run_ingest(const PipelineConfig& config, const fs::path& out_dir) {
    if (config.input.empty()) throw_usage("MissingInput", "no input file given");
    IngestOutcome o;
    o.table = ingest::parse_wide_csv_file(config.input, config.csv, &o.noise);
    o.report = ingest::completeness(o.table);
    std::ostringstream csv_out;
    ingest::write_completeness_csv(o.report, csv_out);
    write_file(out_dir / "completeness.csv", csv_out.str());
    write_json(out_dir / "completeness.json", ingest::completeness_to_json(o.report));
    if (config.csv.drop_noise) {
        json dropped = json::array();
        for (const auto& d : o.noise.dropped) dropped.push_back({{"line", d.line}, {"reason", d.reason}});
        write_json(out_dir / "noise_report.json",
                   {{"dropped", dropped}, {"duplicates_collapsed", o.noise.duplicates_collapsed}});
    }
    return o;
}

ClassifyOutcome run_train(const PipelineConfig& config, const ingest::IndicatorTable& table, const fs::path& out_dir,
                          std::ostream& log) {
    Prepared p = prepare(config, table, out_dir);
    auto model = ann::init_network({features::kPredictorLabels.size(), config.hidden_neurons, kCategoryCount},
                                   config.hidden_activation, config.train.seed);
    auto result = ann::train(std::move(model), p.train_set, config.train);

    std::ostringstream trace;
    trace << "epoch,loss\n";
    for (std::size_t e = 0; e < result.trace.size(); ++e) trace << e << ',' << num(result.trace[e]) << '\n';
    write_file(out_dir / "training_trace.csv", trace.str());
    write_file(out_dir / "model.json", ann::save_model_string(result.model));

    ClassifyOutcome o;
    o.test_predicted = write_test_predictions(result.model, p, out_dir);
    log << "trained (5:" << config.hidden_neurons << ":4) on " << p.train_set.size() << " rows, final loss "
        << format_fixed(result.trace.empty() ? 0.0 : result.trace.back(), 6) << '\n';
    o.dataset = std::move(p.dataset);
    o.split = std::move(p.split);
    o.model = std::move(result.model);
    return o;
}

ClassifyOutcome run_sweep(const PipelineConfig& config, const ingest::IndicatorTable& table, const fs::path& out_dir,
                          std::ostream& log) {
    Prepared p = prepare(config, table, out_dir);
    auto result = ann::sweep(p.train_set, p.test_set, config.sweep, config.train);

    std::ostringstream runs;
    ann::write_sweep_csv(result, runs);
    write_file(out_dir / "sweep.csv", runs.str());
    write_json(out_dir / "sweep_summary.json", ann::sweep_summary_json(result, config.sweep.metric));
    if (!std::isfinite(result.entries[result.best].mean_error)) {
        throw_numeric("DivergedLoss", "every sweep run diverged; no model to keep");
    }
    result.best_model.scaling = p.dataset.scaling;
    write_file(out_dir / "best_model.json", ann::save_model_string(result.best_model));

    ClassifyOutcome o;
    o.test_predicted = write_test_predictions(result.best_model, p, out_dir);
    const auto& best = result.entries[result.best];
    log << "best hidden size " << best.hidden_neurons << " with mean " << ann::to_string(config.sweep.metric) << ' '
        << num(best.mean_error) << '\n';
    o.dataset = std::move(p.dataset);
    o.split = std::move(p.split);
    o.model = result.best_model;
    o.sweep = std::move(result);
    return o;
}

PredictOutcome run_predict(const PipelineConfig& config, const ingest::IndicatorTable& table,
                           const ann::NetworkModel& model, const fs::path& out_dir, std::ostream& log) {
    auto inputs = features::build_prediction_inputs(table, config.classification_year, config.dataset_options());
    PredictOutcome o;
    Matrix raw = inputs.raw_features;
    Matrix scaled = raw;
    if (model.scaling) {
        const auto& cols = model.scaling->columns;
        for (std::size_t i = 0; i < raw.rows(); ++i) {
            if (model.scaling->within_fitted_range(raw.row(i))) continue;
            ++o.out_of_range_rows;
            log << "warning: " << inputs.region_ids[i] << " has predictors outside the training range"
                << (config.clamp ? " (clamped)" : "") << '\n';
            if (config.clamp) {
                for (std::size_t c = 0; c < cols.size(); ++c) raw(i, c) = std::clamp(raw(i, c), cols[c].min, cols[c].max);
            }
        }
        scaled = model.scaling->apply(raw);
    } else {
        log << "warning: model carries no scaling; predictors are used unscaled\n";
    }
    const Matrix proba = ann::predict_proba(model, scaled);
    for (std::size_t i = 0; i < proba.rows(); ++i) o.predicted.push_back(category_at(ann::argmax(proba.row(i))));
    write_file(out_dir / "predictions.csv", predictions_csv(inputs.region_ids, proba, o.predicted, inputs.actual));
    o.regions = std::move(inputs.region_ids);
    return o;
}

ClusterOutcome run_cluster(const PipelineConfig& config, const ingest::IndicatorTable& table, const fs::path& out_dir) {
    ClusterOutcome o;
    o.data = features::build_clustering_dataset(table, config.clustering_year, config.indicators,
                                                config.hdi_multiplier());
    kmeans::KMeansConfig kc = config.kmeans;
    if (kc.init == kmeans::InitMethod::Provided) {
        if (config.centroids.empty()) throw_usage("MissingCentroids", "provided init needs a centroids file");
        std::istringstream in(read_text(config.centroids));
        kc.provided_centroids = kmeans::read_centroids_csv(in);
    }
    o.model = kmeans::kmeans_fit(o.data.points, kc);
    o.summary = kmeans::summarize(o.model, o.data.points, config.thresholds);
    o.assignment_check = eval::cluster_assignment_check(o.model, o.data.points, o.model.assignments);

    std::ostringstream assignments;
    assignments << "region,hdi,gdp,cluster\n";
    for (std::size_t i = 0; i < o.data.points.rows(); ++i) {
        assignments << csv::escape(o.data.region_ids[i]) << ',' << num(o.data.points(i, 0)) << ','
                    << num(o.data.points(i, 1)) << ',' << o.model.assignments[i] << '\n';
    }
    write_file(out_dir / "cluster_assignments.csv", assignments.str());

    json summary;
    summary["k"] = o.model.k;
    summary["year"] = config.clustering_year;
    summary["converged"] = o.model.converged;
    summary["iterations"] = o.model.iterations_run;
    summary["wcss"] = o.model.wcss;
    summary["clusters"] = kmeans::summary_to_json(o.summary);
    summary["overlaps"] = {
        {"hdi", kmeans::overlaps_to_json(kmeans::cluster_overlap_report(o.summary, kmeans::Axis::Hdi))},
        {"gdp", kmeans::overlaps_to_json(kmeans::cluster_overlap_report(o.summary, kmeans::Axis::Gdp))}};
    summary["assignment_check"] = o.assignment_check;
    write_json(out_dir / "cluster_summary.json", summary);

    std::ostringstream centroids;
    kmeans::write_centroids_csv(o.model, centroids);
    write_file(out_dir / "centroids.csv", centroids.str());
    write_json(out_dir / "cluster_model.json", kmeans::model_to_json(o.model));

    plot::ScatterOptions opts;
    opts.title = "K-means clusters of HDI and GDP, " + std::to_string(config.clustering_year);
    write_file(out_dir / "cluster_scatter.svg",
               plot::cluster_scatter_svg(o.data.points, o.model.assignments, kmeans::centroids_in_input_space(o.model),
                                         opts));
    return o;
}

eval::ConfusionMatrix read_predictions_matrix(const fs::path& path, std::size_t* skipped) {
    std::istringstream in(read_text(path));
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row)) throw_data("EmptyInput", path.string() + " is empty");
    std::optional<std::size_t> actual_col, predicted_col;
    for (std::size_t c = 0; c < row.fields.size(); ++c) {
        const auto name = trim(row.fields[c].text);
        if (name == "actual_category") actual_col = c;
        if (name == "predicted_category") predicted_col = c;
    }
    if (!actual_col || !predicted_col) {
        throw ParseError("MalformedHeader", path.string() + ": needs actual_category and predicted_category columns",
                         row.line, 0);
    }
    eval::ConfusionMatrix m;
    std::size_t skip = 0;
    while (reader.next(row)) {
        if (csv::is_blank(row)) continue;
        const std::size_t need = std::max(*actual_col, *predicted_col);
        if (row.fields.size() <= need) {
            throw ParseError("MalformedRow", path.string() + ": row too short", row.line, row.fields.size() + 1);
        }
        const auto actual_text = trim(row.fields[*actual_col].text);
        if (actual_text.empty()) {
            ++skip;  // no ground truth for this region
            continue;
        }
        auto actual = parse_category(actual_text);
        auto predicted = parse_category(trim(row.fields[*predicted_col].text));
        if (!actual) throw ParseError("UnknownCategory", path.string() + ": bad actual_category", row.line, *actual_col + 1);
        if (!predicted) {
            throw ParseError("UnknownCategory", path.string() + ": bad predicted_category", row.line,
                             *predicted_col + 1);
        }
        m.add(*actual, *predicted);
    }
    if (skipped) *skipped = skip;
    return m;
}

eval::ConfusionMatrix read_matrix_csv(const fs::path& path) {
    std::istringstream in(read_text(path));
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row)) throw_data("EmptyInput", path.string() + " is empty");
    std::vector<HdiCategory> columns;
    for (std::size_t c = 1; c < row.fields.size(); ++c) {
        auto cat = parse_category(trim(row.fields[c].text));
        if (!cat) throw ParseError("MalformedHeader", path.string() + ": unknown class in header", row.line, c + 1);
        columns.push_back(*cat);
    }
    std::vector<HdiCategory> row_classes;
    std::vector<std::vector<std::uint64_t>> counts;
    while (reader.next(row)) {
        if (csv::is_blank(row)) continue;
        if (row.fields.size() != columns.size() + 1) {
            throw ParseError("MalformedRow", path.string() + ": wrong number of cells", row.line, 0);
        }
        auto cat = parse_category(trim(row.fields[0].text));
        if (!cat) throw ParseError("UnknownCategory", path.string() + ": unknown class", row.line, 1);
        row_classes.push_back(*cat);
        std::vector<std::uint64_t> r;
        for (std::size_t c = 1; c < row.fields.size(); ++c) {
            auto v = parse_integer(trim(row.fields[c].text));
            if (!v || *v < 0) throw ParseError("UnparsableCell", path.string() + ": bad count", row.line, c + 1);
            r.push_back(static_cast<std::uint64_t>(*v));
        }
        counts.push_back(std::move(r));
    }
    if (row_classes != columns) {
        throw_data("MalformedMatrix", path.string() + ": row classes must match header classes in the same order");
    }
    return eval::from_counts(columns, counts);
}

EvaluateOutcome run_evaluate(const PipelineConfig& config, const eval::ConfusionMatrix& matrix,
                             const fs::path& out_dir) {
    EvaluateOutcome o;
    o.matrix = matrix;
    o.metrics = eval::metrics(matrix);
    o.notes = eval::consistency_notes(matrix, config.stated_total, config.stated_correct);

    eval::RenderOptions ro;
    ro.order = config.display_order;
    write_file(out_dir / "confusion_matrix.txt", eval::render_text(matrix, ro));
    write_file(out_dir / "confusion_matrix.csv", eval::render_csv(matrix, ro));
    json j = eval::metrics_to_json(o.metrics);
    j["display_order"] = category_names(config.display_order);
    j["notes"] = o.notes;
    write_json(out_dir / "metrics.json", j);
    return o;
}

void run_report(const PipelineConfig& config, const fs::path& out_dir, std::ostream& log) {
    auto ing = run_ingest(config, out_dir / "ingest");
    auto cls = run_sweep(config, ing.table, out_dir / "classify", log);
    std::vector<HdiCategory> test_actual;
    for (auto i : cls.split.test) test_actual.push_back(cls.dataset.labels[i]);
    auto ev = run_evaluate(config, eval::confusion(test_actual, cls.test_predicted), out_dir / "evaluate");
    auto clu = run_cluster(config, ing.table, out_dir / "cluster");

    const auto& sweep = *cls.sweep;
    const auto& best = sweep.entries[sweep.best];
    std::size_t complete = 0;
    for (const auto& e : ing.report.entries) complete += e.complete ? 1 : 0;

    std::ostringstream md;
    md << "# HDI analysis report\n\n";
    md << "Input: `" << config.input << "`, seed " << config.seed << ".\n\n";
    md << "## Data\n\n";
    md << ing.table.regions().size() << " regions, " << ing.table.indicators().size() << " indicators, "
       << ing.table.years().size() << " years. " << complete << " of " << ing.report.entries.size()
       << " (indicator, year) pairs are complete.\n\n";
    md << "| indicator | year | coverage | complete |\n|---|---|---|---|\n";
    for (const auto& e : ing.report.entries) {
        md << "| " << e.indicator << " | " << e.year << " | " << format_fixed(e.coverage, 4) << " | "
           << (e.complete ? "yes" : "no") << " |\n";
    }
    md << "\n## Classification (" << config.classification_year << ")\n\n";
    md << cls.dataset.size() << " labelled regions, " << cls.split.train.size() << " train / " << cls.split.test.size()
       << " test. Mean " << ann::to_string(config.sweep.metric) << " per hidden size over "
       << config.sweep.runs_per_config << " runs:\n\n";
    md << "| hidden neurons | mean error | diverged runs |\n|---|---|---|\n";
    for (const auto& e : sweep.entries) {
        const auto diverged = std::count(e.diverged.begin(), e.diverged.end(), true);
        md << "| " << e.hidden_neurons << " | " << (std::isfinite(e.mean_error) ? format_fixed(e.mean_error, 6) : "inf")
           << " | " << diverged << " |\n";
    }
    md << "\nBest: " << best.hidden_neurons << " hidden neurons (run " << sweep.best_run << ").\n\n";
    md << "## Evaluation on the test split\n\n```\n" << eval::render_text(ev.matrix, {config.display_order, true})
       << "```\n\n";
    md << "Accuracy " << format_fixed(ev.metrics.accuracy, 4) << " (" << ev.metrics.correct << " of "
       << ev.metrics.total << "), prediction error " << eval::format_percent(ev.metrics.prediction_error_percent)
       << ".\n";
    for (const auto& n : ev.notes) md << "\nNote: " << n << '\n';
    md << "\n## Clustering (" << config.clustering_year << ", k = " << clu.model.k << ")\n\n";
    md << "| cluster | size | mean HDI | mean GDP | HDI category |\n|---|---|---|---|---|\n";
    for (std::size_t c = 0; c < clu.summary.clusters.size(); ++c) {
        const auto& s = clu.summary.clusters[c];
        md << "| " << c << " | " << s.size << " | " << format_fixed(s.mean_hdi, 2) << " | "
           << format_fixed(s.mean_gdp, 2) << " | " << hdi::to_string(s.hdi_category_of_mean) << " |\n";
    }
    md << "\nWCSS " << format_fixed(clu.model.wcss, 4) << ", " << (clu.model.converged ? "converged" : "not converged")
       << " after " << clu.model.iterations_run << " iterations. Assignment check "
       << format_fixed(clu.assignment_check, 4) << ". Scatter plot: `cluster/cluster_scatter.svg`.\n";
    write_file(out_dir / "report.md", md.str());

    json j;
    j["regions"] = ing.table.regions().size();
    j["complete_pairs"] = complete;
    j["classification"] = {{"year", config.classification_year},
                           {"best_hidden_neurons", best.hidden_neurons},
                           {"best_run", sweep.best_run},
                           {"best_mean_error", best.mean_error},
                           {"test_rows", cls.split.test.size()}};
    j["evaluation"] = eval::metrics_to_json(ev.metrics);
    j["evaluation"]["notes"] = ev.notes;
    j["clustering"] = {{"year", config.clustering_year},
                       {"k", clu.model.k},
                       {"wcss", clu.model.wcss},
                       {"converged", clu.model.converged},
                       {"assignment_check", clu.assignment_check}};
    write_json(out_dir / "report.json", j);
}

}  // namespace hdi::pipeline
