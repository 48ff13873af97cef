#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hdi/ann.hpp"
#include "hdi/error.hpp"
#include "hdi/rng.hpp"
#include "hdi/synth.hpp"
#include "oracles.hpp"

using namespace hdi;
using namespace hdi::ann;

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

struct Batch {
    Matrix x;
    std::vector<std::size_t> y;
};

Batch random_batch(std::size_t rows, std::size_t dims, std::size_t classes, std::uint64_t seed) {
    Rng rng(seed);
    Batch b{Matrix(rows, dims), {}};
    for (double& v : b.x.data()) v = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < rows; ++i) b.y.push_back(rng.below(classes));
    return b;
}

double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

}  // namespace

TEST(Ann, InitShapesAndBounds) {
    const auto m = init_network({5, 13, 4}, Activation::Sigmoid, 9);
    ASSERT_EQ(m.weights.size(), 2u);
    EXPECT_EQ(m.weights[0].rows(), 13u);
    EXPECT_EQ(m.weights[0].cols(), 5u);
    EXPECT_EQ(m.weights[1].rows(), 4u);
    EXPECT_EQ(m.parameter_count(), 13u * 5 + 13 + 4u * 13 + 4);
    const double limit0 = std::sqrt(6.0 / 18.0);
    for (double w : m.weights[0].data()) EXPECT_LE(std::abs(w), limit0);
    for (const auto& b : m.biases)
        for (double v : b) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(init_network({5, 13, 4}, Activation::Sigmoid, 9), m);
    EXPECT_NE(init_network({5, 13, 4}, Activation::Sigmoid, 10), m);
    EXPECT_EQ(error_code([] { init_network({5, 4}); }), "BadTopology");
    EXPECT_EQ(error_code([] { init_network({5, 0, 4}); }), "BadTopology");
}

TEST(Ann, HandComputedForwardPass) {
    NetworkModel m = init_network({2, 2, 2});
    m.weights[0](0, 0) = 0.5;
    m.weights[0](0, 1) = -1.0;
    m.weights[0](1, 0) = 2.0;
    m.weights[0](1, 1) = 0.25;
    m.biases[0] = {0.1, -0.3};
    m.weights[1](0, 0) = 1.0;
    m.weights[1](0, 1) = -2.0;
    m.weights[1](1, 0) = 0.5;
    m.weights[1](1, 1) = 1.5;
    m.biases[1] = {0.2, -0.1};
    const double x[2] = {1.0, 2.0};
    // Hidden pre-activations: 0.5 - 2 + 0.1 = -1.4 and 2 + 0.5 - 0.3 = 2.2.
    const double h0 = 1.0 / (1.0 + std::exp(1.4));
    const double h1 = 1.0 / (1.0 + std::exp(-2.2));
    const double z0 = h0 - 2.0 * h1 + 0.2;
    const double z1 = 0.5 * h0 + 1.5 * h1 - 0.1;
    const double p0 = std::exp(z0) / (std::exp(z0) + std::exp(z1));
    const auto p = forward(m, x);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_NEAR(p[0], p0, 1e-12);
    EXPECT_NEAR(p[1], 1.0 - p0, 1e-12);
    const auto z = forward_logits(m, x);
    EXPECT_NEAR(z[0], z0, 1e-12);
    EXPECT_NEAR(z[1], z1, 1e-12);
}

TEST(Ann, SoftmaxSumsToOneProperty) {
    Rng rng(21);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto m = init_network({5, 10 + seed % 11, 4}, seed % 2 ? Activation::Tanh : Activation::Sigmoid, seed);
        for (int i = 0; i < 10; ++i) {
            std::vector<double> x(5);
            for (double& v : x) v = rng.uniform(-50.0, 50.0);
            const auto p = forward(m, x);
            double sum = 0.0;
            for (double v : p) {
                EXPECT_GE(v, 0.0);
                sum += v;
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
    }
}

TEST(Ann, ForwardRejectsBadInput) {
    const auto m = init_network({5, 10, 4});
    const std::vector<double> short_row(4, 0.0);
    EXPECT_EQ(error_code([&] { forward(m, short_row); }), "DimensionMismatch");
    std::vector<double> nan_row(5, 0.0);
    nan_row[3] = std::nan("");
    EXPECT_EQ(error_code([&] { forward(m, nan_row); }), "NonFiniteInput");
}

TEST(Ann, GradientsMatchCentralDifferences) {
    for (std::size_t hidden : {10u, 13u, 16u, 20u}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            NetworkModel m = init_network({5, hidden, 4}, Activation::Sigmoid, 100 + seed);
            Rng rng(seed);
            for (auto& b : m.biases)
                for (double& v : b) v = rng.uniform(-0.5, 0.5);
            const auto batch = random_batch(8, 5, 4, seed);
            Gradients g;
            loss_and_gradients(m, batch.x, batch.y, g);
            auto f = [&] { return loss(m, batch.x, batch.y); };
            for (std::size_t l = 0; l < m.weights.size(); ++l) {
                for (std::size_t i = 0; i < m.weights[l].data().size(); ++i) {
                    const double numeric = oracle::central_difference(f, m.weights[l].data()[i], 1e-5);
                    EXPECT_LT(rel_error(g.weights[l].data()[i], numeric), 1e-4) << "layer " << l << " w" << i;
                }
                for (std::size_t i = 0; i < m.biases[l].size(); ++i) {
                    const double numeric = oracle::central_difference(f, m.biases[l][i], 1e-5);
                    EXPECT_LT(rel_error(g.biases[l][i], numeric), 1e-4) << "layer " << l << " b" << i;
                }
            }
        }
    }
}

TEST(Ann, TanhGradientsAndDeeperNetwork) {
    NetworkModel m = init_network({3, 6, 5, 4}, Activation::Tanh, 5);
    const auto batch = random_batch(6, 3, 4, 5);
    Gradients g;
    loss_and_gradients(m, batch.x, batch.y, g);
    auto f = [&] { return loss(m, batch.x, batch.y); };
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        for (std::size_t i = 0; i < m.weights[l].data().size(); ++i) {
            const double numeric = oracle::central_difference(f, m.weights[l].data()[i], 1e-5);
            EXPECT_LT(rel_error(g.weights[l].data()[i], numeric), 1e-4);
        }
    }
}

TEST(Ann, TrainingReducesLossAndIsDeterministic) {
    const auto data = synth::linear_separable(120, 5, 4, 3);
    TrainConfig cfg;
    cfg.epochs = 300;
    const auto a = train(init_network({5, 10, 4}, Activation::Sigmoid, 1), data.features, data.labels, cfg);
    ASSERT_EQ(a.trace.size(), 300u);
    EXPECT_LT(a.trace.back(), a.trace.front());
    const auto b = train(init_network({5, 10, 4}, Activation::Sigmoid, 1), data.features, data.labels, cfg);
    EXPECT_EQ(a.model, b.model);
    EXPECT_EQ(a.trace, b.trace);
}

TEST(Ann, MiniBatchIsSeededAndDeterministic) {
    const auto data = synth::linear_separable(90, 5, 4, 8);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.batch_mode = BatchMode::MiniBatch;
    cfg.batch_size = 16;
    cfg.shuffle = true;
    cfg.seed = 4;
    const auto a = train(init_network({5, 10, 4}, Activation::Sigmoid, 2), data.features, data.labels, cfg);
    const auto b = train(init_network({5, 10, 4}, Activation::Sigmoid, 2), data.features, data.labels, cfg);
    EXPECT_EQ(a.model, b.model);
    cfg.seed = 5;
    const auto c = train(init_network({5, 10, 4}, Activation::Sigmoid, 2), data.features, data.labels, cfg);
    EXPECT_NE(a.model, c.model);
}

TEST(Ann, DivergenceIsReportedWithEpoch) {
    const auto data = synth::linear_separable(50, 5, 4, 3);
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.learning_rate = 1e308;  // logits overflow once weights near the double limit
    try {
        train(init_network({5, 10, 4}, Activation::Sigmoid, 1), data.features, data.labels, cfg);
        FAIL() << "expected divergence";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Numeric);
        EXPECT_EQ(e.code(), "DivergedLoss");
        EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
    }
}

TEST(Ann, TrainConfigValidation) {
    TrainConfig cfg;
    cfg.learning_rate = -1.0;
    EXPECT_EQ(error_code([&] { cfg.validate(); }), "InvalidTrainConfig");
    cfg = {};
    cfg.epochs = 0;
    EXPECT_EQ(error_code([&] { cfg.validate(); }), "InvalidTrainConfig");
}

TEST(Ann, ArgmaxTiesGoLow) {
    const std::vector<double> v{0.2, 0.4, 0.4, 0.0};
    EXPECT_EQ(argmax(v), 1u);
}

TEST(Ann, ErrorMetrics) {
    NetworkModel m = init_network({2, 2, 4});
    for (auto& w : m.weights) w = Matrix(w.rows(), w.cols(), 0.0);
    Matrix x(3, 2, 0.0);
    std::vector<std::size_t> y{0, 1, 2};
    // Uniform outputs: argmax 0, so one of three rows is right.
    EXPECT_EQ(evaluate_error(m, x, y, ErrorMetric::MisclassificationCount), 2.0);
    EXPECT_NEAR(evaluate_error(m, x, y, ErrorMetric::Sse), 3 * (0.75 * 0.75 + 3 * 0.0625), 1e-12);
    EXPECT_NEAR(evaluate_error(m, x, y, ErrorMetric::CrossEntropy), std::log(4.0), 1e-12);
    for (auto metric : {ErrorMetric::MisclassificationCount, ErrorMetric::Sse, ErrorMetric::CrossEntropy}) {
        EXPECT_EQ(parse_error_metric(to_string(metric)), metric);
    }
}

TEST(Ann, SweepMeanIsExactAndBestIsMinimum) {
    const auto data = synth::linear_separable(80, 5, 4, 2);
    features::LabeledDataset ds;
    ds.features = data.features;
    ds.raw_features = data.features;
    for (auto l : data.labels) ds.labels.push_back(category_at(l));
    ds.region_ids.assign(ds.labels.size(), "r");
    SweepConfig sc;
    sc.hidden_sizes = {3, 6};
    sc.runs_per_config = 3;
    sc.seed_base = 10;
    TrainConfig tc;
    tc.epochs = 40;
    const auto r = sweep(ds, features::SplitSpec{0.25, 1, true}, sc, tc);
    ASSERT_EQ(r.entries.size(), 2u);
    for (const auto& e : r.entries) {
        ASSERT_EQ(e.run_errors.size(), 3u);
        double s = 0.0;
        for (double v : e.run_errors) s += v;
        EXPECT_EQ(e.mean_error, s / 3.0);
        EXPECT_GE(e.mean_error, r.entries[r.best].mean_error);
    }
    // Parallel workers give the same answer.
    sc.jobs = 3;
    const auto p = sweep(ds, features::SplitSpec{0.25, 1, true}, sc, tc);
    std::ostringstream a, b;
    write_sweep_csv(r, a);
    write_sweep_csv(p, b);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(r.best_model, p.best_model);
}

TEST(Ann, SweepSummaryWritesInfinityAsString) {
    SweepResult r;
    r.entries.push_back({10, {1.0, std::numeric_limits<double>::infinity()}, {false, true},
                         std::numeric_limits<double>::infinity()});
    r.entries.push_back({13, {1.0, 2.0}, {false, false}, 1.5});
    r.best = 1;
    const auto j = sweep_summary_json(r, ErrorMetric::MisclassificationCount);
    EXPECT_NE(j.dump().find("\"inf\""), std::string::npos);
}

TEST(Ann, MeanOfSumsInOrder) {
    const std::vector<double> v{1e16, 1.0, -1e16, 1.0};
    EXPECT_EQ(mean_of(v), ((1e16 + 1.0) - 1e16 + 1.0) / 4.0);
}

TEST(Ann, ModelFileRoundTrip) {
    auto m = init_network({5, 16, 4}, Activation::Tanh, 77);
    m.scaling = features::fit_scaling(Matrix(3, 5, 1.0), features::ScalingMethod::MinMax);
    const std::string text = save_model_string(m);
    EXPECT_EQ(load_model_string(text), m);
    EXPECT_EQ(save_model_string(load_model_string(text)), text);
}

TEST(Ann, CorruptModelFilesAreRejected) {
    const std::string text = save_model_string(init_network({5, 10, 4}, Activation::Sigmoid, 1));
    EXPECT_EQ(error_code([] { load_model_string("not json"); }), "CorruptModelFile");
    std::string magic = text;
    magic.replace(magic.find("HDI-ANN-MODEL"), 3, "XYZ");
    EXPECT_EQ(error_code([&] { load_model_string(magic); }), "CorruptModelFile");
    // Flip one digit in the body so the checksum no longer matches.
    std::string tampered = text;
    const auto pos = tampered.find_first_of("123456789", tampered.find("\"weights\""));
    tampered[pos] = tampered[pos] == '9' ? '8' : static_cast<char>(tampered[pos] + 1);
    EXPECT_EQ(error_code([&] { load_model_string(tampered); }), "CorruptModelFile");
    auto j = nlohmann::json::parse(text);
    j["version"] = 99;
    EXPECT_EQ(error_code([&] { load_model_string(j.dump()); }), "CorruptModelFile");
}
