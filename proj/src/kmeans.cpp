#include "hdi/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hdi/csv.hpp"
#include "hdi/error.hpp"
#include "hdi/numfmt.hpp"
#include "hdi/rng.hpp"

namespace hdi::kmeans {

std::string_view to_string(InitMethod m) {
    switch (m) {
        case InitMethod::KMeansPlusPlus: return "kmeanspp";
        case InitMethod::Random: return "random";
        case InitMethod::Provided: return "provided";
    }
    return "?";
}

std::optional<InitMethod> parse_init(std::string_view text) {
    for (auto m : {InitMethod::KMeansPlusPlus, InitMethod::Random, InitMethod::Provided}) {
        if (to_string(m) == text) return m;
    }
    return std::nullopt;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

namespace {

std::size_t nearest(const Matrix& centroids, std::span<const double> point) {
    std::size_t best = 0;
    double best_d = squared_distance(centroids.row(0), point);
    for (std::size_t c = 1; c < centroids.rows(); ++c) {
        const double d = squared_distance(centroids.row(c), point);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

std::size_t distinct_rows(const Matrix& points) {
    std::vector<std::vector<double>> rows;
    rows.reserve(points.rows());
    for (std::size_t r = 0; r < points.rows(); ++r) rows.emplace_back(points.row(r).begin(), points.row(r).end());
    std::sort(rows.begin(), rows.end());
    return static_cast<std::size_t>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

Matrix init_kmeanspp(const Matrix& points, std::size_t k, Rng& rng) {
    const std::size_t n = points.rows();
    Matrix centroids(0, points.cols());
    centroids.push_row(points.row(rng.below(n)));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), centroids.row(0));
    while (centroids.rows() < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        const double target = rng.uniform() * total;
        std::size_t pick = n;
        double cumulative = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0) continue;
            cumulative += d2[i];
            pick = i;
            if (cumulative > target) break;
        }
        centroids.push_row(points.row(pick));
        const auto added = centroids.row(centroids.rows() - 1);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points.row(i), added));
    }
    return centroids;
}

Matrix init_random(const Matrix& points, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(points.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    idx.resize(k);
    return points.select_rows(idx);
}

void assign_all(const Matrix& points, const Matrix& centroids, std::vector<std::size_t>& labels) {
    labels.resize(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) labels[i] = nearest(centroids, points.row(i));
}

/// Gives each empty cluster the point farthest from the centroid of the
/// currently largest cluster; that point becomes the empty cluster's centroid.
void repair_empty(const Matrix& points, Matrix& centroids, std::vector<std::size_t>& labels) {
    const std::size_t k = centroids.rows();
    while (true) {
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t l : labels) ++sizes[l];
        const auto empty = std::find(sizes.begin(), sizes.end(), std::size_t{0});
        if (empty == sizes.end()) return;
        const auto largest = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
        std::size_t far = points.rows();
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.rows(); ++i) {
            if (labels[i] != largest) continue;
            const double d = squared_distance(points.row(i), centroids.row(largest));
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        const auto target = static_cast<std::size_t>(empty - sizes.begin());
        labels[far] = target;
        std::copy(points.row(far).begin(), points.row(far).end(), centroids.row(target).begin());
    }
}

Matrix member_means(const Matrix& points, std::span<const std::size_t> labels, const Matrix& previous) {
    const std::size_t k = previous.rows();
    Matrix sums(k, points.cols(), 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        auto s = sums.row(labels[i]);
        const auto p = points.row(i);
        for (std::size_t d = 0; d < p.size(); ++d) s[d] += p[d];
        ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        auto s = sums.row(c);
        if (counts[c] == 0) {
            std::copy(previous.row(c).begin(), previous.row(c).end(), s.begin());
            continue;
        }
        for (double& v : s) v /= static_cast<double>(counts[c]);
    }
    return sums;
}

void relabel_by_first_coordinate(ClusterModel& model) {
    std::vector<std::size_t> order(model.k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return model.centroids(a, 0) < model.centroids(b, 0); });
    std::vector<std::size_t> new_index(model.k);
    for (std::size_t pos = 0; pos < model.k; ++pos) new_index[order[pos]] = pos;
    model.centroids = model.centroids.select_rows(order);
    for (auto& a : model.assignments) a = new_index[a];
}

}  // namespace

double compute_wcss(const Matrix& points, const Matrix& centroids, std::span<const std::size_t> assignments) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
        total += squared_distance(points.row(i), centroids.row(assignments[i]));
    }
    return total;
}

namespace {

ClusterModel lloyd(const Matrix& work, Matrix centroids, const KMeansConfig& config) {
    const std::size_t k = centroids.rows();
    ClusterModel model;
    std::vector<std::size_t> labels;
    std::vector<std::size_t> next_labels;
    assign_all(work, centroids, labels);
    repair_empty(work, centroids, labels);

    while (model.iterations_run < config.max_iters) {
        ++model.iterations_run;
        Matrix updated = member_means(work, labels, centroids);
        double movement = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            movement = std::max(movement, std::sqrt(squared_distance(updated.row(c), centroids.row(c))));
        }
        centroids = std::move(updated);
        model.wcss_trace.push_back(compute_wcss(work, centroids, labels));

        assign_all(work, centroids, next_labels);
        repair_empty(work, centroids, next_labels);
        const bool stable = next_labels == labels;
        labels.swap(next_labels);
        if (stable && movement <= config.tol) {
            model.converged = true;
            break;
        }
    }

    model.centroids = std::move(centroids);
    model.assignments = std::move(labels);
    model.wcss = compute_wcss(work, model.centroids, model.assignments);
    return model;
}

}  // namespace

ClusterModel kmeans_fit(const Matrix& points, const KMeansConfig& config) {
    const std::size_t n = points.rows();
    const std::size_t k = config.k;
    if (k < 1) throw_usage("InvalidArgument", "k must be at least 1");
    if (!(config.tol >= 0.0)) throw_usage("InvalidArgument", "tol must be non-negative");
    if (config.restarts < 1) throw_usage("InvalidArgument", "restarts must be at least 1");
    if (n < k) {
        throw_data("TooFewPoints", "k-means with k=" + std::to_string(k) + " needs at least " + std::to_string(k) +
                                       " points, got " + std::to_string(n));
    }
    for (double v : points.data()) {
        if (!std::isfinite(v)) throw_data("NonFiniteInput", "clustering input contains a non-finite value");
    }
    if (const std::size_t distinct = distinct_rows(points); distinct < k) {
        throw_data("DegenerateInput", "only " + std::to_string(distinct) + " distinct points for k=" +
                                          std::to_string(k) + "; no partition into k non-empty clusters with "
                                          "distinct centroids exists");
    }

    ClusterModel model;
    model.k = k;
    Matrix work = points;
    if (config.prescale) {
        model.scaling = features::fit_scaling(points, features::ScalingMethod::MinMax);
        work = model.scaling->apply(points);
    }

    const std::size_t runs = config.init == InitMethod::Provided ? 1 : config.restarts;
    for (std::size_t r = 0; r < runs; ++r) {
        Rng rng(r == 0 ? config.seed : derive_seed(config.seed, r));
        Matrix centroids;
        switch (config.init) {
            case InitMethod::KMeansPlusPlus: centroids = init_kmeanspp(work, k, rng); break;
            case InitMethod::Random: centroids = init_random(work, k, rng); break;
            case InitMethod::Provided:
                if (config.provided_centroids.rows() != k || config.provided_centroids.cols() != work.cols()) {
                    throw_usage("InvalidArgument", "provided centroids must be " + std::to_string(k) + " x " +
                                                       std::to_string(work.cols()));
                }
                centroids = config.provided_centroids;
                break;
        }
        ClusterModel run = lloyd(work, std::move(centroids), config);
        // Strictly lower WCSS wins, so earlier restarts keep ties.
        if (r == 0 || run.wcss < model.wcss) {
            run.k = k;
            run.scaling = model.scaling;
            model = std::move(run);
        }
    }
    relabel_by_first_coordinate(model);
    return model;
}

Matrix to_model_space(const ClusterModel& model, const Matrix& raw_points) {
    return model.scaling ? model.scaling->apply(raw_points) : raw_points;
}

Matrix centroids_in_input_space(const ClusterModel& model) {
    return model.scaling ? model.scaling->invert(model.centroids) : model.centroids;
}

std::size_t assign(const ClusterModel& model, std::span<const double> point) {
    if (point.size() != model.centroids.cols()) {
        throw_data("DimensionMismatch", "point has " + std::to_string(point.size()) + " coordinates, model has " +
                                            std::to_string(model.centroids.cols()));
    }
    for (double v : point) {
        if (!std::isfinite(v)) throw_data("NonFiniteInput", "point contains a non-finite value");
    }
    if (!model.scaling) return nearest(model.centroids, point);
    std::vector<double> scaled(point.size());
    for (std::size_t d = 0; d < point.size(); ++d) scaled[d] = model.scaling->columns[d].apply(point[d]);
    return nearest(model.centroids, scaled);
}

ClusterSummary summarize(const ClusterModel& model, const Matrix& raw_points,
                         const features::CategoryThresholds& thresholds) {
    if (raw_points.rows() != model.assignments.size() || raw_points.cols() < 2) {
        throw_data("LengthMismatch", "summary needs one (HDI, GDP) row per assignment: " +
                                         std::to_string(raw_points.rows()) + " rows vs " +
                                         std::to_string(model.assignments.size()) + " assignments");
    }
    ClusterSummary summary;
    summary.clusters.resize(model.k);
    std::vector<double> hdi_sum(model.k, 0.0);
    std::vector<double> gdp_sum(model.k, 0.0);
    for (std::size_t i = 0; i < raw_points.rows(); ++i) {
        auto& s = summary.clusters[model.assignments[i]];
        const double hdi = raw_points(i, 0);
        const double gdp = raw_points(i, 1);
        if (s.size == 0) {
            s.hdi_range = {hdi, hdi};
            s.gdp_range = {gdp, gdp};
        }
        ++s.size;
        hdi_sum[model.assignments[i]] += hdi;
        gdp_sum[model.assignments[i]] += gdp;
        s.hdi_range = {std::min(s.hdi_range.min, hdi), std::max(s.hdi_range.max, hdi)};
        s.gdp_range = {std::min(s.gdp_range.min, gdp), std::max(s.gdp_range.max, gdp)};
    }
    for (std::size_t c = 0; c < model.k; ++c) {
        auto& s = summary.clusters[c];
        if (s.size == 0) continue;
        s.mean_hdi = hdi_sum[c] / static_cast<double>(s.size);
        s.mean_gdp = gdp_sum[c] / static_cast<double>(s.size);
        s.hdi_category_of_mean = features::categorize(s.mean_hdi, thresholds);
    }
    return summary;
}

std::vector<Overlap> cluster_overlap_report(const ClusterSummary& summary, Axis axis) {
    std::vector<Overlap> out;
    const auto& cs = summary.clusters;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        for (std::size_t j = i + 1; j < cs.size(); ++j) {
            const Range a = axis == Axis::Hdi ? cs[i].hdi_range : cs[i].gdp_range;
            const Range b = axis == Axis::Hdi ? cs[j].hdi_range : cs[j].gdp_range;
            const double lo = std::max(a.min, b.min);
            const double hi = std::min(a.max, b.max);
            if (lo <= hi) out.push_back(Overlap{i, j, {lo, hi}});
        }
    }
    return out;
}

nlohmann::json summary_to_json(const ClusterSummary& summary) {
    nlohmann::json clusters = nlohmann::json::array();
    for (std::size_t c = 0; c < summary.clusters.size(); ++c) {
        const auto& s = summary.clusters[c];
        clusters.push_back({{"cluster", c},
                            {"size", s.size},
                            {"mean_hdi", s.mean_hdi},
                            {"mean_gdp", s.mean_gdp},
                            {"hdi_category_of_mean", std::string(to_string(s.hdi_category_of_mean))},
                            {"hdi_range", {s.hdi_range.min, s.hdi_range.max}},
                            {"gdp_range", {s.gdp_range.min, s.gdp_range.max}}});
    }
    return clusters;
}

nlohmann::json overlaps_to_json(const std::vector<Overlap>& overlaps) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& o : overlaps) {
        out.push_back({{"clusters", {o.first, o.second}}, {"interval", {o.interval.min, o.interval.max}}});
    }
    return out;
}

void write_centroids_csv(const ClusterModel& model, std::ostream& out) {
    std::vector<std::string> header{"cluster"};
    if (model.centroids.cols() == 2) {
        header.insert(header.end(), {"hdi", "gdp"});
    } else {
        for (std::size_t d = 0; d < model.centroids.cols(); ++d) header.push_back("x" + std::to_string(d));
    }
    out << csv::join(header) << '\n';
    for (std::size_t c = 0; c < model.centroids.rows(); ++c) {
        out << c;
        for (double v : model.centroids.row(c)) out << ',' << format_shortest(v);
        out << '\n';
    }
}

Matrix read_centroids_csv(std::istream& in) {
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row) || row.fields.size() < 2) {
        throw ParseError("MalformedHeader", "centroid CSV needs a header cluster,<coordinates...>", 1, 0);
    }
    const std::size_t width = row.fields.size();
    Matrix out(0, width - 1);
    while (reader.next(row)) {
        if (csv::is_blank(row)) continue;
        if (row.fields.size() != width) {
            throw ParseError("MalformedRow", "centroid row has wrong field count", row.line, 0);
        }
        std::vector<double> values;
        for (std::size_t c = 1; c < width; ++c) {
            auto v = parse_decimal(trim(row.fields[c].text));
            if (!v) throw ParseError("UnparsableCell", "unparsable centroid coordinate", row.line, c + 1);
            values.push_back(*v);
        }
        out.push_row(values);
    }
    return out;
}

nlohmann::json model_to_json(const ClusterModel& model) {
    nlohmann::json centroids = nlohmann::json::array();
    for (std::size_t c = 0; c < model.centroids.rows(); ++c) {
        centroids.push_back(std::vector<double>(model.centroids.row(c).begin(), model.centroids.row(c).end()));
    }
    nlohmann::json j = {{"k", model.k},
                        {"centroids", centroids},
                        {"assignments", model.assignments},
                        {"iterations_run", model.iterations_run},
                        {"converged", model.converged},
                        {"wcss", model.wcss},
                        {"wcss_trace", model.wcss_trace}};
    j["scaling"] = model.scaling ? features::scaling_to_json(*model.scaling) : nlohmann::json(nullptr);
    return j;
}

}  // namespace hdi::kmeans
