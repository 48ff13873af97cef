#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hdi/error.hpp"
#include "hdi/eval.hpp"
#include "hdi/features.hpp"
#include "hdi/kmeans.hpp"
#include "hdi/pipeline.hpp"
#include "hdi/synth.hpp"

namespace py = pybind11;

namespace {

hdi::Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    hdi::Matrix m(0, cols);
    for (const auto& r : rows) {
        if (r.size() != cols) throw py::value_error("rows must all have the same length");
        m.push_row(r);
    }
    return m;
}

std::vector<std::vector<double>> to_rows(const hdi::Matrix& m) {
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
    return out;
}

hdi::HdiCategory category_from(const std::string& name) {
    const auto c = hdi::parse_category(name);
    if (!c) throw py::value_error("unknown category '" + name + "'");
    return *c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "HDI classification and clustering toolkit";

    static py::exception<hdi::Error> error(m, "HdiError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const hdi::Error& e) {
            // Stable code first so callers can match on it.
            py::set_error(error, (e.code() + ": " + e.what()).c_str());
        }
    });

    m.def(
        "categorize",
        [](double hdi, double t1, double t2, double t3) {
            return std::string(hdi::to_string(hdi::features::categorize(hdi, {t1, t2, t3})));
        },
        py::arg("hdi"), py::arg("t1") = 60.0, py::arg("t2") = 70.0, py::arg("t3") = 80.0);

    m.def(
        "kmeans",
        [](const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed, std::size_t restarts,
           bool prescale) {
            hdi::kmeans::KMeansConfig cfg;
            cfg.k = k;
            cfg.seed = seed;
            cfg.restarts = restarts;
            cfg.prescale = prescale;
            const auto model = hdi::kmeans::kmeans_fit(to_matrix(points), cfg);
            py::dict out;
            out["assignments"] = model.assignments;
            out["centroids"] = to_rows(hdi::kmeans::centroids_in_input_space(model));
            out["wcss"] = model.wcss;
            out["wcss_trace"] = model.wcss_trace;
            out["iterations"] = model.iterations_run;
            out["converged"] = model.converged;
            return out;
        },
        py::arg("points"), py::arg("k") = 4, py::arg("seed") = 0, py::arg("restarts") = 10,
        py::arg("prescale") = false);

    m.def("adjusted_rand_index", [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        return hdi::eval::adjusted_rand_index(a, b);
    });

    m.def(
        "confusion_metrics",
        [](const std::vector<std::string>& classes, const std::vector<std::vector<std::uint64_t>>& rows) {
            std::vector<hdi::HdiCategory> cats;
            for (const auto& c : classes) cats.push_back(category_from(c));
            const auto matrix = hdi::eval::from_counts(cats, rows);
            return hdi::eval::metrics_to_json(hdi::eval::metrics(matrix)).dump();
        },
        py::arg("classes"), py::arg("rows"), "Metrics of a square count block, as a JSON string.");

    m.def("format_percent", &hdi::eval::format_percent);

    m.def(
        "planted_clusters",
        [](std::size_t n, std::uint64_t seed) {
            const auto p = hdi::synth::planted_hdi_gdp(n, seed);
            return py::make_tuple(to_rows(p.points), p.labels);
        },
        py::arg("n"), py::arg("seed"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<std::string> argv{"hdi"};
            argv.insert(argv.end(), args.begin(), args.end());
            std::ostringstream out;
            std::ostringstream err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = hdi::cli::run(argv, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs `hdi <args...>` in-process; returns (exit_code, stdout, stderr).");
}
