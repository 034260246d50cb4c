// Python bindings for the core operations: loading discrete datasets,
// fitting and evaluating (weighted) naive Bayes tables, the quasi-Newton
// optimizer, client partitioning, weight federation and the experiment
// harness. Thin wrappers only — all numerics live in the C++ library, so
// Python results are bit-identical to the CLI's.

#include <optional>
#include <utility>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fedbayes/dataset.hpp"
#include "fedbayes/errors.hpp"
#include "fedbayes/experiment.hpp"
#include "fedbayes/federation.hpp"
#include "fedbayes/naive_bayes.hpp"
#include "fedbayes/optimizer.hpp"
#include "fedbayes/rng.hpp"
#include "fedbayes/weighted.hpp"

namespace py = pybind11;
using namespace fedbayes;

namespace {

/// Fitted tables plus the schema they were fitted under; the schema makes
/// the model self-describing on the Python side.
struct Model {
    ParamTable params;
    Schema schema;
};

std::vector<std::size_t> rows_or_all(const Dataset& data,
                                     const std::optional<std::vector<std::size_t>>& rows) {
    if (rows) return *rows;
    std::vector<std::size_t> all(data.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
}

WeightVector weights_or_unit(const Model& model,
                             const std::optional<WeightVector>& weights) {
    return weights ? *weights : unit_weights(model.params.layout);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "federated discriminative naive Bayes core";
    m.attr("__version__") = "0.1.0";
    m.attr("UNCAPPED_ITERATIONS") = kUncappedIterations;

    py::register_exception<Error>(m, "FedbayesError", PyExc_RuntimeError);

    py::class_<Dataset>(m, "Dataset")
        .def_static(
            "from_arrays",
            [](std::vector<std::string> feature_names,
               std::vector<std::vector<std::string>> feature_values,
               std::vector<std::string> class_labels,
               std::vector<std::vector<std::int32_t>> x,
               std::vector<std::int32_t> y) {
                Schema schema{std::move(feature_names),
                              std::move(feature_values),
                              std::move(class_labels)};
                std::vector<std::int32_t> flat;
                flat.reserve(x.size() * schema.n_features());
                for (const auto& row : x) {
                    if (row.size() != schema.n_features())
                        throw SchemaError("row width does not match schema");
                    flat.insert(flat.end(), row.begin(), row.end());
                }
                return Dataset::from_arrays(std::move(schema), std::move(flat),
                                            std::move(y));
            },
            py::arg("feature_names"), py::arg("feature_values"),
            py::arg("class_labels"), py::arg("x"), py::arg("y"),
            "Build a dataset from pre-coded integer arrays (-1 = missing).")
        .def_property_readonly("rows", &Dataset::rows)
        .def_property_readonly("features", &Dataset::features)
        .def_property_readonly("classes", &Dataset::classes)
        .def_property_readonly(
            "feature_names",
            [](const Dataset& d) { return d.schema.feature_names; })
        .def_property_readonly(
            "feature_values",
            [](const Dataset& d) { return d.schema.feature_values; })
        .def_property_readonly(
            "class_labels",
            [](const Dataset& d) { return d.schema.class_labels; })
        .def("value", &Dataset::value, py::arg("row"), py::arg("feature"))
        .def("label", &Dataset::label, py::arg("row"))
        .def("is_missing", &Dataset::is_missing, py::arg("row"),
             py::arg("feature"))
        .def("row",
             [](const Dataset& d, std::size_t i) {
                 std::vector<std::int32_t> out(d.features());
                 for (std::size_t j = 0; j < out.size(); ++j)
                     out[j] = d.value(i, j);
                 return out;
             },
             py::arg("row"), "Feature codes of one instance.")
        .def("subset", &Dataset::subset, py::arg("rows"));

    m.def("load_data", &load_data, py::arg("path"), py::arg("header") = false,
          py::arg("class_col") = -1,
          "Load a .csv or .arff file of categorical data.");

    py::class_<Model>(m, "Model")
        .def_property_readonly(
            "dim", [](const Model& model) { return model.params.layout.dim(); })
        .def_property_readonly(
            "alpha", [](const Model& model) { return model.params.smoothing; })
        .def_property_readonly("log_prior",
                               [](const Model& model) {
                                   std::vector<double> out;
                                   for (std::size_t k = 0;
                                        k < model.schema.n_classes(); ++k)
                                       out.push_back(model.params.log_prior(k));
                                   return out;
                               })
        .def("log_cond",
             [](const Model& model, std::size_t feature, std::size_t value,
                std::size_t klass) {
                 return model.params.log_cond(feature, value, klass);
             },
             py::arg("feature"), py::arg("value"), py::arg("klass"))
        .def("predict",
             [](const Model& model, const std::vector<std::int32_t>& instance,
                const std::optional<WeightVector>& weights) {
                 if (weights)
                     return predict_weighted(model.params, *weights, instance);
                 return predict(model.params, instance);
             },
             py::arg("instance"), py::arg("weights") = py::none())
        .def("log_posterior",
             [](const Model& model, const std::vector<std::int32_t>& instance,
                const std::optional<WeightVector>& weights) {
                 return log_posterior(model.params,
                                      weights_or_unit(model, weights), instance);
             },
             py::arg("instance"), py::arg("weights") = py::none())
        .def("accuracy",
             [](const Model& model, const Dataset& data,
                const std::optional<std::vector<std::size_t>>& rows,
                const std::optional<WeightVector>& weights) {
                 auto idx = rows_or_all(data, rows);
                 if (weights)
                     return accuracy_weighted(model.params, *weights, data, idx);
                 return accuracy(model.params, data, idx);
             },
             py::arg("data"), py::arg("rows") = py::none(),
             py::arg("weights") = py::none())
        .def("cll",
             [](const Model& model, const Dataset& data,
                const std::optional<WeightVector>& weights,
                const std::optional<std::vector<std::size_t>>& rows) {
                 CllEvaluation eval =
                     cll(model.params, weights_or_unit(model, weights), data,
                         rows_or_all(data, rows));
                 return std::make_pair(eval.value, eval.gradient);
             },
             py::arg("data"), py::arg("weights") = py::none(),
             py::arg("rows") = py::none(),
             "Conditional log-likelihood and its gradient in the weights.")
        .def("to_json",
             [](const Model& model) {
                 return param_table_to_json(model.params, model.schema);
             })
        .def_static("from_json", [](const std::string& text, const Dataset& data) {
            return Model{param_table_from_json(text), data.schema};
        }, py::arg("text"), py::arg("data"));

    m.def(
        "fit",
        [](const Dataset& data, double alpha,
           const std::optional<std::vector<std::size_t>>& rows) {
            return Model{normalize(fit_counts(data, rows_or_all(data, rows)),
                                   alpha),
                         data.schema};
        },
        py::arg("data"), py::arg("alpha") = 1.0, py::arg("rows") = py::none(),
        "Fit naive Bayes tables with pseudo-count smoothing.");

    m.def(
        "minimize",
        [](const py::function& objective, std::vector<double> start,
           std::size_t max_iterations, std::size_t memory,
           double grad_tolerance) {
            Objective wrapped = [&objective](std::span<const double> x,
                                             std::span<double> grad) {
                std::vector<double> point(x.begin(), x.end());
                auto result =
                    objective(point)
                        .cast<std::pair<double, std::vector<double>>>();
                if (result.second.size() != grad.size())
                    throw OptimizerError(
                        "objective returned a gradient of wrong length");
                std::copy(result.second.begin(), result.second.end(),
                          grad.begin());
                return result.first;
            };
            OptimizerConfig config;
            config.max_iterations = max_iterations;
            config.memory = memory;
            config.grad_tolerance = grad_tolerance;
            OptimizeReport report = minimize(wrapped, std::move(start), config);
            py::dict out;
            out["x"] = report.final_point;
            out["iterations"] = report.iterations_used;
            out["trace"] = report.objective_trace;
            out["termination"] = termination_name(report.termination);
            return out;
        },
        py::arg("objective"), py::arg("start"), py::arg("max_iterations") = 5,
        py::arg("memory") = 10, py::arg("grad_tolerance") = 1e-5,
        "L-BFGS minimization of f(x) -> (value, gradient).");

    m.def("partition_clients", &partition_clients, py::arg("data"),
          py::arg("n_clients"), py::arg("seed"),
          py::arg("min_client_size") = 100,
          "Stratified disjoint client shards of row indices.");
    m.def("make_folds", &make_folds, py::arg("data"), py::arg("shard_rows"),
          py::arg("k_folds"), py::arg("seed"),
          "Stratified folds within one shard.");
    m.def("fold_complement", &fold_complement, py::arg("shard_rows"),
          py::arg("fold_rows"));
    m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("purpose"),
          py::arg("id"), "Decorrelated stream seed for a purpose tag.");
    m.def("init_global_weights", &init_global_weights, py::arg("dimension"),
          py::arg("seed"), "Uniform [0.5, 1.5) starting weights.");

    m.def(
        "federate",
        [](const Dataset& data, std::size_t n_clients, std::size_t rounds,
           std::size_t opt_iters, std::uint64_t seed, double alpha,
           std::size_t folds, std::size_t min_client_size, std::size_t threads,
           bool sample_weighted) {
            auto shards = partition_clients(
                data, n_clients, derive_seed(seed, "partition", n_clients),
                min_client_size);
            std::vector<ClientState> clients;
            clients.reserve(n_clients);
            for (std::size_t c = 0; c < n_clients; ++c) {
                auto client_folds = make_folds(data, shards[c], folds,
                                               derive_seed(seed, "folds", c));
                clients.push_back(
                    make_client(data, static_cast<std::uint32_t>(c),
                                fold_complement(shards[c], client_folds[0]),
                                client_folds[0], alpha));
            }
            FederationConfig config;
            config.rounds = rounds;
            config.opt.max_iterations = opt_iters;
            config.seed = seed;
            config.threads = threads;
            config.sample_weighted = sample_weighted;
            FederationResult result = run_federation(clients, data, config);

            py::list round_rows;
            for (const auto& record : result.records) {
                py::dict row;
                row["round"] = record.round;
                row["global_train_acc"] = record.global_train_acc;
                row["global_test_acc"] = record.global_test_acc;
                row["global_weights_norm"] = record.global_weights_norm;
                round_rows.append(row);
            }
            py::list client_rows;
            for (const auto& client : clients) {
                py::dict row;
                row["client_id"] = client.client_id;
                row["train_rows"] = client.train_rows;
                row["test_rows"] = client.test_rows;
                row["local_weights"] = client.local_weights;
                client_rows.append(row);
            }
            py::dict out;
            out["global_weights"] = result.global_weights;
            out["rounds"] = round_rows;
            out["clients"] = client_rows;
            return out;
        },
        py::arg("data"), py::arg("n_clients"), py::arg("rounds") = 50,
        py::arg("opt_iters") = 5, py::arg("seed") = 1, py::arg("alpha") = 1.0,
        py::arg("folds") = 5, py::arg("min_client_size") = 5,
        py::arg("threads") = 1, py::arg("sample_weighted") = false,
        "Run weight federation with fold 0 of each client held out; returns "
        "the final global weights, per-round accuracies and client states.");

    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            std::vector<SummaryRow> summary =
                run_experiment(config_from_json(config_json));
            py::list rows;
            for (const auto& row : summary) {
                py::dict item;
                item["dataset"] = row.dataset;
                item["model"] = row.model;
                item["clients"] = row.clients;
                item["mean_test_acc_pct"] = row.mean_test_pct;
                item["runs"] = row.runs;
                rows.append(item);
            }
            return rows;
        },
        py::arg("config_json"),
        "Run the benchmark grid described by a JSON config string; writes "
        "records.csv, summary.csv/.txt and traces under out_dir.");
}
