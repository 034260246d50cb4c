#include "fedbayes/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "fedbayes/errors.hpp"
#include "fedbayes/naive_bayes.hpp"
#include "fedbayes/optimizer.hpp"
#include "fedbayes/rng.hpp"
#include "fedbayes/weighted.hpp"

namespace fedbayes {
namespace {

using nlohmann::json;

const std::vector<std::string> kAlgorithms = {"nb", "nb_fed", "nbw", "fednbw"};

/// Display/sort order for model labels in summaries and traces. Labels
/// outside the list (nonstandard caps) sort after it, lexicographically.
const std::vector<std::string> kModelOrder = {
    "nb",         "nb_fed",      "nbw_5",       "nbw_inf",
    "fednbw_5_g", "fednbw_5_l",  "fednbw_inf_g", "fednbw_inf_l"};

std::size_t model_rank(const std::string& label) {
    for (std::size_t i = 0; i < kModelOrder.size(); ++i) {
        if (kModelOrder[i] == label) return i;
    }
    return kModelOrder.size();
}

bool model_less(const std::string& a, const std::string& b) {
    std::size_t ra = model_rank(a), rb = model_rank(b);
    if (ra != rb) return ra < rb;
    return a < b;
}

std::string cap_tag(std::size_t cap) {
    return cap >= kUncappedIterations ? "inf" : std::to_string(cap);
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

/// Shortest digit string that parses back to exactly the same double, so
/// downstream consumers of records.csv recompute identical statistics.
std::string fmt_exact(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

void require(bool ok, const std::string& what) {
    if (!ok) throw SchemaError(what);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

/// Negative conditional log-likelihood objective over fixed tables,
/// shared by the standalone weighted fit and nothing else (the federation
/// builds its own identical closure around client state).
Objective neg_cll_objective(const ParamTable& params, const Dataset& data,
                            const std::vector<std::size_t>& rows) {
    return [&params, &data, &rows](std::span<const double> w,
                                   std::span<double> grad) {
        WeightVector point(w.begin(), w.end());
        CllEvaluation eval = cll(params, point, data, rows);
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = -eval.gradient[i];
        return -eval.value;
    };
}

}  // namespace

void ExperimentConfig::validate() const {
    require(!datasets.empty(), "config: datasets must not be empty");
    require(!algorithms.empty(), "config: algorithms must not be empty");
    for (const auto& a : algorithms) {
        require(std::find(kAlgorithms.begin(), kAlgorithms.end(), a) !=
                    kAlgorithms.end(),
                "config: unknown algorithm '" + a + "'");
        require(std::count(algorithms.begin(), algorithms.end(), a) == 1,
                "config: duplicate algorithm '" + a + "'");
    }
    require(!client_counts.empty(), "config: client_counts must not be empty");
    for (std::size_t c : client_counts)
        require(c >= 1, "config: client counts must be >= 1");
    require(folds >= 2, "config: folds must be >= 2");
    require(repetitions >= 1, "config: repetitions must be >= 1");
    require(!opt_iters.empty(), "config: opt_iters must not be empty");
    require(rounds >= 1, "config: rounds must be >= 1");
    require(alpha >= 0.0, "config: alpha must be >= 0");
    require(threads >= 1, "config: threads must be >= 1");
    require(!out_dir.empty(), "config: out_dir must not be empty");
}

ExperimentConfig config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    require(doc.is_object(), "config: top level must be a JSON object");

    static const std::set<std::string> known = {
        "datasets",    "algorithms", "client_counts",   "folds",
        "repetitions", "master_seed", "opt_iters",      "rounds",
        "alpha",       "out_dir",    "min_client_size", "threads",
        "csv_header",  "class_col"};
    for (const auto& item : doc.items())
        require(known.count(item.key()) != 0,
                "config: unknown field '" + item.key() + "'");

    ExperimentConfig config;
    try {
        require(doc.contains("datasets"), "config: 'datasets' is required");
        config.datasets = doc["datasets"].get<std::vector<std::string>>();
        if (doc.contains("algorithms"))
            config.algorithms = doc["algorithms"].get<std::vector<std::string>>();
        if (doc.contains("client_counts"))
            config.client_counts =
                doc["client_counts"].get<std::vector<std::size_t>>();
        if (doc.contains("folds")) config.folds = doc["folds"].get<std::size_t>();
        if (doc.contains("repetitions"))
            config.repetitions = doc["repetitions"].get<std::size_t>();
        if (doc.contains("master_seed"))
            config.master_seed = doc["master_seed"].get<std::uint64_t>();
        if (doc.contains("opt_iters")) {
            config.opt_iters.clear();
            for (const auto& entry : doc["opt_iters"]) {
                if (entry.is_string()) {
                    require(entry.get<std::string>() == "inf",
                            "config: opt_iters entries must be integers or \"inf\"");
                    config.opt_iters.push_back(kUncappedIterations);
                } else {
                    config.opt_iters.push_back(entry.get<std::size_t>());
                }
            }
        }
        if (doc.contains("rounds"))
            config.rounds = doc["rounds"].get<std::size_t>();
        if (doc.contains("alpha")) config.alpha = doc["alpha"].get<double>();
        if (doc.contains("out_dir"))
            config.out_dir = doc["out_dir"].get<std::string>();
        if (doc.contains("min_client_size"))
            config.min_client_size = doc["min_client_size"].get<std::size_t>();
        if (doc.contains("threads"))
            config.threads = doc["threads"].get<std::size_t>();
        if (doc.contains("csv_header"))
            config.csv_header = doc["csv_header"].get<bool>();
        if (doc.contains("class_col"))
            config.class_col = doc["class_col"].get<int>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("config: ") + e.what());
    }
    config.validate();
    return config;
}

std::string config_to_json(const ExperimentConfig& config) {
    json doc;
    doc["datasets"] = config.datasets;
    doc["algorithms"] = config.algorithms;
    doc["client_counts"] = config.client_counts;
    doc["folds"] = config.folds;
    doc["repetitions"] = config.repetitions;
    doc["master_seed"] = config.master_seed;
    doc["opt_iters"] = json::array();
    for (std::size_t cap : config.opt_iters) {
        if (cap >= kUncappedIterations)
            doc["opt_iters"].push_back("inf");
        else
            doc["opt_iters"].push_back(cap);
    }
    doc["rounds"] = config.rounds;
    doc["alpha"] = config.alpha;
    doc["out_dir"] = config.out_dir;
    doc["min_client_size"] = config.min_client_size;
    doc["threads"] = config.threads;
    doc["csv_header"] = config.csv_header;
    doc["class_col"] = config.class_col;
    return doc.dump(2);
}

std::string model_label(const std::string& algorithm,
                        const std::string& variant) {
    return variant.empty() ? algorithm : algorithm + "_" + variant;
}

CellPlan plan_cell(const Dataset& data, const std::string& dataset_name,
                   std::size_t client_count, std::size_t repetition,
                   const ExperimentConfig& config) {
    // Seed chain: dataset name, then repetition, then purpose. Client c's
    // folds depend only on (dataset, repetition, c), so growing the client
    // grid never reshuffles the folds of clients that already existed.
    std::uint64_t ds_seed =
        derive_seed(config.master_seed, dataset_name.c_str(), 0);
    CellPlan plan;
    plan.rep_seed = derive_seed(ds_seed, "rep", repetition);
    plan.shards =
        partition_clients(data, client_count,
                          derive_seed(plan.rep_seed, "partition", client_count),
                          config.min_client_size);
    plan.folds.reserve(client_count);
    for (std::size_t c = 0; c < client_count; ++c) {
        plan.folds.push_back(make_folds(data, plan.shards[c], config.folds,
                                        derive_seed(plan.rep_seed, "folds", c)));
    }
    return plan;
}

CellResult run_cell(const Dataset& data, const std::string& dataset_name,
                    const std::string& algorithm, std::size_t opt_cap,
                    std::size_t client_count, std::size_t repetition,
                    const ExperimentConfig& config) {
    CellResult out;
    CellPlan plan;
    try {
        plan = plan_cell(data, dataset_name, client_count, repetition, config);
    } catch (const PartitionError& e) {
        out.skipped = true;
        out.skip_reason = e.what();
        return out;
    } catch (const FoldError& e) {
        out.skipped = true;
        out.skip_reason = e.what();
        return out;
    }

    auto add = [&](const std::string& variant, std::uint32_t client,
                   std::size_t fold, const char* split, double acc) {
        out.records.push_back({dataset_name, algorithm, variant, client_count,
                               repetition, client, fold, split, acc});
    };
    auto train_rows = [&](std::size_t c, std::size_t f) {
        return fold_complement(plan.shards[c], plan.folds[c][f]);
    };

    if (algorithm == "nb") {
        for (std::size_t f = 0; f < config.folds; ++f) {
            for (std::size_t c = 0; c < client_count; ++c) {
                std::vector<std::size_t> train = train_rows(c, f);
                ParamTable params =
                    normalize(fit_counts(data, train), config.alpha);
                add("", static_cast<std::uint32_t>(c), f, "train",
                    accuracy(params, data, train));
                add("", static_cast<std::uint32_t>(c), f, "test",
                    accuracy(params, data, plan.folds[c][f]));
            }
        }
    } else if (algorithm == "nb_fed") {
        for (std::size_t f = 0; f < config.folds; ++f) {
            std::vector<CountTable> tables;
            std::vector<std::vector<std::size_t>> trains;
            tables.reserve(client_count);
            trains.reserve(client_count);
            for (std::size_t c = 0; c < client_count; ++c) {
                trains.push_back(train_rows(c, f));
                tables.push_back(fit_counts(data, trains.back()));
            }
            ParamTable params = normalize(pool_counts(tables), config.alpha);
            for (std::size_t c = 0; c < client_count; ++c) {
                add("", static_cast<std::uint32_t>(c), f, "train",
                    accuracy(params, data, trains[c]));
                add("", static_cast<std::uint32_t>(c), f, "test",
                    accuracy(params, data, plan.folds[c][f]));
            }
        }
    } else if (algorithm == "nbw") {
        OptimizerConfig opt;
        opt.max_iterations = opt_cap;
        std::string tag = cap_tag(opt_cap);
        for (std::size_t f = 0; f < config.folds; ++f) {
            for (std::size_t c = 0; c < client_count; ++c) {
                std::vector<std::size_t> train = train_rows(c, f);
                ParamTable params =
                    normalize(fit_counts(data, train), config.alpha);
                OptimizeReport report =
                    minimize(neg_cll_objective(params, data, train),
                             unit_weights(params.layout), opt);
                add(tag, static_cast<std::uint32_t>(c), f, "train",
                    accuracy_weighted(params, report.final_point, data, train));
                add(tag, static_cast<std::uint32_t>(c), f, "test",
                    accuracy_weighted(params, report.final_point, data,
                                      plan.folds[c][f]));
            }
        }
    } else if (algorithm == "fednbw") {
        FederationConfig fed;
        fed.rounds = config.rounds;
        fed.opt.max_iterations = opt_cap;
        fed.threads = config.threads;
        std::string tag = cap_tag(opt_cap);
        for (std::size_t f = 0; f < config.folds; ++f) {
            std::vector<ClientState> clients;
            clients.reserve(client_count);
            for (std::size_t c = 0; c < client_count; ++c) {
                clients.push_back(make_client(data,
                                              static_cast<std::uint32_t>(c),
                                              train_rows(c, f),
                                              plan.folds[c][f], config.alpha));
            }
            // One init per (repetition, fold), shared across iteration caps
            // so the capped and uncapped runs are a paired comparison.
            fed.seed = derive_seed(plan.rep_seed, "fed", f);
            FederationResult result = run_federation(clients, data, fed);
            for (std::size_t c = 0; c < client_count; ++c) {
                add(tag + "_g", clients[c].client_id, f, "train",
                    accuracy_weighted(clients[c].params, result.global_weights,
                                      data, clients[c].train_rows));
                add(tag + "_g", clients[c].client_id, f, "test",
                    accuracy_weighted(clients[c].params, result.global_weights,
                                      data, clients[c].test_rows));
            }
            for (std::size_t c = 0; c < client_count; ++c) {
                WeightVector local =
                    personalize(clients[c], data, result.global_weights, fed.opt);
                add(tag + "_l", clients[c].client_id, f, "train",
                    accuracy_weighted(clients[c].params, local, data,
                                      clients[c].train_rows));
                add(tag + "_l", clients[c].client_id, f, "test",
                    accuracy_weighted(clients[c].params, local, data,
                                      clients[c].test_rows));
            }
            out.fold_rounds.push_back(std::move(result.records));
        }
    } else {
        throw SchemaError("run_cell: unknown algorithm '" + algorithm + "'");
    }
    return out;
}

std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& records) {
    struct Accum {
        double sum = 0.0;
        std::size_t n = 0;
    };
    // (dataset, model, clients) -> running mean input
    std::map<std::tuple<std::string, std::string, std::size_t>, Accum> cells;
    for (const auto& rec : records) {
        if (rec.split != "test") continue;
        Accum& a = cells[{rec.dataset, model_label(rec.algorithm, rec.variant),
                          rec.clients}];
        a.sum += rec.accuracy;
        a.n += 1;
    }

    std::vector<SummaryRow> rows;
    rows.reserve(cells.size());
    for (const auto& [key, accum] : cells) {
        rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key),
                        100.0 * accum.sum / static_cast<double>(accum.n),
                        accum.n});
    }
    std::sort(rows.begin(), rows.end(),
              [](const SummaryRow& a, const SummaryRow& b) {
                  if (a.dataset != b.dataset) return a.dataset < b.dataset;
                  if (a.model != b.model) return model_less(a.model, b.model);
                  return a.clients < b.clients;
              });

    // Cross-dataset mean of the per-dataset means, only meaningful once
    // two or more datasets contribute to a (model, clients) cell.
    std::map<std::pair<std::string, std::size_t>, Accum> means;
    for (const auto& row : rows) {
        Accum& a = means[{row.model, row.clients}];
        a.sum += row.mean_test_pct;
        a.n += 1;
    }
    std::vector<SummaryRow> mean_rows;
    for (const auto& [key, accum] : means) {
        if (accum.n < 2) continue;
        mean_rows.push_back({"Mean", key.first, key.second,
                             accum.sum / static_cast<double>(accum.n),
                             accum.n});
    }
    std::sort(mean_rows.begin(), mean_rows.end(),
              [](const SummaryRow& a, const SummaryRow& b) {
                  if (a.model != b.model) return model_less(a.model, b.model);
                  return a.clients < b.clients;
              });
    rows.insert(rows.end(), mean_rows.begin(), mean_rows.end());
    return rows;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "dataset,model,clients,mean_test_acc_pct,runs\n";
    for (const auto& row : rows) {
        out += row.dataset + ',' + row.model + ',' +
               std::to_string(row.clients) + ',' +
               fmt("%.4f", row.mean_test_pct) + ',' +
               std::to_string(row.runs) + '\n';
    }
    return out;
}

std::string summary_to_text(const std::vector<SummaryRow>& rows) {
    std::vector<std::array<std::string, 5>> table;
    table.push_back({"dataset", "model", "clients", "test_acc", "runs"});
    for (const auto& row : rows) {
        table.push_back({row.dataset, row.model, std::to_string(row.clients),
                         fmt("%.2f", row.mean_test_pct),
                         std::to_string(row.runs)});
    }
    std::array<std::size_t, 5> width{};
    for (const auto& line : table)
        for (std::size_t i = 0; i < 5; ++i)
            width[i] = std::max(width[i], line[i].size());

    std::string out;
    for (const auto& line : table) {
        for (std::size_t i = 0; i < 5; ++i) {
            if (i > 0) out += "  ";
            out += line[i];
            // right-align numbers, left-align names
            std::size_t pad = width[i] - line[i].size();
            if (i < 2)
                out.append(pad, ' ');
            else
                out.insert(out.size() - line[i].size(), pad, ' ');
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    }
    return out;
}

std::string records_to_csv(const std::vector<MetricsRecord>& records) {
    std::string out =
        "dataset,algorithm,variant,clients,repetition,client_id,fold,split,"
        "accuracy\n";
    for (const auto& r : records) {
        out += r.dataset + ',' + r.algorithm + ',' + r.variant + ',' +
               std::to_string(r.clients) + ',' + std::to_string(r.repetition) +
               ',' + std::to_string(r.client_id) + ',' +
               std::to_string(r.fold) + ',' + r.split + ',' +
               fmt_exact(r.accuracy) + '\n';
    }
    return out;
}

std::vector<MetricsRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("records: empty input");
    if (line ==
        "dataset,algorithm,variant,clients,repetition,client_id,fold,split,"
        "accuracy") {
        // header consumed
    } else {
        throw ParseError("records: unexpected header '" + line + "'");
    }
    std::vector<MetricsRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 9)
            throw ParseError("records: expected 9 fields, got " +
                                 std::to_string(f.size()),
                             static_cast<long>(line_no));
        try {
            records.push_back({f[0], f[1], f[2], std::stoul(f[3]),
                               std::stoul(f[4]),
                               static_cast<std::uint32_t>(std::stoul(f[5])),
                               std::stoul(f[6]), f[7], std::stod(f[8])});
        } catch (const std::exception&) {
            throw ParseError("records: malformed numeric field",
                             static_cast<long>(line_no));
        }
    }
    return records;
}

std::string trace_to_csv(const TraceTable& table) {
    std::string out = "round,model,train_acc,test_acc\n";
    for (std::size_t i = 0; i < table.models.size(); ++i) {
        const auto& train = table.train_curves[i];
        const auto& test = table.test_curves[i];
        for (std::size_t r = 0; r < train.size(); ++r) {
            out += std::to_string(r + 1) + ',' + table.models[i] + ',' +
                   fmt("%.6f", train[r]) + ',' + fmt("%.6f", test[r]) + '\n';
        }
    }
    return out;
}

namespace {

struct CurveAccum {
    std::vector<double> train_sum;
    std::vector<double> test_sum;
    std::size_t n = 0;
};

struct MeanAccum {
    double train_sum = 0.0;
    std::size_t train_n = 0;
    double test_sum = 0.0;
    std::size_t test_n = 0;
};

}  // namespace

std::vector<SummaryRow> run_experiment(const ExperimentConfig& config) {
    config.validate();
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    fs::create_directories(config.out_dir + "/traces");

    struct Loaded {
        std::string name;
        const Dataset* data;
    };
    std::vector<Dataset> storage;
    storage.reserve(config.datasets.size());
    std::vector<Loaded> datasets;
    for (const auto& path : config.datasets) {
        std::string name = fs::path(path).stem().string();
        for (const auto& seen : datasets)
            require(seen.name != name,
                    "config: duplicate dataset name '" + name + "'");
        storage.push_back(load_data(path, config.csv_header, config.class_col));
        datasets.push_back({std::move(name), &storage.back()});
    }

    std::ofstream skip_log(config.out_dir + "/skipped_cells.log");
    if (!skip_log)
        throw IoError("cannot write " + config.out_dir + "/skipped_cells.log");

    std::vector<MetricsRecord> records;
    // (dataset, clients) -> per federated model, the running round curves
    std::map<std::pair<std::string, std::size_t>,
             std::map<std::string, CurveAccum>>
        curves;

    for (const auto& ds : datasets) {
        for (std::size_t n_clients : config.client_counts) {
            for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
                // Feasibility is a property of the geometry alone; probe it
                // once so a too-small shard logs a single line, not one per
                // algorithm.
                try {
                    plan_cell(*ds.data, ds.name, n_clients, rep, config);
                } catch (const Error& e) {
                    skip_log << ds.name << ",clients=" << n_clients
                             << ",repetition=" << rep << ": " << e.what()
                             << '\n';
                    continue;
                }
                for (const auto& algorithm : config.algorithms) {
                    std::vector<std::size_t> caps{0};
                    if (algorithm == "nbw" || algorithm == "fednbw")
                        caps = config.opt_iters;
                    for (std::size_t cap : caps) {
                        CellResult cell = run_cell(*ds.data, ds.name, algorithm,
                                                   cap, n_clients, rep, config);
                        records.insert(records.end(), cell.records.begin(),
                                       cell.records.end());
                        if (algorithm != "fednbw") continue;
                        CurveAccum& accum =
                            curves[{ds.name, n_clients}]
                                  [model_label("fednbw", cap_tag(cap) + "_g")];
                        accum.train_sum.resize(config.rounds, 0.0);
                        accum.test_sum.resize(config.rounds, 0.0);
                        for (const auto& rounds : cell.fold_rounds) {
                            for (std::size_t r = 0; r < rounds.size(); ++r) {
                                accum.train_sum[r] += rounds[r].global_train_acc;
                                accum.test_sum[r] += rounds[r].global_test_acc;
                            }
                            accum.n += 1;
                        }
                    }
                }
            }
        }
    }
    skip_log.close();

    auto write_file = [](const std::string& path, const std::string& body) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path);
        out << body;
    };

    std::vector<SummaryRow> summary = summarize(records);
    write_file(config.out_dir + "/records.csv", records_to_csv(records));
    write_file(config.out_dir + "/summary.csv", summary_to_csv(summary));
    write_file(config.out_dir + "/summary.txt", summary_to_text(summary));

    // Trace files: federated round curves plus every other model of the
    // same (dataset, clients) cell as a flat line for overlay plots.
    for (const auto& [cell_key, model_curves] : curves) {
        std::map<std::string, MeanAccum> flat;
        for (const auto& rec : records) {
            if (rec.dataset != cell_key.first || rec.clients != cell_key.second)
                continue;
            std::string label = model_label(rec.algorithm, rec.variant);
            if (model_curves.count(label) != 0) continue;
            MeanAccum& a = flat[label];
            if (rec.split == "train") {
                a.train_sum += rec.accuracy;
                a.train_n += 1;
            } else {
                a.test_sum += rec.accuracy;
                a.test_n += 1;
            }
        }

        TraceTable table;
        table.dataset = cell_key.first;
        table.clients = cell_key.second;
        std::vector<std::string> labels;
        for (const auto& [label, unused] : flat) labels.push_back(label);
        for (const auto& [label, unused] : model_curves) labels.push_back(label);
        std::sort(labels.begin(), labels.end(), model_less);
        for (const auto& label : labels) {
            table.models.push_back(label);
            auto fed = model_curves.find(label);
            if (fed != model_curves.end()) {
                const CurveAccum& accum = fed->second;
                std::vector<double> train(config.rounds), test(config.rounds);
                for (std::size_t r = 0; r < config.rounds; ++r) {
                    train[r] = accum.train_sum[r] / static_cast<double>(accum.n);
                    test[r] = accum.test_sum[r] / static_cast<double>(accum.n);
                }
                table.train_curves.push_back(std::move(train));
                table.test_curves.push_back(std::move(test));
            } else {
                const MeanAccum& a = flat.at(label);
                double train_mean =
                    a.train_n == 0 ? 0.0
                                   : a.train_sum / static_cast<double>(a.train_n);
                double test_mean =
                    a.test_n == 0 ? 0.0
                                  : a.test_sum / static_cast<double>(a.test_n);
                table.train_curves.emplace_back(config.rounds, train_mean);
                table.test_curves.emplace_back(config.rounds, test_mean);
            }
        }
        write_file(config.out_dir + "/traces/" + table.dataset + "_" +
                       std::to_string(table.clients) + ".csv",
                   trace_to_csv(table));
    }
    return summary;
}

}  // namespace fedbayes
