#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedbayes/dataset.hpp"
#include "fedbayes/errors.hpp"
#include "fedbayes/experiment.hpp"
#include "fedbayes/federation.hpp"
#include "fedbayes/naive_bayes.hpp"
#include "fedbayes/rng.hpp"
#include "fedbayes/weighted.hpp"

namespace fs = std::filesystem;
using namespace fedbayes;

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << body;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& b) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(b.data()),
              static_cast<std::streamsize>(b.size()));
}

/// Iteration caps on the command line are integers or the word "inf".
std::size_t parse_iters(const std::string& text) {
    if (text == "inf") return kUncappedIterations;
    try {
        std::size_t pos = 0;
        unsigned long value = std::stoul(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw SchemaError("--opt-iters must be a non-negative integer or 'inf'");
    }
}

int cmd_fit(const std::string& data_path, double alpha, bool header,
            int class_col, const std::string& out_path) {
    Dataset data = load_data(data_path, header, class_col);
    ParamTable params = normalize(fit_counts(data), alpha);
    write_text(out_path, param_table_to_json(params, data.schema));
    std::vector<std::size_t> rows(data.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    std::printf("fit %zu rows, %zu features, %zu classes -> %s "
                "(training accuracy %.4f)\n",
                data.rows(), data.schema.feature_names.size(),
                data.schema.class_labels.size(), out_path.c_str(),
                accuracy(params, data, rows));
    return 0;
}

struct FederateArgs {
    std::string data_path;
    std::size_t clients = 0;
    std::size_t rounds = 50;
    std::string opt_iters = "5";
    std::uint64_t seed = 1;
    double alpha = 1.0;
    std::size_t folds = 5;
    std::size_t min_client_size = 100;
    std::size_t threads = 1;
    bool weighted_avg = false;
    std::string message_format;  // empty = no dump
    std::string trace_dir;
    std::string dump_splits;
    bool header = false;
    int class_col = -1;
};

int cmd_federate(const FederateArgs& args) {
    Dataset data = load_data(args.data_path, args.header, args.class_col);
    auto shards =
        partition_clients(data, args.clients,
                          derive_seed(args.seed, "partition", args.clients),
                          args.min_client_size);

    // Per client: stratified folds of its shard, fold 0 held out for the
    // test-accuracy columns, the rest is local training data.
    std::vector<ClientState> clients;
    std::vector<std::vector<std::vector<std::size_t>>> folds;
    clients.reserve(args.clients);
    folds.reserve(args.clients);
    for (std::size_t c = 0; c < args.clients; ++c) {
        folds.push_back(make_folds(data, shards[c], args.folds,
                                   derive_seed(args.seed, "folds", c)));
        clients.push_back(make_client(
            data, static_cast<std::uint32_t>(c),
            fold_complement(shards[c], folds.back()[0]), folds.back()[0],
            args.alpha));
    }

    if (!args.dump_splits.empty()) {
        // row index -> [client, fold]
        std::vector<std::array<std::size_t, 2>> assignment(data.rows());
        for (std::size_t c = 0; c < args.clients; ++c)
            for (std::size_t f = 0; f < folds[c].size(); ++f)
                for (std::size_t row : folds[c][f]) assignment[row] = {c, f};
        nlohmann::json doc = nlohmann::json::array();
        for (const auto& entry : assignment)
            doc.push_back({entry[0], entry[1]});
        write_text(args.dump_splits, doc.dump());
        std::printf("split assignment -> %s\n", args.dump_splits.c_str());
    }

    FederationConfig config;
    config.rounds = args.rounds;
    config.opt.max_iterations = parse_iters(args.opt_iters);
    config.seed = args.seed;
    config.threads = args.threads;
    config.sample_weighted = args.weighted_avg;

    RoundObserver observer;
    if (!args.message_format.empty()) {
        fs::create_directories(fs::path(args.trace_dir) / "messages");
        std::uint64_t hash = clients.front().params.layout.hash();
        std::string dir = args.trace_dir;
        std::string format = args.message_format;
        observer = [dir, format, hash](std::uint32_t round,
                                       std::uint32_t client_id,
                                       const OptimizeReport& report) {
            WeightMessage msg{round, client_id, hash, report.final_point};
            char name[64];
            std::snprintf(name, sizeof name, "/messages/round%03u_client%03u.",
                          round, client_id);
            if (format == "json")
                write_text(dir + name + "json", message_to_json(msg));
            else
                write_bytes(dir + name + "bin", encode_message(msg));
        };
    }

    FederationResult result = run_federation(clients, data, config, observer);
    for (const auto& record : result.records) {
        std::printf("round %3u/%zu  train %.4f  test %.4f  |w| %.4f\n",
                    record.round, args.rounds, record.global_train_acc,
                    record.global_test_acc, record.global_weights_norm);
    }

    if (!args.trace_dir.empty()) {
        fs::create_directories(args.trace_dir);
        std::string trace_path =
            (fs::path(args.trace_dir) / "rounds.csv").string();
        write_round_trace_csv(trace_path, result.records);

        nlohmann::json doc;
        doc["rounds"] = args.rounds;
        doc["schema_hash"] = clients.front().params.layout.hash();
        doc["weights"] = result.global_weights;
        write_text((fs::path(args.trace_dir) / "global_weights.json").string(),
                   doc.dump());
        std::printf("round trace and global weights -> %s\n",
                    args.trace_dir.c_str());
    }
    return 0;
}

int cmd_experiment(const std::string& config_path) {
    ExperimentConfig config = config_from_json(read_text(config_path));
    std::vector<SummaryRow> summary = run_experiment(config);
    std::fputs(summary_to_text(summary).c_str(), stdout);
    std::printf("results -> %s\n", config.out_dir.c_str());
    return 0;
}

int cmd_compare(const std::string& records_path, const std::string& out_path) {
    fs::path path = records_path;
    if (fs::is_directory(path)) path /= "records.csv";
    std::vector<SummaryRow> summary =
        summarize(records_from_csv(read_text(path.string())));
    if (!out_path.empty()) write_text(out_path, summary_to_csv(summary));
    std::fputs(summary_to_text(summary).c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"federated discriminative naive Bayes for discrete data"};
    app.require_subcommand(1);

    // fit
    std::string fit_data, fit_out;
    double fit_alpha = 1.0;
    bool fit_header = false;
    int fit_class_col = -1;
    CLI::App* fit = app.add_subcommand(
        "fit", "fit a generative naive Bayes model on one file");
    fit->add_option("--data", fit_data, "training data (.csv or .arff)")
        ->required()
        ->check(CLI::ExistingFile);
    fit->add_option("--alpha", fit_alpha, "smoothing pseudo-count")
        ->check(CLI::NonNegativeNumber);
    fit->add_option("--out", fit_out, "output model JSON path")->required();
    fit->add_flag("--header", fit_header, "first CSV line is a header");
    fit->add_option("--class-col", fit_class_col,
                    "CSV class column index (default: last)");

    // federate
    FederateArgs fed;
    CLI::App* federate = app.add_subcommand(
        "federate", "run weight federation over stratified client shards");
    federate->add_option("--data", fed.data_path, "data file (.csv or .arff)")
        ->required()
        ->check(CLI::ExistingFile);
    federate->add_option("--clients", fed.clients, "number of clients")
        ->required()
        ->check(CLI::PositiveNumber);
    federate->add_option("--rounds", fed.rounds, "federated rounds")
        ->check(CLI::PositiveNumber);
    federate->add_option("--opt-iters", fed.opt_iters,
                         "per-round client optimizer cap, or 'inf'");
    federate->add_option("--seed", fed.seed, "master seed");
    federate->add_option("--alpha", fed.alpha, "smoothing pseudo-count")
        ->check(CLI::NonNegativeNumber);
    federate->add_option("--folds", fed.folds,
                         "per-client folds; fold 0 is held out for testing")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000}));
    federate->add_option("--min-client-size", fed.min_client_size,
                         "refuse shards smaller than this");
    federate->add_option("--threads", fed.threads, "client worker threads")
        ->check(CLI::PositiveNumber);
    federate->add_flag("--weighted-avg", fed.weighted_avg,
                       "average client updates by shard size");
    federate
        ->add_option("--message-format", fed.message_format,
                     "also dump every client update under "
                     "TRACE-DIR/messages in this format")
        ->check(CLI::IsMember({"binary", "json"}));
    federate->add_option("--trace-dir", fed.trace_dir,
                         "directory for rounds.csv and global_weights.json");
    federate->add_option("--dump-splits", fed.dump_splits,
                         "write the row -> [client, fold] map to this JSON file");
    federate->add_flag("--header", fed.header, "first CSV line is a header");
    federate->add_option("--class-col", fed.class_col,
                         "CSV class column index (default: last)");

    // experiment
    std::string experiment_config;
    CLI::App* experiment = app.add_subcommand(
        "experiment", "run the full benchmark grid from a JSON config");
    experiment
        ->add_option("--config", experiment_config, "experiment config JSON")
        ->required()
        ->check(CLI::ExistingFile);

    // compare
    std::string compare_records, compare_out;
    CLI::App* compare = app.add_subcommand(
        "compare", "summarize a records.csv into a comparison table");
    compare
        ->add_option("--records", compare_records,
                     "records.csv file, or a results directory containing one")
        ->required()
        ->check(CLI::ExistingPath);
    compare->add_option("--out", compare_out, "also write the table as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(fit))
            return cmd_fit(fit_data, fit_alpha, fit_header, fit_class_col,
                           fit_out);
        if (app.got_subcommand(federate)) {
            if (!fed.message_format.empty() && fed.trace_dir.empty())
                throw SchemaError("--message-format requires --trace-dir");
            return cmd_federate(fed);
        }
        if (app.got_subcommand(experiment)) return cmd_experiment(experiment_config);
        if (app.got_subcommand(compare))
            return cmd_compare(compare_records, compare_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fedbayes: %s\n", e.what());
        return 1;
    }
    return 0;
}
