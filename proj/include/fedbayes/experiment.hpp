#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedbayes/dataset.hpp"
#include "fedbayes/federation.hpp"

namespace fedbayes {

/// Iteration-cap value standing in for "no cap": large enough that the
/// gradient tolerance always fires first on these problem sizes.
constexpr std::size_t kUncappedIterations = 10000;

/// Full experiment description; mirrors the JSON config file field for
/// field. "inf" in opt_iters maps to kUncappedIterations.
struct ExperimentConfig {
    std::vector<std::string> datasets;   // file paths (.csv or .arff)
    std::vector<std::string> algorithms{"nb", "nb_fed", "nbw", "fednbw"};
    std::vector<std::size_t> client_counts{5, 10, 20, 50, 100};
    std::size_t folds = 5;
    std::size_t repetitions = 5;
    std::uint64_t master_seed = 1;
    std::vector<std::size_t> opt_iters{5, kUncappedIterations};
    std::size_t rounds = 50;  // federated rounds T
    double alpha = 1.0;       // smoothing for every fitted table
    std::string out_dir = "results";
    std::size_t min_client_size = 5;
    std::size_t threads = 1;
    bool csv_header = false;
    int class_col = -1;

    void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

/// One accuracy measurement. A cell (dataset, model, client count) yields
/// repetitions x clients x folds of these per split.
struct MetricsRecord {
    std::string dataset;
    std::string algorithm;  // nb | nb_fed | nbw | fednbw
    std::string variant;    // "" | "5" | "inf" | "5_g" | "5_l" | ...
    std::size_t clients = 0;
    std::size_t repetition = 0;
    std::uint32_t client_id = 0;
    std::size_t fold = 0;
    std::string split;  // train | test
    double accuracy = 0.0;
};

/// Canonical display label: nb, nb_fed, nbw_5, nbw_inf, fednbw_5_g, ...
std::string model_label(const std::string& algorithm,
                        const std::string& variant);

/// The deterministic geometry of one (dataset, client count, repetition):
/// stratified client shards and the per-client fold assignments. Every
/// algorithm in the cell shares this plan, which is what aligns fold f
/// across clients within a federation run.
struct CellPlan {
    std::uint64_t rep_seed = 0;
    std::vector<std::vector<std::size_t>> shards;  // [client] -> rows
    // [client][fold] -> held-out rows
    std::vector<std::vector<std::vector<std::size_t>>> folds;
};

CellPlan plan_cell(const Dataset& data, const std::string& dataset_name,
                   std::size_t client_count, std::size_t repetition,
                   const ExperimentConfig& config);

struct CellResult {
    std::vector<MetricsRecord> records;
    // fednbw only: per fold, the federation's per-round records (length T).
    std::vector<std::vector<RoundRecord>> fold_rounds;
    bool skipped = false;
    std::string skip_reason;
};

/// Runs one (dataset, algorithm, cap, client count, repetition) cell under
/// the shared plan. For nb/nb_fed `opt_cap` is ignored; fednbw emits both
/// the global-weights and personalized variants from a single federation
/// per fold. An illegal partition (or folds too small) skips the cell with
/// the reason recorded instead of failing the run.
CellResult run_cell(const Dataset& data, const std::string& dataset_name,
                    const std::string& algorithm, std::size_t opt_cap,
                    std::size_t client_count, std::size_t repetition,
                    const ExperimentConfig& config);

/// Mean test accuracy (in percent) per (dataset, model, client count),
/// plus cross-dataset "Mean" rows per (model, client count). Rows are
/// sorted (dataset, model order, clients) with Mean rows last.
struct SummaryRow {
    std::string dataset;
    std::string model;
    std::size_t clients = 0;
    double mean_test_pct = 0.0;
    std::size_t runs = 0;
};

std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& records);
std::string summary_to_csv(const std::vector<SummaryRow>& rows);
std::string summary_to_text(const std::vector<SummaryRow>& rows);

std::string records_to_csv(const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> records_from_csv(const std::string& text);

/// Per-(dataset, client count) round curves in long format:
/// round,model,train_acc,test_acc. Federated models contribute their
/// per-round global accuracies averaged over repetitions and folds;
/// baseline models repeat their cell mean every round for overlay.
struct TraceTable {
    std::string dataset;
    std::size_t clients = 0;
    // model -> (per-round train means, per-round test means)
    std::vector<std::string> models;
    std::vector<std::vector<double>> train_curves;
    std::vector<std::vector<double>> test_curves;
};

std::string trace_to_csv(const TraceTable& table);

/// Everything: loads the datasets, runs every cell, and writes records.csv,
/// summary.csv, summary.txt, traces/<dataset>_<C>.csv and skipped_cells.log
/// under config.out_dir. Returns the summary rows.
std::vector<SummaryRow> run_experiment(const ExperimentConfig& config);

}  // namespace fedbayes
