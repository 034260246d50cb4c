#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fedbayes/dataset.hpp"
#include "fedbayes/naive_bayes.hpp"
#include "fedbayes/optimizer.hpp"
#include "fedbayes/weighted.hpp"

namespace fedbayes {

/// Everything one simulated client owns. The probability table is fit from
/// train_rows only and never leaves this struct — the only thing a client
/// ever emits is a WeightMessage.
struct ClientState {
    std::uint32_t client_id = 0;
    ParamTable params;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    WeightVector local_weights;
};

/// Fits a client's local model on its training rows (the held-out rows
/// never reach the counts) and seeds unit local weights.
ClientState make_client(const Dataset& data, std::uint32_t client_id,
                        std::vector<std::size_t> train_rows,
                        std::vector<std::size_t> test_rows, double smoothing);

/// The sole cross-client artifact: a round-stamped weight payload plus the
/// layout digest both sides must agree on. No probability mass travels.
struct WeightMessage {
    std::uint32_t round = 0;
    std::uint32_t client_id = 0;
    std::uint64_t schema_hash = 0;
    std::vector<double> payload;
};

/// Binary wire form, little-endian: "FNBW", u16 version, u32 round,
/// u32 client_id, u64 schema_hash, u64 payload length, then IEEE-754
/// doubles in the canonical layout.
std::vector<std::uint8_t> encode_message(const WeightMessage& msg);
WeightMessage decode_message(const std::vector<std::uint8_t>& bytes);

/// JSON mirror of the same fields, for debugging and `--message-format json`.
std::string message_to_json(const WeightMessage& msg);
WeightMessage message_from_json(const std::string& text);

/// Global weight init: i.i.d. uniform on [0.5, 1.5), centred at the
/// all-ones vector so round zero scores like the unweighted model.
WeightVector init_global_weights(std::size_t dimension, std::uint64_t seed);

struct LocalResult {
    WeightMessage message;
    OptimizeReport report;
};

/// One client's round: overwrite local weights with the broadcast global
/// vector, run the capped minimizer on the local negative CLL, and package
/// the result. The client's probability table is read, never written.
LocalResult local_round(ClientState& client, const Dataset& data,
                        const WeightVector& global,
                        const OptimizerConfig& opt, std::uint32_t round);

/// Coordinatewise mean of all expected messages, summed in ascending
/// client_id order so the float reduction is schedule-independent. With
/// sample_weighted, each payload is scaled by its client's shard size
/// (shard_sizes indexed by client_id) instead of 1/C. Throws
/// AggregationError on missing/duplicate clients or round/schema mismatch.
WeightVector aggregate(const std::vector<WeightMessage>& messages,
                       std::size_t expected_clients,
                       bool sample_weighted = false,
                       const std::vector<std::size_t>& shard_sizes = {});

/// Per-round snapshot used for traces and figures.
struct RoundClientStat {
    std::uint32_t client_id = 0;
    double objective = 0.0;  // local negative CLL after optimization
    std::size_t iters_used = 0;
    double train_acc = 0.0;  // under the client's post-optimization weights
    double test_acc = 0.0;
};

struct RoundRecord {
    std::uint32_t round = 0;  // 1-based
    std::vector<RoundClientStat> per_client;
    double global_weights_norm = 0.0;  // L2 of the freshly averaged vector
    double global_train_acc = 0.0;     // client mean under the new global w
    double global_test_acc = 0.0;
};

struct FederationConfig {
    std::size_t rounds = 50;
    OptimizerConfig opt;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    bool sample_weighted = false;
};

struct FederationResult {
    WeightVector global_weights;
    std::vector<RoundRecord> records;  // one per round
};

/// Observes each client's optimizer run; invoked on the orchestrator
/// thread in ascending client order after every round's barrier.
using RoundObserver = std::function<void(
    std::uint32_t round, std::uint32_t client_id, const OptimizeReport&)>;

/// The full orchestration: T rounds of broadcast, parallel capped local
/// optimization, wire round-trip (every message is encoded and decoded,
/// even in-process), and uniform averaging. Per-round records capture
/// local and global accuracies. Deterministic for a fixed seed at any
/// thread count. Requires at least one client and one round.
FederationResult run_federation(std::vector<ClientState>& clients,
                                const Dataset& data,
                                const FederationConfig& config,
                                const RoundObserver& observer = nullptr);

/// One extra local optimization pass from the final global weights; the
/// result is evaluated on this client only and never aggregated.
WeightVector personalize(ClientState& client, const Dataset& data,
                         const WeightVector& global,
                         const OptimizerConfig& opt);

/// Writes round records as CSV with the documented column set.
void write_round_trace_csv(const std::string& path,
                           const std::vector<RoundRecord>& records);

}  // namespace fedbayes
