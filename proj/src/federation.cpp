#include "fedbayes/federation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "fedbayes/errors.hpp"
#include "fedbayes/rng.hpp"

namespace fedbayes {

ClientState make_client(const Dataset& data, std::uint32_t client_id,
                        std::vector<std::size_t> train_rows,
                        std::vector<std::size_t> test_rows, double smoothing) {
    ClientState c;
    c.client_id = client_id;
    c.params = normalize(fit_counts(data, train_rows), smoothing);
    c.train_rows = std::move(train_rows);
    c.test_rows = std::move(test_rows);
    c.local_weights = unit_weights(c.params.layout);
    return c;
}

namespace {

constexpr std::uint16_t kWireVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 4 + 8 + 8;

void put_bytes(std::vector<std::uint8_t>& out, std::uint64_t v, int n) {
    for (int b = 0; b < n; ++b)
        out.push_back(static_cast<std::uint8_t>((v >> (8 * b)) & 0xff));
}

std::uint64_t get_bytes(const std::vector<std::uint8_t>& in, std::size_t off,
                        int n) {
    std::uint64_t v = 0;
    for (int b = 0; b < n; ++b)
        v |= static_cast<std::uint64_t>(in[off + b]) << (8 * b);
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode_message(const WeightMessage& msg) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + 8 * msg.payload.size());
    for (char c : {'F', 'N', 'B', 'W'})
        out.push_back(static_cast<std::uint8_t>(c));
    put_bytes(out, kWireVersion, 2);
    put_bytes(out, msg.round, 4);
    put_bytes(out, msg.client_id, 4);
    put_bytes(out, msg.schema_hash, 8);
    put_bytes(out, msg.payload.size(), 8);
    for (double v : msg.payload)
        put_bytes(out, std::bit_cast<std::uint64_t>(v), 8);
    return out;
}

WeightMessage decode_message(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kHeaderSize)
        throw ParseError("weight message truncated: " +
                         std::to_string(bytes.size()) + " bytes");
    if (bytes[0] != 'F' || bytes[1] != 'N' || bytes[2] != 'B' ||
        bytes[3] != 'W')
        throw ParseError("weight message has a bad magic number");
    if (get_bytes(bytes, 4, 2) != kWireVersion)
        throw ParseError("unsupported weight message version " +
                         std::to_string(get_bytes(bytes, 4, 2)));
    WeightMessage msg;
    msg.round = static_cast<std::uint32_t>(get_bytes(bytes, 6, 4));
    msg.client_id = static_cast<std::uint32_t>(get_bytes(bytes, 10, 4));
    msg.schema_hash = get_bytes(bytes, 14, 8);
    const std::uint64_t len = get_bytes(bytes, 22, 8);
    if (bytes.size() != kHeaderSize + 8 * len)
        throw ParseError("weight message length mismatch: header says " +
                         std::to_string(len) + " values");
    msg.payload.resize(len);
    for (std::uint64_t i = 0; i < len; ++i)
        msg.payload[i] =
            std::bit_cast<double>(get_bytes(bytes, kHeaderSize + 8 * i, 8));
    return msg;
}

std::string message_to_json(const WeightMessage& msg) {
    nlohmann::json doc;
    doc["magic"] = "FNBW";
    doc["version"] = kWireVersion;
    doc["round"] = msg.round;
    doc["client_id"] = msg.client_id;
    doc["schema_hash"] = msg.schema_hash;
    doc["payload"] = msg.payload;
    return doc.dump();
}

WeightMessage message_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("weight message is not valid JSON: ") +
                         e.what());
    }
    if (doc.value("magic", "") != "FNBW" ||
        doc.value("version", 0) != kWireVersion)
        throw ParseError("weight message JSON has wrong magic or version");
    WeightMessage msg;
    msg.round = doc.at("round").get<std::uint32_t>();
    msg.client_id = doc.at("client_id").get<std::uint32_t>();
    msg.schema_hash = doc.at("schema_hash").get<std::uint64_t>();
    msg.payload = doc.at("payload").get<std::vector<double>>();
    return msg;
}

WeightVector init_global_weights(std::size_t dimension, std::uint64_t seed) {
    if (dimension == 0)
        throw SchemaError("weight vector dimension must be positive");
    SplitMix64 rng(seed);
    WeightVector w(dimension);
    for (double& v : w) v = rng.next_double(0.5, 1.5);
    return w;
}

LocalResult local_round(ClientState& client, const Dataset& data,
                        const WeightVector& global,
                        const OptimizerConfig& opt, std::uint32_t round) {
    if (global.size() != client.params.log_probs.size())
        throw SchemaError("broadcast weight dimension " +
                          std::to_string(global.size()) +
                          " does not match client " +
                          std::to_string(client.client_id));
    const ParamTable& params = client.params;
    const auto& rows = client.train_rows;
    Objective neg_cll = [&params, &data, &rows](std::span<const double> w,
                                                std::span<double> grad) {
        WeightVector wv(w.begin(), w.end());
        CllEvaluation e = cll(params, wv, data, rows);
        for (std::size_t c = 0; c < grad.size(); ++c) grad[c] = -e.gradient[c];
        return -e.value;
    };

    LocalResult out;
    try {
        out.report = minimize(neg_cll, global, opt);
    } catch (const Error& e) {
        throw OptimizerError("client " + std::to_string(client.client_id) +
                             ": " + e.what());
    }
    client.local_weights = out.report.final_point;
    out.message.round = round;
    out.message.client_id = client.client_id;
    out.message.schema_hash = client.params.layout.hash();
    out.message.payload = client.local_weights;
    return out;
}

WeightVector aggregate(const std::vector<WeightMessage>& messages,
                       std::size_t expected_clients, bool sample_weighted,
                       const std::vector<std::size_t>& shard_sizes) {
    if (messages.empty()) throw AggregationError("no messages to aggregate");
    if (messages.size() != expected_clients)
        throw AggregationError("expected " + std::to_string(expected_clients) +
                               " messages, received " +
                               std::to_string(messages.size()));

    std::vector<const WeightMessage*> order;
    order.reserve(messages.size());
    for (const auto& m : messages) order.push_back(&m);
    std::sort(order.begin(), order.end(),
              [](const WeightMessage* a, const WeightMessage* b) {
                  return a->client_id < b->client_id;
              });

    const WeightMessage& first = *order.front();
    for (std::size_t i = 0; i < order.size(); ++i) {
        const WeightMessage& m = *order[i];
        if (i > 0 && m.client_id == order[i - 1]->client_id)
            throw AggregationError("duplicate message from client " +
                                   std::to_string(m.client_id));
        if (m.round != first.round)
            throw AggregationError(
                "round mismatch: client " + std::to_string(m.client_id) +
                " sent round " + std::to_string(m.round) + ", expected " +
                std::to_string(first.round));
        if (m.schema_hash != first.schema_hash)
            throw AggregationError("schema hash mismatch from client " +
                                   std::to_string(m.client_id));
        if (m.payload.size() != first.payload.size())
            throw AggregationError("payload length mismatch from client " +
                                   std::to_string(m.client_id));
        if (sample_weighted && m.client_id >= shard_sizes.size())
            throw AggregationError("no shard size for client " +
                                   std::to_string(m.client_id));
    }

    WeightVector sum(first.payload.size(), 0.0);
    double mass = 0.0;
    for (const WeightMessage* m : order) {
        const double w =
            sample_weighted
                ? static_cast<double>(shard_sizes[m->client_id])
                : 1.0;
        mass += w;
        for (std::size_t c = 0; c < sum.size(); ++c)
            sum[c] += w * m->payload[c];
    }
    for (double& v : sum) v /= mass;
    return sum;
}

namespace {

double client_mean(const std::vector<ClientState>& clients,
                   const std::vector<double>& per_client) {
    double s = 0;
    for (double v : per_client) s += v;
    return clients.empty() ? 0.0 : s / static_cast<double>(clients.size());
}

}  // namespace

FederationResult run_federation(std::vector<ClientState>& clients,
                                const Dataset& data,
                                const FederationConfig& config,
                                const RoundObserver& observer) {
    if (clients.empty())
        throw AggregationError("federation needs at least one client");
    if (config.rounds == 0)
        throw AggregationError("federation needs at least one round");
    const std::uint64_t layout_hash = clients.front().params.layout.hash();
    for (const ClientState& c : clients)
        if (c.params.layout.hash() != layout_hash)
            throw SchemaError("client " + std::to_string(c.client_id) +
                              " disagrees on the parameter layout");

    const std::size_t C = clients.size();
    std::vector<std::size_t> shard_sizes;
    for (const ClientState& c : clients) {
        if (c.client_id >= shard_sizes.size())
            shard_sizes.resize(c.client_id + 1, 0);
        shard_sizes[c.client_id] = c.train_rows.size();
    }

    FederationResult result;
    result.global_weights = init_global_weights(
        clients.front().params.log_probs.size(),
        derive_seed(config.seed, "init", 0));

    const std::size_t workers =
        std::max<std::size_t>(1, std::min(config.threads, C));

    for (std::uint32_t round = 1; round <= config.rounds; ++round) {
        std::vector<LocalResult> locals(C);
        std::vector<std::exception_ptr> failures(C);

        auto work = [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    locals[i] = local_round(clients[i], data,
                                            result.global_weights, config.opt,
                                            round);
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            }
        };
        if (workers == 1) {
            work(0, C);
        } else {
            std::vector<std::thread> pool;
            const std::size_t chunk = (C + workers - 1) / workers;
            for (std::size_t w = 0; w < workers; ++w) {
                const std::size_t begin = w * chunk;
                if (begin >= C) break;
                pool.emplace_back(work, begin, std::min(C, begin + chunk));
            }
            for (auto& t : pool) t.join();
        }
        // Fail on the lowest client id so the error is deterministic too.
        for (std::size_t i = 0; i < C; ++i)
            if (failures[i]) std::rethrow_exception(failures[i]);

        // Wire round-trip: aggregation only ever sees decoded bytes.
        std::vector<WeightMessage> inbox;
        inbox.reserve(C);
        for (std::size_t i = 0; i < C; ++i) {
            if (observer)
                observer(round, clients[i].client_id, locals[i].report);
            inbox.push_back(decode_message(encode_message(locals[i].message)));
        }
        result.global_weights =
            aggregate(inbox, C, config.sample_weighted, shard_sizes);

        RoundRecord rec;
        rec.round = round;
        std::vector<double> g_train(C), g_test(C);
        for (std::size_t i = 0; i < C; ++i) {
            const ClientState& c = clients[i];
            RoundClientStat stat;
            stat.client_id = c.client_id;
            stat.objective = locals[i].report.objective_trace.back();
            stat.iters_used = locals[i].report.iterations_used;
            stat.train_acc =
                accuracy_weighted(c.params, c.local_weights, data, c.train_rows);
            stat.test_acc =
                accuracy_weighted(c.params, c.local_weights, data, c.test_rows);
            rec.per_client.push_back(stat);
            g_train[i] = accuracy_weighted(c.params, result.global_weights,
                                           data, c.train_rows);
            g_test[i] = accuracy_weighted(c.params, result.global_weights,
                                          data, c.test_rows);
        }
        double norm_sq = 0;
        for (double v : result.global_weights) norm_sq += v * v;
        rec.global_weights_norm = std::sqrt(norm_sq);
        rec.global_train_acc = client_mean(clients, g_train);
        rec.global_test_acc = client_mean(clients, g_test);
        result.records.push_back(std::move(rec));
    }
    return result;
}

WeightVector personalize(ClientState& client, const Dataset& data,
                         const WeightVector& global,
                         const OptimizerConfig& opt) {
    // Reuse the round machinery with a sentinel round number; the message
    // is discarded — personalized weights stay on the client.
    return local_round(client, data, global, opt, 0).message.payload;
}

void write_round_trace_csv(const std::string& path,
                           const std::vector<RoundRecord>& records) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace file '" + path + "'");
    out << "round,client_id,objective,iters_used,train_acc,test_acc,"
           "global_train_acc,global_test_acc\n";
    char line[256];
    for (const RoundRecord& rec : records) {
        for (const RoundClientStat& s : rec.per_client) {
            std::snprintf(line, sizeof line,
                          "%u,%u,%.6f,%zu,%.6f,%.6f,%.6f,%.6f\n", rec.round,
                          s.client_id, s.objective, s.iters_used, s.train_acc,
                          s.test_acc, rec.global_train_acc,
                          rec.global_test_acc);
            out << line;
        }
    }
}

}  // namespace fedbayes
