#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "fedbayes/errors.hpp"
#include "fedbayes/federation.hpp"
#include "fedbayes/rng.hpp"
#include "test_util.hpp"

using namespace fedbayes;
using testutil::all_rows;
using testutil::make_random_dataset;

namespace {

// A modest federation fixture: random data split into C stratified shards,
// each client training on 4/5 of its shard.
std::vector<ClientState> make_clients(const Dataset& d, std::size_t C,
                                      std::uint64_t seed) {
    auto shards = partition_clients(d, C, seed, 1);
    std::vector<ClientState> clients;
    for (std::size_t c = 0; c < C; ++c) {
        auto folds = make_folds(d, shards[c], 5, derive_seed(seed, "f", c));
        clients.push_back(make_client(
            d, static_cast<std::uint32_t>(c),
            fold_complement(shards[c], folds[0]), folds[0], 1.0));
    }
    return clients;
}

WeightMessage sample_message(std::uint32_t round, std::uint32_t id,
                             std::vector<double> payload) {
    WeightMessage m;
    m.round = round;
    m.client_id = id;
    m.schema_hash = 0xabcdef0123456789ULL;
    m.payload = std::move(payload);
    return m;
}

}  // namespace

TEST_CASE("binary encoding round-trips every field bit for bit") {
    WeightMessage m = sample_message(
        7, 3, {1.5, -0.25, 1e-300, -1e300, 0.0, 0.1 + 0.2});
    auto bytes = encode_message(m);
    CHECK(bytes.size() == 30 + 8 * m.payload.size());
    WeightMessage back = decode_message(bytes);
    CHECK(back.round == m.round);
    CHECK(back.client_id == m.client_id);
    CHECK(back.schema_hash == m.schema_hash);
    CHECK(back.payload == m.payload);
    CHECK(std::memcmp(back.payload.data(), m.payload.data(),
                      8 * m.payload.size()) == 0);
}

TEST_CASE("decoding rejects malformed bytes") {
    WeightMessage m = sample_message(1, 0, {1.0});
    auto good = encode_message(m);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_message(bad_magic), ParseError);

    auto bad_version = good;
    bad_version[4] = 99;
    CHECK_THROWS_AS(decode_message(bad_version), ParseError);

    auto truncated = good;
    truncated.pop_back();
    CHECK_THROWS_AS(decode_message(truncated), ParseError);

    CHECK_THROWS_AS(decode_message({1, 2, 3}), ParseError);
}

TEST_CASE("json mirror carries the same message") {
    WeightMessage m = sample_message(42, 9, {0.5, 1.5, -2.75});
    WeightMessage back = message_from_json(message_to_json(m));
    CHECK(back.round == m.round);
    CHECK(back.client_id == m.client_id);
    CHECK(back.schema_hash == m.schema_hash);
    CHECK(back.payload == m.payload);
    CHECK_THROWS_AS(message_from_json("{}"), ParseError);
    CHECK_THROWS_AS(message_from_json("nope"), ParseError);
}

TEST_CASE("weight init is deterministic, in range, and centred at one") {
    WeightVector a = init_global_weights(6, 123);
    WeightVector b = init_global_weights(6, 123);
    CHECK(a == b);
    CHECK(a.size() == 6);
    for (double v : a) {
        CHECK(v >= 0.5);
        CHECK(v < 1.5);
    }
    CHECK(init_global_weights(6, 124) != a);

    double sum = 0;
    WeightVector big = init_global_weights(100000, 7);
    for (double v : big) sum += v;
    CHECK(sum / 100000.0 == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("aggregate averages coordinatewise") {
    std::vector<WeightMessage> msgs{sample_message(1, 0, {1, 2}),
                                    sample_message(1, 1, {3, 4})};
    WeightVector mean = aggregate(msgs, 2);
    CHECK(mean == WeightVector{2, 3});
}

TEST_CASE("aggregating identical payloads returns that payload exactly") {
    // Integer-valued doubles keep every intermediate sum exact.
    std::vector<WeightMessage> msgs;
    for (std::uint32_t c = 0; c < 5; ++c)
        msgs.push_back(sample_message(3, c, {2, -8, 16, 5}));
    CHECK(aggregate(msgs, 5) == WeightVector{2, -8, 16, 5});

    // And any payload at all survives a two-client average.
    std::vector<WeightMessage> two{
        sample_message(1, 0, {0.1, M_PI, -1e-9}),
        sample_message(1, 1, {0.1, M_PI, -1e-9})};
    CHECK(aggregate(two, 2) == WeightVector{0.1, M_PI, -1e-9});
}

TEST_CASE("shard-weighted averaging scales by client size") {
    std::vector<WeightMessage> msgs{sample_message(1, 0, {1.0}),
                                    sample_message(1, 1, {3.0})};
    WeightVector w = aggregate(msgs, 2, true, {1, 3});
    CHECK(w[0] == doctest::Approx(2.5));
    // Equal shard sizes coincide with the uniform mean.
    WeightVector eq = aggregate(msgs, 2, true, {4, 4});
    CHECK(eq[0] == aggregate(msgs, 2)[0]);
}

TEST_CASE("aggregate rejects inconsistent inboxes") {
    auto m0 = sample_message(1, 0, {1.0});
    auto m1 = sample_message(1, 1, {2.0});
    CHECK_THROWS_AS(aggregate({m0, m1}, 3), AggregationError);  // missing
    CHECK_THROWS_AS(aggregate({m0, m0}, 2), AggregationError);  // duplicate
    CHECK_THROWS_AS(aggregate({}, 0), AggregationError);

    auto wrong_round = m1;
    wrong_round.round = 2;
    CHECK_THROWS_AS(aggregate({m0, wrong_round}, 2), AggregationError);

    auto wrong_schema = m1;
    wrong_schema.schema_hash ^= 1;
    CHECK_THROWS_AS(aggregate({m0, wrong_schema}, 2), AggregationError);

    auto wrong_len = m1;
    wrong_len.payload = {1.0, 2.0};
    CHECK_THROWS_AS(aggregate({m0, wrong_len}, 2), AggregationError);

    CHECK_THROWS_AS(aggregate({m0, m1}, 2, true, {5}), AggregationError);
}

TEST_CASE("a zero-iteration round echoes the broadcast weights") {
    Dataset d = make_random_dataset(80, {3, 2}, 2, 5);
    auto clients = make_clients(d, 2, 5);
    WeightVector global = init_global_weights(
        clients[0].params.log_probs.size(), 99);
    OptimizerConfig opt;
    opt.max_iterations = 0;
    LocalResult r = local_round(clients[0], d, global, opt, 1);
    CHECK(r.message.payload == global);
    CHECK(r.report.iterations_used == 0);
}

TEST_CASE("a stationary broadcast point is echoed via the tolerance exit") {
    Dataset d = make_random_dataset(60, {2, 3}, 2, 11);
    auto clients = make_clients(d, 1, 11);
    OptimizerConfig full;
    full.max_iterations = 10000;
    // Converge once, then broadcast the converged point.
    WeightVector start = unit_weights(clients[0].params.layout);
    LocalResult first = local_round(clients[0], d, start, full, 1);
    REQUIRE(first.report.termination == Termination::gradient_tolerance);
    LocalResult again = local_round(clients[0], d, first.message.payload,
                                    full, 2);
    CHECK(again.report.iterations_used == 0);
    CHECK(again.message.payload == first.message.payload);
}

TEST_CASE("local_round dimension mismatch is a schema error") {
    Dataset d = make_random_dataset(40, {2}, 2, 3);
    auto clients = make_clients(d, 1, 3);
    CHECK_THROWS_AS(
        local_round(clients[0], d, WeightVector(3, 1.0), OptimizerConfig{}, 1),
        SchemaError);
}

TEST_CASE("single-client federation equals a chain of warm-started solves") {
    Dataset d = make_random_dataset(90, {3, 2, 2}, 3, 21);
    auto clients = make_clients(d, 1, 21);
    FederationConfig cfg;
    cfg.rounds = 3;
    cfg.opt.max_iterations = 4;
    cfg.opt.grad_tolerance = 0.0;
    cfg.seed = 777;
    auto fed_clients = clients;  // run_federation mutates local weights
    FederationResult fed = run_federation(fed_clients, d, cfg);

    // Same start, same per-round budget, history dropped between rounds.
    const ParamTable& p = clients[0].params;
    const auto& rows = clients[0].train_rows;
    Objective neg_cll = [&](std::span<const double> w, std::span<double> g) {
        WeightVector wv(w.begin(), w.end());
        auto e = cll(p, wv, d, rows);
        for (std::size_t c = 0; c < g.size(); ++c) g[c] = -e.gradient[c];
        return -e.value;
    };
    WeightVector w = init_global_weights(p.log_probs.size(),
                                         derive_seed(cfg.seed, "init", 0));
    for (int t = 0; t < 3; ++t) {
        auto rep = minimize(neg_cll, w, cfg.opt);
        w = rep.final_point;
        CHECK(fed.records[static_cast<std::size_t>(t)].per_client[0].objective ==
              rep.objective_trace.back());
    }
    CHECK(fed.global_weights == w);
}

TEST_CASE("duplicated clients leave the trajectory unchanged") {
    Dataset d = make_random_dataset(100, {2, 4}, 2, 8);
    auto one = make_clients(d, 1, 8);
    // Two clients holding the exact same shard and folds.
    std::vector<ClientState> twins{one[0], one[0]};
    twins[1].client_id = 1;

    FederationConfig cfg;
    cfg.rounds = 3;
    cfg.opt.max_iterations = 3;
    cfg.seed = 5;
    auto solo_clients = one;
    FederationResult solo = run_federation(solo_clients, d, cfg);
    FederationResult both = run_federation(twins, d, cfg);
    CHECK(solo.global_weights == both.global_weights);
    CHECK(both.records.back().per_client[0].objective ==
          both.records.back().per_client[1].objective);
}

TEST_CASE("federation is bit-deterministic across runs and thread counts") {
    Dataset d = make_random_dataset(240, {3, 2, 3}, 3, 13);
    FederationConfig cfg;
    cfg.rounds = 4;
    cfg.opt.max_iterations = 3;
    cfg.seed = 31;

    auto run_with = [&](std::size_t threads) {
        auto clients = make_clients(d, 6, 13);
        FederationConfig c2 = cfg;
        c2.threads = threads;
        return run_federation(clients, d, c2);
    };
    FederationResult serial = run_with(1);
    FederationResult parallel = run_with(4);
    FederationResult again = run_with(4);

    CHECK(serial.global_weights == parallel.global_weights);
    CHECK(parallel.global_weights == again.global_weights);
    REQUIRE(serial.records.size() == parallel.records.size());
    for (std::size_t r = 0; r < serial.records.size(); ++r) {
        CHECK(serial.records[r].global_test_acc ==
              parallel.records[r].global_test_acc);
        CHECK(serial.records[r].global_weights_norm ==
              parallel.records[r].global_weights_norm);
        for (std::size_t c = 0; c < serial.records[r].per_client.size(); ++c)
            CHECK(serial.records[r].per_client[c].objective ==
                  parallel.records[r].per_client[c].objective);
    }
}

TEST_CASE("every client's local objective never rises within a round") {
    Dataset d = make_random_dataset(150, {3, 3}, 2, 17);
    auto clients = make_clients(d, 3, 17);
    FederationConfig cfg;
    cfg.rounds = 5;
    cfg.opt.max_iterations = 5;
    cfg.seed = 2;

    std::size_t observed = 0;
    RoundObserver obs = [&](std::uint32_t, std::uint32_t,
                            const OptimizeReport& rep) {
        ++observed;
        CHECK(rep.iterations_used <= 5);
        for (std::size_t i = 1; i < rep.objective_trace.size(); ++i)
            CHECK(rep.objective_trace[i] <= rep.objective_trace[i - 1]);
    };
    run_federation(clients, d, cfg, obs);
    CHECK(observed == 15);  // 3 clients x 5 rounds
}

TEST_CASE("personalization with a zero cap returns the global weights") {
    Dataset d = make_random_dataset(70, {2, 2}, 2, 19);
    auto clients = make_clients(d, 2, 19);
    WeightVector global = init_global_weights(
        clients[0].params.log_probs.size(), 4);
    OptimizerConfig none;
    none.max_iterations = 0;
    CHECK(personalize(clients[0], d, global, none) == global);

    OptimizerConfig some;
    some.max_iterations = 5;
    WeightVector personal = personalize(clients[1], d, global, some);
    auto before = cll(clients[1].params, global, d, clients[1].train_rows);
    auto after = cll(clients[1].params, personal, d, clients[1].train_rows);
    CHECK(after.value >= before.value);
}

TEST_CASE("degenerate federations are rejected") {
    Dataset d = make_random_dataset(50, {2}, 2, 23);
    auto clients = make_clients(d, 2, 23);
    FederationConfig cfg;
    cfg.rounds = 0;
    CHECK_THROWS_AS(run_federation(clients, d, cfg), AggregationError);
    std::vector<ClientState> none;
    FederationConfig ok;
    ok.rounds = 1;
    CHECK_THROWS_AS(run_federation(none, d, ok), AggregationError);
}

TEST_CASE("only weights cross the boundary, never probability tables") {
    // Two clients over different shards share the schema, hence the hash.
    Dataset d = make_random_dataset(120, {3, 4, 2}, 2, 29);
    auto clients = make_clients(d, 2, 29);
    CHECK(clients[0].params.layout.hash() == clients[1].params.layout.hash());

    WeightVector global = init_global_weights(
        clients[0].params.log_probs.size(), 6);
    OptimizerConfig opt;
    opt.max_iterations = 3;
    for (ClientState& c : clients) {
        LocalResult r = local_round(c, d, global, opt, 1);
        auto bytes = encode_message(r.message);
        // Exactly a header plus one double per weight: no room for a table.
        CHECK(bytes.size() == 30 + 8 * global.size());
        CHECK(r.message.payload.size() == global.size());

        // No serialized byte window matches any table entry's bit pattern.
        for (double lp : c.params.log_probs) {
            if (!std::isfinite(lp)) continue;
            std::uint8_t pat[8];
            std::memcpy(pat, &lp, 8);
            bool found = false;
            for (std::size_t off = 0; off + 8 <= bytes.size() && !found; ++off)
                found = std::memcmp(bytes.data() + off, pat, 8) == 0;
            CHECK_FALSE(found);
        }
    }
}

TEST_CASE("clients fit their tables from training rows only") {
    Dataset d = make_random_dataset(60, {3, 2}, 2, 37);
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < d.rows(); ++i)
        (i < 40 ? train : test).push_back(i);
    ClientState c = make_client(d, 0, train, test, 1.0);
    ParamTable expect = normalize(fit_counts(d, train), 1.0);
    CHECK(c.params.log_probs == expect.log_probs);
}

TEST_CASE("trace csv has the documented schema") {
    Dataset d = make_random_dataset(80, {2, 2}, 2, 41);
    auto clients = make_clients(d, 2, 41);
    FederationConfig cfg;
    cfg.rounds = 2;
    cfg.opt.max_iterations = 2;
    FederationResult fed = run_federation(clients, d, cfg);

    const char* path = "tmp_trace.csv";
    write_round_trace_csv(path, fed.records);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "round,client_id,objective,iters_used,train_acc,test_acc,"
          "global_train_acc,global_test_acc");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);  // 2 rounds x 2 clients
    in.close();
    std::remove(path);
}
