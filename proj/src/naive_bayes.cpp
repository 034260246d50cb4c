#include "fedbayes/naive_bayes.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "fedbayes/errors.hpp"

namespace fedbayes {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

CountTable fit_counts(const Dataset& data,
                      const std::vector<std::size_t>& rows) {
    if (rows.empty()) throw FitError("cannot fit on an empty row set");
    CountTable t;
    t.layout = ParamLayout(data.schema);
    t.cells.assign(t.layout.dim(), 0);
    const std::size_t n = data.features();
    for (std::size_t i : rows) {
        const auto k = static_cast<std::size_t>(data.label(i));
        ++t.cells[t.layout.prior_index(k)];
        for (std::size_t j = 0; j < n; ++j) {
            const std::int32_t v = data.value(i, j);
            if (v < 0) continue;
            ++t.cells[t.layout.cond_index(j, static_cast<std::size_t>(v), k)];
        }
    }
    t.total = static_cast<std::int64_t>(rows.size());
    return t;
}

CountTable fit_counts(const Dataset& data) {
    std::vector<std::size_t> all(data.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return fit_counts(data, all);
}

CountTable pool_counts(const std::vector<CountTable>& tables) {
    if (tables.empty()) throw FitError("cannot pool zero count tables");
    CountTable out = tables.front();
    for (std::size_t t = 1; t < tables.size(); ++t) {
        const CountTable& other = tables[t];
        if (!(other.layout == out.layout))
            throw SchemaError("cannot pool count tables with different layouts");
        for (std::size_t c = 0; c < out.cells.size(); ++c)
            out.cells[c] += other.cells[c];
        out.total += other.total;
    }
    return out;
}

ParamTable normalize(const CountTable& counts, double smoothing) {
    if (counts.total <= 0)
        throw NormalizeError("cannot normalize an empty count table");
    if (smoothing < 0)
        throw NormalizeError("smoothing must be nonnegative, got " +
                             std::to_string(smoothing));

    const ParamLayout& layout = counts.layout;
    const std::size_t o = layout.n_classes();
    ParamTable p;
    p.layout = layout;
    p.smoothing = smoothing;
    p.log_probs.assign(layout.dim(), kNegInf);

    const double m = static_cast<double>(counts.total);
    for (std::size_t k = 0; k < o; ++k) {
        const double num = static_cast<double>(counts.class_count(k)) + smoothing;
        if (num > 0)
            p.log_probs[layout.prior_index(k)] =
                std::log(num / (m + smoothing * static_cast<double>(o)));
    }

    for (std::size_t j = 0; j < layout.n_features(); ++j) {
        const std::size_t card = layout.cardinality(j);
        for (std::size_t k = 0; k < o; ++k) {
            // Rows of class k actually observed at this feature; differs
            // from class_count(k) only when cells are missing, and using it
            // keeps each conditional column a proper distribution.
            std::int64_t present = 0;
            for (std::size_t l = 0; l < card; ++l)
                present += counts.cond_count(j, l, k);
            const double denom = static_cast<double>(present) +
                                 smoothing * static_cast<double>(card);
            if (denom <= 0) continue;  // leave the whole column at -inf
            for (std::size_t l = 0; l < card; ++l) {
                const double num =
                    static_cast<double>(counts.cond_count(j, l, k)) + smoothing;
                if (num > 0)
                    p.log_probs[layout.cond_index(j, l, k)] =
                        std::log(num / denom);
            }
        }
    }
    return p;
}

std::vector<double> log_joint(const ParamTable& params,
                              std::span<const std::int32_t> instance) {
    const ParamLayout& layout = params.layout;
    const std::size_t o = layout.n_classes();
    std::vector<double> scores(o);
    for (std::size_t k = 0; k < o; ++k)
        scores[k] = params.log_probs[layout.prior_index(k)];
    for (std::size_t j = 0; j < layout.n_features(); ++j) {
        const std::int32_t v = instance[j];
        if (v < 0) continue;
        for (std::size_t k = 0; k < o; ++k)
            scores[k] +=
                params.log_probs[layout.cond_index(j, static_cast<std::size_t>(v), k)];
    }
    return scores;
}

namespace {

std::size_t argmax_lowest(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < v.size(); ++k)
        if (v[k] > v[best]) best = k;
    return best;
}

}  // namespace

std::size_t predict(const ParamTable& params,
                    std::span<const std::int32_t> instance) {
    std::vector<double> scores = log_joint(params, instance);
    std::size_t best = argmax_lowest(scores);
    if (scores[best] != kNegInf) return best;
    // Every class has zero joint probability: fall back to the prior.
    std::vector<double> prior(params.layout.n_classes());
    for (std::size_t k = 0; k < prior.size(); ++k)
        prior[k] = params.log_prior(k);
    return argmax_lowest(prior);
}

double accuracy(const ParamTable& params, const Dataset& data,
                const std::vector<std::size_t>& rows) {
    if (rows.empty()) return 0.0;
    const std::size_t n = data.features();
    std::size_t hits = 0;
    for (std::size_t i : rows) {
        std::span<const std::int32_t> inst(data.x.data() + i * n, n);
        if (predict(params, inst) == static_cast<std::size_t>(data.label(i)))
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

std::string param_table_to_json(const ParamTable& params,
                                const Schema& schema) {
    const ParamLayout& layout = params.layout;
    nlohmann::json doc;
    doc["schema_hash"] = layout.hash();
    doc["alpha"] = params.smoothing;
    doc["class_labels"] = schema.class_labels;
    doc["feature_names"] = schema.feature_names;
    nlohmann::json cards = nlohmann::json::array();
    for (std::size_t j = 0; j < layout.n_features(); ++j)
        cards.push_back(layout.cardinality(j));
    doc["cardinalities"] = cards;

    auto encode = [](double v) {
        return v == kNegInf ? nlohmann::json(nullptr) : nlohmann::json(v);
    };
    nlohmann::json prior = nlohmann::json::array();
    for (std::size_t k = 0; k < layout.n_classes(); ++k)
        prior.push_back(encode(params.log_prior(k)));
    nlohmann::json cond = nlohmann::json::array();
    for (std::size_t j = 0; j < layout.n_features(); ++j)
        for (std::size_t l = 0; l < layout.cardinality(j); ++l)
            for (std::size_t k = 0; k < layout.n_classes(); ++k)
                cond.push_back(encode(params.log_cond(j, l, k)));
    doc["log_prior"] = std::move(prior);
    doc["log_cond"] = std::move(cond);
    return doc.dump(2);
}

ParamTable param_table_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model file is not valid JSON: ") +
                         e.what());
    }

    Schema schema;
    schema.class_labels = doc.at("class_labels").get<std::vector<std::string>>();
    schema.feature_names =
        doc.at("feature_names").get<std::vector<std::string>>();
    const auto cards = doc.at("cardinalities").get<std::vector<std::size_t>>();
    if (cards.size() != schema.feature_names.size())
        throw SchemaError("model file: cardinality/name count mismatch");
    schema.feature_values.resize(cards.size());
    for (std::size_t j = 0; j < cards.size(); ++j)
        for (std::size_t l = 0; l < cards[j]; ++l)
            schema.feature_values[j].push_back("v" + std::to_string(l));

    ParamTable p;
    p.layout = ParamLayout(schema);
    if (doc.at("schema_hash").get<std::uint64_t>() != p.layout.hash())
        throw SchemaError("model file: schema hash does not match its layout");
    p.smoothing = doc.at("alpha").get<double>();
    p.log_probs.assign(p.layout.dim(), kNegInf);

    auto decode = [](const nlohmann::json& v) {
        return v.is_null() ? kNegInf : v.get<double>();
    };
    const auto& prior = doc.at("log_prior");
    if (prior.size() != p.layout.n_classes())
        throw SchemaError("model file: log_prior has wrong length");
    for (std::size_t k = 0; k < prior.size(); ++k)
        p.log_probs[p.layout.prior_index(k)] = decode(prior[k]);
    const auto& cond = doc.at("log_cond");
    if (cond.size() != p.layout.dim() - p.layout.n_classes())
        throw SchemaError("model file: log_cond has wrong length");
    std::size_t idx = 0;
    for (std::size_t j = 0; j < p.layout.n_features(); ++j)
        for (std::size_t l = 0; l < p.layout.cardinality(j); ++l)
            for (std::size_t k = 0; k < p.layout.n_classes(); ++k)
                p.log_probs[p.layout.cond_index(j, l, k)] = decode(cond[idx++]);
    return p;
}

}  // namespace fedbayes
