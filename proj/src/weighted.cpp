#include "fedbayes/weighted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fedbayes/errors.hpp"

namespace fedbayes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_dim(const ParamTable& params, const WeightVector& weights) {
    if (weights.size() != params.log_probs.size())
        throw SchemaError("weight vector has " +
                          std::to_string(weights.size()) +
                          " entries, parameter table has " +
                          std::to_string(params.log_probs.size()));
}

[[noreturn]] void throw_cell(const ParamLayout& layout, std::size_t flat) {
    if (flat < layout.n_classes())
        throw EvaluationError("zero-probability prior of class " +
                              std::to_string(flat) +
                              " entered a weighted score; refit with "
                              "smoothing > 0");
    // Invert the flat index into (feature, value, class) for the message.
    std::size_t rest = (flat - layout.n_classes()) / layout.n_classes();
    std::size_t k = (flat - layout.n_classes()) % layout.n_classes();
    std::size_t j = 0;
    while (rest >= layout.cardinality(j)) {
        rest -= layout.cardinality(j);
        ++j;
    }
    throw EvaluationError(
        "zero-probability cell (feature " + std::to_string(j) + ", value " +
        std::to_string(rest) + ", class " + std::to_string(k) +
        ") entered a weighted score; refit with smoothing > 0");
}

// w * log_theta with the 0 * -inf = 0 convention for score paths.
double score_term(const ParamLayout& layout, std::size_t flat, double w,
                  double lp) {
    if (lp == kNegInf) {
        if (w == 0.0) return 0.0;
        throw_cell(layout, flat);
    }
    return w * lp;
}

std::size_t argmax_lowest(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < v.size(); ++k)
        if (v[k] > v[best]) best = k;
    return best;
}

}  // namespace

WeightVector unit_weights(const ParamLayout& layout) {
    return WeightVector(layout.dim(), 1.0);
}

std::vector<double> weighted_scores(const ParamTable& params,
                                    const WeightVector& weights,
                                    std::span<const std::int32_t> instance) {
    check_dim(params, weights);
    const ParamLayout& layout = params.layout;
    const std::size_t o = layout.n_classes();
    std::vector<double> scores(o);
    for (std::size_t k = 0; k < o; ++k) {
        const std::size_t idx = layout.prior_index(k);
        scores[k] =
            score_term(layout, idx, weights[idx], params.log_probs[idx]);
    }
    for (std::size_t j = 0; j < layout.n_features(); ++j) {
        const std::int32_t v = instance[j];
        if (v < 0) continue;
        for (std::size_t k = 0; k < o; ++k) {
            const std::size_t idx =
                layout.cond_index(j, static_cast<std::size_t>(v), k);
            scores[k] +=
                score_term(layout, idx, weights[idx], params.log_probs[idx]);
        }
    }
    return scores;
}

namespace {

// In-place s -> s - logsumexp(s), max-shifted. Scores are always finite
// here (score paths either produce finite terms or throw).
void softmax_normalize(std::vector<double>& s) {
    const double mx = *std::max_element(s.begin(), s.end());
    double sum = 0.0;
    for (double v : s) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    for (double& v : s) v -= lse;
}

}  // namespace

std::vector<double> log_posterior(const ParamTable& params,
                                  const WeightVector& weights,
                                  std::span<const std::int32_t> instance) {
    std::vector<double> s = weighted_scores(params, weights, instance);
    softmax_normalize(s);
    return s;
}

std::size_t predict_weighted(const ParamTable& params,
                             const WeightVector& weights,
                             std::span<const std::int32_t> instance) {
    // The posterior shares its argmax with the raw scores; no need to
    // normalize just to compare.
    return argmax_lowest(weighted_scores(params, weights, instance));
}

double accuracy_weighted(const ParamTable& params, const WeightVector& weights,
                         const Dataset& data,
                         const std::vector<std::size_t>& rows) {
    if (rows.empty()) return 0.0;
    const std::size_t n = data.features();
    std::size_t hits = 0;
    for (std::size_t i : rows) {
        std::span<const std::int32_t> inst(data.x.data() + i * n, n);
        if (predict_weighted(params, weights, inst) ==
            static_cast<std::size_t>(data.label(i)))
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

namespace {

struct CllAccum {
    double value = 0.0;
    std::vector<double> gradient;
};

// Serial evaluation of rows[lo, hi) in ascending order.
void cll_block(const ParamTable& params, const WeightVector& weights,
               const Dataset& data, const std::vector<std::size_t>& rows,
               std::size_t lo, std::size_t hi, CllAccum& acc) {
    const ParamLayout& layout = params.layout;
    const std::size_t o = layout.n_classes();
    const std::size_t n = data.features();
    std::vector<double> scores(o);
    std::vector<std::size_t> touched;  // cond cells of this instance

    for (std::size_t r = lo; r < hi; ++r) {
        const std::size_t i = rows[r];
        touched.clear();
        for (std::size_t k = 0; k < o; ++k) {
            const std::size_t idx = layout.prior_index(k);
            if (params.log_probs[idx] == kNegInf) throw_cell(layout, idx);
            scores[k] = weights[idx] * params.log_probs[idx];
        }
        for (std::size_t j = 0; j < n; ++j) {
            const std::int32_t v = data.value(i, j);
            if (v < 0) continue;
            for (std::size_t k = 0; k < o; ++k) {
                const std::size_t idx =
                    layout.cond_index(j, static_cast<std::size_t>(v), k);
                if (params.log_probs[idx] == kNegInf) throw_cell(layout, idx);
                scores[k] += weights[idx] * params.log_probs[idx];
                touched.push_back(idx);
            }
        }
        softmax_normalize(scores);  // scores now hold log P(k | x_i)
        const auto yi = static_cast<std::size_t>(data.label(i));
        acc.value += scores[yi];

        // Residual (1[y_i = k] - P(k|x_i)) scales every touched log theta.
        for (std::size_t k = 0; k < o; ++k) {
            const double resid = (k == yi ? 1.0 : 0.0) - std::exp(scores[k]);
            const std::size_t pk = layout.prior_index(k);
            acc.gradient[pk] += resid * params.log_probs[pk];
            scores[k] = resid;  // reuse the buffer for the cond pass
        }
        for (std::size_t t = 0; t < touched.size(); ++t) {
            const std::size_t idx = touched[t];
            // touched was filled class-minor, so t % o recovers k.
            acc.gradient[idx] += scores[t % o] * params.log_probs[idx];
        }
    }
}

// Fixed recursive halving: the reduction tree depends only on the row
// count, so any parallel schedule of the same tree reproduces these bits.
CllAccum cll_range(const ParamTable& params, const WeightVector& weights,
                   const Dataset& data, const std::vector<std::size_t>& rows,
                   std::size_t lo, std::size_t hi) {
    CllAccum acc;
    acc.gradient.assign(params.log_probs.size(), 0.0);
    if (hi - lo <= 64) {
        cll_block(params, weights, data, rows, lo, hi, acc);
        return acc;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    acc = cll_range(params, weights, data, rows, lo, mid);
    CllAccum right = cll_range(params, weights, data, rows, mid, hi);
    acc.value += right.value;
    for (std::size_t c = 0; c < acc.gradient.size(); ++c)
        acc.gradient[c] += right.gradient[c];
    return acc;
}

}  // namespace

CllEvaluation cll(const ParamTable& params, const WeightVector& weights,
                  const Dataset& data, const std::vector<std::size_t>& rows) {
    check_dim(params, weights);
    if (rows.empty())
        throw FitError("conditional log-likelihood of an empty row set");
    CllAccum acc = cll_range(params, weights, data, rows, 0, rows.size());
    return CllEvaluation{acc.value, std::move(acc.gradient)};
}

}  // namespace fedbayes
