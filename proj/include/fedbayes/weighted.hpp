#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedbayes/dataset.hpp"
#include "fedbayes/naive_bayes.hpp"

namespace fedbayes {

/// One real exponent per parameter cell, in the exact flat layout of
/// ParamTable::log_probs (priors first, then feature-major conditionals).
/// Sharing the indexing function with the probability table is what keeps
/// scoring, gradients, aggregation and wire encoding aligned.
using WeightVector = std::vector<double>;

/// The all-ones weight vector, under which the weighted model collapses to
/// plain generative NB.
WeightVector unit_weights(const ParamLayout& layout);

/// Pre-normalization class scores:
///   s_k = w_k * log_prior(k) + sum_j w_{k,j,x_j} * log_cond(j, x_j, k)
/// Missing features are skipped. A zero weight silences a -inf cell
/// (contributes 0); a nonzero weight on a -inf cell is an EvaluationError
/// naming the cell, which default smoothing makes unreachable.
std::vector<double> weighted_scores(const ParamTable& params,
                                    const WeightVector& weights,
                                    std::span<const std::int32_t> instance);

/// Scores normalized into log class probabilities: s - logsumexp(s),
/// computed with the max shift so huge scores cannot overflow.
std::vector<double> log_posterior(const ParamTable& params,
                                  const WeightVector& weights,
                                  std::span<const std::int32_t> instance);

/// Argmax of the weighted posterior, ties to the lowest class index.
std::size_t predict_weighted(const ParamTable& params,
                             const WeightVector& weights,
                             std::span<const std::int32_t> instance);

/// Fraction of rows predicted correctly under the weighted model.
double accuracy_weighted(const ParamTable& params, const WeightVector& weights,
                         const Dataset& data,
                         const std::vector<std::size_t>& rows);

/// Conditional log-likelihood of a row set and its gradient in w.
struct CllEvaluation {
    double value = 0.0;            // sum of true-class log posteriors, <= 0
    std::vector<double> gradient;  // dCLL/dw, flat layout
};

/// CLL(w) = sum_i log P(y_i | x_i; params, w) with the probability table
/// held fixed, plus the analytic gradient:
///   d/dw_k       = sum_i (1[y_i = k] - P(k|x_i)) * log_prior(k)
///   d/dw_{k,j,l} = sum_i 1[x_ij = l] (1[y_i = k] - P(k|x_i)) * log_cond(j,l,k)
/// Per-instance terms are combined by splitting the row range in half
/// recursively (serial below 64 rows), so the floating-point reduction
/// order is a function of the row list alone and never of scheduling.
///
/// Unlike the score paths, this refuses to touch any -inf cell even under a
/// zero weight: the gradient coordinate would be infinite. Throws
/// EvaluationError naming the cell; FitError on an empty row set.
CllEvaluation cll(const ParamTable& params, const WeightVector& weights,
                  const Dataset& data, const std::vector<std::size_t>& rows);

}  // namespace fedbayes
