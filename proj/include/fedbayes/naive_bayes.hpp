#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedbayes/dataset.hpp"
#include "fedbayes/schema.hpp"

namespace fedbayes {

/// Exact integer tallies over a row subset. Cells share the flat
/// ParamLayout: the first o entries count classes, the rest count
/// (feature, value, class) co-occurrences. Missing feature cells are
/// skipped for that feature only, so per-feature column sums may fall
/// short of `total` by exactly the masked rows.
struct CountTable {
    ParamLayout layout;
    std::vector<std::int64_t> cells;
    std::int64_t total = 0;

    std::int64_t class_count(std::size_t k) const {
        return cells[layout.prior_index(k)];
    }
    std::int64_t cond_count(std::size_t j, std::size_t value,
                            std::size_t k) const {
        return cells[layout.cond_index(j, value, k)];
    }
};

/// Log-space parameter table: priors and per-(feature, value, class)
/// conditionals in the shared flat layout. Zero-probability cells hold a
/// -inf sentinel, which propagates through sums and loses every argmax
/// against a finite value; code must never subtract two sentinels.
struct ParamTable {
    ParamLayout layout;
    double smoothing = 1.0;
    std::vector<double> log_probs;

    double log_prior(std::size_t k) const {
        return log_probs[layout.prior_index(k)];
    }
    double log_cond(std::size_t j, std::size_t value, std::size_t k) const {
        return log_probs[layout.cond_index(j, value, k)];
    }
};

/// Tallies the selected rows. Throws FitError when `rows` is empty.
CountTable fit_counts(const Dataset& data, const std::vector<std::size_t>& rows);

/// Tallies every row.
CountTable fit_counts(const Dataset& data);

/// Elementwise sum of count tables. Summing shard tables then normalizing
/// reproduces a centralized fit exactly, because integer addition is
/// order-free. Throws SchemaError on layout mismatch, FitError on an empty
/// list.
CountTable pool_counts(const std::vector<CountTable>& tables);

/// Turns counts into log-probabilities with pseudo-count smoothing:
///   prior_k = (#(y_k) + a) / (m + a*o)
///   cond_{l|k,j} = (#(x_l, y_k) + a) / (n_jk + a*|X_j|)
/// where n_jk counts the rows of class k observed at feature j (equal to
/// #(y_k) unless cells are missing). a = 0 gives the raw MLE with -inf for
/// empty cells. Throws NormalizeError when total = 0 or a < 0.
ParamTable normalize(const CountTable& counts, double smoothing);

/// log P(y_k, x) for every class: log_prior[k] + sum_j log_cond[j][x_j][k].
/// Missing features (code < 0) are skipped; -inf entries propagate.
std::vector<double> log_joint(const ParamTable& params,
                              std::span<const std::int32_t> instance);

/// MAP class: argmax of log_joint, ties to the lowest class index. When
/// every joint is -inf (an instance outside all supports under a = 0) the
/// prediction falls back to the prior argmax.
std::size_t predict(const ParamTable& params,
                    std::span<const std::int32_t> instance);

/// Fraction of `rows` whose MAP prediction matches the label.
double accuracy(const ParamTable& params, const Dataset& data,
                const std::vector<std::size_t>& rows);

/// JSON round-trip for local model files (never transmitted between
/// clients). -inf cells serialize as null.
std::string param_table_to_json(const ParamTable& params,
                                const Schema& schema);
ParamTable param_table_from_json(const std::string& text);

}  // namespace fedbayes
