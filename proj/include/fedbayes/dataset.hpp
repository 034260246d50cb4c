#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedbayes/schema.hpp"

namespace fedbayes {

/// A fully categorical dataset. Feature values and class labels are stored
/// as integer codes into the schema vocabularies; a feature code of -1
/// marks a missing value (skipped by counting, scoring and gradients).
/// Class labels are never missing.
struct Dataset {
    Schema schema;
    std::vector<std::int32_t> x;  // row-major, m * n codes
    std::vector<std::int32_t> y;  // m codes

    std::size_t rows() const { return y.size(); }
    std::size_t features() const { return schema.n_features(); }
    std::size_t classes() const { return schema.n_classes(); }

    std::int32_t value(std::size_t i, std::size_t j) const {
        return x[i * schema.n_features() + j];
    }
    std::int32_t label(std::size_t i) const { return y[i]; }
    bool is_missing(std::size_t i, std::size_t j) const {
        return value(i, j) < 0;
    }

    /// Validates the schema and every code. Throws SchemaError.
    void validate() const;

    /// Copies the given rows into a standalone dataset (schema shared).
    Dataset subset(const std::vector<std::size_t>& rows_idx) const;

    /// Builds a dataset from pre-coded arrays, validating on the way in.
    static Dataset from_arrays(Schema schema, std::vector<std::int32_t> x,
                               std::vector<std::int32_t> y);
};

/// Loads a comma-separated file. Every column is treated as categorical;
/// codes follow first appearance order in the file. `class_col` selects the
/// label column (-1 = last). With `has_header` the first line supplies
/// column names, otherwise names are synthesized as f0..f{n-1}.
Dataset load_csv(const std::string& path, bool has_header = false,
                 int class_col = -1);

/// Loads a nominal-attributes ARFF file. The last attribute is the class.
/// Category codes follow declaration order; a '?' in the data appends a
/// dedicated "?" category to that feature (absent labels stay an error).
/// Numeric/real/integer/string attributes are rejected.
Dataset load_arff(const std::string& path);

/// Dispatches on the file extension: .arff goes to load_arff, anything
/// else to load_csv.
Dataset load_data(const std::string& path, bool has_header = false,
                  int class_col = -1);

/// Splits row indices of `data` into `n_clients` disjoint shards,
/// stratified by class: each client receives floor(m_k / C) rows of class
/// k plus at most one leftover, with leftovers rotating across clients so
/// no client systematically collects them. Shards are sorted ascending.
/// Throws PartitionError when rows(data) < n_clients * min_client_size.
std::vector<std::vector<std::size_t>> partition_clients(
    const Dataset& data, std::size_t n_clients, std::uint64_t seed,
    std::size_t min_client_size = 100);

/// Splits one shard into k stratified folds using the same
/// largest-remainder scheme as partition_clients. Returns the test rows of
/// each fold (disjoint, covering the shard, each nonempty). Throws
/// FoldError when k_folds < 2 or the shard has fewer rows than folds.
std::vector<std::vector<std::size_t>> make_folds(
    const Dataset& data, const std::vector<std::size_t>& shard_rows,
    std::size_t k_folds, std::uint64_t seed);

/// Rows of `shard_rows` not in `fold_rows` (both ascending), i.e. the
/// training half of a CV split.
std::vector<std::size_t> fold_complement(
    const std::vector<std::size_t>& shard_rows,
    const std::vector<std::size_t>& fold_rows);

}  // namespace fedbayes
