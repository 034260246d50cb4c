#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "fedbayes/errors.hpp"

namespace fedbayes {

/// Describes the discrete shape of a dataset: n features with per-feature
/// category vocabularies, plus the class vocabulary. Integer codes in a
/// Dataset index into these vocabularies.
struct Schema {
    std::vector<std::string> feature_names;
    std::vector<std::vector<std::string>> feature_values;  // [feature][code]
    std::vector<std::string> class_labels;

    std::size_t n_features() const { return feature_names.size(); }
    std::size_t n_classes() const { return class_labels.size(); }
    std::size_t cardinality(std::size_t j) const { return feature_values[j].size(); }

    void validate() const {
        if (feature_names.size() != feature_values.size())
            throw SchemaError("schema: feature name/value count mismatch");
        if (class_labels.size() < 2)
            throw SchemaError("schema: need at least two classes, got " +
                              std::to_string(class_labels.size()));
        if (feature_names.empty())
            throw SchemaError("schema: need at least one feature");
        for (std::size_t j = 0; j < feature_values.size(); ++j) {
            if (feature_values[j].empty())
                throw SchemaError("schema: feature '" + feature_names[j] +
                                  "' has no categories");
        }
    }
};

/// Flat indexing for parameter tables and weight vectors.
///
/// Layout: the first o slots are the class priors, then conditional cells
/// follow feature-major, value-major, class-minor. A weight vector, a
/// gradient and a log-probability table all share this layout, which is
/// what lets the federated averaging step treat them as plain arrays.
class ParamLayout {
public:
    ParamLayout() = default;

    explicit ParamLayout(const Schema& schema)
        : n_classes_(schema.n_classes()), cardinalities_(schema.n_features()) {
        for (std::size_t j = 0; j < schema.n_features(); ++j)
            cardinalities_[j] = schema.cardinality(j);
        offsets_.resize(cardinalities_.size());
        std::size_t acc = 0;
        for (std::size_t j = 0; j < cardinalities_.size(); ++j) {
            offsets_[j] = acc;
            acc += cardinalities_[j];
        }
        total_values_ = acc;
    }

    std::size_t n_classes() const { return n_classes_; }
    std::size_t n_features() const { return cardinalities_.size(); }
    std::size_t cardinality(std::size_t j) const { return cardinalities_[j]; }

    /// Total number of cells: o priors + o * sum_j |X_j| conditionals.
    std::size_t dim() const { return n_classes_ * (1 + total_values_); }

    std::size_t prior_index(std::size_t k) const { return k; }

    std::size_t cond_index(std::size_t j, std::size_t value,
                           std::size_t k) const {
        return n_classes_ + (offsets_[j] + value) * n_classes_ + k;
    }

    /// FNV-1a over a version tag, the class count and the cardinality list.
    /// Two parties agree on this hash iff their weight vectors are
    /// cell-for-cell compatible; it travels in every weight message.
    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto absorb = [&h](std::uint64_t v) {
            for (int byte = 0; byte < 8; ++byte) {
                h ^= (v >> (8 * byte)) & 0xffULL;
                h *= 0x100000001b3ULL;
            }
        };
        absorb(kLayoutVersion);
        absorb(n_classes_);
        absorb(cardinalities_.size());
        for (std::size_t c : cardinalities_) absorb(c);
        return h;
    }

    bool operator==(const ParamLayout& other) const {
        return n_classes_ == other.n_classes_ &&
               cardinalities_ == other.cardinalities_;
    }

private:
    static constexpr std::uint64_t kLayoutVersion = 1;

    std::size_t n_classes_ = 0;
    std::vector<std::size_t> cardinalities_;
    std::vector<std::size_t> offsets_;
    std::size_t total_values_ = 0;
};

}  // namespace fedbayes
