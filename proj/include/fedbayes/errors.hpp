#pragma once

#include <stdexcept>
#include <string>

namespace fedbayes {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, long line = -1)
        : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

/// Structurally invalid dataset: bad cardinalities, fewer than two classes,
/// numeric columns without category declarations, empty data.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A client partition cannot satisfy the per-client minimum size.
class PartitionError : public Error {
public:
    using Error::Error;
};

/// A shard is too small for the requested fold count.
class FoldError : public Error {
public:
    using Error::Error;
};

/// Counting over an empty or invalid row set.
class FitError : public Error {
public:
    using Error::Error;
};

/// Normalizing a count table with no mass.
class NormalizeError : public Error {
public:
    using Error::Error;
};

/// A weighted score touched a zero-probability cell with a nonzero weight.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Non-finite objective or gradient encountered during minimization.
class OptimizerError : public Error {
public:
    using Error::Error;
};

/// Weight messages are inconsistent: missing client, round or schema mismatch.
class AggregationError : public Error {
public:
    using Error::Error;
};

/// File output failed.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fedbayes
