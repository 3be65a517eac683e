#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgame {

// Base class for every recoverable error raised by the library. Callers that
// only need the exit-code contract can catch this one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- dataset / ingestion ---------------------------------------------------

class RowParseError : public Error {
public:
    RowParseError(std::size_t line, const std::string& column, const std::string& detail)
        : Error("row parse error at line " + std::to_string(line) + ", column '" + column +
                "': " + detail),
          line(line),
          column(column) {}
    std::size_t line;
    std::string column;
};

class DuplicateKeyError : public Error {
public:
    DuplicateKeyError(const std::string& occupant, const std::string& timestamp)
        : Error("duplicate (occupant, timestamp) key: (" + occupant + ", " + timestamp + ")") {}
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what) : Error("schema error: " + what) {}
};

class WindowTooShort : public Error {
public:
    WindowTooShort(std::size_t got, std::size_t minimum)
        : Error("sensor window of length " + std::to_string(got) + " is below the minimum " +
                std::to_string(minimum)) {}
};

class MissingBaselineData : public Error {
public:
    MissingBaselineData(const std::string& occupant, const std::string& resource,
                        const std::string& daytype)
        : Error("no qualifying " + daytype + " day for occupant '" + occupant + "', resource '" +
                resource + "' in the pre-game range") {}
};

class InvalidBaseline : public Error {
public:
    explicit InvalidBaseline(double b) : Error("baseline must be positive, got " + std::to_string(b)) {}
};

class OverlapError : public Error {
public:
    OverlapError() : Error("train and test date intervals overlap") {}
};

// --- simulation -------------------------------------------------------------

class EmptyChoiceSet : public Error {
public:
    EmptyChoiceSet() : Error("choice set is empty") {}
};

class InvalidHorizon : public Error {
public:
    explicit InvalidHorizon(long long minutes)
        : Error("simulation horizon must be at least one day of minutes, got " +
                std::to_string(minutes)) {}
};

class DuplicateOccupantId : public Error {
public:
    explicit DuplicateOccupantId(const std::string& id)
        : Error("duplicate occupant id in cohort: '" + id + "'") {}
};

class DegenerateLabels : public Error {
public:
    DegenerateLabels() : Error("all realized states are identical; AUC is undefined") {}
};

// --- features ----------------------------------------------------------------

class UnknownColumn : public Error {
public:
    explicit UnknownColumn(const std::string& name) : Error("unknown column '" + name + "'") {}
};

class EmptyTable : public Error {
public:
    EmptyTable() : Error("table has no rows") {}
};

class ConstantColumn : public Error {
public:
    explicit ConstantColumn(const std::string& name)
        : Error("column '" + name + "' has zero variance and cannot be standardized") {}
};

class LengthMismatch : public Error {
public:
    LengthMismatch(std::size_t a, std::size_t b)
        : Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class KOutOfRange : public Error {
public:
    KOutOfRange(std::size_t k, std::size_t n_cols)
        : Error("k = " + std::to_string(k) + " is out of range for " + std::to_string(n_cols) +
                " columns") {}
};

class MinorityTooSmall : public Error {
public:
    explicit MinorityTooSmall(std::size_t n)
        : Error("minority class has " + std::to_string(n) + " rows; at least 2 required") {}
};

// --- learning ----------------------------------------------------------------

class SingleClassError : public Error {
public:
    SingleClassError() : Error("labels contain a single class") {}
};

class SingularCovariance : public Error {
public:
    SingularCovariance() : Error("pooled covariance is singular") {}
};

class ArityMismatch : public Error {
public:
    ArityMismatch(std::size_t got, std::size_t expected)
        : Error("feature arity " + std::to_string(got) + " does not match training arity " +
                std::to_string(expected)) {}
};

class NonFiniteLoss : public Error {
public:
    explicit NonFiniteLoss(const std::string& where)
        : Error("non-finite loss encountered in " + where) {}
};

class TooFewRows : public Error {
public:
    TooFewRows(std::size_t rows, std::size_t window)
        : Error(std::to_string(rows) + " rows cannot form windows of length " +
                std::to_string(window)) {}
};

// --- explainability ------------------------------------------------------------

class DegenerateDesign : public Error {
public:
    DegenerateDesign() : Error("all candidate inner products are zero; lambda grid undefined") {}
};

class FoldTooSmall : public Error {
public:
    explicit FoldTooSmall(const std::string& detail) : Error("fold too small: " + detail) {}
};

class SeriesTooShort : public Error {
public:
    SeriesTooShort(std::size_t n, int lag)
        : Error("series of effective length " + std::to_string(n) +
                " is too short for lag order " + std::to_string(lag)) {}
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(const std::string& detail)
        : Error("rank-deficient regression design: " + detail) {}
};

class TooFewPlayers : public Error {
public:
    explicit TooFewPlayers(std::size_t n)
        : Error("stratification needs at least 3 occupants, got " + std::to_string(n)) {}
};

// --- evaluation ------------------------------------------------------------------

class EmptySeries : public Error {
public:
    EmptySeries() : Error("series must be nonempty") {}
};

class EmptySpace : public Error {
public:
    EmptySpace() : Error("hyperparameter space is empty") {}
};

class SampleTooSmall : public Error {
public:
    explicit SampleTooSmall(std::size_t n)
        : Error("sample of size " + std::to_string(n) + " is too small; need at least 2") {}
};

class ZeroVariance : public Error {
public:
    ZeroVariance() : Error("both samples are degenerate (zero variance)") {}
};

// --- configuration ------------------------------------------------------------------

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

}  // namespace sgame
