#ifndef LOCORANK_ERRORS_HPP
#define LOCORANK_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace locorank {

/// Base class for every error this library throws on purpose.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A session-log line that cannot be decoded (bad JSON, missing/mistyped field).
class MalformedRecord : public Error {
  public:
    MalformedRecord(std::size_t line, const std::string& field, const std::string& detail)
        : Error("malformed record at line " + std::to_string(line) + ", field '" + field +
                "': " + detail),
          line_(line), field_(field) {}
    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

  private:
    std::size_t line_;
    std::string field_;
};

/// A decoded value that violates a domain invariant (range, monotonicity, ...).
class InvariantViolation : public Error {
  public:
    InvariantViolation(std::size_t line, const std::string& field, const std::string& detail)
        : Error("invariant violation at line " + std::to_string(line) + ", field '" + field +
                "': " + detail),
          line_(line), field_(field) {}
    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

  private:
    std::size_t line_;
    std::string field_;
};

class DuplicateTrialKey : public Error {
  public:
    DuplicateTrialKey(std::size_t line, const std::string& key)
        : Error("duplicate trial key at line " + std::to_string(line) + ": " + key), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class NonFiniteInput : public Error {
  public:
    explicit NonFiniteInput(const std::string& where) : Error("non-finite input in " + where) {}
};

class LengthMismatch : public Error {
  public:
    LengthMismatch(std::size_t a, std::size_t b)
        : Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
    explicit LengthMismatch(const std::string& detail) : Error(detail) {}
};

class EmptySeries : public Error {
  public:
    explicit EmptySeries(const std::string& where) : Error("empty series in " + where) {}
};

class DegenerateAxis : public Error {
  public:
    DegenerateAxis() : Error("start and target coincide; task axis undefined") {}
    explicit DegenerateAxis(const std::string& detail) : Error(detail) {}
};

class InsufficientSamples : public Error {
  public:
    InsufficientSamples(const std::string& where, std::size_t n, std::size_t need)
        : Error(where + ": got " + std::to_string(n) + " samples, need >= " +
                std::to_string(need)) {}
    explicit InsufficientSamples(const std::string& detail) : Error(detail) {}
};

class MissingDominantController : public Error {
  public:
    explicit MissingDominantController(const std::string& key)
        : Error("dominant controller log empty for trial " + key) {}
};

class TooManyMissing : public Error {
  public:
    explicit TooManyMissing(std::size_t missing)
        : Error("quickdash has " + std::to_string(missing) + " missing items (max 1)") {}
};

class MissingQuestionnaire : public Error {
  public:
    explicit MissingQuestionnaire(const std::string& participant)
        : Error("no questionnaire record for participant " + participant) {}
    MissingQuestionnaire(const std::string& participant, const std::string& detail)
        : Error("questionnaire for participant " + participant + " " + detail) {}
};

class MissingCalibrationTrials : public Error {
  public:
    MissingCalibrationTrials(const std::string& participant, const std::string& technique)
        : Error("participant " + participant + " has no trials with calibration technique " +
                technique) {}
};

class SchemaMismatch : public Error {
  public:
    explicit SchemaMismatch(const std::string& detail) : Error("schema mismatch: " + detail) {}
};

class TooManyFolds : public Error {
  public:
    TooManyFolds(std::size_t k, std::size_t groups)
        : Error("requested " + std::to_string(k) + " folds for " + std::to_string(groups) +
                " participants") {}
};

class FoldTooSmall : public Error {
  public:
    explicit FoldTooSmall(std::size_t fold)
        : Error("training set of fold " + std::to_string(fold) + " has < 2 instances") {}
};

class ConfigInvalid : public Error {
  public:
    explicit ConfigInvalid(const std::string& detail) : Error("invalid config: " + detail) {}
};

/// Train/test participant overlap. Thrown by the leakage check; seeing this
/// means a fold plan was misapplied, never a data problem.
class LeakageDetected : public Error {
  public:
    explicit LeakageDetected(const std::string& participant)
        : Error("participant " + participant + " appears in both train and test") {}
};

}  // namespace locorank

#endif
