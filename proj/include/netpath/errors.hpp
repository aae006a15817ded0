#pragma once

#include <stdexcept>
#include <string>

namespace netpath {

/// Coarse error category, used by the CLI to pick an exit code.
enum class ErrorKind {
  input,      // malformed or inadmissible input data / configuration
  numerical,  // a numerical procedure failed or lost too much accuracy
  explosion,  // a combinatorial cap was exceeded
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct MissingData : Error {
  explicit MissingData(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct InvalidVariance : Error {
  explicit InvalidVariance(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct InvalidComparison : Error {
  explicit InvalidComparison(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct DisconnectedNetwork : Error {
  explicit DisconnectedNetwork(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct UnknownTreatment : Error {
  explicit UnknownTreatment(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct InvalidTolerance : Error {
  explicit InvalidTolerance(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct NoDirectEvidence : Error {
  explicit NoDirectEvidence(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct NoIndirectEvidence : Error {
  explicit NoIndirectEvidence(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct InvalidLoop : Error {
  explicit InvalidLoop(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct InsufficientPaths : Error {
  explicit InsufficientPaths(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct DomainError : Error {
  explicit DomainError(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct ParseError : Error {
  explicit ParseError(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct InvalidConfig : Error {
  explicit InvalidConfig(std::string m) : Error(ErrorKind::input, std::move(m)) {}
};

struct NumericalFailure : Error {
  explicit NumericalFailure(std::string m) : Error(ErrorKind::numerical, std::move(m)) {}
};

struct PathExplosion : Error {
  explicit PathExplosion(std::string m) : Error(ErrorKind::explosion, std::move(m)) {}
};

}  // namespace netpath
