#pragma once

#include <stdexcept>
#include <string>

namespace rar {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  Validation = 1,
  Numerical = 2,
  Io = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Short machine-readable tag: "validation", "numerical" or "io".
  const char* tag() const noexcept {
    switch (kind_) {
      case ErrorKind::Validation: return "validation";
      case ErrorKind::Numerical: return "numerical";
      case ErrorKind::Io: return "io";
    }
    return "unknown";
  }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::Validation, message) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message)
      : Error(ErrorKind::Numerical, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::Io, message) {}
};

/// Z'WZ is rank deficient. `column` names the first design column that is
/// linearly dependent on the ones before it.
class SingularDesignError : public NumericalError {
 public:
  explicit SingularDesignError(std::string column)
      : NumericalError("singular design: column '" + column +
                       "' is collinear with preceding columns"),
        column_(std::move(column)) {}

  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// A unit with leverage 1 determines its own fitted value; its deletion
/// influence is undefined.
class DegenerateLeverageError : public NumericalError {
 public:
  DegenerateLeverageError(std::string unit_id, double leverage)
      : NumericalError("degenerate leverage for unit '" + unit_id +
                       "' (h = " + std::to_string(leverage) + ")"),
        unit_id_(std::move(unit_id)) {}

  const std::string& unit_id() const noexcept { return unit_id_; }

 private:
  std::string unit_id_;
};

}  // namespace rar
