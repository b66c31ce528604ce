#pragma once

#include <stdexcept>
#include <string>

namespace shapeopt {

// Error categories map one-to-one onto the process exit codes of the CLI.
enum class ErrorCategory { config = 1, runtime = 2, mesh = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory cat, const std::string& msg)
      : std::runtime_error(msg), category(cat) {}
  ErrorCategory category;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorCategory::config, m) {}
};

struct NonConformingCurve : Error {
  explicit NonConformingCurve(const std::string& m) : Error(ErrorCategory::mesh, m) {}
};

struct IntersectingShapes : Error {
  explicit IntersectingShapes(const std::string& m) : Error(ErrorCategory::mesh, m) {}
};

struct InvalidMesh : Error {
  explicit InvalidMesh(const std::string& m) : Error(ErrorCategory::mesh, m) {}
};

struct InvalidMeshAfterRetry : Error {
  explicit InvalidMeshAfterRetry(const std::string& m) : Error(ErrorCategory::mesh, m) {}
};

struct InvalidPartition : Error {
  explicit InvalidPartition(const std::string& m) : Error(ErrorCategory::mesh, m) {}
};

struct NonpositiveCoefficient : Error {
  explicit NonpositiveCoefficient(const std::string& m) : Error(ErrorCategory::runtime, m) {}
};

struct NonpositiveKappa : Error {
  explicit NonpositiveKappa(const std::string& m) : Error(ErrorCategory::runtime, m) {}
};

struct NonpositiveMu : Error {
  explicit NonpositiveMu(const std::string& m) : Error(ErrorCategory::runtime, m) {}
};

struct SolverDivergence : Error {
  explicit SolverDivergence(const std::string& m) : Error(ErrorCategory::runtime, m) {}
};

struct BacktrackExhausted : Error {
  explicit BacktrackExhausted(const std::string& m) : Error(ErrorCategory::mesh, m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorCategory::runtime, m) {}
};

}  // namespace shapeopt
