#pragma once

#include <stdexcept>
#include <string>

namespace emsx {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (CSV, sidecar, artifacts).
class IngestError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or missing prerequisite for a pipeline step.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// K-means cannot produce the requested number of distinct clusters.
class DegenerateClusterError : public Error {
 public:
  using Error::Error;
};

/// A calibrated controller was requested but its artifact is absent.
class ArtifactMissing : public Error {
 public:
  using Error::Error;
};

/// A controller returned a control outside the admissible interval.
class ControllerFault : public Error {
 public:
  using Error::Error;
};

// Warnings go to stderr unless silenced (tests silence them).
void log_warning(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace emsx
