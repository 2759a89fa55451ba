#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbgan {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value lies outside its admissible interval. `dimension` names the
// offending coordinate when there is one.
class RangeError : public Error {
 public:
  RangeError(const std::string& what, std::ptrdiff_t dimension = -1)
      : Error(what), dimension_(dimension) {}
  std::ptrdiff_t dimension() const noexcept { return dimension_; }

 private:
  std::ptrdiff_t dimension_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : Error("config field '" + field + "': " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A single environment query failed. Carries the raw parameter vector and
// the episode index the failure happened in.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::vector<double> mu, std::size_t episode)
      : Error(what), mu_(std::move(mu)), episode_(episode) {}
  const std::vector<double>& mu() const noexcept { return mu_; }
  std::size_t episode() const noexcept { return episode_; }

 private:
  std::vector<double> mu_;
  std::size_t episode_;
};

// The environment answered, but with something that violates the score
// contract (q outside [0,1], wrong version, wrong episode echo).
class ProtocolError : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

class MalformedResponseError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class NonFiniteScoreError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class TimeoutError : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

// A batch evaluation was aborted; `completed` evaluations had finished
// successfully (in index order) before the first failure.
class EvaluationAborted : public Error {
 public:
  EvaluationAborted(const std::string& what, std::size_t completed, std::size_t failed_index)
      : Error(what), completed_(completed), failed_index_(failed_index) {}
  std::size_t completed() const noexcept { return completed_; }
  std::size_t failed_index() const noexcept { return failed_index_; }

 private:
  std::size_t completed_;
  std::size_t failed_index_;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class EmptyInducedSetError : public Error {
 public:
  using Error::Error;
};

class InsufficientInducedSetError : public Error {
 public:
  InsufficientInducedSetError(const std::string& what, std::size_t qualifying)
      : Error(what), qualifying_(qualifying) {}
  std::size_t qualifying() const noexcept { return qualifying_; }

 private:
  std::size_t qualifying_;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class StaleCacheError : public Error {
 public:
  using Error::Error;
};

class NonFiniteGradientError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class CorruptionError : public Error {
 public:
  using Error::Error;
};

class MigrationError : public Error {
 public:
  using Error::Error;
};

class PrerequisiteError : public Error {
 public:
  PrerequisiteError(const std::string& artifact, const std::string& hint)
      : Error("missing prerequisite artifact '" + artifact + "'; " + hint), artifact_(artifact) {}
  const std::string& artifact() const noexcept { return artifact_; }

 private:
  std::string artifact_;
};

}  // namespace bbgan
