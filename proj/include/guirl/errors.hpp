#pragma once

#include <stdexcept>
#include <string>

namespace guirl {

// Base for every error raised by the library. `code()` is a stable,
// machine-readable identifier that the service maps onto wire error codes.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class LookupError : public Error {
 public:
  explicit LookupError(const std::string& message) : Error("LOOKUP", message) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message) : Error("SCHEMA_INVALID", message) {}
};

class LoadError : public Error {
 public:
  explicit LoadError(const std::string& message) : Error("LOAD_FAILED", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("CONFIG_INVALID", message) {}
};

class LifecycleError : public Error {
 public:
  explicit LifecycleError(const std::string& message) : Error("EPISODE_FINISHED", message) {}
};

// Raised by critique providers; callers may retry.
class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& message) : Error("PROVIDER_FAILED", message) {}
};

class ReplayMismatch : public Error {
 public:
  ReplayMismatch(int step, const std::string& field, const std::string& message)
      : Error("REPLAY_MISMATCH", message), step_(step), field_(field) {}

  int step() const { return step_; }
  const std::string& field() const { return field_; }

 private:
  int step_;
  std::string field_;
};

}  // namespace guirl
