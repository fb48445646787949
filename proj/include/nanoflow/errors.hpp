#pragma once

#include <stdexcept>
#include <string>

namespace nanoflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGraph : public Error {
 public:
  using Error::Error;
};
class EmptyTrace : public Error {
 public:
  using Error::Error;
};
class EnergyOutOfRange : public Error {
 public:
  using Error::Error;
};
class ConfigMismatch : public Error {
 public:
  using Error::Error;
};
class MismatchedSets : public Error {
 public:
  using Error::Error;
};
class NoEstimate : public Error {
 public:
  using Error::Error;
};
class SampleTooLarge : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};
class ExternalDataError : public Error {
 public:
  using Error::Error;
};

/// Configuration problem attributable to one key of the run config.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace nanoflow
