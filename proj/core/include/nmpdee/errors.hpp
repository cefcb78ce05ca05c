#pragma once

#include <stdexcept>
#include <string>

namespace nmpdee {

// Input outside the mathematical domain of an operation (e.g. H out of range,
// a Dirac component requested pointwise).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid experiment configuration. `path` names the offending field
// ("section.key") when one is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Numerical failure during a run: NaN/overflow, stability bound violated,
// embedding failure.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nmpdee
