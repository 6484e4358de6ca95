#pragma once

#include <stdexcept>
#include <string>

namespace platoon {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid network geometry or topology.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// A time reduction u >= D1/v0 cannot be realised by any finite speed.
class InfeasibleTimeReduction : public Error {
 public:
  using Error::Error;
};

class NoRouteError : public Error {
 public:
  using Error::Error;
};

// Rank-deficient least-squares design.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

// The brute-force optimal policy is not merge-on-an-interval.
class NonThresholdPolicyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, int line, const std::string& what)
      : Error(format(key, line, what)), key_(key), line_(line) {}

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& what) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!key.empty()) out += "'" + key + "': ";
    return out + what;
  }

  std::string key_;
  int line_;
};

}  // namespace platoon
