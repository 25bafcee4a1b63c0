#pragma once

#include <Eigen/Dense>
#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <string>

namespace mvembed {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SingularMetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TrainingFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidInput(msg);
}

inline void require_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite()) throw InvalidInput(name + ": entries must be finite");
}

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Verbosity comes from MVEMBED_LOG (error|info|debug); default info.
inline LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("MVEMBED_LOG");
    if (!env) return LogLevel::Info;
    const std::string v(env);
    if (v == "error") return LogLevel::Error;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return level;
}

inline void log_msg(LogLevel level, const std::string& msg) {
  if (int(level) <= int(log_threshold())) std::cerr << "[mvembed] " << msg << "\n";
}

inline void warn(const std::string& msg) { log_msg(LogLevel::Info, "warning: " + msg); }

}  // namespace mvembed
