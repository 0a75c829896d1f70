#pragma once

#include <stdexcept>
#include <string>

namespace ppnav {

// Rejected arguments, invalid windows, degenerate geometry. CLI exit code 1.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Failures that only show up while running: conditioning cap, empty search
// region, too little data for an estimator. CLI exit code 2.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConditioningFailure : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};

struct BoundaryExhaustion : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};

struct InsufficientData : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

}  // namespace ppnav
