// Error taxonomy shared by all modules. The CLI maps these onto exit codes:
// usage -> 1, data -> 2, numeric -> 3.
#pragma once

#include <stdexcept>
#include <string>

namespace hullopt {

struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data: parse failures, bad meshes,
// mismatched archives, missing files.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure at runtime: divergence, singular fits, domain errors.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// A morph that would fold the hull onto itself. Optimizers treat the
// offending design as infeasible rather than aborting.
struct MorphRejected : std::runtime_error {
  explicit MorphRejected(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hullopt
