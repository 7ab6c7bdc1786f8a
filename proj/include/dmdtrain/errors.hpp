#pragma once

#include <stdexcept>
#include <string>

namespace dmdtrain {

// Missing or malformed inputs (files, datasets). Maps to CLI exit code 2.
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: divergence, non-convergence, non-finite values.
// Maps to CLI exit code 3.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dmdtrain
