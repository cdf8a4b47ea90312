#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace betacfg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Array = Eigen::ArrayXd;
using Eigen::Index;

// Invalid user-supplied configuration (CLI maps this to exit code 1).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent data encountered at runtime (CLI exit code 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace betacfg
