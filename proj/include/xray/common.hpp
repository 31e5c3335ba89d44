#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace xray {

using Index = Eigen::Index;

// Raised for invalid inputs and for failures inside the factorization
// pipeline. The message names the offending value or stage.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xray
