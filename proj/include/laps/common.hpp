#pragma once

#include <Eigen/Dense>

namespace laps {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr const char* kVersion = "0.1.0";

}  // namespace laps
