#pragma once

#include <vector>

namespace npl {

/// Scalar observation (normal location model).
using ScalarPoint = double;

/// d-dimensional observation (Gaussian mixture).
using VectorPoint = std::vector<double>;

/// Binary response with covariates (logistic regression).
struct LabeledPoint {
  double y = 0.0;
  std::vector<double> x;

  friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

}  // namespace npl
