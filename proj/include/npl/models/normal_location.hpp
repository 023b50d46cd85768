#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "npl/dp.hpp"
#include "npl/error.hpp"
#include "npl/model.hpp"
#include "npl/points.hpp"

namespace npl {

/// Exact minimiser of sum_i w_i (y_i - theta)^2, i.e. the weighted mean.
inline double normal_location_minimizer(const WeightedDataset<ScalarPoint>& data) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.weights[i] != 0.0) s += data.weights[i] * data.atoms[i];
  }
  return s;
}

/// N(theta, sigma2) with known variance; loss is the negative log density.
class NormalLocationModel {
 public:
  using point_type = ScalarPoint;

  explicit NormalLocationModel(double sigma2 = 1.0) : sigma2_(sigma2) {
    if (!(sigma2 > 0.0)) throw ConfigError("normal location: sigma2 must be > 0");
  }

  double sigma2() const { return sigma2_; }
  std::size_t dimension() const { return 1; }
  std::string family() const { return "normal_location"; }
  std::vector<ParameterBlock> parameter_blocks() const { return {{"theta", 1}}; }
  std::vector<std::string> parameter_names() const { return {"theta"}; }
  bool is_feasible(std::span<const double> theta) const {
    return theta.size() == 1 && std::isfinite(theta[0]);
  }

  double point_loss(double theta, double y) const {
    const double z = y - theta;
    return 0.5 * std::log(2.0 * std::numbers::pi * sigma2_) + 0.5 * z * z / sigma2_;
  }

  double weighted_loss(std::span<const double> theta, const WeightedDataset<ScalarPoint>& data) const {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.weights[i] != 0.0) s += data.weights[i] * point_loss(theta[0], data.atoms[i]);
    }
    if (!std::isfinite(s)) throw NumericalError("normal location: non-finite weighted loss");
    return s;
  }

  std::vector<double> point_gradient(std::span<const double> theta, const ScalarPoint& y) const {
    return {(theta[0] - y) / sigma2_};
  }

  std::vector<double> weighted_gradient(std::span<const double> theta,
                                        const WeightedDataset<ScalarPoint>& data) const {
    double g = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.weights[i] != 0.0) g += data.weights[i] * (theta[0] - data.atoms[i]);
    }
    return {g / sigma2_};
  }

  std::vector<double> closed_form_minimizer(const WeightedDataset<ScalarPoint>& data) const {
    return {normal_location_minimizer(data)};
  }

  double log_predictive_density(std::span<const double> theta, const ScalarPoint& y) const {
    return -point_loss(theta[0], y);
  }

 private:
  double sigma2_;
};

}  // namespace npl
