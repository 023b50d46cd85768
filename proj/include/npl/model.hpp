#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "npl/dp.hpp"

namespace npl {

/// A named contiguous slice of the flat parameter vector.
struct ParameterBlock {
  std::string name;
  std::size_t size = 0;
};

/// Minimal contract every model family satisfies: a weighted loss over a
/// WeightedDataset, a predictive density for evaluation, and a description
/// of the parameter layout.
template <class M>
concept LossModel = requires(const M& m, std::span<const double> theta,
                             const WeightedDataset<typename M::point_type>& data,
                             const typename M::point_type& point) {
  typename M::point_type;
  { m.dimension() } -> std::convertible_to<std::size_t>;
  { m.family() } -> std::convertible_to<std::string>;
  { m.parameter_blocks() } -> std::convertible_to<std::vector<ParameterBlock>>;
  { m.parameter_names() } -> std::convertible_to<std::vector<std::string>>;
  { m.weighted_loss(theta, data) } -> std::convertible_to<double>;
  { m.log_predictive_density(theta, point) } -> std::convertible_to<double>;
  { m.is_feasible(theta) } -> std::convertible_to<bool>;
};

template <class M>
concept GradientModel = LossModel<M> && requires(const M& m, std::span<const double> theta,
                                                 const WeightedDataset<typename M::point_type>& data,
                                                 const typename M::point_type& point) {
  { m.weighted_gradient(theta, data) } -> std::convertible_to<std::vector<double>>;
  { m.point_gradient(theta, point) } -> std::convertible_to<std::vector<double>>;
};

/// One EM step; returns the updated parameters and the weighted
/// log-likelihood of the parameters it started from.
template <class M>
concept EmModel = LossModel<M> && requires(const M& m, std::span<const double> theta,
                                           const WeightedDataset<typename M::point_type>& data) {
  { m.em_step_flat(theta, data) };
};

template <class M>
concept ClosedFormModel = LossModel<M> && requires(const M& m,
                                                   const WeightedDataset<typename M::point_type>& data) {
  { m.closed_form_minimizer(data) } -> std::convertible_to<std::vector<double>>;
};

/// Models that can map an arbitrary vector back into the feasible region.
template <class M>
concept ProjectableModel = LossModel<M> && requires(const M& m, std::vector<double>& theta) {
  { m.project(theta) };
};

}  // namespace npl
