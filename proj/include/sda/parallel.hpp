#pragma once

#include <sda/sketch.hpp>

#include <cstddef>
#include <functional>

// OpenMP kernels. Each has a serial reference elsewhere in the library
// (sda::compute_H, a plain loop for for_each_index) that tests compare against.
// Results never depend on the thread count or scheduling.
namespace sda::parallel {

/// H summed over fixed-size chunks of the support; chunk partials are combined
/// in chunk order.
Matrix compute_H(const DiscreteDistribution& dist, const ProjectionProblem& problem);

/// body(i) for every i in [0, count). body may only write state owned by slot i.
/// The first exception thrown by any body is rethrown after the loop.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);

int max_threads();
void set_threads(int threads);

}  // namespace sda::parallel
