#pragma once

#include <cstddef>

#include "vecoff/engine.hpp"

namespace vecoff {

/// lambda * (sum of E2E latency over served tasks) + (1 - lambda) * dropped / N.
/// The latency term is an unnormalized sum of seconds.
double objective(double latency_sum, std::size_t dropped, std::size_t total, double lambda);
double objective(const EpisodeResult& result, double lambda);

/// Dimensionless diagnostic: the latency sum is divided by N times the largest
/// remaining-in-range budget among the tasks. Never mixed with objective().
double objective_normalized(const EpisodeResult& result, double lambda);

}  // namespace vecoff
