#pragma once

#include <cstdint>
#include <vector>

#include "epann/graph.hpp"

namespace epann::detail {

/// Approximate k-NN lists (params.K per node, ascending by distance) by
/// NN-Descent local joins. Single-threaded so the result is a pure function
/// of (set, params, seed).
std::vector<std::vector<NodeId>> nn_descent(const VectorSet& set, const NnDescentParams& params,
                                            std::uint64_t seed);

}  // namespace epann::detail
