#pragma once

#include <cstdint>

#include "mobigraph/graph.hpp"

namespace mobigraph {

// Nodes uniform in [-1, 1]^2 (stored as node_attrs); each pair is joined with
// probability exp(-dist / scale) and weighted 5 + 20 * dist, a travel-time
// surrogate. Scale is chosen so the expected density is roughly `density`.
MobilityGraph random_geometric_graph(std::size_t n, double density, std::uint64_t seed);

// Independent uniform weights in [1, 10] on each pair with probability
// `density`; attributes uniform in [-1, 1]^2.
MobilityGraph random_weighted_graph(std::size_t n, double density, std::uint64_t seed);

// Multiplies each edge weight by (1 + noise * u), u uniform in [-1, 1],
// keeping the adjacency symmetric.
MobilityGraph perturb_weights(const MobilityGraph& g, double noise, std::uint64_t seed);

Permutation random_permutation(std::size_t n, std::uint64_t seed);

}  // namespace mobigraph
