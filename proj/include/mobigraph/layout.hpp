#pragma once

#include <cstdint>

#include "mobigraph/graph.hpp"

namespace mobigraph {

// Fruchterman-Reingold spring layout on the unit square. Edge weights,
// normalized by the largest weight, scale the attractive force. Positions are
// centered and rescaled into [-1, 1]^2. Null nodes are placed at the origin
// and take no part in the simulation.
MobilityGraph layout_fruchterman_reingold(const MobilityGraph& g, std::uint64_t seed,
                                          int iterations = 50);

}  // namespace mobigraph
