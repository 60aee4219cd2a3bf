#pragma once

// Independent oracles the implementation is checked against. These stay
// brute-force on purpose: per-block exhaustive marching for visibility, the
// direct-summation identity for correlation, long-double accumulation for
// cosine. They share only the math definition with the production code, not
// its code path.

#include <cmath>
#include <set>
#include <vector>

#include "voxagent/world.hpp"

namespace voxagent::testing {

// First-hit visibility of the sampled ray fan, computed block-by-block: a
// block is visible iff some integer-degree ray inside the frustum reaches it
// before any opaque block, probed by fixed-step segment marching.
std::set<Vec3i> oracle_visible_set(const world::WorldConfig& cfg, const world::WorldState& w,
                                   const world::AgentState& agent, double fov_deg,
                                   double max_dist);

// (n*Sxy - Sx*Sy) / (sqrt(n*Sxx - Sx^2) * sqrt(n*Syy - Sy^2))
double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y);

// Cosine via long-double accumulation in reverse order.
double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b);

// Deterministic random worlds for the visibility equivalence sweep.
struct RandomScene {
    world::WorldState world;
    world::AgentState agent;
    double fov_deg = 90.0;
    double max_dist = 12.0;
};

RandomScene random_scene(const world::WorldConfig& cfg, std::uint64_t seed);

}  // namespace voxagent::testing
