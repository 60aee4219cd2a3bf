#pragma once

#include <string>
#include <vector>

#include "voxagent/world.hpp"

namespace voxagent::perception {

enum class Mode { Vision, Proximity };

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

/// Unified text-space context: what the agent sees, its state, and its task.
struct TokenBundle {
    std::vector<std::string> visual;
    std::vector<std::string> state;
    std::vector<std::string> task;
    Mode mode = Mode::Vision;

    bool operator==(const TokenBundle&) const = default;
};

struct VisualToken {
    std::string block_id;
    int count = 0;
    int band = 0;

    bool operator==(const VisualToken&) const = default;
};

// One token per (block id, distance band) aggregate, format "<id>x<count>@<band>",
// sorted by (band, id). Band edges come from cfg.perception.band_edges.
std::vector<std::string> encode_visual(const world::WorldConfig& cfg,
                                       const std::vector<world::SeenBlock>& seen,
                                       const Vec3i& agent_pos);

// Canonical order: health, hunger, equipped, then inventory sorted by item id.
std::vector<std::string> tokenize_state(const world::AgentState& agent);

// ["task=<id>", "goal=<kind>:<target>:<count>"]. Throws UnknownTask for an
// empty task id.
std::vector<std::string> tokenize_task(const world::Task& task);

TokenBundle perceive(const world::WorldConfig& cfg, const world::WorldState& world,
                     const world::AgentState& agent, const world::Task& task, Mode mode);

struct Perceived {
    TokenBundle bundle;
    std::vector<world::SeenBlock> snapshot;
};

// Same as perceive but also hands back the raw block snapshot the bundle was
// built from, so callers can feed episode records without sensing twice.
Perceived perceive_with_snapshot(const world::WorldConfig& cfg, const world::WorldState& world,
                                 const world::AgentState& agent, const world::Task& task,
                                 Mode mode);

// Inverse of the visual token grammar; see docs/tokens.md.
VisualToken parse_visual_token(const std::string& token);

int distance_band(const world::WorldConfig& cfg, double dist);

}  // namespace voxagent::perception
