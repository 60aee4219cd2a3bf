#include "voxagent/perception.hpp"

#include <algorithm>
#include <map>

namespace voxagent::perception {

std::string mode_name(Mode mode) { return mode == Mode::Vision ? "vision" : "proximity"; }

Mode mode_from_name(const std::string& name) {
    if (name == "vision") return Mode::Vision;
    if (name == "proximity") return Mode::Proximity;
    throw Error(ErrorCode::ConfigError, "unknown perception mode '" + name + "'");
}

int distance_band(const world::WorldConfig& cfg, double dist) {
    const auto& edges = cfg.perception.band_edges;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (dist < edges[i]) return static_cast<int>(i);
    }
    return static_cast<int>(edges.size());
}

std::vector<std::string> encode_visual(const world::WorldConfig& cfg,
                                       const std::vector<world::SeenBlock>& seen,
                                       const Vec3i& agent_pos) {
    // (band, id) -> count; map iteration order is the token order.
    std::map<std::pair<int, std::string>, int> bands;
    for (const auto& s : seen) {
        bands[{distance_band(cfg, distance(agent_pos, s.pos)), s.id}] += 1;
    }
    std::vector<std::string> tokens;
    tokens.reserve(bands.size());
    for (const auto& [key, count] : bands) {
        tokens.push_back(key.second + "x" + std::to_string(count) + "@" +
                         std::to_string(key.first));
    }
    return tokens;
}

std::vector<std::string> tokenize_state(const world::AgentState& agent) {
    std::vector<std::string> tokens;
    tokens.push_back("health=" + std::to_string(agent.health));
    tokens.push_back("hunger=" + std::to_string(agent.hunger));
    tokens.push_back("equipped=" + (agent.equipped ? *agent.equipped : std::string("none")));
    for (const auto& [item, count] : agent.inventory) {
        tokens.push_back(item + "=" + std::to_string(count));
    }
    return tokens;
}

std::vector<std::string> tokenize_task(const world::Task& task) {
    if (task.id.empty()) {
        throw Error(ErrorCode::UnknownTask, "task has no id");
    }
    return {"task=" + task.id, "goal=" + task.goal.to_string()};
}

Perceived perceive_with_snapshot(const world::WorldConfig& cfg, const world::WorldState& w,
                                 const world::AgentState& agent, const world::Task& task,
                                 Mode mode) {
    Perceived out;
    out.snapshot = mode == Mode::Vision
                       ? world::visible_set(cfg, w, agent, cfg.perception.fov_deg,
                                            cfg.perception.max_dist)
                       : world::proximity_set(cfg, w, agent);
    out.bundle.mode = mode;
    out.bundle.visual = encode_visual(cfg, out.snapshot, agent.position);
    const int budget = cfg.perception.visual_token_budget;
    if (budget >= 0 && static_cast<int>(out.bundle.visual.size()) > budget) {
        out.bundle.visual.resize(budget);  // tokens are nearest-first; drop the far tail
    }
    out.bundle.state = tokenize_state(agent);
    out.bundle.task = tokenize_task(task);
    return out;
}

TokenBundle perceive(const world::WorldConfig& cfg, const world::WorldState& w,
                     const world::AgentState& agent, const world::Task& task, Mode mode) {
    return perceive_with_snapshot(cfg, w, agent, task, mode).bundle;
}

VisualToken parse_visual_token(const std::string& token) {
    const auto at = token.rfind('@');
    const auto x = token.rfind('x', at == std::string::npos ? at : at - 1);
    if (at == std::string::npos || x == std::string::npos || x == 0) {
        throw Error(ErrorCode::ParseFailure, "visual token '" + token + "' is not <id>x<n>@<band>");
    }
    VisualToken out;
    out.block_id = token.substr(0, x);
    try {
        out.count = std::stoi(token.substr(x + 1, at - x - 1));
        out.band = std::stoi(token.substr(at + 1));
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseFailure, "visual token '" + token + "' has bad numbers");
    }
    return out;
}

}  // namespace voxagent::perception
