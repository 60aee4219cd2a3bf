#include "voxagent/world.hpp"

#include <algorithm>
#include <cmath>

namespace voxagent::world {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct DirDelta {
    const char* name;
    Vec3i delta;
};

constexpr DirDelta kDirections[] = {
    {"east", {1, 0, 0}},  {"west", {-1, 0, 0}}, {"south", {0, 0, 1}},
    {"north", {0, 0, -1}}, {"up", {0, 1, 0}},    {"down", {0, -1, 0}},
};

std::optional<Vec3i> direction_delta(const std::string& name) {
    for (const auto& d : kDirections) {
        if (name == d.name) return d.delta;
    }
    return std::nullopt;
}

std::string direction_of_delta(const Vec3i& delta) {
    for (const auto& d : kDirections) {
        if (delta == d.delta) return d.name;
    }
    return "east";
}

double yaw_of_delta(const Vec3i& delta) {
    if (delta.x > 0) return 0.0;
    if (delta.z > 0) return 90.0;
    if (delta.x < 0) return 180.0;
    if (delta.z < 0) return 270.0;
    return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Small type plumbing
// ---------------------------------------------------------------------------

std::string Goal::to_string() const {
    const char* kind_str = kind == GoalKind::Possess ? "possess" : "locate";
    return std::string(kind_str) + ":" + target + ":" + std::to_string(count);
}

Goal Goal::parse(const std::string& text) {
    const auto first = text.find(':');
    const auto second = text.find(':', first == std::string::npos ? first : first + 1);
    if (first == std::string::npos || second == std::string::npos) {
        throw Error(ErrorCode::ParseFailure, "goal '" + text + "' is not kind:target:count");
    }
    Goal g;
    const std::string kind = text.substr(0, first);
    if (kind == "possess") {
        g.kind = GoalKind::Possess;
    } else if (kind == "locate") {
        g.kind = GoalKind::Locate;
    } else {
        throw Error(ErrorCode::ParseFailure, "unknown goal kind '" + kind + "'");
    }
    g.target = text.substr(first + 1, second - first - 1);
    try {
        g.count = std::stoi(text.substr(second + 1));
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseFailure, "goal count is not an integer in '" + text + "'");
    }
    if (g.target.empty() || g.count < 1) {
        throw Error(ErrorCode::ParseFailure, "goal '" + text + "' needs a target and count >= 1");
    }
    return g;
}

std::string action_kind_name(ActionKind k) {
    switch (k) {
        case ActionKind::Move: return "move";
        case ActionKind::Turn: return "turn";
        case ActionKind::Mine: return "mine";
        case ActionKind::Craft: return "craft";
        case ActionKind::Smelt: return "smelt";
        case ActionKind::Place: return "place";
        case ActionKind::Equip: return "equip";
        case ActionKind::ExploreStep: return "explore_step";
    }
    return "move";
}

ActionKind action_kind_from_name(const std::string& name) {
    if (name == "move") return ActionKind::Move;
    if (name == "turn") return ActionKind::Turn;
    if (name == "mine") return ActionKind::Mine;
    if (name == "craft") return ActionKind::Craft;
    if (name == "smelt") return ActionKind::Smelt;
    if (name == "place") return ActionKind::Place;
    if (name == "equip") return ActionKind::Equip;
    if (name == "explore_step") return ActionKind::ExploreStep;
    throw Error(ErrorCode::ParseFailure, "unknown action kind '" + name + "'");
}

std::string failure_code_name(FailureCode code) {
    switch (code) {
        case FailureCode::None: return "";
        case FailureCode::OutOfBounds: return "OutOfBounds";
        case FailureCode::Blocked: return "Blocked";
        case FailureCode::OutOfRange: return "OutOfRange";
        case FailureCode::InvalidTarget: return "InvalidTarget";
        case FailureCode::InsufficientTier: return "InsufficientTier";
        case FailureCode::UnknownRecipe: return "UnknownRecipe";
        case FailureCode::MissingInputs: return "MissingInputs";
        case FailureCode::MissingStation: return "MissingStation";
        case FailureCode::NotInInventory: return "NotInInventory";
        case FailureCode::NoSuchBlock: return "NoSuchBlock";
        case FailureCode::PathBlocked: return "PathBlocked";
        case FailureCode::NoMatchingSkill: return "NoMatchingSkill";
        case FailureCode::StepCapExceeded: return "StepCapExceeded";
    }
    return "";
}

FailureCode failure_code_from_name(const std::string& name) {
    static const std::pair<const char*, FailureCode> table[] = {
        {"", FailureCode::None},
        {"OutOfBounds", FailureCode::OutOfBounds},
        {"Blocked", FailureCode::Blocked},
        {"OutOfRange", FailureCode::OutOfRange},
        {"InvalidTarget", FailureCode::InvalidTarget},
        {"InsufficientTier", FailureCode::InsufficientTier},
        {"UnknownRecipe", FailureCode::UnknownRecipe},
        {"MissingInputs", FailureCode::MissingInputs},
        {"MissingStation", FailureCode::MissingStation},
        {"NotInInventory", FailureCode::NotInInventory},
        {"NoSuchBlock", FailureCode::NoSuchBlock},
        {"PathBlocked", FailureCode::PathBlocked},
        {"NoMatchingSkill", FailureCode::NoMatchingSkill},
        {"StepCapExceeded", FailureCode::StepCapExceeded},
    };
    for (const auto& [n, c] : table) {
        if (name == n) return c;
    }
    throw Error(ErrorCode::ParseFailure, "unknown failure code '" + name + "'");
}

PrimitiveAction PrimitiveAction::move(const std::string& direction) {
    PrimitiveAction a;
    a.kind = ActionKind::Move;
    a.direction = direction;
    a.validate();
    return a;
}

PrimitiveAction PrimitiveAction::turn(double dyaw, double dpitch) {
    PrimitiveAction a;
    a.kind = ActionKind::Turn;
    a.dyaw = dyaw;
    a.dpitch = dpitch;
    return a;
}

PrimitiveAction PrimitiveAction::mine(const Vec3i& target) {
    PrimitiveAction a;
    a.kind = ActionKind::Mine;
    a.target = target;
    a.has_target = true;
    return a;
}

PrimitiveAction PrimitiveAction::craft(const std::string& item) {
    PrimitiveAction a;
    a.kind = ActionKind::Craft;
    a.item = item;
    a.validate();
    return a;
}

PrimitiveAction PrimitiveAction::smelt(const std::string& item) {
    PrimitiveAction a;
    a.kind = ActionKind::Smelt;
    a.item = item;
    a.validate();
    return a;
}

PrimitiveAction PrimitiveAction::place(const std::string& item, const Vec3i& target) {
    PrimitiveAction a;
    a.kind = ActionKind::Place;
    a.item = item;
    a.target = target;
    a.has_target = true;
    a.validate();
    return a;
}

PrimitiveAction PrimitiveAction::equip(const std::string& item) {
    PrimitiveAction a;
    a.kind = ActionKind::Equip;
    a.item = item;
    a.validate();
    return a;
}

PrimitiveAction PrimitiveAction::explore_step() {
    PrimitiveAction a;
    a.kind = ActionKind::ExploreStep;
    return a;
}

void PrimitiveAction::validate() const {
    switch (kind) {
        case ActionKind::Move:
            if (!direction_delta(direction)) {
                throw Error(ErrorCode::ParseFailure, "move direction '" + direction + "' unknown");
            }
            break;
        case ActionKind::Mine:
        case ActionKind::Place:
            if (!has_target) throw Error(ErrorCode::ParseFailure, "action needs a target position");
            if (kind == ActionKind::Place && item.empty()) {
                throw Error(ErrorCode::ParseFailure, "place needs an item");
            }
            break;
        case ActionKind::Craft:
        case ActionKind::Smelt:
        case ActionKind::Equip:
            if (item.empty()) throw Error(ErrorCode::ParseFailure, "action needs an item");
            break;
        case ActionKind::Turn:
        case ActionKind::ExploreStep:
            break;
    }
}

void LocateProgress::update(const std::vector<SeenBlock>& seen) {
    for (const auto& s : seen) found_[s.id].insert(s.pos);
}

int LocateProgress::count(const std::string& block_id) const {
    auto it = found_.find(block_id);
    return it == found_.end() ? 0 : static_cast<int>(it->second.size());
}

// ---------------------------------------------------------------------------
// World generation
// ---------------------------------------------------------------------------

WorldState::WorldState(Vec3i dims, std::uint64_t seed, std::string scenario)
    : dims_(dims),
      voxels_(static_cast<std::size_t>(dims.x) * dims.y * dims.z, 0),
      rng_seed_(seed),
      scenario_(std::move(scenario)) {}

namespace {

void fill_ground(const WorldConfig& cfg, WorldState& w) {
    const auto ground = static_cast<std::uint16_t>(cfg.block_index(cfg.scenario.ground_block));
    const Vec3i dims = w.dims();
    for (int y = 0; y < std::min(cfg.scenario.ground_height, dims.y); ++y) {
        for (int z = 0; z < dims.z; ++z) {
            for (int x = 0; x < dims.x; ++x) {
                w.set_block({x, y, z}, ground);
            }
        }
    }
}

int surface_y(const WorldConfig& cfg) { return cfg.scenario.ground_height; }

void generate_flat_search(const WorldConfig& cfg, WorldState& w) {
    fill_ground(cfg, w);
    const auto ore = static_cast<std::uint16_t>(cfg.block_index(cfg.scenario.lattice_block));
    const int pitch = cfg.scenario.lattice_spacing;
    const int y = surface_y(cfg);
    for (int x = 0; x < w.dims().x; x += pitch) {
        for (int z = 0; z < w.dims().z; z += pitch) {
            w.set_block({x, y, z}, ore);
        }
    }
}

// Scatters a feature cluster inside a quadrant, skipping occupied cells.
void scatter(const WorldConfig& cfg, WorldState& w, SplitMix64& rng, std::uint16_t block, int count,
             int qx, int qz) {
    const Vec3i dims = w.dims();
    const int hx = dims.x / 2;
    const int hz = dims.z / 2;
    const int y = surface_y(cfg);
    int placed = 0;
    int attempts = 0;
    while (placed < count && attempts < count * 64) {
        ++attempts;
        const int x = qx * hx + 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hx - 2)));
        const int z = qz * hz + 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hz - 2)));
        if (w.at({x, y, z}) != 0) continue;
        w.set_block({x, y, z}, block);
        ++placed;
    }
    if (placed < count) {
        throw Error(ErrorCode::DimsTooSmall, "could not place scenario features; enlarge world");
    }
}

void generate_tech_tree(const WorldConfig& cfg, WorldState& w, std::uint64_t seed) {
    if (w.dims().x < 32 || w.dims().z < 32) {
        throw Error(ErrorCode::DimsTooSmall, "tech_tree_plains needs dims >= (32,8,32)");
    }
    fill_ground(cfg, w);
    SplitMix64 rng(seed ^ 0x7475726bULL);
    const auto log_idx = static_cast<std::uint16_t>(cfg.block_index("log"));
    const auto leaves_idx = static_cast<std::uint16_t>(cfg.block_index("leaves"));
    const auto stone_idx = static_cast<std::uint16_t>(cfg.block_index("stone"));
    const auto iron_idx = static_cast<std::uint16_t>(cfg.block_index("iron_ore"));
    const auto diamond_idx = static_cast<std::uint16_t>(cfg.block_index("diamond_ore"));

    const Vec3i dims = w.dims();
    const int y = surface_y(cfg);
    const int hx = dims.x / 2;
    const int hz = dims.z / 2;

    // Trees in the north-west quadrant: a 3-log trunk capped with leaves.
    int planted = 0;
    int attempts = 0;
    while (planted < cfg.scenario.trees && attempts < cfg.scenario.trees * 64) {
        ++attempts;
        const int x = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hx - 2)));
        const int z = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hz - 2)));
        if (w.at({x, y, z}) != 0) continue;
        const int trunk = std::min(3, dims.y - y - 1);
        for (int dy = 0; dy < trunk; ++dy) w.set_block({x, y + dy, z}, log_idx);
        if (y + trunk < dims.y) w.set_block({x, y + trunk, z}, leaves_idx);
        ++planted;
    }
    if (planted < cfg.scenario.trees) {
        throw Error(ErrorCode::DimsTooSmall, "could not place trees; enlarge world");
    }

    scatter(cfg, w, rng, stone_idx, cfg.scenario.stone_patch, 1, 0);
    scatter(cfg, w, rng, iron_idx, cfg.scenario.iron_cluster, 0, 1);
    scatter(cfg, w, rng, diamond_idx, cfg.scenario.diamond_cluster, 1, 1);
}

}  // namespace

WorldState generate_world(const WorldConfig& cfg, std::uint64_t seed, const std::string& scenario,
                          Vec3i dims) {
    if (dims.x < 16 || dims.y < 8 || dims.z < 16) {
        throw Error(ErrorCode::DimsTooSmall, "dims must be at least (16,8,16)");
    }
    WorldState w(dims, seed, scenario);
    if (scenario == kScenarioFlatSearch) {
        generate_flat_search(cfg, w);
    } else if (scenario == kScenarioTechTree) {
        generate_tech_tree(cfg, w, seed);
    } else if (scenario == kScenarioEmpty) {
        fill_ground(cfg, w);
    } else {
        throw Error(ErrorCode::UnknownScenario, "scenario '" + scenario + "' unknown");
    }
    return w;
}

Vec3i spawn_position(const WorldConfig& cfg, const WorldState& world) {
    Vec3i p{world.dims().x / 2, surface_y(cfg), world.dims().z / 2};
    while (world.in_bounds(p) && world.at(p) != 0) p.x += 1;
    if (!world.in_bounds(p)) {
        throw Error(ErrorCode::DimsTooSmall, "no free spawn cell at world center");
    }
    return p;
}

AgentState spawn_agent(const WorldConfig& cfg, const WorldState& world) {
    AgentState a;
    a.position = spawn_position(cfg, world);
    return a;
}

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

namespace {

void tick_survival(const WorldConfig& cfg, WorldState& world, AgentState& agent) {
    world.advance_tick();
    if (cfg.rules.hunger_decay_ticks > 0 && world.tick() % cfg.rules.hunger_decay_ticks == 0) {
        agent.hunger = std::max(0, agent.hunger - 1);
    }
    if (agent.hunger <= cfg.rules.hunger_eat_threshold) {
        for (auto it = agent.inventory.begin(); it != agent.inventory.end(); ++it) {
            if (it->second <= 0) continue;
            const FoodDef* food = cfg.find_food(it->first);
            if (!food) continue;
            it->second -= 1;
            agent.hunger = std::min(20, agent.hunger + food->restores);
            if (it->second == 0) agent.inventory.erase(it);
            break;
        }
    }
}

ActionResult do_move(const WorldConfig&, WorldState& world, AgentState& agent,
                     const PrimitiveAction& action) {
    const auto delta = direction_delta(action.direction);
    if (!delta) return ActionResult::failure(FailureCode::InvalidTarget, "unknown direction");
    const Vec3i next = agent.position + *delta;
    if (!world.in_bounds(next)) {
        return ActionResult::failure(FailureCode::OutOfBounds, "move would leave the world");
    }
    if (world.at(next) != 0) {
        return ActionResult::failure(FailureCode::Blocked, "cell is occupied");
    }
    agent.position = next;
    if (delta->y == 0) agent.yaw = yaw_of_delta(*delta);
    return ActionResult::success("moved " + action.direction);
}

ActionResult do_turn(AgentState& agent, const PrimitiveAction& action) {
    agent.yaw = std::fmod(agent.yaw + action.dyaw, 360.0);
    if (agent.yaw < 0) agent.yaw += 360.0;
    agent.pitch = std::clamp(agent.pitch + action.dpitch, -89.0, 89.0);
    return ActionResult::success("turned");
}

ActionResult do_mine(const WorldConfig& cfg, WorldState& world, AgentState& agent,
                     const PrimitiveAction& action) {
    if (!world.in_bounds(action.target)) {
        return ActionResult::failure(FailureCode::InvalidTarget, "target outside world");
    }
    if (distance(agent.position, action.target) > cfg.rules.interaction_range) {
        return ActionResult::failure(FailureCode::OutOfRange, "target beyond interaction range");
    }
    const std::uint16_t idx = world.at(action.target);
    if (idx == 0) {
        return ActionResult::failure(FailureCode::InvalidTarget, "nothing to mine");
    }
    const BlockDef& block = cfg.block(idx);
    const int tier = agent.equipped ? cfg.tool_tier(*agent.equipped) : 0;
    if (tier < block.hardness_tier) {
        return ActionResult::failure(
            FailureCode::InsufficientTier,
            "mining " + block.id + " needs tool tier " + std::to_string(block.hardness_tier));
    }
    world.set_block(action.target, 0);
    if (!block.drop.empty()) agent.inventory[block.drop] += 1;
    return ActionResult::success("mined " + block.id);
}

ActionResult do_craft(const WorldConfig& cfg, WorldState& world, AgentState& agent,
                      const PrimitiveAction& action) {
    const Recipe* recipe = cfg.recipe_for(action.item);
    if (!recipe) {
        return ActionResult::failure(FailureCode::UnknownRecipe,
                                     "no recipe for '" + action.item + "'");
    }
    const bool is_smelt = action.kind == ActionKind::Smelt;
    if (is_smelt != (recipe->station == Station::Furnace)) {
        return ActionResult::failure(FailureCode::UnknownRecipe,
                                     action.item + (is_smelt ? " is not a smelting recipe"
                                                             : " requires smelting"));
    }
    std::string missing;
    for (const auto& [item, need] : recipe->inputs) {
        auto it = agent.inventory.find(item);
        const int have = it == agent.inventory.end() ? 0 : it->second;
        if (have < need) {
            if (!missing.empty()) missing += ", ";
            missing += item + " x" + std::to_string(need - have);
        }
    }
    if (!missing.empty()) {
        return ActionResult::failure(FailureCode::MissingInputs, "missing " + missing);
    }
    if (!station_in_range(cfg, world, agent, recipe->station)) {
        return ActionResult::failure(FailureCode::MissingStation,
                                     "no " + station_name(recipe->station) + " nearby");
    }
    for (const auto& [item, need] : recipe->inputs) {
        agent.inventory[item] -= need;
        if (agent.inventory[item] == 0) agent.inventory.erase(item);
    }
    agent.inventory[recipe->output] += recipe->output_count;
    return ActionResult::success((is_smelt ? "smelted " : "crafted ") + action.item);
}

ActionResult do_place(const WorldConfig& cfg, WorldState& world, AgentState& agent,
                      const PrimitiveAction& action) {
    const BlockDef* block = cfg.find_block(action.item);
    if (!block) {
        return ActionResult::failure(FailureCode::InvalidTarget,
                                     "'" + action.item + "' is not a placeable block");
    }
    if (!world.in_bounds(action.target) || action.target == agent.position) {
        return ActionResult::failure(FailureCode::InvalidTarget, "cannot place there");
    }
    if (distance(agent.position, action.target) > cfg.rules.interaction_range) {
        return ActionResult::failure(FailureCode::OutOfRange, "target beyond interaction range");
    }
    if (world.at(action.target) != 0) {
        return ActionResult::failure(FailureCode::Blocked, "cell is occupied");
    }
    auto it = agent.inventory.find(action.item);
    if (it == agent.inventory.end() || it->second < 1) {
        return ActionResult::failure(FailureCode::NotInInventory, action.item + " not held");
    }
    it->second -= 1;
    if (it->second == 0) agent.inventory.erase(it);
    world.set_block(action.target, static_cast<std::uint16_t>(cfg.block_index(action.item)));
    return ActionResult::success("placed " + action.item);
}

ActionResult do_equip(AgentState& agent, const PrimitiveAction& action) {
    auto it = agent.inventory.find(action.item);
    if (it == agent.inventory.end() || it->second < 1) {
        return ActionResult::failure(FailureCode::NotInInventory, action.item + " not held");
    }
    agent.equipped = action.item;
    return ActionResult::success("equipped " + action.item);
}

ActionResult do_explore_step(const WorldConfig& cfg, WorldState& world, AgentState& agent) {
    const auto target = explore_step_target(cfg, world, agent.position, agent.yaw);
    if (!target) {
        return ActionResult::failure(FailureCode::PathBlocked, "no open cell on the sweep route");
    }
    const Vec3i delta = *target - agent.position;
    agent.position = *target;
    agent.yaw = yaw_of_delta(delta);
    return ActionResult::success("explored " + direction_of_delta(delta));
}

}  // namespace

bool station_in_range(const WorldConfig& cfg, const WorldState& world, const AgentState& agent,
                      Station station) {
    if (station == Station::None) return true;
    const int idx = cfg.block_index(station_name(station));
    const double range = cfg.rules.interaction_range;
    const int r = static_cast<int>(range) + 1;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dz = -r; dz <= r; ++dz) {
            for (int dx = -r; dx <= r; ++dx) {
                const Vec3i p = agent.position + Vec3i{dx, dy, dz};
                if (!world.in_bounds(p) || world.at(p) != idx) continue;
                if (distance(agent.position, p) <= range) return true;
            }
        }
    }
    return false;
}

ActionResult apply_action(const WorldConfig& cfg, WorldState& world, AgentState& agent,
                          const PrimitiveAction& action) {
    tick_survival(cfg, world, agent);
    switch (action.kind) {
        case ActionKind::Move: return do_move(cfg, world, agent, action);
        case ActionKind::Turn: return do_turn(agent, action);
        case ActionKind::Mine: return do_mine(cfg, world, agent, action);
        case ActionKind::Craft:
        case ActionKind::Smelt: return do_craft(cfg, world, agent, action);
        case ActionKind::Place: return do_place(cfg, world, agent, action);
        case ActionKind::Equip: return do_equip(agent, action);
        case ActionKind::ExploreStep: return do_explore_step(cfg, world, agent);
    }
    return ActionResult::failure(FailureCode::InvalidTarget, "unknown action kind");
}

// ---------------------------------------------------------------------------
// Exploration sweep
// ---------------------------------------------------------------------------

std::optional<Vec3i> explore_step_target(const WorldConfig& cfg, const WorldState& world,
                                         const Vec3i& pos, double yaw) {
    const int spacing = std::max(2, cfg.rules.explore_row_spacing);
    const int half = spacing / 2;
    const Vec3i dims = world.dims();
    const int rows = std::max(1, (dims.z - half + spacing - 1) / spacing);
    const int last_row_z = half + (rows - 1) * spacing;

    // Heading encodes sweep state: 90 = descending to the next row,
    // 270 = return leg back to row zero. The route is a closed patrol loop.
    const bool heading_south = std::abs(yaw - 90.0) < 1.0;
    const bool heading_north = std::abs(yaw - 270.0) < 1.0;
    const bool on_row = pos.z >= half && pos.z <= last_row_z && (pos.z - half) % spacing == 0;

    // Row sweeps stay one cell off the x walls so the transit and return
    // columns avoid feature lattices pinned to x = 0.
    const int x_min = 1;
    const int x_max = dims.x - 2;

    Vec3i preferred;
    if (!on_row) {
        if (heading_north) {
            preferred = pos + Vec3i{0, 0, -1};
        } else if (heading_south) {
            preferred = pos + Vec3i{0, 0, 1};
        } else {
            // Recover toward the nearest row after off-route excursions.
            int k = static_cast<int>(std::lround(static_cast<double>(pos.z - half) / spacing));
            k = std::clamp(k, 0, rows - 1);
            const int row_z = half + k * spacing;
            preferred = pos + Vec3i{0, 0, pos.z < row_z ? 1 : (pos.z > row_z ? -1 : 1)};
        }
    } else {
        const int k = (pos.z - half) / spacing;
        if (heading_north && pos.z > half) {
            preferred = pos + Vec3i{0, 0, -1};  // return leg passes through rows
        } else {
            const int dir = (k % 2 == 0) ? 1 : -1;
            const int next_x = pos.x + dir;
            if (next_x >= x_min && next_x <= x_max) {
                preferred = pos + Vec3i{dir, 0, 0};
            } else if (k + 1 < rows) {
                preferred = pos + Vec3i{0, 0, 1};
            } else {
                preferred = pos + Vec3i{0, 0, -1};  // loop back toward row zero
            }
        }
    }

    const Vec3i candidates[] = {preferred, pos + Vec3i{1, 0, 0}, pos + Vec3i{-1, 0, 0},
                                pos + Vec3i{0, 0, 1}, pos + Vec3i{0, 0, -1}};
    for (const Vec3i& c : candidates) {
        if (c == pos) continue;
        if (world.in_bounds(c) && world.at(c) == 0) return c;
    }
    return std::nullopt;
}

std::string direction_name_of(const Vec3i& delta) {
    for (const auto& d : kDirections) {
        if (delta == d.delta) return d.name;
    }
    throw Error(ErrorCode::ParseFailure, "not a unit direction delta");
}

std::string resolve_direction(const AgentState& agent, const std::string& name) {
    static const char* quads[] = {"east", "south", "west", "north"};  // yaw 0/90/180/270
    int quad = static_cast<int>(std::lround(agent.yaw / 90.0)) % 4;
    if (quad < 0) quad += 4;
    if (name == "forward") return quads[quad];
    if (name == "back") return quads[(quad + 2) % 4];
    if (name == "right") return quads[(quad + 1) % 4];
    if (name == "left") return quads[(quad + 3) % 4];
    return name;
}

// ---------------------------------------------------------------------------
// Perception primitives
// ---------------------------------------------------------------------------

Vec3d gaze_direction(double yaw_deg, double pitch_deg) {
    const double yaw = yaw_deg * kPi / 180.0;
    const double pitch = pitch_deg * kPi / 180.0;
    return {std::cos(pitch) * std::cos(yaw), std::sin(pitch), std::cos(pitch) * std::sin(yaw)};
}

std::vector<SeenBlock> visible_set(const WorldConfig& cfg, const WorldState& world,
                                   const AgentState& agent, double fov_deg, double max_dist) {
    if (fov_deg <= 0 || fov_deg > 180) {
        throw Error(ErrorCode::ConfigError, "fov_deg must be in (0, 180]");
    }
    if (max_dist < 1) {
        throw Error(ErrorCode::ConfigError, "max_dist must be >= 1");
    }
    const Vec3d eye = center_of(agent.position);
    const double step = cfg.perception.ray_step;
    const int steps = static_cast<int>(max_dist / step);
    const int half = static_cast<int>(fov_deg / 2.0);

    std::set<Vec3i> hits;
    for (int i = -half; i <= half; ++i) {
        for (int j = -half; j <= half; ++j) {
            const double pitch = agent.pitch + j;
            if (pitch < -89.0 || pitch > 89.0) continue;
            const Vec3d dir = gaze_direction(agent.yaw + i, pitch);
            for (int k = 1; k <= steps; ++k) {
                const double t = k * step;
                const Vec3d p = eye + dir * t;
                const Vec3i v{static_cast<int>(std::floor(p.x)), static_cast<int>(std::floor(p.y)),
                              static_cast<int>(std::floor(p.z))};
                if (v == agent.position) continue;
                if (!world.in_bounds(v)) break;  // the world box is convex; rays never re-enter
                const std::uint16_t idx = world.at(v);
                if (idx == 0) continue;
                hits.insert(v);
                if (cfg.block(idx).opaque) break;
            }
        }
    }

    std::vector<SeenBlock> out;
    out.reserve(hits.size());
    for (const Vec3i& v : hits) out.push_back({v, cfg.block(world.at(v)).id});
    return out;
}

std::vector<SeenBlock> proximity_set(const WorldConfig& cfg, const WorldState& world,
                                     const AgentState& agent) {
    std::vector<SeenBlock> out;
    const Vec3i dims = world.dims();
    for (int y = 0; y < dims.y; ++y) {
        for (int z = agent.position.z - 4; z <= agent.position.z + 3; ++z) {
            for (int x = agent.position.x - 4; x <= agent.position.x + 3; ++x) {
                const Vec3i p{x, y, z};
                if (!world.in_bounds(p)) continue;
                const std::uint16_t idx = world.at(p);
                if (idx == 0) continue;
                out.push_back({p, cfg.block(idx).id});
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool check_task(const WorldConfig&, const WorldState&, const AgentState& agent, const Task& task,
                const LocateProgress& progress) {
    switch (task.goal.kind) {
        case GoalKind::Possess: {
            auto it = agent.inventory.find(task.goal.target);
            const int have = it == agent.inventory.end() ? 0 : it->second;
            return have >= task.goal.count;
        }
        case GoalKind::Locate:
            return progress.count(task.goal.target) >= task.goal.count;
    }
    return false;
}

}  // namespace voxagent::world
