#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "voxagent/core.hpp"

namespace voxagent::world {

// ---------------------------------------------------------------------------
// Config (loaded from the world config file; read-only and shareable after load)
// ---------------------------------------------------------------------------

enum class Station { None, CraftingTable, Furnace };

std::string station_name(Station s);
Station station_from_name(const std::string& name);

struct BlockDef {
    std::string id;
    int hardness_tier = 0;  // minimum tool tier required to mine
    bool opaque = true;
    std::string drop;  // item added to inventory on mining; empty = no drop
};

struct ToolDef {
    std::string id;
    int tier = 0;
};

struct FoodDef {
    std::string id;
    int restores = 0;
};

struct Recipe {
    std::string output;
    int output_count = 1;
    std::map<std::string, int> inputs;
    Station station = Station::None;
};

struct PerceptionSettings {
    double fov_deg = 90.0;
    double max_dist = 32.0;
    double ray_step = 0.25;
    std::vector<double> band_edges = {4.0, 8.0, 16.0};  // distance band boundaries
    int visual_token_budget = 64;
};

struct RuleSettings {
    double interaction_range = 4.0;
    int hunger_decay_ticks = 50;
    int hunger_eat_threshold = 15;
    int skill_step_cap = 10000;
    double retrieval_threshold = 0.3;
    int steps_per_iteration = 3;
    int explore_steps_per_round = 8;
    int explore_row_spacing = 8;
    int memory_budget_tokens = 160;
    int recent_entries = 5;
    int backend_retries = 3;
};

struct ScenarioSettings {
    int ground_height = 2;      // voxels below this y are ground
    std::string ground_block = "dirt";
    int lattice_spacing = 16;   // flat_search ore lattice pitch
    std::string lattice_block = "diamond_ore";
    int trees = 10;             // tech_tree_plains feature counts
    int stone_patch = 24;
    int iron_cluster = 6;
    int diamond_cluster = 4;
};

struct WorldConfig {
    int version = 1;
    std::vector<BlockDef> blocks;  // index 0 must be air
    std::vector<ToolDef> tools;
    std::vector<FoodDef> foods;
    std::vector<Recipe> recipes;
    std::map<std::string, std::string> aliases;  // step-grammar synonyms, e.g. wood -> log
    PerceptionSettings perception;
    RuleSettings rules;
    ScenarioSettings scenario;

    const BlockDef* find_block(const std::string& id) const;
    int block_index(const std::string& id) const;  // throws UnknownItem
    const BlockDef& block(std::uint16_t index) const;
    int tool_tier(const std::string& item) const;  // 0 for bare hand / non-tools
    const Recipe* recipe_for(const std::string& output) const;
    const BlockDef* block_dropping(const std::string& item) const;
    const FoodDef* find_food(const std::string& id) const;
    std::string resolve_alias(const std::string& word) const;
};

// Parses and validates the world config file. Unknown keys are rejected.
WorldConfig load_world_config(const std::string& path);
WorldConfig parse_world_config(const std::string& yaml_text);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

class WorldState {
public:
    WorldState() = default;
    WorldState(Vec3i dims, std::uint64_t seed, std::string scenario);

    Vec3i dims() const { return dims_; }
    std::uint64_t rng_seed() const { return rng_seed_; }
    const std::string& scenario() const { return scenario_; }
    std::int64_t tick() const { return tick_; }
    void advance_tick() { ++tick_; }

    bool in_bounds(const Vec3i& p) const {
        return p.x >= 0 && p.y >= 0 && p.z >= 0 && p.x < dims_.x && p.y < dims_.y && p.z < dims_.z;
    }
    std::uint16_t at(const Vec3i& p) const { return voxels_[index_of(p)]; }
    void set_block(const Vec3i& p, std::uint16_t block_index) { voxels_[index_of(p)] = block_index; }

    const std::vector<std::uint16_t>& voxels() const { return voxels_; }

private:
    std::size_t index_of(const Vec3i& p) const {
        return (static_cast<std::size_t>(p.y) * dims_.z + p.z) * dims_.x + p.x;
    }

    Vec3i dims_{};
    std::vector<std::uint16_t> voxels_;
    std::uint64_t rng_seed_ = 0;
    std::int64_t tick_ = 0;
    std::string scenario_;
};

struct AgentState {
    Vec3i position{};
    double yaw = 0.0;    // degrees; 0 faces +x, 90 faces +z
    double pitch = 0.0;  // degrees; positive looks up, clamped to [-89, 89]
    int health = 20;
    int hunger = 20;
    std::map<std::string, int> inventory;
    std::optional<std::string> equipped;
};

enum class GoalKind { Possess, Locate };

struct Goal {
    GoalKind kind = GoalKind::Possess;
    std::string target;
    int count = 1;

    std::string to_string() const;
    static Goal parse(const std::string& text);  // "possess:item:n" | "locate:block:n"
    bool operator==(const Goal&) const = default;
};

struct Task {
    std::string id;
    std::string description;
    Goal goal;
    bool operator==(const Task&) const = default;
};

enum class ActionKind { Move, Turn, Mine, Craft, Smelt, Place, Equip, ExploreStep };

std::string action_kind_name(ActionKind k);
ActionKind action_kind_from_name(const std::string& name);

struct PrimitiveAction {
    ActionKind kind = ActionKind::Move;
    std::string direction;     // move: north|south|east|west|up|down
    std::string item;          // craft/smelt: recipe output; place/equip: item
    Vec3i target{};            // mine/place target voxel
    bool has_target = false;
    double dyaw = 0.0;         // turn
    double dpitch = 0.0;

    static PrimitiveAction move(const std::string& direction);
    static PrimitiveAction turn(double dyaw, double dpitch);
    static PrimitiveAction mine(const Vec3i& target);
    static PrimitiveAction craft(const std::string& item);
    static PrimitiveAction smelt(const std::string& item);
    static PrimitiveAction place(const std::string& item, const Vec3i& target);
    static PrimitiveAction equip(const std::string& item);
    static PrimitiveAction explore_step();

    // Validates params against kind; throws Error(ParseFailure) on mismatch.
    void validate() const;
};

enum class FailureCode {
    None,
    OutOfBounds,
    Blocked,
    OutOfRange,
    InvalidTarget,
    InsufficientTier,
    UnknownRecipe,
    MissingInputs,
    MissingStation,
    NotInInventory,
    NoSuchBlock,
    PathBlocked,
    NoMatchingSkill,
    StepCapExceeded,
};

std::string failure_code_name(FailureCode code);
FailureCode failure_code_from_name(const std::string& name);

struct ActionResult {
    bool ok = false;
    FailureCode code = FailureCode::None;
    std::string message;

    static ActionResult success(std::string message) {
        return {true, FailureCode::None, std::move(message)};
    }
    static ActionResult failure(FailureCode code, std::string message) {
        return {false, code, std::move(message)};
    }
};

struct SeenBlock {
    Vec3i pos{};
    std::string id;

    bool operator==(const SeenBlock&) const = default;
    auto operator<=>(const SeenBlock&) const = default;
};

/// Episode-cumulative record of block positions seen so far, per block id.
/// Locate goals are checked against this.
class LocateProgress {
public:
    void update(const std::vector<SeenBlock>& seen);
    int count(const std::string& block_id) const;
    const std::map<std::string, std::set<Vec3i>>& found() const { return found_; }

private:
    std::map<std::string, std::set<Vec3i>> found_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline const char* const kScenarioFlatSearch = "flat_search";
inline const char* const kScenarioTechTree = "tech_tree_plains";
inline const char* const kScenarioEmpty = "empty";

// Deterministic function of (seed, scenario, dims).
WorldState generate_world(const WorldConfig& cfg, std::uint64_t seed, const std::string& scenario,
                          Vec3i dims);

// Scenario-defined start cell: world center at surface level, shifted +x past
// any occupied cells.
Vec3i spawn_position(const WorldConfig& cfg, const WorldState& world);
AgentState spawn_agent(const WorldConfig& cfg, const WorldState& world);

ActionResult apply_action(const WorldConfig& cfg, WorldState& world, AgentState& agent,
                          const PrimitiveAction& action);

// First-hit blocks along the frustum's sampled ray fan (one ray per integer
// degree offset in yaw and pitch), fixed-step marching at cfg ray_step.
// Opaque blocks terminate rays; non-opaque blocks are recorded and passed
// through. Result is sorted by position.
std::vector<SeenBlock> visible_set(const WorldConfig& cfg, const WorldState& world,
                                   const AgentState& agent, double fov_deg, double max_dist);

// All non-air blocks in the 8x8 horizontal footprint centered on the agent
// (x,z offsets in [-4,3]), full world height, ignoring occlusion.
std::vector<SeenBlock> proximity_set(const WorldConfig& cfg, const WorldState& world,
                                     const AgentState& agent);

bool check_task(const WorldConfig& cfg, const WorldState& world, const AgentState& agent,
                const Task& task, const LocateProgress& progress);

// True when a block of the given station type sits within interaction range.
bool station_in_range(const WorldConfig& cfg, const WorldState& world, const AgentState& agent,
                      Station station);

// Direction vector of a (yaw, pitch) gaze, in degrees.
Vec3d gaze_direction(double yaw_deg, double pitch_deg);

// Compass name of a unit voxel delta (east/west/south/north/up/down).
std::string direction_name_of(const Vec3i& delta);

// Maps forward/back/left/right onto compass names using the agent's yaw
// quantized to the nearest quarter turn; compass names pass through.
std::string resolve_direction(const AgentState& agent, const std::string& name);

// The deterministic serpentine sweep target used by explore_step; exposed for
// tests. Yaw carries the sweep direction between calls.
std::optional<Vec3i> explore_step_target(const WorldConfig& cfg, const WorldState& world,
                                         const Vec3i& pos, double yaw);

}  // namespace voxagent::world
