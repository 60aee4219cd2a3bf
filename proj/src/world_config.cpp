#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "voxagent/world.hpp"

namespace voxagent::world {

namespace {

void reject_unknown_keys(const YAML::Node& node, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    if (!node.IsMap()) return;
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
T get_or(const YAML::Node& node, const char* key, T fallback) {
    if (node[key]) return node[key].as<T>();
    return fallback;
}

BlockDef parse_block(const YAML::Node& n) {
    reject_unknown_keys(n, {"id", "tier", "opaque", "drop"}, "blocks entry");
    BlockDef b;
    b.id = n["id"].as<std::string>();
    b.hardness_tier = get_or(n, "tier", 0);
    b.opaque = get_or(n, "opaque", true);
    b.drop = get_or<std::string>(n, "drop", "");
    return b;
}

Recipe parse_recipe(const YAML::Node& n) {
    reject_unknown_keys(n, {"output", "count", "inputs", "station"}, "recipes entry");
    Recipe r;
    r.output = n["output"].as<std::string>();
    r.output_count = get_or(n, "count", 1);
    if (!n["inputs"] || !n["inputs"].IsMap() || n["inputs"].size() == 0) {
        throw Error(ErrorCode::ConfigError, "recipe '" + r.output + "' has no inputs");
    }
    for (const auto& kv : n["inputs"]) {
        r.inputs[kv.first.as<std::string>()] = kv.second.as<int>();
    }
    r.station = station_from_name(get_or<std::string>(n, "station", "none"));
    if (r.output_count < 1) {
        throw Error(ErrorCode::ConfigError, "recipe '" + r.output + "' output count < 1");
    }
    return r;
}

}  // namespace

std::string station_name(Station s) {
    switch (s) {
        case Station::None: return "none";
        case Station::CraftingTable: return "crafting_table";
        case Station::Furnace: return "furnace";
    }
    return "none";
}

Station station_from_name(const std::string& name) {
    if (name == "none") return Station::None;
    if (name == "crafting_table") return Station::CraftingTable;
    if (name == "furnace") return Station::Furnace;
    throw Error(ErrorCode::ConfigError, "unknown station '" + name + "'");
}

const BlockDef* WorldConfig::find_block(const std::string& id) const {
    for (const auto& b : blocks) {
        if (b.id == id) return &b;
    }
    return nullptr;
}

int WorldConfig::block_index(const std::string& id) const {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].id == id) return static_cast<int>(i);
    }
    throw Error(ErrorCode::UnknownItem, "block '" + id + "' is not registered");
}

const BlockDef& WorldConfig::block(std::uint16_t index) const {
    if (index >= blocks.size()) {
        throw Error(ErrorCode::UnknownItem, "block index out of range");
    }
    return blocks[index];
}

int WorldConfig::tool_tier(const std::string& item) const {
    for (const auto& t : tools) {
        if (t.id == item) return t.tier;
    }
    return 0;
}

const Recipe* WorldConfig::recipe_for(const std::string& output) const {
    for (const auto& r : recipes) {
        if (r.output == output) return &r;
    }
    return nullptr;
}

const BlockDef* WorldConfig::block_dropping(const std::string& item) const {
    for (const auto& b : blocks) {
        if (!b.drop.empty() && b.drop == item) return &b;
    }
    return nullptr;
}

const FoodDef* WorldConfig::find_food(const std::string& id) const {
    for (const auto& f : foods) {
        if (f.id == id) return &f;
    }
    return nullptr;
}

std::string WorldConfig::resolve_alias(const std::string& word) const {
    auto it = aliases.find(word);
    return it == aliases.end() ? word : it->second;
}

WorldConfig parse_world_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("config parse: ") + e.what());
    }
    reject_unknown_keys(root,
                        {"version", "blocks", "tools", "foods", "recipes", "aliases", "perception",
                         "rules", "scenario"},
                        "config root");

    WorldConfig cfg;
    cfg.version = get_or(root, "version", 1);

    if (!root["blocks"] || !root["blocks"].IsSequence()) {
        throw Error(ErrorCode::ConfigError, "config missing 'blocks' table");
    }
    for (const auto& n : root["blocks"]) cfg.blocks.push_back(parse_block(n));
    if (cfg.blocks.empty() || cfg.blocks[0].id != "air") {
        throw Error(ErrorCode::ConfigError, "first block must be 'air'");
    }
    if (cfg.blocks[0].hardness_tier != 0 || cfg.blocks[0].opaque) {
        throw Error(ErrorCode::ConfigError, "air must have tier 0 and opaque=false");
    }
    for (std::size_t i = 0; i < cfg.blocks.size(); ++i) {
        for (std::size_t j = i + 1; j < cfg.blocks.size(); ++j) {
            if (cfg.blocks[i].id == cfg.blocks[j].id) {
                throw Error(ErrorCode::ConfigError, "duplicate block id '" + cfg.blocks[i].id + "'");
            }
        }
        if (cfg.blocks[i].hardness_tier < 0 || cfg.blocks[i].hardness_tier > 4) {
            throw Error(ErrorCode::ConfigError, "block tier out of range 0-4");
        }
    }

    if (root["tools"]) {
        for (const auto& n : root["tools"]) {
            reject_unknown_keys(n, {"id", "tier"}, "tools entry");
            cfg.tools.push_back({n["id"].as<std::string>(), n["tier"].as<int>()});
        }
    }
    if (root["foods"]) {
        for (const auto& n : root["foods"]) {
            reject_unknown_keys(n, {"id", "restores"}, "foods entry");
            cfg.foods.push_back({n["id"].as<std::string>(), n["restores"].as<int>()});
        }
    }
    if (root["recipes"]) {
        for (const auto& n : root["recipes"]) cfg.recipes.push_back(parse_recipe(n));
    }
    for (std::size_t i = 0; i < cfg.recipes.size(); ++i) {
        for (std::size_t j = i + 1; j < cfg.recipes.size(); ++j) {
            if (cfg.recipes[i].output == cfg.recipes[j].output) {
                throw Error(ErrorCode::ConfigError,
                            "duplicate recipe for '" + cfg.recipes[i].output + "'");
            }
        }
    }
    if (root["aliases"]) {
        for (const auto& kv : root["aliases"]) {
            cfg.aliases[kv.first.as<std::string>()] = kv.second.as<std::string>();
        }
    }

    if (root["perception"]) {
        const auto& p = root["perception"];
        reject_unknown_keys(p, {"fov_deg", "max_dist", "ray_step", "band_edges", "visual_token_budget"},
                            "perception");
        cfg.perception.fov_deg = get_or(p, "fov_deg", cfg.perception.fov_deg);
        cfg.perception.max_dist = get_or(p, "max_dist", cfg.perception.max_dist);
        cfg.perception.ray_step = get_or(p, "ray_step", cfg.perception.ray_step);
        if (p["band_edges"]) cfg.perception.band_edges = p["band_edges"].as<std::vector<double>>();
        cfg.perception.visual_token_budget =
            get_or(p, "visual_token_budget", cfg.perception.visual_token_budget);
    }
    if (cfg.perception.fov_deg <= 0 || cfg.perception.fov_deg > 180) {
        throw Error(ErrorCode::ConfigError, "fov_deg must be in (0, 180]");
    }
    if (cfg.perception.max_dist < 1 || cfg.perception.max_dist > 256 ||
        cfg.perception.ray_step <= 0) {
        throw Error(ErrorCode::ConfigError, "max_dist must be in [1, 256] and ray_step > 0");
    }
    if (!std::is_sorted(cfg.perception.band_edges.begin(), cfg.perception.band_edges.end())) {
        throw Error(ErrorCode::ConfigError, "band_edges must be ascending");
    }

    if (root["rules"]) {
        const auto& r = root["rules"];
        reject_unknown_keys(r,
                            {"interaction_range", "hunger_decay_ticks", "hunger_eat_threshold",
                             "skill_step_cap", "retrieval_threshold", "steps_per_iteration",
                             "explore_steps_per_round", "explore_row_spacing", "memory_budget_tokens",
                             "recent_entries", "backend_retries"},
                            "rules");
        cfg.rules.interaction_range = get_or(r, "interaction_range", cfg.rules.interaction_range);
        cfg.rules.hunger_decay_ticks = get_or(r, "hunger_decay_ticks", cfg.rules.hunger_decay_ticks);
        cfg.rules.hunger_eat_threshold =
            get_or(r, "hunger_eat_threshold", cfg.rules.hunger_eat_threshold);
        cfg.rules.skill_step_cap = get_or(r, "skill_step_cap", cfg.rules.skill_step_cap);
        cfg.rules.retrieval_threshold =
            get_or(r, "retrieval_threshold", cfg.rules.retrieval_threshold);
        cfg.rules.steps_per_iteration =
            get_or(r, "steps_per_iteration", cfg.rules.steps_per_iteration);
        cfg.rules.explore_steps_per_round =
            get_or(r, "explore_steps_per_round", cfg.rules.explore_steps_per_round);
        cfg.rules.explore_row_spacing =
            get_or(r, "explore_row_spacing", cfg.rules.explore_row_spacing);
        cfg.rules.memory_budget_tokens =
            get_or(r, "memory_budget_tokens", cfg.rules.memory_budget_tokens);
        cfg.rules.recent_entries = get_or(r, "recent_entries", cfg.rules.recent_entries);
        cfg.rules.backend_retries = get_or(r, "backend_retries", cfg.rules.backend_retries);
    }

    if (root["scenario"]) {
        const auto& s = root["scenario"];
        reject_unknown_keys(s,
                            {"ground_height", "ground_block", "lattice_spacing", "lattice_block",
                             "trees", "stone_patch", "iron_cluster", "diamond_cluster"},
                            "scenario");
        cfg.scenario.ground_height = get_or(s, "ground_height", cfg.scenario.ground_height);
        cfg.scenario.ground_block = get_or<std::string>(s, "ground_block", cfg.scenario.ground_block);
        cfg.scenario.lattice_spacing = get_or(s, "lattice_spacing", cfg.scenario.lattice_spacing);
        cfg.scenario.lattice_block =
            get_or<std::string>(s, "lattice_block", cfg.scenario.lattice_block);
        cfg.scenario.trees = get_or(s, "trees", cfg.scenario.trees);
        cfg.scenario.stone_patch = get_or(s, "stone_patch", cfg.scenario.stone_patch);
        cfg.scenario.iron_cluster = get_or(s, "iron_cluster", cfg.scenario.iron_cluster);
        cfg.scenario.diamond_cluster = get_or(s, "diamond_cluster", cfg.scenario.diamond_cluster);
    }

    // Referential checks so later stages can assume closed-world ids.
    for (const auto& b : cfg.blocks) {
        if (!b.drop.empty() && !cfg.find_block(b.drop) && !cfg.recipe_for(b.drop)) {
            // Drops may be pure items (e.g. diamond); nothing to validate for those.
        }
    }
    for (const auto& r : cfg.recipes) {
        if (r.output_count < 1) {
            throw Error(ErrorCode::ConfigError, "recipe output count must be >= 1");
        }
    }
    if (!cfg.find_block(cfg.scenario.ground_block) || !cfg.find_block(cfg.scenario.lattice_block)) {
        throw Error(ErrorCode::ConfigError, "scenario references unregistered block");
    }
    return cfg;
}

WorldConfig load_world_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_world_config(ss.str());
}

}  // namespace voxagent::world
