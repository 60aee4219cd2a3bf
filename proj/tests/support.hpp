#pragma once

#include <memory>
#include <string>

#include "voxagent/backends.hpp"
#include "voxagent/instruction.hpp"
#include "voxagent/skills.hpp"
#include "voxagent/world.hpp"

#ifndef VOXAGENT_TEST_CONFIG_DIR
#define VOXAGENT_TEST_CONFIG_DIR "configs"
#endif

namespace voxagent::testing {

inline std::string config_path(const std::string& name) {
    return std::string(VOXAGENT_TEST_CONFIG_DIR) + "/" + name;
}

inline const world::WorldConfig& shipped_config() {
    static const world::WorldConfig cfg = world::load_world_config(config_path("world.yaml"));
    return cfg;
}

inline const std::vector<world::Task>& shipped_curriculum() {
    static const std::vector<world::Task> tasks =
        instruction::load_curriculum(config_path("curriculum.yaml"));
    return tasks;
}

/// Everything needed to run scripted-oracle episodes in tests.
struct TestRig {
    world::WorldConfig cfg;
    std::vector<world::Task> curriculum;
    backends::HashedBowEmbedder embedder{256};
    std::unique_ptr<instruction::Engine> engine;
    skills::SkillDatabase db;
    instruction::Pipeline pipeline;

    TestRig() : cfg(shipped_config()), curriculum(shipped_curriculum()) {
        std::map<std::string, std::shared_ptr<backends::ChatBackend>> chat;
        chat["scripted"] = std::make_shared<backends::ScriptedBackend>(cfg, curriculum);
        engine = std::make_unique<instruction::Engine>(&cfg, instruction::default_roles(), chat,
                                                       curriculum);
        db = skills::load_skill_pack(config_path("skills.jsonl"), embedder);
        pipeline = {&cfg, engine.get(), &db, &embedder};
    }
};

// A small fixture world: flat ground plus caller-placed blocks.
inline world::WorldState fixture_world(const world::WorldConfig& cfg, Vec3i dims = {16, 8, 16}) {
    world::WorldState w(dims, 0, "fixture");
    const auto dirt = static_cast<std::uint16_t>(cfg.block_index("dirt"));
    for (int z = 0; z < dims.z; ++z) {
        for (int x = 0; x < dims.x; ++x) {
            w.set_block({x, 0, z}, dirt);
            w.set_block({x, 1, z}, dirt);
        }
    }
    return w;
}

inline world::AgentState fixture_agent(Vec3i pos = {8, 2, 8}) {
    world::AgentState a;
    a.position = pos;
    return a;
}

}  // namespace voxagent::testing
