#include <doctest.h>

#include "oracles.hpp"
#include "support.hpp"

using namespace voxagent;
using namespace voxagent::testing;

TEST_SUITE("world") {

TEST_CASE("flat_search places the ore lattice exactly") {
    const auto& cfg = shipped_config();
    const auto w = world::generate_world(cfg, 42, world::kScenarioFlatSearch, {64, 8, 64});

    // Independent enumeration of the rule: ore at every (x,z) = (0 mod 16).
    std::set<Vec3i> expected;
    for (int x = 0; x < 64; x += 16) {
        for (int z = 0; z < 64; z += 16) expected.insert({x, 2, z});
    }
    std::set<Vec3i> actual;
    const int ore = cfg.block_index("diamond_ore");
    for (int y = 0; y < 8; ++y) {
        for (int z = 0; z < 64; ++z) {
            for (int x = 0; x < 64; ++x) {
                if (w.at({x, y, z}) == ore) actual.insert({x, y, z});
            }
        }
    }
    CHECK(actual == expected);
    CHECK(actual.size() == 16);
}

TEST_CASE("empty scenario has nothing above the ground slab") {
    const auto& cfg = shipped_config();
    const auto w = world::generate_world(cfg, 7, world::kScenarioEmpty, {16, 8, 16});
    for (int y = cfg.scenario.ground_height; y < 8; ++y) {
        for (int z = 0; z < 16; ++z) {
            for (int x = 0; x < 16; ++x) {
                CHECK(w.at({x, y, z}) == 0);
            }
        }
    }
}

TEST_CASE("generation is bitwise deterministic") {
    const auto& cfg = shipped_config();
    const auto a = world::generate_world(cfg, 42, world::kScenarioFlatSearch, {64, 8, 64});
    const auto b = world::generate_world(cfg, 42, world::kScenarioFlatSearch, {64, 8, 64});
    CHECK(a.voxels() == b.voxels());

    const auto c = world::generate_world(cfg, 5, world::kScenarioTechTree, {48, 8, 48});
    const auto d = world::generate_world(cfg, 5, world::kScenarioTechTree, {48, 8, 48});
    CHECK(c.voxels() == d.voxels());
}

TEST_CASE("tech_tree_plains guarantees its resources") {
    const auto& cfg = shipped_config();
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 9ULL}) {
        const auto w = world::generate_world(cfg, seed, world::kScenarioTechTree, {48, 8, 48});
        std::map<std::string, int> counts;
        for (int y = 0; y < 8; ++y) {
            for (int z = 0; z < 48; ++z) {
                for (int x = 0; x < 48; ++x) {
                    counts[cfg.block(w.at({x, y, z})).id] += 1;
                }
            }
        }
        CHECK(counts["log"] >= 3);
        CHECK(counts["stone"] >= 11);
        CHECK(counts["iron_ore"] >= 3);
        CHECK(counts["diamond_ore"] >= 3);
    }
}

TEST_CASE("generation rejects bad inputs") {
    const auto& cfg = shipped_config();
    CHECK_THROWS_AS(world::generate_world(cfg, 1, "volcano", {16, 8, 16}), Error);
    CHECK_THROWS_AS(world::generate_world(cfg, 1, world::kScenarioEmpty, {8, 8, 8}), Error);
    CHECK_THROWS_AS(world::generate_world(cfg, 1, world::kScenarioTechTree, {16, 8, 16}), Error);
}

TEST_CASE("mining respects tool tiers") {
    const auto& cfg = shipped_config();
    auto w = fixture_world(cfg);
    auto agent = fixture_agent();
    w.set_block({9, 2, 8}, static_cast<std::uint16_t>(cfg.block_index("log")));
    w.set_block({7, 2, 8}, static_cast<std::uint16_t>(cfg.block_index("diamond_ore")));

    SUBCASE("bare-hand log succeeds") {
        const auto r = world::apply_action(cfg, w, agent, world::PrimitiveAction::mine({9, 2, 8}));
        CHECK(r.ok);
        CHECK(agent.inventory["log"] == 1);
        CHECK(w.at({9, 2, 8}) == 0);
    }
    SUBCASE("diamond ore with a stone tool fails with InsufficientTier") {
        agent.inventory["stone_pickaxe"] = 1;
        world::apply_action(cfg, w, agent, world::PrimitiveAction::equip("stone_pickaxe"));
        const auto r = world::apply_action(cfg, w, agent, world::PrimitiveAction::mine({7, 2, 8}));
        CHECK_FALSE(r.ok);
        CHECK(r.code == world::FailureCode::InsufficientTier);
    }
    SUBCASE("diamond ore with an iron tool succeeds") {
        agent.inventory["iron_pickaxe"] = 1;
        world::apply_action(cfg, w, agent, world::PrimitiveAction::equip("iron_pickaxe"));
        const auto r = world::apply_action(cfg, w, agent, world::PrimitiveAction::mine({7, 2, 8}));
        CHECK(r.ok);
        CHECK(agent.inventory["diamond"] == 1);
    }
    SUBCASE("out-of-range target is its own failure code") {
        const auto r = world::apply_action(cfg, w, agent, world::PrimitiveAction::mine({1, 2, 1}));
        CHECK_FALSE(r.ok);
        CHECK(r.code == world::FailureCode::OutOfRange);
    }
}

TEST_CASE("crafting consumes inputs per the recipe ledger") {
    const auto& cfg = shipped_config();
    auto w = fixture_world(cfg);
    auto agent = fixture_agent();

    SUBCASE("wooden pickaxe next to a crafting table") {
        w.set_block({9, 2, 8}, static_cast<std::uint16_t>(cfg.block_index("crafting_table")));
        agent.inventory = {{"plank", 3}, {"stick", 2}};
        const auto r =
            world::apply_action(cfg, w, agent, world::PrimitiveAction::craft("wooden_pickaxe"));
        CHECK(r.ok);
        CHECK(agent.inventory.count("plank") == 0);
        CHECK(agent.inventory.count("stick") == 0);
        CHECK(agent.inventory["wooden_pickaxe"] == 1);
    }
    SUBCASE("missing inputs reported before missing station") {
        const auto r =
            world::apply_action(cfg, w, agent, world::PrimitiveAction::craft("wooden_pickaxe"));
        CHECK_FALSE(r.ok);
        CHECK(r.code == world::FailureCode::MissingInputs);
    }
    SUBCASE("inputs present but no station") {
        agent.inventory = {{"plank", 3}, {"stick", 2}};
        const auto r =
            world::apply_action(cfg, w, agent, world::PrimitiveAction::craft("wooden_pickaxe"));
        CHECK_FALSE(r.ok);
        CHECK(r.code == world::FailureCode::MissingStation);
    }
    SUBCASE("unknown recipe") {
        const auto r = world::apply_action(cfg, w, agent, world::PrimitiveAction::craft("anvil"));
        CHECK_FALSE(r.ok);
        CHECK(r.code == world::FailureCode::UnknownRecipe);
    }
    SUBCASE("smelting needs a furnace recipe and kind") {
        agent.inventory = {{"iron_ore", 1}, {"plank", 1}};
        w.set_block({9, 2, 8}, static_cast<std::uint16_t>(cfg.block_index("furnace")));
        const auto wrong =
            world::apply_action(cfg, w, agent, world::PrimitiveAction::craft("iron_ingot"));
        CHECK_FALSE(wrong.ok);
        const auto r =
            world::apply_action(cfg, w, agent, world::PrimitiveAction::smelt("iron_ingot"));
        CHECK(r.ok);
        CHECK(agent.inventory["iron_ingot"] == 1);
    }
}

TEST_CASE("conservation: inventory deltas match drops and recipes") {
    const auto& cfg = shipped_config();
    SplitMix64 rng(77);
    auto w = world::generate_world(cfg, 3, world::kScenarioTechTree, {48, 8, 48});
    auto agent = world::spawn_agent(cfg, w);
    agent.inventory = {{"plank", 20}, {"stick", 8}, {"log", 4}, {"cobblestone", 12},
                       {"wooden_pickaxe", 1}};

    for (int i = 0; i < 140; ++i) {
        const auto before = agent.inventory;
        world::PrimitiveAction action;
        switch (rng.next_below(4)) {
            case 0: {
                const Vec3i t = agent.position + Vec3i{rng.next_range(-3, 3), 0,
                                                      rng.next_range(-3, 3)};
                action = world::PrimitiveAction::mine(t);
                break;
            }
            case 1:
                action = world::PrimitiveAction::craft(
                    rng.next() & 1 ? "plank" : "crafting_table");
                break;
            case 2:
                action = world::PrimitiveAction::place("crafting_table",
                                                       agent.position + Vec3i{1, 0, 0});
                break;
            default:
                action = world::PrimitiveAction::move(rng.next() & 1 ? "east" : "north");
                break;
        }
        std::string mined_drop;
        if (action.kind == world::ActionKind::Mine && w.in_bounds(action.target) &&
            w.at(action.target) != 0) {
            mined_drop = cfg.block(w.at(action.target)).drop;
        }
        const auto r = world::apply_action(cfg, w, agent, action);

        std::map<std::string, int> delta;
        for (const auto& [item, n] : agent.inventory) delta[item] += n;
        for (const auto& [item, n] : before) delta[item] -= n;
        std::erase_if(delta, [](const auto& kv) { return kv.second == 0; });

        if (!r.ok) {
            CHECK(delta.empty());
        } else if (action.kind == world::ActionKind::Mine) {
            if (mined_drop.empty()) {
                CHECK(delta.empty());
            } else {
                CHECK(delta == std::map<std::string, int>{{mined_drop, 1}});
            }
        } else if (action.kind == world::ActionKind::Craft) {
            const world::Recipe* recipe = cfg.recipe_for(action.item);
            REQUIRE(recipe != nullptr);
            std::map<std::string, int> want;
            want[recipe->output] += recipe->output_count;
            for (const auto& [item, n] : recipe->inputs) want[item] -= n;
            std::erase_if(want, [](const auto& kv) { return kv.second == 0; });
            CHECK(delta == want);
        } else if (action.kind == world::ActionKind::Place) {
            CHECK(delta == std::map<std::string, int>{{action.item, -1}});
        } else {
            CHECK(delta.empty());
        }
    }
}

TEST_CASE("tier monotonicity: better tools mine whatever worse ones do") {
    const auto& cfg = shipped_config();
    for (const auto& block : cfg.blocks) {
        if (block.id == "air") continue;
        std::vector<bool> outcomes;
        for (const auto& tool : cfg.tools) {
            auto w = fixture_world(cfg);
            auto agent = fixture_agent();
            w.set_block({9, 2, 8}, static_cast<std::uint16_t>(cfg.block_index(block.id)));
            agent.inventory[tool.id] = 1;
            world::apply_action(cfg, w, agent, world::PrimitiveAction::equip(tool.id));
            outcomes.push_back(
                world::apply_action(cfg, w, agent, world::PrimitiveAction::mine({9, 2, 8})).ok);
        }
        for (std::size_t i = 1; i < outcomes.size(); ++i) {
            if (outcomes[i - 1]) CHECK(outcomes[i]);  // tools are tier-sorted in config
        }
    }
}

TEST_CASE("movement, bounds, and hunger bookkeeping") {
    const auto& cfg = shipped_config();
    auto w = fixture_world(cfg);
    auto agent = fixture_agent();

    CHECK(world::apply_action(cfg, w, agent, world::PrimitiveAction::move("east")).ok);
    CHECK(agent.position == Vec3i{9, 2, 8});
    CHECK(world::apply_action(cfg, w, agent, world::PrimitiveAction::move("down")).ok == false);

    agent.position = {15, 2, 8};
    const auto r = world::apply_action(cfg, w, agent, world::PrimitiveAction::move("east"));
    CHECK(r.code == world::FailureCode::OutOfBounds);

    // Hunger decays once per 50 ticks and auto-eats when food is held.
    agent.inventory["apple"] = 1;
    const auto start_tick = w.tick();
    while (w.tick() < start_tick + 260) {
        world::apply_action(cfg, w, agent, world::PrimitiveAction::turn(1, 0));
    }
    CHECK(agent.hunger >= 15);
    CHECK(agent.inventory.count("apple") == 0);  // eaten at the threshold
}

TEST_CASE("visible_set basics") {
    const auto& cfg = shipped_config();
    world::WorldState w({16, 8, 16}, 0, "fixture");  // all air, no floor
    auto agent = fixture_agent({8, 4, 8});
    agent.yaw = 0.0;  // facing +x

    const auto log_idx = static_cast<std::uint16_t>(cfg.block_index("log"));

    SUBCASE("unobstructed block straight ahead is included") {
        w.set_block({11, 4, 8}, log_idx);
        const auto seen = world::visible_set(cfg, w, agent, 90, 12);
        REQUIRE(seen.size() == 1);
        CHECK(seen[0].pos == Vec3i{11, 4, 8});
        CHECK(seen[0].id == "log");
    }
    SUBCASE("block behind the agent is outside the frustum") {
        w.set_block({5, 4, 8}, log_idx);
        CHECK(world::visible_set(cfg, w, agent, 90, 12).empty());
    }
    SUBCASE("a 3x3 opaque wall fully occludes what is behind it") {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dz = -1; dz <= 1; ++dz) {
                w.set_block({10, 4 + dy, 8 + dz}, static_cast<std::uint16_t>(
                                                      cfg.block_index("stone")));
            }
        }
        w.set_block({12, 4, 8}, log_idx);
        const auto seen = world::visible_set(cfg, w, agent, 20, 12);
        for (const auto& s : seen) CHECK(s.id != "log");
    }
    SUBCASE("non-opaque blocks are seen through") {
        w.set_block({10, 4, 8}, static_cast<std::uint16_t>(cfg.block_index("leaves")));
        w.set_block({12, 4, 8}, log_idx);
        const auto seen = world::visible_set(cfg, w, agent, 20, 12);
        bool saw_leaves = false;
        bool saw_log = false;
        for (const auto& s : seen) {
            saw_leaves |= s.id == "leaves";
            saw_log |= s.id == "log";
        }
        CHECK(saw_leaves);
        CHECK(saw_log);
    }
}

TEST_CASE("visible_set equals the per-block brute-force oracle") {
    const auto& cfg = shipped_config();
    for (std::uint64_t seed = 100; seed < 108; ++seed) {
        const auto scene = random_scene(cfg, seed);
        const auto got =
            world::visible_set(cfg, scene.world, scene.agent, scene.fov_deg, scene.max_dist);
        std::set<Vec3i> got_set;
        for (const auto& s : got) got_set.insert(s.pos);
        const auto want =
            oracle_visible_set(cfg, scene.world, scene.agent, scene.fov_deg, scene.max_dist);
        CHECK(got_set == want);
    }
}

TEST_CASE("visible_set stays within range") {
    const auto& cfg = shipped_config();
    for (std::uint64_t seed = 200; seed < 206; ++seed) {
        const auto scene = random_scene(cfg, seed);
        const auto got =
            world::visible_set(cfg, scene.world, scene.agent, scene.fov_deg, scene.max_dist);
        for (const auto& s : got) {
            // A sampled point inside the cell is within max_dist; the center
            // is at most half a cell diagonal further out.
            CHECK(distance(scene.agent.position, s.pos) <= scene.max_dist + 0.87);
        }
    }
}

TEST_CASE("proximity_set is the 8x8 footprint, occlusion-free, yaw-independent") {
    const auto& cfg = shipped_config();
    world::WorldState w({32, 8, 32}, 0, "fixture");  // all air
    auto agent = fixture_agent({16, 2, 16});

    SUBCASE("empty world gives an empty set") {
        CHECK(world::proximity_set(cfg, w, agent).empty());
    }
    SUBCASE("occluded block inside the footprint is still included") {
        const auto stone = static_cast<std::uint16_t>(cfg.block_index("stone"));
        for (int dy = 0; dy < 8; ++dy) w.set_block({18, dy, 16}, stone);  // wall
        w.set_block({19, 2, 19},
                    static_cast<std::uint16_t>(cfg.block_index("diamond_ore")));  // offset (3,0,3)
        const auto seen = world::proximity_set(cfg, w, agent);
        bool found = false;
        for (const auto& s : seen) found |= s.id == "diamond_ore";
        CHECK(found);
    }
    SUBCASE("block outside the footprint is excluded") {
        w.set_block({25, 2, 16},
                    static_cast<std::uint16_t>(cfg.block_index("diamond_ore")));  // offset (9,0,0)
        CHECK(world::proximity_set(cfg, w, agent).empty());
    }
    SUBCASE("independent of yaw and pitch") {
        SplitMix64 rng(5);
        for (int i = 0; i < 40; ++i) {
            w.set_block({rng.next_range(10, 22), rng.next_range(0, 7), rng.next_range(10, 22)},
                        static_cast<std::uint16_t>(rng.next_range(1, 5)));
        }
        agent.yaw = 13.0;
        agent.pitch = -20.0;
        const auto a = world::proximity_set(cfg, w, agent);
        agent.yaw = 201.0;
        agent.pitch = 45.0;
        const auto b = world::proximity_set(cfg, w, agent);
        CHECK(a == b);
    }
}

TEST_CASE("check_task reads inventory and the found-set") {
    const auto& cfg = shipped_config();
    auto w = fixture_world(cfg);
    auto agent = fixture_agent();
    world::LocateProgress progress;

    world::Task possess{"t1", "", {world::GoalKind::Possess, "wooden_pickaxe", 1}};
    CHECK_FALSE(world::check_task(cfg, w, agent, possess, progress));
    agent.inventory["wooden_pickaxe"] = 1;
    CHECK(world::check_task(cfg, w, agent, possess, progress));

    world::Task locate{"t2", "", {world::GoalKind::Locate, "diamond_ore", 10}};
    std::vector<world::SeenBlock> seen;
    for (int i = 0; i < 9; ++i) seen.push_back({{i, 2, 0}, "diamond_ore"});
    progress.update(seen);
    CHECK_FALSE(world::check_task(cfg, w, agent, locate, progress));
    progress.update({{{9, 2, 0}, "diamond_ore"}});
    CHECK(world::check_task(cfg, w, agent, locate, progress));
    progress.update({{{9, 2, 0}, "diamond_ore"}});  // duplicates don't double-count
    CHECK(progress.count("diamond_ore") == 10);
}

TEST_CASE("world config loading validates its schema") {
    CHECK_THROWS_AS(world::parse_world_config("version: 1\nblocks:\n  - {id: dirt}\n"), Error);
    CHECK_THROWS_AS(world::parse_world_config(
                        "version: 1\nnonsense: 2\nblocks:\n  - {id: air, opaque: false}\n"),
                    Error);
    const auto& cfg = shipped_config();
    CHECK(cfg.find_block("air") != nullptr);
    CHECK(cfg.find_block("diamond_ore")->hardness_tier == 3);  // needs an iron-tier tool
    CHECK(cfg.tool_tier("iron_pickaxe") == 3);
    CHECK(cfg.blocks[0].id == "air");
}

TEST_CASE("full action-sequence determinism") {
    const auto& cfg = shipped_config();
    auto run = [&] {
        auto w = world::generate_world(cfg, 11, world::kScenarioTechTree, {48, 8, 48});
        auto agent = world::spawn_agent(cfg, w);
        SplitMix64 rng(999);
        for (int i = 0; i < 120; ++i) {
            const char* dirs[] = {"east", "west", "north", "south"};
            world::apply_action(cfg, w, agent,
                                world::PrimitiveAction::move(dirs[rng.next_below(4)]));
        }
        return std::pair{w.voxels(), agent};
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.first == b.first);
    CHECK(a.second.position == b.second.position);
    CHECK(a.second.inventory == b.second.inventory);
    CHECK(a.second.hunger == b.second.hunger);
}

}  // TEST_SUITE
