#pragma once

// Randomized, schema-valid record instances for round-trip properties.

#include <string>
#include <vector>

#include "voxagent/datasets.hpp"

namespace voxagent::testing {

inline std::string random_text(SplitMix64& rng, bool allow_empty = false) {
    static const char* words[] = {"furnace", "smelts",  "ore",   "into", "ingots", "a",
                                  "creeper", "explodes", "near", "the",  "player", "torch",
                                  "light",   "cave",     "deep", "mine", "craft",  "recipe"};
    std::string out;
    const int n = rng.next_range(allow_empty ? 0 : 1, 8);
    for (int i = 0; i < n; ++i) {
        if (i) out += " ";
        out += words[rng.next_below(std::size(words))];
    }
    if (rng.next_below(8) == 0) out += " \"quoted\\path\"";  // exercise JSON escaping
    if (rng.next_below(8) == 0) out += "\nsecond line";
    return out;
}

inline datasets::QAPair random_qa(SplitMix64& rng) {
    datasets::QAPair qa;
    qa.instruction = random_text(rng);
    qa.input = random_text(rng, true);
    qa.output = random_text(rng);
    qa.category = datasets::kQACategories[rng.next_below(6)];
    return qa;
}

inline datasets::SkillCodeEntry random_skill_entry(SplitMix64& rng) {
    datasets::SkillCodeEntry e;
    e.id = "skill_" + std::to_string(rng.next_below(1000000));
    e.description = random_text(rng);
    e.category = std::vector<std::string>{"collect", "craft",  "smelt", "place",
                                          "explore", "locate", "equip", "combat"}[rng.next_below(8)];
    e.script_text = "repeat_until loop.count>=" + std::to_string(rng.next_range(1, 9)) +
                    " { explore_step }";
    return e;
}

inline world::PrimitiveAction random_action(SplitMix64& rng) {
    switch (rng.next_below(7)) {
        case 0: {
            const char* dirs[] = {"east", "west", "north", "south", "up", "down"};
            return world::PrimitiveAction::move(dirs[rng.next_below(6)]);
        }
        case 1:
            return world::PrimitiveAction::turn(rng.next_range(-180, 180),
                                                rng.next_range(-45, 45));
        case 2:
            return world::PrimitiveAction::mine(
                {rng.next_range(0, 15), rng.next_range(0, 7), rng.next_range(0, 15)});
        case 3: return world::PrimitiveAction::craft("plank");
        case 4: return world::PrimitiveAction::place(
                "crafting_table", {rng.next_range(0, 15), rng.next_range(0, 7),
                                   rng.next_range(0, 15)});
        case 5: return world::PrimitiveAction::equip("wooden_pickaxe");
        default: return world::PrimitiveAction::explore_step();
    }
}

inline datasets::EpisodeRecord random_episode(SplitMix64& rng) {
    datasets::EpisodeRecord rec;
    rec.header.seed = rng.next();
    rec.header.scenario = std::vector<std::string>{
        world::kScenarioFlatSearch, world::kScenarioTechTree, world::kScenarioEmpty}[rng.next_below(3)];
    rec.header.dims = {rng.next_range(16, 64), 8, rng.next_range(16, 64)};
    rec.header.task = {"task_" + std::to_string(rng.next_below(100)), random_text(rng, true),
                       {rng.next_below(2) ? world::GoalKind::Possess : world::GoalKind::Locate,
                        "diamond_ore", rng.next_range(1, 10)}};
    rec.header.config_hash = std::to_string(rng.next());
    rec.header.mode = rng.next_below(2) ? "vision" : "proximity";
    rec.header.start_tick = 0;

    std::int64_t tick = 0;
    const int frames = rng.next_range(0, 5);
    for (int f = 0; f < frames; ++f) {
        datasets::Frame frame;
        frame.tick = tick;
        const int seen = rng.next_range(0, 4);
        for (int s = 0; s < seen; ++s) {
            frame.visible.push_back({{rng.next_range(0, 15), rng.next_range(0, 7),
                                      rng.next_range(0, 15)},
                                     rng.next_below(2) ? "log" : "diamond_ore"});
        }
        frame.bundle.mode = rec.header.mode == "vision" ? perception::Mode::Vision
                                                        : perception::Mode::Proximity;
        frame.bundle.visual = {"logx1@0"};
        frame.bundle.state = {"health=20", "hunger=20", "equipped=none"};
        frame.bundle.task = {"task=" + rec.header.task.id};
        frame.chat.push_back({"planner", random_text(rng), random_text(rng)});
        const int actions = rng.next_range(0, 6);
        for (int a = 0; a < actions; ++a) {
            frame.actions.push_back(random_action(rng));
            frame.results.push_back(
                rng.next_below(2)
                    ? world::ActionResult::success(random_text(rng))
                    : world::ActionResult::failure(world::FailureCode::Blocked, random_text(rng)));
            ++tick;
        }
        if (rng.next_below(2)) frame.found["diamond_ore"] = rng.next_range(0, 16);
        rec.frames.push_back(std::move(frame));
        ++tick;  // keep frame ticks strictly increasing even with no actions
    }
    rec.header.end_tick = tick;
    rec.outcome.success = rng.next_below(2) == 0;
    rec.outcome.iterations = rng.next_range(0, 100);
    if (rng.next_below(2)) rec.outcome.items["log"] = rng.next_range(1, 64);
    return rec;
}

}  // namespace voxagent::testing
