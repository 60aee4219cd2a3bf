#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "support.hpp"

using namespace voxagent;
using namespace voxagent::testing;

namespace {

instruction::ActionStep step_of(const std::string& text) {
    instruction::ActionStep s;
    s.raw_text = text;
    return s;
}

}  // namespace

TEST_SUITE("skills") {

TEST_CASE("script grammar") {
    SUBCASE("a loop with one statement") {
        const auto script =
            skills::parse_script("repeat_until inventory.log>=3 { mine nearest log }");
        REQUIRE(script.body.size() == 1);
        const auto& loop = script.body[0];
        CHECK(loop.kind == skills::StatementKind::RepeatUntil);
        CHECK(loop.predicate.scope == "inventory");
        CHECK(loop.predicate.key.text == "log");
        CHECK(loop.predicate.rhs.literal == 3);
        REQUIRE(loop.body.size() == 1);
        CHECK(loop.body[0].kind == skills::StatementKind::MineNearest);
        CHECK(loop.body[0].object.text == "log");
    }
    SUBCASE("empty script is a syntax error") {
        CHECK_THROWS_AS(skills::parse_script(""), Error);
    }
    SUBCASE("errors carry line and column") {
        try {
            skills::parse_script("craft plank\nmine log");  // missing 'nearest'
            FAIL("expected a syntax error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SyntaxError);
            CHECK(std::string(e.what()).find("2:") != std::string::npos);
        }
    }
    SUBCASE("nesting is capped at depth 2") {
        CHECK_NOTHROW(skills::parse_script(
            "repeat_until loop.count>=2 { repeat_until loop.count>=2 { explore_step } }"));
        try {
            skills::parse_script(
                "repeat_until loop.count>=2 { repeat_until loop.count>=2 { "
                "repeat_until loop.count>=2 { explore_step } } }");
            FAIL("expected DepthExceeded");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DepthExceeded);
        }
    }
    SUBCASE("loop bodies must be nonempty") {
        CHECK_THROWS_AS(skills::parse_script("repeat_until loop.count>=1 { }"), Error);
    }
    SUBCASE("referenced parameters must be declared") {
        CHECK_THROWS_AS(skills::parse_script("repeat_until inventory.log>={count} { explore_step }"),
                        Error);
        CHECK_NOTHROW(skills::parse_script(
            "params(count) repeat_until inventory.log>={count} { explore_step }"));
    }
    SUBCASE("comments and negative turn angles parse") {
        CHECK_NOTHROW(skills::parse_script("# look down\nturn -90 -10"));
    }
    SUBCASE("random garbage never crashes the parser") {
        SplitMix64 rng(123);
        const std::string alphabet = "abc {}()<>=.0123_ \n#repeat_until inventory";
        for (int i = 0; i < 500; ++i) {
            std::string text;
            const int len = rng.next_range(0, 60);
            for (int c = 0; c < len; ++c) {
                text.push_back(alphabet[rng.next_below(alphabet.size())]);
            }
            try {
                skills::parse_script(text);
            } catch (const Error& e) {
                CHECK((e.code() == ErrorCode::SyntaxError ||
                       e.code() == ErrorCode::DepthExceeded));
            }
        }
    }
}

TEST_CASE("cosine numerics") {
    SUBCASE("identity, orthogonality, and the 45-degree case") {
        CHECK(skills::cosine({1, 0}, {1, 0}) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(skills::cosine({1, 0}, {0, 1}) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(std::abs(skills::cosine({1, 0}, {1, 1}) - 0.70710678) < 1e-8);
        CHECK(std::abs(skills::cosine({1, 0}, {1, 1}) - 1.0 / std::sqrt(2.0)) < 1e-9);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(skills::cosine({1, 0}, {1, 0, 0}), Error);
        CHECK_THROWS_AS(skills::cosine({0, 0}, {1, 0}), Error);
    }
    SUBCASE("matches the long-double oracle on random vectors") {
        SplitMix64 rng(7);
        for (int i = 0; i < 1000; ++i) {
            std::vector<double> a(16);
            std::vector<double> b(16);
            for (auto& v : a) v = rng.next_unit() * 2.0 - 1.0;
            for (auto& v : b) v = rng.next_unit() * 2.0 - 1.0;
            CHECK(std::abs(skills::cosine(a, b) - oracle_cosine(a, b)) < 1e-9);
        }
    }
    SUBCASE("scale invariance: cosine(aq, v) == cosine(q, v) for a > 0") {
        SplitMix64 rng(8);
        for (int i = 0; i < 200; ++i) {
            std::vector<double> q(8);
            std::vector<double> v(8);
            for (auto& x : q) x = rng.next_unit() * 2.0 - 1.0;
            for (auto& x : v) x = rng.next_unit() * 2.0 - 1.0;
            const double a = rng.next_unit() * 9.0 + 0.5;
            auto scaled = q;
            for (auto& x : scaled) x *= a;
            CHECK(std::abs(skills::cosine(scaled, v) - skills::cosine(q, v)) < 1e-9);
        }
    }
}

TEST_CASE("retrieval") {
    TestRig rig;

    SUBCASE("the shipped pack is large and covers all categories") {
        CHECK(rig.db.size() >= 30);
        std::set<std::string> categories;
        for (const auto& s : rig.db.skills()) categories.insert(s.category);
        CHECK(categories.size() == 8);
    }
    SUBCASE("self-retrieval returns each skill top-1 at score 1") {
        for (const auto& skill : rig.db.skills()) {
            const auto query = skills::encode_query(step_of(skill.description), rig.embedder);
            const auto result = skills::retrieve(rig.db, query, 1, 0.3);
            REQUIRE(result.ranked.size() == 1);
            CHECK(result.ranked[0].skill->id == skill.id);
            CHECK(std::abs(result.ranked[0].score - 1.0) < 1e-9);
            CHECK_FALSE(result.low_confidence);
        }
    }
    SUBCASE("ranking is invariant to insertion order") {
        std::vector<skills::SkillPackEntry> entries;
        for (const auto& s : rig.db.skills()) {
            entries.push_back({s.id, s.description, s.category, s.script_text});
        }
        auto reversed = entries;
        std::reverse(reversed.begin(), reversed.end());
        const auto db_a = skills::build_database(entries, rig.embedder);
        const auto db_b = skills::build_database(reversed, rig.embedder);
        const auto query = skills::encode_query(step_of("collect 3 log"), rig.embedder);
        const auto ra = skills::retrieve(db_a, query, 5, 0.3);
        const auto rb = skills::retrieve(db_b, query, 5, 0.3);
        REQUIRE(ra.ranked.size() == rb.ranked.size());
        for (std::size_t i = 0; i < ra.ranked.size(); ++i) {
            CHECK(ra.ranked[i].skill->id == rb.ranked[i].skill->id);
            CHECK(ra.ranked[i].score == rb.ranked[i].score);
        }
    }
    SUBCASE("identical embeddings tie-break on the smaller id") {
        backends::HashedBowEmbedder embedder(64);
        std::vector<skills::SkillPackEntry> entries = {
            {"zeta", "identical words here", "explore", "explore_step"},
            {"alpha", "words identical here", "explore", "explore_step"},  // same bag of words
        };
        const auto db = skills::build_database(entries, embedder);
        const auto query = skills::encode_query(step_of("identical words here"), embedder);
        const auto result = skills::retrieve(db, query, 2, 0.0);
        CHECK(result.ranked[0].skill->id == "alpha");
        CHECK(result.ranked[1].skill->id == "zeta");
        CHECK(result.ranked[0].score == result.ranked[1].score);
    }
    SUBCASE("k beyond the database size returns everything, no padding") {
        const auto query = skills::encode_query(step_of("collect 3 log"), rig.embedder);
        const auto result = skills::retrieve(rig.db, query, 10000, 0.3);
        CHECK(result.ranked.size() == rig.db.size());
    }
    SUBCASE("low-confidence flag fires below the threshold") {
        const auto query = skills::encode_query(step_of("zzz qqq xyzzy"), rig.embedder);
        const auto result = skills::retrieve(rig.db, query, 1, 0.3);
        CHECK(result.low_confidence);
    }
    SUBCASE("empty database and bad k are errors") {
        skills::SkillDatabase empty;
        const auto query = skills::encode_query(step_of("collect log"), rig.embedder);
        CHECK_THROWS_AS(skills::retrieve(empty, query, 1, 0.3), Error);
        CHECK_THROWS_AS(skills::retrieve(rig.db, query, 0, 0.3), Error);
    }
    SUBCASE("encode_query rejects empty text") {
        CHECK_THROWS_AS(skills::encode_query(step_of(""), rig.embedder), Error);
    }
}

TEST_CASE("embedding cache sidecar") {
    TestRig rig;
    const std::string cache = (std::filesystem::temp_directory_path() / "vox_embcache.json")
                                  .string();
    std::remove(cache.c_str());
    const auto db_fresh = skills::load_skill_pack(config_path("skills.jsonl"), rig.embedder, cache);
    CHECK(std::filesystem::exists(cache));
    const auto db_cached =
        skills::load_skill_pack(config_path("skills.jsonl"), rig.embedder, cache);
    REQUIRE(db_fresh.size() == db_cached.size());
    for (std::size_t i = 0; i < db_fresh.size(); ++i) {
        CHECK(db_fresh.skills()[i].embedding == db_cached.skills()[i].embedding);
    }
    std::remove(cache.c_str());
}

TEST_CASE("skill execution") {
    TestRig rig;
    const auto& cfg = rig.cfg;

    SUBCASE("collect_log walks to trees and mines the requested count") {
        auto w = world::generate_world(cfg, 3, world::kScenarioTechTree, {48, 8, 48});
        auto agent = world::spawn_agent(cfg, w);
        const auto outcome = skills::execute_skill(cfg, *rig.db.find("collect_log"),
                                                   {{"count", "3"}}, w, agent);
        CHECK(outcome.status.ok);
        CHECK(agent.inventory["log"] == 3);
        int mines = 0;
        for (const auto& t : outcome.traces) {
            if (t.action.kind == world::ActionKind::Mine) {
                CHECK(t.result.ok);
                ++mines;
            }
        }
        CHECK(mines == 3);
    }
    SUBCASE("crafting with an empty inventory stops at MissingInputs") {
        auto w = fixture_world(cfg);
        auto agent = fixture_agent();
        const auto outcome = skills::execute_skill(cfg, *rig.db.find("craft_wooden_pickaxe"),
                                                   {{"count", "1"}}, w, agent);
        CHECK_FALSE(outcome.status.ok);
        CHECK(outcome.status.code == world::FailureCode::MissingInputs);
        REQUIRE(outcome.traces.size() == 1);  // the failed craft, nothing else
        CHECK_FALSE(outcome.traces[0].result.ok);
    }
    SUBCASE("craft auto-places its station from the inventory") {
        auto w = fixture_world(cfg);
        auto agent = fixture_agent();
        agent.inventory = {{"plank", 3}, {"stick", 2}, {"crafting_table", 1}};
        const auto outcome = skills::execute_skill(cfg, *rig.db.find("craft_wooden_pickaxe"),
                                                   {{"count", "1"}}, w, agent);
        CHECK(outcome.status.ok);
        CHECK(agent.inventory["wooden_pickaxe"] == 1);
        bool placed = false;
        for (const auto& t : outcome.traces) {
            placed |= t.action.kind == world::ActionKind::Place && t.result.ok;
        }
        CHECK(placed);
    }
    SUBCASE("craft walks back to a previously placed station") {
        auto w = fixture_world(cfg, {32, 8, 32});
        auto agent = fixture_agent({4, 2, 4});
        w.set_block({5, 2, 4}, static_cast<std::uint16_t>(cfg.block_index("crafting_table")));
        agent.position = {28, 2, 28};  // far from the table
        agent.inventory = {{"plank", 3}, {"stick", 2}};
        const auto outcome = skills::execute_skill(cfg, *rig.db.find("craft_wooden_pickaxe"),
                                                   {{"count", "1"}}, w, agent);
        CHECK(outcome.status.ok);
        CHECK(distance(agent.position, {5, 2, 4}) <= cfg.rules.interaction_range);
    }
    SUBCASE("unbound parameters fail before any world mutation") {
        auto w = fixture_world(cfg);
        auto agent = fixture_agent();
        const auto before_tick = w.tick();
        CHECK_THROWS_AS(
            skills::execute_skill(cfg, *rig.db.find("collect_log"), {}, w, agent), Error);
        CHECK(w.tick() == before_tick);
    }
    SUBCASE("mine nearest with no such block is a typed failure") {
        auto w = fixture_world(cfg);
        auto agent = fixture_agent();
        const auto outcome = skills::execute_skill(cfg, *rig.db.find("mine_diamond_ore"),
                                                   {{"count", "1"}}, w, agent);
        CHECK_FALSE(outcome.status.ok);
        CHECK(outcome.status.code == world::FailureCode::NoSuchBlock);
    }
    SUBCASE("an unsatisfiable loop hits the step cap, not an infinite spin") {
        auto limited = cfg;
        limited.rules.skill_step_cap = 50;
        skills::Skill spinner;
        spinner.id = "spinner";
        spinner.description = "spin forever";
        spinner.script = skills::parse_script("repeat_until inventory.log>=1 { turn 1 0 }");
        auto w = fixture_world(limited);
        auto agent = fixture_agent();
        const auto outcome = skills::execute_skill(limited, spinner, {}, w, agent);
        CHECK_FALSE(outcome.status.ok);
        CHECK(outcome.status.code == world::FailureCode::StepCapExceeded);
        CHECK(outcome.traces.size() <= 50);
    }
    SUBCASE("every shipped skill returns success or a typed failure on fixtures") {
        for (const auto* scenario : {world::kScenarioTechTree, world::kScenarioEmpty}) {
            for (const auto& skill : rig.db.skills()) {
                auto w = world::generate_world(cfg, 5, scenario, {48, 8, 48});
                auto agent = world::spawn_agent(cfg, w);
                const auto outcome =
                    skills::execute_skill(cfg, skill, {{"count", "2"}}, w, agent);
                if (!outcome.status.ok) {
                    CHECK(outcome.status.code != world::FailureCode::None);
                }
            }
        }
    }
}

}  // TEST_SUITE
