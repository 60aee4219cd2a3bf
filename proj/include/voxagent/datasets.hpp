#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "voxagent/perception.hpp"
#include "voxagent/world.hpp"

namespace voxagent::datasets {

inline constexpr int kSchemaVersion = 1;

inline const char* const kQACategories[] = {"World&Entities",    "Mechanics&Survival",
                                            "Knowledge&Discovery", "Resources&Crafting",
                                            "Tools&Utilities",   "Miscellaneous"};

struct QAPair {
    std::string instruction;
    std::string input;  // may be empty
    std::string output;
    std::string category;

    bool operator==(const QAPair&) const = default;
};

struct ChatTurn {
    std::string role;
    std::string prompt;
    std::string response;

    bool operator==(const ChatTurn&) const = default;
};

struct Frame {
    std::int64_t tick = 0;
    std::vector<world::SeenBlock> visible;
    perception::TokenBundle bundle;
    std::vector<ChatTurn> chat;
    std::vector<world::PrimitiveAction> actions;
    std::vector<world::ActionResult> results;  // aligned with actions
    std::map<std::string, int> found;          // cumulative locate counts
};

struct EpisodeHeader {
    std::uint64_t seed = 0;
    std::string scenario;
    Vec3i dims{};
    world::Task task;
    std::string config_hash;
    std::string mode;
    std::int64_t start_tick = 0;  // virtual time, so records are reproducible
    std::int64_t end_tick = 0;
};

struct EpisodeOutcome {
    bool success = false;
    int iterations = 0;
    std::map<std::string, int> items;
};

struct EpisodeRecord {
    EpisodeHeader header;
    std::vector<Frame> frames;
    EpisodeOutcome outcome;
};

struct SkillCodeEntry {
    std::string id;
    std::string description;
    std::string category;
    std::string script_text;

    bool operator==(const SkillCodeEntry&) const = default;
};

// ---------------------------------------------------------------------------
// Line-delimited IO. First line is a schema header {"kind":...,"version":...};
// each following line holds one record in canonical (key-sorted) JSON, so
// read-then-write reproduces a file byte for byte.
// ---------------------------------------------------------------------------

void write_qa_pairs(const std::vector<QAPair>& records, const std::string& path);
std::vector<QAPair> read_qa_pairs(const std::string& path);

void write_episodes(const std::vector<EpisodeRecord>& records, const std::string& path);
std::vector<EpisodeRecord> read_episodes(const std::string& path);

void write_skill_entries(const std::vector<SkillCodeEntry>& records, const std::string& path);
std::vector<SkillCodeEntry> read_skill_entries(const std::string& path);

// Single-record string forms (used for byte-identity checks and tooling).
std::string dump_qa(const QAPair& record);
std::string dump_episode(const EpisodeRecord& record);
std::string dump_skill(const SkillCodeEntry& record);

struct ValidationError {
    int line = 0;  // 1-based file line
    std::string field;
    std::string message;
};

struct ValidationReport {
    int valid_count = 0;
    std::vector<ValidationError> errors;

    bool clean() const { return errors.empty(); }
};

// Validates a whole pack, aggregating every violation instead of stopping at
// the first. kind is one of qa|episode|skill.
ValidationReport validate_pack(const std::string& path, const std::string& kind);

struct ReplayVerdict {
    bool consistent = false;
    std::int64_t divergent_tick = -1;
    std::string detail;
};

// Regenerates the world from the header, re-applies every recorded action and
// compares outcomes; any mismatch reports the first divergent tick.
ReplayVerdict replay(const world::WorldConfig& cfg, const EpisodeRecord& record);

}  // namespace voxagent::datasets
