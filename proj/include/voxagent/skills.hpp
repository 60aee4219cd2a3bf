#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "voxagent/action_step.hpp"
#include "voxagent/backends.hpp"
#include "voxagent/world.hpp"

namespace voxagent::skills {

// ---------------------------------------------------------------------------
// Action DSL
// ---------------------------------------------------------------------------

/// An integer literal or a {parameter} reference.
struct IntValue {
    bool is_param = false;
    int literal = 0;
    std::string param;
};

/// A word literal or a {parameter} reference.
struct WordValue {
    bool is_param = false;
    std::string text;
};

enum class Comparison { Ge, Le, Gt, Lt, Eq };

struct Predicate {
    std::string scope;  // "inventory" | "loop"
    WordValue key;      // item id, or "count" for loop
    Comparison cmp = Comparison::Ge;
    IntValue rhs;
};

enum class StatementKind {
    MineNearest,  // mine nearest <block>
    Craft,        // craft <item>
    Smelt,        // smelt <item>
    Place,        // place <item>
    Equip,        // equip <item>
    Move,         // move <direction>   (absolute or forward/back/left/right)
    Turn,         // turn <dyaw> <dpitch>
    ExploreStep,  // explore_step
    RepeatUntil,  // repeat_until <predicate> { ... }
};

struct Statement {
    StatementKind kind = StatementKind::ExploreStep;
    WordValue object;
    IntValue turn_yaw;
    IntValue turn_pitch;
    Predicate predicate;
    std::vector<Statement> body;
};

struct SkillScript {
    std::vector<std::string> parameters;
    std::vector<Statement> body;
};

// Grammar-validated AST, or Error(SyntaxError) carrying line:column. Nested
// repeat depth above 2 is rejected as DepthExceeded.
SkillScript parse_script(const std::string& text);

// ---------------------------------------------------------------------------
// Skills and retrieval
// ---------------------------------------------------------------------------

inline const char* const kSkillCategories[] = {"collect", "craft",  "smelt", "place",
                                               "explore", "locate", "equip", "combat"};

struct Skill {
    std::string id;
    std::string description;
    std::string category;
    std::string script_text;
    SkillScript script;
    std::vector<double> embedding;  // L2-normalized
};

struct Query {
    std::vector<double> vector;
    instruction::ActionStep source_step;
};

/// Immutable after build; concurrent retrieval is safe. Skills are held
/// sorted by id, so ranking never depends on insertion order.
class SkillDatabase {
public:
    void add(Skill skill);
    std::size_t size() const { return skills_.size(); }
    bool empty() const { return skills_.empty(); }
    const std::vector<Skill>& skills() const { return skills_; }
    const Skill* find(const std::string& id) const;
    int dimension() const { return dimension_; }

private:
    std::vector<Skill> skills_;
    int dimension_ = 0;
};

struct SkillPackEntry {
    std::string id;
    std::string description;
    std::string category;
    std::string script_text;
};

// Builds the database from pack entries, embedding each description. An
// optional sidecar cache keyed by (embedder id, pack content hash) skips
// re-embedding; it is refreshed best-effort when stale.
SkillDatabase build_database(const std::vector<SkillPackEntry>& entries,
                             backends::Embedder& embedder);
SkillDatabase load_skill_pack(const std::string& path, backends::Embedder& embedder,
                              const std::string& cache_path = "");

Query encode_query(const instruction::ActionStep& step, backends::Embedder& embedder);

// dot(q,v) / (|q| |v|). Throws DimensionMismatch / ZeroVector.
double cosine(const std::vector<double>& q, const std::vector<double>& v);

struct RankedSkill {
    const Skill* skill = nullptr;
    double score = 0.0;
};

struct RetrievalResult {
    std::vector<RankedSkill> ranked;  // top-k by score desc, ties by id
    bool low_confidence = false;      // top score below threshold
};

RetrievalResult retrieve(const SkillDatabase& db, const Query& query, int k, double threshold);

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct ActionTrace {
    world::PrimitiveAction action;
    world::ActionResult result;
};

struct SkillOutcome {
    std::vector<ActionTrace> traces;  // every primitive actually applied
    world::ActionResult status;      // overall: success, or the failure that stopped execution
};

using Bindings = std::map<std::string, std::string>;

// Interprets the script against the simulator. Stops at the first hard
// failure; a per-skill cap on applied actions and interpreter ops bounds
// non-termination. Unbound parameters are rejected before any world mutation.
SkillOutcome execute_skill(const world::WorldConfig& cfg, const Skill& skill,
                           const Bindings& bindings, world::WorldState& world,
                           world::AgentState& agent);

}  // namespace voxagent::skills
