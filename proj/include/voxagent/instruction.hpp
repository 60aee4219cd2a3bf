#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "voxagent/action_step.hpp"
#include "voxagent/backends.hpp"
#include "voxagent/datasets.hpp"
#include "voxagent/perception.hpp"
#include "voxagent/skills.hpp"
#include "voxagent/world.hpp"

namespace voxagent::instruction {

// ---------------------------------------------------------------------------
// Roles
// ---------------------------------------------------------------------------

struct RoleConfig {
    std::string role;
    double temperature = 0.0;
    std::string prompt_template;
    std::string backend_id = "scripted";
};

struct Roles {
    RoleConfig planner;
    RoleConfig critic;
    RoleConfig curriculum;
    RoleConfig describer;
    RoleConfig judge;
};

// Built-in templates; planner/critic/describer/judge run at temperature 0,
// curriculum at 0.9 for proposal diversity.
Roles default_roles();

// Overrides the built-in template for a role when configs/prompts/<role>.txt
// exists under the given directory.
void load_prompt_overrides(Roles& roles, const std::string& prompt_dir);

// ---------------------------------------------------------------------------
// Plans, critiques, memory
// ---------------------------------------------------------------------------

struct Plan {
    std::string strategy;
    std::vector<std::string> step_texts;
    std::string rationale;
    bool complete = false;
};

struct ParseFailureInfo {
    std::string reason;
    std::string raw_text;
};

struct ChatExchange {
    std::string role;
    std::string prompt;
    std::string response;
};

struct PlanResult {
    std::optional<Plan> plan;
    std::vector<ActionStep> steps;  // parsed from the plan when present
    std::optional<ParseFailureInfo> failure;
    std::vector<ChatExchange> turns;
    int planner_invocations = 0;
};

struct Critique {
    enum class Verdict { Accept, Revise };
    Verdict verdict = Verdict::Accept;
    std::string feedback;
};

/// One executed plan step as the critic sees it.
struct StepReport {
    std::string step_text;
    bool ok = false;
    world::FailureCode code = world::FailureCode::None;
    std::string message;
};

struct MemoryEntry {
    enum class Kind { Success, Failure, Fact };
    Kind kind = Kind::Fact;
    std::string task_id;
    std::string plan_summary;
    std::string outcome_summary;
    std::int64_t tick_begin = 0;
    std::int64_t tick_end = 0;
};

std::string render_entry(const MemoryEntry& entry);
int token_estimate(const std::string& text);  // whitespace-delimited count

struct Summary {
    std::string text;
    std::vector<int> source_entry_ids;
    int token_estimate = 0;
};

/// Append-only episode memory. Summaries are views: raw entries are never
/// deleted.
class MemoryStore {
public:
    void append(MemoryEntry entry) { entries_.push_back(std::move(entry)); }
    const std::vector<MemoryEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    int raw_token_estimate() const;
    int unsummarized_token_estimate() const;

    // Active summary plus the most recent entries, rendered for prompts.
    std::string view_text(int recent_n) const;

    const std::optional<Summary>& active_summary() const { return summary_; }
    void set_summary(Summary summary);
    std::size_t summarized_upto() const { return summarized_upto_; }

private:
    std::vector<MemoryEntry> entries_;
    std::optional<Summary> summary_;
    std::size_t summarized_upto_ = 0;
};

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

// Parses backend plan text: a structured strategy/steps form, with a tolerant
// prose fallback that extracts verb-bearing clauses. Throws Error(ParseFailure)
// when nothing can be extracted.
Plan parse_plan_text(const std::string& text);

// Maps plan step texts onto ActionSteps; order preserved, one retrieval query
// per step downstream.
std::vector<ActionStep> decompose(const world::WorldConfig& cfg, const Plan& plan);

class Engine {
public:
    Engine(const world::WorldConfig* cfg, Roles roles,
           std::map<std::string, std::shared_ptr<backends::ChatBackend>> chat_backends,
           std::vector<world::Task> curriculum);

    // One planner round. On unparseable output the planner is re-prompted once
    // with the step grammar restated; a second failure is returned as a
    // ParseFailure carrying the raw text. Transport problems surface as
    // Error(BackendError).
    PlanResult plan(const perception::TokenBundle& bundle, const std::string& memory_view,
                    const std::string& feedback, std::optional<std::uint64_t> seed);

    // Verdict is revise iff any step failed; enforced even for freeform
    // backends. outcome must be nonempty.
    Critique critique(const Plan& plan, const std::vector<StepReport>& outcome,
                      std::vector<ChatExchange>* turns = nullptr);

    // Next curriculum task not yet in progress. Throws CurriculumExhausted.
    world::Task propose_task(const std::string& memory_view,
                             const std::vector<std::string>& progress,
                             std::optional<std::uint64_t> seed);

    // Compacts memory entries to within the token budget; every success
    // entry's task id and key items survive. Throws BudgetInfeasible when even
    // the minimal form does not fit.
    Summary summarize(const std::vector<MemoryEntry>& memory, int budget,
                      std::vector<ChatExchange>* turns = nullptr);

    const std::vector<world::Task>& curriculum() const { return curriculum_; }
    world::Task find_task(const std::string& id) const;  // throws UnknownTask

    const Roles& roles() const { return roles_; }
    backends::ChatBackend& backend_for(const RoleConfig& role) const;
    std::string backend_ids_fingerprint() const;

private:
    std::string run_role(const RoleConfig& role, const std::string& user_text,
                         std::optional<std::uint64_t> seed, std::vector<ChatExchange>* turns);

    const world::WorldConfig* cfg_;
    Roles roles_;
    std::map<std::string, std::shared_ptr<backends::ChatBackend>> chat_backends_;
    std::vector<world::Task> curriculum_;
};

std::vector<world::Task> load_curriculum(const std::string& path);

// ---------------------------------------------------------------------------
// Episode runner
// ---------------------------------------------------------------------------

struct EpisodeSpec {
    std::string scenario = world::kScenarioTechTree;
    Vec3i dims{48, 8, 48};
    world::Task task;
    std::uint64_t seed = 0;
    int iteration_cap = 160;
    perception::Mode mode = perception::Mode::Vision;
};

/// Wiring shared by episodes; safe to reuse across concurrently running
/// episodes (all parts are immutable or internally synchronized).
struct Pipeline {
    const world::WorldConfig* cfg = nullptr;
    Engine* engine = nullptr;
    const skills::SkillDatabase* db = nullptr;
    backends::Embedder* embedder = nullptr;
};

// Runs perceive -> plan -> decompose -> retrieve -> execute -> critique ->
// memory-append until the task completes or the planner-invocation cap is
// reached. The returned record replays consistently by construction.
datasets::EpisodeRecord run_episode(const Pipeline& pipeline, const EpisodeSpec& spec);

}  // namespace voxagent::instruction
