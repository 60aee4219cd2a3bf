#include "voxagent/instruction.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace voxagent::instruction {

// ---------------------------------------------------------------------------
// Step grammar
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> grammar_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

bool is_number(const std::string& tok) {
    return !tok.empty() &&
           std::all_of(tok.begin(), tok.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_stopword(const std::string& tok) {
    static const char* words[] = {"a",   "an",   "the", "some", "of",   "nearest", "for",
                                  "to",  "and",  "then", "more", "go",   "should",  "you",
                                  "we",  "need", "x",    "it",   "from", "with",    "up"};
    return std::find_if(std::begin(words), std::end(words),
                        [&](const char* w) { return tok == w; }) != std::end(words);
}

bool is_verb(const std::string& tok) {
    return std::find_if(std::begin(kStepVerbs), std::end(kStepVerbs),
                        [&](const char* v) { return tok == v; }) != std::end(kStepVerbs);
}

bool known_object(const world::WorldConfig& cfg, const std::string& word) {
    return cfg.find_block(word) || cfg.recipe_for(word) || cfg.block_dropping(word) ||
           cfg.tool_tier(word) > 0 || cfg.find_food(word);
}

}  // namespace

ActionStep parse_action_step(const world::WorldConfig& cfg, const std::string& text) {
    const auto tokens = grammar_tokens(text);
    std::size_t verb_at = tokens.size();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (is_verb(tokens[i])) {
            verb_at = i;
            break;
        }
    }
    if (verb_at == tokens.size()) {
        throw Error(ErrorCode::ParseFailure, "no step verb in '" + text + "'");
    }

    ActionStep step;
    step.verb = tokens[verb_at];
    step.raw_text = text;
    for (std::size_t i = verb_at + 1; i < tokens.size(); ++i) {
        if (is_number(tokens[i])) {
            if (!step.quantity) step.quantity = std::stoi(tokens[i]);
            continue;
        }
        if (is_stopword(tokens[i])) continue;
        step.object = tokens[i];
        break;
    }
    if (step.object.empty()) {
        throw Error(ErrorCode::ParseFailure, "no object in step '" + text + "'");
    }

    step.object = cfg.resolve_alias(step.object);
    if (!known_object(cfg, step.object) && step.object.size() > 1 && step.object.back() == 's') {
        const std::string stem = cfg.resolve_alias(step.object.substr(0, step.object.size() - 1));
        if (known_object(cfg, stem)) step.object = stem;
    }
    const bool item_verb = step.verb != "explore" && step.verb != "locate";
    if (item_verb && !known_object(cfg, step.object)) {
        throw Error(ErrorCode::ParseFailure,
                    "unknown object '" + step.object + "' in step '" + text + "'");
    }
    return step;
}

// ---------------------------------------------------------------------------
// Roles and templates
// ---------------------------------------------------------------------------

namespace {

const char* kPlannerTemplate =
    "You control an agent in a voxel world. Produce a plan for the task below.\n"
    "task: {task}\n"
    "observation: {bundle}\n"
    "memory: {memory}\n"
    "feedback: {feedback}\n"
    "Respond with a \"strategy:\" line and a \"steps:\" list. Each step is one line\n"
    "\"- <verb> [<count>] <object>\" with verbs collect, mine, craft, smelt, place,\n"
    "equip, explore, locate. If the goal is already met, reply \"complete: true\".";

const char* kCriticTemplate =
    "You review the last plan execution of a voxel-world agent.\n"
    "strategy: {strategy}\n"
    "{outcome}\n"
    "Reply \"accept\" if every step succeeded, otherwise \"revise: <what failed>\".";

const char* kCurriculumTemplate =
    "Propose the next task for a voxel-world agent.\n"
    "memory: {memory}\n"
    "progress: {progress}\n"
    "Reply \"task: <task id>\".";

const char* kDescriberTemplate =
    "Condense the episode memory below into a short summary.\n"
    "budget: {budget}\n"
    "entries:\n"
    "{memory}\n"
    "Keep every completed task id together with its key items.";

const char* kJudgeTemplate =
    "Rate the answer against the ground truth on a 0-10 scale. Reply with the\n"
    "number only.\n"
    "question: {question}\n"
    "truth: {truth}\n"
    "answer: {answer}";

std::string fill_template(std::string text,
                          const std::vector<std::pair<std::string, std::string>>& values) {
    for (const auto& [key, value] : values) {
        const std::string needle = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = text.find(needle, pos)) != std::string::npos) {
            text.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return text;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string render_bundle(const perception::TokenBundle& bundle) {
    return join(bundle.visual, " ") + " | " + join(bundle.state, " ") + " | " +
           join(bundle.task, " ");
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

Roles default_roles() {
    Roles r;
    r.planner = {"planner", 0.0, kPlannerTemplate, "scripted"};
    r.critic = {"critic", 0.0, kCriticTemplate, "scripted"};
    r.curriculum = {"curriculum", 0.9, kCurriculumTemplate, "scripted"};
    r.describer = {"describer", 0.0, kDescriberTemplate, "scripted"};
    r.judge = {"judge", 0.0, kJudgeTemplate, "scripted"};
    return r;
}

void load_prompt_overrides(Roles& roles, const std::string& prompt_dir) {
    auto load = [&](RoleConfig& role) {
        const std::filesystem::path path = std::filesystem::path(prompt_dir) / (role.role + ".txt");
        std::ifstream in(path);
        if (!in) return;
        std::ostringstream ss;
        ss << in.rdbuf();
        role.prompt_template = ss.str();
    };
    load(roles.planner);
    load(roles.critic);
    load(roles.curriculum);
    load(roles.describer);
    load(roles.judge);
}

// ---------------------------------------------------------------------------
// Memory
// ---------------------------------------------------------------------------

std::string render_entry(const MemoryEntry& entry) {
    switch (entry.kind) {
        case MemoryEntry::Kind::Success:
            return "- [success] task=" + entry.task_id + " items=" + entry.outcome_summary +
                   " ticks=" + std::to_string(entry.tick_begin) + ".." +
                   std::to_string(entry.tick_end);
        case MemoryEntry::Kind::Failure:
            return "- [failure] task=" + entry.task_id + " code=" + entry.outcome_summary +
                   " ticks=" + std::to_string(entry.tick_begin) + ".." +
                   std::to_string(entry.tick_end);
        case MemoryEntry::Kind::Fact:
            return "- [fact] " + entry.outcome_summary;
    }
    return "";
}

int token_estimate(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    int n = 0;
    while (in >> tok) ++n;
    return n;
}

int MemoryStore::raw_token_estimate() const {
    int total = 0;
    for (const auto& e : entries_) total += token_estimate(render_entry(e));
    return total;
}

int MemoryStore::unsummarized_token_estimate() const {
    int total = 0;
    for (std::size_t i = summarized_upto_; i < entries_.size(); ++i) {
        total += token_estimate(render_entry(entries_[i]));
    }
    return total;
}

std::string MemoryStore::view_text(int recent_n) const {
    std::string out;
    if (summary_ && !summary_->text.empty()) {
        out += "summary:\n" + summary_->text + "\n";
    }
    out += "recent:\n";
    const std::size_t n = recent_n < 0 ? 0 : static_cast<std::size_t>(recent_n);
    const std::size_t from = entries_.size() > n ? entries_.size() - n : 0;
    if (from == entries_.size()) {
        out += "(none)";
        return out;
    }
    for (std::size_t i = from; i < entries_.size(); ++i) {
        out += render_entry(entries_[i]);
        if (i + 1 < entries_.size()) out += "\n";
    }
    return out;
}

void MemoryStore::set_summary(Summary summary) {
    summary_ = std::move(summary);
    summarized_upto_ = entries_.size();
}

// ---------------------------------------------------------------------------
// Plan parsing
// ---------------------------------------------------------------------------

Plan parse_plan_text(const std::string& text) {
    Plan plan;
    std::istringstream in(text);
    std::string raw_line;
    while (std::getline(in, raw_line)) {
        const std::string line = trim(raw_line);
        if (line.rfind("strategy:", 0) == 0) {
            plan.strategy = trim(line.substr(9));
        } else if (line.rfind("rationale:", 0) == 0) {
            plan.rationale = trim(line.substr(10));
        } else if (line.rfind("complete:", 0) == 0) {
            plan.complete = line.find("true") != std::string::npos;
        } else if (line.rfind("- ", 0) == 0) {
            const std::string step = trim(line.substr(2));
            if (!step.empty() && step != "(none)") plan.step_texts.push_back(step);
        }
    }

    if (plan.step_texts.empty() && !plan.complete) {
        // Prose fallback: pull verb-bearing clauses out of free text.
        std::string prose = text;
        for (const char* sep : {" and ", " then "}) {
            std::size_t pos = 0;
            const std::string needle(sep);
            while ((pos = prose.find(needle, pos)) != std::string::npos) {
                prose.replace(pos, needle.size(), "\n");
            }
        }
        for (char& c : prose) {
            if (c == '.' || c == ',' || c == ';') c = '\n';
        }
        std::istringstream clauses(prose);
        std::string clause;
        while (std::getline(clauses, clause)) {
            const auto tokens = grammar_tokens(clause);
            const bool has_verb = std::any_of(tokens.begin(), tokens.end(),
                                              [](const std::string& t) { return is_verb(t); });
            if (has_verb) plan.step_texts.push_back(trim(clause));
        }
    }

    if (plan.step_texts.empty() && !plan.complete) {
        throw Error(ErrorCode::ParseFailure, "no steps found in plan text");
    }
    return plan;
}

std::vector<ActionStep> decompose(const world::WorldConfig& cfg, const Plan& plan) {
    std::vector<ActionStep> steps;
    steps.reserve(plan.step_texts.size());
    for (const auto& text : plan.step_texts) {
        steps.push_back(parse_action_step(cfg, text));
    }
    return steps;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

Engine::Engine(const world::WorldConfig* cfg, Roles roles,
               std::map<std::string, std::shared_ptr<backends::ChatBackend>> chat_backends,
               std::vector<world::Task> curriculum)
    : cfg_(cfg),
      roles_(std::move(roles)),
      chat_backends_(std::move(chat_backends)),
      curriculum_(std::move(curriculum)) {}

backends::ChatBackend& Engine::backend_for(const RoleConfig& role) const {
    auto it = chat_backends_.find(role.backend_id);
    if (it == chat_backends_.end()) {
        throw Error(ErrorCode::ConfigError,
                    "no backend '" + role.backend_id + "' for role " + role.role);
    }
    return *it->second;
}

std::string Engine::backend_ids_fingerprint() const {
    return backend_for(roles_.planner).id() + "," + backend_for(roles_.critic).id() + "," +
           backend_for(roles_.curriculum).id() + "," + backend_for(roles_.describer).id();
}

std::string Engine::run_role(const RoleConfig& role, const std::string& user_text,
                             std::optional<std::uint64_t> seed,
                             std::vector<ChatExchange>* turns) {
    backends::ChatRequest request;
    request.role_id = role.role;
    request.temperature = role.temperature;
    request.seed = seed;
    request.messages.push_back(
        {"system", "You are the " + role.role + " of an embodied voxel-world agent."});
    request.messages.push_back({"user", user_text});

    std::string response;
    try {
        response = backend_for(role).complete(request);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Transport || e.code() == ErrorCode::RateLimited ||
            e.code() == ErrorCode::MalformedResponse) {
            throw Error(ErrorCode::BackendError, std::string(e.what()) + " (role " + role.role + ")");
        }
        throw;
    }
    if (turns) turns->push_back({role.role, user_text, response});
    return response;
}

PlanResult Engine::plan(const perception::TokenBundle& bundle, const std::string& memory_view,
                        const std::string& feedback, std::optional<std::uint64_t> seed) {
    PlanResult out;
    const std::string prompt =
        fill_template(roles_.planner.prompt_template, {{"task", join(bundle.task, " ")},
                                                       {"bundle", render_bundle(bundle)},
                                                       {"memory", memory_view},
                                                       {"feedback", feedback}});
    std::string current_prompt = prompt;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string response = run_role(roles_.planner, current_prompt, seed, &out.turns);
        ++out.planner_invocations;
        try {
            Plan plan = parse_plan_text(response);
            out.steps = plan.complete ? std::vector<ActionStep>{} : decompose(*cfg_, plan);
            out.plan = std::move(plan);
            return out;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ParseFailure) throw;
            if (attempt == 0) {
                current_prompt =
                    prompt +
                    "\nYour previous reply could not be parsed. Use exactly a \"steps:\" list "
                    "of lines \"- <verb> [<count>] <object>\" with verbs "
                    "collect|mine|craft|smelt|place|equip|explore|locate.";
                continue;
            }
            out.failure = ParseFailureInfo{e.what(), response};
        }
    }
    return out;
}

Critique Engine::critique(const Plan& plan, const std::vector<StepReport>& outcome,
                          std::vector<ChatExchange>* turns) {
    if (outcome.empty()) {
        throw Error(ErrorCode::EmptyOutcome, "critique needs at least one step outcome");
    }
    std::string lines;
    for (const auto& r : outcome) {
        if (r.ok) {
            lines += "result: OK " + r.message + " (step '" + r.step_text + "')\n";
        } else {
            lines += "result: FAIL " + world::failure_code_name(r.code) + " " + r.message +
                     " (step '" + r.step_text + "')\n";
        }
    }
    const std::string prompt = fill_template(roles_.critic.prompt_template,
                                             {{"strategy", plan.strategy}, {"outcome", lines}});
    const std::string response = run_role(roles_.critic, prompt, std::nullopt, turns);

    Critique crit;
    const std::string lowered = trim(response);
    const bool says_accept = lowered.rfind("accept", 0) == 0;
    const bool any_failure = std::any_of(outcome.begin(), outcome.end(),
                                         [](const StepReport& r) { return !r.ok; });
    if (says_accept && !any_failure) {
        crit.verdict = Critique::Verdict::Accept;
    } else if (says_accept) {
        // Soundness: accept is only valid when no step failed.
        crit.verdict = Critique::Verdict::Revise;
        for (const auto& r : outcome) {
            if (!r.ok) {
                crit.feedback = "step '" + r.step_text + "' failed " +
                                world::failure_code_name(r.code);
                break;
            }
        }
    } else {
        crit.verdict = Critique::Verdict::Revise;
        crit.feedback = response;
    }
    return crit;
}

world::Task Engine::propose_task(const std::string& memory_view,
                                 const std::vector<std::string>& progress,
                                 std::optional<std::uint64_t> seed) {
    if (curriculum_.empty()) {
        throw Error(ErrorCode::ConfigError, "no curriculum tasks loaded");
    }
    const std::string progress_text = progress.empty() ? "(none)" : join(progress, ",");
    const std::string prompt = fill_template(roles_.curriculum.prompt_template,
                                             {{"memory", memory_view}, {"progress", progress_text}});
    const std::string response = run_role(roles_.curriculum, prompt, seed, nullptr);
    if (response.find("exhausted") != std::string::npos) {
        throw Error(ErrorCode::CurriculumExhausted, "all curriculum tasks are complete");
    }
    const auto pos = response.find("task:");
    if (pos == std::string::npos) {
        throw Error(ErrorCode::MalformedResponse, "curriculum reply has no 'task:' line");
    }
    std::string id = trim(response.substr(pos + 5));
    const auto eol = id.find('\n');
    if (eol != std::string::npos) id = trim(id.substr(0, eol));
    return find_task(id);
}

world::Task Engine::find_task(const std::string& id) const {
    for (const auto& t : curriculum_) {
        if (t.id == id) return t;
    }
    throw Error(ErrorCode::UnknownTask, "task '" + id + "' is not registered");
}

Summary Engine::summarize(const std::vector<MemoryEntry>& memory, int budget,
                          std::vector<ChatExchange>* turns) {
    if (budget <= 0) {
        throw Error(ErrorCode::UsageError, "summarization budget must be > 0");
    }
    if (memory.empty()) {
        return Summary{"", {}, 0};
    }
    std::string entries_text;
    for (std::size_t i = 0; i < memory.size(); ++i) {
        entries_text += render_entry(memory[i]);
        if (i + 1 < memory.size()) entries_text += "\n";
    }
    const std::string prompt =
        fill_template(roles_.describer.prompt_template,
                      {{"memory", entries_text}, {"budget", std::to_string(budget)}});
    const std::string response = run_role(roles_.describer, prompt, std::nullopt, turns);

    Summary summary;
    summary.text = response;
    summary.token_estimate = token_estimate(response);
    for (std::size_t i = 0; i < memory.size(); ++i) {
        summary.source_entry_ids.push_back(static_cast<int>(i));
    }
    if (summary.token_estimate > budget) {
        throw Error(ErrorCode::BudgetInfeasible,
                    "summary needs " + std::to_string(summary.token_estimate) +
                        " tokens, budget is " + std::to_string(budget));
    }
    for (const auto& entry : memory) {
        if (entry.kind == MemoryEntry::Kind::Success &&
            summary.text.find(entry.task_id) == std::string::npos) {
            throw Error(ErrorCode::BackendError,
                        "summary lost success task '" + entry.task_id + "'");
        }
    }
    return summary;
}

std::vector<world::Task> load_curriculum(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open curriculum '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();

    YAML::Node root;
    try {
        root = YAML::Load(ss.str());
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("curriculum parse: ") + e.what());
    }
    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        if (key != "version" && key != "tasks") {
            throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in curriculum");
        }
    }
    std::vector<world::Task> tasks;
    for (const auto& n : root["tasks"]) {
        for (const auto& kv : n) {
            const std::string key = kv.first.as<std::string>();
            if (key != "id" && key != "description" && key != "goal") {
                throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in curriculum task");
            }
        }
        world::Task t;
        t.id = n["id"].as<std::string>();
        t.description = n["description"] ? n["description"].as<std::string>() : "";
        t.goal = world::Goal::parse(n["goal"].as<std::string>());
        tasks.push_back(std::move(t));
    }
    if (tasks.empty()) {
        throw Error(ErrorCode::ConfigError, "curriculum has no tasks");
    }
    return tasks;
}

// ---------------------------------------------------------------------------
// Episode runner
// ---------------------------------------------------------------------------

namespace {

std::string compute_config_hash(const Pipeline& pl, const EpisodeSpec& spec) {
    std::ostringstream ss;
    ss << "scenario=" << spec.scenario << "|dims=" << spec.dims.x << "," << spec.dims.y << ","
       << spec.dims.z << "|task=" << spec.task.id << "|goal=" << spec.task.goal.to_string()
       << "|seed=" << spec.seed << "|cap=" << spec.iteration_cap
       << "|mode=" << perception::mode_name(spec.mode)
       << "|backends=" << pl.engine->backend_ids_fingerprint()
       << "|embedder=" << pl.embedder->id() << "|skills=" << pl.db->size()
       << "|steps_per_iter=" << pl.cfg->rules.steps_per_iteration
       << "|budget=" << pl.cfg->rules.memory_budget_tokens;
    std::ostringstream hex;
    hex << std::hex << fnv1a64(ss.str());
    return hex.str();
}

}  // namespace

datasets::EpisodeRecord run_episode(const Pipeline& pipeline, const EpisodeSpec& spec) {
    const world::WorldConfig& cfg = *pipeline.cfg;
    world::WorldState w = world::generate_world(cfg, spec.seed, spec.scenario, spec.dims);
    world::AgentState agent = world::spawn_agent(cfg, w);
    world::LocateProgress progress;
    MemoryStore memory;

    datasets::EpisodeRecord rec;
    rec.header.seed = spec.seed;
    rec.header.scenario = spec.scenario;
    rec.header.dims = spec.dims;
    rec.header.task = spec.task;
    rec.header.mode = perception::mode_name(spec.mode);
    rec.header.config_hash = compute_config_hash(pipeline, spec);
    rec.header.start_tick = w.tick();

    std::string feedback;
    int invocations = 0;
    bool success = false;

    while (invocations < spec.iteration_cap) {
        auto perceived = perception::perceive_with_snapshot(cfg, w, agent, spec.task, spec.mode);
        progress.update(perceived.snapshot);

        datasets::Frame frame;
        frame.tick = w.tick();
        frame.visible = perceived.snapshot;
        frame.bundle = perceived.bundle;
        if (spec.task.goal.kind == world::GoalKind::Locate) {
            frame.found[spec.task.goal.target] = progress.count(spec.task.goal.target);
        }

        if (world::check_task(cfg, w, agent, spec.task, progress)) {
            success = true;
            rec.frames.push_back(std::move(frame));
            break;
        }

        const std::int64_t tick_begin = w.tick();
        PlanResult pr = pipeline.engine->plan(perceived.bundle,
                                              memory.view_text(cfg.rules.recent_entries), feedback,
                                              spec.seed);
        invocations += pr.planner_invocations;
        for (const auto& t : pr.turns) frame.chat.push_back({t.role, t.prompt, t.response});

        if (pr.failure) {
            MemoryEntry entry;
            entry.kind = MemoryEntry::Kind::Failure;
            entry.task_id = spec.task.id;
            entry.plan_summary = "unparseable plan";
            entry.outcome_summary = "ParseFailure";
            entry.tick_begin = tick_begin;
            entry.tick_end = w.tick();
            memory.append(std::move(entry));
            rec.frames.push_back(std::move(frame));
            break;  // marked failed, never silently truncated
        }
        const Plan& plan = *pr.plan;
        if (plan.complete) {
            success = true;
            rec.frames.push_back(std::move(frame));
            break;
        }

        std::vector<StepReport> reports;
        const int step_budget = cfg.rules.steps_per_iteration;
        for (std::size_t i = 0; i < pr.steps.size() && i < static_cast<std::size_t>(step_budget);
             ++i) {
            const ActionStep& step = pr.steps[i];
            const skills::Query query = skills::encode_query(step, *pipeline.embedder);
            const skills::RetrievalResult rr =
                skills::retrieve(*pipeline.db, query, 1, cfg.rules.retrieval_threshold);
            if (rr.low_confidence) {
                std::ostringstream msg;
                msg << "no matching skill (top '" << rr.ranked.front().skill->id << "' scored "
                    << rr.ranked.front().score << ")";
                reports.push_back({step.raw_text, false, world::FailureCode::NoMatchingSkill,
                                   msg.str()});
                break;
            }
            const skills::Skill& skill = *rr.ranked.front().skill;
            const skills::Bindings bindings{
                {"count", std::to_string(step.quantity.value_or(1))}};
            skills::SkillOutcome outcome =
                skills::execute_skill(cfg, skill, bindings, w, agent);
            for (const auto& trace : outcome.traces) {
                if (trace.action.kind == world::ActionKind::Place && trace.result.ok) {
                    MemoryEntry fact;
                    fact.kind = MemoryEntry::Kind::Fact;
                    fact.outcome_summary =
                        "placed " + trace.action.item + "@" + std::to_string(trace.action.target.x) +
                        "," + std::to_string(trace.action.target.y) + "," +
                        std::to_string(trace.action.target.z);
                    fact.tick_begin = fact.tick_end = w.tick();
                    memory.append(std::move(fact));
                }
                frame.actions.push_back(trace.action);
                frame.results.push_back(trace.result);
            }
            reports.push_back(
                {step.raw_text, outcome.status.ok, outcome.status.code, outcome.status.message});
            if (!outcome.status.ok) break;
        }

        std::vector<ChatExchange> critic_turns;
        const Critique crit = pipeline.engine->critique(plan, reports, &critic_turns);
        for (const auto& t : critic_turns) frame.chat.push_back({t.role, t.prompt, t.response});
        feedback = crit.verdict == Critique::Verdict::Revise ? crit.feedback : "";

        MemoryEntry entry;
        const bool all_ok =
            std::all_of(reports.begin(), reports.end(), [](const StepReport& r) { return r.ok; });
        entry.kind = all_ok ? MemoryEntry::Kind::Success : MemoryEntry::Kind::Failure;
        entry.task_id = spec.task.id;
        entry.plan_summary = plan.strategy;
        if (all_ok) {
            const int have = spec.task.goal.kind == world::GoalKind::Possess
                                 ? (agent.inventory.count(spec.task.goal.target)
                                        ? agent.inventory.at(spec.task.goal.target)
                                        : 0)
                                 : progress.count(spec.task.goal.target);
            entry.outcome_summary = spec.task.goal.target + " x" + std::to_string(have);
        } else {
            for (const auto& r : reports) {
                if (!r.ok) {
                    entry.outcome_summary =
                        world::failure_code_name(r.code) + " at '" + r.step_text + "'";
                    break;
                }
            }
        }
        entry.tick_begin = tick_begin;
        entry.tick_end = w.tick();
        memory.append(std::move(entry));

        if (memory.unsummarized_token_estimate() > 2 * cfg.rules.memory_budget_tokens) {
            std::vector<ChatExchange> describer_turns;
            Summary summary = pipeline.engine->summarize(
                memory.entries(), cfg.rules.memory_budget_tokens, &describer_turns);
            memory.set_summary(std::move(summary));
            for (const auto& t : describer_turns) frame.chat.push_back({t.role, t.prompt, t.response});
        }

        rec.frames.push_back(std::move(frame));
        if (world::check_task(cfg, w, agent, spec.task, progress)) {
            success = true;
            break;
        }
    }

    rec.outcome.success = success;
    rec.outcome.iterations = invocations;
    rec.outcome.items = agent.inventory;
    rec.header.end_tick = w.tick();
    return rec;
}

}  // namespace voxagent::instruction
