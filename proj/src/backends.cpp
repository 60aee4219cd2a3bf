#include "voxagent/backends.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <semaphore>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace voxagent::backends {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ChatRequest
// ---------------------------------------------------------------------------

void ChatRequest::validate() const {
    if (messages.empty()) {
        throw Error(ErrorCode::BackendError, "chat request has no messages");
    }
    if (messages.front().speaker != "system") {
        throw Error(ErrorCode::BackendError, "first chat message must be the system prompt");
    }
}

const std::string& ChatRequest::latest_user_text() const {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->speaker == "user") return it->text;
    }
    throw Error(ErrorCode::BackendError, "chat request has no user message");
}

// ---------------------------------------------------------------------------
// Hashed bag-of-words embedder
// ---------------------------------------------------------------------------

namespace {
constexpr std::uint64_t kBucketSeed = 0x3b07f40136a2b291ULL;
constexpr std::uint64_t kSignSeed = 0x2545f4914f6cdd1dULL;
}  // namespace

HashedBowEmbedder::HashedBowEmbedder(int dimension) : dimension_(dimension) {
    if (dimension < 1) throw Error(ErrorCode::ConfigError, "embedding dimension must be >= 1");
}

std::string HashedBowEmbedder::id() const {
    std::ostringstream ss;
    ss << "hashed_bow:" << dimension_ << ":" << std::hex << kBucketSeed << ":" << kSignSeed;
    return ss.str();
}

std::vector<std::string> HashedBowEmbedder::split_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<double> HashedBowEmbedder::embed(const std::string& text) {
    const auto tokens = split_tokens(text);
    if (tokens.empty()) {
        throw Error(ErrorCode::EmptyText, "nothing to embed");
    }
    std::vector<double> vec(static_cast<std::size_t>(dimension_), 0.0);
    for (const auto& tok : tokens) {
        const auto bucket = fnv1a64(tok, kBucketSeed) % static_cast<std::uint64_t>(dimension_);
        const double sign = (fnv1a64(tok, kSignSeed) & 1ULL) ? 1.0 : -1.0;
        vec[bucket] += sign;
    }
    double norm_sq = 0.0;
    for (double v : vec) norm_sq += v * v;
    if (norm_sq == 0.0) {
        throw Error(ErrorCode::ZeroEmbedding, "token signs cancelled to the zero vector");
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : vec) v *= inv;
    return vec;
}

// ---------------------------------------------------------------------------
// Recipe-graph plan closure
// ---------------------------------------------------------------------------

std::string OraclePlanStep::text() const {
    return verb + " " + std::to_string(target_total) + " " + object;
}

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

struct ClosureState {
    const world::WorldConfig& cfg;
    std::map<std::string, int> sim_inv;
    std::map<std::string, int> produced;
    std::set<world::Station> station_done;

    void require_station(world::Station station);
    void require_tool(int tier);
    void explode(const std::string& item, int qty);
    int best_tool_tier() const;
};

int ClosureState::best_tool_tier() const {
    int best = 0;
    for (const auto& t : cfg.tools) {
        const auto inv_it = sim_inv.find(t.id);
        const auto prod_it = produced.find(t.id);
        const bool held = (inv_it != sim_inv.end() && inv_it->second > 0) ||
                          (prod_it != produced.end() && prod_it->second > 0);
        if (held) best = std::max(best, t.tier);
    }
    return best;
}

void ClosureState::require_tool(int tier) {
    if (best_tool_tier() >= tier) return;
    const world::ToolDef* pick = nullptr;
    for (const auto& t : cfg.tools) {
        if (t.tier >= tier && (!pick || t.tier < pick->tier)) pick = &t;
    }
    if (!pick) {
        throw Error(ErrorCode::UnknownItem, "no tool reaches tier " + std::to_string(tier));
    }
    explode(pick->id, 1);
}

void ClosureState::require_station(world::Station station) {
    if (station == world::Station::None || station_done.count(station)) return;
    station_done.insert(station);
    explode(world::station_name(station), 1);
}

void ClosureState::explode(const std::string& item, int qty) {
    int& avail = sim_inv[item];
    const int use = std::min(avail, qty);
    avail -= use;
    int rem = qty - use;
    if (rem == 0) return;

    if (const world::Recipe* recipe = cfg.recipe_for(item)) {
        require_station(recipe->station);
        const int batches = ceil_div(rem, recipe->output_count);
        for (const auto& [input, per_batch] : recipe->inputs) {
            explode(input, per_batch * batches);
        }
        produced[item] += batches * recipe->output_count;
        sim_inv[item] += batches * recipe->output_count - rem;
        return;
    }
    if (const world::BlockDef* block = cfg.block_dropping(item)) {
        if (block->hardness_tier > 0) require_tool(block->hardness_tier);
        produced[item] += rem;
        return;
    }
    throw Error(ErrorCode::UnknownItem, "'" + item + "' has no recipe and no source block");
}

void emit_steps(const world::WorldConfig& cfg, const std::map<std::string, int>& produced,
                const std::map<std::string, int>& initial_inventory, const std::string& item,
                std::set<std::string>& emitted, std::vector<OraclePlanStep>& steps) {
    if (emitted.count(item)) return;
    auto prod = produced.find(item);
    if (prod == produced.end() || prod->second <= 0) return;
    emitted.insert(item);

    const auto inv_it = initial_inventory.find(item);
    const int initial = inv_it == initial_inventory.end() ? 0 : inv_it->second;
    const int target_total = initial + prod->second;

    if (const world::Recipe* recipe = cfg.recipe_for(item)) {
        for (const auto& [input, _] : recipe->inputs) {
            emit_steps(cfg, produced, initial_inventory, input, emitted, steps);
        }
        if (recipe->station != world::Station::None) {
            emit_steps(cfg, produced, initial_inventory, world::station_name(recipe->station),
                       emitted, steps);
        }
        const bool smelt = recipe->station == world::Station::Furnace;
        steps.push_back({smelt ? "smelt" : "craft", item, target_total});
        return;
    }
    if (const world::BlockDef* block = cfg.block_dropping(item)) {
        if (block->hardness_tier > 0) {
            // The tool the closure chose for this tier was already produced;
            // emit its chain first.
            for (const auto& t : cfg.tools) {
                if (t.tier >= block->hardness_tier && produced.count(t.id)) {
                    emit_steps(cfg, produced, initial_inventory, t.id, emitted, steps);
                    break;
                }
            }
        }
        steps.push_back({block->hardness_tier == 0 ? "collect" : "mine", item, target_total});
    }
}

}  // namespace

OraclePlan plan_closure(const world::WorldConfig& cfg, const world::Goal& goal,
                        const std::map<std::string, int>& inventory,
                        const std::set<std::string>& placed_stations) {
    OraclePlan plan;
    if (goal.kind == world::GoalKind::Locate) {
        plan.steps.push_back({"explore", "steps", cfg.rules.explore_steps_per_round});
        return plan;
    }
    const auto it = inventory.find(goal.target);
    if (it != inventory.end() && it->second >= goal.count) {
        plan.complete = true;
        return plan;
    }
    ClosureState state{cfg, inventory, {}, {}};
    for (const auto& placed : placed_stations) {
        state.station_done.insert(world::station_from_name(placed));
    }
    state.explode(goal.target, goal.count);

    std::set<std::string> emitted;
    emit_steps(cfg, state.produced, inventory, goal.target, emitted, plan.steps);
    return plan;
}

// ---------------------------------------------------------------------------
// Scripted backend
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_ws(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

std::optional<std::string> line_after_prefix(const std::string& text, const std::string& prefix) {
    for (const auto& line : split_lines(text)) {
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    }
    return std::nullopt;
}

int token_count(const std::string& text) { return static_cast<int>(split_ws(text).size()); }

std::string normalize_text(const std::string& text) {
    std::string out;
    bool last_space = true;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!last_space) out.push_back(' ');
            last_space = true;
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            last_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

}  // namespace

ScriptedBackend::ScriptedBackend(world::WorldConfig config, std::vector<world::Task> curriculum)
    : config_(std::move(config)), curriculum_(std::move(curriculum)) {}

std::string ScriptedBackend::complete(const ChatRequest& request) {
    request.validate();
    const std::string& message = request.latest_user_text();
    if (request.role_id == "planner") return plan_text(message);
    if (request.role_id == "critic") return critic_text(message);
    if (request.role_id == "curriculum") return curriculum_text(message);
    if (request.role_id == "describer") return describer_text(message);
    if (request.role_id == "judge") return judge_text(message);
    throw Error(ErrorCode::BackendError, "scripted backend has no rules for role '" +
                                             request.role_id + "'");
}

std::string ScriptedBackend::plan_text(const std::string& message) const {
    std::optional<world::Goal> goal;
    std::map<std::string, int> inventory;
    for (const auto& tok : split_ws(message)) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0) continue;
        const std::string key = tok.substr(0, eq);
        const std::string value = tok.substr(eq + 1);
        if (key == "goal") {
            try {
                goal = world::Goal::parse(value);
            } catch (const Error&) {
            }
        } else if (key != "health" && key != "hunger" && key != "equipped" && key != "task") {
            try {
                std::size_t used = 0;
                const int count = std::stoi(value, &used);
                if (used == value.size()) inventory[key] = count;
            } catch (const std::exception&) {
            }
        }
    }
    if (!goal) return "strategy: no goal found\nsteps: (none)";

    std::set<std::string> placed;
    for (const char* station : {"crafting_table", "furnace"}) {
        if (message.find(std::string("placed ") + station) != std::string::npos) {
            placed.insert(station);
        }
    }

    OraclePlan plan;
    try {
        plan = plan_closure(config_, *goal, inventory, placed);
    } catch (const Error&) {
        return "strategy: unsatisfiable goal\nsteps: (none)";
    }
    if (plan.complete) {
        return "strategy: goal satisfied\ncomplete: true\nsteps: (none)";
    }
    std::string out = "strategy: work toward " + goal->to_string() + "\nsteps:\n";
    for (const auto& step : plan.steps) out += "- " + step.text() + "\n";
    out += "rationale: recipe closure from current inventory";
    return out;
}

std::string ScriptedBackend::critic_text(const std::string& message) const {
    for (const auto& line : split_lines(message)) {
        if (line.rfind("result: FAIL ", 0) != 0) continue;
        const std::string rest = line.substr(13);
        const auto space = rest.find(' ');
        const std::string code = space == std::string::npos ? rest : rest.substr(0, space);
        std::string step = "unknown step";
        const auto open = line.find("(step '");
        if (open != std::string::npos) {
            const auto close = line.find("')", open);
            if (close != std::string::npos) step = line.substr(open + 7, close - open - 7);
        }
        return "revise: step '" + step + "' failed " + code;
    }
    return "accept";
}

std::string ScriptedBackend::curriculum_text(const std::string& message) const {
    std::set<std::string> done;
    if (auto progress = line_after_prefix(message, "progress:")) {
        std::istringstream in(*progress);
        std::string id;
        while (std::getline(in, id, ',')) {
            std::string trimmed;
            for (char c : id) {
                if (!std::isspace(static_cast<unsigned char>(c))) trimmed.push_back(c);
            }
            if (!trimmed.empty() && trimmed != "(none)") done.insert(trimmed);
        }
    }
    for (const auto& task : curriculum_) {
        if (!done.count(task.id)) return "task: " + task.id;
    }
    return "exhausted";
}

std::string ScriptedBackend::describer_text(const std::string& message) const {
    int budget = 0;
    if (auto b = line_after_prefix(message, "budget:")) {
        try {
            budget = std::stoi(*b);
        } catch (const std::exception&) {
        }
    }

    // Latest success per task id, placement facts, failure counts.
    std::vector<std::pair<std::string, std::string>> successes;  // task -> items
    std::vector<std::string> placed_facts;
    std::map<std::string, int> failure_counts;
    for (const auto& line : split_lines(message)) {
        if (line.rfind("- [success] ", 0) == 0) {
            const auto task_pos = line.find("task=");
            const auto items_pos = line.find(" items=");
            const auto ticks_pos = line.find(" ticks=");
            if (task_pos == std::string::npos || items_pos == std::string::npos) continue;
            const std::string task = line.substr(task_pos + 5, items_pos - task_pos - 5);
            const std::string items =
                line.substr(items_pos + 7, (ticks_pos == std::string::npos ? line.size() : ticks_pos) -
                                               items_pos - 7);
            std::erase_if(successes, [&](const auto& p) { return p.first == task; });
            successes.emplace_back(task, items);
        } else if (line.rfind("- [failure] ", 0) == 0) {
            const auto code_pos = line.find("code=");
            if (code_pos == std::string::npos) continue;
            std::string code = line.substr(code_pos + 5);
            const auto space = code.find(' ');
            if (space != std::string::npos) code = code.substr(0, space);
            failure_counts[code] += 1;
        } else if (line.rfind("- [fact] ", 0) == 0) {
            const std::string fact = line.substr(9);
            if (fact.rfind("placed ", 0) == 0 &&
                std::find(placed_facts.begin(), placed_facts.end(), fact) == placed_facts.end()) {
                placed_facts.push_back(fact);
            }
        }
    }

    std::string done_line = "done:";
    for (const auto& [task, items] : successes) done_line += " " + task + "(" + items + ");";
    std::string facts_line = "facts:";
    for (const auto& f : placed_facts) facts_line += " " + f + ";";
    std::string fail_line = "failures:";
    for (const auto& [code, n] : failure_counts) {
        fail_line += " " + code + " x" + std::to_string(n) + ";";
    }

    // Widest form that fits the budget; success ids and items always stay.
    const std::string full = done_line + "\n" + facts_line + "\n" + fail_line;
    const std::string medium = done_line + "\n" + facts_line;
    if (budget <= 0 || token_count(full) <= budget) return full;
    if (token_count(medium) <= budget) return medium;
    return done_line;
}

std::string ScriptedBackend::judge_text(const std::string& message) const {
    const auto truth = line_after_prefix(message, "truth:");
    const auto answer = line_after_prefix(message, "answer:");
    if (!truth || !answer) return "0";
    const std::string truth_norm = normalize_text(*truth);
    const std::string answer_norm = normalize_text(*answer);
    if (answer_norm.empty()) return "0";
    if (answer_norm == truth_norm) return "10";
    const auto truth_tokens = HashedBowEmbedder::split_tokens(truth_norm);
    const auto answer_tokens = HashedBowEmbedder::split_tokens(answer_norm);
    if (truth_tokens.empty()) return "0";
    const std::set<std::string> truth_set(truth_tokens.begin(), truth_tokens.end());
    const std::set<std::string> answer_set(answer_tokens.begin(), answer_tokens.end());
    int overlap = 0;
    for (const auto& t : truth_set) overlap += answer_set.count(t) ? 1 : 0;
    const double score = 10.0 * overlap / static_cast<double>(truth_set.size());
    std::ostringstream out;
    out.precision(1);
    out << std::fixed << score;
    return out.str();
}

// ---------------------------------------------------------------------------
// Remote backend
// ---------------------------------------------------------------------------

namespace {

std::string auth_token(const RemoteConfig& cfg) {
    if (cfg.auth_token_env.empty()) return "";
    const char* value = std::getenv(cfg.auth_token_env.c_str());
    return value ? value : "";
}

struct HttpResult {
    int status = 0;
    std::string body;
    bool transport_failed = false;
};

// Runs one POST, classifying transport-level failures separately from HTTP
// statuses so the caller can decide what is retryable.
HttpResult post_json(httplib::Client& client, const std::string& path, const std::string& body,
                     const std::string& token) {
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) return {0, "", true};
    return {res->status, res->body, false};
}

template <typename Fn>
std::string with_retries(const RemoteConfig& cfg, Fn&& send) {
    int attempt = 0;
    while (true) {
        const HttpResult r = send();
        if (!r.transport_failed && r.status == 200) return r.body;
        const bool retryable = r.transport_failed || r.status == 429 || r.status >= 500;
        if (!retryable) {
            throw Error(ErrorCode::Transport,
                        "request failed with status " + std::to_string(r.status));
        }
        if (attempt >= cfg.retries) {
            if (r.status == 429) throw Error(ErrorCode::RateLimited, "rate limited after retries");
            throw Error(ErrorCode::Transport, r.transport_failed
                                                  ? "transport failure after retries"
                                                  : "status " + std::to_string(r.status) +
                                                        " after retries");
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(cfg.backoff_ms << attempt));
        ++attempt;
    }
}

}  // namespace

struct RemoteBackend::Impl {
    explicit Impl(const RemoteConfig& cfg)
        : client(cfg.endpoint), gate(cfg.max_in_flight) {
        client.set_connection_timeout(cfg.timeout_seconds);
        client.set_read_timeout(cfg.timeout_seconds);
    }
    httplib::Client client;
    std::counting_semaphore<4096> gate;
};

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) {
        throw Error(ErrorCode::ConfigError, "remote backend needs an endpoint");
    }
    impl_ = std::make_unique<Impl>(config_);
}

RemoteBackend::~RemoteBackend() = default;

std::string RemoteBackend::complete(const ChatRequest& request) {
    request.validate();
    json body;
    body["model"] = config_.model;
    body["temperature"] = request.temperature;
    if (request.seed) body["seed"] = *request.seed;
    body["messages"] = json::array();
    for (const auto& m : request.messages) {
        body["messages"].push_back({{"role", m.speaker}, {"content", m.text}});
    }

    impl_->gate.acquire();
    std::string response;
    try {
        response = with_retries(config_, [&] {
            return post_json(impl_->client, config_.chat_path, body.dump(), auth_token(config_));
        });
    } catch (...) {
        impl_->gate.release();
        throw;
    }
    impl_->gate.release();

    json parsed;
    try {
        parsed = json::parse(response);
    } catch (const json::exception&) {
        throw Error(ErrorCode::MalformedResponse, "response body is not JSON");
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array() || parsed["choices"].empty()) {
        throw Error(ErrorCode::MalformedResponse, "response has no choices");
    }
    const auto& choice = parsed["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
        throw Error(ErrorCode::MalformedResponse, "choice has no message content");
    }
    return choice["message"]["content"].get<std::string>();
}

struct RemoteEmbedder::Impl {
    explicit Impl(const RemoteConfig& cfg) : client(cfg.endpoint) {
        client.set_connection_timeout(cfg.timeout_seconds);
        client.set_read_timeout(cfg.timeout_seconds);
    }
    httplib::Client client;
};

RemoteEmbedder::RemoteEmbedder(RemoteConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) {
        throw Error(ErrorCode::ConfigError, "remote embedder needs an endpoint");
    }
    impl_ = std::make_unique<Impl>(config_);
}

RemoteEmbedder::~RemoteEmbedder() = default;

std::vector<double> RemoteEmbedder::embed(const std::string& text) {
    if (HashedBowEmbedder::split_tokens(text).empty()) {
        throw Error(ErrorCode::EmptyText, "nothing to embed");
    }
    json body;
    body["model"] = config_.model;
    body["input"] = text;
    const std::string response = with_retries(config_, [&] {
        return post_json(impl_->client, config_.embed_path, body.dump(), auth_token(config_));
    });
    json parsed;
    try {
        parsed = json::parse(response);
    } catch (const json::exception&) {
        throw Error(ErrorCode::MalformedResponse, "response body is not JSON");
    }
    if (!parsed.contains("data") || !parsed["data"].is_array() || parsed["data"].empty() ||
        !parsed["data"][0].contains("embedding")) {
        throw Error(ErrorCode::MalformedResponse, "response has no embedding");
    }
    std::vector<double> vec;
    for (const auto& v : parsed["data"][0]["embedding"]) vec.push_back(v.get<double>());
    if (static_cast<int>(vec.size()) != config_.embed_dimension) {
        throw Error(ErrorCode::DimensionMismatch,
                    "provider returned dimension " + std::to_string(vec.size()));
    }
    double norm_sq = 0.0;
    for (double v : vec) norm_sq += v * v;
    if (norm_sq == 0.0) throw Error(ErrorCode::ZeroEmbedding, "provider returned a zero vector");
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : vec) v *= inv;
    return vec;
}

std::unique_ptr<Embedder> make_embedder(const EmbeddingSpec& spec, const RemoteConfig* remote) {
    if (spec.backend == "hashed_bow") {
        return std::make_unique<HashedBowEmbedder>(spec.dimension);
    }
    if (spec.backend == "remote") {
        if (!remote) throw Error(ErrorCode::ConfigError, "remote embedder needs remote config");
        RemoteConfig cfg = *remote;
        cfg.embed_dimension = spec.dimension;
        return std::make_unique<RemoteEmbedder>(cfg);
    }
    throw Error(ErrorCode::ConfigError, "unknown embedding backend '" + spec.backend + "'");
}

}  // namespace voxagent::backends
