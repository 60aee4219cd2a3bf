#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "voxagent/world.hpp"

namespace voxagent::backends {

struct ChatMessage {
    std::string speaker;  // system | user | assistant
    std::string text;
};

struct ChatRequest {
    std::string role_id;  // planner | critic | curriculum | describer | judge
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<std::uint64_t> seed;

    void validate() const;  // messages nonempty, first speaker is system
    const std::string& latest_user_text() const;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string id() const = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual int dimension() const = 0;
    virtual std::string id() const = 0;
};

struct EmbeddingSpec {
    std::string backend = "hashed_bow";  // hashed_bow | remote
    int dimension = 256;
};

/// Deterministic text embedder: lowercase, split on non-alphanumerics, hash
/// each token to a bucket with a +/-1 sign from a second hash, accumulate,
/// L2-normalize. Order-invariant by construction.
class HashedBowEmbedder : public Embedder {
public:
    explicit HashedBowEmbedder(int dimension = 256);
    std::vector<double> embed(const std::string& text) override;
    int dimension() const override { return dimension_; }
    std::string id() const override;

    static std::vector<std::string> split_tokens(const std::string& text);

private:
    int dimension_;
};

/// Rule-table stand-in for an LLM. Plans are derived from the recipe graph
/// (topological closure over the world config), so they track config changes
/// without hand-written per-task tables. Pure function of
/// (role_id, latest user message, seed).
class ScriptedBackend : public ChatBackend {
public:
    ScriptedBackend(world::WorldConfig config, std::vector<world::Task> curriculum);
    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return "scripted"; }

private:
    std::string plan_text(const std::string& message) const;
    std::string critic_text(const std::string& message) const;
    std::string curriculum_text(const std::string& message) const;
    std::string describer_text(const std::string& message) const;
    std::string judge_text(const std::string& message) const;

    world::WorldConfig config_;
    std::vector<world::Task> curriculum_;
};

struct RemoteConfig {
    std::string endpoint;  // e.g. http://127.0.0.1:8080
    std::string chat_path = "/v1/chat/completions";
    std::string embed_path = "/v1/embeddings";
    std::string model = "default";
    std::string auth_token_env = "VOXAGENT_API_TOKEN";
    int timeout_seconds = 30;
    int retries = 3;
    int backoff_ms = 100;
    int max_in_flight = 4;
    int embed_dimension = 256;
};

/// Chat-completions HTTP client (messages array in, single choice out).
/// Transient transport errors are retried with exponential backoff; failures
/// always surface as typed errors.
class RemoteBackend : public ChatBackend {
public:
    explicit RemoteBackend(RemoteConfig config);
    ~RemoteBackend() override;
    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return "remote:" + config_.model; }

private:
    struct Impl;
    RemoteConfig config_;
    std::unique_ptr<Impl> impl_;
};

class RemoteEmbedder : public Embedder {
public:
    explicit RemoteEmbedder(RemoteConfig config);
    ~RemoteEmbedder() override;
    std::vector<double> embed(const std::string& text) override;
    int dimension() const override { return config_.embed_dimension; }
    std::string id() const override { return "remote:" + config_.model; }

private:
    struct Impl;
    RemoteConfig config_;
    std::unique_ptr<Impl> impl_;
};

std::unique_ptr<Embedder> make_embedder(const EmbeddingSpec& spec, const RemoteConfig* remote);

// Shared plan closure used by the scripted planner; exposed so tests can
// assert against the recipe graph directly.
struct OraclePlanStep {
    std::string verb;
    std::string object;
    int target_total = 0;

    std::string text() const;
};

struct OraclePlan {
    bool complete = false;
    std::vector<OraclePlanStep> steps;
};

OraclePlan plan_closure(const world::WorldConfig& cfg, const world::Goal& goal,
                        const std::map<std::string, int>& inventory,
                        const std::set<std::string>& placed_stations);

}  // namespace voxagent::backends
