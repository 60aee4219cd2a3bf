#include "voxagent/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace voxagent::datasets {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Field-path aware decoding
// ---------------------------------------------------------------------------

[[noreturn]] void violation(const std::string& path, const std::string& message) {
    throw Error(ErrorCode::SchemaViolation, path + ": " + message);
}

const json& field(const json& j, const std::string& path, const char* key) {
    if (!j.is_object()) violation(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) violation(path + "." + key, "missing field");
    return *it;
}

std::string str_field(const json& j, const std::string& path, const char* key,
                      bool allow_empty = true) {
    const json& v = field(j, path, key);
    if (!v.is_string()) violation(path + "." + key, "expected a string");
    const std::string s = v.get<std::string>();
    if (!allow_empty && s.empty()) violation(path + "." + key, "must be nonempty");
    return s;
}

std::int64_t int_field(const json& j, const std::string& path, const char* key) {
    const json& v = field(j, path, key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        violation(path + "." + key, "expected an integer");
    }
    return v.get<std::int64_t>();
}

bool bool_field(const json& j, const std::string& path, const char* key) {
    const json& v = field(j, path, key);
    if (!v.is_boolean()) violation(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

Vec3i vec3_field(const json& j, const std::string& path, const char* key) {
    const json& v = field(j, path, key);
    if (!v.is_array() || v.size() != 3) violation(path + "." + key, "expected [x,y,z]");
    for (const auto& c : v) {
        if (!c.is_number_integer()) violation(path + "." + key, "expected integer coordinates");
    }
    return {v[0].get<int>(), v[1].get<int>(), v[2].get<int>()};
}

json vec3_json(const Vec3i& v) { return json::array({v.x, v.y, v.z}); }

// ---------------------------------------------------------------------------
// QA pairs
// ---------------------------------------------------------------------------

json encode_qa(const QAPair& r) {
    json j;
    j["category"] = r.category;
    j["input"] = r.input;
    j["instruction"] = r.instruction;
    j["output"] = r.output;
    return j;
}

QAPair decode_qa(const json& j, const std::string& path) {
    QAPair r;
    r.instruction = str_field(j, path, "instruction", false);
    r.input = str_field(j, path, "input");
    r.output = str_field(j, path, "output", false);
    r.category = str_field(j, path, "category", false);
    const bool known = std::any_of(std::begin(kQACategories), std::end(kQACategories),
                                   [&](const char* c) { return r.category == c; });
    if (!known) violation(path + ".category", "'" + r.category + "' is not a known category");
    return r;
}

// ---------------------------------------------------------------------------
// Skill entries
// ---------------------------------------------------------------------------

json encode_skill(const SkillCodeEntry& r) {
    json j;
    j["category"] = r.category;
    j["description"] = r.description;
    j["id"] = r.id;
    j["script"] = r.script_text;
    return j;
}

SkillCodeEntry decode_skill(const json& j, const std::string& path) {
    SkillCodeEntry r;
    r.id = str_field(j, path, "id", false);
    r.description = str_field(j, path, "description", false);
    r.category = str_field(j, path, "category", false);
    r.script_text = str_field(j, path, "script", false);
    return r;
}

// ---------------------------------------------------------------------------
// Episode records
// ---------------------------------------------------------------------------

json encode_action(const world::PrimitiveAction& a) {
    json j;
    j["kind"] = world::action_kind_name(a.kind);
    switch (a.kind) {
        case world::ActionKind::Move: j["direction"] = a.direction; break;
        case world::ActionKind::Turn:
            j["dyaw"] = a.dyaw;
            j["dpitch"] = a.dpitch;
            break;
        case world::ActionKind::Mine: j["target"] = vec3_json(a.target); break;
        case world::ActionKind::Place:
            j["item"] = a.item;
            j["target"] = vec3_json(a.target);
            break;
        case world::ActionKind::Craft:
        case world::ActionKind::Smelt:
        case world::ActionKind::Equip: j["item"] = a.item; break;
        case world::ActionKind::ExploreStep: break;
    }
    return j;
}

world::PrimitiveAction decode_action(const json& j, const std::string& path) {
    world::PrimitiveAction a;
    const std::string kind = str_field(j, path, "kind", false);
    try {
        a.kind = world::action_kind_from_name(kind);
    } catch (const Error&) {
        violation(path + ".kind", "'" + kind + "' is not an action kind");
    }
    switch (a.kind) {
        case world::ActionKind::Move: a.direction = str_field(j, path, "direction", false); break;
        case world::ActionKind::Turn: {
            const json& y = field(j, path, "dyaw");
            const json& p = field(j, path, "dpitch");
            if (!y.is_number() || !p.is_number()) violation(path, "turn deltas must be numbers");
            a.dyaw = y.get<double>();
            a.dpitch = p.get<double>();
            break;
        }
        case world::ActionKind::Mine:
            a.target = vec3_field(j, path, "target");
            a.has_target = true;
            break;
        case world::ActionKind::Place:
            a.item = str_field(j, path, "item", false);
            a.target = vec3_field(j, path, "target");
            a.has_target = true;
            break;
        case world::ActionKind::Craft:
        case world::ActionKind::Smelt:
        case world::ActionKind::Equip: a.item = str_field(j, path, "item", false); break;
        case world::ActionKind::ExploreStep: break;
    }
    return a;
}

json encode_result(const world::ActionResult& r) {
    json j;
    j["code"] = world::failure_code_name(r.code);
    j["message"] = r.message;
    j["ok"] = r.ok;
    return j;
}

world::ActionResult decode_result(const json& j, const std::string& path) {
    world::ActionResult r;
    r.ok = bool_field(j, path, "ok");
    const std::string code = str_field(j, path, "code");
    try {
        r.code = world::failure_code_from_name(code);
    } catch (const Error&) {
        violation(path + ".code", "'" + code + "' is not a failure code");
    }
    r.message = str_field(j, path, "message");
    return r;
}

json encode_bundle(const perception::TokenBundle& b) {
    json j;
    j["mode"] = perception::mode_name(b.mode);
    j["state"] = b.state;
    j["task"] = b.task;
    j["visual"] = b.visual;
    return j;
}

std::vector<std::string> string_list_field(const json& j, const std::string& path,
                                           const char* key) {
    const json& v = field(j, path, key);
    if (!v.is_array()) violation(path + "." + key, "expected an array");
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string()) violation(path + "." + key, "expected strings");
        out.push_back(s.get<std::string>());
    }
    return out;
}

perception::TokenBundle decode_bundle(const json& j, const std::string& path) {
    perception::TokenBundle b;
    const std::string mode = str_field(j, path, "mode", false);
    try {
        b.mode = perception::mode_from_name(mode);
    } catch (const Error&) {
        violation(path + ".mode", "'" + mode + "' is not a perception mode");
    }
    b.visual = string_list_field(j, path, "visual");
    b.state = string_list_field(j, path, "state");
    b.task = string_list_field(j, path, "task");
    return b;
}

json encode_frame(const Frame& f) {
    json j;
    j["actions"] = json::array();
    for (const auto& a : f.actions) j["actions"].push_back(encode_action(a));
    j["bundle"] = encode_bundle(f.bundle);
    j["chat"] = json::array();
    for (const auto& c : f.chat) {
        json t;
        t["prompt"] = c.prompt;
        t["response"] = c.response;
        t["role"] = c.role;
        j["chat"].push_back(t);
    }
    j["found"] = f.found;
    j["results"] = json::array();
    for (const auto& r : f.results) j["results"].push_back(encode_result(r));
    j["tick"] = f.tick;
    j["visible"] = json::array();
    for (const auto& s : f.visible) {
        json v;
        v["id"] = s.id;
        v["pos"] = vec3_json(s.pos);
        j["visible"].push_back(v);
    }
    return j;
}

Frame decode_frame(const json& j, const std::string& path) {
    Frame f;
    f.tick = int_field(j, path, "tick");
    const json& visible = field(j, path, "visible");
    if (!visible.is_array()) violation(path + ".visible", "expected an array");
    for (std::size_t i = 0; i < visible.size(); ++i) {
        const std::string p = path + ".visible[" + std::to_string(i) + "]";
        world::SeenBlock s;
        s.id = str_field(visible[i], p, "id", false);
        s.pos = vec3_field(visible[i], p, "pos");
        f.visible.push_back(std::move(s));
    }
    f.bundle = decode_bundle(field(j, path, "bundle"), path + ".bundle");
    const json& chat = field(j, path, "chat");
    if (!chat.is_array()) violation(path + ".chat", "expected an array");
    for (std::size_t i = 0; i < chat.size(); ++i) {
        const std::string p = path + ".chat[" + std::to_string(i) + "]";
        ChatTurn t;
        t.role = str_field(chat[i], p, "role", false);
        t.prompt = str_field(chat[i], p, "prompt");
        t.response = str_field(chat[i], p, "response");
        f.chat.push_back(std::move(t));
    }
    const json& actions = field(j, path, "actions");
    const json& results = field(j, path, "results");
    if (!actions.is_array()) violation(path + ".actions", "expected an array");
    if (!results.is_array()) violation(path + ".results", "expected an array");
    if (actions.size() != results.size()) {
        violation(path + ".results", "results must align with actions");
    }
    for (std::size_t i = 0; i < actions.size(); ++i) {
        f.actions.push_back(decode_action(actions[i], path + ".actions[" + std::to_string(i) + "]"));
        f.results.push_back(decode_result(results[i], path + ".results[" + std::to_string(i) + "]"));
    }
    const json& found = field(j, path, "found");
    if (!found.is_object()) violation(path + ".found", "expected an object");
    for (const auto& [key, value] : found.items()) {
        if (!value.is_number_integer()) violation(path + ".found", "expected integer counts");
        f.found[key] = value.get<int>();
    }
    return f;
}

json encode_episode(const EpisodeRecord& r) {
    json header;
    header["config_hash"] = r.header.config_hash;
    header["dims"] = vec3_json(r.header.dims);
    header["end_tick"] = r.header.end_tick;
    header["mode"] = r.header.mode;
    header["scenario"] = r.header.scenario;
    header["seed"] = r.header.seed;
    header["start_tick"] = r.header.start_tick;
    json task;
    task["description"] = r.header.task.description;
    task["goal"] = r.header.task.goal.to_string();
    task["id"] = r.header.task.id;
    header["task"] = task;

    json outcome;
    outcome["items"] = r.outcome.items;
    outcome["iterations"] = r.outcome.iterations;
    outcome["success"] = r.outcome.success;

    json j;
    j["frames"] = json::array();
    for (const auto& f : r.frames) j["frames"].push_back(encode_frame(f));
    j["header"] = header;
    j["outcome"] = outcome;
    return j;
}

EpisodeRecord decode_episode(const json& j, const std::string& path) {
    EpisodeRecord r;
    const json& header = field(j, path, "header");
    const std::string hp = path + ".header";
    const json& seed = field(header, hp, "seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
        violation(hp + ".seed", "expected an integer");
    }
    r.header.seed = seed.get<std::uint64_t>();
    r.header.scenario = str_field(header, hp, "scenario", false);
    r.header.dims = vec3_field(header, hp, "dims");
    r.header.config_hash = str_field(header, hp, "config_hash");
    r.header.mode = str_field(header, hp, "mode", false);
    r.header.start_tick = int_field(header, hp, "start_tick");
    r.header.end_tick = int_field(header, hp, "end_tick");
    const json& task = field(header, hp, "task");
    r.header.task.id = str_field(task, hp + ".task", "id", false);
    r.header.task.description = str_field(task, hp + ".task", "description");
    const std::string goal = str_field(task, hp + ".task", "goal", false);
    try {
        r.header.task.goal = world::Goal::parse(goal);
    } catch (const Error&) {
        violation(hp + ".task.goal", "'" + goal + "' is not kind:target:count");
    }

    const json& frames = field(j, path, "frames");
    if (!frames.is_array()) violation(path + ".frames", "expected an array");
    std::int64_t last_tick = -1;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        Frame f = decode_frame(frames[i], path + ".frames[" + std::to_string(i) + "]");
        if (f.tick <= last_tick) {
            violation(path + ".frames[" + std::to_string(i) + "].tick",
                      "frames must be strictly ordered by tick");
        }
        last_tick = f.tick;
        r.frames.push_back(std::move(f));
    }

    const json& outcome = field(j, path, "outcome");
    const std::string op = path + ".outcome";
    r.outcome.success = bool_field(outcome, op, "success");
    r.outcome.iterations = static_cast<int>(int_field(outcome, op, "iterations"));
    if (r.outcome.iterations < 0) violation(op + ".iterations", "must be >= 0");
    const json& items = field(outcome, op, "items");
    if (!items.is_object()) violation(op + ".items", "expected an object");
    for (const auto& [key, value] : items.items()) {
        if (!value.is_number_integer()) violation(op + ".items", "expected integer counts");
        r.outcome.items[key] = value.get<int>();
    }
    return r;
}

// ---------------------------------------------------------------------------
// Pack IO
// ---------------------------------------------------------------------------

json schema_header(const std::string& kind) {
    json j;
    j["kind"] = kind;
    j["version"] = kSchemaVersion;
    return j;
}

void check_schema_header(const std::string& line, const std::string& kind) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception&) {
        throw Error(ErrorCode::SchemaViolation, "header: not valid JSON");
    }
    if (j.value("kind", "") != kind) {
        throw Error(ErrorCode::SchemaViolation,
                    "header.kind: expected '" + kind + "', got '" + j.value("kind", "") + "'");
    }
    if (j.value("version", 0) != kSchemaVersion) {
        throw Error(ErrorCode::SchemaViolation, "header.version: unsupported version");
    }
}

template <typename T, typename Encode, typename Decode>
void write_pack(const std::vector<T>& records, const std::string& path, const std::string& kind,
                Encode encode, Decode decode) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << schema_header(kind).dump() << "\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const json j = encode(records[i]);
        decode(j, "record " + std::to_string(i));  // schema-valid records only
        out << j.dump() << "\n";
    }
    if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

template <typename Decode>
auto read_pack(const std::string& path, const std::string& kind, Decode decode) {
    const auto lines = read_lines(path);
    if (lines.empty()) {
        throw Error(ErrorCode::SchemaViolation, "header: file is empty");
    }
    check_schema_header(lines[0], kind);
    std::vector<decltype(decode(json{}, std::string{}))> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::exception&) {
            throw Error(ErrorCode::SchemaViolation,
                        "record " + std::to_string(i) + ": not valid JSON");
        }
        out.push_back(decode(j, "record " + std::to_string(i)));
    }
    return out;
}

}  // namespace

void write_qa_pairs(const std::vector<QAPair>& records, const std::string& path) {
    write_pack(records, path, "qa", encode_qa, decode_qa);
}

std::vector<QAPair> read_qa_pairs(const std::string& path) {
    return read_pack(path, "qa", decode_qa);
}

void write_episodes(const std::vector<EpisodeRecord>& records, const std::string& path) {
    write_pack(records, path, "episode", encode_episode, decode_episode);
}

std::vector<EpisodeRecord> read_episodes(const std::string& path) {
    return read_pack(path, "episode", decode_episode);
}

void write_skill_entries(const std::vector<SkillCodeEntry>& records, const std::string& path) {
    write_pack(records, path, "skill", encode_skill, decode_skill);
}

std::vector<SkillCodeEntry> read_skill_entries(const std::string& path) {
    return read_pack(path, "skill", decode_skill);
}

std::string dump_qa(const QAPair& record) { return encode_qa(record).dump(); }
std::string dump_episode(const EpisodeRecord& record) { return encode_episode(record).dump(); }
std::string dump_skill(const SkillCodeEntry& record) { return encode_skill(record).dump(); }

ValidationReport validate_pack(const std::string& path, const std::string& kind) {
    if (kind != "qa" && kind != "episode" && kind != "skill") {
        throw Error(ErrorCode::UsageError, "kind must be qa, episode, or skill");
    }
    ValidationReport report;
    const auto lines = read_lines(path);
    if (lines.empty()) {
        report.errors.push_back({1, "header", "file is empty"});
        return report;
    }
    try {
        check_schema_header(lines[0], kind);
    } catch (const Error& e) {
        report.errors.push_back({1, "header", e.what()});
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const int line_no = static_cast<int>(i) + 1;
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::exception&) {
            report.errors.push_back({line_no, "", "not valid JSON"});
            continue;
        }
        try {
            if (kind == "qa") {
                decode_qa(j, "record");
            } else if (kind == "episode") {
                decode_episode(j, "record");
            } else {
                decode_skill(j, "record");
            }
            ++report.valid_count;
        } catch (const Error& e) {
            report.errors.push_back({line_no, "", e.what()});
        }
    }
    return report;
}

ReplayVerdict replay(const world::WorldConfig& cfg, const EpisodeRecord& record) {
    world::WorldState w;
    try {
        w = world::generate_world(cfg, record.header.seed, record.header.scenario,
                                  record.header.dims);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::UnknownScenario) throw;
        throw;
    }
    world::AgentState agent = world::spawn_agent(cfg, w);

    for (const auto& frame : record.frames) {
        if (w.tick() != frame.tick) {
            return {false, w.tick(), "frame tick mismatch: expected " +
                                         std::to_string(frame.tick) + ", world is at " +
                                         std::to_string(w.tick())};
        }
        for (std::size_t i = 0; i < frame.actions.size(); ++i) {
            const world::ActionResult r = world::apply_action(cfg, w, agent, frame.actions[i]);
            const world::ActionResult& want = frame.results[i];
            if (r.ok != want.ok || r.code != want.code) {
                return {false, w.tick(),
                        "action result mismatch: got " +
                            (r.ok ? std::string("OK") : world::failure_code_name(r.code)) +
                            ", recorded " +
                            (want.ok ? std::string("OK") : world::failure_code_name(want.code))};
            }
        }
    }
    if (w.tick() != record.header.end_tick) {
        return {false, w.tick(), "end tick mismatch"};
    }
    if (agent.inventory != record.outcome.items) {
        return {false, w.tick(), "final inventory differs from recorded outcome"};
    }
    return {true, -1, ""};
}

}  // namespace voxagent::datasets
