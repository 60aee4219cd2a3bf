#include "voxagent/skills.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "voxagent/datasets.hpp"

namespace voxagent::skills {

using nlohmann::json;

// ---------------------------------------------------------------------------
// DSL lexer
// ---------------------------------------------------------------------------

namespace {

enum class TokKind { Word, Int, Param, LBrace, RBrace, LParen, RParen, Dot, Cmp, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    int number = 0;
    Comparison cmp = Comparison::Ge;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            Token t = next();
            out.push_back(t);
            if (t.kind == TokKind::End) break;
        }
        return out;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::SyntaxError,
                    what + " at " + std::to_string(line_) + ":" + std::to_string(col_));
    }

    char peek(int ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    char advance() {
        const char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            const char c = peek();
            if (c == '#') {  // comment to end of line
                while (pos_ < text_.size() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    static bool word_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }

    Token next() {
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= text_.size()) return t;

        const char c = peek();
        if (c == '{') {
            // "{name}" is a parameter reference; a lone '{' opens a block.
            std::size_t look = pos_ + 1;
            std::string name;
            while (look < text_.size() && word_char(text_[look])) name.push_back(text_[look++]);
            if (!name.empty() && look < text_.size() && text_[look] == '}') {
                while (pos_ <= look) advance();
                t.kind = TokKind::Param;
                t.text = name;
                return t;
            }
            advance();
            t.kind = TokKind::LBrace;
            return t;
        }
        if (c == '}') {
            advance();
            t.kind = TokKind::RBrace;
            return t;
        }
        if (c == '(') {
            advance();
            t.kind = TokKind::LParen;
            return t;
        }
        if (c == ')') {
            advance();
            t.kind = TokKind::RParen;
            return t;
        }
        if (c == '.') {
            advance();
            t.kind = TokKind::Dot;
            return t;
        }
        if (c == '>' || c == '<' || c == '=') {
            advance();
            const bool eq = peek() == '=';
            if (eq) advance();
            t.kind = TokKind::Cmp;
            if (c == '>') {
                t.cmp = eq ? Comparison::Ge : Comparison::Gt;
            } else if (c == '<') {
                t.cmp = eq ? Comparison::Le : Comparison::Lt;
            } else if (eq) {
                t.cmp = Comparison::Eq;
            } else {
                fail("expected '=='");
            }
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            std::string num;
            num.push_back(advance());
            while (std::isdigit(static_cast<unsigned char>(peek()))) num.push_back(advance());
            t.kind = TokKind::Int;
            t.number = std::stoi(num);
            return t;
        }
        if (word_char(c)) {
            std::string word;
            while (word_char(peek())) word.push_back(advance());
            t.kind = TokKind::Word;
            t.text = word;
            return t;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// ---------------------------------------------------------------------------
// DSL parser
// ---------------------------------------------------------------------------

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    SkillScript parse() {
        SkillScript script;
        if (at_word("params")) {
            advance();
            expect(TokKind::LParen, "'(' after params");
            while (cur().kind == TokKind::Word) {
                script.parameters.push_back(cur().text);
                advance();
            }
            expect(TokKind::RParen, "')' closing params");
        }
        while (cur().kind != TokKind::End) {
            script.body.push_back(statement(1));
        }
        if (script.body.empty()) {
            throw Error(ErrorCode::SyntaxError, "script has no statements at 1:1");
        }
        validate_params(script);
        return script;
    }

private:
    const Token& cur() const { return tokens_[pos_]; }
    void advance() { if (pos_ + 1 < tokens_.size()) ++pos_; }

    bool at_word(const char* w) const { return cur().kind == TokKind::Word && cur().text == w; }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::SyntaxError, "expected " + what + " at " +
                                                std::to_string(cur().line) + ":" +
                                                std::to_string(cur().col));
    }

    void expect(TokKind kind, const char* what) {
        if (cur().kind != kind) fail(what);
        advance();
    }

    WordValue word_value(const char* what) {
        WordValue v;
        if (cur().kind == TokKind::Word) {
            v.text = cur().text;
        } else if (cur().kind == TokKind::Param) {
            v.is_param = true;
            v.text = cur().text;
        } else {
            fail(what);
        }
        advance();
        return v;
    }

    IntValue int_value(const char* what) {
        IntValue v;
        if (cur().kind == TokKind::Int) {
            v.literal = cur().number;
        } else if (cur().kind == TokKind::Param) {
            v.is_param = true;
            v.param = cur().text;
        } else {
            fail(what);
        }
        advance();
        return v;
    }

    Statement statement(int depth) {
        Statement s;
        if (cur().kind != TokKind::Word) fail("a statement");
        const std::string head = cur().text;
        const Token head_tok = cur();
        advance();

        if (head == "repeat_until") {
            if (depth > 2) {
                throw Error(ErrorCode::DepthExceeded,
                            "repeat nesting deeper than 2 at " + std::to_string(head_tok.line) +
                                ":" + std::to_string(head_tok.col));
            }
            s.kind = StatementKind::RepeatUntil;
            s.predicate = predicate();
            expect(TokKind::LBrace, "'{' opening loop body");
            while (cur().kind != TokKind::RBrace && cur().kind != TokKind::End) {
                s.body.push_back(statement(depth + 1));
            }
            expect(TokKind::RBrace, "'}' closing loop body");
            if (s.body.empty()) fail("a nonempty loop body");
            return s;
        }
        if (head == "mine") {
            if (!at_word("nearest")) fail("'nearest' after mine");
            advance();
            s.kind = StatementKind::MineNearest;
            s.object = word_value("a block id");
            return s;
        }
        if (head == "craft" || head == "smelt" || head == "place" || head == "equip" ||
            head == "move") {
            s.kind = head == "craft"   ? StatementKind::Craft
                     : head == "smelt" ? StatementKind::Smelt
                     : head == "place" ? StatementKind::Place
                     : head == "equip" ? StatementKind::Equip
                                       : StatementKind::Move;
            s.object = word_value("an item or direction");
            return s;
        }
        if (head == "turn") {
            s.kind = StatementKind::Turn;
            s.turn_yaw = int_value("a yaw delta");
            s.turn_pitch = int_value("a pitch delta");
            return s;
        }
        if (head == "explore_step") {
            s.kind = StatementKind::ExploreStep;
            return s;
        }
        throw Error(ErrorCode::SyntaxError, "unknown statement '" + head + "' at " +
                                                std::to_string(head_tok.line) + ":" +
                                                std::to_string(head_tok.col));
    }

    Predicate predicate() {
        Predicate p;
        if (!at_word("inventory") && !at_word("loop")) fail("'inventory' or 'loop'");
        p.scope = cur().text;
        advance();
        expect(TokKind::Dot, "'.' after predicate scope");
        p.key = word_value("a predicate key");
        if (cur().kind != TokKind::Cmp) fail("a comparison operator");
        p.cmp = cur().cmp;
        advance();
        p.rhs = int_value("a comparison value");
        return p;
    }

    void collect_refs(const Statement& s, std::set<std::string>& refs) const {
        if (s.object.is_param) refs.insert(s.object.text);
        if (s.turn_yaw.is_param) refs.insert(s.turn_yaw.param);
        if (s.turn_pitch.is_param) refs.insert(s.turn_pitch.param);
        if (s.kind == StatementKind::RepeatUntil) {
            if (s.predicate.key.is_param) refs.insert(s.predicate.key.text);
            if (s.predicate.rhs.is_param) refs.insert(s.predicate.rhs.param);
            for (const auto& inner : s.body) collect_refs(inner, refs);
        }
    }

    void validate_params(const SkillScript& script) const {
        std::set<std::string> refs;
        for (const auto& s : script.body) collect_refs(s, refs);
        for (const auto& r : refs) {
            if (std::find(script.parameters.begin(), script.parameters.end(), r) ==
                script.parameters.end()) {
                throw Error(ErrorCode::SyntaxError, "parameter '" + r + "' is not declared");
            }
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

}  // namespace

SkillScript parse_script(const std::string& text) {
    return Parser(Lexer(text).run()).parse();
}

// ---------------------------------------------------------------------------
// Database and retrieval
// ---------------------------------------------------------------------------

void SkillDatabase::add(Skill skill) {
    if (dimension_ == 0) dimension_ = static_cast<int>(skill.embedding.size());
    if (static_cast<int>(skill.embedding.size()) != dimension_) {
        throw Error(ErrorCode::DimensionMismatch, "skill embedding dimension differs");
    }
    double norm_sq = 0.0;
    for (double v : skill.embedding) norm_sq += v * v;
    if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-9) {
        throw Error(ErrorCode::ConfigError,
                    "skill '" + skill.id + "' embedding is not unit-norm");
    }
    auto it = std::lower_bound(skills_.begin(), skills_.end(), skill.id,
                               [](const Skill& s, const std::string& id) { return s.id < id; });
    if (it != skills_.end() && it->id == skill.id) {
        throw Error(ErrorCode::ConfigError, "duplicate skill id '" + skill.id + "'");
    }
    skills_.insert(it, std::move(skill));
}

const Skill* SkillDatabase::find(const std::string& id) const {
    auto it = std::lower_bound(skills_.begin(), skills_.end(), id,
                               [](const Skill& s, const std::string& i) { return s.id < i; });
    return it != skills_.end() && it->id == id ? &*it : nullptr;
}

SkillDatabase build_database(const std::vector<SkillPackEntry>& entries,
                             backends::Embedder& embedder) {
    SkillDatabase db;
    for (const auto& e : entries) {
        if (e.description.empty()) {
            throw Error(ErrorCode::ConfigError, "skill '" + e.id + "' has no description");
        }
        const bool known_category =
            std::find_if(std::begin(kSkillCategories), std::end(kSkillCategories),
                         [&](const char* c) { return e.category == c; }) !=
            std::end(kSkillCategories);
        if (!known_category) {
            throw Error(ErrorCode::ConfigError,
                        "skill '" + e.id + "' has unknown category '" + e.category + "'");
        }
        Skill s;
        s.id = e.id;
        s.description = e.description;
        s.category = e.category;
        s.script_text = e.script_text;
        try {
            s.script = parse_script(e.script_text);
        } catch (const Error& err) {
            throw Error(err.code(), "skill '" + e.id + "': " + err.what());
        }
        s.embedding = embedder.embed(e.description);
        db.add(std::move(s));
    }
    return db;
}

SkillDatabase load_skill_pack(const std::string& path, backends::Embedder& embedder,
                              const std::string& cache_path) {
    const auto entries_raw = datasets::read_skill_entries(path);
    std::vector<SkillPackEntry> entries;
    entries.reserve(entries_raw.size());
    for (const auto& e : entries_raw) {
        entries.push_back({e.id, e.description, e.category, e.script_text});
    }

    std::string content_hash;
    {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        std::ostringstream hex;
        hex << std::hex << fnv1a64(ss.str());
        content_hash = hex.str();
    }

    // Sidecar embedding cache keyed by (embedder id, pack content hash).
    if (!cache_path.empty()) {
        std::ifstream cache_in(cache_path);
        if (cache_in) {
            try {
                const json cache = json::parse(cache_in);
                if (cache.value("embedder", "") == embedder.id() &&
                    cache.value("content_hash", "") == content_hash) {
                    SkillDatabase db;
                    bool complete = true;
                    for (const auto& e : entries) {
                        if (!cache["vectors"].contains(e.id)) {
                            complete = false;
                            break;
                        }
                        Skill s;
                        s.id = e.id;
                        s.description = e.description;
                        s.category = e.category;
                        s.script_text = e.script_text;
                        s.script = parse_script(e.script_text);
                        s.embedding = cache["vectors"][e.id].get<std::vector<double>>();
                        db.add(std::move(s));
                    }
                    if (complete) return db;
                }
            } catch (const std::exception&) {
                // Stale or corrupt cache falls through to a rebuild.
            }
        }
    }

    SkillDatabase db = build_database(entries, embedder);
    if (!cache_path.empty()) {
        json cache;
        cache["embedder"] = embedder.id();
        cache["content_hash"] = content_hash;
        cache["vectors"] = json::object();
        for (const auto& s : db.skills()) cache["vectors"][s.id] = s.embedding;
        std::ofstream out(cache_path);
        if (out) out << cache.dump() << "\n";
    }
    return db;
}

Query encode_query(const instruction::ActionStep& step, backends::Embedder& embedder) {
    return {embedder.embed(step.raw_text), step};
}

double cosine(const std::vector<double>& q, const std::vector<double>& v) {
    if (q.size() != v.size()) {
        throw Error(ErrorCode::DimensionMismatch, "vector sizes " + std::to_string(q.size()) +
                                                      " vs " + std::to_string(v.size()));
    }
    double dot = 0.0;
    double qq = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        dot += q[i] * v[i];
        qq += q[i] * q[i];
        vv += v[i] * v[i];
    }
    if (qq == 0.0 || vv == 0.0) {
        throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
    }
    return dot / (std::sqrt(qq) * std::sqrt(vv));
}

RetrievalResult retrieve(const SkillDatabase& db, const Query& query, int k, double threshold) {
    if (db.empty()) throw Error(ErrorCode::EmptyDatabase, "skill database is empty");
    if (k < 1) throw Error(ErrorCode::UsageError, "k must be >= 1");

    RetrievalResult out;
    out.ranked.reserve(db.size());
    for (const auto& s : db.skills()) {
        out.ranked.push_back({&s, cosine(query.vector, s.embedding)});
    }
    std::stable_sort(out.ranked.begin(), out.ranked.end(),
                     [](const RankedSkill& a, const RankedSkill& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.skill->id < b.skill->id;
                     });
    if (static_cast<int>(out.ranked.size()) > k) out.ranked.resize(static_cast<std::size_t>(k));
    out.low_confidence = out.ranked.front().score < threshold;
    return out;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

using world::ActionResult;
using world::FailureCode;
using world::PrimitiveAction;

class Interpreter {
public:
    Interpreter(const world::WorldConfig& cfg, const Skill& skill, const Bindings& bindings,
                world::WorldState& world, world::AgentState& agent)
        : cfg_(cfg), skill_(skill), bindings_(bindings), world_(world), agent_(agent) {}

    SkillOutcome run() {
        for (const auto& p : skill_.script.parameters) {
            if (!bindings_.count(p)) {
                throw Error(ErrorCode::UnboundParameter,
                            "skill '" + skill_.id + "' parameter '" + p + "' is unbound");
            }
        }
        for (const auto& s : skill_.script.body) {
            if (auto failure = exec(s)) {
                return {std::move(traces_), *failure};
            }
        }
        return {std::move(traces_), ActionResult::success("skill " + skill_.id + " completed")};
    }

private:
    std::optional<ActionResult> budget_check() {
        if (static_cast<int>(traces_.size()) >= cfg_.rules.skill_step_cap ||
            ops_ >= cfg_.rules.skill_step_cap * 4) {
            return ActionResult::failure(FailureCode::StepCapExceeded,
                                         "skill exceeded its action budget");
        }
        return std::nullopt;
    }

    ActionResult apply(const PrimitiveAction& action) {
        const ActionResult r = world::apply_action(cfg_, world_, agent_, action);
        traces_.push_back({action, r});
        return r;
    }

    std::string resolve_word(const WordValue& v) const {
        if (!v.is_param) return v.text;
        auto it = bindings_.find(v.text);
        if (it == bindings_.end()) {
            throw Error(ErrorCode::UnboundParameter, "parameter '" + v.text + "' is unbound");
        }
        return it->second;
    }

    int resolve_int(const IntValue& v) const {
        if (!v.is_param) return v.literal;
        auto it = bindings_.find(v.param);
        if (it == bindings_.end()) {
            throw Error(ErrorCode::UnboundParameter, "parameter '" + v.param + "' is unbound");
        }
        try {
            return std::stoi(it->second);
        } catch (const std::exception&) {
            throw Error(ErrorCode::UnboundParameter,
                        "parameter '" + v.param + "' is not an integer");
        }
    }

    bool eval_predicate(const Predicate& p, int loop_count) const {
        int lhs = 0;
        if (p.scope == "loop") {
            lhs = loop_count;
        } else {
            const std::string item = resolve_word(p.key);
            auto it = agent_.inventory.find(item);
            lhs = it == agent_.inventory.end() ? 0 : it->second;
        }
        const int rhs = resolve_int(p.rhs);
        switch (p.cmp) {
            case Comparison::Ge: return lhs >= rhs;
            case Comparison::Le: return lhs <= rhs;
            case Comparison::Gt: return lhs > rhs;
            case Comparison::Lt: return lhs < rhs;
            case Comparison::Eq: return lhs == rhs;
        }
        return false;
    }

    // Nearest block with the given id (or dropping the given item); ties break
    // on lexicographically smallest position.
    std::optional<Vec3i> find_nearest(const std::string& word) const {
        std::string block_id = cfg_.resolve_alias(word);
        if (!cfg_.find_block(block_id)) {
            const world::BlockDef* source = cfg_.block_dropping(block_id);
            if (!source) return std::nullopt;
            block_id = source->id;
        }
        const int want = cfg_.block_index(block_id);
        std::optional<Vec3i> best;
        double best_dist = 0.0;
        const Vec3i dims = world_.dims();
        for (int y = 0; y < dims.y; ++y) {
            for (int z = 0; z < dims.z; ++z) {
                for (int x = 0; x < dims.x; ++x) {
                    const Vec3i p{x, y, z};
                    if (world_.at(p) != want) continue;
                    const double d = distance(agent_.position, p);
                    if (!best || d < best_dist) {
                        best = p;
                        best_dist = d;
                    }
                }
            }
        }
        return best;
    }

    std::optional<ActionResult> walk_to(const Vec3i& target) {
        const Vec3i dims = world_.dims();
        int guard = 4 * (dims.x + dims.y + dims.z);
        Vec3i prev = agent_.position;
        while (distance(agent_.position, target) > cfg_.rules.interaction_range) {
            if (auto cap = budget_check()) return cap;
            if (--guard < 0) {
                return ActionResult::failure(FailureCode::PathBlocked,
                                             "could not reach the target");
            }
            const Vec3i d = target - agent_.position;
            std::vector<Vec3i> candidates;
            auto push_axis = [&](int comp, Vec3i unit) {
                if (comp > 0) candidates.push_back(unit);
                if (comp < 0) candidates.push_back({-unit.x, -unit.y, -unit.z});
            };
            if (std::abs(d.x) >= std::abs(d.z)) {
                push_axis(d.x, {1, 0, 0});
                push_axis(d.z, {0, 0, 1});
            } else {
                push_axis(d.z, {0, 0, 1});
                push_axis(d.x, {1, 0, 0});
            }
            push_axis(d.y, {0, 1, 0});
            for (const Vec3i side : {Vec3i{1, 0, 0}, Vec3i{-1, 0, 0}, Vec3i{0, 0, 1},
                                     Vec3i{0, 0, -1}}) {
                if (std::find(candidates.begin(), candidates.end(), side) == candidates.end()) {
                    candidates.push_back(side);
                }
            }

            bool moved = false;
            for (int pass = 0; pass < 2 && !moved; ++pass) {
                for (const Vec3i& delta : candidates) {
                    const Vec3i next = agent_.position + delta;
                    if (!world_.in_bounds(next) || world_.at(next) != 0) continue;
                    if (pass == 0 && next == prev) continue;  // avoid ping-ponging
                    prev = agent_.position;
                    const ActionResult r = apply(PrimitiveAction::move(
                        world::direction_name_of(delta)));
                    if (!r.ok) return r;
                    moved = true;
                    break;
                }
            }
            if (!moved) {
                return ActionResult::failure(FailureCode::PathBlocked, "boxed in while walking");
            }
        }
        return std::nullopt;
    }

    std::optional<Vec3i> free_adjacent_cell() const {
        for (const Vec3i delta : {Vec3i{1, 0, 0}, Vec3i{-1, 0, 0}, Vec3i{0, 0, 1},
                                  Vec3i{0, 0, -1}}) {
            const Vec3i p = agent_.position + delta;
            if (world_.in_bounds(p) && world_.at(p) == 0) return p;
        }
        return std::nullopt;
    }

    // Walks to a station block, placing one from the inventory when none is
    // reachable. Missing everything falls through so the craft itself reports
    // the failure.
    std::optional<ActionResult> ensure_station(world::Station station) {
        if (station == world::Station::None) return std::nullopt;
        if (world::station_in_range(cfg_, world_, agent_, station)) return std::nullopt;
        const std::string item = world::station_name(station);
        auto held = agent_.inventory.find(item);
        if (held != agent_.inventory.end() && held->second > 0) {
            const auto cell = free_adjacent_cell();
            if (!cell) {
                return ActionResult::failure(FailureCode::Blocked, "no free cell for " + item);
            }
            const ActionResult r = apply(PrimitiveAction::place(item, *cell));
            if (!r.ok) return r;
            return std::nullopt;
        }
        if (const auto pos = find_nearest(item)) {
            return walk_to(*pos);
        }
        return std::nullopt;
    }

    std::optional<ActionResult> exec_mine_nearest(const Statement& s) {
        const std::string word = resolve_word(s.object);
        const auto target = find_nearest(word);
        if (!target) {
            return ActionResult::failure(FailureCode::NoSuchBlock,
                                         "no '" + word + "' block in the world");
        }
        if (auto failure = walk_to(*target)) return failure;

        const world::BlockDef& block = cfg_.block(world_.at(*target));
        if (block.hardness_tier > 0) {
            // Lowest adequate tool in the inventory, if any; mining surfaces
            // InsufficientTier itself when there is none.
            const world::ToolDef* pick = nullptr;
            for (const auto& t : cfg_.tools) {
                auto it = agent_.inventory.find(t.id);
                if (it == agent_.inventory.end() || it->second < 1) continue;
                if (t.tier >= block.hardness_tier && (!pick || t.tier < pick->tier)) pick = &t;
            }
            if (pick && (!agent_.equipped || *agent_.equipped != pick->id)) {
                const ActionResult r = apply(PrimitiveAction::equip(pick->id));
                if (!r.ok) return r;
            }
        }
        const ActionResult r = apply(PrimitiveAction::mine(*target));
        if (!r.ok) return r;
        return std::nullopt;
    }

    std::optional<ActionResult> exec_craft(const Statement& s, bool smelt) {
        const std::string item = cfg_.resolve_alias(resolve_word(s.object));
        if (const world::Recipe* recipe = cfg_.recipe_for(item)) {
            // Input shortfalls take precedence over station setup, so report
            // those first without touching the world.
            bool inputs_ok = true;
            for (const auto& [input, need] : recipe->inputs) {
                auto it = agent_.inventory.find(input);
                if (it == agent_.inventory.end() || it->second < need) inputs_ok = false;
            }
            if (inputs_ok) {
                if (auto failure = ensure_station(recipe->station)) return failure;
            }
        }
        const ActionResult r = apply(smelt ? PrimitiveAction::smelt(item)
                                           : PrimitiveAction::craft(item));
        if (!r.ok) return r;
        return std::nullopt;
    }

    std::optional<ActionResult> exec(const Statement& s) {
        ++ops_;
        if (auto cap = budget_check()) return cap;
        switch (s.kind) {
            case StatementKind::MineNearest:
                return exec_mine_nearest(s);
            case StatementKind::Craft:
                return exec_craft(s, false);
            case StatementKind::Smelt:
                return exec_craft(s, true);
            case StatementKind::Place: {
                const std::string item = resolve_word(s.object);
                const auto cell = free_adjacent_cell();
                if (!cell) {
                    return ActionResult::failure(FailureCode::Blocked,
                                                 "no free cell to place " + item);
                }
                const ActionResult r = apply(PrimitiveAction::place(item, *cell));
                if (!r.ok) return r;
                return std::nullopt;
            }
            case StatementKind::Equip: {
                const ActionResult r = apply(PrimitiveAction::equip(resolve_word(s.object)));
                if (!r.ok) return r;
                return std::nullopt;
            }
            case StatementKind::Move: {
                const std::string dir = world::resolve_direction(agent_, resolve_word(s.object));
                const ActionResult r = apply(PrimitiveAction::move(dir));
                if (!r.ok) return r;
                return std::nullopt;
            }
            case StatementKind::Turn: {
                const ActionResult r = apply(PrimitiveAction::turn(resolve_int(s.turn_yaw),
                                                                   resolve_int(s.turn_pitch)));
                if (!r.ok) return r;
                return std::nullopt;
            }
            case StatementKind::ExploreStep: {
                const ActionResult r = apply(PrimitiveAction::explore_step());
                if (!r.ok) return r;
                return std::nullopt;
            }
            case StatementKind::RepeatUntil: {
                for (int count = 0;; ++count) {
                    ++ops_;
                    if (auto cap = budget_check()) return cap;
                    if (eval_predicate(s.predicate, count)) break;
                    for (const auto& inner : s.body) {
                        if (auto failure = exec(inner)) return failure;
                    }
                }
                return std::nullopt;
            }
        }
        return std::nullopt;
    }

    const world::WorldConfig& cfg_;
    const Skill& skill_;
    const Bindings& bindings_;
    world::WorldState& world_;
    world::AgentState& agent_;
    std::vector<ActionTrace> traces_;
    int ops_ = 0;
};

}  // namespace

SkillOutcome execute_skill(const world::WorldConfig& cfg, const Skill& skill,
                           const Bindings& bindings, world::WorldState& world,
                           world::AgentState& agent) {
    return Interpreter(cfg, skill, bindings, world, agent).run();
}

}  // namespace voxagent::skills
