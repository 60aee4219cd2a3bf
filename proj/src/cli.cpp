#include "voxagent/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "voxagent/backends.hpp"
#include "voxagent/datasets.hpp"
#include "voxagent/eval.hpp"
#include "voxagent/instruction.hpp"
#include "voxagent/skills.hpp"
#include "voxagent/world.hpp"

#ifndef VOXAGENT_DEFAULT_CONFIG_DIR
#define VOXAGENT_DEFAULT_CONFIG_DIR "configs"
#endif

namespace voxagent::cli {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct GlobalOptions {
    std::string config_dir = VOXAGENT_DEFAULT_CONFIG_DIR;
    std::string backend = "scripted";  // scripted | remote
    std::string endpoint;
    std::string model = "default";
    std::uint64_t seed = 0;
    int jobs = 1;
    // Perception overrides; negative means "use the config file value".
    double fov_deg = -1.0;
    double max_dist = -1.0;
    int visual_budget = -1;
};

struct Runtime {
    world::WorldConfig cfg;
    std::vector<world::Task> curriculum;
    std::unique_ptr<backends::Embedder> embedder;
    std::map<std::string, std::shared_ptr<backends::ChatBackend>> chat_backends;
    std::unique_ptr<instruction::Engine> engine;
    skills::SkillDatabase db;
    instruction::Pipeline pipeline;
};

std::string path_in(const GlobalOptions& g, const std::string& name) {
    return (std::filesystem::path(g.config_dir) / name).string();
}

// Flags beat the config file, which beats built-in defaults.
Runtime make_runtime(const GlobalOptions& g) {
    Runtime rt;
    rt.cfg = world::load_world_config(path_in(g, "world.yaml"));
    if (g.fov_deg > 0) rt.cfg.perception.fov_deg = g.fov_deg;
    if (g.max_dist > 0) rt.cfg.perception.max_dist = g.max_dist;
    if (g.visual_budget >= 0) rt.cfg.perception.visual_token_budget = g.visual_budget;

    rt.curriculum = instruction::load_curriculum(path_in(g, "curriculum.yaml"));
    rt.embedder = std::make_unique<backends::HashedBowEmbedder>(256);

    rt.chat_backends["scripted"] =
        std::make_shared<backends::ScriptedBackend>(rt.cfg, rt.curriculum);
    if (g.backend == "remote") {
        backends::RemoteConfig remote;
        remote.endpoint = g.endpoint;
        remote.model = g.model;
        remote.retries = rt.cfg.rules.backend_retries;
        rt.chat_backends["remote"] = std::make_shared<backends::RemoteBackend>(remote);
    } else if (g.backend != "scripted") {
        throw Error(ErrorCode::UsageError, "backend must be scripted or remote");
    }

    instruction::Roles roles = instruction::default_roles();
    instruction::load_prompt_overrides(roles, path_in(g, "prompts"));
    roles.planner.backend_id = g.backend;
    roles.critic.backend_id = g.backend;
    roles.curriculum.backend_id = g.backend;
    roles.describer.backend_id = g.backend;
    roles.judge.backend_id = g.backend;

    rt.engine = std::make_unique<instruction::Engine>(&rt.cfg, roles, rt.chat_backends,
                                                      rt.curriculum);
    rt.db = skills::load_skill_pack(path_in(g, "skills.jsonl"), *rt.embedder,
                                    path_in(g, "skills.embcache.json"));
    rt.pipeline = {&rt.cfg, rt.engine.get(), &rt.db, rt.embedder.get()};
    return rt;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp + "'");
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw Error(ErrorCode::IoError, "cannot rename into '" + path + "'");
    }
}

Vec3i parse_dims(const std::string& text) {
    Vec3i dims;
    if (std::sscanf(text.c_str(), "%dx%dx%d", &dims.x, &dims.y, &dims.z) != 3) {
        throw Error(ErrorCode::UsageError, "dims must look like 64x8x64");
    }
    return dims;
}

std::vector<std::string> read_answer_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::vector<std::string> answers;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            throw Error(ErrorCode::SchemaViolation,
                        "answers line " + std::to_string(line_no) + ": not valid JSON");
        }
        if (j.contains("kind")) continue;  // header line
        if (!j.contains("answer") || !j["answer"].is_string()) {
            throw Error(ErrorCode::SchemaViolation,
                        "answers line " + std::to_string(line_no) + ": missing 'answer'");
        }
        answers.push_back(j["answer"].get<std::string>());
    }
    return answers;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int cmd_episode(const GlobalOptions& g, const std::string& scenario, const std::string& task_id,
                const std::string& mode, int cap, const std::string& dims_text,
                const std::string& out_path) {
    Runtime rt = make_runtime(g);
    instruction::EpisodeSpec spec;
    spec.scenario = scenario;
    spec.dims = parse_dims(dims_text);
    spec.task = rt.engine->find_task(task_id);
    spec.seed = g.seed;
    spec.iteration_cap = cap;
    spec.mode = perception::mode_from_name(mode);

    const datasets::EpisodeRecord record = instruction::run_episode(rt.pipeline, spec);
    std::ostringstream out;
    out << R"({"kind":"episode","version":1})" << "\n" << datasets::dump_episode(record) << "\n";
    write_file_atomic(out_path, out.str());

    std::cout << "episode " << (record.outcome.success ? "succeeded" : "failed") << " after "
              << record.outcome.iterations << " iterations (config " << record.header.config_hash
              << ") -> " << out_path << "\n";
    return record.outcome.success ? kExitOk : kExitFailure;
}

int cmd_block_search(const GlobalOptions& g, const std::vector<std::uint64_t>& seeds,
                     const std::string& mode, int cap, int target, const std::string& dims_text,
                     const std::string& format, const std::string& out_path) {
    Runtime rt = make_runtime(g);
    eval::BlockSearchParams params;
    params.seeds = seeds;
    params.iteration_cap = cap;
    params.target_count = target;
    params.dims = parse_dims(dims_text);
    params.jobs = g.jobs;

    std::vector<eval::BlockSearchResult> results;
    const bool both = mode == "both";
    for (const std::string& m : both ? std::vector<std::string>{"vision", "proximity"}
                                     : std::vector<std::string>{mode}) {
        params.mode = perception::mode_from_name(m);
        results.push_back(eval::run_block_search(rt.pipeline, params));
    }
    eval::emit_report(results, eval::report_format_from_name(format), out_path);

    bool clean = true;
    for (const auto& r : results) {
        for (const auto& s : r.per_seed) {
            std::cout << r.mode << " seed " << s.seed << ": iters_to_" << target << "=";
            if (s.iterations_to_target) {
                std::cout << *s.iterations_to_target;
            } else {
                std::cout << "DNF";
            }
            std::cout << " blocks_in_" << cap << "=" << s.blocks_in_free_run;
            if (s.error) {
                std::cout << " error=" << *s.error;
                clean = false;
            }
            std::cout << "\n";
        }
    }
    std::cout << "report -> " << out_path << "\n";
    return clean ? kExitOk : kExitFailure;  // DNFs allowed, errors not
}

int cmd_tech_tree(const GlobalOptions& g, int trials, int cap, const std::string& dims_text,
                  const std::string& format, const std::string& out_path) {
    Runtime rt = make_runtime(g);
    eval::TechTreeParams params;
    params.trials = trials;
    params.iteration_cap = cap;
    params.seed_base = g.seed ? g.seed : 1;
    params.dims = parse_dims(dims_text);
    params.jobs = g.jobs;

    const eval::TechTreeResult result = eval::run_tech_tree(rt.pipeline, params);
    eval::emit_report(result, eval::report_format_from_name(format), out_path);
    for (const auto& tier : result.tiers) {
        std::cout << tier.task_id << ": " << tier.successes << "/" << result.trials;
        if (tier.successes > 0) {
            std::cout << " mean_iters=" << tier.mean_iterations << " sd=" << tier.sd_iterations;
        }
        std::cout << "\n";
    }
    for (const auto& e : result.errors) std::cerr << "error: " << e << "\n";
    std::cout << "report -> " << out_path << "\n";
    return result.errors.empty() ? kExitOk : kExitFailure;  // DNFs allowed, errors not
}

int cmd_skills_list(const GlobalOptions& g) {
    Runtime rt = make_runtime(g);
    for (const auto& s : rt.db.skills()) {
        std::cout << s.id << " [" << s.category << "] " << s.description << "\n";
    }
    std::cout << rt.db.size() << " skills\n";
    return kExitOk;
}

int cmd_skills_query(const GlobalOptions& g, const std::string& text, int k) {
    Runtime rt = make_runtime(g);
    instruction::ActionStep step;
    try {
        step = instruction::parse_action_step(rt.cfg, text);
    } catch (const Error&) {
        step.raw_text = text;  // ad-hoc queries need not follow the step grammar
    }
    const skills::Query query = skills::encode_query(step, *rt.embedder);
    const auto result = skills::retrieve(rt.db, query, k, rt.cfg.rules.retrieval_threshold);
    for (const auto& r : result.ranked) {
        std::printf("%.6f %s [%s]\n", r.score, r.skill->id.c_str(), r.skill->category.c_str());
    }
    if (result.low_confidence) std::cout << "(low confidence: below threshold)\n";
    return kExitOk;
}

int cmd_skills_validate(const std::string& path) {
    const auto report = datasets::validate_pack(path, "skill");
    for (const auto& e : report.errors) {
        std::cerr << path << ":" << e.line << ": " << e.message << "\n";
    }
    if (!report.clean()) return kExitFailure;
    // Structural validity beyond the schema: scripts must parse, categories
    // must be known, descriptions must embed.
    try {
        backends::HashedBowEmbedder embedder(256);
        skills::load_skill_pack(path, embedder);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitFailure;
    }
    std::cout << report.valid_count << " skills valid\n";
    return kExitOk;
}

int cmd_dataset_validate(const std::string& path, const std::string& kind) {
    const auto report = datasets::validate_pack(path, kind);
    for (const auto& e : report.errors) {
        std::cerr << path << ":" << e.line << ": " << e.message << "\n";
    }
    std::cout << report.valid_count << " valid, " << report.errors.size() << " errors\n";
    return report.clean() ? kExitOk : kExitFailure;
}

int cmd_dataset_roundtrip(const std::string& path, const std::string& kind,
                          const std::string& out_path) {
    if (kind == "qa") {
        datasets::write_qa_pairs(datasets::read_qa_pairs(path), out_path);
    } else if (kind == "episode") {
        datasets::write_episodes(datasets::read_episodes(path), out_path);
    } else if (kind == "skill") {
        datasets::write_skill_entries(datasets::read_skill_entries(path), out_path);
    } else {
        throw Error(ErrorCode::UsageError, "kind must be qa, episode, or skill");
    }
    std::ifstream a(path, std::ios::binary);
    std::ifstream b(out_path, std::ios::binary);
    std::stringstream sa;
    std::stringstream sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    const bool identical = sa.str() == sb.str();
    std::cout << (identical ? "round-trip identical" : "round-trip DIFFERS") << "\n";
    return identical ? kExitOk : kExitFailure;
}

int cmd_dataset_replay(const GlobalOptions& g, const std::string& path) {
    Runtime rt = make_runtime(g);
    const auto records = datasets::read_episodes(path);
    bool all_ok = true;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto verdict = datasets::replay(rt.cfg, records[i]);
        if (verdict.consistent) {
            std::cout << "record " << i << ": consistent\n";
        } else {
            std::cout << "record " << i << ": divergent at tick " << verdict.divergent_tick
                      << " (" << verdict.detail << ")\n";
            all_ok = false;
        }
    }
    return all_ok ? kExitOk : kExitFailure;
}

int cmd_qa(const GlobalOptions& g, const std::string& pairs_path, const std::string& answers_path,
           const std::string& format, const std::string& out_path) {
    Runtime rt = make_runtime(g);
    const auto pairs = datasets::read_qa_pairs(pairs_path);
    const auto answers = read_answer_lines(answers_path);
    const eval::QAReport report = eval::score_qa(pairs, answers, *rt.engine);
    eval::emit_report(report, eval::report_format_from_name(format), out_path);
    for (const auto& [category, mean] : report.category_means) {
        std::cout << category << ": " << mean << "\n";
    }
    std::cout << "overall: " << report.overall << " -> " << out_path << "\n";
    return report.error_count == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"voxagent: a deterministic voxel-world embodied agent harness"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    GlobalOptions g;
    app.add_option("--config", g.config_dir, "config directory")->capture_default_str();
    app.add_option("--backend", g.backend, "chat backend: scripted|remote")
        ->capture_default_str();
    app.add_option("--endpoint", g.endpoint, "remote backend endpoint URL");
    app.add_option("--model", g.model, "remote model id")->capture_default_str();
    app.add_option("--seed", g.seed, "base RNG seed")->capture_default_str();
    app.add_option("--jobs", g.jobs, "parallel episodes for sweeps")->capture_default_str();
    app.add_option("--fov", g.fov_deg, "override perception fov (degrees)");
    app.add_option("--max-dist", g.max_dist, "override perception range (blocks)");
    app.add_option("--visual-budget", g.visual_budget, "override visual token budget");

    // episode
    auto* episode = app.add_subcommand("episode", "run one episode and write its record");
    std::string ep_scenario = world::kScenarioTechTree;
    std::string ep_task = "wooden_tool";
    std::string ep_mode = "vision";
    std::string ep_dims = "48x8x48";
    std::string ep_out = "episode.jsonl";
    int ep_cap = 160;
    episode->add_option("--scenario", ep_scenario, "world scenario")->capture_default_str();
    episode->add_option("--task", ep_task, "curriculum task id")->capture_default_str();
    episode->add_option("--mode", ep_mode, "perception mode: vision|proximity")
        ->capture_default_str();
    episode->add_option("--cap", ep_cap, "planner iteration cap")->capture_default_str();
    episode->add_option("--dims", ep_dims, "world dims WxHxD")->capture_default_str();
    episode->add_option("--out", ep_out, "output record file")->capture_default_str();

    // block-search
    auto* search = app.add_subcommand("block-search", "continuous block-search sweep");
    std::vector<std::uint64_t> bs_seeds = {1, 2, 3};
    std::string bs_mode = "vision";
    std::string bs_dims = "64x8x64";
    std::string bs_format = "csv";
    std::string bs_out = "block_search.csv";
    int bs_cap = 100;
    int bs_target = 10;
    search->add_option("--seeds", bs_seeds, "world seeds")->capture_default_str();
    search->add_option("--mode", bs_mode, "vision|proximity|both")->capture_default_str();
    search->add_option("--cap", bs_cap, "iteration cap")->capture_default_str();
    search->add_option("--target", bs_target, "blocks to find")->capture_default_str();
    search->add_option("--dims", bs_dims, "world dims WxHxD")->capture_default_str();
    search->add_option("--format", bs_format, "csv|json|plotdata")->capture_default_str();
    search->add_option("--out", bs_out, "report file")->capture_default_str();

    // tech-tree
    auto* tech = app.add_subcommand("tech-tree", "tech tree mastery sweep");
    std::string tt_dims = "48x8x48";
    std::string tt_format = "csv";
    std::string tt_out = "tech_tree.csv";
    int tt_trials = 3;
    int tt_cap = 160;
    tech->add_option("--trials", tt_trials, "trials per tier")->capture_default_str();
    tech->add_option("--cap", tt_cap, "iteration cap")->capture_default_str();
    tech->add_option("--dims", tt_dims, "world dims WxHxD")->capture_default_str();
    tech->add_option("--format", tt_format, "csv|json|plotdata")->capture_default_str();
    tech->add_option("--out", tt_out, "report file")->capture_default_str();

    // skills
    auto* skills_cmd = app.add_subcommand("skills", "skill database tooling");
    auto* skills_list = skills_cmd->add_subcommand("list", "list the shipped skills");
    auto* skills_query = skills_cmd->add_subcommand("query", "run an ad-hoc retrieval query");
    std::string sq_text;
    int sq_k = 3;
    skills_query->add_option("text", sq_text, "query text")->required();
    skills_query->add_option("-k,--top", sq_k, "results to return")->capture_default_str();
    auto* skills_validate = skills_cmd->add_subcommand("validate", "validate a skill pack");
    std::string sv_path;
    skills_validate->add_option("file", sv_path, "skill pack path")->required();
    skills_cmd->require_subcommand(1);

    // dataset
    auto* dataset = app.add_subcommand("dataset", "record file tooling");
    auto* ds_validate = dataset->add_subcommand("validate", "validate a record file");
    std::string dv_path;
    std::string dv_kind = "qa";
    ds_validate->add_option("file", dv_path, "record file")->required();
    ds_validate->add_option("--kind", dv_kind, "qa|episode|skill")->capture_default_str();
    auto* ds_roundtrip = dataset->add_subcommand("roundtrip", "read+rewrite and compare bytes");
    std::string dr_path;
    std::string dr_kind = "qa";
    std::string dr_out;
    ds_roundtrip->add_option("file", dr_path, "record file")->required();
    ds_roundtrip->add_option("--kind", dr_kind, "qa|episode|skill")->capture_default_str();
    ds_roundtrip->add_option("--out", dr_out, "rewrite target (default <file>.rt)");
    auto* ds_replay = dataset->add_subcommand("replay", "re-execute recorded episodes");
    std::string dp_path;
    ds_replay->add_option("file", dp_path, "episode record file")->required();
    dataset->require_subcommand(1);

    // qa
    auto* qa = app.add_subcommand("qa", "score answers against a QA ground-truth pack");
    std::string qa_pairs;
    std::string qa_answers;
    std::string qa_format = "csv";
    std::string qa_out = "qa_report.csv";
    qa->add_option("--pairs", qa_pairs, "QA pack file")->required();
    qa->add_option("--answers", qa_answers, "answers file (JSONL with 'answer')")->required();
    qa->add_option("--format", qa_format, "csv|json|plotdata")->capture_default_str();
    qa->add_option("--out", qa_out, "report file")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help and friends
        }
        std::cerr << e.what() << "\n\n" << app.help() << "\n";
        return kExitUsage;
    }

    try {
        if (episode->parsed()) {
            return cmd_episode(g, ep_scenario, ep_task, ep_mode, ep_cap, ep_dims, ep_out);
        }
        if (search->parsed()) {
            return cmd_block_search(g, bs_seeds, bs_mode, bs_cap, bs_target, bs_dims, bs_format,
                                    bs_out);
        }
        if (tech->parsed()) {
            return cmd_tech_tree(g, tt_trials, tt_cap, tt_dims, tt_format, tt_out);
        }
        if (skills_cmd->parsed()) {
            if (skills_list->parsed()) return cmd_skills_list(g);
            if (skills_query->parsed()) return cmd_skills_query(g, sq_text, sq_k);
            if (skills_validate->parsed()) return cmd_skills_validate(sv_path);
        }
        if (dataset->parsed()) {
            if (ds_validate->parsed()) return cmd_dataset_validate(dv_path, dv_kind);
            if (ds_roundtrip->parsed()) {
                return cmd_dataset_roundtrip(dr_path, dr_kind,
                                             dr_out.empty() ? dr_path + ".rt" : dr_out);
            }
            if (ds_replay->parsed()) return cmd_dataset_replay(g, dp_path);
        }
        if (qa->parsed()) {
            return cmd_qa(g, qa_pairs, qa_answers, qa_format, qa_out);
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        switch (e.code()) {
            case ErrorCode::UsageError:
            case ErrorCode::IoError:
            case ErrorCode::ConfigError:
                return kExitUsage;
            default:
                return kExitFailure;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace voxagent::cli
