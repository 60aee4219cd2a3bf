#include "voxagent/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include <nlohmann/json.hpp>

namespace voxagent::eval {

using nlohmann::json;

namespace {

// Atomic file write: temp + rename, so repeated runs never leave partials.
void write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp + "'");
        out << content;
        if (!out) throw Error(ErrorCode::IoError, "write to '" + tmp + "' failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw Error(ErrorCode::IoError, "cannot rename into '" + path + "'");
    }
}

std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

template <typename Fn>
void run_indexed(std::size_t count, int jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> futures;
    std::atomic<std::size_t> next{0};
    const int workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    for (int wlabel = 0; wlabel < workers; ++wlabel) {
        futures.push_back(std::async(std::launch::async, [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        }));
    }
    for (auto& f : futures) f.get();
}

}  // namespace

// ---------------------------------------------------------------------------
// Block search
// ---------------------------------------------------------------------------

BlockSearchResult run_block_search(const instruction::Pipeline& pipeline,
                                   const BlockSearchParams& params) {
    BlockSearchResult result;
    result.mode = perception::mode_name(params.mode);
    result.target_count = params.target_count;
    result.iteration_cap = params.iteration_cap;
    result.per_seed.resize(params.seeds.size());

    run_indexed(params.seeds.size(), params.jobs, [&](std::size_t i) {
        BlockSearchSeedResult seed_result;
        seed_result.seed = params.seeds[i];
        try {
            instruction::EpisodeSpec target_spec;
            target_spec.scenario = world::kScenarioFlatSearch;
            target_spec.dims = params.dims;
            target_spec.seed = params.seeds[i];
            target_spec.iteration_cap = params.iteration_cap;
            target_spec.mode = params.mode;
            target_spec.task = {"block_search",
                                "locate " + std::to_string(params.target_count) + " " +
                                    params.target_block + " blocks",
                                {world::GoalKind::Locate, params.target_block,
                                 params.target_count}};
            const datasets::EpisodeRecord target_run =
                instruction::run_episode(pipeline, target_spec);
            if (target_run.outcome.success) {
                seed_result.iterations_to_target = target_run.outcome.iterations;
            }

            // Free run: an unreachable count keeps the episode exploring for
            // exactly the full iteration budget.
            instruction::EpisodeSpec free_spec = target_spec;
            free_spec.task = {"block_search_free",
                              "free block search",
                              {world::GoalKind::Locate, params.target_block, 1 << 30}};
            const datasets::EpisodeRecord free_run = instruction::run_episode(pipeline, free_spec);
            int cumulative = 0;
            for (const auto& frame : free_run.frames) {
                auto it = frame.found.find(params.target_block);
                if (it != frame.found.end()) cumulative = it->second;
                seed_result.cumulative.push_back(cumulative);
            }
            seed_result.blocks_in_free_run = cumulative;
        } catch (const Error& e) {
            seed_result.error = e.what();
        }
        result.per_seed[i] = std::move(seed_result);
    });

    double iter_sum = 0.0;
    int iter_n = 0;
    double blocks_sum = 0.0;
    for (const auto& s : result.per_seed) {
        if (s.iterations_to_target) {
            iter_sum += *s.iterations_to_target;
            ++iter_n;
        } else {
            ++result.dnf_count;
        }
        blocks_sum += s.blocks_in_free_run;
    }
    result.mean_iterations = iter_n ? iter_sum / iter_n : 0.0;
    result.mean_blocks = result.per_seed.empty() ? 0.0 : blocks_sum / result.per_seed.size();
    return result;
}

// ---------------------------------------------------------------------------
// Tech tree
// ---------------------------------------------------------------------------

TechTreeResult run_tech_tree(const instruction::Pipeline& pipeline, const TechTreeParams& params) {
    TechTreeResult result;
    result.trials = params.trials;
    result.iteration_cap = params.iteration_cap;
    result.tiers.resize(params.tier_tasks.size());

    struct Job {
        std::size_t tier;
        int trial;
    };
    std::vector<Job> jobs;
    for (std::size_t tier = 0; tier < params.tier_tasks.size(); ++tier) {
        result.tiers[tier].task_id = params.tier_tasks[tier];
        result.tiers[tier].iterations.resize(static_cast<std::size_t>(params.trials));
        for (int trial = 0; trial < params.trials; ++trial) jobs.push_back({tier, trial});
    }

    std::vector<std::string> errors(jobs.size());
    run_indexed(jobs.size(), params.jobs, [&](std::size_t i) {
        const auto [tier, trial] = jobs[i];
        try {
            instruction::EpisodeSpec spec;
            spec.scenario = world::kScenarioTechTree;
            spec.dims = params.dims;
            spec.task = pipeline.engine->find_task(params.tier_tasks[tier]);
            spec.seed = params.seed_base + static_cast<std::uint64_t>(trial);
            spec.iteration_cap = params.iteration_cap;
            spec.mode = params.mode;
            const datasets::EpisodeRecord run = instruction::run_episode(pipeline, spec);
            if (run.outcome.success) {
                result.tiers[tier].iterations[static_cast<std::size_t>(trial)] =
                    run.outcome.iterations;
            }
        } catch (const Error& e) {
            // A hard error, unlike a DNF; recorded but the sweep continues.
            errors[i] = params.tier_tasks[tier] + " trial " + std::to_string(trial) + ": " +
                        e.what();
        }
    });
    for (auto& e : errors) {
        if (!e.empty()) result.errors.push_back(std::move(e));
    }

    for (auto& tier : result.tiers) aggregate_tier(tier);
    return result;
}

void aggregate_tier(TierResult& tier) {
    std::vector<double> finished;
    for (const auto& it : tier.iterations) {
        if (it) finished.push_back(static_cast<double>(*it));
    }
    tier.successes = static_cast<int>(finished.size());
    tier.mean_iterations = 0.0;
    tier.sd_iterations = 0.0;
    if (finished.empty()) return;
    double sum = 0.0;
    for (double v : finished) sum += v;
    tier.mean_iterations = sum / static_cast<double>(finished.size());
    if (finished.size() > 1) {
        double ss = 0.0;
        for (double v : finished) {
            ss += (v - tier.mean_iterations) * (v - tier.mean_iterations);
        }
        tier.sd_iterations = std::sqrt(ss / static_cast<double>(finished.size() - 1));
    }
}

// ---------------------------------------------------------------------------
// Pearson correlation
// ---------------------------------------------------------------------------

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorCode::LengthMismatch, "series must have equal length >= 2");
    }
    const double n = static_cast<double>(x.size());
    double x_mean = 0.0;
    double y_mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        x_mean += x[i];
        y_mean += y[i];
    }
    x_mean /= n;
    y_mean /= n;

    double cov = 0.0;
    double x_ss = 0.0;
    double y_ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - x_mean;
        const double dy = y[i] - y_mean;
        cov += dx * dy;
        x_ss += dx * dx;
        y_ss += dy * dy;
    }
    if (x_ss == 0.0 || y_ss == 0.0) {
        throw Error(ErrorCode::DegenerateSeries, "a constant series has no correlation");
    }
    return cov / (std::sqrt(x_ss) * std::sqrt(y_ss));
}

// ---------------------------------------------------------------------------
// QA scoring
// ---------------------------------------------------------------------------

QAReport score_qa(const std::vector<datasets::QAPair>& pairs,
                  const std::vector<std::string>& answers, instruction::Engine& engine) {
    if (answers.size() != pairs.size()) {
        throw Error(ErrorCode::LengthMismatch, "answers must align with QA pairs");
    }
    QAReport report;
    const instruction::RoleConfig& judge = engine.roles().judge;
    const std::string judge_id = engine.backend_for(judge).id();

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        QAScore score;
        score.question_id = static_cast<int>(i);
        score.category = pairs[i].category;
        try {
            backends::ChatRequest request;
            request.role_id = judge.role;
            request.temperature = judge.temperature;
            request.messages.push_back({"system", "You rate answers for factual agreement."});
            std::string prompt = judge.prompt_template;
            for (const auto& [key, value] :
                 std::vector<std::pair<std::string, std::string>>{{"question", pairs[i].instruction},
                                                                  {"truth", pairs[i].output},
                                                                  {"answer", answers[i]}}) {
                const std::string needle = "{" + key + "}";
                std::size_t pos = 0;
                while ((pos = prompt.find(needle, pos)) != std::string::npos) {
                    prompt.replace(pos, needle.size(), value);
                    pos += value.size();
                }
            }
            request.messages.push_back({"user", prompt});
            const std::string response = engine.backend_for(judge).complete(request);

            double value = 0.0;
            try {
                value = std::stod(response);
            } catch (const std::exception&) {
                throw Error(ErrorCode::MalformedScore, "judge reply '" + response +
                                                           "' is not a number");
            }
            if (value < 0.0 || value > 10.0) {
                throw Error(ErrorCode::MalformedScore,
                            "judge score " + response + " is outside [0,10]");
            }
            score.raters[judge_id] = value;
        } catch (const Error& e) {
            score.error = e.what();
            ++report.error_count;
        }
        report.scores.push_back(std::move(score));
    }

    std::map<std::string, std::pair<double, int>> by_category;
    double total = 0.0;
    int total_n = 0;
    for (const auto& s : report.scores) {
        if (s.raters.empty()) continue;
        double mean = 0.0;
        for (const auto& [_, v] : s.raters) mean += v;
        mean /= static_cast<double>(s.raters.size());
        auto& [sum, n] = by_category[s.category];
        sum += mean;
        ++n;
        total += mean;
        ++total_n;
    }
    for (const auto& [category, acc] : by_category) {
        report.category_means[category] = acc.first / acc.second;
    }
    report.overall = total_n ? total / total_n : 0.0;
    return report;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

ReportFormat report_format_from_name(const std::string& name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    if (name == "plotdata") return ReportFormat::PlotData;
    throw Error(ErrorCode::UsageError, "format must be csv, json, or plotdata");
}

namespace {

json block_search_json(const BlockSearchResult& r) {
    json j;
    j["dnf_count"] = r.dnf_count;
    j["iteration_cap"] = r.iteration_cap;
    j["mean_blocks"] = r.mean_blocks;
    j["mean_iterations"] = r.mean_iterations;
    j["mode"] = r.mode;
    j["per_seed"] = json::array();
    for (const auto& s : r.per_seed) {
        json e;
        e["blocks_in_100"] = s.blocks_in_free_run;
        e["cumulative"] = s.cumulative;
        if (s.error) e["error"] = *s.error;
        e["iters_to_10"] = s.iterations_to_target ? json(*s.iterations_to_target) : json();
        e["seed"] = s.seed;
        j["per_seed"].push_back(e);
    }
    j["target_count"] = r.target_count;
    return j;
}

}  // namespace

void emit_report(const BlockSearchResult& result, ReportFormat format, const std::string& path) {
    emit_report(std::vector<BlockSearchResult>{result}, format, path);
}

void emit_report(const std::vector<BlockSearchResult>& results, ReportFormat format,
                 const std::string& path) {
    if (results.empty() || results.front().per_seed.empty()) {
        throw Error(ErrorCode::UsageError, "no block-search results to report");
    }
    std::ostringstream out;
    switch (format) {
        case ReportFormat::Csv:
            out << "mode,seed,iters_to_10,blocks_in_100\n";
            for (const auto& r : results) {
                for (const auto& s : r.per_seed) {
                    out << r.mode << "," << s.seed << ",";
                    if (s.iterations_to_target) {
                        out << *s.iterations_to_target;
                    } else {
                        out << "DNF";
                    }
                    out << "," << s.blocks_in_free_run << "\n";
                }
            }
            break;
        case ReportFormat::Json: {
            json j = json::array();
            for (const auto& r : results) j.push_back(block_search_json(r));
            out << j.dump(2) << "\n";
            break;
        }
        case ReportFormat::PlotData:
            out << "mode,seed,iteration,cumulative_blocks\n";
            for (const auto& r : results) {
                for (const auto& s : r.per_seed) {
                    for (std::size_t i = 0; i < s.cumulative.size(); ++i) {
                        out << r.mode << "," << s.seed << "," << (i + 1) << "," << s.cumulative[i]
                            << "\n";
                    }
                }
            }
            break;
    }
    write_file(path, out.str());
}

void emit_report(const TechTreeResult& result, ReportFormat format, const std::string& path) {
    if (result.tiers.empty()) {
        throw Error(ErrorCode::UsageError, "no tech-tree results to report");
    }
    std::ostringstream out;
    switch (format) {
        case ReportFormat::Csv:
            out << "tier,successes,trials,mean_iterations,sd_iterations\n";
            for (const auto& t : result.tiers) {
                out << t.task_id << "," << t.successes << "," << result.trials << ",";
                if (t.successes > 0) {
                    out << format_double(t.mean_iterations) << ","
                        << format_double(t.sd_iterations);
                } else {
                    out << "DNF,DNF";
                }
                out << "\n";
            }
            break;
        case ReportFormat::Json: {
            json j;
            j["iteration_cap"] = result.iteration_cap;
            j["tiers"] = json::array();
            j["trials"] = result.trials;
            for (const auto& t : result.tiers) {
                json e;
                e["iterations"] = json::array();
                for (const auto& it : t.iterations) {
                    e["iterations"].push_back(it ? json(*it) : json());
                }
                e["mean_iterations"] = t.mean_iterations;
                e["sd_iterations"] = t.sd_iterations;
                e["successes"] = t.successes;
                e["task"] = t.task_id;
                j["tiers"].push_back(e);
            }
            out << j.dump(2) << "\n";
            break;
        }
        case ReportFormat::PlotData:
            out << "tier,trial,iterations\n";
            for (const auto& t : result.tiers) {
                for (std::size_t i = 0; i < t.iterations.size(); ++i) {
                    out << t.task_id << "," << i << ",";
                    if (t.iterations[i]) {
                        out << *t.iterations[i];
                    } else {
                        out << "DNF";
                    }
                    out << "\n";
                }
            }
            break;
    }
    write_file(path, out.str());
}

void emit_report(const QAReport& result, ReportFormat format, const std::string& path) {
    if (result.scores.empty()) {
        throw Error(ErrorCode::UsageError, "no QA scores to report");
    }
    std::ostringstream out;
    switch (format) {
        case ReportFormat::Csv: {
            out << "category,mean\n";
            for (const auto& [category, mean] : result.category_means) {
                out << category << "," << format_double(mean) << "\n";
            }
            out << "overall," << format_double(result.overall) << "\n";
            break;
        }
        case ReportFormat::Json: {
            json j;
            j["category_means"] = result.category_means;
            j["error_count"] = result.error_count;
            j["overall"] = result.overall;
            j["scores"] = json::array();
            for (const auto& s : result.scores) {
                json e;
                e["category"] = s.category;
                if (s.error) e["error"] = *s.error;
                e["question_id"] = s.question_id;
                e["raters"] = s.raters;
                j["scores"].push_back(e);
            }
            out << j.dump(2) << "\n";
            break;
        }
        case ReportFormat::PlotData:
            out << "question_id,category,score\n";
            for (const auto& s : result.scores) {
                if (s.raters.empty()) continue;
                double mean = 0.0;
                for (const auto& [_, v] : s.raters) mean += v;
                mean /= static_cast<double>(s.raters.size());
                out << s.question_id << "," << s.category << "," << format_double(mean) << "\n";
            }
            break;
    }
    write_file(path, out.str());
}

}  // namespace voxagent::eval
