#pragma once

#include <optional>
#include <string>
#include <vector>

#include "voxagent/datasets.hpp"
#include "voxagent/instruction.hpp"

namespace voxagent::eval {

// ---------------------------------------------------------------------------
// Continuous block search
// ---------------------------------------------------------------------------

struct BlockSearchSeedResult {
    std::uint64_t seed = 0;
    std::optional<int> iterations_to_target;  // unset = DNF
    int blocks_in_free_run = 0;
    std::vector<int> cumulative;  // cumulative blocks per iteration (free run)
    std::optional<std::string> error;
};

struct BlockSearchResult {
    std::string mode;
    int target_count = 10;
    int iteration_cap = 100;
    std::vector<BlockSearchSeedResult> per_seed;
    double mean_iterations = 0.0;  // over seeds that finished
    double mean_blocks = 0.0;
    int dnf_count = 0;
};

struct BlockSearchParams {
    std::vector<std::uint64_t> seeds;
    perception::Mode mode = perception::Mode::Vision;
    int target_count = 10;
    int iteration_cap = 100;
    Vec3i dims{64, 8, 64};
    std::string target_block = "diamond_ore";
    int jobs = 1;
};

// Per seed: one episode targeting `target_count` finds within the cap, and a
// free run of exactly `iteration_cap` iterations for the blocks metric.
// Episode errors are recorded per seed and never abort the sweep.
BlockSearchResult run_block_search(const instruction::Pipeline& pipeline,
                                   const BlockSearchParams& params);

// ---------------------------------------------------------------------------
// Tech tree mastery
// ---------------------------------------------------------------------------

struct TierResult {
    std::string task_id;
    std::vector<std::optional<int>> iterations;  // per trial; unset = DNF
    int successes = 0;
    double mean_iterations = 0.0;  // over successes
    double sd_iterations = 0.0;    // sample sd (n-1)
};

struct TechTreeResult {
    int trials = 3;
    int iteration_cap = 160;
    std::vector<TierResult> tiers;  // wooden -> stone -> iron -> diamond order
    std::vector<std::string> errors;  // hard trial errors; DNFs do not count
};

struct TechTreeParams {
    std::vector<std::string> tier_tasks = {"wooden_tool", "stone_tool", "iron_tool",
                                           "diamond_tool"};
    int trials = 3;
    int iteration_cap = 160;
    std::uint64_t seed_base = 1;
    Vec3i dims{48, 8, 48};
    perception::Mode mode = perception::Mode::Vision;
    int jobs = 1;
};

TechTreeResult run_tech_tree(const instruction::Pipeline& pipeline, const TechTreeParams& params);

// Fills successes / mean / sd from the per-trial iterations. The sd is the
// sample standard deviation (n-1), matching the +/- reporting convention.
void aggregate_tier(TierResult& tier);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// Sum((x-xbar)(y-ybar)) / (sqrt(Sum((x-xbar)^2)) * sqrt(Sum((y-ybar)^2))).
// Throws LengthMismatch (also for n < 2) and DegenerateSeries.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct QAScore {
    int question_id = 0;
    std::map<std::string, double> raters;  // rater id -> score in [0,10]
    std::string category;
    std::optional<std::string> error;
};

struct QAReport {
    std::vector<QAScore> scores;
    std::map<std::string, double> category_means;
    double overall = 0.0;
    int error_count = 0;
};

// Scores answers (aligned by index with pairs) with the judge role's backend.
// Out-of-range judge scores are MalformedScore errors recorded per item.
QAReport score_qa(const std::vector<datasets::QAPair>& pairs,
                  const std::vector<std::string>& answers, instruction::Engine& engine);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class ReportFormat { Csv, Json, PlotData };

ReportFormat report_format_from_name(const std::string& name);

// Deterministic column order; plotdata emits (iteration, cumulative blocks)
// series per agent mode. Throws UsageError on empty results.
void emit_report(const BlockSearchResult& result, ReportFormat format, const std::string& path);
void emit_report(const std::vector<BlockSearchResult>& results, ReportFormat format,
                 const std::string& path);
void emit_report(const TechTreeResult& result, ReportFormat format, const std::string& path);
void emit_report(const QAReport& result, ReportFormat format, const std::string& path);

}  // namespace voxagent::eval
