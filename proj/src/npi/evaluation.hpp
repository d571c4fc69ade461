#pragma once

#include <string>
#include <vector>

#include "npi/model.hpp"
#include "npi/oracle.hpp"

namespace npi {

// Deterministic per-(size, trial) problem stream.
Problem gen_problem(Task task, int size, uint64_t seed);

// Total supervision steps of the full-recursive reference trace; used to
// scale step budgets so failing episodes stay cheap.
long oracle_step_count(Task task, const Problem& problem);

// Limits for one free-running episode on this problem: spec defaults plus a
// step budget of four reference executions.
InferenceLimits episode_limits(Task task, int size, const Problem& problem);

struct EpisodeOutcome {
    bool success = false;
    RunStatus status = RunStatus::Ok;
    long steps = 0;
};

EpisodeOutcome run_episode(const Params<float>& params, const Problem& problem,
                           const InferenceLimits& limits, Encoder enc);

struct EvalRow {
    int size = 0;
    int trials = 0;
    int successes = 0;
    int budget_failures = 0;
    double accuracy = 0;
};

struct EvalReport {
    Task task = Task::Addition;
    Encoder encoder = Encoder::Values;
    std::string checkpoint_id;
    uint64_t seed = 0;
    std::vector<EvalRow> rows;
};

// trials fresh problems per size; episode seeds derive from (seed, size,
// trial) so reports are reproducible and order-independent.
EvalReport evaluate(const Params<float>& params, const std::vector<int>& sizes, int trials,
                    uint64_t seed, int jobs = 1);

std::string report_csv(const EvalReport& r);
std::string report_markdown(const EvalReport& r);

}  // namespace npi
