#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "npi/env.hpp"

namespace npi {

// Step output: termination flag plus the next call. A pure-return step
// carries the NOP program, which executes as an identity primitive.
struct StepOutput {
    bool ret = false;
    ProgramCall next;
    bool operator==(const StepOutput&) const = default;
};

struct TraceNode;

struct TraceStep {
    Observation obs;
    StepOutput out;
    std::unique_ptr<TraceNode> child;  // present iff out.next is a subprogram
};

// Nested execution trace of one call: ordered steps, children under the
// steps that dispatch subprograms.
struct TraceNode {
    ProgramCall call;
    std::vector<TraceStep> steps;

    int count_calls() const;     // this node plus all descendants
    int max_body_steps() const;  // longest step list over all calls
    int max_depth() const;
};

// One supervision record of the flattened (depth-first) trace.
struct FlatRecord {
    int trace_id = 0;
    int call_id = 0;
    int parent_call_id = -1;
    int depth = 0;
    int step = 0;  // index within the call, 0-based
    ProgramCall call;
    Observation obs;
    StepOutput out;
};

std::vector<FlatRecord> flatten_trace(const TraceNode& trace, int trace_id = 0);

// Replays the trace's primitive calls through apply_primitive; returns the
// final environment. Also asserts each recorded observation against the
// replayed environment when strict (used by validate_trace).
TaskEnv replay_trace(Task task, Encoder enc, const Problem& problem, const TraceNode& trace,
                     bool strict = false);

// True iff the primitive replay reaches a correct result and the structural
// invariants hold (single trailing ret per call, children exactly under
// subprogram steps, observations consistent with replay).
bool validate_trace(Task task, Encoder enc, const TraceNode& trace, const Problem& problem,
                    std::string* why = nullptr);

// Flattened sequence of primitive calls, in execution order.
std::vector<ProgramCall> primitive_sequence(const TraceNode& trace);

std::string format_trace(Task task, const TraceNode& trace, int max_lines = -1);

}  // namespace npi
