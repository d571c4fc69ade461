#pragma once

#include "npi/trace.hpp"

namespace npi {

struct UnsupportedMode : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ProgramCall entry_call(Task task);

// Reference program P: executes the task on the problem while recording the
// full execution trace in the requested formulation. Partial recursion is
// only defined for bubble sort.
TraceNode generate_trace(Task task, Mode mode, const Problem& problem,
                         Encoder enc = Encoder::Values);

struct TrainingTrace {
    Problem problem;
    TraceNode trace;
};

// Paper-sized training sets: addition 200 traces (lengths 1..3), bubble 100
// (lengths 1..2), toposort 6 (the fixed 5-vertex graph plus five 7-vertex
// graphs), quicksort 4 (length-5 arrays). Problems depend only on (task,
// seed) so every mode trains on the same instances.
std::vector<TrainingTrace> make_training_set(Task task, Mode mode, uint64_t seed,
                                             Encoder enc = Encoder::Values);

// The five single-digit sums used by the composition experiment.
std::vector<TrainingTrace> make_single_digit_addition_set(Mode mode);

// Bubble-sort variant set used with the comparison encoder: two length-7
// arrays and one length-6 array.
std::vector<TrainingTrace> make_bubble_variant_training_set(Mode mode, uint64_t seed);

// The 5-vertex DAG with edge list [(1,2),(1,5),(2,4),(2,5),(3,5)].
DagProblem five_vertex_dag();

}  // namespace npi
