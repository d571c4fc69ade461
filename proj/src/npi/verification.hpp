#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "npi/evaluation.hpp"
#include "npi/model.hpp"
#include "npi/oracle.hpp"

namespace npi {

// The step-input sequence one subprogram invocation sees, plus the reference
// outputs. Identity is (program, args, observation sequence).
struct CallContext {
    int prog = 0;
    std::array<int, kArgSlots> args{0, 0, 0};
    std::vector<Observation> obs;
    std::vector<StepOutput> outs;

    std::string key() const;
};

// Per subprogram: entry-observation -> set of exit observations seen in
// reference executions.
using TransitionMap = std::map<std::string, std::map<std::string, std::set<std::string>>>;

struct ContextCollection {
    Task task = Task::Addition;
    Encoder enc = Encoder::Values;
    std::vector<CallContext> contexts;            // V, in first-seen order
    std::unordered_map<std::string, int> index;   // context key -> id
    std::vector<Problem> candidates;              // problems run, in order
    std::vector<std::vector<int>> coverage;       // candidate -> covered ids
    TransitionMap transitions;
    bool saturated = false;

    int size() const { return static_cast<int>(contexts.size()); }
};

// Runs the full-recursive reference program on the problem and folds every
// call context into the collection.
void collect_from_problem(ContextCollection& coll, const Problem& problem);

ContextCollection collect_call_contexts(Task task, Encoder enc,
                                        const std::vector<Problem>& problems);

// Random candidate stream of sizes 1..max_size; stops after `window`
// consecutive problems added nothing new (or max_problems).
ContextCollection collect_until_saturation(Task task, Encoder enc, int max_size, uint64_t seed,
                                           int window = 500, int max_problems = 200000);

// Context keys induced by one problem (for coverage queries).
std::vector<std::string> contexts_of_problem(Task task, Encoder enc, const Problem& problem);

struct VerificationSet {
    Task task = Task::Addition;
    Encoder enc = Encoder::Values;
    std::vector<CallContext> contexts;  // V
    std::vector<Problem> problems;      // S_V
};

struct UncoverableContext : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Greedy set cover over the collection's candidates; deterministic tie-break
// by candidate order. Throws UncoverableContext when V has an orphan.
VerificationSet build_verification_set(const ContextCollection& coll);

// Analytic problem enumeration for addition: every two-adjacent-column
// configuration reachable from equal-length, no-leading-zero inputs.
std::vector<Problem> enumerate_addition_verification();

std::string verification_set_to_json(const VerificationSet& v);
VerificationSet verification_set_from_json(const std::string& text);

enum class VerifyMode { Lockstep, FreeRun, Both };

struct VerifyMismatch {
    std::string where;  // context key or problem
    int step = -1;
    std::string expected;
    std::string got;
};

struct VerifyReport {
    bool lockstep_pass = true;
    bool freerun_pass = true;
    int contexts_checked = 0;
    int problems_checked = 0;
    std::vector<VerifyMismatch> mismatches;  // capped at kMaxMismatches
    static constexpr int kMaxMismatches = 50;

    bool pass() const { return lockstep_pass && freerun_pass; }
};

// LOCKSTEP: feed each context's step inputs through a fresh controller state
// and require decoded (program, args, ret) to equal the reference output at
// every step. FREERUN: run whole episodes on S_V (tail collapse off) and
// require step-for-step trace equality plus a correct result.
VerifyReport verify_model(const Params<float>& params, const VerificationSet& vset,
                          VerifyMode mode, int jobs = 1);

std::string verify_report_text(const VerifyReport& r, const VerificationSet& vset);
std::string verify_report_json(const VerifyReport& r);

}  // namespace npi
