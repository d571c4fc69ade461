#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include "npi/problem.hpp"
#include "npi/task.hpp"

namespace npi {

// category index of the start/end token in 11-way cell slots
constexpr int kEndTok = 10;
// pointer value / stack cell standing in for the paper's -inf sentinel
constexpr int kSentinel = std::numeric_limits<int>::min();

enum Color : uint8_t { kWhite = 0, kGrey = 1, kBlack = 2, kInvalidColor = 3 };

struct Observation {
    std::vector<uint8_t> slots;
    bool operator==(const Observation&) const = default;
};

struct DispatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidArgument : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 4xN scratch-pad; column 1 is headroom for a final carry, digits sit in
// columns 2..N with the least-significant digit at column N. Cells hold
// 0..9 or the end token; cursors clamp to [0, N+1] and read the end token
// when out of range.
struct AdditionEnv {
    int width = 0;                            // N
    std::array<std::vector<uint8_t>, 4> pad;  // rows INP1, INP2, CARRY, OUT
    std::array<int, 4> cursor{};              // one per row

    bool operator==(const AdditionEnv&) const = default;
};

struct BubbleEnv {
    std::vector<int> row;
    int i1 = 1, i2 = 1;  // bubble pointers, clamp to [0, N+1]
    int i3 = 0;          // pass counter, incremented by PTR 3 RIGHT
    Encoder encoder = Encoder::Values;

    bool operator==(const BubbleEnv&) const = default;
};

struct TopoEnv {
    std::vector<std::vector<int>> adj;  // adj[v] sorted ascending, 1-based
    std::vector<uint8_t> color;         // 1-based
    std::vector<int> result;            // written vertices, 1-based slots
    std::vector<int> stack;             // stack cells, 1-based slots
    std::vector<int> child_cursor;      // per-vertex next-child index, 1-based
    int p_result = 1;
    int p_stack = 1;  // next empty slot; 1 iff stack empty
    int p_start = 1;
    int v_active = 1;
    int v_save = 1;

    bool operator==(const TopoEnv&) const = default;
};

struct QuickEnv {
    std::vector<int> array;  // 1-based values in cells 1..n
    std::vector<int> stack_lo, stack_hi;
    int p_lo = 1, p_hi = 1;
    int p_stack_lo = 1, p_stack_hi = 1;  // next empty slot; 1 iff empty
    int p_pivot = 1;
    int p_j = kSentinel;

    bool operator==(const QuickEnv&) const = default;
};

using TaskEnv = std::variant<AdditionEnv, BubbleEnv, TopoEnv, QuickEnv>;

TaskEnv init_env(Task task, const Problem& problem, Encoder enc = Encoder::Values);
Observation observe(const TaskEnv& env);
void apply_primitive(TaskEnv& env, const ProgramCall& call);

using Result = std::variant<std::string, std::vector<int>>;
Result extract_result(const TaskEnv& env);
bool check_result(const Problem& problem, const Result& result);

Task env_task(const TaskEnv& env);
Encoder env_encoder(const TaskEnv& env);

// observation helpers shared with the verification report
std::string observation_brief(Task task, Encoder enc, const Observation& obs);

}  // namespace npi
