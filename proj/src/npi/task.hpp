#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace npi {

enum class Task : uint8_t { Addition = 0, Bubble = 1, Toposort = 2, Quicksort = 3 };
enum class Encoder : uint8_t { Values = 0, Comparison = 1 };
enum class Mode : uint8_t { NonRec = 0, Partial = 1, FullRec = 2 };

constexpr int kArgSlots = 3;

// A dispatched program plus its three argument symbols. Slot values index the
// task's argument vocabulary; unused slots hold the NULL symbol (index 0).
struct ProgramCall {
    int prog = 0;
    std::array<int, kArgSlots> args{0, 0, 0};

    bool operator==(const ProgramCall&) const = default;
};

struct ProgramInfo {
    std::string name;
    bool primitive = false;
};

// Static description of one task: program registry, argument vocabulary,
// observation slot arities, and per-primitive argument tables.
struct TaskSpec {
    Task task;
    std::vector<ProgramInfo> programs;   // index 0 is always NOP
    std::vector<std::string> arg_vocab;  // index 0 is always NULL
    int entry_program = 0;

    int program_count() const { return static_cast<int>(programs.size()); }
    int arg_vocab_size() const { return static_cast<int>(arg_vocab.size()); }
    bool is_primitive(int prog) const { return programs.at(prog).primitive; }

    int prog_id(const std::string& name) const;   // -1 when unknown
    int arg_id(const std::string& name) const;    // -1 when unknown
    const std::string& prog_name(int id) const { return programs.at(id).name; }
    const std::string& arg_name(int id) const { return arg_vocab.at(id); }

    // category counts per observation slot for the given encoder variant
    std::vector<int> obs_arity(Encoder enc) const;

    // argument table check for primitives (slot 3 must always be NULL)
    bool valid_primitive_args(const ProgramCall& call) const;
};

const TaskSpec& task_spec(Task task);

const char* task_name(Task task);
const char* mode_name(Mode mode);
const char* encoder_name(Encoder enc);
bool parse_task(const std::string& s, Task& out);
bool parse_mode(const std::string& s, Mode& out);
bool parse_encoder(const std::string& s, Encoder& out);

// program ids shared by every task
inline constexpr int kNop = 0;

namespace add {
enum Prog { NOP = 0, ADD, ADD1, CARRY, LSHIFT, WRITE, PTR };
enum Arg { NUL = 0, INP1, INP2, CARRY_ROW, OUT, LEFT, RIGHT, D0 };  // D0..D9 = 7..16
inline int digit_arg(int d) { return D0 + d; }
}  // namespace add

namespace bub {
enum Prog { NOP = 0, BUBBLESORT, BUBBLE, RESET, BSTEP, COMPSWAP, RSHIFT, LSHIFT, SWAP, PTR };
enum Arg { NUL = 0, P1, P2, P3, LEFT, RIGHT };
}  // namespace bub

namespace topo {
enum Prog { NOP = 0, TOPOSORT, TRAVERSE, CHECK_CHILD, EXPLORE, NEXT_START, STACK, WRITE, MOVE };
enum Arg {
    NUL = 0,
    // WRITE main actions
    COLOR_CURR, COLOR_NEXT, ACTIVE_START, ACTIVE_NEIGHB, ACTIVE_STACK, SAVE,
    STACK_PUSH, STACK_POP, RESULT,
    // WRITE auxiliary colors
    COLOR_GREY, COLOR_BLACK,
    // MOVE pointers
    P_RESULT, P_STACK, P_START, CHILD_ACTIVE, CHILD_SAVE,
    UP, DOWN,
    // STACK subprogram operations
    PUSH, POP
};
}  // namespace topo

namespace quick {
enum Prog {
    NOP = 0, QUICKSORT, PARTITION, COMPSWAP_LOOP, COMPSWAP, STACK,
    SET_PIVOT_LO, SET_J_LO, SET_J_NULL, SWAP, MOVE, WRITE
};
enum Arg {
    NUL = 0,
    ENV_STACK_LO, ENV_STACK_HI, P_HI, P_LO,
    ENV_STACK_LO_PEEK, ENV_STACK_HI_PEEK, P_PIVOT_M1, P_PIVOT_P1, RESET_VAL,
    P_STACK_LO, P_STACK_HI, P_J, P_PIVOT,
    UP, DOWN,
    STACK_PUSH_CALL1, STACK_PUSH_CALL2, STACK_POP
};
}  // namespace quick

}  // namespace npi
