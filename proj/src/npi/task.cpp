#include "npi/task.hpp"

#include <algorithm>
#include <stdexcept>

namespace npi {

namespace {

TaskSpec make_addition() {
    TaskSpec s;
    s.task = Task::Addition;
    s.programs = {
        {"NOP", true},   {"ADD", false},  {"ADD1", false}, {"CARRY", false},
        {"LSHIFT", false}, {"WRITE", true}, {"PTR", true},
    };
    s.arg_vocab = {"NULL", "INP1", "INP2", "CARRY", "OUT", "LEFT", "RIGHT",
                   "0", "1", "2", "3", "4", "5", "6", "7", "8", "9"};
    s.entry_program = add::ADD;
    return s;
}

TaskSpec make_bubble() {
    TaskSpec s;
    s.task = Task::Bubble;
    s.programs = {
        {"NOP", true},      {"BUBBLESORT", false}, {"BUBBLE", false},
        {"RESET", false},   {"BSTEP", false},      {"COMPSWAP", false},
        {"RSHIFT", false},  {"LSHIFT", false},     {"SWAP", true},
        {"PTR", true},
    };
    s.arg_vocab = {"NULL", "1", "2", "3", "LEFT", "RIGHT"};
    s.entry_program = bub::BUBBLESORT;
    return s;
}

TaskSpec make_toposort() {
    TaskSpec s;
    s.task = Task::Toposort;
    s.programs = {
        {"NOP", true},        {"TOPOSORT", false}, {"TRAVERSE", false},
        {"CHECK_CHILD", false}, {"EXPLORE", false},  {"NEXT_START", false},
        {"STACK", false},     {"WRITE", true},     {"MOVE", true},
    };
    s.arg_vocab = {"NULL",
                   "COLOR_CURR", "COLOR_NEXT", "ACTIVE_START", "ACTIVE_NEIGHB",
                   "ACTIVE_STACK", "SAVE", "STACK_PUSH", "STACK_POP", "RESULT",
                   "COLOR_GREY", "COLOR_BLACK",
                   "P_RESULT", "P_STACK", "P_START", "CHILD_ACTIVE", "CHILD_SAVE",
                   "UP", "DOWN",
                   "PUSH", "POP"};
    s.entry_program = topo::TOPOSORT;
    return s;
}

TaskSpec make_quicksort() {
    TaskSpec s;
    s.task = Task::Quicksort;
    s.programs = {
        {"NOP", true},          {"QUICKSORT", false},  {"PARTITION", false},
        {"COMPSWAP_LOOP", false}, {"COMPSWAP", false},   {"STACK", false},
        {"SET_PIVOT_LO", true}, {"SET_J_LO", true},    {"SET_J_NULL", true},
        {"SWAP", true},         {"MOVE", true},        {"WRITE", true},
    };
    s.arg_vocab = {"NULL",
                   "ENV_STACK_LO", "ENV_STACK_HI", "P_HI", "P_LO",
                   "ENV_STACK_LO_PEEK", "ENV_STACK_HI_PEEK",
                   "P_PIVOT_MINUS_1", "P_PIVOT_PLUS_1", "RESET",
                   "P_STACK_LO", "P_STACK_HI", "P_J", "P_PIVOT",
                   "UP", "DOWN",
                   "STACK_PUSH_CALL1", "STACK_PUSH_CALL2", "STACK_POP"};
    s.entry_program = quick::QUICKSORT;
    return s;
}

}  // namespace

const TaskSpec& task_spec(Task task) {
    static const TaskSpec addition = make_addition();
    static const TaskSpec bubble = make_bubble();
    static const TaskSpec toposort = make_toposort();
    static const TaskSpec quicksort = make_quicksort();
    switch (task) {
        case Task::Addition: return addition;
        case Task::Bubble: return bubble;
        case Task::Toposort: return toposort;
        case Task::Quicksort: return quicksort;
    }
    throw std::logic_error("unknown task");
}

int TaskSpec::prog_id(const std::string& name) const {
    for (size_t i = 0; i < programs.size(); ++i) {
        if (programs[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

int TaskSpec::arg_id(const std::string& name) const {
    for (size_t i = 0; i < arg_vocab.size(); ++i) {
        if (arg_vocab[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<int> TaskSpec::obs_arity(Encoder enc) const {
    switch (task) {
        case Task::Addition:
            // four pad cells, 10 digits + end token each
            return {11, 11, 11, 11};
        case Task::Bubble:
            if (enc == Encoder::Values) return {11, 11, 2};  // two cells + i3==length
            return {2, 2, 2, 2};  // A(i1)<=A(i2), i1 in bounds, i2 in bounds, i3==length
        case Task::Toposort:
            // color(p_start), color(next child), stack empty
            return {4, 4, 2};
        case Task::Quicksort:
            // A(p_j)<=A(p_hi), p_j==p_hi, top_lo<top_hi, stacks empty
            return {2, 2, 2, 2};
    }
    throw std::logic_error("unknown task");
}

bool TaskSpec::valid_primitive_args(const ProgramCall& call) const {
    auto in = [](int v, std::initializer_list<int> set) {
        return std::find(set.begin(), set.end(), v) != set.end();
    };
    if (call.args[2] != 0) return false;
    const int a1 = call.args[0];
    const int a2 = call.args[1];
    switch (task) {
        case Task::Addition:
            switch (call.prog) {
                case add::NOP: return a1 == 0 && a2 == 0;
                case add::WRITE:
                    return in(a1, {add::CARRY_ROW, add::OUT}) &&
                           a2 >= add::D0 && a2 <= add::digit_arg(9);
                case add::PTR:
                    return in(a1, {add::INP1, add::INP2, add::CARRY_ROW, add::OUT}) &&
                           in(a2, {add::LEFT, add::RIGHT});
            }
            return false;
        case Task::Bubble:
            switch (call.prog) {
                case bub::NOP: return a1 == 0 && a2 == 0;
                case bub::SWAP: return a1 == bub::P1 && a2 == bub::P2;
                case bub::PTR:
                    return in(a1, {bub::P1, bub::P2, bub::P3}) &&
                           in(a2, {bub::LEFT, bub::RIGHT});
            }
            return false;
        case Task::Toposort:
            switch (call.prog) {
                case topo::NOP: return a1 == 0 && a2 == 0;
                case topo::WRITE:
                    if (in(a1, {topo::COLOR_CURR, topo::COLOR_NEXT})) {
                        return in(a2, {topo::COLOR_GREY, topo::COLOR_BLACK});
                    }
                    return in(a1, {topo::ACTIVE_START, topo::ACTIVE_NEIGHB,
                                   topo::ACTIVE_STACK, topo::SAVE, topo::STACK_PUSH,
                                   topo::STACK_POP, topo::RESULT}) &&
                           a2 == 0;
                case topo::MOVE:
                    return in(a1, {topo::P_RESULT, topo::P_STACK, topo::P_START,
                                   topo::CHILD_ACTIVE, topo::CHILD_SAVE}) &&
                           in(a2, {topo::UP, topo::DOWN});
            }
            return false;
        case Task::Quicksort:
            switch (call.prog) {
                case quick::NOP:
                case quick::SET_PIVOT_LO:
                case quick::SET_J_LO:
                case quick::SET_J_NULL:
                    return a1 == 0 && a2 == 0;
                case quick::SWAP:
                    return a1 == quick::P_PIVOT && in(a2, {quick::P_HI, quick::P_J});
                case quick::MOVE:
                    return in(a1, {quick::P_STACK_LO, quick::P_STACK_HI, quick::P_J,
                                   quick::P_PIVOT}) &&
                           in(a2, {quick::UP, quick::DOWN});
                case quick::WRITE:
                    return in(a1, {quick::ENV_STACK_LO, quick::ENV_STACK_HI,
                                   quick::P_HI, quick::P_LO}) &&
                           in(a2, {quick::ENV_STACK_LO_PEEK, quick::ENV_STACK_HI_PEEK,
                                   quick::P_HI, quick::P_LO, quick::P_PIVOT_M1,
                                   quick::P_PIVOT_P1, quick::RESET_VAL});
            }
            return false;
    }
    return false;
}

const char* task_name(Task task) {
    switch (task) {
        case Task::Addition: return "addition";
        case Task::Bubble: return "bubble";
        case Task::Toposort: return "toposort";
        case Task::Quicksort: return "quicksort";
    }
    return "?";
}

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::NonRec: return "nonrec";
        case Mode::Partial: return "partial";
        case Mode::FullRec: return "fullrec";
    }
    return "?";
}

const char* encoder_name(Encoder enc) {
    return enc == Encoder::Values ? "values" : "comparison";
}

bool parse_task(const std::string& s, Task& out) {
    for (Task t : {Task::Addition, Task::Bubble, Task::Toposort, Task::Quicksort}) {
        if (s == task_name(t)) {
            out = t;
            return true;
        }
    }
    return false;
}

bool parse_mode(const std::string& s, Mode& out) {
    for (Mode m : {Mode::NonRec, Mode::Partial, Mode::FullRec}) {
        if (s == mode_name(m)) {
            out = m;
            return true;
        }
    }
    return false;
}

bool parse_encoder(const std::string& s, Encoder& out) {
    if (s == "values") {
        out = Encoder::Values;
        return true;
    }
    if (s == "comparison") {
        out = Encoder::Comparison;
        return true;
    }
    return false;
}

}  // namespace npi
