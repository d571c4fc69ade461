#include "npi/oracle.hpp"

#include <functional>

namespace npi {

namespace {

// Builds one call frame; emits a step per action in paper order. The ret flag
// rides the final action of a body; loop frames that can only detect
// termination from a fresh observation end with a pure-return NOP step.
struct Frame {
    TaskEnv& env;
    TraceNode node;

    Frame(TaskEnv& e, int prog, int a1 = 0, int a2 = 0, int a3 = 0) : env(e) {
        node.call = ProgramCall{prog, {a1, a2, a3}};
    }

    void prim(bool ret, int prog, int a1 = 0, int a2 = 0) {
        TraceStep s;
        s.obs = observe(env);
        s.out = StepOutput{ret, ProgramCall{prog, {a1, a2, 0}}};
        apply_primitive(env, s.out.next);
        node.steps.push_back(std::move(s));
    }

    void ret_nop() { prim(true, kNop); }

    template <class Body>
    void sub(bool ret, Body&& body, int prog, int a1 = 0, int a2 = 0) {
        TraceStep s;
        s.obs = observe(env);
        s.out = StepOutput{ret, ProgramCall{prog, {a1, a2, 0}}};
        node.steps.push_back(std::move(s));
        TraceNode child = body();
        node.steps.back().child = std::make_unique<TraceNode>(std::move(child));
    }

    TraceNode take() { return std::move(node); }
};

// ---------------------------------------------------------------- addition

struct AdditionGen {
    TaskEnv& env;
    Mode mode;

    static int digit_or_zero(uint8_t cell) { return cell == kEndTok ? 0 : cell; }

    bool column_nonempty() {
        Observation o = observe(env);
        return o.slots[0] != kEndTok || o.slots[1] != kEndTok || o.slots[2] != kEndTok;
    }

    TraceNode add1() {
        Frame f(env, add::ADD1);
        Observation o = observe(env);
        int sum = digit_or_zero(o.slots[0]) + digit_or_zero(o.slots[1]) +
                  digit_or_zero(o.slots[2]);
        if (sum < 10) {
            f.prim(true, add::WRITE, add::OUT, add::digit_arg(sum));
        } else {
            f.prim(false, add::WRITE, add::OUT, add::digit_arg(sum % 10));
            f.sub(true, [&] { return carry(); }, add::CARRY);
        }
        return f.take();
    }

    TraceNode carry() {
        Frame f(env, add::CARRY);
        f.prim(false, add::PTR, add::CARRY_ROW, add::LEFT);
        f.prim(false, add::WRITE, add::CARRY_ROW, add::digit_arg(1));
        f.prim(true, add::PTR, add::CARRY_ROW, add::RIGHT);
        return f.take();
    }

    TraceNode lshift() {
        Frame f(env, add::LSHIFT);
        f.prim(false, add::PTR, add::INP1, add::LEFT);
        f.prim(false, add::PTR, add::INP2, add::LEFT);
        f.prim(false, add::PTR, add::CARRY_ROW, add::LEFT);
        f.prim(true, add::PTR, add::OUT, add::LEFT);
        return f.take();
    }

    TraceNode add() {
        Frame f(env, add::ADD);
        if (mode == Mode::FullRec) {
            if (column_nonempty()) {
                f.sub(false, [&] { return add1(); }, add::ADD1);
                f.sub(false, [&] { return lshift(); }, add::LSHIFT);
                f.sub(true, [&] { return add(); }, add::ADD);
            } else {
                f.ret_nop();
            }
        } else {
            while (column_nonempty()) {
                f.sub(false, [&] { return add1(); }, add::ADD1);
                f.sub(false, [&] { return lshift(); }, add::LSHIFT);
            }
            f.ret_nop();
        }
        return f.take();
    }
};

// ------------------------------------------------------------------ bubble

struct BubbleGen {
    TaskEnv& env;
    Mode mode;

    BubbleEnv& e() { return std::get<BubbleEnv>(env); }

    bool in1() { return e().i1 >= 1 && e().i1 <= static_cast<int>(e().row.size()); }
    bool in2() { return e().i2 >= 1 && e().i2 <= static_cast<int>(e().row.size()); }
    bool done() { return e().i3 == static_cast<int>(e().row.size()); }

    TraceNode compswap() {
        Frame f(env, bub::COMPSWAP);
        bool swap = in1() && in2() && e().row[e().i1 - 1] > e().row[e().i2 - 1];
        if (swap) {
            f.prim(true, bub::SWAP, bub::P1, bub::P2);
        } else {
            f.ret_nop();
        }
        return f.take();
    }

    TraceNode rshift() {
        Frame f(env, bub::RSHIFT);
        f.prim(false, bub::PTR, bub::P1, bub::RIGHT);
        f.prim(true, bub::PTR, bub::P2, bub::RIGHT);
        return f.take();
    }

    TraceNode lshift() {
        Frame f(env, bub::LSHIFT);
        if (mode == Mode::FullRec) {
            if (in1() || in2()) {
                f.prim(false, bub::PTR, bub::P1, bub::LEFT);
                f.prim(false, bub::PTR, bub::P2, bub::LEFT);
                f.sub(true, [&] { return lshift(); }, bub::LSHIFT);
            } else {
                f.ret_nop();
            }
        } else {
            f.prim(false, bub::PTR, bub::P1, bub::LEFT);
            f.prim(true, bub::PTR, bub::P2, bub::LEFT);
        }
        return f.take();
    }

    TraceNode bstep() {
        Frame f(env, bub::BSTEP);
        if (mode == Mode::FullRec) {
            if (in2()) {
                f.sub(false, [&] { return compswap(); }, bub::COMPSWAP);
                f.sub(false, [&] { return rshift(); }, bub::RSHIFT);
                f.sub(true, [&] { return bstep(); }, bub::BSTEP);
            } else {
                f.ret_nop();
            }
        } else {
            f.sub(false, [&] { return compswap(); }, bub::COMPSWAP);
            f.sub(true, [&] { return rshift(); }, bub::RSHIFT);
        }
        return f.take();
    }

    TraceNode bubble() {
        Frame f(env, bub::BUBBLE);
        if (mode == Mode::FullRec) {
            f.prim(false, bub::PTR, bub::P2, bub::RIGHT);
            f.sub(true, [&] { return bstep(); }, bub::BSTEP);
        } else {
            f.prim(false, bub::PTR, bub::P2, bub::RIGHT);
            while (in2()) {
                f.sub(false, [&] { return bstep(); }, bub::BSTEP);
            }
            f.ret_nop();
        }
        return f.take();
    }

    TraceNode reset() {
        Frame f(env, bub::RESET);
        if (mode == Mode::FullRec) {
            f.sub(false, [&] { return lshift(); }, bub::LSHIFT);
        } else {
            while (in1() || in2()) {
                f.sub(false, [&] { return lshift(); }, bub::LSHIFT);
            }
        }
        f.prim(true, bub::PTR, bub::P3, bub::RIGHT);
        return f.take();
    }

    TraceNode bubblesort() {
        Frame f(env, bub::BUBBLESORT);
        if (mode == Mode::NonRec) {
            while (!done()) {
                f.sub(false, [&] { return bubble(); }, bub::BUBBLE);
                f.sub(false, [&] { return reset(); }, bub::RESET);
            }
            f.ret_nop();
        } else {
            // partial and full recursion share the tail-recursive sort loop
            if (!done()) {
                f.sub(false, [&] { return bubble(); }, bub::BUBBLE);
                f.sub(false, [&] { return reset(); }, bub::RESET);
                f.sub(true, [&] { return bubblesort(); }, bub::BUBBLESORT);
            } else {
                f.ret_nop();
            }
        }
        return f.take();
    }
};

// ---------------------------------------------------------------- toposort

struct TopoGen {
    TaskEnv& env;
    Mode mode;

    TopoEnv& e() { return std::get<TopoEnv>(env); }

    uint8_t start_color() { return observe(env).slots[0]; }
    uint8_t child_color() { return observe(env).slots[1]; }
    bool stack_empty() { return e().p_stack == 1; }

    TraceNode stack_op(int op) {
        Frame f(env, topo::STACK, op);
        if (op == topo::PUSH) {
            f.prim(false, topo::WRITE, topo::STACK_PUSH);
            f.prim(true, topo::MOVE, topo::P_STACK, topo::UP);
        } else {
            f.prim(false, topo::WRITE, topo::ACTIVE_STACK);
            f.prim(false, topo::WRITE, topo::STACK_POP);
            f.prim(true, topo::MOVE, topo::P_STACK, topo::DOWN);
        }
        return f.take();
    }

    TraceNode check_child() {
        Frame f(env, topo::CHECK_CHILD);
        if (mode == Mode::FullRec) {
            uint8_t c = child_color();
            if (c == kGrey || c == kBlack) {
                f.prim(false, topo::MOVE, topo::CHILD_ACTIVE, topo::UP);
                f.sub(true, [&] { return check_child(); }, topo::CHECK_CHILD);
            } else {
                f.ret_nop();
            }
        } else {
            while (child_color() == kGrey || child_color() == kBlack) {
                f.prim(false, topo::MOVE, topo::CHILD_ACTIVE, topo::UP);
            }
            f.ret_nop();
        }
        return f.take();
    }

    // one visit step of the DFS: descend into a white child or finish the
    // active vertex and pop
    bool explore_body(Frame& f) {
        if (child_color() == kWhite) {
            f.prim(false, topo::WRITE, topo::COLOR_NEXT, topo::COLOR_GREY);
            f.sub(false, [&] { return stack_op(topo::PUSH); }, topo::STACK, topo::PUSH);
            f.prim(false, topo::WRITE, topo::SAVE);
            f.prim(false, topo::WRITE, topo::ACTIVE_NEIGHB);
            f.prim(false, topo::MOVE, topo::CHILD_SAVE, topo::UP);
            return true;
        }
        f.prim(false, topo::WRITE, topo::COLOR_CURR, topo::COLOR_BLACK);
        f.prim(false, topo::WRITE, topo::RESULT);
        if (stack_empty()) {
            f.prim(true, topo::MOVE, topo::P_RESULT, topo::UP);
            return false;
        }
        f.prim(false, topo::MOVE, topo::P_RESULT, topo::UP);
        f.sub(false, [&] { return stack_op(topo::POP); }, topo::STACK, topo::POP);
        return true;
    }

    TraceNode explore() {
        Frame f(env, topo::EXPLORE);
        if (mode == Mode::FullRec) {
            if (explore_body(f)) {
                f.sub(false, [&] { return check_child(); }, topo::CHECK_CHILD);
                f.sub(true, [&] { return explore(); }, topo::EXPLORE);
            }
        } else {
            while (explore_body(f)) {
                f.sub(false, [&] { return check_child(); }, topo::CHECK_CHILD);
            }
        }
        return f.take();
    }

    TraceNode traverse() {
        Frame f(env, topo::TRAVERSE);
        f.sub(false, [&] { return check_child(); }, topo::CHECK_CHILD);
        f.sub(true, [&] { return explore(); }, topo::EXPLORE);
        return f.take();
    }

    TraceNode next_start() {
        Frame f(env, topo::NEXT_START);
        if (mode == Mode::FullRec) {
            uint8_t c = start_color();
            if (c == kGrey || c == kBlack) {
                f.prim(false, topo::MOVE, topo::P_START, topo::UP);
                f.sub(true, [&] { return next_start(); }, topo::NEXT_START);
            } else {
                f.ret_nop();
            }
        } else {
            while (start_color() == kGrey || start_color() == kBlack) {
                f.prim(false, topo::MOVE, topo::P_START, topo::UP);
            }
            f.ret_nop();
        }
        return f.take();
    }

    void toposort_body(Frame& f) {
        f.prim(false, topo::WRITE, topo::ACTIVE_START);
        f.prim(false, topo::WRITE, topo::COLOR_CURR, topo::COLOR_GREY);
        f.sub(false, [&] { return traverse(); }, topo::TRAVERSE);
        f.prim(false, topo::MOVE, topo::P_START, topo::UP);
        f.sub(false, [&] { return next_start(); }, topo::NEXT_START);
    }

    TraceNode toposort() {
        Frame f(env, topo::TOPOSORT);
        if (mode == Mode::FullRec) {
            if (start_color() != kInvalidColor) {
                toposort_body(f);
                f.sub(true, [&] { return toposort(); }, topo::TOPOSORT);
            } else {
                f.ret_nop();
            }
        } else {
            while (start_color() != kInvalidColor) {
                toposort_body(f);
            }
            f.ret_nop();
        }
        return f.take();
    }
};

// --------------------------------------------------------------- quicksort

struct QuickGen {
    TaskEnv& env;
    Mode mode;

    QuickEnv& e() { return std::get<QuickEnv>(env); }

    bool top_lt() { return observe(env).slots[2] != 0; }
    bool j_eq_hi() { return e().p_j == e().p_hi; }
    bool le() { return observe(env).slots[0] != 0; }
    bool stacks_empty() { return e().p_stack_lo == 1; }

    TraceNode stack_op(int op) {
        Frame f(env, quick::STACK, op);
        if (op == quick::STACK_PUSH_CALL1) {
            f.prim(false, quick::WRITE, quick::ENV_STACK_LO, quick::P_LO);
            f.prim(false, quick::WRITE, quick::ENV_STACK_HI, quick::P_PIVOT_M1);
            f.prim(false, quick::MOVE, quick::P_STACK_LO, quick::UP);
            f.prim(true, quick::MOVE, quick::P_STACK_HI, quick::UP);
        } else if (op == quick::STACK_PUSH_CALL2) {
            f.prim(false, quick::WRITE, quick::ENV_STACK_LO, quick::P_PIVOT_P1);
            f.prim(false, quick::WRITE, quick::ENV_STACK_HI, quick::P_HI);
            f.prim(false, quick::MOVE, quick::P_STACK_LO, quick::UP);
            f.prim(true, quick::MOVE, quick::P_STACK_HI, quick::UP);
        } else {
            f.prim(false, quick::WRITE, quick::ENV_STACK_LO, quick::RESET_VAL);
            f.prim(false, quick::WRITE, quick::ENV_STACK_HI, quick::RESET_VAL);
            f.prim(false, quick::MOVE, quick::P_STACK_LO, quick::DOWN);
            f.prim(true, quick::MOVE, quick::P_STACK_HI, quick::DOWN);
        }
        return f.take();
    }

    TraceNode compswap() {
        Frame f(env, quick::COMPSWAP);
        if (le()) {
            f.prim(false, quick::SWAP, quick::P_PIVOT, quick::P_J);
            f.prim(true, quick::MOVE, quick::P_PIVOT, quick::UP);
        } else {
            f.ret_nop();
        }
        return f.take();
    }

    TraceNode compswap_loop() {
        Frame f(env, quick::COMPSWAP_LOOP);
        if (mode == Mode::FullRec) {
            if (!j_eq_hi()) {
                f.sub(false, [&] { return compswap(); }, quick::COMPSWAP);
                f.prim(false, quick::MOVE, quick::P_J, quick::UP);
                f.sub(true, [&] { return compswap_loop(); }, quick::COMPSWAP_LOOP);
            } else {
                f.ret_nop();
            }
        } else {
            while (!j_eq_hi()) {
                f.sub(false, [&] { return compswap(); }, quick::COMPSWAP);
                f.prim(false, quick::MOVE, quick::P_J, quick::UP);
            }
            f.ret_nop();
        }
        return f.take();
    }

    TraceNode partition() {
        Frame f(env, quick::PARTITION);
        f.prim(false, quick::SET_PIVOT_LO);
        f.prim(false, quick::SET_J_LO);
        f.sub(false, [&] { return compswap_loop(); }, quick::COMPSWAP_LOOP);
        f.prim(false, quick::SWAP, quick::P_PIVOT, quick::P_HI);
        f.prim(true, quick::SET_J_NULL);
        return f.take();
    }

    TraceNode quicksort() {
        Frame f(env, quick::QUICKSORT);
        if (mode == Mode::FullRec) {
            // entry invariant: the pending-range stacks hold this call's
            // (lo, hi) on top and the registers mirror it
            if (top_lt()) {
                f.sub(false, [&] { return partition(); }, quick::PARTITION);
                f.sub(false, [&] { return stack_op(quick::STACK_PUSH_CALL2); }, quick::STACK,
                      quick::STACK_PUSH_CALL2);
                f.sub(false, [&] { return stack_op(quick::STACK_PUSH_CALL1); }, quick::STACK,
                      quick::STACK_PUSH_CALL1);
                f.prim(false, quick::WRITE, quick::P_HI, quick::ENV_STACK_HI_PEEK);
                f.prim(false, quick::WRITE, quick::P_LO, quick::ENV_STACK_LO_PEEK);
                f.sub(false, [&] { return quicksort(); }, quick::QUICKSORT);
                f.sub(false, [&] { return stack_op(quick::STACK_POP); }, quick::STACK,
                      quick::STACK_POP);
                f.prim(false, quick::WRITE, quick::P_HI, quick::ENV_STACK_HI_PEEK);
                f.prim(false, quick::WRITE, quick::P_LO, quick::ENV_STACK_LO_PEEK);
                f.sub(false, [&] { return quicksort(); }, quick::QUICKSORT);
                f.sub(true, [&] { return stack_op(quick::STACK_POP); }, quick::STACK,
                      quick::STACK_POP);
            } else {
                f.ret_nop();
            }
        } else {
            while (!stacks_empty()) {
                if (top_lt()) {
                    f.prim(false, quick::WRITE, quick::P_HI, quick::ENV_STACK_HI_PEEK);
                    f.prim(false, quick::WRITE, quick::P_LO, quick::ENV_STACK_LO_PEEK);
                    f.sub(false, [&] { return stack_op(quick::STACK_POP); }, quick::STACK,
                          quick::STACK_POP);
                    f.sub(false, [&] { return partition(); }, quick::PARTITION);
                    f.sub(false, [&] { return stack_op(quick::STACK_PUSH_CALL2); }, quick::STACK,
                          quick::STACK_PUSH_CALL2);
                    f.sub(false, [&] { return stack_op(quick::STACK_PUSH_CALL1); }, quick::STACK,
                          quick::STACK_PUSH_CALL1);
                } else {
                    f.sub(false, [&] { return stack_op(quick::STACK_POP); }, quick::STACK,
                          quick::STACK_POP);
                }
            }
            f.ret_nop();
        }
        return f.take();
    }
};

}  // namespace

ProgramCall entry_call(Task task) {
    return ProgramCall{task_spec(task).entry_program, {0, 0, 0}};
}

TraceNode generate_trace(Task task, Mode mode, const Problem& problem, Encoder enc) {
    if (mode == Mode::Partial && task != Task::Bubble) {
        throw UnsupportedMode("partial recursion is only defined for bubble sort");
    }
    TaskEnv env = init_env(task, problem, enc);
    switch (task) {
        case Task::Addition: {
            AdditionGen g{env, mode};
            return g.add();
        }
        case Task::Bubble: {
            BubbleGen g{env, mode};
            return g.bubblesort();
        }
        case Task::Toposort: {
            TopoGen g{env, mode};
            return g.toposort();
        }
        case Task::Quicksort: {
            QuickGen g{env, mode};
            return g.quicksort();
        }
    }
    throw std::logic_error("unknown task");
}

DagProblem five_vertex_dag() {
    return DagProblem{5, {{1, 2}, {1, 5}, {2, 4}, {2, 5}, {3, 5}}};
}

std::vector<TrainingTrace> make_training_set(Task task, Mode mode, uint64_t seed, Encoder enc) {
    std::vector<Problem> problems;
    Rng rng(mix_seed(seed, static_cast<uint64_t>(task), 0x7261636573ull));
    switch (task) {
        case Task::Addition:
            for (int i = 0; i < 200; ++i) {
                int len = rng.uniform_int(1, 3);
                problems.push_back(random_problem(task, len, rng.next()));
            }
            break;
        case Task::Bubble:
            for (int i = 0; i < 100; ++i) {
                int len = rng.uniform_int(1, 2);
                problems.push_back(random_problem(task, len, rng.next()));
            }
            break;
        case Task::Toposort: {
            problems.emplace_back(five_vertex_dag());
            for (int i = 0; i < 5; ++i) {
                problems.push_back(random_problem(task, 7, rng.next()));
            }
            break;
        }
        case Task::Quicksort:
            for (int i = 0; i < 4; ++i) {
                problems.push_back(random_problem(task, 5, rng.next()));
            }
            break;
    }
    std::vector<TrainingTrace> out;
    out.reserve(problems.size());
    for (auto& p : problems) {
        TraceNode t = generate_trace(task, mode, p, enc);
        out.push_back(TrainingTrace{std::move(p), std::move(t)});
    }
    return out;
}

std::vector<TrainingTrace> make_single_digit_addition_set(Mode mode) {
    std::vector<AdditionProblem> sums = {
        {"8", "2"}, {"2", "3"}, {"4", "5"}, {"9", "1"}, {"3", "3"},
    };
    std::vector<TrainingTrace> out;
    for (const auto& s : sums) {
        Problem p = s;
        TraceNode t = generate_trace(Task::Addition, mode, p);
        out.push_back(TrainingTrace{std::move(p), std::move(t)});
    }
    return out;
}

std::vector<TrainingTrace> make_bubble_variant_training_set(Mode mode, uint64_t seed) {
    Rng rng(mix_seed(seed, 0xb0b, 0x7661726961ull));
    std::vector<Problem> problems = {
        random_problem(Task::Bubble, 7, rng.next()),
        random_problem(Task::Bubble, 7, rng.next()),
        random_problem(Task::Bubble, 6, rng.next()),
    };
    std::vector<TrainingTrace> out;
    for (auto& p : problems) {
        TraceNode t = generate_trace(Task::Bubble, mode, p, Encoder::Comparison);
        out.push_back(TrainingTrace{std::move(p), std::move(t)});
    }
    return out;
}

}  // namespace npi
