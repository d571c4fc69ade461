#include "npi/env.hpp"

#include <algorithm>
#include <sstream>

namespace npi {

namespace {

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

// ---------------------------------------------------------------- addition

uint8_t add_cell(const AdditionEnv& e, int row, int col) {
    if (col < 1 || col > e.width) return kEndTok;
    return e.pad[row][col];
}

TaskEnv init_addition(const AdditionProblem& p) {
    AdditionEnv e;
    const int len = static_cast<int>(p.a.size());
    e.width = len + 1;
    for (auto& row : e.pad) row.assign(e.width + 1, kEndTok);  // index 0 unused
    for (int i = 0; i < len; ++i) {
        e.pad[0][2 + i] = static_cast<uint8_t>(p.a[i] - '0');
        e.pad[1][2 + i] = static_cast<uint8_t>(p.b[i] - '0');
    }
    e.cursor.fill(e.width);  // least-significant column
    return e;
}

Observation observe_addition(const AdditionEnv& e) {
    Observation o;
    for (int row = 0; row < 4; ++row) {
        o.slots.push_back(add_cell(e, row, e.cursor[row]));
    }
    return o;
}

void apply_addition(AdditionEnv& e, const ProgramCall& call) {
    switch (call.prog) {
        case add::WRITE: {
            int row = call.args[0] == add::CARRY_ROW ? 2 : 3;
            int col = e.cursor[row];
            if (col >= 1 && col <= e.width) {
                e.pad[row][col] = static_cast<uint8_t>(call.args[1] - add::D0);
            }
            return;
        }
        case add::PTR: {
            int row = call.args[0] - add::INP1;
            int delta = call.args[1] == add::LEFT ? -1 : 1;
            e.cursor[row] = clampi(e.cursor[row] + delta, 0, e.width + 1);
            return;
        }
        default:
            return;  // NOP
    }
}

// ------------------------------------------------------------------ bubble

int bubble_cell(const BubbleEnv& e, int idx) {
    if (idx < 1 || idx > static_cast<int>(e.row.size())) return kEndTok;
    return e.row[idx - 1];
}

bool bubble_in_bounds(const BubbleEnv& e, int idx) {
    return idx >= 1 && idx <= static_cast<int>(e.row.size());
}

TaskEnv init_bubble(const ArrayProblem& p, Encoder enc) {
    BubbleEnv e;
    e.row = p.values;
    e.encoder = enc;
    return e;  // both bubble pointers on the first element, pass counter 0
}

Observation observe_bubble(const BubbleEnv& e) {
    const int n = static_cast<int>(e.row.size());
    Observation o;
    if (e.encoder == Encoder::Values) {
        o.slots.push_back(static_cast<uint8_t>(bubble_cell(e, e.i1)));
        o.slots.push_back(static_cast<uint8_t>(bubble_cell(e, e.i2)));
        o.slots.push_back(e.i3 == n ? 1 : 0);
    } else {
        bool in1 = bubble_in_bounds(e, e.i1);
        bool in2 = bubble_in_bounds(e, e.i2);
        bool le = in1 && in2 && e.row[e.i1 - 1] <= e.row[e.i2 - 1];
        o.slots = {static_cast<uint8_t>(le), static_cast<uint8_t>(in1),
                   static_cast<uint8_t>(in2), static_cast<uint8_t>(e.i3 == n)};
    }
    return o;
}

void apply_bubble(BubbleEnv& e, const ProgramCall& call) {
    const int n = static_cast<int>(e.row.size());
    switch (call.prog) {
        case bub::SWAP:
            if (bubble_in_bounds(e, e.i1) && bubble_in_bounds(e, e.i2)) {
                std::swap(e.row[e.i1 - 1], e.row[e.i2 - 1]);
            }
            return;
        case bub::PTR: {
            int delta = call.args[1] == bub::LEFT ? -1 : 1;
            switch (call.args[0]) {
                case bub::P1: e.i1 = clampi(e.i1 + delta, 0, n + 1); return;
                case bub::P2: e.i2 = clampi(e.i2 + delta, 0, n + 1); return;
                case bub::P3: e.i3 = clampi(e.i3 + delta, 0, n); return;
            }
            return;
        }
        default:
            return;  // NOP
    }
}

// ---------------------------------------------------------------- toposort

int topo_n(const TopoEnv& e) { return static_cast<int>(e.color.size()) - 1; }

uint8_t topo_color_at(const TopoEnv& e, int v) {
    if (v < 1 || v > topo_n(e)) return kInvalidColor;
    return e.color[v];
}

// vertex under childList[v], or 0 when the cursor ran past the child list
int topo_current_child(const TopoEnv& e, int v) {
    if (v < 1 || v > topo_n(e)) return 0;
    int c = e.child_cursor[v];
    if (c < 1 || c > static_cast<int>(e.adj[v].size())) return 0;
    return e.adj[v][c - 1];
}

TaskEnv init_toposort(const DagProblem& p) {
    TopoEnv e;
    e.adj.assign(p.n + 1, {});
    for (auto [u, v] : p.edges) e.adj[u].push_back(v);
    for (auto& kids : e.adj) std::sort(kids.begin(), kids.end());
    e.color.assign(p.n + 1, kWhite);
    e.color[0] = kInvalidColor;
    e.result.assign(p.n + 1, 0);
    e.stack.assign(p.n + 2, 0);
    e.child_cursor.assign(p.n + 1, 1);
    return e;
}

Observation observe_toposort(const TopoEnv& e) {
    Observation o;
    o.slots.push_back(topo_color_at(e, e.p_start));
    o.slots.push_back(topo_color_at(e, topo_current_child(e, e.v_active)));
    o.slots.push_back(e.p_stack == 1 ? 1 : 0);
    return o;
}

void apply_toposort(TopoEnv& e, const ProgramCall& call) {
    const int n = topo_n(e);
    switch (call.prog) {
        case topo::WRITE: {
            uint8_t color = call.args[1] == topo::COLOR_BLACK ? kBlack : kGrey;
            switch (call.args[0]) {
                case topo::COLOR_CURR:
                    if (e.v_active >= 1 && e.v_active <= n) e.color[e.v_active] = color;
                    return;
                case topo::COLOR_NEXT: {
                    int child = topo_current_child(e, e.v_active);
                    if (child >= 1) e.color[child] = color;
                    return;
                }
                case topo::ACTIVE_START:
                    e.v_active = e.p_start;
                    return;
                case topo::ACTIVE_NEIGHB: {
                    int child = topo_current_child(e, e.v_active);
                    if (child >= 1) e.v_active = child;
                    return;
                }
                case topo::ACTIVE_STACK:
                    // top element lives one below the next-empty slot
                    if (e.p_stack > 1) e.v_active = e.stack[e.p_stack - 1];
                    return;
                case topo::SAVE:
                    e.v_save = e.v_active;
                    return;
                case topo::STACK_PUSH:
                    if (e.p_stack <= n + 1) e.stack[e.p_stack] = e.v_active;
                    return;
                case topo::STACK_POP:
                    if (e.p_stack > 1) e.stack[e.p_stack - 1] = 0;
                    return;
                case topo::RESULT:
                    if (e.p_result <= n) e.result[e.p_result] = e.v_active;
                    return;
            }
            return;
        }
        case topo::MOVE: {
            int delta = call.args[1] == topo::UP ? 1 : -1;
            switch (call.args[0]) {
                case topo::P_RESULT: e.p_result = clampi(e.p_result + delta, 1, n + 1); return;
                case topo::P_STACK: e.p_stack = clampi(e.p_stack + delta, 1, n + 1); return;
                case topo::P_START: e.p_start = clampi(e.p_start + delta, 1, n + 1); return;
                case topo::CHILD_ACTIVE:
                case topo::CHILD_SAVE: {
                    int v = call.args[0] == topo::CHILD_ACTIVE ? e.v_active : e.v_save;
                    if (v >= 1 && v <= n) {
                        int deg = static_cast<int>(e.adj[v].size());
                        e.child_cursor[v] = clampi(e.child_cursor[v] + delta, 1, deg + 1);
                    }
                    return;
                }
            }
            return;
        }
        default:
            return;  // NOP
    }
}

// --------------------------------------------------------------- quicksort

int quick_cell(const QuickEnv& e, int idx) {
    if (idx == kSentinel || idx < 1 || idx > static_cast<int>(e.array.size())) {
        return kSentinel;
    }
    return e.array[idx - 1];
}

int quick_peek(const std::vector<int>& stack, int p) {
    int idx = p - 1;
    if (idx < 1 || idx >= static_cast<int>(stack.size())) return kSentinel;
    return stack[idx];
}

TaskEnv init_quicksort(const ArrayProblem& p) {
    QuickEnv e;
    e.array = p.values;
    const int n = static_cast<int>(p.values.size());
    const int cap = 2 * n + 8;
    e.stack_lo.assign(cap, kSentinel);
    e.stack_hi.assign(cap, kSentinel);
    e.p_hi = n;
    // the pending range stacks start holding the whole-array range (1, n),
    // which is what the entry call's observation reads
    e.stack_lo[1] = 1;
    e.stack_hi[1] = n;
    e.p_stack_lo = e.p_stack_hi = 2;
    return e;
}

Observation observe_quicksort(const QuickEnv& e) {
    int aj = quick_cell(e, e.p_j);
    int ahi = quick_cell(e, e.p_hi);
    bool le = aj != kSentinel && ahi != kSentinel && aj <= ahi;
    bool j_eq_hi = e.p_j == e.p_hi;
    int top_lo = quick_peek(e.stack_lo, e.p_stack_lo);
    int top_hi = quick_peek(e.stack_hi, e.p_stack_hi);
    bool lt = top_lo < top_hi;
    bool empty = e.p_stack_lo == 1;
    Observation o;
    o.slots = {static_cast<uint8_t>(le), static_cast<uint8_t>(j_eq_hi),
               static_cast<uint8_t>(lt), static_cast<uint8_t>(empty)};
    return o;
}

void apply_quicksort(QuickEnv& e, const ProgramCall& call) {
    const int n = static_cast<int>(e.array.size());
    const int cap = static_cast<int>(e.stack_lo.size());
    auto move_ptr = [&](int& p, int delta, int lo, int hi) {
        if (p == kSentinel) return;
        p = clampi(p + delta, lo, hi);
    };
    switch (call.prog) {
        case quick::SET_PIVOT_LO: e.p_pivot = e.p_lo; return;
        case quick::SET_J_LO: e.p_j = e.p_lo; return;
        case quick::SET_J_NULL: e.p_j = kSentinel; return;
        case quick::SWAP: {
            int other = call.args[1] == quick::P_HI ? e.p_hi : e.p_j;
            if (e.p_pivot >= 1 && e.p_pivot <= n && other != kSentinel && other >= 1 &&
                other <= n) {
                std::swap(e.array[e.p_pivot - 1], e.array[other - 1]);
            }
            return;
        }
        case quick::MOVE: {
            int delta = call.args[1] == quick::UP ? 1 : -1;
            switch (call.args[0]) {
                case quick::P_STACK_LO: move_ptr(e.p_stack_lo, delta, 1, cap - 1); return;
                case quick::P_STACK_HI: move_ptr(e.p_stack_hi, delta, 1, cap - 1); return;
                case quick::P_J:
                    if (e.p_j != kSentinel) e.p_j += delta;
                    return;
                case quick::P_PIVOT: e.p_pivot += delta; return;
            }
            return;
        }
        case quick::WRITE: {
            int value = 0;
            switch (call.args[1]) {
                case quick::ENV_STACK_LO_PEEK: value = quick_peek(e.stack_lo, e.p_stack_lo); break;
                case quick::ENV_STACK_HI_PEEK: value = quick_peek(e.stack_hi, e.p_stack_hi); break;
                case quick::P_HI: value = e.p_hi; break;
                case quick::P_LO: value = e.p_lo; break;
                case quick::P_PIVOT_M1: value = e.p_pivot - 1; break;
                case quick::P_PIVOT_P1: value = e.p_pivot + 1; break;
                case quick::RESET_VAL: value = kSentinel; break;
            }
            switch (call.args[0]) {
                case quick::ENV_STACK_LO:
                    if (e.p_stack_lo >= 1 && e.p_stack_lo < cap) e.stack_lo[e.p_stack_lo] = value;
                    return;
                case quick::ENV_STACK_HI:
                    if (e.p_stack_hi >= 1 && e.p_stack_hi < cap) e.stack_hi[e.p_stack_hi] = value;
                    return;
                case quick::P_HI: e.p_hi = value; return;
                case quick::P_LO: e.p_lo = value; return;
            }
            return;
        }
        default:
            return;  // NOP
    }
}

}  // namespace

TaskEnv init_env(Task task, const Problem& problem, Encoder enc) {
    validate_problem(task, problem);
    switch (task) {
        case Task::Addition: return init_addition(std::get<AdditionProblem>(problem));
        case Task::Bubble: return init_bubble(std::get<ArrayProblem>(problem), enc);
        case Task::Toposort: return init_toposort(std::get<DagProblem>(problem));
        case Task::Quicksort: return init_quicksort(std::get<ArrayProblem>(problem));
    }
    throw RejectedInput("unknown task");
}

Observation observe(const TaskEnv& env) {
    return std::visit(
        [](const auto& e) -> Observation {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, AdditionEnv>) return observe_addition(e);
            if constexpr (std::is_same_v<T, BubbleEnv>) return observe_bubble(e);
            if constexpr (std::is_same_v<T, TopoEnv>) return observe_toposort(e);
            if constexpr (std::is_same_v<T, QuickEnv>) return observe_quicksort(e);
        },
        env);
}

void apply_primitive(TaskEnv& env, const ProgramCall& call) {
    const TaskSpec& spec = task_spec(env_task(env));
    if (call.prog < 0 || call.prog >= spec.program_count() || !spec.is_primitive(call.prog)) {
        throw DispatchError("apply_primitive: not a primitive of this task");
    }
    if (!spec.valid_primitive_args(call)) {
        throw InvalidArgument("apply_primitive: argument not in the primitive's table");
    }
    std::visit(
        [&](auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, AdditionEnv>) apply_addition(e, call);
            if constexpr (std::is_same_v<T, BubbleEnv>) apply_bubble(e, call);
            if constexpr (std::is_same_v<T, TopoEnv>) apply_toposort(e, call);
            if constexpr (std::is_same_v<T, QuickEnv>) apply_quicksort(e, call);
        },
        env);
}

Result extract_result(const TaskEnv& env) {
    if (const auto* a = std::get_if<AdditionEnv>(&env)) {
        std::string out;
        for (int col = 1; col <= a->width; ++col) {
            uint8_t c = a->pad[3][col];
            if (c != kEndTok) out.push_back(static_cast<char>('0' + c));
        }
        if (out.empty()) out = "0";
        return out;
    }
    if (const auto* b = std::get_if<BubbleEnv>(&env)) return b->row;
    if (const auto* q = std::get_if<QuickEnv>(&env)) return q->array;
    const auto& t = std::get<TopoEnv>(env);
    std::vector<int> order;
    for (int i = t.p_result - 1; i >= 1; --i) order.push_back(t.result[i]);
    return order;
}

bool check_result(const Problem& problem, const Result& result) {
    if (const auto* p = std::get_if<AdditionProblem>(&problem)) {
        // digit-wise big-number reference adder
        const std::string& a = p->a;
        const std::string& b = p->b;
        std::string sum;
        int carry = 0;
        int i = static_cast<int>(a.size()) - 1;
        int j = static_cast<int>(b.size()) - 1;
        while (i >= 0 || j >= 0 || carry) {
            int s = carry;
            if (i >= 0) s += a[i--] - '0';
            if (j >= 0) s += b[j--] - '0';
            sum.push_back(static_cast<char>('0' + s % 10));
            carry = s / 10;
        }
        std::reverse(sum.begin(), sum.end());
        size_t nz = sum.find_first_not_of('0');
        sum = nz == std::string::npos ? "0" : sum.substr(nz);
        const auto* r = std::get_if<std::string>(&result);
        return r && *r == sum;
    }
    if (const auto* arr = std::get_if<ArrayProblem>(&problem)) {
        std::vector<int> want = arr->values;
        std::sort(want.begin(), want.end());
        const auto* r = std::get_if<std::vector<int>>(&result);
        return r && *r == want;
    }
    const auto& dag = std::get<DagProblem>(problem);
    const auto* r = std::get_if<std::vector<int>>(&result);
    if (!r || static_cast<int>(r->size()) != dag.n) return false;
    std::vector<int> pos(dag.n + 1, -1);
    for (int i = 0; i < dag.n; ++i) {
        int v = (*r)[i];
        if (v < 1 || v > dag.n || pos[v] != -1) return false;
        pos[v] = i;
    }
    for (auto [u, v] : dag.edges) {
        if (pos[u] >= pos[v]) return false;
    }
    return true;
}

Task env_task(const TaskEnv& env) {
    if (std::holds_alternative<AdditionEnv>(env)) return Task::Addition;
    if (std::holds_alternative<BubbleEnv>(env)) return Task::Bubble;
    if (std::holds_alternative<TopoEnv>(env)) return Task::Toposort;
    return Task::Quicksort;
}

Encoder env_encoder(const TaskEnv& env) {
    if (const auto* b = std::get_if<BubbleEnv>(&env)) return b->encoder;
    return Encoder::Values;
}

std::string observation_brief(Task task, Encoder enc, const Observation& obs) {
    std::ostringstream os;
    const auto arity = task_spec(task).obs_arity(enc);
    os << "(";
    for (size_t i = 0; i < obs.slots.size(); ++i) {
        if (i) os << ",";
        int v = obs.slots[i];
        if (i < arity.size() && arity[i] == 2) {
            os << (v ? "T" : "F");
        } else if (task == Task::Toposort) {
            os << "WGBI"[v % 4];
        } else if (v == kEndTok) {
            os << "E";
        } else {
            os << v;
        }
    }
    os << ")";
    return os.str();
}

}  // namespace npi
