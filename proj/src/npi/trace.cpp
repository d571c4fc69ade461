#include "npi/trace.hpp"

#include <sstream>

namespace npi {

int TraceNode::count_calls() const {
    int n = 1;
    for (const auto& s : steps) {
        if (s.child) n += s.child->count_calls();
    }
    return n;
}

int TraceNode::max_body_steps() const {
    int n = static_cast<int>(steps.size());
    for (const auto& s : steps) {
        if (s.child) n = std::max(n, s.child->max_body_steps());
    }
    return n;
}

int TraceNode::max_depth() const {
    int d = 1;
    for (const auto& s : steps) {
        if (s.child) d = std::max(d, 1 + s.child->max_depth());
    }
    return d;
}

namespace {

void flatten_into(const TraceNode& node, int trace_id, int parent, int depth,
                  std::vector<FlatRecord>& out, int& next_id) {
    const int my_id = next_id++;
    for (size_t i = 0; i < node.steps.size(); ++i) {
        const TraceStep& s = node.steps[i];
        FlatRecord r;
        r.trace_id = trace_id;
        r.call_id = my_id;
        r.parent_call_id = parent;
        r.depth = depth;
        r.step = static_cast<int>(i);
        r.call = node.call;
        r.obs = s.obs;
        r.out = s.out;
        out.push_back(std::move(r));
        if (s.child) flatten_into(*s.child, trace_id, my_id, depth + 1, out, next_id);
    }
}

struct ReplayError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void replay_node(const TaskSpec& spec, TaskEnv& env, const TraceNode& node, bool strict) {
    if (node.steps.empty()) throw ReplayError("call with no steps");
    for (size_t i = 0; i < node.steps.size(); ++i) {
        const TraceStep& s = node.steps[i];
        if (strict && !(observe(env) == s.obs)) {
            throw ReplayError("recorded observation diverges from replay");
        }
        const bool last = i + 1 == node.steps.size();
        if (s.out.ret != last) throw ReplayError("ret flag must mark exactly the last step");
        const bool prim = spec.is_primitive(s.out.next.prog);
        if (prim != !s.child) throw ReplayError("child node exactly under subprogram steps");
        if (prim) {
            apply_primitive(env, s.out.next);
        } else {
            if (!(s.child->call == s.out.next)) {
                throw ReplayError("child call does not match step output");
            }
            replay_node(spec, env, *s.child, strict);
        }
    }
}

void collect_primitives(const TraceNode& node, std::vector<ProgramCall>& out) {
    for (const auto& s : node.steps) {
        if (s.child) {
            collect_primitives(*s.child, out);
        } else if (s.out.next.prog != kNop) {
            out.push_back(s.out.next);
        }
    }
}

void format_node(const TaskSpec& spec, const TraceNode& node, int depth, int& budget,
                 std::ostringstream& os) {
    for (const auto& s : node.steps) {
        if (budget == 0) return;
        if (budget > 0) --budget;
        os << std::string(static_cast<size_t>(depth) * 2, ' ') << spec.prog_name(s.out.next.prog);
        for (int a : s.out.next.args) {
            if (a != 0) os << ' ' << spec.arg_name(a);
        }
        if (s.out.ret) os << "  .";
        os << '\n';
        if (s.child) format_node(spec, *s.child, depth + 1, budget, os);
    }
}

}  // namespace

std::vector<FlatRecord> flatten_trace(const TraceNode& trace, int trace_id) {
    std::vector<FlatRecord> out;
    int next_id = 0;
    flatten_into(trace, trace_id, -1, 0, out, next_id);
    return out;
}

TaskEnv replay_trace(Task task, Encoder enc, const Problem& problem, const TraceNode& trace,
                     bool strict) {
    TaskEnv env = init_env(task, problem, enc);
    replay_node(task_spec(task), env, trace, strict);
    return env;
}

bool validate_trace(Task task, Encoder enc, const TraceNode& trace, const Problem& problem,
                    std::string* why) {
    try {
        TaskEnv env = replay_trace(task, enc, problem, trace, /*strict=*/true);
        if (!check_result(problem, extract_result(env))) {
            if (why) *why = "replayed result is incorrect";
            return false;
        }
        return true;
    } catch (const std::exception& ex) {
        if (why) *why = ex.what();
        return false;
    }
}

std::vector<ProgramCall> primitive_sequence(const TraceNode& trace) {
    // primitive steps are exactly the childless ones; NOPs are skipped
    std::vector<ProgramCall> out;
    collect_primitives(trace, out);
    return out;
}

std::string format_trace(Task task, const TraceNode& trace, int max_lines) {
    const TaskSpec& spec = task_spec(task);
    std::ostringstream os;
    os << spec.prog_name(trace.call.prog);
    for (int a : trace.call.args) {
        if (a != 0) os << ' ' << spec.arg_name(a);
    }
    os << '\n';
    int budget = max_lines;
    format_node(spec, trace, 1, budget, os);
    return os.str();
}

}  // namespace npi
