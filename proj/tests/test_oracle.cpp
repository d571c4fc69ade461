#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "npi/oracle.hpp"
#include "npi/trace_io.hpp"

using namespace npi;

namespace {

std::vector<std::string> opening_ops(Task task, const TraceNode& t, size_t n) {
    // depth-first action names, the order a trace listing prints them
    const TaskSpec& spec = task_spec(task);
    std::vector<std::string> out;
    for (const FlatRecord& r : flatten_trace(t)) {
        if (out.size() >= n) break;
        std::string s = spec.prog_name(r.out.next.prog);
        for (int a : r.out.next.args) {
            if (a != 0) s += " " + spec.arg_name(a);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

TEST_CASE("full recursive addition trace opens like the worked example") {
    // single column summing to 1, no carry
    TraceNode t = generate_trace(Task::Addition, Mode::FullRec, AdditionProblem{"1", "0"});
    auto ops = opening_ops(Task::Addition, t, 9);
    std::vector<std::string> want = {
        "ADD1", "WRITE OUT 1", "LSHIFT", "PTR INP1 LEFT", "PTR INP2 LEFT",
        "PTR CARRY LEFT", "PTR OUT LEFT", "ADD", "NOP"};
    CHECK(ops == want);
    CHECK(validate_trace(Task::Addition, Encoder::Values, t, AdditionProblem{"1", "0"}));
}

TEST_CASE("carry subprogram emits the pointer/write/pointer triple") {
    TraceNode t = generate_trace(Task::Addition, Mode::FullRec, AdditionProblem{"5", "6"});
    auto ops = opening_ops(Task::Addition, t, 6);
    std::vector<std::string> want = {"ADD1",           "WRITE OUT 1",     "CARRY",
                                     "PTR CARRY LEFT", "WRITE CARRY 1",   "PTR CARRY RIGHT"};
    CHECK(ops == want);
}

TEST_CASE("full recursive bubble trace opens like the figure") {
    TraceNode t = generate_trace(Task::Bubble, Mode::FullRec, ArrayProblem{{3, 2}});
    auto ops = opening_ops(Task::Bubble, t, 6);
    std::vector<std::string> want = {"BUBBLE", "PTR 2 RIGHT", "BSTEP",
                                     "COMPSWAP", "SWAP 1 2", "RSHIFT"};
    CHECK(ops == want);
}

TEST_CASE("partial recursion only for bubble sort") {
    CHECK_THROWS_AS(generate_trace(Task::Addition, Mode::Partial, AdditionProblem{"1", "2"}),
                    UnsupportedMode);
    CHECK_NOTHROW(generate_trace(Task::Bubble, Mode::Partial, ArrayProblem{{3, 2}}));
}

TEST_CASE("bubble partial vs full differ only in call structure") {
    ArrayProblem p{{4, 1, 3}};
    TraceNode partial = generate_trace(Task::Bubble, Mode::Partial, p);
    TraceNode full = generate_trace(Task::Bubble, Mode::FullRec, p);
    TraceNode nonrec = generate_trace(Task::Bubble, Mode::NonRec, p);
    CHECK(primitive_sequence(partial) == primitive_sequence(full));
    CHECK(primitive_sequence(nonrec) == primitive_sequence(full));
    CHECK(validate_trace(Task::Bubble, Encoder::Values, partial, p));
    CHECK(validate_trace(Task::Bubble, Encoder::Values, full, p));
}

TEST_CASE("quicksort partition on [3,1,2] leaves pivot at index 2") {
    ArrayProblem p{{3, 1, 2}};
    TraceNode t = generate_trace(Task::Quicksort, Mode::FullRec, p);
    CHECK(validate_trace(Task::Quicksort, Encoder::Values, t, p));
    // find the first PARTITION child: QUICKSORT step 0
    REQUIRE(!t.steps.empty());
    const TraceNode* part = t.steps[0].child.get();
    REQUIRE(part != nullptr);
    auto ops = opening_ops(Task::Quicksort, *part, 20);
    REQUIRE(ops.size() >= 1);
    CHECK(ops[0] == "SET_PIVOT_LO");
    CHECK(ops[1] == "SET_J_LO");
    // one conditional swap inside the loop, then the final pivot/hi swap
    int swaps = 0;
    for (const auto& s : ops) {
        if (s.rfind("SWAP", 0) == 0) swaps++;
    }
    CHECK(swaps == 2);
    TaskEnv env = replay_trace(Task::Quicksort, Encoder::Values, p, t);
    CHECK(std::get<QuickEnv>(env).array == std::vector<int>{1, 2, 3});
}

TEST_CASE("toposort oracle writes the worked result for the five-vertex graph") {
    DagProblem p = five_vertex_dag();
    TraceNode t = generate_trace(Task::Toposort, Mode::FullRec, p);
    TaskEnv env = replay_trace(Task::Toposort, Encoder::Values, p, t);
    const auto& e = std::get<TopoEnv>(env);
    std::vector<int> written(e.result.begin() + 1, e.result.begin() + 6);
    CHECK(written == std::vector<int>{4, 5, 2, 1, 3});
    Result r = extract_result(env);
    CHECK(std::get<std::vector<int>>(r) == std::vector<int>{3, 1, 2, 5, 4});
    CHECK(check_result(p, r));
}

TEST_CASE("toposort primitive sequences agree between modes") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Problem p = random_problem(Task::Toposort, 3 + static_cast<int>(seed % 6), seed * 77 + 5);
        TraceNode a = generate_trace(Task::Toposort, Mode::NonRec, p);
        TraceNode b = generate_trace(Task::Toposort, Mode::FullRec, p);
        REQUIRE(primitive_sequence(a) == primitive_sequence(b));
    }
}

TEST_CASE("oracle traces replay to correct results across tasks") {
    for (Task task : {Task::Addition, Task::Bubble, Task::Toposort, Task::Quicksort}) {
        for (uint64_t seed = 0; seed < 50; ++seed) {
            int size = 1 + static_cast<int>(seed % 8);
            Problem p = random_problem(task, size, mix_seed(seed, 11, static_cast<int>(task)));
            for (Mode mode : {Mode::NonRec, Mode::FullRec}) {
                TraceNode t = generate_trace(task, mode, p);
                std::string why;
                bool ok = validate_trace(task, Encoder::Values, t, p, &why);
                CAPTURE(task_name(task));
                CAPTURE(seed);
                CAPTURE(why);
                REQUIRE(ok);
            }
        }
    }
}

TEST_CASE("full recursion bounds the steps of every call body") {
    // measure the bound on small problems, then require it at 10x size
    for (Task task : {Task::Addition, Task::Bubble, Task::Toposort, Task::Quicksort}) {
        int small_bound = 0;
        for (uint64_t seed = 0; seed < 10; ++seed) {
            Problem p = random_problem(task, 4, mix_seed(seed, 21, static_cast<int>(task)));
            TraceNode t = generate_trace(task, Mode::FullRec, p);
            small_bound = std::max(small_bound, t.max_body_steps());
        }
        for (uint64_t seed = 0; seed < 5; ++seed) {
            Problem p = random_problem(task, 40, mix_seed(seed, 22, static_cast<int>(task)));
            TraceNode t = generate_trace(task, Mode::FullRec, p);
            CAPTURE(task_name(task));
            CHECK(t.max_body_steps() <= small_bound);
        }
    }
}

TEST_CASE("non-recursive top-level bodies grow with input length") {
    auto body_len = [](Task task, const Problem& p) {
        TraceNode t = generate_trace(task, Mode::NonRec, p);
        return static_cast<int>(t.steps.size());
    };
    int add_small = body_len(Task::Addition, AdditionProblem{"12", "34"});
    int add_big = body_len(Task::Addition, AdditionProblem{"1234567890", "2345678901"});
    CHECK(add_big > add_small);
    int bub_small = body_len(Task::Bubble, ArrayProblem{{2, 1}});
    int bub_big = body_len(Task::Bubble, ArrayProblem{{9, 8, 7, 6, 5, 4, 3, 2, 1, 0}});
    CHECK(bub_big > bub_small);
}

TEST_CASE("flatten_trace structure") {
    TraceNode t = generate_trace(Task::Bubble, Mode::FullRec, ArrayProblem{{3, 2}});
    auto flat = flatten_trace(t, 7);
    // every call contributes exactly one ret=1 record, as its last step
    std::map<int, int> last_step, rets;
    for (const auto& r : flat) {
        CHECK(r.trace_id == 7);
        last_step[r.call_id] = std::max(last_step[r.call_id], r.step);
        if (r.out.ret) rets[r.call_id] = r.step;
    }
    CHECK(last_step.size() == rets.size());
    for (auto& [id, s] : last_step) CHECK(rets[id] == s);
    CHECK(static_cast<int>(last_step.size()) == t.count_calls());
}

TEST_CASE("validate_trace rejects a missing ret flag") {
    TraceNode t = generate_trace(Task::Bubble, Mode::FullRec, ArrayProblem{{2, 1}});
    t.steps.back().out.ret = false;
    std::string why;
    CHECK_FALSE(validate_trace(Task::Bubble, Encoder::Values, t, ArrayProblem{{2, 1}}, &why));
    CHECK(why.find("ret") != std::string::npos);
}

TEST_CASE("training sets reproduce the paper's cardinalities") {
    auto add = make_training_set(Task::Addition, Mode::FullRec, 0);
    CHECK(add.size() == 200);
    bool has3 = false;
    for (const auto& t : add) {
        size_t len = std::get<AdditionProblem>(t.problem).a.size();
        CHECK(len <= 3);
        has3 = has3 || len == 3;
    }
    CHECK(has3);

    auto bub = make_training_set(Task::Bubble, Mode::FullRec, 0);
    CHECK(bub.size() == 100);
    for (const auto& t : bub) CHECK(std::get<ArrayProblem>(t.problem).values.size() <= 2);

    auto topo = make_training_set(Task::Toposort, Mode::FullRec, 0);
    CHECK(topo.size() == 6);
    CHECK(std::get<DagProblem>(topo[0].problem).n == 5);
    for (size_t i = 1; i < topo.size(); ++i) {
        CHECK(std::get<DagProblem>(topo[i].problem).n == 7);
    }

    auto quick = make_training_set(Task::Quicksort, Mode::FullRec, 0);
    CHECK(quick.size() == 4);
    for (const auto& t : quick) CHECK(std::get<ArrayProblem>(t.problem).values.size() == 5);
}

TEST_CASE("same seed gives byte-identical trace files") {
    std::ostringstream a, b;
    for (int round = 0; round < 2; ++round) {
        auto set = make_training_set(Task::Quicksort, Mode::FullRec, 42);
        std::ostringstream& os = round == 0 ? a : b;
        for (size_t i = 0; i < set.size(); ++i) {
            write_trace_jsonl(os, Task::Quicksort, set[i].trace, static_cast<int>(i));
        }
    }
    CHECK(a.str() == b.str());
    // problems are shared across modes
    auto full = make_training_set(Task::Bubble, Mode::FullRec, 9);
    auto nonrec = make_training_set(Task::Bubble, Mode::NonRec, 9);
    REQUIRE(full.size() == nonrec.size());
    for (size_t i = 0; i < full.size(); ++i) CHECK(full[i].problem == nonrec[i].problem);
}

TEST_CASE("trace jsonl round trip") {
    auto set = make_training_set(Task::Toposort, Mode::FullRec, 3);
    std::ostringstream os;
    for (size_t i = 0; i < set.size(); ++i) {
        write_trace_jsonl(os, Task::Toposort, set[i].trace, static_cast<int>(i));
    }
    std::string path = "toposort_roundtrip.jsonl";
    {
        std::ofstream f(path);
        f << os.str();
    }
    auto records = read_traces_file(path, Task::Toposort);
    size_t want = 0;
    for (size_t i = 0; i < set.size(); ++i) want += flatten_trace(set[i].trace).size();
    CHECK(records.size() == want);
    std::remove(path.c_str());
}
