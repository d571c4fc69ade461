#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "npi/env.hpp"
#include "npi/oracle.hpp"

using namespace npi;

TEST_CASE("addition env init and observation") {
    TaskEnv env = init_env(Task::Addition, AdditionProblem{"109", "101"});
    auto& e = std::get<AdditionEnv>(env);
    CHECK(e.width == 4);  // digit length + 1
    // cursors at the least-significant column
    for (int c : e.cursor) CHECK(c == 4);
    Observation o = observe(env);
    CHECK(o.slots == std::vector<uint8_t>{9, 1, kEndTok, kEndTok});

    // all four cursors past the left end observe the end token
    for (int row = 0; row < 4; ++row) {
        for (int k = 0; k < 5; ++k) {
            apply_primitive(env, {add::PTR, {add::INP1 + row, add::LEFT, 0}});
        }
    }
    o = observe(env);
    CHECK(o.slots == std::vector<uint8_t>{kEndTok, kEndTok, kEndTok, kEndTok});
}

TEST_CASE("addition write targets the row cursor") {
    TaskEnv env = init_env(Task::Addition, AdditionProblem{"4", "7"});
    apply_primitive(env, {add::WRITE, {add::OUT, add::digit_arg(1), 0}});
    auto& e = std::get<AdditionEnv>(env);
    CHECK(e.pad[3][2] == 1);
    // frame property: nothing else moved
    CHECK(e.pad[0][2] == 4);
    CHECK(e.pad[1][2] == 7);
    CHECK(e.cursor == std::array<int, 4>{2, 2, 2, 2});
}

TEST_CASE("addition rejects malformed problems") {
    CHECK_THROWS_AS(init_env(Task::Addition, AdditionProblem{"12", "1"}), RejectedInput);
    CHECK_THROWS_AS(init_env(Task::Addition, AdditionProblem{"01", "11"}), RejectedInput);
    CHECK_THROWS_AS(init_env(Task::Addition, AdditionProblem{"1a", "11"}), RejectedInput);
}

TEST_CASE("bubble env init and swap") {
    TaskEnv env = init_env(Task::Bubble, ArrayProblem{{3, 2}});
    auto& e = std::get<BubbleEnv>(env);
    CHECK(e.i1 == 1);
    CHECK(e.i2 == 1);  // both bubble pointers start on the first element
    CHECK(e.i3 == 0);
    apply_primitive(env, {bub::PTR, {bub::P2, bub::RIGHT, 0}});
    apply_primitive(env, {bub::SWAP, {bub::P1, bub::P2, 0}});
    CHECK(std::get<BubbleEnv>(env).row == std::vector<int>{2, 3});
}

TEST_CASE("bubble out-of-bounds reads give the boundary token") {
    TaskEnv env = init_env(Task::Bubble, ArrayProblem{{5}});
    apply_primitive(env, {bub::PTR, {bub::P2, bub::RIGHT, 0}});
    Observation o = observe(env);
    CHECK(o.slots[0] == 5);
    CHECK(o.slots[1] == kEndTok);
    // swap with an out-of-bounds pointer is a no-op
    apply_primitive(env, {bub::SWAP, {bub::P1, bub::P2, 0}});
    CHECK(std::get<BubbleEnv>(env).row == std::vector<int>{5});
}

TEST_CASE("bubble comparison encoder observation") {
    TaskEnv env = init_env(Task::Bubble, ArrayProblem{{3, 2}}, Encoder::Comparison);
    apply_primitive(env, {bub::PTR, {bub::P2, bub::RIGHT, 0}});
    Observation o = observe(env);
    // 3 <= 2 false, both in bounds, pass counter not done
    CHECK(o.slots == std::vector<uint8_t>{0, 1, 1, 0});
}

TEST_CASE("toposort env init matches the five-vertex graph example") {
    TaskEnv env = init_env(Task::Toposort, five_vertex_dag());
    auto& e = std::get<TopoEnv>(env);
    CHECK(e.p_start == 1);
    CHECK(e.v_active == 1);
    CHECK(e.child_cursor[1] == 1);
    for (int v = 1; v <= 5; ++v) CHECK(e.color[v] == kWhite);
    Observation o = observe(env);
    // start vertex white, next child (vertex 2) white, stack empty
    CHECK(o.slots == std::vector<uint8_t>{kWhite, kWhite, 1});
}

TEST_CASE("toposort rejects cyclic graphs") {
    DagProblem cyc{3, {{1, 2}, {2, 3}, {3, 1}}};
    CHECK_THROWS_AS(init_env(Task::Toposort, cyc), RejectedInput);
}

TEST_CASE("quicksort env init pushes the whole-array range") {
    TaskEnv env = init_env(Task::Quicksort, ArrayProblem{{8, 2, 1, 2, 0, 8, 5, 8, 3, 7}});
    auto& e = std::get<QuickEnv>(env);
    CHECK(e.p_lo == 1);
    CHECK(e.p_hi == 10);
    CHECK(e.p_j == kSentinel);
    CHECK(e.p_stack_lo == e.p_stack_hi);
    CHECK(e.stack_lo[1] == 1);
    CHECK(e.stack_hi[1] == 10);
}

TEST_CASE("quicksort observation example") {
    TaskEnv env = init_env(Task::Quicksort, ArrayProblem{{3, 1, 2}});
    auto& e = std::get<QuickEnv>(env);
    e.p_j = 2;
    e.p_pivot = 1;
    // make the stacks empty to match the spec example
    e.stack_lo[1] = kSentinel;
    e.stack_hi[1] = kSentinel;
    e.p_stack_lo = e.p_stack_hi = 1;
    Observation o = observe(env);
    // A[2]=1 <= A[3]=2 true; p_j != p_hi; sentinel peeks compare false; empty
    CHECK(o.slots == std::vector<uint8_t>{1, 0, 0, 1});
}

TEST_CASE("quicksort stack write example from the push tables") {
    TaskEnv env = init_env(Task::Quicksort, ArrayProblem{{3, 1, 2}});
    auto& e = std::get<QuickEnv>(env);
    e.p_pivot = 2;
    apply_primitive(env, {quick::WRITE, {quick::ENV_STACK_HI, quick::P_PIVOT_M1, 0}});
    CHECK(e.stack_hi[e.p_stack_hi] == 1);
}

TEST_CASE("apply_primitive error paths") {
    TaskEnv env = init_env(Task::Bubble, ArrayProblem{{1, 2}});
    CHECK_THROWS_AS(apply_primitive(env, {bub::BUBBLE, {0, 0, 0}}), DispatchError);
    CHECK_THROWS_AS(apply_primitive(env, {bub::PTR, {bub::LEFT, bub::LEFT, 0}}),
                    InvalidArgument);
    CHECK_THROWS_AS(apply_primitive(env, {bub::SWAP, {bub::P1, bub::P2, bub::P1}}),
                    InvalidArgument);
}

TEST_CASE("check_result reference semantics") {
    CHECK(check_result(AdditionProblem{"99", "1"}, Result{std::string("100")}));
    CHECK(check_result(AdditionProblem{"0", "0"}, Result{std::string("0")}));
    CHECK_FALSE(check_result(AdditionProblem{"12", "34"}, Result{std::string("47")}));
    CHECK(check_result(ArrayProblem{{3, 1, 2}}, Result{std::vector<int>{1, 2, 3}}));
    CHECK_FALSE(check_result(ArrayProblem{{3, 1, 2}}, Result{std::vector<int>{3, 1, 2}}));
    // any linear extension is accepted
    CHECK(check_result(five_vertex_dag(), Result{std::vector<int>{3, 1, 2, 5, 4}}));
    CHECK(check_result(five_vertex_dag(), Result{std::vector<int>{1, 3, 2, 4, 5}}));
    CHECK_FALSE(check_result(five_vertex_dag(), Result{std::vector<int>{2, 1, 3, 5, 4}}));
    CHECK_FALSE(check_result(five_vertex_dag(), Result{std::vector<int>{1, 1, 2, 5, 4}}));
}

TEST_CASE("observation is a pure function of the environment") {
    TaskEnv env = init_env(Task::Quicksort, ArrayProblem{{5, 3, 1}});
    Observation a = observe(env);
    Observation b = observe(env);
    CHECK(a == b);
}
