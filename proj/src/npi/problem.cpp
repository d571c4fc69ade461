#include "npi/problem.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace npi {

namespace {

bool all_digits(const std::string& s) {
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

bool dag_is_acyclic(const DagProblem& dag) {
    std::vector<std::vector<int>> adj(dag.n + 1);
    std::vector<int> indeg(dag.n + 1, 0);
    for (auto [u, v] : dag.edges) {
        if (u < 1 || u > dag.n || v < 1 || v > dag.n) return false;
        adj[u].push_back(v);
        indeg[v]++;
    }
    std::vector<int> queue;
    for (int v = 1; v <= dag.n; ++v) {
        if (indeg[v] == 0) queue.push_back(v);
    }
    int seen = 0;
    while (!queue.empty()) {
        int u = queue.back();
        queue.pop_back();
        seen++;
        for (int v : adj[u]) {
            if (--indeg[v] == 0) queue.push_back(v);
        }
    }
    return seen == dag.n;
}

void validate_problem(Task task, const Problem& problem) {
    switch (task) {
        case Task::Addition: {
            const auto* p = std::get_if<AdditionProblem>(&problem);
            if (!p) throw RejectedInput("addition expects {a, b} digit strings");
            if (!all_digits(p->a) || !all_digits(p->b)) {
                throw RejectedInput("addends must be decimal digit strings");
            }
            if (p->a.size() != p->b.size()) {
                throw RejectedInput("addends must have equal digit length");
            }
            for (const std::string& s : {p->a, p->b}) {
                if (s.size() > 1 && s[0] == '0') {
                    throw RejectedInput("no leading zeros unless single-digit");
                }
            }
            return;
        }
        case Task::Bubble:
        case Task::Quicksort: {
            const auto* p = std::get_if<ArrayProblem>(&problem);
            if (!p) throw RejectedInput("sorting expects {array}");
            if (p->values.empty()) throw RejectedInput("array must have length >= 1");
            for (int v : p->values) {
                if (v < 0 || v > 9) throw RejectedInput("array values must be in 0..9");
            }
            return;
        }
        case Task::Toposort: {
            const auto* p = std::get_if<DagProblem>(&problem);
            if (!p) throw RejectedInput("toposort expects {n, edges}");
            if (p->n < 1) throw RejectedInput("graph must have >= 1 vertex");
            if (!dag_is_acyclic(*p)) throw RejectedInput("graph must be acyclic");
            return;
        }
    }
    throw RejectedInput("unknown task");
}

DagProblem random_dag(int n, Rng& rng, double edge_prob) {
    // Hidden topological order guarantees acyclicity; each forward edge is
    // included independently.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 1);
    for (int i = n - 1; i > 0; --i) {
        std::swap(order[i], order[rng.uniform_int(0, i)]);
    }
    DagProblem dag;
    dag.n = n;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.bernoulli(edge_prob)) dag.edges.emplace_back(order[i], order[j]);
        }
    }
    std::sort(dag.edges.begin(), dag.edges.end());
    return dag;
}

Problem random_problem(Task task, int size, uint64_t seed) {
    Rng rng(seed);
    switch (task) {
        case Task::Addition: {
            AdditionProblem p;
            auto gen = [&](std::string& out) {
                out.resize(size);
                for (int i = 0; i < size; ++i) {
                    int lo = (i == 0 && size > 1) ? 1 : 0;
                    out[i] = static_cast<char>('0' + rng.uniform_int(lo, 9));
                }
            };
            gen(p.a);
            gen(p.b);
            return p;
        }
        case Task::Bubble:
        case Task::Quicksort: {
            ArrayProblem p;
            p.values.resize(size);
            for (int& v : p.values) v = rng.uniform_int(0, 9);
            return p;
        }
        case Task::Toposort:
            return random_dag(size, rng);
    }
    throw RejectedInput("unknown task");
}

std::string problem_to_json(const Problem& problem) {
    nlohmann::json j;
    if (const auto* a = std::get_if<AdditionProblem>(&problem)) {
        j["a"] = a->a;
        j["b"] = a->b;
    } else if (const auto* arr = std::get_if<ArrayProblem>(&problem)) {
        j["array"] = arr->values;
    } else {
        const auto& d = std::get<DagProblem>(problem);
        j["n"] = d.n;
        auto edges = nlohmann::json::array();
        for (auto [u, v] : d.edges) edges.push_back({u, v});
        j["edges"] = edges;
    }
    return j.dump();
}

Problem problem_from_json(Task task, const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Problem p;
    switch (task) {
        case Task::Addition:
            p = AdditionProblem{j.at("a").get<std::string>(), j.at("b").get<std::string>()};
            break;
        case Task::Bubble:
        case Task::Quicksort:
            p = ArrayProblem{j.at("array").get<std::vector<int>>()};
            break;
        case Task::Toposort: {
            DagProblem d;
            d.n = j.at("n").get<int>();
            for (const auto& e : j.at("edges")) {
                d.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
            }
            p = d;
            break;
        }
    }
    validate_problem(task, p);
    return p;
}

std::string problem_brief(const Problem& problem) {
    std::ostringstream os;
    if (const auto* a = std::get_if<AdditionProblem>(&problem)) {
        os << a->a << "+" << a->b;
    } else if (const auto* arr = std::get_if<ArrayProblem>(&problem)) {
        os << "[";
        for (size_t i = 0; i < arr->values.size(); ++i) {
            os << (i ? "," : "") << arr->values[i];
        }
        os << "]";
    } else {
        const auto& d = std::get<DagProblem>(problem);
        os << "dag(n=" << d.n << ",m=" << d.edges.size() << ")";
    }
    return os.str();
}

}  // namespace npi
