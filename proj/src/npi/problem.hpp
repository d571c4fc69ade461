#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "npi/rng.hpp"
#include "npi/task.hpp"

namespace npi {

struct AdditionProblem {
    std::string a;
    std::string b;
    bool operator==(const AdditionProblem&) const = default;
};

struct ArrayProblem {
    std::vector<int> values;
    bool operator==(const ArrayProblem&) const = default;
};

struct DagProblem {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // 1-based vertex labels
    bool operator==(const DagProblem&) const = default;
};

using Problem = std::variant<AdditionProblem, ArrayProblem, DagProblem>;

struct RejectedInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Throws RejectedInput on malformed problems (cycles, bad digits, unequal
// addend lengths, leading zeros).
void validate_problem(Task task, const Problem& problem);

// Deterministic random instances; "size" is digit count / array length /
// vertex count.
Problem random_problem(Task task, int size, uint64_t seed);

DagProblem random_dag(int n, Rng& rng, double edge_prob = 0.3);

std::string problem_to_json(const Problem& problem);
Problem problem_from_json(Task task, const std::string& text);
std::string problem_brief(const Problem& problem);

bool dag_is_acyclic(const DagProblem& dag);

}  // namespace npi
