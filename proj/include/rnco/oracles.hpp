#pragma once

#include <memory>
#include <vector>

#include "rnco/env.hpp"

namespace rnco {

struct PathTspResult {
  std::vector<int> path;  // node indices, start first, end last
  double cost = 0.0;
};

// Exact minimum-cost Hamiltonian path between fixed endpoints, dynamic
// programming over interior subsets. Ties break toward the lexicographically
// smallest path. Limited to 19 interior nodes (the table is 2^m * m doubles).
PathTspResult held_karp_path_tsp(const std::vector<Point>& coords, int start, int end);

// Optimal TSP cycle: node 0 is duplicated as the destination and the path
// solver does the rest.
Solution exact_tsp_cycle(const Instance& inst);

// Exact CVRP optimum for small instances: optimal single-route cost per
// capacity-feasible customer subset (Held-Karp with depot endpoints), then an
// optimal partition over subsets.
Solution exact_cvrp_small(const Instance& inst);

// Exact OP optimum for small instances: shortest-path-per-(subset, last-node)
// table, then the best prize over subsets reachable within the budget.
Solution exact_op_small(const Instance& inst);

Solution solve_oracle(const Instance& inst);

// An instance paired with the expert action sequence that reproduces a
// reference solution under replay().
struct Trajectory {
  long long instance_id = 0;
  std::vector<int> actions;
  double objective = 0.0;
};

// Steps the environment along `sol`, recording the action index taken at each
// state. Throws ContractError if the solution cannot be expressed as a
// feasible action sequence or its objective does not match.
Trajectory extract_trajectory(std::shared_ptr<const Instance> inst, const Solution& sol);

}  // namespace rnco
