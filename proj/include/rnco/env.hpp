#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rnco/error.hpp"

namespace rnco {

enum class Problem { tsp, cvrp, op };

std::string problem_name(Problem p);
Problem problem_from_name(const std::string& name);

using Point = std::array<double, 2>;

inline double dist(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

// Immutable problem description. Node 0 is the start city (TSP) or the depot
// (CVRP/OP). The trailing fields describe in-memory subproblems extracted by
// the neighborhood search; they are never serialized.
struct Instance {
  Problem kind = Problem::tsp;
  std::vector<Point> coords;
  std::vector<int> demands;    // CVRP, aligned with coords; demands[0] == 0
  int capacity = 0;            // CVRP
  std::vector<int> prizes;     // OP, aligned with coords; prizes[0] == 0
  double distance_limit = 0.0; // OP
  long long id = 0;
  std::uint64_t seed = 0;

  int path_end = -1;             // TSP: fixed end node; -1 duplicates node 0 (cycle)
  double start_capacity = -1.0;  // CVRP: initial remaining capacity; -1 = full
  std::optional<Point> start_pos;  // CVRP: start position when not the depot

  int n_customers() const {
    return kind == Problem::tsp ? static_cast<int>(coords.size())
                                : static_cast<int>(coords.size()) - 1;
  }
  int max_prize() const;
  double initial_capacity() const { return start_capacity < 0 ? capacity : start_capacity; }
  Point start_point() const { return start_pos ? *start_pos : coords[0]; }
  Point dest_point() const {
    return kind == Problem::tsp && path_end >= 0 ? coords[path_end] : coords[0];
  }
};

void validate_instance(const Instance& inst);

// Node-id sentinels used in State row maps. The destination row persists for
// the whole episode; the origin id marks a synthetic start position that is
// not an instance node.
constexpr int kDestId = -1;
constexpr int kOriginId = -2;

// The reduced subproblem at step t. Row 0 is the current position, the last
// row is the destination (duplicated start for TSP cycles, depot otherwise),
// and `rem` holds the ids of the remaining decision-relevant nodes in row
// order. States are value-like; the shared Instance is read-only.
struct State {
  Problem kind = Problem::tsp;
  std::shared_ptr<const Instance> inst;
  int current_id = 0;
  Point current_pos{};
  std::vector<int> rem;
  double rem_capacity = 0.0;  // CVRP
  double rem_budget = 0.0;    // OP
  int t = 0;
  bool done = false;

  int n_rows() const { return static_cast<int>(rem.size()) + 2; }
  int d_feat() const { return kind == Problem::tsp ? 2 : 4; }
  int n_actions() const {
    return kind == Problem::cvrp ? 2 * static_cast<int>(rem.size()) : n_rows();
  }
  Point dest_pos() const { return inst->dest_point(); }
  Point row_pos(int row) const;
  std::vector<int> node_ids() const;
  // row-major n_rows x d_feat feature matrix
  std::vector<double> features() const;
};

State initial_state(std::shared_ptr<const Instance> inst);

std::vector<std::uint8_t> feasible_mask(const State& s);

struct StepResult {
  State state;
  bool done = false;
  double travel = 0.0;  // distance traveled this step, incl. the closing leg when done
  int prize = 0;        // OP prize collected this step
};

StepResult step(const State& s, int action);

// A complete feasible solution. TSP: routes[0] is the tour starting at node 0
// (full start..end sequence for path instances). CVRP: customer lists per
// route. OP: routes[0] is the depot-to-depot customer sequence.
struct Solution {
  Problem kind = Problem::tsp;
  std::vector<std::vector<int>> routes;
  double objective = 0.0;
  bool feasible = true;
};

// Validates the solution structurally and recomputes its objective value
// (total length for TSP/CVRP, total prize for OP). Throws FeasibilityError
// naming the violated constraint.
double objective(const Instance& inst, const Solution& sol);

Solution replay(std::shared_ptr<const Instance> inst, const std::vector<int>& actions);
Solution replay(const Instance& inst, const std::vector<int>& actions);

}  // namespace rnco
