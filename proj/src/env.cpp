#include "rnco/env.hpp"

#include <algorithm>
#include <set>

namespace rnco {

std::string problem_name(Problem p) {
  switch (p) {
    case Problem::tsp: return "tsp";
    case Problem::cvrp: return "cvrp";
    case Problem::op: return "op";
  }
  return "?";
}

Problem problem_from_name(const std::string& name) {
  if (name == "tsp") return Problem::tsp;
  if (name == "cvrp") return Problem::cvrp;
  if (name == "op") return Problem::op;
  throw ConfigError("unknown problem kind: " + name);
}

int Instance::max_prize() const {
  int m = 1;
  for (std::size_t i = 1; i < prizes.size(); ++i) m = std::max(m, prizes[i]);
  return m;
}

void validate_instance(const Instance& inst) {
  const int n = static_cast<int>(inst.coords.size());
  if (n < 1) throw ConfigError("instance: no nodes");
  if (inst.kind == Problem::tsp) {
    if (n < 2 && inst.path_end < 0) throw ConfigError("instance: tsp needs >= 2 cities");
    if (inst.path_end >= n) throw ConfigError("instance: path end out of range");
  }
  if (inst.kind == Problem::cvrp) {
    if (static_cast<int>(inst.demands.size()) != n) {
      throw ConfigError("instance: demand count != node count");
    }
    if (inst.demands[0] != 0) throw ConfigError("instance: depot demand must be 0");
    if (inst.capacity < 1) throw ConfigError("instance: capacity must be positive");
    for (int i = 1; i < n; ++i) {
      if (inst.demands[i] < 1 || inst.demands[i] > inst.capacity) {
        throw ConfigError("instance: customer demand outside [1, capacity]");
      }
    }
  }
  if (inst.kind == Problem::op) {
    if (static_cast<int>(inst.prizes.size()) != n) {
      throw ConfigError("instance: prize count != node count");
    }
    if (inst.prizes[0] != 0) throw ConfigError("instance: depot prize must be 0");
    if (!(inst.distance_limit > 0)) throw ConfigError("instance: distance limit must be positive");
  }
}

Point State::row_pos(int row) const {
  if (row == 0) return current_pos;
  if (row == n_rows() - 1) return dest_pos();
  return inst->coords[rem[row - 1]];
}

std::vector<int> State::node_ids() const {
  std::vector<int> ids;
  ids.reserve(rem.size() + 2);
  ids.push_back(current_id);
  ids.insert(ids.end(), rem.begin(), rem.end());
  ids.push_back(kDestId);
  return ids;
}

std::vector<double> State::features() const {
  const int n = n_rows();
  const int df = d_feat();
  std::vector<double> f(static_cast<std::size_t>(n) * df);
  for (int r = 0; r < n; ++r) {
    const Point p = row_pos(r);
    double* row = f.data() + static_cast<std::size_t>(r) * df;
    row[0] = p[0];
    row[1] = p[1];
    if (kind == Problem::cvrp) {
      const bool interior = r > 0 && r < n - 1;
      row[2] = interior ? static_cast<double>(inst->demands[rem[r - 1]]) / inst->capacity : 0.0;
      row[3] = rem_capacity / inst->capacity;
    } else if (kind == Problem::op) {
      const bool interior = r > 0 && r < n - 1;
      row[2] = interior ? static_cast<double>(inst->prizes[rem[r - 1]]) / inst->max_prize() : 0.0;
      row[3] = rem_budget;
    }
  }
  return f;
}

State initial_state(std::shared_ptr<const Instance> inst) {
  validate_instance(*inst);
  State s;
  s.kind = inst->kind;
  s.inst = inst;
  s.t = 0;
  const int n = static_cast<int>(inst->coords.size());
  if (inst->kind == Problem::tsp) {
    s.current_id = 0;
    s.current_pos = inst->coords[0];
    for (int i = 1; i < n; ++i) {
      if (i != inst->path_end) s.rem.push_back(i);
    }
    s.done = s.rem.empty();
  } else {
    for (int i = 1; i < n; ++i) s.rem.push_back(i);
    if (inst->kind == Problem::cvrp) {
      if (inst->start_pos) {
        s.current_id = kOriginId;
        s.current_pos = *inst->start_pos;
      } else {
        s.current_id = 0;
        s.current_pos = inst->coords[0];
      }
      s.rem_capacity = inst->initial_capacity();
      s.done = s.rem.empty();
    } else {
      s.current_id = 0;
      s.current_pos = inst->coords[0];
      s.rem_budget = inst->distance_limit;
      s.done = false;  // the episode ends only when the depot is selected
    }
  }
  return s;
}

std::vector<std::uint8_t> feasible_mask(const State& s) {
  if (s.done) throw ContractError("feasible_mask: state is terminal");
  const int m = static_cast<int>(s.rem.size());
  if (s.kind == Problem::cvrp) {
    std::vector<std::uint8_t> mask(2 * m);
    for (int i = 0; i < m; ++i) {
      mask[i] = s.inst->demands[s.rem[i]] <= s.rem_capacity ? 1 : 0;
      mask[m + i] = 1;  // via depot: the vehicle is refilled first
    }
    return mask;
  }
  std::vector<std::uint8_t> mask(s.n_rows(), 0);
  if (s.kind == Problem::tsp) {
    // interior nodes only; the destination is reached automatically once the
    // last interior node has been chosen
    for (int i = 1; i <= m; ++i) mask[i] = 1;
  } else {
    const Point depot = s.inst->coords[0];
    for (int i = 1; i <= m; ++i) {
      const Point c = s.inst->coords[s.rem[i - 1]];
      mask[i] = dist(s.current_pos, c) + dist(c, depot) <= s.rem_budget ? 1 : 0;
    }
    mask[s.n_rows() - 1] = 1;  // ending the tour at the depot is always allowed
  }
  return mask;
}

StepResult step(const State& s, int action) {
  if (s.done) throw ContractError("step: state is terminal");
  const auto mask = feasible_mask(s);
  if (action < 0 || action >= static_cast<int>(mask.size()) || !mask[action]) {
    throw ContractError("step: infeasible action " + std::to_string(action));
  }
  StepResult r;
  State& nx = r.state;
  nx = s;
  nx.t = s.t + 1;
  const int m = static_cast<int>(s.rem.size());

  if (s.kind == Problem::op && action == s.n_rows() - 1) {
    // end the tour: travel home, forfeit remaining prizes
    r.travel = dist(s.current_pos, s.inst->coords[0]);
    nx.rem_budget -= r.travel;
    nx.current_id = kDestId;
    nx.current_pos = s.inst->coords[0];
    nx.done = true;
    r.done = true;
    return r;
  }

  int chosen;
  if (s.kind == Problem::cvrp) {
    const bool via_depot = action >= m;
    const int idx = via_depot ? action - m : action;
    chosen = s.rem[idx];
    const Point depot = s.inst->coords[0];
    const Point cpos = s.inst->coords[chosen];
    if (via_depot) {
      r.travel = dist(s.current_pos, depot) + dist(depot, cpos);
      nx.rem_capacity = s.inst->capacity - s.inst->demands[chosen];
    } else {
      r.travel = dist(s.current_pos, cpos);
      nx.rem_capacity = s.rem_capacity - s.inst->demands[chosen];
    }
    nx.rem.erase(nx.rem.begin() + idx);
  } else {
    const int idx = action - 1;
    chosen = s.rem[idx];
    const Point cpos = s.inst->coords[chosen];
    r.travel = dist(s.current_pos, cpos);
    if (s.kind == Problem::op) {
      nx.rem_budget = s.rem_budget - r.travel;
      r.prize = s.inst->prizes[chosen];
    }
    nx.rem.erase(nx.rem.begin() + idx);
  }
  nx.current_id = chosen;
  nx.current_pos = s.inst->coords[chosen];

  if (s.kind != Problem::op && nx.rem.empty()) {
    nx.done = true;
    r.done = true;
    r.travel += dist(nx.current_pos, s.dest_pos());
  }
  return r;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw FeasibilityError(what);
}

double tsp_objective(const Instance& inst, const std::vector<int>& tour) {
  const int n = static_cast<int>(inst.coords.size());
  if (inst.path_end < 0) {
    require(static_cast<int>(tour.size()) == n, "tsp: tour must visit every city");
  } else {
    require(static_cast<int>(tour.size()) == n, "path: sequence must cover every node");
    require(tour.back() == inst.path_end, "path: sequence must end at the fixed end node");
  }
  require(!tour.empty() && tour[0] == 0, "tsp: tour must start at node 0");
  std::vector<char> seen(n, 0);
  for (int c : tour) {
    require(c >= 0 && c < n, "tsp: unknown city in tour");
    require(!seen[c], "tsp: city visited twice");
    seen[c] = 1;
  }
  double len = 0;
  for (std::size_t i = 0; i + 1 < tour.size(); ++i) {
    len += dist(inst.coords[tour[i]], inst.coords[tour[i + 1]]);
  }
  if (inst.path_end < 0) len += dist(inst.coords[tour.back()], inst.coords[tour[0]]);
  return len;
}

double cvrp_objective(const Instance& inst, const std::vector<std::vector<int>>& routes) {
  const int n = static_cast<int>(inst.coords.size());
  std::vector<char> seen(n, 0);
  double len = 0;
  for (std::size_t ri = 0; ri < routes.size(); ++ri) {
    const auto& route = routes[ri];
    require(!route.empty(), "cvrp: empty route");
    long long load = 0;
    Point prev = (ri == 0) ? inst.start_point() : inst.coords[0];
    for (int c : route) {
      require(c >= 1 && c < n, "cvrp: unknown customer in route");
      require(!seen[c], "cvrp: customer served twice");
      seen[c] = 1;
      load += inst.demands[c];
      len += dist(prev, inst.coords[c]);
      prev = inst.coords[c];
    }
    const double cap = (ri == 0) ? inst.initial_capacity() : inst.capacity;
    require(static_cast<double>(load) <= cap, "cvrp: route demand exceeds capacity");
    len += dist(prev, inst.coords[0]);
  }
  for (int c = 1; c < n; ++c) require(seen[c], "cvrp: customer not served");
  return len;
}

double op_objective(const Instance& inst, const std::vector<int>& path, double* out_len) {
  const int n = static_cast<int>(inst.coords.size());
  std::vector<char> seen(n, 0);
  double len = 0, prize = 0;
  Point prev = inst.coords[0];
  for (int c : path) {
    require(c >= 1 && c < n, "op: unknown customer in path");
    require(!seen[c], "op: customer visited twice");
    seen[c] = 1;
    len += dist(prev, inst.coords[c]);
    prize += inst.prizes[c];
    prev = inst.coords[c];
  }
  len += dist(prev, inst.coords[0]);
  require(len <= inst.distance_limit + 1e-9, "op: path length exceeds the distance limit");
  if (out_len) *out_len = len;
  return prize;
}

}  // namespace

double objective(const Instance& inst, const Solution& sol) {
  if (sol.kind != inst.kind) throw FeasibilityError("objective: solution kind mismatch");
  switch (inst.kind) {
    case Problem::tsp:
      require(sol.routes.size() == 1, "tsp: expected a single tour");
      return tsp_objective(inst, sol.routes[0]);
    case Problem::cvrp:
      return cvrp_objective(inst, sol.routes);
    case Problem::op:
      require(sol.routes.size() == 1, "op: expected a single path");
      return op_objective(inst, sol.routes[0], nullptr);
  }
  throw FeasibilityError("objective: unknown problem kind");
}

Solution replay(std::shared_ptr<const Instance> inst, const std::vector<int>& actions) {
  if (actions.empty()) throw ContractError("replay: empty action sequence");
  State s = initial_state(inst);
  Solution sol;
  sol.kind = inst->kind;
  double travel = 0;
  int prize = 0;
  std::vector<std::vector<int>> routes(1);

  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (s.done) {
      throw ContractError("replay: action after terminal state at step " + std::to_string(i));
    }
    const int a = actions[i];
    StepResult r;
    try {
      r = step(s, a);
    } catch (const ContractError&) {
      throw ContractError("replay: infeasible action at step " + std::to_string(i));
    }
    if (inst->kind == Problem::cvrp) {
      const int m = static_cast<int>(s.rem.size());
      const bool via_depot = a >= m;
      const int customer = s.rem[via_depot ? a - m : a];
      if (via_depot && !routes.back().empty()) routes.emplace_back();
      routes.back().push_back(customer);
    } else if (a != s.n_rows() - 1) {  // the OP depot action appends nothing
      routes.back().push_back(s.rem[a - 1]);
    }
    travel += r.travel;
    prize += r.prize;
    s = std::move(r.state);
  }
  if (!s.done) throw ContractError("replay: action sequence ends before the episode is complete");

  if (inst->kind == Problem::tsp) {
    std::vector<int> tour = {0};
    tour.insert(tour.end(), routes[0].begin(), routes[0].end());
    if (inst->path_end >= 0) tour.push_back(inst->path_end);
    sol.routes = {std::move(tour)};
  } else {
    sol.routes = std::move(routes);
  }
  sol.objective = inst->kind == Problem::op ? static_cast<double>(prize) : travel;
  sol.feasible = true;
  return sol;
}

Solution replay(const Instance& inst, const std::vector<int>& actions) {
  return replay(std::make_shared<Instance>(inst), actions);
}

}  // namespace rnco
