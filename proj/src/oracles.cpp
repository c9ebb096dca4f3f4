#include "rnco/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rnco {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxInterior = 19;
constexpr int kMaxSubsetCustomers = 10;

}  // namespace

PathTspResult held_karp_path_tsp(const std::vector<Point>& coords, int start, int end) {
  const int n = static_cast<int>(coords.size());
  if (n < 2) throw SizeError("held_karp: need at least start and end");
  if (start < 0 || start >= n || end < 0 || end >= n || start == end) {
    throw ContractError("held_karp: bad endpoints");
  }
  std::vector<int> interior;
  for (int i = 0; i < n; ++i) {
    if (i != start && i != end) interior.push_back(i);
  }
  const int m = static_cast<int>(interior.size());
  if (m > kMaxInterior) {
    throw SizeError("held_karp: instance too large (" + std::to_string(m) + " interior nodes)");
  }
  if (m == 0) return {{start, end}, dist(coords[start], coords[end])};

  // dp[S][v] = shortest path from interior v through set S to the end node
  const std::size_t full = std::size_t(1) << m;
  std::vector<double> dp(full * m, kInf);
  for (int v = 0; v < m; ++v) dp[v] = dist(coords[interior[v]], coords[end]);  // S = {} row
  for (std::size_t S = 1; S < full; ++S) {
    for (int v = 0; v < m; ++v) {
      if (S & (std::size_t(1) << v)) continue;
      double best = kInf;
      const Point pv = coords[interior[v]];
      for (int u = 0; u < m; ++u) {
        if (!(S & (std::size_t(1) << u))) continue;
        const double cand = dist(pv, coords[interior[u]]) + dp[(S ^ (std::size_t(1) << u)) * m + u];
        if (cand < best) best = cand;
      }
      dp[S * m + v] = best;
    }
  }

  // total = min over first interior u of d(start, u) + dp[rest][u]
  const std::size_t all = full - 1;
  double total = kInf;
  for (int u = 0; u < m; ++u) {
    const double cand = dist(coords[start], coords[interior[u]]) + dp[(all ^ (std::size_t(1) << u)) * m + u];
    if (cand < total) total = cand;
  }

  // walk forward, always taking the smallest node that still achieves the
  // optimal continuation; interior ids are ascending, so this yields the
  // lexicographically smallest optimal path
  PathTspResult res;
  res.cost = total;
  res.path.push_back(start);
  std::size_t S = all;
  Point cur = coords[start];
  double rem = total;
  while (S) {
    bool found = false;
    for (int u = 0; u < m; ++u) {
      if (!(S & (std::size_t(1) << u))) continue;
      const double cand = dist(cur, coords[interior[u]]) + dp[(S ^ (std::size_t(1) << u)) * m + u];
      if (cand == rem) {  // same expression the table was filled with, so exact
        res.path.push_back(interior[u]);
        cur = coords[interior[u]];
        rem = dp[(S ^ (std::size_t(1) << u)) * m + u];
        S ^= std::size_t(1) << u;
        found = true;
        break;
      }
    }
    if (!found) throw NumericError("held_karp: path reconstruction lost the optimum");
  }
  res.path.push_back(end);
  return res;
}

Solution exact_tsp_cycle(const Instance& inst) {
  if (inst.kind != Problem::tsp) throw ContractError("exact_tsp_cycle: not a tsp instance");
  const int n = static_cast<int>(inst.coords.size());
  Solution sol;
  sol.kind = Problem::tsp;
  if (inst.path_end >= 0) {
    auto r = held_karp_path_tsp(inst.coords, 0, inst.path_end);
    sol.routes = {std::move(r.path)};
    sol.objective = r.cost;
    return sol;
  }
  if (n == 1) {
    sol.routes = {{0}};
    sol.objective = 0.0;
    return sol;
  }
  auto coords = inst.coords;
  coords.push_back(inst.coords[0]);  // duplicated destination
  auto r = held_karp_path_tsp(coords, 0, n);
  r.path.pop_back();
  sol.routes = {std::move(r.path)};
  sol.objective = r.cost;
  return sol;
}

namespace {

// Optimal depot -> subset -> depot route via the path solver on the subset's
// coordinates. Returns the customer sequence (global ids) and its cost.
std::pair<std::vector<int>, double> best_route(const Instance& inst, unsigned mask,
                                               const std::vector<int>& customers) {
  std::vector<Point> pts = {inst.coords[0]};
  std::vector<int> ids;
  for (std::size_t i = 0; i < customers.size(); ++i) {
    if (mask & (1u << i)) {
      pts.push_back(inst.coords[customers[i]]);
      ids.push_back(customers[i]);
    }
  }
  pts.push_back(inst.coords[0]);
  auto r = held_karp_path_tsp(pts, 0, static_cast<int>(pts.size()) - 1);
  std::vector<int> seq;
  for (std::size_t i = 1; i + 1 < r.path.size(); ++i) seq.push_back(ids[r.path[i] - 1]);
  return {std::move(seq), r.cost};
}

}  // namespace

Solution exact_cvrp_small(const Instance& inst) {
  if (inst.kind != Problem::cvrp) throw ContractError("exact_cvrp_small: not a cvrp instance");
  if (inst.start_pos) throw ContractError("exact_cvrp_small: subproblem instances unsupported");
  validate_instance(inst);
  const int nc = inst.n_customers();
  if (nc > kMaxSubsetCustomers) {
    throw SizeError("exact_cvrp_small: too many customers (" + std::to_string(nc) + ")");
  }
  Solution sol;
  sol.kind = Problem::cvrp;
  if (nc == 0) {
    sol.objective = 0.0;
    return sol;
  }
  std::vector<int> customers(nc);
  for (int i = 0; i < nc; ++i) customers[i] = i + 1;

  const unsigned full = (1u << nc) - 1;
  std::vector<double> route_cost(full + 1, kInf);
  for (unsigned S = 1; S <= full; ++S) {
    long long demand = 0;
    for (int i = 0; i < nc; ++i) {
      if (S & (1u << i)) demand += inst.demands[customers[i]];
    }
    if (demand > inst.capacity) continue;
    route_cost[S] = best_route(inst, S, customers).second;
  }

  std::vector<double> best(full + 1, kInf);
  std::vector<unsigned> choice(full + 1, 0);
  best[0] = 0.0;
  for (unsigned S = 1; S <= full; ++S) {
    const unsigned low = S & (~S + 1u);  // lowest set bit must be in the first part
    for (unsigned sub = S; sub; sub = (sub - 1) & S) {
      if (!(sub & low)) continue;
      if (route_cost[sub] == kInf || best[S ^ sub] == kInf) continue;
      const double cand = best[S ^ sub] + route_cost[sub];
      if (cand < best[S]) {
        best[S] = cand;
        choice[S] = sub;
      }
    }
  }
  if (best[full] == kInf) throw FeasibilityError("exact_cvrp_small: no feasible partition");

  for (unsigned S = full; S;) {
    const unsigned part = choice[S];
    sol.routes.push_back(best_route(inst, part, customers).first);
    S ^= part;
  }
  std::sort(sol.routes.begin(), sol.routes.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  sol.objective = best[full];
  return sol;
}

Solution exact_op_small(const Instance& inst) {
  if (inst.kind != Problem::op) throw ContractError("exact_op_small: not an op instance");
  validate_instance(inst);
  const int nc = inst.n_customers();
  if (nc > kMaxSubsetCustomers) {
    throw SizeError("exact_op_small: too many customers (" + std::to_string(nc) + ")");
  }
  Solution sol;
  sol.kind = Problem::op;
  sol.routes = {{}};
  sol.objective = 0.0;
  if (nc == 0) return sol;

  // dp[S][v] = shortest depot -> S -> v path ending at customer v in S
  const unsigned full = (1u << nc) - 1;
  std::vector<double> dp(static_cast<std::size_t>(full + 1) * nc, kInf);
  for (int v = 0; v < nc; ++v) {
    dp[static_cast<std::size_t>(1u << v) * nc + v] = dist(inst.coords[0], inst.coords[v + 1]);
  }
  for (unsigned S = 1; S <= full; ++S) {
    for (int v = 0; v < nc; ++v) {
      if (!(S & (1u << v)) || S == (1u << v)) continue;
      const unsigned prev = S ^ (1u << v);
      double bestv = kInf;
      for (int u = 0; u < nc; ++u) {
        if (!(prev & (1u << u))) continue;
        const double cand = dp[static_cast<std::size_t>(prev) * nc + u] +
                            dist(inst.coords[u + 1], inst.coords[v + 1]);
        if (cand < bestv) bestv = cand;
      }
      dp[static_cast<std::size_t>(S) * nc + v] = bestv;
    }
  }

  int best_prize = 0;
  unsigned best_set = 0;
  for (unsigned S = 1; S <= full; ++S) {
    int prize = 0;
    for (int v = 0; v < nc; ++v) {
      if (S & (1u << v)) prize += inst.prizes[v + 1];
    }
    if (prize <= best_prize) continue;
    for (int v = 0; v < nc; ++v) {
      if (!(S & (1u << v))) continue;
      if (dp[static_cast<std::size_t>(S) * nc + v] + dist(inst.coords[v + 1], inst.coords[0]) <=
          inst.distance_limit) {
        best_prize = prize;
        best_set = S;
        break;
      }
    }
  }
  if (best_set == 0) return sol;  // nothing reachable within the budget

  // reconstruct backwards, preferring the smallest node id at every tie
  int end = -1;
  double closing = kInf;
  for (int v = 0; v < nc; ++v) {
    if (!(best_set & (1u << v))) continue;
    const double cand = dp[static_cast<std::size_t>(best_set) * nc + v] +
                        dist(inst.coords[v + 1], inst.coords[0]);
    if (cand <= inst.distance_limit && cand < closing) {
      closing = cand;
      end = v;
    }
  }
  std::vector<int> rev = {end + 1};
  unsigned S = best_set;
  int v = end;
  while (S != (1u << v)) {
    const unsigned prev = S ^ (1u << v);
    bool found = false;
    for (int u = 0; u < nc; ++u) {
      if (!(prev & (1u << u))) continue;
      if (dp[static_cast<std::size_t>(prev) * nc + u] + dist(inst.coords[u + 1], inst.coords[v + 1]) ==
          dp[static_cast<std::size_t>(S) * nc + v]) {
        rev.push_back(u + 1);
        S = prev;
        v = u;
        found = true;
        break;
      }
    }
    if (!found) throw NumericError("exact_op_small: path reconstruction lost the optimum");
  }
  std::vector<int> path(rev.rbegin(), rev.rend());
  std::vector<int> flipped(rev.begin(), rev.end());
  if (flipped < path) path = std::move(flipped);  // both orientations cost the same
  sol.routes = {std::move(path)};
  sol.objective = best_prize;
  return sol;
}

Solution solve_oracle(const Instance& inst) {
  switch (inst.kind) {
    case Problem::tsp: return exact_tsp_cycle(inst);
    case Problem::cvrp: return exact_cvrp_small(inst);
    case Problem::op: return exact_op_small(inst);
  }
  throw ConfigError("solve_oracle: unknown problem kind");
}

Trajectory extract_trajectory(std::shared_ptr<const Instance> inst, const Solution& sol) {
  if (sol.kind != inst->kind) throw ContractError("extract_trajectory: kind mismatch");
  State s = initial_state(inst);
  Trajectory tr;
  tr.instance_id = inst->id;
  double travel = 0;
  int prize = 0;

  auto row_of = [&](int node_id) {
    for (std::size_t i = 0; i < s.rem.size(); ++i) {
      if (s.rem[i] == node_id) return static_cast<int>(i);
    }
    throw ContractError("extract_trajectory: node " + std::to_string(node_id) +
                        " not available in the state");
  };
  auto advance = [&](int action) {
    auto r = step(s, action);
    travel += r.travel;
    prize += r.prize;
    s = std::move(r.state);
    tr.actions.push_back(action);
  };

  if (inst->kind == Problem::tsp) {
    const auto& tour = sol.routes.at(0);
    if (tour.empty() || tour[0] != 0) throw ContractError("extract_trajectory: tour must start at 0");
    const std::size_t last = inst->path_end >= 0 ? tour.size() - 1 : tour.size();
    for (std::size_t i = 1; i < last; ++i) advance(row_of(tour[i]) + 1);
  } else if (inst->kind == Problem::cvrp) {
    for (std::size_t ri = 0; ri < sol.routes.size(); ++ri) {
      const auto& route = sol.routes[ri];
      for (std::size_t ci = 0; ci < route.size(); ++ci) {
        const int m = static_cast<int>(s.rem.size());
        const bool via_depot = ri > 0 && ci == 0;
        advance(row_of(route[ci]) + (via_depot ? m : 0));
      }
    }
  } else {
    for (int c : sol.routes.at(0)) advance(row_of(c) + 1);
    advance(s.n_rows() - 1);  // end the tour at the depot
  }

  if (!s.done) throw ContractError("extract_trajectory: solution leaves the episode unfinished");
  const double obj = inst->kind == Problem::op ? static_cast<double>(prize) : travel;
  if (std::abs(obj - sol.objective) > 1e-9) {
    throw ContractError("extract_trajectory: replayed objective disagrees with the solution");
  }
  tr.objective = obj;
  return tr;
}

}  // namespace rnco
