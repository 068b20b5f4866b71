#pragma once

#include <optional>

#include "apo/problem.hpp"

namespace apo {

// Centralized ground-truth solvers. Plain chronological backtracking with
// lexicographic variable/value order; desk-scale only.

namespace detail {

inline bool consistent_with_assigned(const ConstraintNetwork& net, AgentId a,
                                     Value v, const std::vector<Value>& partial) {
  for (AgentId b = 0; b < a; ++b)
    if (net.violates(a, v, b, partial[b])) return false;
  return true;
}

inline bool oracle_solve_rec(const ConstraintNetwork& net, AgentId a,
                             std::vector<Value>& partial) {
  if (a == net.agent_count()) return true;
  for (Value v = 0; v < net.domain(a).size(); ++v) {
    if (!consistent_with_assigned(net, a, v, partial)) continue;
    partial[a] = v;
    if (oracle_solve_rec(net, a + 1, partial)) return true;
  }
  return false;
}

}  // namespace detail

inline std::optional<CompoundLabel> oracle_solve(const ConstraintNetwork& net) {
  for (AgentId a = 0; a < net.agent_count(); ++a)
    if (net.domain(a).empty()) return std::nullopt;
  std::vector<Value> partial(net.agent_count(), 0);
  if (!detail::oracle_solve_rec(net, 0, partial)) return std::nullopt;
  CompoundLabel label;
  for (AgentId a = 0; a < net.agent_count(); ++a) label[a] = partial[a];
  return label;
}

// Brute-force Max-DisCSP optimum: minimal total weight of violated
// constraints, branch-and-bound in lexicographic order.
struct MinCostResult {
  long cost = 0;
  CompoundLabel label;
};

namespace detail {

inline void oracle_min_cost_rec(const ConstraintNetwork& net, AgentId a,
                                std::vector<Value>& partial, long cost_so_far,
                                long& best, std::vector<Value>& best_assign) {
  if (cost_so_far >= best) return;
  if (a == net.agent_count()) {
    best = cost_so_far;
    best_assign = partial;
    return;
  }
  for (Value v = 0; v < net.domain(a).size(); ++v) {
    long added = 0;
    for (AgentId b = 0; b < a; ++b) {
      int id = net.constraint_id(a, b);
      if (id < 0) continue;
      if (net.violates(a, v, b, partial[b])) added += net.constraint(id).weight;
    }
    partial[a] = v;
    oracle_min_cost_rec(net, a + 1, partial, cost_so_far + added, best, best_assign);
  }
}

}  // namespace detail

inline MinCostResult oracle_min_cost(const ConstraintNetwork& net) {
  std::vector<Value> partial(net.agent_count(), 0);
  std::vector<Value> best_assign(net.agent_count(), 0);
  long best = 0;
  for (const auto& c : net.constraints()) best += c.weight;
  best += 1;  // upper bound: everything violated, plus one
  detail::oracle_min_cost_rec(net, 0, partial, 0, best, best_assign);
  MinCostResult r;
  r.cost = best;
  for (AgentId a = 0; a < net.agent_count(); ++a) r.label[a] = best_assign[a];
  return r;
}

}  // namespace apo
