#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "apo/problem.hpp"

namespace apo {

enum class SearchStrategy { BranchAndBound, Backtrack };

// The subproblem a mediator solves in choose_solution, decoupled from agent
// state so it can be exercised against enumeration oracles directly.
//
// Variables are listed in the order the search assigns them (the mediator
// itself first). Values are enumerated in each variable's listed order.
// external[v] holds the per-value count of violated constraints with agents
// outside the session, as derived from the labeled domains with session
// members dropped.
struct SessionVariable {
  AgentId agent = -1;
  int domain_size = 0;
  std::vector<int> external;  // per value: violated-outsider count
};

struct SessionEdge {
  int a = 0;  // variable indices, a < b in assignment order
  int b = 0;
  const BinaryConstraint* constraint = nullptr;
  bool a_is_lo = true;  // variable a plays the constraint's lo endpoint
  int weight = 1;

  bool violated(Value va, Value vb) const {
    return a_is_lo ? constraint->forbids(va, vb) : constraint->forbids(vb, va);
  }
};

struct SessionProblem {
  std::vector<SessionVariable> vars;
  std::vector<SessionEdge> edges;
};

struct SessionResult {
  bool feasible = false;           // satisfaction mode: internal constraints met
  long cost = 0;                   // externals (BB) or internal+external (optimizing)
  std::vector<Value> assignment;   // per variable, in problem order
  uint64_t constraint_checks = 0;  // internal-edge probes performed
};

namespace detail {

struct SessionSearch {
  const SessionProblem& p;
  bool optimize;                      // allow internal violations at weight cost
  SearchStrategy strategy;
  std::vector<std::vector<SessionEdge>> earlier;  // edges to already-assigned vars
  std::vector<Value> current;
  std::vector<Value> best;
  long best_cost = std::numeric_limits<long>::max();
  bool found = false;
  uint64_t checks = 0;

  explicit SessionSearch(const SessionProblem& prob, bool opt, SearchStrategy strat)
      : p(prob), optimize(opt), strategy(strat) {
    earlier.resize(p.vars.size());
    for (const auto& e : p.edges) earlier[e.b].push_back(e);
    current.assign(p.vars.size(), 0);
  }

  void run() { descend(0, 0); }

  void descend(size_t idx, long cost) {
    if (cost >= best_cost) return;
    if (idx == p.vars.size()) {
      best_cost = cost;
      best = current;
      found = true;
      return;
    }
    const SessionVariable& var = p.vars[idx];
    for (Value v = 0; v < var.domain_size; ++v) {
      long step = 0;
      bool internal_ok = true;
      for (const auto& e : earlier[idx]) {
        ++checks;
        if (e.violated(current[e.a], v)) {
          if (!optimize) {
            internal_ok = false;
            break;
          }
          step += e.weight;
        }
      }
      if (!internal_ok) continue;
      if (strategy == SearchStrategy::BranchAndBound || optimize)
        step += var.external[v];
      current[idx] = v;
      descend(idx + 1, cost + step);
      if (found && strategy == SearchStrategy::Backtrack && !optimize)
        return;  // plain backtracking stops at the first internally-valid label
    }
  }
};

}  // namespace detail

// Satisfaction mode: internal constraints are hard; BB minimizes the external
// violation count, BT returns the first internally-consistent label.
inline SessionResult solve_session(const SessionProblem& p, SearchStrategy strategy) {
  detail::SessionSearch s(p, /*optimize=*/false, strategy);
  s.run();
  SessionResult r;
  r.feasible = s.found;
  r.cost = s.found ? s.best_cost : 0;
  r.assignment = s.best;
  r.constraint_checks = s.checks;
  return r;
}

// Optimizing mode (CompOptAPO): minimize internal violated weight plus
// external violation count. Always feasible.
inline SessionResult solve_session_optimizing(const SessionProblem& p) {
  detail::SessionSearch s(p, /*optimize=*/true, SearchStrategy::BranchAndBound);
  s.run();
  SessionResult r;
  r.feasible = s.found;
  r.cost = s.best_cost;
  r.assignment = s.best;
  r.constraint_checks = s.checks;
  return r;
}

}  // namespace apo
