#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "apo/sim.hpp"

namespace apo {

// Trace monitors for the protocol invariants. Attach to a Simulation before
// run(); violations are collected, not thrown, so a run can be diagnosed.
class InvariantMonitor {
 public:
  void attach(Simulation& sim) {
    sim.add_observer([this](const Simulation& s, const DeliveryRecord& r) { check(s, r); });
  }

  // good_list sizes never shrink; stored view priorities never decrease;
  // self is always in good_list; good_list stays within view plus self.
  void check(const Simulation& sim, const DeliveryRecord&) {
    const auto& agents = sim.agents();
    if (good_sizes_.empty()) good_sizes_.assign(agents.size(), 0);
    for (const auto& a : agents) {
      size_t sz = a.good_list().size();
      if (sz < good_sizes_[a.id()])
        fail("good_list of agent " + std::to_string(a.id()) + " shrank");
      good_sizes_[a.id()] = sz;

      if (!a.good_list().count(a.id()))
        fail("agent " + std::to_string(a.id()) + " missing from its own good_list");
      for (AgentId g : a.good_list())
        if (g != a.id() && !a.view().count(g))
          fail("good_list member outside agent_view at agent " + std::to_string(a.id()));

      for (const auto& [peer, entry] : a.view()) {
        auto key = std::make_pair(a.id(), peer);
        auto it = priorities_.find(key);
        if (it != priorities_.end() && entry.priority < it->second)
          fail("stored priority for agent " + std::to_string(peer) + " decreased at agent " +
               std::to_string(a.id()));
        priorities_[key] = entry.priority;
      }
    }
  }

  // Lemma "links are bidirectional": at quiescence every view edge has its
  // reverse. Call after a run terminates (not budget-exhausted).
  void check_bidirectional(const Simulation& sim) {
    for (const auto& a : sim.agents())
      for (const auto& [peer, entry] : a.view())
        if (!sim.agent(peer).view().count(a.id()))
          fail("one-way link " + std::to_string(a.id()) + "->" + std::to_string(peer) +
               " at quiescence");
  }

  const std::vector<std::string>& violations() const { return violations_; }
  bool clean() const { return violations_.empty(); }

 private:
  void fail(std::string msg) {
    if (violations_.size() < 64) violations_.push_back(std::move(msg));
  }

  std::vector<size_t> good_sizes_;
  std::map<std::pair<AgentId, AgentId>, int> priorities_;
  std::vector<std::string> violations_;
};

// Watches choose_solution events: in CompAPO variants every executed session
// must cover the entire good_list (no partial sessions).
struct FullSessionAudit {
  uint64_t sessions = 0;
  uint64_t partial = 0;

  void attach_counts(const Metrics& m) {
    sessions += m.sessions;
    partial += m.partial_sessions;
  }
};

// CompOptAPO cost accounting: per-agent broken-constraint weight under the
// final label, and the derived global cost F (half the sum, since each broken
// constraint is counted by both endpoints).
struct CostAccount {
  std::vector<long> per_agent;
  long sum = 0;
  long global_cost = 0;  // F
};

inline CostAccount derive_global_cost(const ConstraintNetwork& net,
                                      const CompoundLabel& label) {
  CostAccount acc;
  acc.per_agent.assign(net.agent_count(), 0);
  for (const auto& c : net.constraints()) {
    if (c.forbids(label.at(c.lo), label.at(c.hi))) {
      acc.per_agent[c.lo] += c.weight;
      acc.per_agent[c.hi] += c.weight;
    }
  }
  for (long b : acc.per_agent) acc.sum += b;
  if (acc.sum % 2 != 0)
    throw std::logic_error("per-agent broken-constraint sum must be even");
  acc.global_cost = acc.sum / 2;
  // consistency with a direct edge scan
  if (acc.global_cost != net.label_cost(label))
    throw std::logic_error("cost account disagrees with direct edge scan");
  return acc;
}

}  // namespace apo
