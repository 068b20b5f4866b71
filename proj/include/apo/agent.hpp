#pragma once

#include <algorithm>
#include <cassert>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "apo/mediation.hpp"
#include "apo/message.hpp"
#include "apo/problem.hpp"

namespace apo {

enum class Variant { Apo, CompApo, CompOptApo };
enum class WaitMode { Busy, Interrupt };

// Priority tie-break between agents of equal good_list size. HighIndex is the
// default; LowIndex realizes the anti-lexicographic ordering of agent names
// used by the Figure 1 replay.
enum class TieBreak { HighIndex, LowIndex };

inline bool priority_greater(int pa, AgentId a, int pb, AgentId b, TieBreak tb) {
  if (pa != pb) return pa > pb;
  if (a == b) return false;
  return tb == TieBreak::HighIndex ? a > b : a < b;
}

struct AgentConfig {
  Variant variant = Variant::CompApo;
  SearchStrategy strategy = SearchStrategy::BranchAndBound;
  WaitMode wait_mode = WaitMode::Interrupt;
  TieBreak tie_break = TieBreak::HighIndex;
  std::optional<Value> initial_value;  // replay override; otherwise seeded pick
  uint64_t value_seed = 0;
};

struct AgentViewEntry {
  int priority = 0;
  std::optional<Value> value;
  bool wants_mediate = false;
  bool has_static = false;          // domain/constraints learned via init
  int domain_size = 0;
  std::vector<int> constraint_ids;  // the peer's incident constraints
};

// Sink for an agent's outgoing traffic plus simulator-side instrumentation.
struct MessageSink {
  virtual ~MessageSink() = default;
  virtual void send(AgentId to, Message msg) = 0;
  virtual void broadcast_no_solution() = 0;
  // A mediation session ran its internal search (choose_solution).
  virtual void note_session(AgentId mediator, int participants, int good_list_size,
                            bool full_session) {
    (void)mediator;
    (void)participants;
    (void)good_list_size;
    (void)full_session;
  }
};

class Agent {
 public:
  Agent(const ConstraintNetwork& net, AgentId id, AgentConfig cfg)
      : net_(&net), id_(id), cfg_(cfg) {
    own_constraints_ = net.incident_constraints(id);
  }

  // ---- read-only state, used by monitors and snapshot detectors ----
  AgentId id() const { return id_; }
  Value value() const { return value_; }
  int priority() const { return priority_; }
  bool wants_mediate() const { return wants_mediate_; }
  bool mediate_flag() const { return counter_ >= 0 || locked_by_.has_value(); }
  bool halted() const { return halted_; }
  int counter() const { return counter_; }
  uint64_t nccc() const { return nccc_; }
  const std::map<AgentId, AgentViewEntry>& view() const { return view_; }
  const std::set<AgentId>& good_list() const { return good_list_; }
  const std::set<AgentId>& init_list() const { return init_list_; }
  const std::set<std::pair<AgentId, AgentId>>& conc_list() const { return conc_list_; }
  const std::set<AgentId>& wait_list() const { return wait_list_; }
  const AgentConfig& config() const { return cfg_; }

  void merge_nccc_stamp(uint64_t stamp) { nccc_ = std::max(nccc_, stamp); }

  void initialize(MessageSink& sink) {
    const Domain& dom = net_->domain(id_);
    if (dom.empty()) {
      sink.broadcast_no_solution();
      halted_ = true;
      return;
    }
    if (cfg_.initial_value)
      value_ = *cfg_.initial_value;
    else {
      std::mt19937_64 rng(cfg_.value_seed * 0x9e3779b97f4a7c15ULL + id_ + 1);
      value_ = static_cast<Value>(rng() % dom.size());
    }
    const auto& nbrs = net_->neighbors(id_);
    priority_ = static_cast<int>(nbrs.size()) + 1;
    wants_mediate_ = true;
    counter_ = -1;
    good_list_ = {id_};
    init_list_ = std::set<AgentId>(nbrs.begin(), nbrs.end());
    for (AgentId nb : nbrs) sink.send(nb, make_init());
  }

  void receive(AgentId from, const Message& msg, MessageSink& sink) {
    if (halted_) return;
    std::visit(
        [&](const auto& m) { handle(from, m, sink); },
        msg);
  }

 private:
  // ---- message construction ----
  InitMsg make_init() const {
    InitMsg m;
    m.priority = priority_;
    m.value = value_;
    m.wants_mediate = wants_mediate_;
    m.domain_size = net_->domain(id_).size();
    m.constraint_ids = own_constraints_;
    return m;
  }

  OkMsg make_ok() const {
    OkMsg m;
    m.priority = priority_;
    m.value = value_;
    m.wants_mediate = wants_mediate_;
    return m;
  }

  // ---- view bookkeeping ----
  AgentViewEntry& upsert(AgentId who) { return view_[who]; }

  void merge_priority(AgentViewEntry& e, int p) { e.priority = std::max(e.priority, p); }

  void set_value(AgentViewEntry& e, Value v) {
    if (e.value && *e.value != v) cost_certified_ = false;
    if (!e.value) cost_certified_ = false;
    e.value = v;
  }

  void absorb_init(AgentId from, const InitMsg& m) {
    AgentViewEntry& e = upsert(from);
    merge_priority(e, m.priority);
    set_value(e, m.value);
    e.wants_mediate = m.wants_mediate;
    e.has_static = true;
    e.domain_size = m.domain_size;
    e.constraint_ids = m.constraint_ids;
  }

  // All constraints this agent has learned of: its own plus every view
  // entry's advertised incident list.
  bool learned_adjacent(AgentId a, AgentId b) const {
    auto touches = [&](const std::vector<int>& ids) {
      for (int cid : ids) {
        const BinaryConstraint& c = net_->constraint(cid);
        if ((c.lo == a && c.hi == b) || (c.lo == b && c.hi == a)) return true;
      }
      return false;
    };
    if (touches(own_constraints_)) return true;
    for (const auto& [who, e] : view_)
      if (e.has_static && touches(e.constraint_ids)) return true;
    return false;
  }

  bool adjacent_to_good_list(AgentId who) const {
    for (AgentId g : good_list_)
      if (learned_adjacent(who, g)) return true;
    return false;
  }

  void grow_good_list(AgentId seed) {
    good_list_.insert(seed);
    cost_certified_ = false;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [who, e] : view_) {
        if (good_list_.count(who)) continue;
        if (adjacent_to_good_list(who)) {
          good_list_.insert(who);
          changed = true;
        }
      }
    }
    priority_ = std::max(priority_, static_cast<int>(good_list_.size()));
  }

  // ---- NCCC-counted constraint checks ----
  bool counted_violates(AgentId a, Value va, AgentId b, Value vb) {
    ++nccc_;
    return net_->violates(a, va, b, vb);
  }

  bool has_conflict() {
    for (int cid : own_constraints_) {
      AgentId o = net_->constraint(cid).other(id_);
      auto it = view_.find(o);
      if (it == view_.end() || !it->second.value) continue;
      if (counted_violates(id_, value_, o, *it->second.value)) return true;
    }
    return false;
  }

  // Agents (with known values) the given own-value would violate.
  std::vector<AgentId> violated_peers(Value v) {
    std::vector<AgentId> out;
    for (int cid : own_constraints_) {
      AgentId o = net_->constraint(cid).other(id_);
      auto it = view_.find(o);
      if (it == view_.end() || !it->second.value) continue;
      if (counted_violates(id_, v, o, *it->second.value)) out.push_back(o);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  LabeledDomain build_labels() {
    LabeledDomain ld;
    const int k = net_->domain(id_).size();
    ld.violators.resize(k);
    for (Value v = 0; v < k; ++v) ld.violators[v] = violated_peers(v);
    return ld;
  }

  bool exists_willing_higher_than(int p, AgentId who) const {
    // CompAPO variants also count this agent's own willingness: the highest
    // priority willing agent must not get captured by lower sessions (the
    // liveness argument relies on it). Original APO scans the view only.
    if (cfg_.variant != Variant::Apo && who != id_ && wants_mediate_ &&
        priority_greater(priority_, id_, p, who, cfg_.tie_break))
      return true;
    for (const auto& [j, e] : view_) {
      if (j == who) continue;
      if (e.wants_mediate && priority_greater(e.priority, j, p, who, cfg_.tie_break))
        return true;
    }
    return false;
  }

  // ---- interrupt-mode hooks (§6.3 machinery) ----
  void clear_wait_list() { wait_list_.clear(); }

  void notify_wait_list(MessageSink& sink) {
    if (cfg_.wait_mode != WaitMode::Interrupt || cfg_.variant == Variant::Apo) return;
    for (AgentId w : wait_list_) sink.send(w, make_ok());
    wait_list_.clear();
  }

  void broadcast_ok(MessageSink& sink) {
    for (const auto& [j, e] : view_) sink.send(j, make_ok());
    clear_wait_list();  // an ok? to the entire view reaches every pending mediator
  }

  // ---- core procedures (Algorithm 1) ----
  void check_agent_view(MessageSink& sink) {
    if (halted_) return;
    if (!init_list_.empty() || mediate_flag()) return;
    bool conflicted = has_conflict();
    bool desire = conflicted;
    if (cfg_.variant == Variant::CompOptApo && cost_certified_) desire = false;

    if (desire && !exists_willing_higher_than(priority_, id_)) {
      // Try a local repair: a conflict-free value exists and the current
      // conflicts are exclusively with lower-priority neighbors.
      std::optional<Value> fresh;
      const int k = net_->domain(id_).size();
      for (Value v = 0; v < k; ++v) {
        if (violated_peers(v).empty()) {
          fresh = v;
          break;
        }
      }
      bool exclusively_lower = true;
      for (AgentId peer : violated_peers(value_)) {
        const AgentViewEntry& e = view_.at(peer);
        if (!priority_greater(priority_, id_, e.priority, peer, cfg_.tie_break)) {
          exclusively_lower = false;
          break;
        }
      }
      if (fresh && exclusively_lower) {
        value_ = *fresh;
        cost_certified_ = false;
        broadcast_ok(sink);
      } else {
        wants_mediate_ = true;  // receivers infer this from evaluate? anyway
        start_mediation(sink);
      }
    } else if (wants_mediate_ != desire) {
      wants_mediate_ = desire;
      broadcast_ok(sink);
    }
  }

  // ---- mediation, mediator side (Algorithm 2) ----
  void start_mediation(MessageSink& sink) {
    preferences_.clear();
    session_ = SessionId{id_, ++session_seq_};
    counter_ = static_cast<int>(good_list_.size()) - 1;
    EvaluateReqMsg m;
    m.priority = priority_;
    m.session = session_;
    for (AgentId j : good_list_)
      if (j != id_) sink.send(j, m);
    if (counter_ == 0) choose_solution(sink);
  }

  void handle(AgentId from, const WaitMsg& m, MessageSink& sink) {
    merge_priority(upsert(from), m.priority);
    if (cfg_.variant == Variant::Apo) {
      if (counter_ > 0 && --counter_ == 0) choose_solution(sink);
      return;
    }
    // CompAPO: one wait! cancels the whole session (Algorithm 4).
    if (counter_ < 0 || m.session != session_) return;  // stale
    counter_ = -1;
    CancelMsg c;
    c.priority = priority_;
    c.session = session_;
    for (AgentId j : good_list_)
      if (j != id_) sink.send(j, c);
    if (cfg_.wait_mode == WaitMode::Busy) check_agent_view(sink);
  }

  void handle(AgentId from, const EvaluateRespMsg& m, MessageSink& sink) {
    merge_priority(upsert(from), m.priority);
    if (counter_ <= 0) return;  // no active collection
    if (cfg_.variant != Variant::Apo && m.session != session_) return;  // stale
    preferences_[from] = m.labels;
    if (--counter_ == 0) choose_solution(sink);
  }

  void choose_solution(MessageSink& sink) {
    counter_ = -1;

    // Assignment order: the mediator first, then participants by cyclic index
    // offset from the mediator.
    std::vector<AgentId> participants{id_};
    {
      std::vector<AgentId> rest;
      for (const auto& [j, labels] : preferences_) rest.push_back(j);
      const int n = net_->agent_count();
      std::sort(rest.begin(), rest.end(), [&](AgentId a, AgentId b) {
        return (a - id_ + n) % n < (b - id_ + n) % n;
      });
      participants.insert(participants.end(), rest.begin(), rest.end());
    }
    std::set<AgentId> member_set(participants.begin(), participants.end());
    bool full_session =
        member_set.size() == good_list_.size() &&
        std::includes(member_set.begin(), member_set.end(), good_list_.begin(),
                      good_list_.end());
    sink.note_session(id_, static_cast<int>(participants.size()),
                      static_cast<int>(good_list_.size()), full_session);

    // Per-(participant, value) outsiders: label entries minus session members.
    LabeledDomain self_labels = build_labels();
    std::map<AgentId, std::vector<std::vector<AgentId>>> outsiders;
    for (AgentId a : participants) {
      const LabeledDomain& ld = a == id_ ? self_labels : preferences_.at(a);
      auto& per_value = outsiders[a];
      per_value.resize(ld.violators.size());
      for (size_t v = 0; v < ld.violators.size(); ++v)
        for (AgentId x : ld.violators[v])
          if (!member_set.count(x)) per_value[v].push_back(x);
    }

    SessionProblem problem;
    std::map<AgentId, int> var_index;
    for (AgentId a : participants) {
      SessionVariable var;
      var.agent = a;
      var.domain_size = a == id_ ? net_->domain(id_).size() : preferences_.at(a).domain_size();
      for (const auto& outs : outsiders[a])
        var.external.push_back(static_cast<int>(outs.size()));
      var_index[a] = static_cast<int>(problem.vars.size());
      problem.vars.push_back(std::move(var));
    }
    // Internal edges among session members, as far as this agent has learned
    // them (every init-exchanged member advertised its full incident list).
    std::set<int> seen;
    auto add_edges_from = [&](const std::vector<int>& cids) {
      for (int cid : cids) {
        if (seen.count(cid)) continue;
        const BinaryConstraint& c = net_->constraint(cid);
        auto ia = var_index.find(c.lo);
        auto ib = var_index.find(c.hi);
        if (ia == var_index.end() || ib == var_index.end()) continue;
        seen.insert(cid);
        SessionEdge e;
        if (ia->second < ib->second) {
          e.a = ia->second;
          e.b = ib->second;
          e.a_is_lo = true;
        } else {
          e.a = ib->second;
          e.b = ia->second;
          e.a_is_lo = false;
        }
        e.constraint = &c;
        e.weight = c.weight;
        problem.edges.push_back(e);
      }
    };
    add_edges_from(own_constraints_);
    for (AgentId a : participants) {
      if (a == id_) continue;
      const AgentViewEntry& e = view_.at(a);
      if (e.has_static) add_edges_from(e.constraint_ids);
    }

    SessionResult result = cfg_.variant == Variant::CompOptApo
                               ? solve_session_optimizing(problem)
                               : solve_session(problem, cfg_.strategy);
    nccc_ += result.constraint_checks;

    if (!result.feasible) {
      // The induced subproblem over the session is unsatisfiable, hence the
      // whole problem is (all internal edges are genuine constraints).
      sink.broadcast_no_solution();
      halted_ = true;
      return;
    }

    CompoundLabel s;
    for (size_t i = 0; i < participants.size(); ++i)
      s[participants[i]] = result.assignment[i];

    value_ = s[id_];

    for (const auto& [j, entry] : view_) {
      if (member_set.count(j)) {
        // Conflicting outsiders this agent has never met join via an init
        // handshake, growing the good_list for future sessions.
        for (AgentId x : outsiders[j][s[j]]) {
          if (view_.count(x) || init_list_.count(x) || x == id_) continue;
          sink.send(x, make_init());
          init_list_.insert(x);
        }
        AcceptMsg acc;
        acc.priority = priority_;
        acc.value = value_;
        acc.wants_mediate = wants_mediate_;
        acc.session = session_;
        acc.assigned = s[j];
        if (cfg_.variant != Variant::Apo) acc.solution = s;
        sink.send(j, acc);
        set_value(view_[j], s[j]);
      } else {
        sink.send(j, make_ok());
      }
    }
    preferences_.clear();
    if (cfg_.variant == Variant::CompOptApo) cost_certified_ = true;
    check_agent_view(sink);
  }

  // ---- mediation, participant side (Algorithms 3-5) ----
  void handle(AgentId from, const EvaluateReqMsg& m, MessageSink& sink) {
    AgentViewEntry& e = upsert(from);
    merge_priority(e, m.priority);
    e.wants_mediate = true;
    bool blocked = mediate_flag() || exists_willing_higher_than(m.priority, from);
    if (cfg_.variant != Variant::Apo && !init_list_.empty()) blocked = true;
    if (blocked) {
      WaitMsg w;
      w.priority = priority_;
      w.session = m.session;
      sink.send(from, w);
      if (cfg_.wait_mode == WaitMode::Interrupt && cfg_.variant != Variant::Apo)
        wait_list_.insert(from);
    } else {
      locked_by_ = m.session;
      EvaluateRespMsg r;
      r.priority = priority_;
      r.session = m.session;
      r.labels = build_labels();
      sink.send(from, r);
    }
  }

  void handle(AgentId from, const AcceptMsg& m, MessageSink& sink) {
    if (!locked_by_ || locked_by_->mediator != from) return;  // not our session
    if (cfg_.variant != Variant::Apo && m.session != *locked_by_) return;

    if (cfg_.variant == Variant::Apo) {
      value_ = m.assigned;
      locked_by_.reset();
      broadcast_ok(sink);
      AgentViewEntry& e = upsert(from);
      merge_priority(e, m.priority);
      set_value(e, m.value);
      e.wants_mediate = m.wants_mediate;
      check_agent_view(sink);
      return;
    }

    // CompAPO (Algorithm 5): adopt the full solution, self first, then watch
    // view members outside the session for conflicts born of concurrent
    // sessions.
    auto self_it = m.solution.find(id_);
    if (self_it != m.solution.end()) {
      if (value_ != self_it->second) cost_certified_ = false;
      value_ = self_it->second;
    }
    for (auto& [k, e] : view_) {
      auto it = m.solution.find(k);
      if (it != m.solution.end()) {
        set_value(e, it->second);
      } else {
        bool conflict = e.value && counted_violates(id_, value_, k, *e.value);
        if (!conflict) conc_list_.insert({k, from});
      }
    }
    locked_by_.reset();
    broadcast_ok(sink);
    AgentViewEntry& e = upsert(from);
    merge_priority(e, m.priority);
    set_value(e, m.value);
    e.wants_mediate = m.wants_mediate;
    check_agent_view(sink);
  }

  void handle(AgentId from, const CancelMsg& m, MessageSink& sink) {
    merge_priority(upsert(from), m.priority);
    // The sender still wants to mediate; its view entry keeps m = true, so
    // this agent will not join lower-priority sessions meanwhile.
    if (locked_by_ && locked_by_->mediator == from && *locked_by_ == m.session) {
      locked_by_.reset();
      notify_wait_list(sink);  // the session this agent was involved in is over
    }
    check_agent_view(sink);
  }

  void handle(AgentId from, const OkMsg& m, MessageSink& sink) {
    AgentViewEntry& e = upsert(from);
    merge_priority(e, m.priority);
    set_value(e, m.value);
    bool flipped_off = e.wants_mediate && !m.wants_mediate;
    e.wants_mediate = m.wants_mediate;

    if (cfg_.variant != Variant::Apo) {
      bool watched = false;
      for (const auto& [w, mediator] : conc_list_)
        if (w == from) {
          watched = true;
          break;
        }
      if (watched) {
        if (counted_violates(id_, value_, from, m.value)) {
          AddMsg add;
          add.subject = from;
          for (const auto& [w, mediator] : conc_list_)
            if (w == from) sink.send(mediator, add);
        }
        for (auto it = conc_list_.begin(); it != conc_list_.end();)
          it = it->first == from ? conc_list_.erase(it) : ++it;
      }
    }
    // Interrupt hook: a higher-priority agent stopped wanting to mediate.
    if (flipped_off && !wait_list_.empty()) notify_wait_list(sink);
    check_agent_view(sink);
  }

  void handle(AgentId from, const InitMsg& m, MessageSink& sink) {
    absorb_init(from, m);
    if (!good_list_.count(from) && adjacent_to_good_list(from)) grow_good_list(from);
    if (!init_list_.count(from)) {
      sink.send(from, make_init());
    } else {
      init_list_.erase(from);
      if (init_list_.empty()) notify_wait_list(sink);
    }
    check_agent_view(sink);
  }

  void handle(AgentId from, const AddMsg& m, MessageSink& sink) {
    (void)from;
    if (cfg_.variant == Variant::Apo) return;
    AgentId x = m.subject;
    if (x == id_ || good_list_.count(x) || init_list_.count(x) || view_.count(x))
      return;  // handshake already done or pending
    sink.send(x, make_init());
    init_list_.insert(x);
  }

  void handle(AgentId from, const NoSolutionMsg&, MessageSink&) {
    (void)from;
    halted_ = true;
  }

  const ConstraintNetwork* net_;
  AgentId id_;
  AgentConfig cfg_;
  std::vector<int> own_constraints_;

  Value value_ = 0;
  int priority_ = 1;
  bool wants_mediate_ = false;
  bool halted_ = false;
  uint64_t nccc_ = 0;

  std::map<AgentId, AgentViewEntry> view_;
  std::set<AgentId> good_list_;
  std::set<AgentId> init_list_;

  // mediator role
  int counter_ = -1;  // -1: no active reply collection
  uint64_t session_seq_ = 0;
  SessionId session_;
  std::map<AgentId, LabeledDomain> preferences_;

  // participant role
  std::optional<SessionId> locked_by_;

  // CompAPO additions
  std::set<std::pair<AgentId, AgentId>> conc_list_;  // (watched, mediator)
  std::set<AgentId> wait_list_;

  // CompOptAPO: the last mediation this agent ran certified its residual
  // conflict as subproblem-optimal; invalidated on any view or value change.
  bool cost_certified_ = false;
};

}  // namespace apo
