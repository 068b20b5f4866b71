#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apo/sim.hpp"

namespace apo {

// The eight-agent 3-coloring instance behind the non-termination example:
// a ring of inequality constraints A1..A8 plus four weaker diagonals that
// forbid only (G,G) and (B,B). Agent ids are 0-based (A1 = 0).
//
// Domain iteration orders are part of the fixture: the mediator search
// enumerates values in domain order, and these orders make the internal
// branch-and-bound reproduce the documented session solutions.
inline ConstraintNetwork build_figure1() {
  const std::array<std::vector<std::string>, 8> domains = {{
      {"G", "B", "R"},  // A1
      {"B", "G", "R"},  // A2
      {"B", "G", "R"},  // A3
      {"G", "B", "R"},  // A4
      {"G", "B", "R"},  // A5
      {"B", "G", "R"},  // A6
      {"B", "G", "R"},  // A7
      {"G", "B", "R"},  // A8
  }};
  std::vector<Domain> doms(8);
  for (int a = 0; a < 8; ++a) doms[a].values = domains[a];
  ConstraintNetwork net(std::move(doms));

  auto forbid_equal = [&](int i, int j) {
    int id = net.add_constraint(i, j);
    auto& c = net.constraint(id);
    for (Value vi = 0; vi < 3; ++vi)
      for (Value vj = 0; vj < 3; ++vj)
        if (net.domain(c.lo).values[vi] == net.domain(c.hi).values[vj])
          c.set_forbidden(vi, vj);
  };
  auto forbid_gg_bb = [&](int i, int j) {
    int id = net.add_constraint(i, j);
    auto& c = net.constraint(id);
    for (Value vi = 0; vi < 3; ++vi)
      for (Value vj = 0; vj < 3; ++vj) {
        const auto& ti = net.domain(c.lo).values[vi];
        const auto& tj = net.domain(c.hi).values[vj];
        if ((ti == "G" && tj == "G") || (ti == "B" && tj == "B"))
          c.set_forbidden(vi, vj);
      }
  };

  for (int i = 0; i < 8; ++i) forbid_equal(i, (i + 1) % 8);  // the ring
  forbid_gg_bb(0, 2);
  forbid_gg_bb(2, 4);
  forbid_gg_bb(4, 6);
  forbid_gg_bb(6, 0);
  return net;
}

// Initial assignment of Figure 1: (A1..A8) = (R, R, B, G, R, R, B, G).
inline std::vector<std::string> figure1_initial_colors() {
  return {"R", "R", "B", "G", "R", "R", "B", "G"};
}

inline std::vector<AgentConfig> figure1_configs(Variant variant,
                                                WaitMode wait_mode = WaitMode::Busy) {
  auto net = build_figure1();
  auto colors = figure1_initial_colors();
  std::vector<AgentConfig> cfgs(8);
  for (int a = 0; a < 8; ++a) {
    cfgs[a].variant = variant;
    cfgs[a].strategy = SearchStrategy::BranchAndBound;
    cfgs[a].wait_mode = wait_mode;
    cfgs[a].tie_break = TieBreak::LowIndex;  // anti-lexicographic names
    cfgs[a].initial_value = *net.domain(a).index_of(colors[a]);
  }
  return cfgs;
}

// ---- configuration snapshots (Tables 1-4) ----

struct SnapshotAgent {
  std::string color;
  bool m = false;
  std::map<AgentId, std::string> view_colors;
  std::map<AgentId, bool> view_m;
};

struct ConfigurationSnapshot {
  std::array<SnapshotAgent, 8> agents;

  friend bool operator==(const ConfigurationSnapshot& a,
                         const ConfigurationSnapshot& b) {
    for (int i = 0; i < 8; ++i) {
      const auto& x = a.agents[i];
      const auto& y = b.agents[i];
      if (x.color != y.color || x.m != y.m || x.view_colors != y.view_colors ||
          x.view_m != y.view_m)
        return false;
    }
    return true;
  }
};

inline ConfigurationSnapshot capture_snapshot(const Simulation& sim) {
  ConfigurationSnapshot snap;
  const auto& net = sim.network();
  for (int a = 0; a < 8; ++a) {
    const Agent& ag = sim.agent(a);
    snap.agents[a].color = net.domain(a).values[ag.value()];
    snap.agents[a].m = ag.wants_mediate();
    for (const auto& [peer, entry] : ag.view()) {
      if (entry.value) snap.agents[a].view_colors[peer] = net.domain(peer).values[*entry.value];
      snap.agents[a].view_m[peer] = entry.wants_mediate;
    }
  }
  return snap;
}

// The graph automorphisms of Figure 1: rotation by two positions composed
// with the color swap G<->B (the diagonals forbid only (G,G)/(B,B), so R is
// fixed). Applying `steps` rotations maps agent a to a+2*steps.
inline ConfigurationSnapshot apply_isomorphism(const ConfigurationSnapshot& s, int steps) {
  auto swap_color = [steps](const std::string& c) {
    if (steps % 2 == 0) return c;
    if (c == "G") return std::string("B");
    if (c == "B") return std::string("G");
    return c;
  };
  ConfigurationSnapshot out;
  int shift = (2 * steps) % 8;
  for (int a = 0; a < 8; ++a) {
    int target = (a + shift) % 8;
    const auto& src = s.agents[a];
    auto& dst = out.agents[target];
    dst.color = swap_color(src.color);
    dst.m = src.m;
    for (const auto& [peer, col] : src.view_colors)
      dst.view_colors[(peer + shift) % 8] = swap_color(col);
    for (const auto& [peer, m] : src.view_m) dst.view_m[(peer + shift) % 8] = m;
  }
  return out;
}

inline bool isomorphic_snapshots(const ConfigurationSnapshot& a,
                                 const ConfigurationSnapshot& b) {
  for (int steps = 0; steps < 4; ++steps)
    if (apply_isomorphism(a, steps) == b) return true;
  return false;
}

// ---- the paper's table data ----
//
// Each entry: color, m flag, then per listed neighbor the stored (color, m).

namespace detail {

struct TableRow {
  const char* color;
  bool m;
  const char* peers;  // "2:R,t 3:B,f ..." with 1-based agent names
};

inline ConfigurationSnapshot snapshot_from_rows(const std::array<TableRow, 8>& rows) {
  ConfigurationSnapshot snap;
  for (int a = 0; a < 8; ++a) {
    snap.agents[a].color = rows[a].color;
    snap.agents[a].m = rows[a].m;
    std::istringstream in(rows[a].peers);
    std::string item;
    while (in >> item) {
      int peer = std::stoi(item.substr(0, item.find(':'))) - 1;
      char color = item[item.find(':') + 1];
      char m = item[item.find(',') + 1];
      snap.agents[a].view_colors[peer] = std::string(1, color);
      snap.agents[a].view_m[peer] = m == 't';
    }
  }
  return snap;
}

}  // namespace detail

// Table 1 (configuration 1).
inline ConfigurationSnapshot table1() {
  return detail::snapshot_from_rows({{
      {"R", true, "2:R,t 3:B,f 7:B,f 8:G,f"},
      {"R", true, "1:R,t 3:B,f"},
      {"B", false, "1:R,t 2:R,t 4:G,f 5:R,t"},
      {"G", false, "3:B,f 5:R,t"},
      {"R", true, "3:B,f 4:G,f 6:R,t 7:B,f"},
      {"R", true, "5:R,t 7:B,f"},
      {"B", false, "1:R,t 5:R,t 6:R,t 8:G,f"},
      {"G", false, "1:R,t 7:B,f"},
  }});
}

// Table 2 (configuration 2) - stale entries included as printed.
inline ConfigurationSnapshot table2() {
  return detail::snapshot_from_rows({{
      {"G", false, "2:B,f 3:R,f 7:B,f 8:R,f"},
      {"B", false, "1:G,f 3:R,f"},
      {"R", false, "1:G,f 2:B,f 4:G,f 5:R,t"},
      {"G", false, "3:B,f 5:R,t"},
      {"R", true, "3:B,f 4:G,f 6:R,t 7:B,f"},
      {"R", true, "5:R,t 7:B,f"},
      {"B", false, "1:G,f 5:R,t 6:R,t 8:G,f"},
      {"R", false, "1:G,f 7:B,f"},
  }});
}

// Table 3 (configuration 3).
inline ConfigurationSnapshot table3() {
  return detail::snapshot_from_rows({{
      {"G", false, "2:B,f 3:R,t 7:R,t 8:R,t"},
      {"B", false, "1:G,f 3:R,t"},
      {"R", true, "1:G,f 2:B,f 4:R,t 5:G,f"},
      {"R", true, "3:R,t 5:G,f"},
      {"G", false, "3:R,t 4:R,t 6:B,f 7:R,t"},
      {"B", false, "5:G,f 7:R,t"},
      {"R", true, "1:G,f 5:G,f 6:B,f 8:R,t"},
      {"R", true, "1:G,f 7:R,t"},
  }});
}

// Table 4 (configuration 4) - stale entries included as printed. A7's own
// color is recorded as R: the printed B contradicts the narrative (A7 cannot
// recolor before its session ends) and the rotation symmetry with
// configuration 2; B is the value its upcoming session assigns.
inline ConfigurationSnapshot table4() {
  return detail::snapshot_from_rows({{
      {"G", false, "2:B,f 3:B,f 7:R,t 8:R,t"},
      {"R", false, "1:G,f 3:B,f"},
      {"B", false, "1:G,f 2:R,f 4:G,f 5:R,f"},
      {"G", false, "3:B,f 5:R,f"},
      {"R", false, "3:B,f 4:G,f 6:B,f 7:R,t"},
      {"B", false, "5:G,f 7:R,t"},
      {"R", true, "1:G,f 5:G,f 6:B,f 8:R,t"},
      {"R", true, "1:G,f 7:R,t"},
  }});
}

inline ConfigurationSnapshot paper_table(int n) {
  switch (n) {
    case 1: return table1();
    case 2: return table2();
    case 3: return table3();
    case 4: return table4();
  }
  throw std::invalid_argument("table must be 1..4");
}

// Detector: does the current simulation state match the given table, either
// exactly or up to the rotation/color-swap isomorphism class?
inline bool detect_configuration(const Simulation& sim, int table, bool exact = true) {
  auto snap = capture_snapshot(sim);
  auto want = paper_table(table);
  return exact ? snap == want : isomorphic_snapshots(snap, want);
}

// Observer that counts distinct (edge-triggered) visits to states matching a
// snapshot, exactly or isomorphically.
class SnapshotCounter {
 public:
  SnapshotCounter(ConfigurationSnapshot target, bool exact)
      : target_(std::move(target)), exact_(exact) {}

  void operator()(const Simulation& sim, const DeliveryRecord& rec) {
    auto snap = capture_snapshot(sim);
    bool match = exact_ ? snap == target_ : isomorphic_snapshots(snap, target_);
    if (match && !inside_) {
      ++visits_;
      first_seqs_.push_back(rec.seq);
    }
    inside_ = match;
  }

  int visits() const { return visits_; }
  const std::vector<uint64_t>& first_seqs() const { return first_seqs_; }

 private:
  ConfigurationSnapshot target_;
  bool exact_;
  bool inside_ = false;
  int visits_ = 0;
  std::vector<uint64_t> first_seqs_;
};

}  // namespace apo
