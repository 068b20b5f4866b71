#include <catch2/catch_amalgamated.hpp>
#include <fstream>

#include "apo/monitors.hpp"
#include "apo/oracle.hpp"
#include "apo/scenario.hpp"

using namespace apo;

namespace {

std::string fixture(const std::string& name) {
  return std::string(APO_FIXTURE_DIR) + "/" + name;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CompoundLabel colors_to_label(const ConstraintNetwork& net,
                              const std::vector<std::string>& colors) {
  CompoundLabel label;
  for (int a = 0; a < net.agent_count(); ++a) label[a] = *net.domain(a).index_of(colors[a]);
  return label;
}

}  // namespace

TEST_CASE("figure1 network shape matches the documented neighbor sets") {
  auto net = build_figure1();
  REQUIRE(net.agent_count() == 8);
  auto nbrs = [&](int a) { return net.neighbors(a); };
  REQUIRE(nbrs(0) == std::vector<AgentId>{1, 2, 6, 7});  // A1: A2 A3 A7 A8
  REQUIRE(nbrs(2) == std::vector<AgentId>{0, 1, 3, 4});  // A3: A1 A2 A4 A5
  REQUIRE(nbrs(4) == std::vector<AgentId>{2, 3, 5, 6});  // A5: A3 A4 A6 A7
  REQUIRE(nbrs(6) == std::vector<AgentId>{0, 4, 5, 7});  // A7: A1 A5 A6 A8
  REQUIRE(nbrs(1) == std::vector<AgentId>{0, 2});        // A2: A1 A3
  REQUIRE(nbrs(3) == std::vector<AgentId>{2, 4});
  REQUIRE(nbrs(5) == std::vector<AgentId>{4, 6});
  REQUIRE(nbrs(7) == std::vector<AgentId>{0, 6});
}

TEST_CASE("figure1 initial assignment violates exactly (A1,A2) and (A5,A6)") {
  auto net = build_figure1();
  auto label = colors_to_label(net, figure1_initial_colors());
  auto violated = net.violated_edges(label);
  REQUIRE(violated == std::vector<std::pair<AgentId, AgentId>>{{0, 1}, {4, 5}});
}

TEST_CASE("configuration-3 values violate exactly (A3,A4) and (A7,A8)") {
  auto net = build_figure1();
  auto label = colors_to_label(net, {"G", "B", "R", "R", "G", "B", "R", "R"});
  auto violated = net.violated_edges(label);
  REQUIRE(violated == std::vector<std::pair<AgentId, AgentId>>{{2, 3}, {6, 7}});
}

TEST_CASE("dashed edges allow (R,R) and mixed colors, forbid (G,G) and (B,B)") {
  auto net = build_figure1();
  auto idx = [&](int a, const char* c) { return *net.domain(a).index_of(c); };
  // (A5,A7) dashed: (R,R) not violated
  REQUIRE_FALSE(net.violates(4, idx(4, "R"), 6, idx(6, "R")));
  REQUIRE(net.violates(4, idx(4, "G"), 6, idx(6, "G")));
  REQUIRE(net.violates(4, idx(4, "B"), 6, idx(6, "B")));
  // (A1,A3) dashed: (G,B) allowed, (G,G) forbidden
  REQUIRE_FALSE(net.violates(0, idx(0, "G"), 2, idx(2, "B")));
  REQUIRE(net.violates(0, idx(0, "G"), 2, idx(2, "G")));
  // ring edge (A1,A2): equal colors forbidden
  REQUIRE(net.violates(0, idx(0, "R"), 1, idx(1, "R")));
  REQUIRE_FALSE(net.violates(0, idx(0, "R"), 1, idx(1, "G")));
}

TEST_CASE("figure1 is satisfiable and the oracle's answer verifies") {
  auto net = build_figure1();
  auto sol = oracle_solve(net);
  REQUIRE(sol);
  REQUIRE(net.label_cost(*sol) == 0);
}

TEST_CASE("figure1 problem fixture file round-trips to the builder") {
  auto net = build_figure1();
  auto from_file = load_network(read_file(fixture("figure1.problem")));
  REQUIRE(networks_equal(net, from_file));
}

TEST_CASE("tables 1 and 3 are isomorphic under rotation with color swap") {
  REQUIRE(isomorphic_snapshots(table1(), table3()));
  REQUIRE(isomorphic_snapshots(table2(), table4()));
  REQUIRE(isomorphic_snapshots(table1(), table1()));
  REQUIRE_FALSE(isomorphic_snapshots(table1(), table2()));
  // the involution property: applying the rotation twice more returns home
  auto t = table1();
  REQUIRE(apply_isomorphism(apply_isomorphism(t, 2), 2) == t);
  REQUIRE(apply_isomorphism(t, 1) == table3());
}

TEST_CASE("plain fifo run of figure1 under APO reaches configuration 1 exactly") {
  auto net = build_figure1();
  auto cfgs = figure1_configs(Variant::Apo);
  SimConfig sc;
  sc.event_budget = 2000;
  Simulation sim(net, cfgs, sc);
  SnapshotCounter t1(table1(), /*exact=*/true);
  sim.add_observer([&](const Simulation& s, const DeliveryRecord& r) { t1(s, r); });
  sim.run();
  REQUIRE(t1.visits() >= 1);
  REQUIRE(t1.first_seqs().front() == 36);  // right after the init-phase ok? waves
}

TEST_CASE("section4 script under APO revisits configuration 1 and matches tables") {
  auto net = build_figure1();
  auto script = parse_script(read_file(fixture("section4.script")));
  auto cfgs = figure1_configs(Variant::Apo);
  SimConfig sc;
  sc.policy = SchedulerPolicy::scripted(script);
  sc.event_budget = 100'000;
  Simulation sim(net, cfgs, sc);

  SnapshotCounter iso1(table1(), /*exact=*/false);
  SnapshotCounter t1(table1(), true), t2(table2(), true), t3(table3(), true),
      t4(table4(), true);
  InvariantMonitor monitor;
  monitor.attach(sim);
  sim.add_observer([&](const Simulation& s, const DeliveryRecord& r) {
    iso1(s, r);
    t1(s, r);
    t2(s, r);
    t3(s, r);
    t4(s, r);
  });
  auto out = sim.run();

  INFO("monitor: " << (monitor.violations().empty() ? "" : monitor.violations().front()));
  REQUIRE(monitor.clean());
  REQUIRE(t1.visits() >= 1);
  REQUIRE(t2.visits() >= 1);  // exact-mode detection, recorded
  REQUIRE(t3.visits() >= 1);
  REQUIRE(t4.visits() >= 1);
  // configuration 1 (up to isomorphism) is revisited at least twice after the start
  REQUIRE(iso1.visits() >= 3);
  // the scripted livelock consumes the whole budget
  REQUIRE(out.status == RunStatus::EventBudgetExhausted);
}

TEST_CASE("section4 script under CompAPO terminates with a verified solution") {
  auto net = build_figure1();
  auto script = parse_script(read_file(fixture("section4.script")));
  auto cfgs = figure1_configs(Variant::CompApo);
  SimConfig sc;
  sc.policy = SchedulerPolicy::scripted(script);
  sc.event_budget = 100'000;
  Simulation sim(net, cfgs, sc);
  InvariantMonitor monitor;
  monitor.attach(sim);
  auto out = sim.run();

  REQUIRE(out.status == RunStatus::Solved);
  REQUIRE(out.label);
  REQUIRE(net.label_cost(*out.label) == 0);
  REQUIRE(monitor.clean());
  monitor.check_bidirectional(sim);
  REQUIRE(monitor.clean());
  // the completeness fixes are exercised, not bypassed
  REQUIRE(out.metrics.count(MsgType::Cancel) + out.metrics.count(MsgType::Add) >= 1);
}
