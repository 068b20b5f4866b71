#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "apo/bench.hpp"
#include "apo/monitors.hpp"
#include "apo/oracle.hpp"
#include "apo/scenario.hpp"
#include "apo/sim.hpp"

using namespace apo;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string fixture_path(const std::string& name) {
#ifdef APO_FIXTURE_DIR
  return std::string(APO_FIXTURE_DIR) + "/" + name;
#else
  return "fixtures/" + name;
#endif
}

std::string label_to_string(const ConstraintNetwork& net, const CompoundLabel& label) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [a, v] : label) {
    if (!first) out << " ";
    first = false;
    out << a << "=" << net.domain(a).values[v];
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"APO / CompAPO / CompOptAPO simulation toolkit"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a random DisCSP instance");
  int g_n = 10, g_k = 5;
  double g_p1 = 0.4, g_p2 = 0.5;
  uint64_t g_seed = 1;
  std::string g_out;
  gen->add_option("--n", g_n, "agent count");
  gen->add_option("--k", g_k, "domain size");
  gen->add_option("--p1", g_p1, "constraint density");
  gen->add_option("--p2", g_p2, "constraint tightness");
  gen->add_option("--seed", g_seed, "generator seed");
  gen->add_option("--out", g_out, "output file (default stdout)");
  gen->callback([&] {
    auto net = generate_random(g_n, g_k, g_p1, g_p2, g_seed);
    auto text = save_network(net);
    if (g_out.empty())
      std::cout << text;
    else
      write_file(g_out, text);
  });

  // ---- solve-oracle ----
  auto* oracle = app.add_subcommand("solve-oracle", "centralized ground-truth solver");
  std::string o_in;
  bool o_opt = false;
  oracle->add_option("--in", o_in, "problem file")->required();
  oracle->add_flag("--opt", o_opt, "report the Max-DisCSP optimum instead");
  oracle->callback([&] {
    auto net = load_network(read_file(o_in));
    if (o_opt) {
      auto mc = oracle_min_cost(net);
      std::cout << "cost " << mc.cost << "\n" << label_to_string(net, mc.label) << "\n";
    } else if (auto sol = oracle_solve(net)) {
      std::cout << "sat\n" << label_to_string(net, *sol) << "\n";
    } else {
      std::cout << "unsat\n";
    }
  });

  // ---- run ----
  auto* run = app.add_subcommand("run", "run one simulation on a problem file");
  std::string r_in, r_variant = "compapo-bb", r_policy = "fifo", r_log, r_wait = "interrupt";
  uint64_t r_policy_seed = 0, r_value_seed = 1, r_budget = 1'000'000;
  run->add_option("--in", r_in, "problem file")->required();
  run->add_option("--variant", r_variant, "apo-bb|apo-bt|compapo-bb|compapo-bt|compoptapo");
  run->add_option("--policy", r_policy, "fifo|random");
  run->add_option("--policy-seed", r_policy_seed, "random-policy seed");
  run->add_option("--value-seed", r_value_seed, "initial value seed");
  run->add_option("--budget", r_budget, "event budget");
  run->add_option("--wait-mode", r_wait, "interrupt|busy");
  run->add_option("--log", r_log, "write delivery log CSV here");
  run->callback([&] {
    auto net = load_network(read_file(r_in));
    VariantSpec vs;
    if (!parse_variant(r_variant, vs)) throw CLI::ValidationError("unknown variant");
    WaitMode wm = r_wait == "busy" ? WaitMode::Busy : WaitMode::Interrupt;
    std::vector<AgentConfig> cfgs(net.agent_count());
    for (auto& c : cfgs) {
      c.variant = vs.variant;
      c.strategy = vs.strategy;
      c.wait_mode = wm;
      c.value_seed = r_value_seed;
    }
    SimConfig sc;
    sc.policy = r_policy == "random" ? SchedulerPolicy::seeded(r_policy_seed)
                                     : SchedulerPolicy::fifo();
    sc.event_budget = r_budget;
    Simulation sim(net, cfgs, sc);
    auto out = sim.run();
    std::cout << "status " << status_tag(out.status) << "\n";
    std::cout << "nccc " << out.metrics.nccc << "\n";
    std::cout << "messages " << out.metrics.messages_sent << "\n";
    std::cout << "events " << out.metrics.deliveries << "\n";
    std::cout << "largest_session " << out.metrics.largest_session << "\n";
    if (out.label) {
      std::cout << "label " << label_to_string(net, *out.label) << "\n";
      if (vs.variant == Variant::CompOptApo)
        std::cout << "optimal_cost " << derive_global_cost(net, *out.label).global_cost
                  << "\n";
    }
    if (!r_log.empty()) write_file(r_log, sim.event_log_csv());
  });

  // ---- replay ----
  auto* replay = app.add_subcommand("replay", "replay the scripted delay scenario");
  std::string p_variant = "apo", p_script = "section4", p_problem, p_log;
  uint64_t p_budget = 100'000;
  bool p_trace = false, p_tables = false;
  replay->add_option("--variant", p_variant, "apo|compapo");
  replay->add_option("--script", p_script, "script name or path");
  replay->add_option("--problem", p_problem, "problem file (default figure1 fixture)");
  replay->add_option("--budget", p_budget, "event budget");
  replay->add_option("--log", p_log, "write delivery log CSV here");
  replay->add_flag("--trace", p_trace, "print each delivery");
  replay->add_flag("--tables", p_tables, "print table detections per delivery");
  replay->callback([&] {
    ConstraintNetwork net =
        p_problem.empty() ? load_network(read_file(fixture_path("figure1.problem")))
                          : load_network(read_file(p_problem));
    std::string script_file = p_script;
    if (script_file.find('/') == std::string::npos &&
        script_file.find(".script") == std::string::npos)
      script_file = fixture_path(script_file + ".script");
    auto script = parse_script(read_file(script_file));

    Variant variant = Variant::Apo;
    if (p_variant == "compapo" || p_variant == "compapo-bb") variant = Variant::CompApo;
    else if (p_variant != "apo" && p_variant != "apo-bb")
      throw CLI::ValidationError("replay variant must be apo or compapo");

    auto cfgs = figure1_configs(variant, WaitMode::Busy);
    SimConfig sc;
    sc.policy = SchedulerPolicy::scripted(script);
    sc.event_budget = p_budget;
    Simulation sim(net, cfgs, sc);

    SnapshotCounter config1_iso(table1(), /*exact=*/false);
    std::array<SnapshotCounter, 4> exact{
        SnapshotCounter(table1(), true), SnapshotCounter(table2(), true),
        SnapshotCounter(table3(), true), SnapshotCounter(table4(), true)};
    sim.add_observer([&](const Simulation& s, const DeliveryRecord& r) {
      config1_iso(s, r);
      for (auto& c : exact) c(s, r);
      if (p_trace) {
        std::cout << r.seq << ": " << r.sender + 1 << " -> " << r.receiver + 1 << "  "
                  << type_tag(r.type) << "\n";
      }
      if (p_tables) {
        for (int t = 1; t <= 4; ++t)
          if (detect_configuration(s, t, true))
            std::cout << "  @" << r.seq << " matches table " << t << "\n";
      }
    });

    auto out = sim.run();
    std::cout << "status " << status_tag(out.status) << "\n";
    std::cout << "events " << out.metrics.deliveries << "\n";
    std::cout << "config1_isomorphic_visits " << config1_iso.visits() << "\n";
    for (int t = 0; t < 4; ++t) {
      std::cout << "table" << t + 1 << "_exact_visits " << exact[t].visits();
      if (!exact[t].first_seqs().empty())
        std::cout << " (first at " << exact[t].first_seqs().front() << ")";
      std::cout << "\n";
    }
    std::cout << "cancels " << out.metrics.count(MsgType::Cancel) << "\n";
    std::cout << "adds " << out.metrics.count(MsgType::Add) << "\n";
    if (out.label) std::cout << "label " << label_to_string(net, *out.label) << "\n";
    if (!p_log.empty()) write_file(p_log, sim.event_log_csv());
  });

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "parameter sweep; emits a results CSV");
  ExperimentSpec spec;
  std::string b_out = "results.csv", b_summary, b_wait = "interrupt";
  bench->add_option("--variant", spec.variants, "variant names");
  bench->add_option("--n", spec.n, "agent count");
  bench->add_option("--k", spec.k, "domain size");
  bench->add_option("--p1", spec.p1, "density values");
  bench->add_option("--p2", spec.p2, "tightness values");
  bench->add_option("--instances", spec.instances, "instances per cell");
  bench->add_option("--seed", spec.seed, "master seed");
  bench->add_option("--wait-mode", b_wait, "interrupt|busy");
  bench->add_option("--budget", spec.event_budget, "event budget per run");
  bench->add_option("--policy", spec.policy, "fifo|random");
  bench->add_option("--policy-seed", spec.policy_seed, "random-policy seed");
  bench->add_option("--out", b_out, "results CSV path");
  bench->add_option("--summary", b_summary, "also write per-cell summary CSV");
  bench->callback([&] {
    spec.wait_mode = b_wait == "busy" ? WaitMode::Busy : WaitMode::Interrupt;
    auto rows = run_sweep(spec);
    write_file(b_out, results_csv(rows));
    std::cout << "wrote " << rows.size() << " rows to " << b_out << "\n";
    if (!b_summary.empty()) {
      write_file(b_summary, summary_csv(summarize(rows)));
      std::cout << "wrote summary to " << b_summary << "\n";
    }
  });

  // ---- summarize ----
  auto* summ = app.add_subcommand("summarize", "aggregate a results CSV per cell");
  std::string s_in, s_out = "summary.csv";
  summ->add_option("--in", s_in, "results CSV")->required();
  summ->add_option("--out", s_out, "summary CSV path");
  summ->callback([&] {
    std::ifstream in(s_in);
    if (!in) throw std::runtime_error("cannot open " + s_in);
    std::string line;
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("variant,", 0) == 0) continue;
      std::istringstream ls(line);
      std::string field;
      std::vector<std::string> f;
      while (std::getline(ls, field, ',')) f.push_back(field);
      if (f.size() < 21) continue;
      ResultRow r;
      r.variant = f[0];
      r.n = std::stoi(f[1]);
      r.k = std::stoi(f[2]);
      r.p1 = std::stod(f[3]);
      r.p2 = std::stod(f[4]);
      r.seed = std::stoull(f[5]);
      r.status = f[6] == "solved" ? RunStatus::Solved
                 : f[6] == "unsat" ? RunStatus::Unsat
                                   : RunStatus::EventBudgetExhausted;
      r.nccc = std::stoull(f[7]);
      r.messages = std::stoull(f[8]);
      for (int t = 0; t < kMsgTypeCount; ++t) r.per_type[t] = std::stoull(f[9 + t]);
      r.largest_session = std::stoi(f[18]);
      r.optimal_cost = f[19].empty() ? -1 : std::stol(f[19]);
      r.events = std::stoull(f[20]);
      rows.push_back(std::move(r));
    }
    write_file(s_out, summary_csv(summarize(rows)));
    std::cout << "wrote summary to " << s_out << "\n";
  });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
