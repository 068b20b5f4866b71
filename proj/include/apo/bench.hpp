#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "apo/monitors.hpp"
#include "apo/oracle.hpp"
#include "apo/sim.hpp"

namespace apo {

// Algorithm-variant selector shared by the CLI and the sweep driver.
struct VariantSpec {
  Variant variant = Variant::CompApo;
  SearchStrategy strategy = SearchStrategy::BranchAndBound;
  std::string name;
};

inline bool parse_variant(const std::string& name, VariantSpec& out) {
  out.name = name;
  if (name == "apo-bb") {
    out.variant = Variant::Apo;
    out.strategy = SearchStrategy::BranchAndBound;
  } else if (name == "apo-bt") {
    out.variant = Variant::Apo;
    out.strategy = SearchStrategy::Backtrack;
  } else if (name == "compapo-bb" || name == "compapo") {
    out.variant = Variant::CompApo;
    out.strategy = SearchStrategy::BranchAndBound;
  } else if (name == "compapo-bt") {
    out.variant = Variant::CompApo;
    out.strategy = SearchStrategy::Backtrack;
  } else if (name == "compoptapo") {
    out.variant = Variant::CompOptApo;
    out.strategy = SearchStrategy::BranchAndBound;
  } else {
    return false;
  }
  return true;
}

struct ExperimentSpec {
  std::vector<std::string> variants{"compapo-bb"};
  int n = 10;
  int k = 5;
  std::vector<double> p1{0.4};
  std::vector<double> p2{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int instances = 30;
  uint64_t seed = 1;
  WaitMode wait_mode = WaitMode::Interrupt;
  uint64_t event_budget = 1'000'000;
  std::string policy = "fifo";  // fifo | random
  uint64_t policy_seed = 0;
};

struct ResultRow {
  std::string variant;
  int n = 0;
  int k = 0;
  double p1 = 0;
  double p2 = 0;
  uint64_t seed = 0;
  RunStatus status = RunStatus::EventBudgetExhausted;
  uint64_t nccc = 0;
  uint64_t messages = 0;
  uint64_t per_type[kMsgTypeCount] = {};
  int largest_session = 0;
  long optimal_cost = -1;  // CompOptAPO runs only
  uint64_t events = 0;
};

inline const char* status_tag(RunStatus s) {
  switch (s) {
    case RunStatus::Solved: return "solved";
    case RunStatus::Unsat: return "unsat";
    case RunStatus::EventBudgetExhausted: return "budget";
  }
  return "?";
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic per-(cell, instance) seed derivation from the master seed.
inline uint64_t instance_seed(uint64_t master, size_t p1_idx, size_t p2_idx, int inst) {
  uint64_t h = splitmix64(master ^ splitmix64(p1_idx + 1));
  h = splitmix64(h ^ splitmix64(p2_idx + 101));
  return splitmix64(h ^ splitmix64(static_cast<uint64_t>(inst) + 10007));
}

inline RunOutcome run_instance(const ConstraintNetwork& net, const VariantSpec& vs,
                               WaitMode wait_mode, const SchedulerPolicy& policy,
                               uint64_t value_seed, uint64_t budget,
                               bool record_log = false) {
  std::vector<AgentConfig> cfgs(net.agent_count());
  for (auto& c : cfgs) {
    c.variant = vs.variant;
    c.strategy = vs.strategy;
    c.wait_mode = wait_mode;
    c.tie_break = TieBreak::HighIndex;
    c.value_seed = value_seed;
  }
  SimConfig sc;
  sc.policy = policy;
  sc.event_budget = budget;
  sc.record_log = record_log;
  Simulation sim(net, cfgs, sc);
  return sim.run();
}

inline std::vector<ResultRow> run_sweep(const ExperimentSpec& spec) {
  std::vector<ResultRow> rows;
  for (const auto& vname : spec.variants) {
    VariantSpec vs;
    if (!parse_variant(vname, vs)) throw std::invalid_argument("unknown variant " + vname);
    for (size_t i1 = 0; i1 < spec.p1.size(); ++i1) {
      for (size_t i2 = 0; i2 < spec.p2.size(); ++i2) {
        for (int inst = 0; inst < spec.instances; ++inst) {
          uint64_t seed = instance_seed(spec.seed, i1, i2, inst);
          auto net = generate_random(spec.n, spec.k, spec.p1[i1], spec.p2[i2], seed);
          SchedulerPolicy pol = spec.policy == "random"
                                    ? SchedulerPolicy::seeded(splitmix64(seed ^ spec.policy_seed))
                                    : SchedulerPolicy::fifo();
          auto out = run_instance(net, vs, spec.wait_mode, pol, splitmix64(seed + 17),
                                  spec.event_budget);
          ResultRow row;
          row.variant = vname;
          row.n = spec.n;
          row.k = spec.k;
          row.p1 = spec.p1[i1];
          row.p2 = spec.p2[i2];
          row.seed = seed;
          row.status = out.status;
          row.nccc = out.metrics.nccc;
          row.messages = out.metrics.messages_sent;
          for (int t = 0; t < kMsgTypeCount; ++t) row.per_type[t] = out.metrics.per_type[t];
          row.largest_session = out.metrics.largest_session;
          row.events = out.metrics.deliveries;
          if (vs.variant == Variant::CompOptApo && out.status == RunStatus::Solved)
            row.optimal_cost = derive_global_cost(net, *out.label).global_cost;
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

inline const char* kResultsCsvHeader =
    "variant,n,k,p1,p2,seed,status,nccc,messages,"
    "msg_init,msg_ok,msg_evaluate_req,msg_evaluate_resp,msg_wait,msg_accept,"
    "msg_cancel,msg_add,msg_no_solution,largest_session,optimal_cost,events";

inline std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "# schema=apo-bench-1\n" << kResultsCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.variant << "," << r.n << "," << r.k << "," << r.p1 << "," << r.p2 << ","
        << r.seed << "," << status_tag(r.status) << "," << r.nccc << "," << r.messages;
    for (int t = 0; t < kMsgTypeCount; ++t) out << "," << r.per_type[t];
    out << "," << r.largest_session << ",";
    if (r.optimal_cost >= 0) out << r.optimal_cost;
    out << "," << r.events << "\n";
  }
  return out.str();
}

// Per-cell aggregates.
struct CellSummary {
  std::string variant;
  int n = 0;
  int k = 0;
  double p1 = 0;
  double p2 = 0;
  int runs = 0;
  double solved_fraction = 0;
  double nccc_mean = 0;
  double nccc_median = 0;
  double messages_mean = 0;
  double messages_median = 0;
  double largest_session_mean = 0;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

inline std::vector<CellSummary> summarize(const std::vector<ResultRow>& rows) {
  std::map<std::tuple<std::string, int, int, double, double>, std::vector<const ResultRow*>>
      cells;
  for (const auto& r : rows)
    cells[{r.variant, r.n, r.k, r.p1, r.p2}].push_back(&r);
  std::vector<CellSummary> out;
  for (const auto& [key, cell] : cells) {
    CellSummary s;
    std::tie(s.variant, s.n, s.k, s.p1, s.p2) = key;
    s.runs = static_cast<int>(cell.size());
    std::vector<double> ncccs, msgs;
    double solved = 0, sess = 0;
    for (const ResultRow* r : cell) {
      ncccs.push_back(static_cast<double>(r->nccc));
      msgs.push_back(static_cast<double>(r->messages));
      if (r->status == RunStatus::Solved) solved += 1;
      sess += r->largest_session;
    }
    s.solved_fraction = solved / s.runs;
    s.nccc_mean = std::accumulate(ncccs.begin(), ncccs.end(), 0.0) / s.runs;
    s.nccc_median = median_of(ncccs);
    s.messages_mean = std::accumulate(msgs.begin(), msgs.end(), 0.0) / s.runs;
    s.messages_median = median_of(msgs);
    s.largest_session_mean = sess / s.runs;
    out.push_back(s);
  }
  return out;
}

inline std::string summary_csv(const std::vector<CellSummary>& cells) {
  std::ostringstream out;
  out << "# schema=apo-summary-1\n"
      << "variant,n,k,p1,p2,runs,solved_fraction,nccc_mean,nccc_median,"
         "messages_mean,messages_median,largest_session_mean\n";
  for (const auto& s : cells)
    out << s.variant << "," << s.n << "," << s.k << "," << s.p1 << "," << s.p2 << ","
        << s.runs << "," << s.solved_fraction << "," << s.nccc_mean << "," << s.nccc_median
        << "," << s.messages_mean << "," << s.messages_median << ","
        << s.largest_session_mean << "\n";
  return out.str();
}

}  // namespace apo
