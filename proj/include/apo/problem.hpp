#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace apo {

using AgentId = int;
using Value = int;  // index into the owning agent's domain

// Ordered list of value tokens. Iteration order is fixed: the protocol and
// the mediator search enumerate values in exactly this order.
struct Domain {
  std::vector<std::string> values;

  int size() const { return static_cast<int>(values.size()); }
  bool empty() const { return values.empty(); }

  std::optional<Value> index_of(const std::string& token) const {
    for (int i = 0; i < size(); ++i)
      if (values[i] == token) return i;
    return std::nullopt;
  }
};

// Binary constraint between two agents, stored as an explicit forbidden-pair
// matrix oriented by ascending endpoint index (lo < hi).
struct BinaryConstraint {
  AgentId lo = 0;
  AgentId hi = 0;
  int weight = 1;
  int lo_domain = 0;
  int hi_domain = 0;
  std::vector<uint8_t> forbid;  // lo_domain x hi_domain matrix

  bool forbids(Value vlo, Value vhi) const {
    return forbid[static_cast<size_t>(vlo) * hi_domain + vhi] != 0;
  }
  void set_forbidden(Value vlo, Value vhi, bool f = true) {
    forbid[static_cast<size_t>(vlo) * hi_domain + vhi] = f ? 1 : 0;
  }
  int forbidden_count() const {
    int c = 0;
    for (uint8_t b : forbid) c += b;
    return c;
  }
  AgentId other(AgentId a) const { return a == lo ? hi : lo; }
};

// Partial or total assignment.
using CompoundLabel = std::map<AgentId, Value>;

class ConstraintNetwork {
 public:
  ConstraintNetwork() = default;

  explicit ConstraintNetwork(std::vector<Domain> domains)
      : domains_(std::move(domains)) {
    const int n = agent_count();
    edge_index_.assign(static_cast<size_t>(n) * n, -1);
    neighbors_.assign(n, {});
  }

  int agent_count() const { return static_cast<int>(domains_.size()); }
  const Domain& domain(AgentId a) const { return domains_.at(a); }
  const std::vector<Domain>& domains() const { return domains_; }
  const std::vector<BinaryConstraint>& constraints() const { return constraints_; }
  const std::vector<AgentId>& neighbors(AgentId a) const { return neighbors_.at(a); }

  int add_constraint(AgentId i, AgentId j, int weight = 1) {
    check_agent(i);
    check_agent(j);
    if (i == j) throw std::invalid_argument("constraint endpoints must differ");
    AgentId lo = std::min(i, j), hi = std::max(i, j);
    if (constraint_id(lo, hi) >= 0)
      throw std::invalid_argument("duplicate constraint between agents " +
                                  std::to_string(lo) + " and " + std::to_string(hi));
    BinaryConstraint c;
    c.lo = lo;
    c.hi = hi;
    c.weight = weight;
    c.lo_domain = domains_[lo].size();
    c.hi_domain = domains_[hi].size();
    c.forbid.assign(static_cast<size_t>(c.lo_domain) * c.hi_domain, 0);
    int id = static_cast<int>(constraints_.size());
    constraints_.push_back(std::move(c));
    edge_index_[static_cast<size_t>(lo) * agent_count() + hi] = id;
    neighbors_[lo].push_back(hi);
    neighbors_[hi].push_back(lo);
    std::sort(neighbors_[lo].begin(), neighbors_[lo].end());
    std::sort(neighbors_[hi].begin(), neighbors_[hi].end());
    return id;
  }

  BinaryConstraint& constraint(int id) { return constraints_.at(id); }
  const BinaryConstraint& constraint(int id) const { return constraints_.at(id); }

  // -1 when the pair is unconstrained.
  int constraint_id(AgentId i, AgentId j) const {
    check_agent(i);
    check_agent(j);
    AgentId lo = std::min(i, j), hi = std::max(i, j);
    return edge_index_[static_cast<size_t>(lo) * agent_count() + hi];
  }

  std::vector<int> incident_constraints(AgentId a) const {
    std::vector<int> out;
    for (AgentId nb : neighbors(a)) out.push_back(constraint_id(a, nb));
    return out;
  }

  // Single constraint-check primitive; symmetric in argument order.
  bool violates(AgentId i, Value vi, AgentId j, Value vj) const {
    int id = constraint_id(i, j);
    if (id < 0) return false;
    const BinaryConstraint& c = constraints_[id];
    return i < j ? c.forbids(vi, vj) : c.forbids(vj, vi);
  }

  // Total weight of violated constraints under a total label.
  long label_cost(const CompoundLabel& label) const {
    long cost = 0;
    for (const auto& c : constraints_)
      if (c.forbids(label.at(c.lo), label.at(c.hi))) cost += c.weight;
    return cost;
  }

  std::vector<std::pair<AgentId, AgentId>> violated_edges(const CompoundLabel& label) const {
    std::vector<std::pair<AgentId, AgentId>> out;
    for (const auto& c : constraints_)
      if (c.forbids(label.at(c.lo), label.at(c.hi))) out.emplace_back(c.lo, c.hi);
    return out;
  }

 private:
  void check_agent(AgentId a) const {
    if (a < 0 || a >= agent_count())
      throw std::invalid_argument("unknown agent " + std::to_string(a));
  }

  std::vector<Domain> domains_;
  std::vector<BinaryConstraint> constraints_;
  std::vector<int> edge_index_;
  std::vector<std::vector<AgentId>> neighbors_;
};

// Uniform random binary network: each pair carries a constraint with
// probability p1, each value pair of a chosen constraint is forbidden with
// probability p2. Same seed, same network.
inline ConstraintNetwork generate_random(int n, int k, double p1, double p2,
                                         uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (!(p1 > 0.0 && p1 <= 1.0)) throw std::invalid_argument("p1 must be in (0,1]");
  if (!(p2 > 0.0 && p2 < 1.0)) throw std::invalid_argument("p2 must be in (0,1)");

  std::vector<Domain> doms(n);
  for (int a = 0; a < n; ++a) {
    doms[a].values.reserve(k);
    for (int v = 0; v < k; ++v) doms[a].values.push_back("v" + std::to_string(v));
  }
  ConstraintNetwork net(std::move(doms));

  std::mt19937_64 rng(seed);
  auto coin = [&rng](double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
  };
  for (AgentId i = 0; i < n; ++i) {
    for (AgentId j = i + 1; j < n; ++j) {
      if (!coin(p1)) continue;
      int id = net.add_constraint(i, j, 1);
      BinaryConstraint& c = net.constraint(id);
      for (Value vi = 0; vi < k; ++vi)
        for (Value vj = 0; vj < k; ++vj)
          if (coin(p2)) c.set_forbidden(vi, vj);
    }
  }
  return net;
}

// ---- problem file format ----
//
//   discsp <n> <k>
//   dom <id> <token0> ... <token{k-1}>
//   con <i> <j> <weight>
//   nogood <vi> <vj>
//
// Deterministic field ordering on save: doms by agent id, constraints by
// (lo, hi), nogoods by (vi, vj) domain position.

inline std::string save_network(const ConstraintNetwork& net) {
  std::ostringstream out;
  int k = net.agent_count() > 0 ? net.domain(0).size() : 0;
  out << "discsp " << net.agent_count() << " " << k << "\n";
  for (AgentId a = 0; a < net.agent_count(); ++a) {
    out << "dom " << a;
    for (const auto& tok : net.domain(a).values) out << " " << tok;
    out << "\n";
  }
  std::vector<int> order(net.constraints().size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ca = net.constraint(a);
    const auto& cb = net.constraint(b);
    return std::make_pair(ca.lo, ca.hi) < std::make_pair(cb.lo, cb.hi);
  });
  for (int id : order) {
    const auto& c = net.constraint(id);
    out << "con " << c.lo << " " << c.hi << " " << c.weight << "\n";
    for (Value vi = 0; vi < c.lo_domain; ++vi)
      for (Value vj = 0; vj < c.hi_domain; ++vj)
        if (c.forbids(vi, vj))
          out << "nogood " << net.domain(c.lo).values[vi] << " "
              << net.domain(c.hi).values[vj] << "\n";
  }
  return out.str();
}

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what) {}
};

inline ConstraintNetwork load_network(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int n = -1, k = -1;
  std::vector<Domain> doms;
  std::vector<bool> dom_seen;

  auto next_fields = [&](std::vector<std::string>& f) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      f.clear();
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) f.push_back(tok);
      if (f.empty() || f[0][0] == '#') continue;
      return true;
    }
    return false;
  };

  std::vector<std::string> f;
  if (!next_fields(f) || f[0] != "discsp" || f.size() != 3)
    throw ParseError(lineno, "expected header 'discsp <n> <k>'");
  try {
    n = std::stoi(f[1]);
    k = std::stoi(f[2]);
  } catch (...) {
    throw ParseError(lineno, "bad header numbers");
  }
  if (n < 1 || k < 1) throw ParseError(lineno, "n and k must be >= 1");
  doms.assign(n, {});
  dom_seen.assign(n, false);

  struct PendingCon {
    AgentId i, j;
    int weight;
    std::vector<std::pair<std::string, std::string>> nogoods;
    int lineno;
  };
  std::vector<PendingCon> cons;

  while (next_fields(f)) {
    if (f[0] == "dom") {
      if (static_cast<int>(f.size()) != 2 + k)
        throw ParseError(lineno, "dom line must list exactly k values");
      int id;
      try {
        id = std::stoi(f[1]);
      } catch (...) {
        throw ParseError(lineno, "bad agent id");
      }
      if (id < 0 || id >= n) throw ParseError(lineno, "agent id out of range");
      if (dom_seen[id]) throw ParseError(lineno, "duplicate dom for agent " + f[1]);
      dom_seen[id] = true;
      for (int v = 0; v < k; ++v) doms[id].values.push_back(f[2 + v]);
      std::set<std::string> uniq(doms[id].values.begin(), doms[id].values.end());
      if (static_cast<int>(uniq.size()) != k)
        throw ParseError(lineno, "domain values must be distinct");
    } else if (f[0] == "con") {
      if (f.size() != 4) throw ParseError(lineno, "con line needs '<i> <j> <weight>'");
      PendingCon pc;
      try {
        pc.i = std::stoi(f[1]);
        pc.j = std::stoi(f[2]);
        pc.weight = std::stoi(f[3]);
      } catch (...) {
        throw ParseError(lineno, "bad con fields");
      }
      if (pc.weight < 0) throw ParseError(lineno, "weight must be non-negative");
      pc.lineno = lineno;
      cons.push_back(std::move(pc));
    } else if (f[0] == "nogood") {
      if (f.size() != 3) throw ParseError(lineno, "nogood line needs two values");
      if (cons.empty()) throw ParseError(lineno, "nogood before any con line");
      cons.back().nogoods.emplace_back(f[1], f[2]);
    } else {
      throw ParseError(lineno, "unknown directive '" + f[0] + "'");
    }
  }
  for (int a = 0; a < n; ++a)
    if (!dom_seen[a]) throw ParseError(lineno, "missing dom for agent " + std::to_string(a));

  ConstraintNetwork net(std::move(doms));
  for (const auto& pc : cons) {
    int id;
    try {
      id = net.add_constraint(pc.i, pc.j, pc.weight);
    } catch (const std::invalid_argument& e) {
      throw ParseError(pc.lineno, e.what());
    }
    BinaryConstraint& c = net.constraint(id);
    for (const auto& [ti, tj] : pc.nogoods) {
      auto vi = net.domain(c.lo).index_of(ti);
      auto vj = net.domain(c.hi).index_of(tj);
      if (!vi || !vj)
        throw ParseError(pc.lineno, "nogood value not in endpoint domain");
      c.set_forbidden(*vi, *vj);
    }
  }
  return net;
}

inline bool networks_equal(const ConstraintNetwork& a, const ConstraintNetwork& b) {
  return save_network(a) == save_network(b);
}

}  // namespace apo
