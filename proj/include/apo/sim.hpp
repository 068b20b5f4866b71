#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "apo/agent.hpp"
#include "apo/message.hpp"
#include "apo/problem.hpp"

namespace apo {

struct MessageEnvelope {
  uint64_t global_seq = 0;   // send order across the whole run
  uint64_t channel_seq = 0;  // send order within the (sender, receiver) pair
  uint64_t type_occurrence = 0;  // nth message of this type on this channel, 1-based
  AgentId sender = -1;
  AgentId receiver = -1;
  Message payload;
  uint64_t nccc_stamp = 0;
};

struct DeliveryRecord {
  uint64_t seq = 0;  // delivery index, 1-based
  AgentId sender = -1;
  AgentId receiver = -1;
  MsgType type = MsgType::Init;
  uint64_t nccc_stamp = 0;
  uint64_t channel_seq = 0;  // send order within the ordered pair (not exported)
};

// Scripted delay rule: the given occurrence of (sender, receiver, type) is
// held until the release event (another message's delivery) has happened.
// A repeat period re-arms the rule each cycle, for livelock demonstrations.
struct HoldRule {
  AgentId sender = -1;
  AgentId receiver = -1;
  MsgType type = MsgType::Init;
  uint64_t occurrence = 0;

  AgentId ev_sender = -1;
  AgentId ev_receiver = -1;
  MsgType ev_type = MsgType::Init;
  uint64_t ev_occurrence = 0;

  uint64_t repeat_hold = 0;   // 0: one-shot
  uint64_t repeat_event = 0;
};

struct ScheduleScript {
  std::vector<HoldRule> rules;
};

struct SchedulerPolicy {
  enum class Kind { Fifo, SeededRandom, Scripted };
  Kind kind = Kind::Fifo;
  uint64_t seed = 0;      // SeededRandom
  ScheduleScript script;  // Scripted (base order Fifo)

  static SchedulerPolicy fifo() { return {}; }
  static SchedulerPolicy seeded(uint64_t s) {
    SchedulerPolicy p;
    p.kind = Kind::SeededRandom;
    p.seed = s;
    return p;
  }
  static SchedulerPolicy scripted(ScheduleScript s) {
    SchedulerPolicy p;
    p.kind = Kind::Scripted;
    p.script = std::move(s);
    return p;
  }
};

constexpr int kMsgTypeCount = 9;

struct Metrics {
  uint64_t messages_sent = 0;
  uint64_t per_type[kMsgTypeCount] = {};
  uint64_t deliveries = 0;
  uint64_t nccc = 0;  // max over agents at termination
  int largest_session = 0;
  uint64_t sessions = 0;
  uint64_t partial_sessions = 0;  // sessions short of the full good_list
  uint64_t forced_releases = 0;   // script holds expired by the stall guard

  uint64_t count(MsgType t) const { return per_type[static_cast<int>(t)]; }
};

enum class RunStatus { Solved, Unsat, EventBudgetExhausted };

struct RunOutcome {
  RunStatus status = RunStatus::EventBudgetExhausted;
  std::optional<CompoundLabel> label;  // total label; meaningful when Solved
  Metrics metrics;
  std::vector<DeliveryRecord> event_log;
};

struct SimConfig {
  SchedulerPolicy policy;
  uint64_t event_budget = 1'000'000;
  uint64_t hop_nccc_cost = 0;
  bool record_log = true;
};

class Simulation : private MessageSink {
 public:
  // Called after each delivery, once the handler has run to completion.
  using Observer = std::function<void(const Simulation&, const DeliveryRecord&)>;

  Simulation(const ConstraintNetwork& net, const std::vector<AgentConfig>& configs,
             SimConfig sim_cfg)
      : net_(&net), cfg_(std::move(sim_cfg)), rng_(cfg_.policy.seed) {
    const int n = net.agent_count();
    if (static_cast<int>(configs.size()) != n)
      throw std::invalid_argument("need one agent config per agent");
    agents_.reserve(n);
    for (AgentId a = 0; a < n; ++a) agents_.emplace_back(net, a, configs[a]);
    channels_.assign(static_cast<size_t>(n) * n, {});
    holds_ = cfg_.policy.script.rules;
  }

  const Agent& agent(AgentId a) const { return agents_.at(a); }
  const std::vector<Agent>& agents() const { return agents_; }
  const ConstraintNetwork& network() const { return *net_; }
  const Metrics& metrics() const { return metrics_; }
  const std::vector<DeliveryRecord>& event_log() const { return log_; }

  void add_observer(Observer obs) { observers_.push_back(std::move(obs)); }

  // True iff no undelivered messages exist; handlers run to completion, so no
  // agent ever has a pending self-action between deliveries.
  bool quiescent() const {
    for (const auto& ch : channels_)
      if (!ch.empty()) return false;
    for (const auto& a : agents_) {
      // A mediator awaiting replies implies in-flight messages.
      assert(!(a.counter() > 0) || no_solution_);
      (void)a;
    }
    return true;
  }

  RunOutcome run() {
    for (auto& a : agents_) {
      sending_agent_ = a.id();
      a.initialize(*this);
    }
    sending_agent_ = -1;

    RunOutcome out;
    while (true) {
      if (no_solution_) {
        out.status = RunStatus::Unsat;
        break;
      }
      if (quiescent()) {
        out.status = RunStatus::Solved;
        CompoundLabel label;
        for (const auto& a : agents_) label[a.id()] = a.value();
        out.label = std::move(label);
        break;
      }
      if (metrics_.deliveries >= cfg_.event_budget) {
        out.status = RunStatus::EventBudgetExhausted;
        break;
      }
      step();
    }
    finalize_metrics();
    out.metrics = metrics_;
    out.event_log = log_;
    return out;
  }

  std::string event_log_csv() const {
    std::ostringstream out;
    out << "seq,sender,receiver,type,nccc_stamp\n";
    for (const auto& r : log_)
      out << r.seq << "," << r.sender << "," << r.receiver << "," << type_tag(r.type)
          << "," << r.nccc_stamp << "\n";
    return out.str();
  }

 private:
  using Channel = std::deque<MessageEnvelope>;

  Channel& channel(AgentId s, AgentId r) {
    return channels_[static_cast<size_t>(s) * net_->agent_count() + r];
  }

  // ---- MessageSink ----
  void send(AgentId to, Message msg) override {
    MessageEnvelope env;
    env.global_seq = ++send_seq_;
    env.sender = sending_agent_;
    env.receiver = to;
    env.nccc_stamp = agents_[sending_agent_].nccc();
    MsgType t = type_of(msg);
    env.channel_seq = ++channel_send_count_[key(env.sender, to)];
    env.type_occurrence = ++type_send_count_[tkey(env.sender, to, t)];
    env.payload = std::move(msg);
    metrics_.messages_sent++;
    metrics_.per_type[static_cast<int>(t)]++;
    channel(env.sender, to).push_back(std::move(env));
  }

  void broadcast_no_solution() override {
    // n-1 point-to-point messages, counted individually.
    for (const auto& a : agents_)
      if (a.id() != sending_agent_) send(a.id(), NoSolutionMsg{});
    no_solution_ = true;
  }

  void note_session(AgentId mediator, int participants, int good_list_size,
                    bool full_session) override {
    (void)mediator;
    metrics_.sessions++;
    if (!full_session) metrics_.partial_sessions++;
    metrics_.largest_session = std::max(metrics_.largest_session, participants);
  }

  // ---- scheduling ----
  static uint64_t key(AgentId s, AgentId r) {
    return (static_cast<uint64_t>(s) << 20) | static_cast<uint64_t>(r);
  }
  static uint64_t tkey(AgentId s, AgentId r, MsgType t) {
    return (key(s, r) << 4) | static_cast<uint64_t>(t);
  }

  bool held(const MessageEnvelope& env) const {
    for (const auto& h : holds_) {
      if (h.sender != env.sender || h.receiver != env.receiver ||
          h.type != type_of(env.payload))
        continue;
      uint64_t occ = h.occurrence;
      if (h.repeat_hold > 0) {
        if (env.type_occurrence >= occ &&
            (env.type_occurrence - occ) % h.repeat_hold == 0)
          return !release_fired(h, (env.type_occurrence - occ) / h.repeat_hold);
      } else if (env.type_occurrence == occ) {
        return !release_fired(h, 0);
      }
    }
    return false;
  }

  bool release_fired(const HoldRule& h, uint64_t cycle) const {
    uint64_t target = h.ev_occurrence + cycle * h.repeat_event;
    auto it = type_delivery_count_.find(tkey(h.ev_sender, h.ev_receiver, h.ev_type));
    return it != type_delivery_count_.end() && it->second >= target;
  }

  std::vector<Channel*> deliverable_channels() {
    std::vector<Channel*> out;
    for (auto& ch : channels_)
      if (!ch.empty() && !held(ch.front())) out.push_back(&ch);
    return out;
  }

  void step() {
    auto deliverable = deliverable_channels();
    if (deliverable.empty()) {
      // Delivery delays are finite: a held message whose release event can no
      // longer fire must eventually move. Expire the hold on the oldest one.
      force_release_oldest();
      deliverable = deliverable_channels();
      if (deliverable.empty()) return;
    }

    Channel* chosen = nullptr;
    switch (cfg_.policy.kind) {
      case SchedulerPolicy::Kind::Fifo:
      case SchedulerPolicy::Kind::Scripted: {
        for (Channel* ch : deliverable)
          if (!chosen || ch->front().global_seq < chosen->front().global_seq)
            chosen = ch;
        break;
      }
      case SchedulerPolicy::Kind::SeededRandom: {
        std::uniform_int_distribution<size_t> dist(0, deliverable.size() - 1);
        chosen = deliverable[dist(rng_)];
        break;
      }
    }

    MessageEnvelope env = std::move(chosen->front());
    chosen->pop_front();
    deliver(env);
  }

  void deliver(const MessageEnvelope& env) {
    metrics_.deliveries++;
    type_delivery_count_[tkey(env.sender, env.receiver, type_of(env.payload))]++;

    DeliveryRecord rec;
    rec.seq = metrics_.deliveries;
    rec.sender = env.sender;
    rec.receiver = env.receiver;
    rec.type = type_of(env.payload);
    rec.nccc_stamp = env.nccc_stamp;
    rec.channel_seq = env.channel_seq;
    if (cfg_.record_log) log_.push_back(rec);

    Agent& receiver = agents_[env.receiver];
    receiver.merge_nccc_stamp(env.nccc_stamp + cfg_.hop_nccc_cost);
    sending_agent_ = env.receiver;
    receiver.receive(env.sender, env.payload, *this);
    sending_agent_ = -1;

    for (const auto& obs : observers_) obs(*this, rec);
  }

  void force_release_oldest() {
    const MessageEnvelope* oldest = nullptr;
    for (auto& ch : channels_)
      if (!ch.empty() &&
          (!oldest || ch.front().global_seq < oldest->global_seq))
        oldest = &ch.front();
    if (!oldest) return;
    // Drop every rule currently pinning this envelope.
    for (auto it = holds_.begin(); it != holds_.end();) {
      bool pins = it->sender == oldest->sender && it->receiver == oldest->receiver &&
                  it->type == type_of(oldest->payload);
      if (pins) {
        uint64_t occ = it->occurrence;
        if (it->repeat_hold > 0)
          pins = oldest->type_occurrence >= occ &&
                 (oldest->type_occurrence - occ) % it->repeat_hold == 0;
        else
          pins = oldest->type_occurrence == occ;
      }
      if (pins) {
        metrics_.forced_releases++;
        it = holds_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void finalize_metrics() {
    uint64_t m = 0;
    for (const auto& a : agents_) m = std::max(m, a.nccc());
    metrics_.nccc = m;
  }

  const ConstraintNetwork* net_;
  SimConfig cfg_;
  std::vector<Agent> agents_;
  std::vector<Channel> channels_;
  std::vector<HoldRule> holds_;
  std::vector<Observer> observers_;
  std::vector<DeliveryRecord> log_;
  Metrics metrics_;
  std::mt19937_64 rng_;
  uint64_t send_seq_ = 0;
  std::map<uint64_t, uint64_t> channel_send_count_;
  std::map<uint64_t, uint64_t> type_send_count_;
  std::map<uint64_t, uint64_t> type_delivery_count_;
  AgentId sending_agent_ = -1;
  bool no_solution_ = false;
};

// ---- scripted-delay file format ----
//
//   hold <sender> <receiver> <msg-type> <occurrence> until <sender> <receiver>
//        <msg-type> <occurrence> [repeat <hold-period> <event-period>]
//
// Agents are integer ids; message types use the event-log tags (init, ok?,
// evaluate?, evaluate!, wait!, accept!, cancel!, add!, no-solution).

inline ScheduleScript parse_script(const std::string& text) {
  ScheduleScript script;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> f;
    std::string tok;
    while (ls >> tok) f.push_back(tok);
    if (f.empty() || f[0][0] == '#') continue;
    if (f[0] != "hold" || (f.size() != 10 && f.size() != 13) || f[5] != "until")
      throw ParseError(lineno, "expected 'hold s r type occ until s r type occ [repeat a b]'");
    HoldRule h;
    try {
      h.sender = std::stoi(f[1]);
      h.receiver = std::stoi(f[2]);
      h.occurrence = std::stoull(f[4]);
      h.ev_sender = std::stoi(f[6]);
      h.ev_receiver = std::stoi(f[7]);
      h.ev_occurrence = std::stoull(f[9]);
      if (f.size() == 13) {
        if (f[10] != "repeat") throw ParseError(lineno, "expected 'repeat'");
        h.repeat_hold = std::stoull(f[11]);
        h.repeat_event = std::stoull(f[12]);
      }
    } catch (const ParseError&) {
      throw;
    } catch (...) {
      throw ParseError(lineno, "bad numeric field");
    }
    if (!parse_type_tag(f[3], h.type)) throw ParseError(lineno, "unknown message type " + f[3]);
    if (!parse_type_tag(f[8], h.ev_type)) throw ParseError(lineno, "unknown message type " + f[8]);
    script.rules.push_back(h);
  }
  return script;
}

}  // namespace apo
