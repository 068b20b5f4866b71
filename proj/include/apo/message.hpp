#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "apo/problem.hpp"

namespace apo {

// Mediation sessions are identified by (mediator, per-mediator sequence).
// Original APO ignores the id; CompAPO uses it to drop stale session traffic.
struct SessionId {
  AgentId mediator = -1;
  uint64_t seq = 0;

  friend bool operator==(const SessionId& a, const SessionId& b) {
    return a.mediator == b.mediator && a.seq == b.seq;
  }
  friend bool operator!=(const SessionId& a, const SessionId& b) { return !(a == b); }
};

// Per value of the labeling agent's domain: the agents that value would
// violate against the labeler's current view.
struct LabeledDomain {
  std::vector<std::vector<AgentId>> violators;  // indexed by value

  int domain_size() const { return static_cast<int>(violators.size()); }
};

struct InitMsg {
  int priority = 0;
  Value value = 0;
  bool wants_mediate = false;
  int domain_size = 0;
  std::vector<int> constraint_ids;  // sender's incident constraints
};

struct OkMsg {
  int priority = 0;
  Value value = 0;
  bool wants_mediate = false;
};

struct EvaluateReqMsg {
  int priority = 0;
  SessionId session;
};

struct EvaluateRespMsg {
  int priority = 0;
  SessionId session;
  LabeledDomain labels;
};

struct WaitMsg {
  int priority = 0;
  SessionId session;
};

struct AcceptMsg {
  int priority = 0;
  Value value = 0;  // mediator's own new value d_i
  bool wants_mediate = false;
  SessionId session;
  Value assigned = 0;     // original APO: the receiver's d'_j
  CompoundLabel solution;  // CompAPO/CompOptAPO: the entire session solution
};

struct CancelMsg {
  int priority = 0;
  SessionId session;
};

struct AddMsg {
  AgentId subject = -1;  // agent the mediator should absorb
};

struct NoSolutionMsg {};

using Message = std::variant<InitMsg, OkMsg, EvaluateReqMsg, EvaluateRespMsg,
                             WaitMsg, AcceptMsg, CancelMsg, AddMsg, NoSolutionMsg>;

enum class MsgType : int {
  Init = 0,
  Ok,
  EvaluateReq,
  EvaluateResp,
  Wait,
  Accept,
  Cancel,
  Add,
  NoSolution,
};

inline MsgType type_of(const Message& m) {
  return static_cast<MsgType>(m.index());
}

inline const char* type_tag(MsgType t) {
  switch (t) {
    case MsgType::Init: return "init";
    case MsgType::Ok: return "ok?";
    case MsgType::EvaluateReq: return "evaluate?";
    case MsgType::EvaluateResp: return "evaluate!";
    case MsgType::Wait: return "wait!";
    case MsgType::Accept: return "accept!";
    case MsgType::Cancel: return "cancel!";
    case MsgType::Add: return "add!";
    case MsgType::NoSolution: return "no-solution";
  }
  return "?";
}

inline bool parse_type_tag(const std::string& s, MsgType& out) {
  static const std::pair<const char*, MsgType> table[] = {
      {"init", MsgType::Init},           {"ok?", MsgType::Ok},
      {"evaluate?", MsgType::EvaluateReq}, {"evaluate!", MsgType::EvaluateResp},
      {"wait!", MsgType::Wait},          {"accept!", MsgType::Accept},
      {"cancel!", MsgType::Cancel},      {"add!", MsgType::Add},
      {"no-solution", MsgType::NoSolution},
  };
  for (const auto& [tag, t] : table)
    if (s == tag) {
      out = t;
      return true;
    }
  return false;
}

}  // namespace apo
