#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tvdopt/algorithm.hpp"
#include "tvdopt/gossip.hpp"
#include "tvdopt/objective.hpp"

namespace tvdopt::netsim {

/// One point-to-point transfer of the sender's current v.
struct Message {
  std::size_t round = 0;  // global round index k*m + (l-1)
  std::size_t sender = 0;
  std::size_t receiver = 0;
  Vector payload;
};

struct Delivery {
  std::size_t round = 0;
  std::size_t sender = 0;
  std::size_t receiver = 0;
  friend bool operator==(const Delivery&, const Delivery&) = default;
};

/// An agent sees only its own objective, its own state, its own row of the
/// current gossip matrix and the messages in its inbox.
class AgentNode {
 public:
  AgentNode(std::size_t id, ObjectivePtr objective, Vector x0, Vector y0);

  std::size_t id() const { return id_; }
  const Vector& x() const { return x_; }
  const Vector& y() const { return y_; }
  const Vector& v() const { return v_; }
  const Vector& u() const { return u_; }

  void begin_iteration();
  /// Payload this agent broadcasts in the current round.
  const Vector& outgoing() const { return v_; }
  void receive(Message message);
  /// v <- sum_j w_ij v_j folded in ascending sender id; the self weight uses
  /// the agent's own v. Throws LocalityError when a nonzero weight has no
  /// matching message for this round.
  void mix(std::span<const double> own_row, std::size_t round);
  /// One local gradient at v, then the y and x updates.
  void local_update(double alpha, double lambda);

 private:
  std::size_t id_;
  ObjectivePtr objective_;
  Vector x_, y_, v_, u_;
  std::map<std::size_t, Message> inbox_;  // keyed by sender
};

/// Synchronous round boundary: collects all messages sent in a round and
/// releases them together. Computation for the round starts only after
/// every sent message is delivered.
class RoundBarrier {
 public:
  void open(std::size_t round);
  void post(Message message);
  /// Hands every pending message to its receiver, records it in the ledger,
  /// and throws ProtocolError if any sent message was not delivered.
  void release(std::vector<AgentNode>& agents, std::span<const Delivery> drop);

  std::size_t round() const { return round_; }
  const std::vector<Delivery>& ledger() const { return ledger_; }

 private:
  std::size_t round_ = 0;
  std::vector<Message> pending_;
  std::vector<Delivery> ledger_;
};

enum class AgentOrder { ascending, descending, shuffled };

struct NetsimOptions {
  AgentOrder order = AgentOrder::ascending;
  std::uint64_t order_seed = 0;
  // Test hooks.
  std::optional<std::pair<std::size_t, Vector>> row_override;  // agent, row it uses
  std::vector<Delivery> extra_deliveries;  // messages sent beyond the topology
  std::vector<Delivery> dropped;           // messages lost before delivery
};

struct NetsimResult {
  RunTrace trace;
  std::vector<Delivery> ledger;
};

/// Message-passing execution of the algorithm; the trace schema is the same
/// as run_algorithm's.
NetsimResult run_netsim(const Problem& problem, const GossipSchedule& schedule,
                        const AlgorithmParams& params, const AlgorithmState& initial,
                        std::size_t iterations, const NetsimOptions& options = {});

struct LocalityReport {
  std::size_t deliveries = 0;
  std::vector<Delivery> violations;  // deliveries across zero-weight links
  std::vector<std::size_t> messages_per_iteration;
  bool passed = false;
};

/// Checks every delivery j -> i against w_ij of that round's matrix.
LocalityReport locality_audit(std::span<const Delivery> ledger, const GossipSchedule& schedule,
                              std::size_t rounds_per_iteration, std::size_t iterations);

}  // namespace tvdopt::netsim
