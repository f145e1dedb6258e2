#include "tvdopt/netsim.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "tvdopt/errors.hpp"
#include "tvdopt/kernels.hpp"

namespace tvdopt::netsim {

AgentNode::AgentNode(std::size_t id, ObjectivePtr objective, Vector x0, Vector y0)
    : id_(id),
      objective_(std::move(objective)),
      x_(std::move(x0)),
      y_(std::move(y0)),
      v_(x_.size()),
      u_(x_.size()) {}

void AgentNode::begin_iteration() {
  v_ = x_;
  inbox_.clear();
}

void AgentNode::receive(Message message) {
  if (message.receiver != id_) throw ProtocolError("message routed to the wrong agent");
  if (message.payload.size() != v_.size()) throw ProtocolError("message payload has wrong size");
  const std::size_t sender = message.sender;
  if (!inbox_.emplace(sender, std::move(message)).second) {
    throw ProtocolError("duplicate message from agent " + std::to_string(sender + 1));
  }
}

void AgentNode::mix(std::span<const double> own_row, std::size_t round) {
  std::vector<double> weights;
  std::vector<const double*> sources;
  for (std::size_t j = 0; j < own_row.size(); ++j) {
    const double w = own_row[j];
    if (w == 0.0) continue;
    if (j == id_) {
      weights.push_back(w);
      sources.push_back(v_.data());
      continue;
    }
    const auto it = inbox_.find(j);
    if (it == inbox_.end() || it->second.round != round) {
      throw LocalityError("agent " + std::to_string(id_ + 1) + " has weight on agent " +
                          std::to_string(j + 1) + " but received no message in round " +
                          std::to_string(round));
    }
    weights.push_back(w);
    sources.push_back(it->second.payload.data());
  }
  Vector mixed(v_.size(), 0.0);
  if (!weights.empty()) kernels::weighted_sum(weights, sources, mixed);
  v_ = std::move(mixed);
  inbox_.clear();
}

void AgentNode::local_update(double alpha, double lambda) {
  const std::size_t d = x_.size();
  Vector g(d), diff(d);
  objective_->gradient(v_, g);
  kernels::axpby(1.0, v_, -alpha, g, u_);
  kernels::axpby(1.0, x_, -1.0, v_, diff);
  kernels::axpy(1.0, diff, y_);
  kernels::axpby(1.0, u_, -lambda, y_, x_);
}

void RoundBarrier::open(std::size_t round) {
  round_ = round;
  pending_.clear();
}

void RoundBarrier::post(Message message) {
  if (message.round != round_) throw ProtocolError("message posted to a closed round");
  pending_.push_back(std::move(message));
}

void RoundBarrier::release(std::vector<AgentNode>& agents, std::span<const Delivery> drop) {
  std::size_t undelivered = 0;
  for (auto& msg : pending_) {
    const Delivery d{msg.round, msg.sender, msg.receiver};
    if (std::find(drop.begin(), drop.end(), d) != drop.end()) {
      ++undelivered;
      continue;
    }
    agents.at(msg.receiver).receive(std::move(msg));
    ledger_.push_back(d);
  }
  pending_.clear();
  if (undelivered > 0) {
    throw ProtocolError(std::to_string(undelivered) + " message(s) in round " +
                        std::to_string(round_) + " were sent but never delivered");
  }
}

namespace {

std::vector<std::size_t> agent_order(std::size_t n, const NetsimOptions& options,
                                     std::size_t round) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  switch (options.order) {
    case AgentOrder::ascending:
      break;
    case AgentOrder::descending:
      std::reverse(order.begin(), order.end());
      break;
    case AgentOrder::shuffled: {
      std::mt19937_64 rng(options.order_seed + round);
      std::shuffle(order.begin(), order.end(), rng);
      break;
    }
  }
  return order;
}

StackedVector gather(const std::vector<AgentNode>& agents, const Vector& (AgentNode::*field)() const) {
  StackedVector out(agents.size(), (agents.front().*field)().size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const Vector& v = (agents[i].*field)();
    std::copy(v.begin(), v.end(), out.block(i).begin());
  }
  return out;
}

}  // namespace

NetsimResult run_netsim(const Problem& problem, const GossipSchedule& schedule,
                        const AlgorithmParams& params, const AlgorithmState& initial,
                        std::size_t iterations, const NetsimOptions& options) {
  const std::size_t n = problem.agents();
  const std::size_t m = params.m;
  if (schedule.agents() != n) throw ConfigError("schedule and problem disagree on agent count");
  if (initial.x.agents() != n || initial.x.dim() != problem.dim()) {
    throw ConfigError("agent state shape does not match the problem");
  }

  std::vector<AgentNode> agents;
  agents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x0 = initial.x.block(i);
    const auto y0 = initial.y.block(i);
    agents.emplace_back(i, problem.locals()[i], Vector(x0.begin(), x0.end()),
                        Vector(y0.begin(), y0.end()));
  }

  NetsimResult result;
  RunTrace& trace = result.trace;
  trace.params = params;
  trace.x.push_back(gather(agents, &AgentNode::x));
  trace.y.push_back(gather(agents, &AgentNode::y));

  RoundBarrier barrier;
  Vector row_buffer(n);
  for (std::size_t k = 0; k < iterations; ++k) {
    for (auto& a : agents) a.begin_iteration();
    for (std::size_t l = 1; l <= m; ++l) {
      const std::size_t round = k * m + (l - 1);
      const GossipMatrix& w = schedule.matrix_at(k, l, m);
      const auto order = agent_order(n, options, round);
      barrier.open(round);
      // Sender j reaches receiver i over link j -> i, present iff w_ij != 0.
      for (std::size_t j : order) {
        for (std::size_t i = 0; i < n; ++i) {
          if (i != j && w(i, j) != 0.0) barrier.post({round, j, i, agents[j].outgoing()});
        }
      }
      for (const auto& extra : options.extra_deliveries) {
        if (extra.round == round) {
          barrier.post({round, extra.sender, extra.receiver, agents[extra.sender].outgoing()});
        }
      }
      barrier.release(agents, options.dropped);
      for (std::size_t i : order) {
        std::span<const double> row = w.row(i);
        if (options.row_override && options.row_override->first == i) {
          row = options.row_override->second;
        }
        agents[i].mix(row, round);
      }
      trace.counters.row_communications += n;
    }
    for (std::size_t i : agent_order(n, options, k * m + m)) {
      agents[i].local_update(params.alpha, params.lambda);
      ++trace.counters.gradient_evaluations;
    }
    trace.v.push_back(gather(agents, &AgentNode::v));
    trace.u.push_back(gather(agents, &AgentNode::u));
    trace.x.push_back(gather(agents, &AgentNode::x));
    trace.y.push_back(gather(agents, &AgentNode::y));
  }
  trace.counters.messages = barrier.ledger().size();
  result.ledger = barrier.ledger();
  return result;
}

LocalityReport locality_audit(std::span<const Delivery> ledger, const GossipSchedule& schedule,
                              std::size_t rounds_per_iteration, std::size_t iterations) {
  if (rounds_per_iteration == 0) throw DomainError("rounds per iteration must be >= 1");
  LocalityReport report;
  report.messages_per_iteration.assign(iterations, 0);
  for (const auto& d : ledger) {
    const std::size_t k = d.round / rounds_per_iteration;
    const std::size_t l = d.round % rounds_per_iteration + 1;
    ++report.deliveries;
    if (k < iterations) ++report.messages_per_iteration[k];
    const GossipMatrix& w = schedule.matrix_at(k, l, rounds_per_iteration);
    if (d.sender == d.receiver || d.sender >= w.agents() || d.receiver >= w.agents() ||
        w(d.receiver, d.sender) == 0.0) {
      report.violations.push_back(d);
    }
  }
  report.passed = report.violations.empty();
  return report;
}

}  // namespace tvdopt::netsim
