#ifndef APMP_MESSAGES_HPP
#define APMP_MESSAGES_HPP

#include <optional>

#include "apmp/energy.hpp"

namespace apmp {

// All messages of a factor-graph execution. Pairwise slots are indexed by
// edge and endpoint side (0 = endpoint i, 1 = endpoint j); unary[i] is the
// message from the unary factor of variable i. Everything starts at (0,0).
struct MessageState {
  std::vector<std::array<double, 2>> unary;
  std::vector<std::array<std::array<double, 2>, 2>> var_to_fac;  // [edge][side]
  std::vector<std::array<std::array<double, 2>, 2>> fac_to_var;  // [edge][side]
};

struct Beliefs {
  std::vector<std::array<double, 2>> unary;
  std::vector<std::array<std::array<double, 2>, 2>> pairwise;  // [edge][x_i][x_j]
};

struct FixedPointReport {
  bool is_fixed_point = false;
  double max_message_change = 0.0;
  std::optional<std::string> violating_edge;  // e.g. "edge[3] to j", "unary[2]"
};

MessageState make_zero_state(const Energy& e);

// Shift so the minimum entry is 0.
std::array<double, 2> normalize2(std::array<double, 2> m);

// out(x_to) = min_{x_from} [table(x_from, x_to) + incoming(x_from)] for the
// canonical table [[0, theta01], [theta10, 0]]. With incoming (a, b):
//   toward j: (min(a, theta10 + b), min(b, theta01 + a))
//   toward i: same with theta01 and theta10 swapped.
std::array<double, 2> factor_to_var_message(const Edge& e,
                                            const std::array<double, 2>& incoming,
                                            bool toward_j);

// Sum of the unary-factor message and all pairwise factor messages into var,
// excluding the factor of edge_index, normalized.
std::array<double, 2> var_to_factor_message(const Topology& topo,
                                            const MessageState& st, int var,
                                            int edge_index);

// One parallel round: every message recomputed from the previous round's
// snapshot, then normalized. Reports the largest absolute entry change.
std::pair<MessageState, FixedPointReport> strict_mp_round(const Energy& e,
                                                          const Topology& topo,
                                                          const MessageState& st);

// Unary beliefs b_i = Theta_i + sum of pairwise factor messages into i.
// Pairwise beliefs put b_ij = Theta_ij + in_i + in_j with the cavity message
// in_i = b_i - m_{ij->i}; the cavity uses the unary potential directly, which
// the stored unary factor message may lag while it is being damped.
Beliefs compute_beliefs(const Energy& e, const Topology& topo,
                        const MessageState& st);

// Beliefs assembled purely from stored messages, b_i = m_{Theta_i -> x_i} +
// sum of pairwise factor messages. Used for invariance checks during the
// damped phase; coincides with compute_beliefs once unary messages saturate.
std::vector<std::array<double, 2>> message_beliefs(const Topology& topo,
                                                   const MessageState& st);

// Per-variable argmin of the unary beliefs, ties broken to 0.
Assignment decode(const Beliefs& b);

}  // namespace apmp

#endif
