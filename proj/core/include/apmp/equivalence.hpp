#ifndef APMP_EQUIVALENCE_HPP
#define APMP_EQUIVALENCE_HPP

#include "apmp/energy.hpp"
#include "apmp/messages.hpp"
#include "apmp/solver.hpp"

namespace apmp {

// Decomposition of each unary into the part already absorbed into messages
// and the remainder still backing the residual terminal capacities.
struct UsedRemainderSplit {
  std::vector<std::array<double, 2>> used;
  std::vector<std::array<double, 2>> remainder;
};

// used[i] = m_{Theta_i -> x_i}, remainder[i] = Theta_i - used[i]. Throws
// SolverError("SplitViolation") if any remainder entry is below -kSumTol.
UsedRemainderSplit used_remainder(const Energy& e, const MessageState& st);

// The energy reparameterized by the current beliefs:
//   E(x) = sum_i b_i(x_i) + sum_ij [b_ij(x_i,x_j) - b_i(x_i) - b_j(x_j)] + c.
// Returned as raw tables since the pairwise part is a full 2x2.
RawEnergy belief_reparam(const Energy& e, const Topology& topo,
                         const MessageState& st);

// Change of the pairwise belief b_ij = Theta_ij + m_{x_i->f} + m_{x_j->f} of
// one edge between two message states. Along a scheduled chain this is
// [[0,-f],[f,0]] plus a constant, in traversal orientation.
std::array<std::array<double, 2>, 2> pairwise_belief_delta(
    const Energy& e, const MessageState& before, const MessageState& after,
    int edge_index);

struct LockstepMismatch {
  int iteration = -1;
  std::string field;  // "path", "f", "delta", "residuals", "beliefs"
  std::string detail;
};

struct LockstepReport {
  int iterations = 0;
  std::vector<LockstepMismatch> mismatches;
  bool ok() const { return mismatches.empty(); }
};

// Run max-flow and the scheduled message passing side by side, comparing per
// iteration: the augmenting path, the flow amount, the sparse energy change,
// the full residual arrays, and the normalized message-sum beliefs. Stops at
// the first mismatch.
LockstepReport lockstep_check(const Energy& e);

}  // namespace apmp

#endif
