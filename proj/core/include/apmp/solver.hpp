#ifndef APMP_SOLVER_HPP
#define APMP_SOLVER_HPP

#include "apmp/energy.hpp"
#include "apmp/flow.hpp"
#include "apmp/messages.hpp"

namespace apmp {

// Residual capacities implied by the current messages:
//   r_source[i] = theta_i(1) - m_{Theta_i->x_i}(1)
//   r_sink[i]   = theta_i(0) - m_{Theta_i->x_i}(0)
//   r_fwd[e]    = theta01 - m_{x_i->f}(1) + m_{x_i->f}(0)   (i -> j)
//   r_bwd[e]    = theta10 + m_{x_i->f}(1) - m_{x_i->f}(0)   (j -> i)
// where m_{x_i->f} is the stored message from the tail endpoint i.
struct ResidualView {
  std::vector<double> r_source;
  std::vector<double> r_sink;
  std::vector<double> r_fwd;
  std::vector<double> r_bwd;
};

// One scheduled chain: the variables of an augmenting path, the edges linking
// consecutive variables (fwd[k] true when path[k] is the stored endpoint i of
// chain_edges[k]), and the flow amount f chosen for the update.
struct ChainSchedule {
  std::vector<int> path;
  std::vector<int> chain_edges;
  std::vector<bool> fwd;
  double f = 0.0;
};

enum class Polarity { kZero, kOne };

struct IslandDecomposition {
  std::vector<int> island_id;        // -1 for variables outside every island
  std::vector<Polarity> polarity;    // one entry per island
  std::vector<std::vector<int>> members;
  std::vector<std::vector<int>> seeds;  // members with leftover terminal capacity
};

struct Phase1Record {
  ChainSchedule sched;
  ReparamDelta delta;
  double theta_const_so_far = 0.0;
};

struct Phase1Result {
  MessageState state;
  std::vector<Phase1Record> trace;
  double flow_value = 0.0;
};

enum class Phase2Mode { kStrict, kFast };

struct Phase2Result {
  MessageState state;
  Assignment assignment;
  int rounds = 0;
  int round_cap = 0;
  bool converged = false;
  IslandDecomposition islands;
};

struct ApmpResult {
  Assignment assignment;
  double value = 0.0;
  std::vector<Phase1Record> trace;
  MessageState state;
  IslandDecomposition islands;
  int phase1_iterations = 0;
  int phase2_rounds = 0;
  int phase2_round_cap = 0;
  bool converged = false;
};

ResidualView residual_view(const Energy& e, const Topology& topo,
                           const MessageState& st);

// Shortest augmenting path on the message-induced residuals, or nullopt when
// none exists. Deterministic: same tie-breaking as the max-flow search.
std::optional<ChainSchedule> schedule(const Energy& e, const Topology& topo,
                                      const MessageState& st);

// Mixing weights for the two endpoint unary updates of one chain. Damping the
// start unary by lambda_start turns its update into the exact increment
// (0, f); symmetrically (f, 0) at the end.
struct DampingPair {
  double lambda_start = 0.0;
  double lambda_end = 0.0;
};

// lambda_start = (theta1_T1 - f - b) / (theta1_T1 - b) with b the current
// unary message entry at the start variable; mirrored at the end variable.
// Throws SolverError("ZeroDenominator") when a denominator is not positive.
DampingPair damping_for(const Energy& e, const MessageState& st,
                        const ChainSchedule& sched);

// Apply one scheduled chain update to st in place. Returns the sparse change
// to the reparameterized energy, measured from the message changes. Throws
// SolverError("PropagationBroken") when a chain factor modifies a passing
// message or the damped update disagrees with the direct increment.
ReparamDelta phase1_iteration(const Energy& e, const Topology& topo,
                              MessageState& st, const ChainSchedule& sched);

// Run scheduled updates until no augmenting path remains. Iteration cap
// n * (m + 2n); exceeding it throws SolverError("IterationCap").
Phase1Result phase1_run(const Energy& e, const Topology& topo);

// Islands of the residual graph after phase 1: variables reachable from a
// leftover terminal capacity, grouped into connected components. Throws
// SolverError("ConflictingPolarity") if a variable is reachable from both
// terminals (that would be an augmenting path).
IslandDecomposition detect_islands(const Energy& e, const Topology& topo,
                                   const MessageState& st);

Phase2Result phase2_run(const Energy& e, const Topology& topo,
                        const MessageState& phase1_state, Phase2Mode mode);

ApmpResult apmp_solve(const Energy& e, Phase2Mode mode = Phase2Mode::kStrict);

}  // namespace apmp

#endif
