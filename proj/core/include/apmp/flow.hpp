#ifndef APMP_FLOW_HPP
#define APMP_FLOW_HPP

#include <optional>

#include "apmp/energy.hpp"

namespace apmp {

// s -> v_T1 -> ... -> v_TN -> t with positive residual capacity throughout.
// Terminals are implicit; vars holds the non-terminal node sequence.
struct AugmentingPath {
  std::vector<int> vars;
  double bottleneck = 0.0;
};

// Residual network of the graph-cut construction: capacity theta_i^1 from the
// source to v_i, theta_i^0 from v_i to the sink, theta01 on the directed edge
// i -> j and theta10 on j -> i.
struct FlowGraph {
  int num_vars = 0;
  std::vector<double> r_source;  // residual s -> v_i
  std::vector<double> r_sink;    // residual v_i -> t
  std::vector<double> r_fwd;     // per edge, residual i -> j
  std::vector<double> r_bwd;     // per edge, residual j -> i
  double flow_pushed = 0.0;
  const Energy* origin = nullptr;
  Topology topo;
};

enum class Side { kSource, kSink, kFree };

// A variable that stays source-reachable after max-flow has unused s -> v_i
// capacity (leftover theta_i^1), so label 0 is the cheap choice for it; a
// sink-reachable variable has leftover theta_i^0 and takes label 1.
// Terminal-disconnected variables default to 0.
struct CutDecode {
  Assignment labels;
  std::vector<int> component_of;  // -1 for free variables
  std::vector<Side> side_of;
};

struct MaxflowResult {
  CutDecode decode;
  double value = 0.0;
  std::vector<AugmentingPath> augmentations;
};

FlowGraph build_flow_graph(const Energy& e);

// Shortest (fewest edges) positive-capacity s-t path, or nullopt if the
// terminals are disconnected. BFS with FIFO order, source seeds and neighbor
// expansion in ascending variable index, sink edge tested on dequeue; this
// fixed order makes path selection deterministic and shared with the
// message-side scheduler.
std::optional<AugmentingPath> find_path(const Topology& topo,
                                        const std::vector<double>& r_source,
                                        const std::vector<double>& r_sink,
                                        const std::vector<double>& r_fwd,
                                        const std::vector<double>& r_bwd);

std::optional<AugmentingPath> find_augmenting_path(const FlowGraph& g);

// Push the bottleneck amount along the path, updating residuals in place,
// and return the equivalent potential-space delta: (0,-f) at the first
// variable, (-f,0) at the last, [[0,-f],[+f,0]] on each edge in traversal
// orientation, and +f on the constant.
ReparamDelta push_flow(FlowGraph& g, const AugmentingPath& p);

// Label by residual reachability. Throws SolverError("NotConverged") if an
// augmenting path still exists.
CutDecode connected_components(const FlowGraph& g);

MaxflowResult maxflow_solve(const Energy& e);

// Shared side/component labelling over a residual network: source side is the
// forward-residual closure of variables with r_source > 0, sink side the
// backward-residual closure of variables with r_sink > 0. Components join
// same-side variables connected by an edge with positive residual in either
// direction. Throws SolverError("ConflictingPolarity") if the closures
// overlap, which would mean an augmenting path still exists.
void sides_and_components(const Topology& topo,
                          const std::vector<double>& r_source,
                          const std::vector<double>& r_sink,
                          const std::vector<double>& r_fwd,
                          const std::vector<double>& r_bwd,
                          std::vector<Side>* side_of,
                          std::vector<int>* component_of);

}  // namespace apmp

#endif
