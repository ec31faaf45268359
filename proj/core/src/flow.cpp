#include "apmp/flow.hpp"

#include <algorithm>
#include <queue>

namespace apmp {

namespace {

// Edge index between u and its neighbor w, via the sorted adjacency list.
int edge_between(const Topology& topo, int u, int w) {
  const auto& nbrs = topo.adj[u];
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), std::make_pair(w, -1));
  if (it == nbrs.end() || it->first != w) {
    throw SolverError("NotConverged", "path step " + std::to_string(u) + "->" +
                                          std::to_string(w) + " is not an edge");
  }
  return it->second;
}

double residual_along(const Energy& e, const std::vector<double>& r_fwd,
                      const std::vector<double>& r_bwd, int eidx, int from) {
  return from == e.edges[eidx].i ? r_fwd[eidx] : r_bwd[eidx];
}

}  // namespace

FlowGraph build_flow_graph(const Energy& e) {
  validate(e);
  FlowGraph g;
  g.num_vars = e.num_vars;
  g.r_source.resize(e.num_vars);
  g.r_sink.resize(e.num_vars);
  for (int i = 0; i < e.num_vars; ++i) {
    g.r_source[i] = e.unaries[i][1];
    g.r_sink[i] = e.unaries[i][0];
  }
  g.r_fwd.reserve(e.edges.size());
  g.r_bwd.reserve(e.edges.size());
  for (const Edge& ed : e.edges) {
    g.r_fwd.push_back(ed.theta01);
    g.r_bwd.push_back(ed.theta10);
  }
  g.origin = &e;
  g.topo = build_topology(e);
  return g;
}

std::optional<AugmentingPath> find_path(const Topology& topo,
                                        const std::vector<double>& r_source,
                                        const std::vector<double>& r_sink,
                                        const std::vector<double>& r_fwd,
                                        const std::vector<double>& r_bwd) {
  const int n = static_cast<int>(topo.adj.size());
  std::vector<int> parent(n, -1);
  std::vector<int> parent_edge(n, -1);
  std::vector<char> visited(n, 0);
  std::queue<int> q;
  for (int i = 0; i < n; ++i) {
    if (r_source[i] > 0.0) {
      visited[i] = 1;
      q.push(i);
    }
  }
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    if (r_sink[u] > 0.0) {
      AugmentingPath p;
      for (int v = u; v != -1; v = parent[v]) p.vars.push_back(v);
      std::reverse(p.vars.begin(), p.vars.end());
      p.bottleneck = std::min(r_source[p.vars.front()], r_sink[u]);
      for (std::size_t k = 0; k + 1 < p.vars.size(); ++k) {
        const int eidx = parent_edge[p.vars[k + 1]];
        const double r =
            p.vars[k] < p.vars[k + 1] ? r_fwd[eidx] : r_bwd[eidx];
        p.bottleneck = std::min(p.bottleneck, r);
      }
      return p;
    }
    for (const auto& [w, eidx] : topo.adj[u]) {
      if (visited[w]) continue;
      const double r = u < w ? r_fwd[eidx] : r_bwd[eidx];
      if (r > 0.0) {
        visited[w] = 1;
        parent[w] = u;
        parent_edge[w] = eidx;
        q.push(w);
      }
    }
  }
  return std::nullopt;
}

std::optional<AugmentingPath> find_augmenting_path(const FlowGraph& g) {
  return find_path(g.topo, g.r_source, g.r_sink, g.r_fwd, g.r_bwd);
}

ReparamDelta push_flow(FlowGraph& g, const AugmentingPath& p) {
  const double f = p.bottleneck;
  if (!(f > 0.0)) {
    throw SolverError("InsufficientCapacity",
                      "augmenting path must carry positive flow");
  }
  if (p.vars.empty()) {
    throw SolverError("InsufficientCapacity", "empty augmenting path");
  }
  const Energy& e = *g.origin;
  const int first = p.vars.front();
  const int last = p.vars.back();
  if (g.r_source[first] < f || g.r_sink[last] < f) {
    throw SolverError("InsufficientCapacity",
                      "terminal residual below requested flow");
  }
  std::vector<int> path_edges(p.vars.size() - 1);
  for (std::size_t k = 0; k + 1 < p.vars.size(); ++k) {
    const int eidx = edge_between(g.topo, p.vars[k], p.vars[k + 1]);
    if (residual_along(e, g.r_fwd, g.r_bwd, eidx, p.vars[k]) < f) {
      throw SolverError("InsufficientCapacity",
                        "edge residual below requested flow");
    }
    path_edges[k] = eidx;
  }

  g.r_source[first] -= f;
  g.r_sink[last] -= f;
  ReparamDelta d;
  d.d_const = f;
  d.d_unary.push_back({first, {0.0, -f}});
  d.d_unary.push_back({last, {-f, 0.0}});
  std::sort(d.d_unary.begin(), d.d_unary.end());
  for (std::size_t k = 0; k + 1 < p.vars.size(); ++k) {
    const int eidx = path_edges[k];
    std::array<std::array<double, 2>, 2> dp{};
    if (p.vars[k] == e.edges[eidx].i) {
      g.r_fwd[eidx] -= f;
      g.r_bwd[eidx] += f;
      dp[0][1] = -f;
      dp[1][0] = f;
    } else {
      g.r_bwd[eidx] -= f;
      g.r_fwd[eidx] += f;
      dp[0][1] = f;
      dp[1][0] = -f;
    }
    d.d_pairwise.push_back({eidx, dp});
  }
  std::sort(d.d_pairwise.begin(), d.d_pairwise.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  g.flow_pushed += f;
  return d;
}

void sides_and_components(const Topology& topo,
                          const std::vector<double>& r_source,
                          const std::vector<double>& r_sink,
                          const std::vector<double>& r_fwd,
                          const std::vector<double>& r_bwd,
                          std::vector<Side>* side_of,
                          std::vector<int>* component_of) {
  const int n = static_cast<int>(topo.adj.size());
  side_of->assign(n, Side::kFree);
  std::queue<int> q;
  for (int i = 0; i < n; ++i) {
    if (r_source[i] > 0.0) {
      (*side_of)[i] = Side::kSource;
      q.push(i);
    }
  }
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (const auto& [w, eidx] : topo.adj[u]) {
      if ((*side_of)[w] != Side::kFree) continue;
      const double r = u < w ? r_fwd[eidx] : r_bwd[eidx];
      if (r > 0.0) {
        (*side_of)[w] = Side::kSource;
        q.push(w);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (r_sink[i] > 0.0) {
      if ((*side_of)[i] == Side::kSource) {
        throw SolverError("ConflictingPolarity",
                          "variable " + std::to_string(i) +
                              " reachable from both terminals");
      }
      (*side_of)[i] = Side::kSink;
      q.push(i);
    }
  }
  while (!q.empty()) {
    const int w = q.front();
    q.pop();
    // Pull in u over residual capacity u -> w: u can reach the sink through w.
    for (const auto& [u, eidx] : topo.adj[w]) {
      if ((*side_of)[u] == Side::kSink) continue;
      const double r = u < w ? r_fwd[eidx] : r_bwd[eidx];
      if (r > 0.0) {
        if ((*side_of)[u] == Side::kSource) {
          throw SolverError("ConflictingPolarity",
                            "variable " + std::to_string(u) +
                                " reachable from both terminals");
        }
        (*side_of)[u] = Side::kSink;
        q.push(u);
      }
    }
  }
  component_of->assign(n, -1);
  int next_id = 0;
  for (int start = 0; start < n; ++start) {
    if ((*side_of)[start] == Side::kFree || (*component_of)[start] != -1) continue;
    const int id = next_id++;
    (*component_of)[start] = id;
    q.push(start);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (const auto& [w, eidx] : topo.adj[u]) {
        if ((*component_of)[w] != -1 || (*side_of)[w] != (*side_of)[u]) continue;
        if (std::max(r_fwd[eidx], r_bwd[eidx]) > 0.0) {
          (*component_of)[w] = id;
          q.push(w);
        }
      }
    }
  }
}

CutDecode connected_components(const FlowGraph& g) {
  if (find_augmenting_path(g)) {
    throw SolverError("NotConverged",
                      "an augmenting path still exists; flow is not maximum");
  }
  CutDecode d;
  sides_and_components(g.topo, g.r_source, g.r_sink, g.r_fwd, g.r_bwd,
                       &d.side_of, &d.component_of);
  d.labels.resize(g.num_vars);
  for (int i = 0; i < g.num_vars; ++i) {
    d.labels[i] = d.side_of[i] == Side::kSink ? 1 : 0;
  }
  return d;
}

MaxflowResult maxflow_solve(const Energy& e) {
  FlowGraph g = build_flow_graph(e);
  MaxflowResult res;
  const std::size_t cap =
      static_cast<std::size_t>(e.num_vars) *
      (e.edges.size() + 2 * static_cast<std::size_t>(e.num_vars));
  while (auto p = find_augmenting_path(g)) {
    if (res.augmentations.size() >= std::max<std::size_t>(cap, 1)) {
      throw SolverError("IterationCap",
                        "augmentation count exceeded the Edmonds-Karp bound");
    }
    push_flow(g, *p);
    res.augmentations.push_back(*p);
  }
  res.value = e.theta_const + g.flow_pushed;
  res.decode = connected_components(g);
  return res;
}

}  // namespace apmp
