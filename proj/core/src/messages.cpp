#include "apmp/messages.hpp"

#include <algorithm>
#include <cmath>

namespace apmp {

MessageState make_zero_state(const Energy& e) {
  MessageState st;
  st.unary.assign(e.num_vars, {0.0, 0.0});
  st.var_to_fac.assign(e.edges.size(), {{{0.0, 0.0}, {0.0, 0.0}}});
  st.fac_to_var.assign(e.edges.size(), {{{0.0, 0.0}, {0.0, 0.0}}});
  return st;
}

std::array<double, 2> normalize2(std::array<double, 2> m) {
  const double lo = std::min(m[0], m[1]);
  return {m[0] - lo, m[1] - lo};
}

std::array<double, 2> factor_to_var_message(const Edge& e,
                                            const std::array<double, 2>& incoming,
                                            bool toward_j) {
  const double a = incoming[0];
  const double b = incoming[1];
  if (toward_j) {
    return {std::min(a, e.theta10 + b), std::min(b, e.theta01 + a)};
  }
  return {std::min(a, e.theta01 + b), std::min(b, e.theta10 + a)};
}

std::array<double, 2> var_to_factor_message(const Topology& topo,
                                            const MessageState& st, int var,
                                            int edge_index) {
  std::array<double, 2> sum = st.unary[var];
  for (const auto& [nbr, eidx] : topo.adj[var]) {
    if (eidx == edge_index) continue;
    const int side = var < nbr ? 0 : 1;
    sum[0] += st.fac_to_var[eidx][side][0];
    sum[1] += st.fac_to_var[eidx][side][1];
  }
  return normalize2(sum);
}

std::pair<MessageState, FixedPointReport> strict_mp_round(const Energy& e,
                                                          const Topology& topo,
                                                          const MessageState& st) {
  MessageState next = make_zero_state(e);
  FixedPointReport rep;
  const auto track = [&rep](const std::array<double, 2>& before,
                            const std::array<double, 2>& after,
                            const std::string& name) {
    const double change =
        std::max(std::abs(after[0] - before[0]), std::abs(after[1] - before[1]));
    if (change > rep.max_message_change) {
      rep.max_message_change = change;
      rep.violating_edge = name;
    }
  };
  for (int i = 0; i < e.num_vars; ++i) {
    next.unary[i] = normalize2(e.unaries[i]);
    track(st.unary[i], next.unary[i], "unary[" + std::to_string(i) + "]");
  }
  for (std::size_t k = 0; k < e.edges.size(); ++k) {
    const Edge& ed = e.edges[k];
    next.var_to_fac[k][0] =
        var_to_factor_message(topo, st, ed.i, static_cast<int>(k));
    next.var_to_fac[k][1] =
        var_to_factor_message(topo, st, ed.j, static_cast<int>(k));
    next.fac_to_var[k][1] =
        normalize2(factor_to_var_message(ed, st.var_to_fac[k][0], true));
    next.fac_to_var[k][0] =
        normalize2(factor_to_var_message(ed, st.var_to_fac[k][1], false));
    const std::string id = "edge[" + std::to_string(k) + "]";
    track(st.var_to_fac[k][0], next.var_to_fac[k][0], id + " from_i");
    track(st.var_to_fac[k][1], next.var_to_fac[k][1], id + " from_j");
    track(st.fac_to_var[k][0], next.fac_to_var[k][0], id + " to_i");
    track(st.fac_to_var[k][1], next.fac_to_var[k][1], id + " to_j");
  }
  rep.is_fixed_point = rep.max_message_change <= kSumTol;
  if (rep.is_fixed_point) rep.violating_edge.reset();
  return {std::move(next), rep};
}

Beliefs compute_beliefs(const Energy& e, const Topology& topo,
                        const MessageState& st) {
  Beliefs b;
  b.unary.resize(e.num_vars);
  for (int i = 0; i < e.num_vars; ++i) {
    std::array<double, 2> sum = e.unaries[i];
    for (const auto& [nbr, eidx] : topo.adj[i]) {
      const int side = i < nbr ? 0 : 1;
      sum[0] += st.fac_to_var[eidx][side][0];
      sum[1] += st.fac_to_var[eidx][side][1];
    }
    b.unary[i] = sum;
  }
  b.pairwise.resize(e.edges.size());
  for (std::size_t k = 0; k < e.edges.size(); ++k) {
    const Edge& ed = e.edges[k];
    const std::array<double, 2> in_i = {
        b.unary[ed.i][0] - st.fac_to_var[k][0][0],
        b.unary[ed.i][1] - st.fac_to_var[k][0][1]};
    const std::array<double, 2> in_j = {
        b.unary[ed.j][0] - st.fac_to_var[k][1][0],
        b.unary[ed.j][1] - st.fac_to_var[k][1][1]};
    auto& t = b.pairwise[k];
    t[0][0] = in_i[0] + in_j[0];
    t[0][1] = ed.theta01 + in_i[0] + in_j[1];
    t[1][0] = ed.theta10 + in_i[1] + in_j[0];
    t[1][1] = in_i[1] + in_j[1];
  }
  return b;
}

std::vector<std::array<double, 2>> message_beliefs(const Topology& topo,
                                                   const MessageState& st) {
  std::vector<std::array<double, 2>> b(topo.adj.size());
  for (std::size_t i = 0; i < topo.adj.size(); ++i) {
    std::array<double, 2> sum = st.unary[i];
    for (const auto& [nbr, eidx] : topo.adj[i]) {
      const int side = static_cast<int>(i) < nbr ? 0 : 1;
      sum[0] += st.fac_to_var[eidx][side][0];
      sum[1] += st.fac_to_var[eidx][side][1];
    }
    b[i] = sum;
  }
  return b;
}

Assignment decode(const Beliefs& b) {
  Assignment x(b.unary.size());
  for (std::size_t i = 0; i < b.unary.size(); ++i) {
    x[i] = b.unary[i][0] <= b.unary[i][1] ? 0 : 1;
  }
  return x;
}

}  // namespace apmp
