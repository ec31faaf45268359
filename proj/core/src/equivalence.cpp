#include "apmp/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apmp/flow.hpp"

namespace apmp {

namespace {

std::string fmt2(const std::array<double, 2>& v) {
  std::ostringstream os;
  os << "(" << v[0] << ", " << v[1] << ")";
  return os.str();
}

std::string fmt_delta(const ReparamDelta& d) {
  std::ostringstream os;
  os << "const " << d.d_const << "; unary";
  for (const auto& [var, du] : d.d_unary) os << " " << var << ":" << fmt2(du);
  os << "; pairwise";
  for (const auto& [eidx, dp] : d.d_pairwise) {
    os << " " << eidx << ":[" << dp[0][0] << "," << dp[0][1] << ";" << dp[1][0]
       << "," << dp[1][1] << "]";
  }
  return os.str();
}

std::vector<std::array<double, 2>> normalized_beliefs(const Topology& topo,
                                                      const MessageState& st) {
  auto b = message_beliefs(topo, st);
  for (auto& v : b) v = normalize2(v);
  return b;
}

}  // namespace

UsedRemainderSplit used_remainder(const Energy& e, const MessageState& st) {
  UsedRemainderSplit split;
  split.used = st.unary;
  split.remainder.resize(e.num_vars);
  for (int i = 0; i < e.num_vars; ++i) {
    split.remainder[i] = {e.unaries[i][0] - st.unary[i][0],
                          e.unaries[i][1] - st.unary[i][1]};
    if (split.remainder[i][0] < -kSumTol || split.remainder[i][1] < -kSumTol) {
      throw SolverError("SplitViolation",
                        "unary message at variable " + std::to_string(i) +
                            " exceeds its potential");
    }
  }
  return split;
}

RawEnergy belief_reparam(const Energy& e, const Topology& topo,
                         const MessageState& st) {
  const Beliefs b = compute_beliefs(e, topo, st);
  RawEnergy out;
  out.num_vars = e.num_vars;
  out.unaries = b.unary;
  out.theta_const = e.theta_const;
  out.tables.resize(e.edges.size());
  for (std::size_t k = 0; k < e.edges.size(); ++k) {
    const Edge& ed = e.edges[k];
    RawTable& tb = out.tables[k];
    tb.i = ed.i;
    tb.j = ed.j;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        tb.t[r][c] = b.pairwise[k][r][c] - b.unary[ed.i][r] - b.unary[ed.j][c];
      }
    }
  }
  return out;
}

std::array<std::array<double, 2>, 2> pairwise_belief_delta(
    const Energy& e, const MessageState& before, const MessageState& after,
    int edge_index) {
  const auto belief = [&](const MessageState& st) {
    const Edge& ed = e.edges[edge_index];
    const auto& in_i = st.var_to_fac[edge_index][0];
    const auto& in_j = st.var_to_fac[edge_index][1];
    std::array<std::array<double, 2>, 2> b;
    b[0][0] = in_i[0] + in_j[0];
    b[0][1] = ed.theta01 + in_i[0] + in_j[1];
    b[1][0] = ed.theta10 + in_i[1] + in_j[0];
    b[1][1] = in_i[1] + in_j[1];
    return b;
  };
  const auto b0 = belief(before);
  const auto b1 = belief(after);
  std::array<std::array<double, 2>, 2> d;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) d[r][c] = b1[r][c] - b0[r][c];
  }
  return d;
}

LockstepReport lockstep_check(const Energy& e) {
  validate(e);
  const Topology topo = build_topology(e);
  FlowGraph g = build_flow_graph(e);
  MessageState st = make_zero_state(e);
  LockstepReport rep;
  double sum_f = 0.0;

  const auto mismatch = [&rep](int iter, const std::string& field,
                               const std::string& detail) {
    rep.mismatches.push_back({iter, field, detail});
  };

  while (true) {
    const auto flow_path = find_augmenting_path(g);
    const auto sched = schedule(e, topo, st);
    if (!flow_path && !sched) break;
    if (!flow_path || !sched) {
      mismatch(rep.iterations, "path",
               std::string("one side terminated early: flow ") +
                   (flow_path ? "continues" : "done") + ", scheduler " +
                   (sched ? "continues" : "done"));
      break;
    }
    if (flow_path->vars != sched->path || flow_path->bottleneck != sched->f) {
      std::ostringstream os;
      os << "flow path ";
      for (int v : flow_path->vars) os << v << " ";
      os << "f=" << flow_path->bottleneck << " vs scheduled ";
      for (int v : sched->path) os << v << " ";
      os << "f=" << sched->f;
      mismatch(rep.iterations, "path", os.str());
      break;
    }

    const auto beliefs_before = normalized_beliefs(topo, st);
    const ReparamDelta d_apmp = phase1_iteration(e, topo, st, *sched);
    const ReparamDelta d_flow = push_flow(g, *flow_path);
    sum_f += sched->f;

    if (!delta_equal(d_apmp, d_flow)) {
      mismatch(rep.iterations, "delta",
               "message-side " + fmt_delta(d_apmp) + " vs flow-side " +
                   fmt_delta(d_flow));
      break;
    }

    const ResidualView rv = residual_view(e, topo, st);
    bool residuals_ok = rv.r_source == g.r_source && rv.r_sink == g.r_sink &&
                        rv.r_fwd == g.r_fwd && rv.r_bwd == g.r_bwd;
    if (!residuals_ok) {
      std::ostringstream os;
      for (int i = 0; i < e.num_vars; ++i) {
        if (rv.r_source[i] != g.r_source[i] || rv.r_sink[i] != g.r_sink[i]) {
          os << " var " << i << " (" << rv.r_source[i] << "," << rv.r_sink[i]
             << ") vs (" << g.r_source[i] << "," << g.r_sink[i] << ")";
        }
      }
      for (std::size_t k = 0; k < e.edges.size(); ++k) {
        if (rv.r_fwd[k] != g.r_fwd[k] || rv.r_bwd[k] != g.r_bwd[k]) {
          os << " edge " << k << " (" << rv.r_fwd[k] << "," << rv.r_bwd[k]
             << ") vs (" << g.r_fwd[k] << "," << g.r_bwd[k] << ")";
        }
      }
      mismatch(rep.iterations, "residuals", os.str());
      break;
    }

    const auto beliefs_after = normalized_beliefs(topo, st);
    bool beliefs_ok = true;
    for (int i = 0; i < e.num_vars && beliefs_ok; ++i) {
      if (beliefs_before[i] != beliefs_after[i]) {
        mismatch(rep.iterations, "beliefs",
                 "variable " + std::to_string(i) + " normalized belief moved " +
                     fmt2(beliefs_before[i]) + " -> " + fmt2(beliefs_after[i]));
        beliefs_ok = false;
      }
    }
    if (!beliefs_ok) break;

    ++rep.iterations;
  }

  if (rep.mismatches.empty() && sum_f != g.flow_pushed) {
    mismatch(rep.iterations, "f",
             "scheduled flow total differs from oracle max-flow value");
  }
  return rep;
}

}  // namespace apmp
