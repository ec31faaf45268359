#include "apmp/solver.hpp"

#include <algorithm>
#include <cmath>

namespace apmp {

namespace {

std::string var_name(int i) { return "variable " + std::to_string(i); }

void check_close(const std::array<double, 2>& a, const std::array<double, 2>& b,
                 const std::string& what) {
  if (std::abs(a[0] - b[0]) > kSumTol || std::abs(a[1] - b[1]) > kSumTol) {
    throw SolverError("PropagationBroken", what);
  }
}

}  // namespace

ResidualView residual_view(const Energy& e, const Topology& topo,
                           const MessageState& st) {
  (void)topo;
  ResidualView rv;
  rv.r_source.resize(e.num_vars);
  rv.r_sink.resize(e.num_vars);
  for (int i = 0; i < e.num_vars; ++i) {
    rv.r_source[i] = e.unaries[i][1] - st.unary[i][1];
    rv.r_sink[i] = e.unaries[i][0] - st.unary[i][0];
  }
  rv.r_fwd.resize(e.edges.size());
  rv.r_bwd.resize(e.edges.size());
  for (std::size_t k = 0; k < e.edges.size(); ++k) {
    const auto& m = st.var_to_fac[k][0];
    rv.r_fwd[k] = e.edges[k].theta01 - m[1] + m[0];
    rv.r_bwd[k] = e.edges[k].theta10 + m[1] - m[0];
  }
  return rv;
}

std::optional<ChainSchedule> schedule(const Energy& e, const Topology& topo,
                                      const MessageState& st) {
  const ResidualView rv = residual_view(e, topo, st);
  const auto p = find_path(topo, rv.r_source, rv.r_sink, rv.r_fwd, rv.r_bwd);
  if (!p) return std::nullopt;
  ChainSchedule sched;
  sched.path = p->vars;
  sched.f = p->bottleneck;
  sched.chain_edges.resize(sched.path.size() - 1);
  sched.fwd.resize(sched.path.size() - 1);
  for (std::size_t k = 0; k + 1 < sched.path.size(); ++k) {
    const int u = sched.path[k];
    const int w = sched.path[k + 1];
    const auto& nbrs = topo.adj[u];
    const auto it =
        std::lower_bound(nbrs.begin(), nbrs.end(), std::make_pair(w, -1));
    sched.chain_edges[k] = it->second;
    sched.fwd[k] = u == e.edges[it->second].i;
  }
  return sched;
}

DampingPair damping_for(const Energy& e, const MessageState& st,
                        const ChainSchedule& sched) {
  const int t1 = sched.path.front();
  const int tn = sched.path.back();
  const double b = st.unary[t1][1];
  const double c = st.unary[tn][0];
  const double denom_start = e.unaries[t1][1] - b;
  const double denom_end = e.unaries[tn][0] - c;
  if (denom_start <= kInputTol || denom_end <= kInputTol) {
    throw SolverError("ZeroDenominator",
                      "no leftover unary capacity at a chain endpoint");
  }
  if (sched.f > denom_start || sched.f > denom_end) {
    throw SolverError("InsufficientCapacity",
                      "scheduled flow exceeds endpoint unary capacity");
  }
  return {(denom_start - sched.f) / denom_start,
          (denom_end - sched.f) / denom_end};
}

ReparamDelta phase1_iteration(const Energy& e, const Topology& topo,
                              MessageState& st, const ChainSchedule& sched) {
  if (sched.path.size() < 2 || !(sched.f > 0.0)) {
    throw SolverError("InsufficientCapacity",
                      "a chain needs two endpoints and positive flow");
  }
  const int t1 = sched.path.front();
  const int tn = sched.path.back();
  const DampingPair damping = damping_for(e, st, sched);

  const std::array<double, 2> before_t1 = st.unary[t1];
  const std::array<double, 2> before_tn = st.unary[tn];
  std::vector<std::array<std::array<double, 2>, 2>> before_vtf;
  before_vtf.reserve(sched.chain_edges.size());
  for (const int eidx : sched.chain_edges) before_vtf.push_back(st.var_to_fac[eidx]);

  // Damped unary updates. The damped convex mix of the old message and the
  // full potential must land exactly on the direct (0,f)/(f,0) increment.
  const double damped_start = damping.lambda_start * before_t1[1] +
                              (1.0 - damping.lambda_start) * e.unaries[t1][1];
  const double damped_end = damping.lambda_end * before_tn[0] +
                            (1.0 - damping.lambda_end) * e.unaries[tn][0];
  check_close({before_t1[0], damped_start}, {before_t1[0], before_t1[1] + sched.f},
              "damped start update disagrees with direct increment at " +
                  var_name(t1));
  check_close({damped_end, before_tn[1]}, {before_tn[0] + sched.f, before_tn[1]},
              "damped end update disagrees with direct increment at " +
                  var_name(tn));
  st.unary[t1][1] = before_t1[1] + sched.f;
  st.unary[tn][0] = before_tn[0] + sched.f;

  const auto pass = [&](int u, int eidx, bool toward_j) {
    const int side_u = toward_j ? 0 : 1;
    const std::array<double, 2> m_in = var_to_factor_message(topo, st, u, eidx);
    st.var_to_fac[eidx][side_u] = m_in;
    const std::array<double, 2> out =
        factor_to_var_message(e.edges[eidx], m_in, toward_j);
    check_close(out, m_in, "chain factor on edge " + std::to_string(eidx) +
                               " modified a passing message");
    st.fac_to_var[eidx][1 - side_u] = normalize2(out);
  };
  for (std::size_t k = 0; k + 1 < sched.path.size(); ++k) {
    pass(sched.path[k], sched.chain_edges[k], sched.fwd[k]);
  }
  for (std::size_t k = sched.path.size() - 1; k >= 1; --k) {
    pass(sched.path[k], sched.chain_edges[k - 1], !sched.fwd[k - 1]);
  }

  ReparamDelta d;
  const double f1 = st.unary[t1][1] - before_t1[1];
  const double f2 = st.unary[tn][0] - before_tn[0];
  d.d_unary.push_back({t1, {before_t1[0] - st.unary[t1][0], -f1}});
  d.d_unary.push_back({tn, {-f2, before_tn[1] - st.unary[tn][1]}});
  std::sort(d.d_unary.begin(), d.d_unary.end());
  d.d_const = f1;
  for (std::size_t k = 0; k < sched.chain_edges.size(); ++k) {
    const int eidx = sched.chain_edges[k];
    const auto& after = st.var_to_fac[eidx];
    const std::array<double, 2> di = {after[0][0] - before_vtf[k][0][0],
                                      after[0][1] - before_vtf[k][0][1]};
    const std::array<double, 2> dj = {after[1][0] - before_vtf[k][1][0],
                                      after[1][1] - before_vtf[k][1][1]};
    std::array<std::array<double, 2>, 2> dp;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        dp[r][c] = (di[r] - di[0]) + (dj[c] - dj[0]);
      }
    }
    d.d_pairwise.push_back({eidx, dp});
  }
  std::sort(d.d_pairwise.begin(), d.d_pairwise.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return d;
}

Phase1Result phase1_run(const Energy& e, const Topology& topo) {
  Phase1Result res;
  res.state = make_zero_state(e);
  const std::size_t cap =
      static_cast<std::size_t>(std::max(e.num_vars, 1)) *
      (e.edges.size() + 2 * static_cast<std::size_t>(e.num_vars));
  double acc = 0.0;
  while (auto sched = schedule(e, topo, res.state)) {
    if (res.trace.size() >= std::max<std::size_t>(cap, 1)) {
      throw SolverError("IterationCap",
                        "chain updates exceeded the shortest-path bound");
    }
    Phase1Record rec;
    rec.sched = *sched;
    rec.delta = phase1_iteration(e, topo, res.state, *sched);
    acc += rec.delta.d_const;
    rec.theta_const_so_far = acc;
    res.trace.push_back(std::move(rec));
  }
  res.flow_value = acc;
  return res;
}

IslandDecomposition detect_islands(const Energy& e, const Topology& topo,
                                   const MessageState& st) {
  const ResidualView rv = residual_view(e, topo, st);
  std::vector<Side> side_of;
  IslandDecomposition isl;
  sides_and_components(topo, rv.r_source, rv.r_sink, rv.r_fwd, rv.r_bwd,
                       &side_of, &isl.island_id);
  int count = 0;
  for (const int id : isl.island_id) count = std::max(count, id + 1);
  isl.polarity.resize(count);
  isl.members.resize(count);
  isl.seeds.resize(count);
  for (int i = 0; i < e.num_vars; ++i) {
    const int id = isl.island_id[i];
    if (id == -1) continue;
    isl.polarity[id] =
        side_of[i] == Side::kSource ? Polarity::kZero : Polarity::kOne;
    isl.members[id].push_back(i);
    if (rv.r_source[i] > 0.0 || rv.r_sink[i] > 0.0) isl.seeds[id].push_back(i);
  }
  return isl;
}

namespace {

// Progress per round is driven by the smallest positive potential magnitude:
// a correction of that size can circulate once around the residual edges
// before anything saturates, so the guard scales the message count by the
// spread between the strongest coupling and that quantum.
int analytic_round_cap(const Energy& iterated,
                       const std::vector<double>& seed_magnitudes) {
  double lambda_max = 0.0;
  double alpha_min = 0.0;
  const auto feed = [&alpha_min](double v) {
    if (v > 0.0) alpha_min = alpha_min == 0.0 ? v : std::min(alpha_min, v);
  };
  for (const Edge& ed : iterated.edges) {
    lambda_max = std::max({lambda_max, ed.theta01, ed.theta10});
    feed(ed.theta01);
    feed(ed.theta10);
  }
  for (const double mag : seed_magnitudes) feed(mag);
  const int num_messages =
      2 * static_cast<int>(iterated.edges.size()) + iterated.num_vars;
  int cap = 2 * iterated.num_vars + 2;
  if (lambda_max > 0.0 && alpha_min > 0.0) {
    cap += static_cast<int>(std::ceil(num_messages * lambda_max / alpha_min));
  }
  return cap;
}

struct RoundLoop {
  MessageState state;
  int rounds = 0;
};

RoundLoop run_to_fixed_point(const Energy& e, const Topology& topo,
                             MessageState st, int cap) {
  RoundLoop loop;
  while (true) {
    auto [next, rep] = strict_mp_round(e, topo, st);
    if (rep.is_fixed_point) break;
    st = std::move(next);
    if (++loop.rounds > cap) {
      throw SolverError("NoConvergence",
                        "message changes still above tolerance after " +
                            std::to_string(cap) + " rounds");
    }
  }
  loop.state = std::move(st);
  return loop;
}

}  // namespace

Phase2Result phase2_run(const Energy& e, const Topology& topo,
                        const MessageState& phase1_state, Phase2Mode mode) {
  Phase2Result res;
  res.islands = detect_islands(e, topo, phase1_state);
  const ResidualView rv = residual_view(e, topo, phase1_state);
  const int n = e.num_vars;

  if (mode == Phase2Mode::kStrict) {
    std::vector<double> seed_magnitudes;
    for (const auto& seeds : res.islands.seeds) {
      for (const int i : seeds) {
        seed_magnitudes.push_back(std::max(rv.r_source[i], rv.r_sink[i]));
      }
    }
    res.round_cap = analytic_round_cap(e, seed_magnitudes);
    RoundLoop loop = run_to_fixed_point(e, topo, phase1_state, res.round_cap);
    res.rounds = loop.rounds;
    res.assignment = decode(compute_beliefs(e, topo, loop.state));
    res.state = std::move(loop.state);
    res.converged = true;
    return res;
  }

  // Fast mode: Strict MP over the residual energy, with every seed's leftover
  // unary magnitude raised to the top pairwise strength. Message spread then
  // behaves like a flood fill over positive-residual edges; small residual
  // couplings can still circulate corrections, so the guard keeps the full
  // magnitude-ratio form.
  Energy residual;
  residual.num_vars = n;
  residual.unaries.resize(n);
  double strength = 1.0;
  for (std::size_t k = 0; k < e.edges.size(); ++k) {
    strength = std::max({strength, rv.r_fwd[k], rv.r_bwd[k]});
  }
  for (int i = 0; i < n; ++i) {
    residual.unaries[i] = {rv.r_sink[i] > 0.0 ? strength : 0.0,
                           rv.r_source[i] > 0.0 ? strength : 0.0};
  }
  residual.edges.reserve(e.edges.size());
  for (std::size_t k = 0; k < e.edges.size(); ++k) {
    residual.edges.push_back({e.edges[k].i, e.edges[k].j,
                              std::max(rv.r_fwd[k], 0.0),
                              std::max(rv.r_bwd[k], 0.0)});
  }
  res.round_cap = analytic_round_cap(residual, {strength});
  RoundLoop loop =
      run_to_fixed_point(residual, topo, make_zero_state(residual), res.round_cap);
  res.rounds = loop.rounds;
  res.assignment = decode(compute_beliefs(residual, topo, loop.state));
  res.state = std::move(loop.state);
  res.converged = true;
  return res;
}

ApmpResult apmp_solve(const Energy& e, Phase2Mode mode) {
  validate(e);
  const Topology topo = build_topology(e);
  Phase1Result p1 = phase1_run(e, topo);
  Phase2Result p2 = phase2_run(e, topo, p1.state, mode);
  ApmpResult res;
  res.assignment = std::move(p2.assignment);
  res.value = evaluate(e, res.assignment);
  res.trace = std::move(p1.trace);
  res.state = std::move(p2.state);
  res.islands = std::move(p2.islands);
  res.phase1_iterations = static_cast<int>(res.trace.size());
  res.phase2_rounds = p2.rounds;
  res.phase2_round_cap = p2.round_cap;
  res.converged = p2.converged;
  return res;
}

}  // namespace apmp
