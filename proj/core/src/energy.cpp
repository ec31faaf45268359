#include "apmp/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>

namespace apmp {

namespace {

std::string edge_name(int i, int j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

void check_endpoints(int i, int j, int num_vars) {
  if (i < 0 || j < 0 || i >= num_vars || j >= num_vars) {
    throw InputError("Malformed", "edge " + edge_name(i, j) + " out of range");
  }
  if (i >= j) {
    throw InputError("Malformed",
                     "edge " + edge_name(i, j) + " must be stored with i < j");
  }
}

}  // namespace

Topology build_topology(const Energy& e) {
  Topology topo;
  topo.adj.resize(e.num_vars);
  for (std::size_t k = 0; k < e.edges.size(); ++k) {
    const Edge& ed = e.edges[k];
    topo.adj[ed.i].push_back({ed.j, static_cast<int>(k)});
    topo.adj[ed.j].push_back({ed.i, static_cast<int>(k)});
  }
  for (auto& nbrs : topo.adj) std::sort(nbrs.begin(), nbrs.end());
  return topo;
}

void validate(const Energy& e) {
  if (e.num_vars < 0) throw InputError("Malformed", "negative num_vars");
  if (static_cast<int>(e.unaries.size()) != e.num_vars) {
    throw InputError("Malformed", "unaries size does not match num_vars");
  }
  if (!std::isfinite(e.theta_const)) {
    throw InputError("Malformed", "theta_const not finite");
  }
  for (int i = 0; i < e.num_vars; ++i) {
    const auto& u = e.unaries[i];
    if (!std::isfinite(u[0]) || !std::isfinite(u[1])) {
      throw InputError("Malformed", "unary " + std::to_string(i) + " not finite");
    }
    if (u[0] < -kInputTol || u[1] < -kInputTol ||
        std::min(u[0], u[1]) > kInputTol) {
      throw InputError("NonCanonical", "unary " + std::to_string(i) +
                                           " must be nonnegative with min 0");
    }
  }
  std::set<std::pair<int, int>> seen;
  for (const Edge& ed : e.edges) {
    check_endpoints(ed.i, ed.j, e.num_vars);
    if (!seen.insert({ed.i, ed.j}).second) {
      throw InputError("Malformed", "duplicate edge " + edge_name(ed.i, ed.j));
    }
    if (!std::isfinite(ed.theta01) || !std::isfinite(ed.theta10)) {
      throw InputError("Malformed", "edge " + edge_name(ed.i, ed.j) + " not finite");
    }
    if (ed.theta01 < -kInputTol || ed.theta10 < -kInputTol) {
      throw InputError("NonCanonical", "edge " + edge_name(ed.i, ed.j) +
                                           " has a negative pairwise term");
    }
  }
}

void validate_raw(const RawEnergy& raw) {
  if (raw.num_vars < 0) throw InputError("Malformed", "negative num_vars");
  if (static_cast<int>(raw.unaries.size()) != raw.num_vars) {
    throw InputError("Malformed", "unaries size does not match num_vars");
  }
  if (!std::isfinite(raw.theta_const)) {
    throw InputError("Malformed", "theta_const not finite");
  }
  for (const auto& u : raw.unaries) {
    if (!std::isfinite(u[0]) || !std::isfinite(u[1])) {
      throw InputError("Malformed", "unary not finite");
    }
  }
  std::set<std::pair<int, int>> seen;
  for (const RawTable& tb : raw.tables) {
    check_endpoints(tb.i, tb.j, raw.num_vars);
    if (!seen.insert({tb.i, tb.j}).second) {
      throw InputError("Malformed", "duplicate edge " + edge_name(tb.i, tb.j));
    }
    for (const auto& row : tb.t) {
      for (double v : row) {
        if (!std::isfinite(v)) {
          throw InputError("Malformed",
                           "table " + edge_name(tb.i, tb.j) + " not finite");
        }
      }
    }
    if (tb.t[0][0] + tb.t[1][1] > tb.t[0][1] + tb.t[1][0] + kInputTol) {
      throw InputError("NonSubmodular",
                       "edge " + edge_name(tb.i, tb.j) + " violates submodularity");
    }
  }
}

bool check_submodular(const RawEnergy& raw) {
  for (const RawTable& tb : raw.tables) {
    if (tb.t[0][0] + tb.t[1][1] > tb.t[0][1] + tb.t[1][0] + kInputTol) return false;
  }
  return true;
}

Energy canonicalize(const RawEnergy& raw) {
  validate_raw(raw);
  Energy e;
  e.num_vars = raw.num_vars;
  e.unaries = raw.unaries;
  e.theta_const = raw.theta_const;
  e.edges.reserve(raw.tables.size());
  for (const RawTable& tb : raw.tables) {
    auto t = tb.t;
    // Row minima move into unary i, column minima into unary j. For a
    // submodular table the reduced diagonal is zero, leaving [[0,a],[b,0]]
    // with a, b >= 0.
    const double r0 = std::min(t[0][0], t[0][1]);
    const double r1 = std::min(t[1][0], t[1][1]);
    t[0][0] -= r0;
    t[0][1] -= r0;
    t[1][0] -= r1;
    t[1][1] -= r1;
    e.unaries[tb.i][0] += r0;
    e.unaries[tb.i][1] += r1;
    const double c0 = std::min(t[0][0], t[1][0]);
    const double c1 = std::min(t[0][1], t[1][1]);
    t[0][0] -= c0;
    t[1][0] -= c0;
    t[0][1] -= c1;
    t[1][1] -= c1;
    e.unaries[tb.j][0] += c0;
    e.unaries[tb.j][1] += c1;
    if (std::abs(t[0][0]) > kSumTol || std::abs(t[1][1]) > kSumTol) {
      throw InputError("NonSubmodular", "edge " + edge_name(tb.i, tb.j) +
                                            " violates submodularity");
    }
    e.edges.push_back({tb.i, tb.j, std::max(t[0][1], 0.0), std::max(t[1][0], 0.0)});
  }
  for (auto& u : e.unaries) {
    const double m = std::min(u[0], u[1]);
    u[0] -= m;
    u[1] -= m;
    e.theta_const += m;
  }
  validate(e);
  return e;
}

double evaluate(const Energy& e, const Assignment& x) {
  if (static_cast<int>(x.size()) != e.num_vars) {
    throw InputError("Malformed", "assignment size does not match num_vars");
  }
  double total = e.theta_const;
  for (int i = 0; i < e.num_vars; ++i) total += e.unaries[i][x[i]];
  for (const Edge& ed : e.edges) {
    if (x[ed.i] == 0 && x[ed.j] == 1) total += ed.theta01;
    if (x[ed.i] == 1 && x[ed.j] == 0) total += ed.theta10;
  }
  return total;
}

double evaluate_raw(const RawEnergy& raw, const Assignment& x) {
  if (static_cast<int>(x.size()) != raw.num_vars) {
    throw InputError("Malformed", "assignment size does not match num_vars");
  }
  double total = raw.theta_const;
  for (int i = 0; i < raw.num_vars; ++i) total += raw.unaries[i][x[i]];
  for (const RawTable& tb : raw.tables) total += tb.t[x[tb.i]][x[tb.j]];
  return total;
}

std::pair<Assignment, double> brute_force_map(const Energy& e) {
  if (e.num_vars > 25) {
    throw InputError("TooLarge", "brute force is capped at 25 variables, got " +
                                     std::to_string(e.num_vars));
  }
  Assignment best(e.num_vars, 0);
  Assignment cur(e.num_vars, 0);
  double best_val = evaluate(e, best);
  const std::uint64_t count = std::uint64_t{1} << e.num_vars;
  for (std::uint64_t mask = 1; mask < count; ++mask) {
    for (int i = 0; i < e.num_vars; ++i) cur[i] = (mask >> i) & 1u;
    const double v = evaluate(e, cur);
    if (v < best_val || (v == best_val && cur < best)) {
      best_val = v;
      best = cur;
    }
  }
  return {best, best_val};
}

Energy random_instance(int n, double density, double max_unary,
                       double max_pairwise, std::uint64_t seed) {
  if (n < 1) throw InputError("Malformed", "need at least one variable");
  if (!(density > 0.0 && density <= 1.0)) {
    throw InputError("Malformed", "density must be in (0, 1]");
  }
  if (max_unary < 0 || max_pairwise < 0) {
    throw InputError("Malformed", "potential bounds must be nonnegative");
  }
  std::mt19937_64 rng(seed);
  const auto draw_int = [&rng](double upper) {
    return static_cast<double>(rng() % (std::llround(upper) + 1));
  };
  const auto draw_unit = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  Energy e;
  e.num_vars = n;
  e.unaries.resize(n);
  for (auto& u : e.unaries) {
    u = {draw_int(max_unary), draw_int(max_unary)};
    const double m = std::min(u[0], u[1]);
    u[0] -= m;
    u[1] -= m;
    e.theta_const += m;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (draw_unit() < density) {
        e.edges.push_back({i, j, draw_int(max_pairwise), draw_int(max_pairwise)});
      }
    }
  }
  validate(e);
  return e;
}

Energy apply_delta(const Energy& e, const ReparamDelta& d) {
  Energy out = e;
  for (const auto& [var, du] : d.d_unary) {
    if (var < 0 || var >= e.num_vars) {
      throw InputError("Malformed", "delta names unknown variable");
    }
    out.unaries[var][0] += du[0];
    out.unaries[var][1] += du[1];
  }
  for (const auto& [edge, dp] : d.d_pairwise) {
    if (edge < 0 || edge >= static_cast<int>(e.edges.size())) {
      throw InputError("Malformed", "delta names unknown edge");
    }
    if (std::abs(dp[0][0]) > kSumTol || std::abs(dp[1][1]) > kSumTol) {
      throw InputError("Malformed", "pairwise delta has nonzero diagonal");
    }
    out.edges[edge].theta01 += dp[0][1];
    out.edges[edge].theta10 += dp[1][0];
  }
  out.theta_const += d.d_const;
  return out;
}

bool delta_equal(const ReparamDelta& a, const ReparamDelta& b) {
  if (a.d_const != b.d_const) return false;
  const auto unary_entries = [](const ReparamDelta& d) {
    std::vector<std::pair<int, std::array<double, 2>>> v;
    for (const auto& [var, du] : d.d_unary) {
      if (du[0] != 0.0 || du[1] != 0.0) v.push_back({var, du});
    }
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto pair_entries = [](const ReparamDelta& d) {
    std::vector<std::pair<int, std::array<std::array<double, 2>, 2>>> v;
    for (const auto& [edge, dp] : d.d_pairwise) {
      bool zero = true;
      for (const auto& row : dp) {
        for (double x : row) zero = zero && x == 0.0;
      }
      if (!zero) v.push_back({edge, dp});
    }
    std::sort(v.begin(), v.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return v;
  };
  if (unary_entries(a) != unary_entries(b)) return false;
  const auto pa = pair_entries(a);
  const auto pb = pair_entries(b);
  if (pa.size() != pb.size()) return false;
  for (std::size_t k = 0; k < pa.size(); ++k) {
    if (pa[k].first != pb[k].first || pa[k].second != pb[k].second) return false;
  }
  return true;
}

}  // namespace apmp
