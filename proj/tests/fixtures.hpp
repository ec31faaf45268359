// Shared instance builders for the test suite.
#pragma once

#include <apmp/energy.hpp>
#include <apmp/messages.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace fixtures {

// Two-variable chain with opposing unaries and a symmetric coupling.
// Pushing flow along s -> 0 -> 1 -> t moves 2 units; the optimum is
// x = (0, 1) with energy 2.
inline apmp::Energy make_chain() {
  apmp::Energy e;
  e.num_vars = 2;
  e.unaries = {{0.0, 3.0}, {3.0, 0.0}};
  e.edges.push_back({0, 1, 2.0, 2.0});
  e.theta_const = 0.0;
  return e;
}

// Four-variable loopy instance where plain max-product from the zero
// state oscillates or decodes wrong, while the scheduled solver finds
// the optimum (1, 1, 1, 1). Couplings are symmetric with weight
// `lambda`; the end variables prefer label 1 with margin `a` and the
// middle variables prefer label 0 with margin `b`.
inline apmp::Energy make_counterexample(double lambda = 10.0,
                                        double a = 3.0,
                                        double b = 1.0) {
  apmp::Energy e;
  e.num_vars = 4;
  e.unaries = {{a, 0.0}, {0.0, b}, {0.0, b}, {a, 0.0}};
  for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}}) {
    e.edges.push_back({i, j, lambda, lambda});
  }
  e.theta_const = 0.0;
  return e;
}

// Five-variable path whose max-flow leaves three separate components
// with alternating polarity: {0} prefers 0, {2} prefers 1, {4} prefers
// 0, and variables 1 and 3 stay free. Optimal energy is 2.
inline apmp::Energy three_island_chain() {
  apmp::Energy e;
  e.num_vars = 5;
  e.unaries = {{0.0, 4.0}, {0.0, 0.0}, {4.0, 0.0}, {0.0, 0.0}, {0.0, 4.0}};
  for (int i = 0; i < 4; ++i) {
    e.edges.push_back({i, i + 1, 1.0, 1.0});
  }
  e.theta_const = 0.0;
  return e;
}

// Random spanning tree with integer potentials. Every variable i >= 1
// attaches to a uniformly chosen lower-index parent, so stored edges
// already satisfy i < j.
inline apmp::Energy random_tree(int n, std::uint64_t seed,
                                int max_unary = 9, int max_pairwise = 6) {
  std::mt19937_64 rng(seed);
  apmp::Energy e;
  e.num_vars = n;
  e.unaries.resize(n);
  for (int i = 0; i < n; ++i) {
    double u0 = static_cast<double>(rng() % (max_unary + 1));
    double u1 = static_cast<double>(rng() % (max_unary + 1));
    double lo = std::min(u0, u1);
    e.unaries[i] = {u0 - lo, u1 - lo};
    e.theta_const += lo;
  }
  for (int j = 1; j < n; ++j) {
    int parent = static_cast<int>(rng() % static_cast<std::uint64_t>(j));
    double t01 = static_cast<double>(rng() % (max_pairwise + 1));
    double t10 = static_cast<double>(rng() % (max_pairwise + 1));
    e.edges.push_back({parent, j, t01, t10});
  }
  apmp::validate(e);
  return e;
}

// True when some variable has equal best energies under both labels,
// in which case decoding from beliefs is not uniquely determined.
inline bool has_tied_variable(const apmp::Energy& e) {
  int n = e.num_vars;
  for (int i = 0; i < n; ++i) {
    double inf = std::numeric_limits<double>::infinity();
    double best[2] = {inf, inf};
    apmp::Assignment x(n, 0);
    for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
      for (int v = 0; v < n; ++v) x[v] = (bits >> v) & 1u;
      double val = apmp::evaluate(e, x);
      if (val < best[x[i]]) best[x[i]] = val;
    }
    if (std::abs(best[0] - best[1]) < 1e-9) return true;
  }
  return false;
}

// Random tree whose brute-force min-marginals are strict for every
// variable, so exact inference has a unique decode.
inline apmp::Energy random_tree_no_ties(int n, std::uint64_t seed) {
  for (std::uint64_t s = seed;; ++s) {
    apmp::Energy e = random_tree(n, s);
    if (!has_tied_variable(e)) return e;
  }
}

// The optimal fixed point of make_counterexample() with default parameters.
// Unary factor messages equal the potentials, every pairwise factor sends
// (lambda, 0), and each variable-to-factor message sums its unary with the
// two other factor messages: (13, 0) at the end variables, (19, 0) at the
// middle variables. Beliefs come out as (23, 0) and (30, 1).
inline apmp::MessageState counterexample_fixed_point(const apmp::Energy& e) {
  apmp::MessageState st = apmp::make_zero_state(e);
  st.unary = e.unaries;
  const auto from_var = [&](int var) -> std::array<double, 2> {
    return (var == 0 || var == 3) ? std::array<double, 2>{13.0, 0.0}
                                  : std::array<double, 2>{19.0, 0.0};
  };
  for (std::size_t k = 0; k < e.edges.size(); ++k) {
    st.var_to_fac[k][0] = from_var(e.edges[k].i);
    st.var_to_fac[k][1] = from_var(e.edges[k].j);
    st.fac_to_var[k][0] = {10.0, 0.0};
    st.fac_to_var[k][1] = {10.0, 0.0};
  }
  return st;
}

// Runs fn and returns the code of the error it throws, or "none".
template <typename Err, typename Fn>
inline std::string error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Err& ex) {
    return ex.code();
  }
  return "none";
}

}  // namespace fixtures
