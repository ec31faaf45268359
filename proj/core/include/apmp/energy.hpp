#ifndef APMP_ENERGY_HPP
#define APMP_ENERGY_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace apmp {

// Absolute tolerance for predicates on raw input values (single-op rounding).
inline constexpr double kInputTol = 1e-12;
// Absolute tolerance for accumulated sums and fixed-point detection.
inline constexpr double kSumTol = 1e-9;

// Bad user input. The CLI maps this to exit code 3.
class InputError : public std::runtime_error {
public:
  InputError(std::string code, const std::string& msg)
      : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

// Solver failure or violated internal invariant. The CLI maps this to exit code 2.
class SolverError : public std::runtime_error {
public:
  SolverError(std::string code, const std::string& msg)
      : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

// One label in {0,1} per variable.
using Assignment = std::vector<std::uint8_t>;

struct Edge {
  int i = 0;  // endpoints, stored with i < j
  int j = 0;
  double theta01 = 0.0;  // penalty for (x_i, x_j) = (0, 1)
  double theta10 = 0.0;  // penalty for (x_i, x_j) = (1, 0)
};

// Canonical-form binary submodular energy:
//   E(x) = sum_i unaries[i][x_i] + sum_e pairwise_e(x_i, x_j) + theta_const
// where each pairwise table is [[0, theta01], [theta10, 0]] with theta01,
// theta10 >= 0, and every unary has min entry 0.
struct Energy {
  int num_vars = 0;
  std::vector<std::array<double, 2>> unaries;  // per variable (theta0, theta1)
  std::vector<Edge> edges;                     // simple graph, i < j, no duplicates
  double theta_const = 0.0;
};

struct RawTable {
  int i = 0;
  int j = 0;
  std::array<std::array<double, 2>, 2> t{};  // t[x_i][x_j]
};

// General (not yet canonical) energy with full 2x2 pairwise tables.
struct RawEnergy {
  int num_vars = 0;
  std::vector<std::array<double, 2>> unaries;
  std::vector<RawTable> tables;
  double theta_const = 0.0;
};

// Sparse potential-space change produced by pushing flow along one augmenting
// path, or by one scheduled chain pass. Entries are listed in ascending
// variable / edge index order; pairwise deltas are in stored edge orientation.
struct ReparamDelta {
  std::vector<std::pair<int, std::array<double, 2>>> d_unary;
  std::vector<std::pair<int, std::array<std::array<double, 2>, 2>>> d_pairwise;
  double d_const = 0.0;
};

// adj[v] lists (neighbor, edge index), sorted by neighbor id. The sort order
// fixes the tie-breaking of every BFS in the project.
struct Topology {
  std::vector<std::vector<std::pair<int, int>>> adj;
};

Topology build_topology(const Energy& e);

// Throw InputError("NonCanonical") / InputError("NonSubmodular") /
// InputError("Malformed") unless all Energy invariants hold.
void validate(const Energy& e);
void validate_raw(const RawEnergy& raw);

// True iff every table satisfies t(0,0) + t(1,1) <= t(0,1) + t(1,0)
// within kInputTol.
bool check_submodular(const RawEnergy& raw);

// Shift row/column constants of each table into the unaries and unary minima
// into theta_const, producing a canonical Energy that evaluates identically.
// Throws InputError("NonSubmodular") naming the offending edge.
Energy canonicalize(const RawEnergy& raw);

double evaluate(const Energy& e, const Assignment& x);
double evaluate_raw(const RawEnergy& raw, const Assignment& x);

// Exact argmin by exhaustive enumeration, ties broken toward the
// lexicographically smallest bit-vector. Throws InputError("TooLarge")
// above 25 variables.
std::pair<Assignment, double> brute_force_map(const Energy& e);

// Deterministic seeded generator. Potentials are integer-valued so that all
// downstream sums stay exact in floating point. Output is canonical.
Energy random_instance(int n, double density, double max_unary,
                       double max_pairwise, std::uint64_t seed);

// Apply a delta to the potentials. Requires the (0,0)/(1,1) entries of every
// pairwise delta to be zero so the result stays in canonical shape.
Energy apply_delta(const Energy& e, const ReparamDelta& d);

bool delta_equal(const ReparamDelta& a, const ReparamDelta& b);

}  // namespace apmp

#endif
