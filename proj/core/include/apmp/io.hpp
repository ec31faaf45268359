#ifndef APMP_IO_HPP
#define APMP_IO_HPP

#include <string>

#include "apmp/energy.hpp"
#include "apmp/messages.hpp"
#include "apmp/solver.hpp"

namespace apmp {

// Parse the JSON energy format:
//   {"num_vars": N, "unaries": [[t0,t1],...], "edges": [[i,j,t01,t10],...],
//    "theta_const": C}
// "theta_const" is optional (default 0). With canonicalize false the energy
// must already be canonical; otherwise InputError("NonCanonical").
Energy load_energy_json(const std::string& text, bool canonicalize);

std::string save_energy_json(const Energy& e);

// Message-state JSON:
//   {"unary": [[m0,m1],...],
//    "edges": [{"i": i, "j": j, "var_to_fac": [[..],[..]],
//               "fac_to_var": [[..],[..]]}, ...]}
// with one pair per endpoint side. Loading checks the shape and the edge
// endpoints against the energy.
MessageState load_messages_json(const std::string& text, const Energy& e);

std::string save_messages_json(const Energy& e, const MessageState& st);

// DIMACS max-flow ("p max"): nodes 1..n are the variables, n+1 the source,
// n+2 the sink.
std::string export_dimacs(const Energy& e);

// Inverse of export_dimacs. Duplicate arcs are summed. Arcs into the source,
// out of the sink, or s->t are rejected. Returns raw tables because a cut
// graph only pins one unary side per variable.
RawEnergy import_dimacs(const std::string& text);

// One trace line: {"iter": k, "path": [...], "f": x, "delta": {...},
// "theta_const_so_far": c}.
std::string phase1_record_json(int iter, const Phase1Record& rec);

}  // namespace apmp

#endif
