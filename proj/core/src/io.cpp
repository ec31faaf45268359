#include "apmp/io.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

namespace apmp {

namespace {

using nlohmann::json;

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& ex) {
    throw InputError("Malformed", std::string("bad JSON: ") + ex.what());
  }
}

std::array<double, 2> as_pair(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw InputError("Malformed", what + " must be a pair of numbers");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

Energy load_energy_json(const std::string& text, bool canonicalize_input) {
  const json doc = parse(text);
  if (!doc.is_object() || !doc.contains("num_vars") || !doc.contains("unaries")) {
    throw InputError("Malformed", "energy JSON needs num_vars and unaries");
  }
  if (!doc["num_vars"].is_number_integer()) {
    throw InputError("Malformed", "num_vars must be an integer");
  }
  RawEnergy raw;
  raw.num_vars = doc["num_vars"].get<int>();
  if (!doc["unaries"].is_array()) {
    throw InputError("Malformed", "unaries must be an array");
  }
  for (const auto& u : doc["unaries"]) raw.unaries.push_back(as_pair(u, "unary"));
  if (doc.contains("theta_const")) {
    if (!doc["theta_const"].is_number()) {
      throw InputError("Malformed", "theta_const must be a number");
    }
    raw.theta_const = doc["theta_const"].get<double>();
  }
  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) {
      throw InputError("Malformed", "edges must be an array");
    }
    for (const auto& row : doc["edges"]) {
      if (!row.is_array() || row.size() != 4 || !row[0].is_number_integer() ||
          !row[1].is_number_integer() || !row[2].is_number() ||
          !row[3].is_number()) {
        throw InputError("Malformed", "each edge must be [i, j, theta01, theta10]");
      }
      int i = row[0].get<int>();
      int j = row[1].get<int>();
      double t01 = row[2].get<double>();
      double t10 = row[3].get<double>();
      if (i == j) throw InputError("Malformed", "edge endpoints must differ");
      if (i > j) {
        std::swap(i, j);
        std::swap(t01, t10);
      }
      RawTable tb;
      tb.i = i;
      tb.j = j;
      tb.t = {{{0.0, t01}, {t10, 0.0}}};
      raw.tables.push_back(tb);
    }
  }
  if (canonicalize_input) return canonicalize(raw);
  Energy e;
  e.num_vars = raw.num_vars;
  e.unaries = std::move(raw.unaries);
  e.theta_const = raw.theta_const;
  for (const RawTable& tb : raw.tables) {
    e.edges.push_back({tb.i, tb.j, tb.t[0][1], tb.t[1][0]});
  }
  validate(e);
  return e;
}

std::string save_energy_json(const Energy& e) {
  json doc;
  doc["num_vars"] = e.num_vars;
  doc["unaries"] = json::array();
  for (const auto& u : e.unaries) doc["unaries"].push_back({u[0], u[1]});
  doc["edges"] = json::array();
  for (const Edge& ed : e.edges) {
    doc["edges"].push_back({ed.i, ed.j, ed.theta01, ed.theta10});
  }
  doc["theta_const"] = e.theta_const;
  return doc.dump();
}

MessageState load_messages_json(const std::string& text, const Energy& e) {
  const json doc = parse(text);
  if (!doc.is_object() || !doc.contains("unary") || !doc.contains("edges")) {
    throw InputError("Malformed", "message JSON needs unary and edges");
  }
  MessageState st = make_zero_state(e);
  if (!doc["unary"].is_array() ||
      static_cast<int>(doc["unary"].size()) != e.num_vars) {
    throw InputError("Malformed", "unary message count must match num_vars");
  }
  for (int i = 0; i < e.num_vars; ++i) {
    st.unary[i] = as_pair(doc["unary"][i], "unary message");
  }
  if (!doc["edges"].is_array() || doc["edges"].size() != e.edges.size()) {
    throw InputError("Malformed", "edge message count must match edges");
  }
  for (std::size_t k = 0; k < e.edges.size(); ++k) {
    const json& rec = doc["edges"][k];
    if (!rec.is_object() || rec.value("i", -1) != e.edges[k].i ||
        rec.value("j", -1) != e.edges[k].j) {
      throw InputError("Malformed", "edge " + std::to_string(k) +
                                        " does not match the energy's edge list");
    }
    for (const char* key : {"var_to_fac", "fac_to_var"}) {
      if (!rec.contains(key) || !rec[key].is_array() || rec[key].size() != 2) {
        throw InputError("Malformed", "edge " + std::to_string(k) + " needs " +
                                          key + " with one pair per endpoint");
      }
    }
    for (int side = 0; side < 2; ++side) {
      st.var_to_fac[k][side] = as_pair(rec["var_to_fac"][side], "message");
      st.fac_to_var[k][side] = as_pair(rec["fac_to_var"][side], "message");
    }
  }
  return st;
}

std::string save_messages_json(const Energy& e, const MessageState& st) {
  json doc;
  doc["unary"] = json::array();
  for (const auto& m : st.unary) doc["unary"].push_back({m[0], m[1]});
  doc["edges"] = json::array();
  for (std::size_t k = 0; k < st.var_to_fac.size(); ++k) {
    json rec;
    rec["i"] = e.edges[k].i;
    rec["j"] = e.edges[k].j;
    rec["var_to_fac"] = {{st.var_to_fac[k][0][0], st.var_to_fac[k][0][1]},
                         {st.var_to_fac[k][1][0], st.var_to_fac[k][1][1]}};
    rec["fac_to_var"] = {{st.fac_to_var[k][0][0], st.fac_to_var[k][0][1]},
                         {st.fac_to_var[k][1][0], st.fac_to_var[k][1][1]}};
    doc["edges"].push_back(std::move(rec));
  }
  return doc.dump();
}

std::string export_dimacs(const Energy& e) {
  validate(e);
  const int s = e.num_vars + 1;
  const int t = e.num_vars + 2;
  std::ostringstream os;
  std::ostringstream arcs;
  int count = 0;
  const auto arc = [&](int u, int v, double cap) {
    if (cap <= 0.0) return;
    arcs << "a " << u << " " << v << " " << cap << "\n";
    ++count;
  };
  for (int i = 0; i < e.num_vars; ++i) arc(s, i + 1, e.unaries[i][1]);
  for (int i = 0; i < e.num_vars; ++i) arc(i + 1, t, e.unaries[i][0]);
  for (const Edge& ed : e.edges) {
    arc(ed.i + 1, ed.j + 1, ed.theta01);
    arc(ed.j + 1, ed.i + 1, ed.theta10);
  }
  os << "p max " << e.num_vars + 2 << " " << count << "\n";
  os << "n " << s << " s\n";
  os << "n " << t << " t\n";
  os << arcs.str();
  return os.str();
}

RawEnergy import_dimacs(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int num_nodes = -1;
  int source = -1;
  int sink = -1;
  std::vector<std::array<int, 2>> arcs;
  std::vector<double> caps;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind) || kind == "c") continue;
    const auto fail = [lineno](const std::string& msg) -> InputError {
      return InputError("Malformed",
                        "DIMACS line " + std::to_string(lineno) + ": " + msg);
    };
    if (kind == "p") {
      std::string prob;
      int m = 0;
      if (!(ls >> prob >> num_nodes >> m) || prob != "max" || num_nodes < 2) {
        throw fail("expected 'p max <nodes> <arcs>'");
      }
    } else if (kind == "n") {
      int id;
      std::string role;
      if (!(ls >> id >> role) || (role != "s" && role != "t")) {
        throw fail("expected 'n <id> s|t'");
      }
      (role == "s" ? source : sink) = id;
    } else if (kind == "a") {
      int u, v;
      double cap;
      if (!(ls >> u >> v >> cap) || cap < 0.0) {
        throw fail("expected 'a <u> <v> <nonnegative cap>'");
      }
      arcs.push_back({u, v});
      caps.push_back(cap);
    } else {
      throw fail("unknown record '" + kind + "'");
    }
  }
  if (num_nodes < 0) throw InputError("Malformed", "missing DIMACS problem line");
  if (source < 1 || sink < 1 || source > num_nodes || sink > num_nodes ||
      source == sink) {
    throw InputError("Malformed", "DIMACS needs distinct source and sink nodes");
  }
  std::map<int, int> var_of;
  for (int id = 1; id <= num_nodes; ++id) {
    if (id != source && id != sink) {
      const int v = static_cast<int>(var_of.size());
      var_of[id] = v;
    }
  }
  RawEnergy raw;
  raw.num_vars = num_nodes - 2;
  raw.unaries.assign(raw.num_vars, {0.0, 0.0});
  std::map<std::pair<int, int>, std::array<double, 2>> pair_caps;
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const int u = arcs[k][0];
    const int v = arcs[k][1];
    const double cap = caps[k];
    if (u < 1 || v < 1 || u > num_nodes || v > num_nodes || u == v) {
      throw InputError("Malformed", "arc endpoint out of range");
    }
    if (v == source || u == sink || (u == source && v == sink)) {
      throw InputError("Malformed",
                       "arcs into the source, out of the sink, or source to "
                       "sink are not representable");
    }
    if (u == source) {
      raw.unaries[var_of[v]][1] += cap;
    } else if (v == sink) {
      raw.unaries[var_of[u]][0] += cap;
    } else {
      const int a = var_of[u];
      const int b = var_of[v];
      if (a < b) {
        pair_caps[{a, b}][0] += cap;
      } else {
        pair_caps[{b, a}][1] += cap;
      }
    }
  }
  for (const auto& [key, c] : pair_caps) {
    RawTable tb;
    tb.i = key.first;
    tb.j = key.second;
    tb.t = {{{0.0, c[0]}, {c[1], 0.0}}};
    raw.tables.push_back(tb);
  }
  validate_raw(raw);
  return raw;
}

std::string phase1_record_json(int iter, const Phase1Record& rec) {
  json doc;
  doc["iter"] = iter;
  doc["path"] = rec.sched.path;
  doc["f"] = rec.sched.f;
  json delta;
  delta["unary"] = json::array();
  for (const auto& [var, du] : rec.delta.d_unary) {
    delta["unary"].push_back({json(var), json(du[0]), json(du[1])});
  }
  delta["pairwise"] = json::array();
  for (const auto& [eidx, dp] : rec.delta.d_pairwise) {
    delta["pairwise"].push_back(
        {json(eidx), json(dp[0][0]), json(dp[0][1]), json(dp[1][0]), json(dp[1][1])});
  }
  delta["const"] = rec.delta.d_const;
  doc["delta"] = std::move(delta);
  doc["theta_const_so_far"] = rec.theta_const_so_far;
  return doc.dump();
}

}  // namespace apmp
