#pragma once

// JSON serialization: group and GCA input files, property reports,
// decomposition trees and factor graphs. Schema errors carry JSON-pointer
// style locations.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gcalab/decompose.hpp"
#include "gcalab/error.hpp"
#include "gcalab/gca.hpp"
#include "gcalab/group.hpp"
#include "gcalab/properties.hpp"
#include "gcalab/simple_product.hpp"

namespace gcalab {

namespace io_detail {

using nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& ptr, const std::string& what) {
  throw Error(ErrorKind::BadInput, ptr + ": " + what);
}

inline const json& field(const json& j, const char* key, const std::string& ptr) {
  if (!j.is_object()) schema_error(ptr, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema_error(ptr + "/" + key, "missing");
  return *it;
}

inline bool is_uint(const json& j) {
  return j.is_number_unsigned() ||
         (j.is_number_integer() && j.get<long long>() >= 0);
}

inline std::size_t uint_field(const json& j, const std::string& ptr) {
  if (!is_uint(j)) schema_error(ptr, "expected a non-negative integer");
  return j.get<std::size_t>();
}

}  // namespace io_detail

inline FiniteGroup group_from_json(const nlohmann::json& j, const std::string& ptr = "") {
  using io_detail::schema_error;
  if (!j.is_object()) schema_error(ptr, "expected a group object");
  std::string name = j.value("name", std::string{});

  if (j.contains("permutation_generators")) {
    const auto& pg = j.at("permutation_generators");
    if (!pg.is_array() || pg.empty())
      schema_error(ptr + "/permutation_generators", "expected a non-empty array");
    std::size_t degree = io_detail::uint_field(io_detail::field(j, "degree", ptr),
                                               ptr + "/degree");
    std::vector<std::vector<int>> gens;
    for (std::size_t i = 0; i < pg.size(); ++i) {
      const auto& p = pg[i];
      std::string pp = ptr + "/permutation_generators/" + std::to_string(i);
      if (!p.is_array() || p.size() != degree) schema_error(pp, "expected an array of length degree");
      std::vector<int> perm;
      for (const auto& v : p) {
        if (!io_detail::is_uint(v) || v.get<std::size_t>() >= degree)
          schema_error(pp, "entries must be integers in [0, degree)");
        perm.push_back(v.get<int>());
      }
      gens.push_back(std::move(perm));
    }
    return from_permutation_generators(gens, degree, name);
  }

  std::size_t order = io_detail::uint_field(io_detail::field(j, "order", ptr),
                                            ptr + "/order");
  const auto& tj = io_detail::field(j, "table", ptr);
  if (!tj.is_array() || tj.size() != order)
    schema_error(ptr + "/table", "expected an array of " + std::to_string(order) + " rows");
  std::vector<std::vector<elem_t>> table(order, std::vector<elem_t>(order));
  for (std::size_t a = 0; a < order; ++a) {
    const auto& row = tj[a];
    std::string rp = ptr + "/table/" + std::to_string(a);
    if (!row.is_array() || row.size() != order)
      schema_error(rp, "expected a row of length " + std::to_string(order));
    for (std::size_t b = 0; b < order; ++b) {
      if (!io_detail::is_uint(row[b]) || row[b].get<std::size_t>() >= order)
        schema_error(rp + "/" + std::to_string(b), "entries must be integers in [0, order)");
      table[a][b] = row[b].get<elem_t>();
    }
  }
  std::vector<std::string> names;
  if (j.contains("names")) {
    const auto& nj = j.at("names");
    if (!nj.is_array() || nj.size() != order)
      schema_error(ptr + "/names", "expected an array of order strings");
    for (const auto& s : nj) {
      if (!s.is_string()) schema_error(ptr + "/names", "entries must be strings");
      names.push_back(s.get<std::string>());
    }
  }
  return validate_group(table, names, name);
}

inline nlohmann::json group_to_json(const FiniteGroup& G) {
  nlohmann::json j;
  j["name"] = G.name();
  j["order"] = G.order();
  if (G.order() > 2048) {
    j["table_omitted"] = true;  // informational output only, not loadable
    return j;
  }
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t a = 0; a < G.order(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t b = 0; b < G.order(); ++b) row.push_back(G.op(elem_t(a), elem_t(b)));
    table.push_back(std::move(row));
  }
  j["table"] = std::move(table);
  nlohmann::json names = nlohmann::json::array();
  for (std::size_t g = 0; g < G.order(); ++g) names.push_back(G.element_name(elem_t(g)));
  j["names"] = std::move(names);
  return j;
}

inline FiniteGroup load_group_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::BadInput, "cannot open group file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadInput, path.string() + ": " + e.what());
  }
  return group_from_json(j);
}

inline Gca gca_from_json(const nlohmann::json& j,
                         const std::filesystem::path& base_dir = ".") {
  using io_detail::schema_error;
  if (!j.is_object()) schema_error("", "expected a GCA object");
  const auto& gj = io_detail::field(j, "group", "");
  FiniteGroup G = [&] {
    if (gj.is_string()) {
      std::filesystem::path p = gj.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      return load_group_file(p);
    }
    return group_from_json(gj, "/group");
  }();

  int radius = 0;
  if (j.contains("radius")) {
    if (!io_detail::is_uint(j.at("radius"))) schema_error("/radius", "expected a non-negative integer");
    radius = j.at("radius").get<int>();
  }

  const auto& ej = io_detail::field(j, "endomorphisms", "");
  if (!ej.is_object()) schema_error("/endomorphisms", "expected an object keyed by offset");
  std::map<int, std::vector<elem_t>> maps;
  for (auto it = ej.begin(); it != ej.end(); ++it) {
    std::string ep = "/endomorphisms/" + it.key();
    int off = 0;
    try {
      std::size_t pos = 0;
      off = std::stoi(it.key(), &pos);
      if (pos != it.key().size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      schema_error(ep, "key is not an integer offset");
    }
    if (j.contains("radius") && (off < -radius || off > radius))
      schema_error(ep, "offset outside the declared radius");
    const auto& arr = it.value();
    if (!arr.is_array() || arr.size() != G.order())
      schema_error(ep, "expected a full element map of length " + std::to_string(G.order()));
    std::vector<elem_t> m;
    for (const auto& v : arr) {
      if (!io_detail::is_uint(v) || v.get<std::size_t>() >= G.order())
        schema_error(ep, "entries must be integers in [0, order)");
      m.push_back(v.get<elem_t>());
    }
    maps[off] = std::move(m);
  }
  return Gca{validate_rule(G, maps)};
}

inline nlohmann::json gca_to_json(const Gca& F) {
  nlohmann::json j;
  j["group"] = group_to_json(F.rule.group);
  j["radius"] = F.rule.rho;
  nlohmann::json endos = nlohmann::json::object();
  for (int off = -F.rule.rho; off <= F.rule.rho; ++off) {
    const Endo& h = F.rule.at(off);
    if (h.trivial()) continue;
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t g = 0; g < F.rule.group.order(); ++g) arr.push_back(h(elem_t(g)));
    endos[std::to_string(off)] = std::move(arr);
  }
  j["endomorphisms"] = std::move(endos);
  return j;
}

inline Gca load_gca_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::BadInput, "cannot open GCA file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadInput, path.string() + ": " + e.what());
  }
  return gca_from_json(j, path.parent_path().empty() ? "." : path.parent_path());
}

// ---------------------------------------------------------------------------
// Output-only schemas

inline nlohmann::json ancestry_to_json(const std::vector<AncestryStep>& anc) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& s : anc) {
    nlohmann::json sj;
    sj["branch"] = s.kind == StepKind::Quotient ? "quotient" : "subgroup";
    sj["subgroup"] = s.members;
    sj["policy"] = s.policy;
    sj["refinement"] = s.refinement;
    a.push_back(std::move(sj));
  }
  return a;
}

inline nlohmann::json tree_node_to_json(const TreeNode& n,
                                        const std::vector<Component>& leaves) {
  nlohmann::json j;
  j["group_order"] = n.group_order;
  if (n.leaf()) {
    const auto& c = leaves[std::size_t(n.leaf_index)];
    j["leaf"] = true;
    j["gca"] = gca_to_json(c.gca);
    j["ancestry"] = ancestry_to_json(c.ancestry);
    if (c.fact) {
      j["kind"] = c.fact->abelian ? "elementary-abelian" : "simple-product";
      if (c.fact->abelian) {
        j["prime"] = c.fact->prime;
        j["rank"] = c.fact->rank;
      } else {
        j["simple_order"] = c.fact->simple_type.order();
        j["factors"] = c.fact->m;
      }
    } else {
      j["kind"] = "abelian";
    }
    return j;
  }
  j["chosen_subgroup"] = n.subgroup;
  j["policy"] = n.policy;
  j["refinement"] = n.refinement;
  j["branches"]["quotient"] = tree_node_to_json(*n.quotient_child, leaves);
  j["branches"]["subgroup"] = tree_node_to_json(*n.subgroup_child, leaves);
  return j;
}

inline nlohmann::json tree_to_json(const DecompositionTree& t) {
  return tree_node_to_json(*t.top, t.leaves);
}

inline nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json j;
  j["value"] = tri_name(v.value);
  j["method"] = method_name(v.method);
  j["certificate"] = v.certificate;
  return j;
}

inline nlohmann::json entropy_to_json(const EntropyValue& e) {
  nlohmann::json j;
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : e.terms)
    terms.push_back(nlohmann::json::array({t.num, t.den, t.base}));
  j["terms"] = std::move(terms);
  j["unknown_terms"] = e.unknown_terms;
  return j;
}

inline nlohmann::json report_to_json(const PropertyReport& r, bool with_tree = true) {
  nlohmann::json j;
  j["surjective"] = verdict_to_json(r.surjective);
  j["injective"] = verdict_to_json(r.injective);
  j["open"] = verdict_to_json(r.open_map);
  j["dpo"] = verdict_to_json(r.dpo);
  j["equicontinuous"] = verdict_to_json(r.equicontinuous);
  j["sensitive"] = verdict_to_json(r.sensitive);
  j["transitive"] = verdict_to_json(r.transitive);
  j["totally_transitive"] = verdict_to_json(r.totally_transitive);
  j["topologically_weakly_mixing"] = verdict_to_json(r.topologically_weakly_mixing);
  j["topologically_strongly_mixing"] = verdict_to_json(r.topologically_strongly_mixing);
  j["ergodically_weakly_mixing"] = verdict_to_json(r.ergodically_weakly_mixing);
  j["ergodically_strongly_mixing"] = verdict_to_json(r.ergodically_strongly_mixing);
  j["ergodic"] = verdict_to_json(r.ergodic);
  j["strongly_transitive"] = verdict_to_json(r.strongly_transitive);
  j["positively_expansive"] = verdict_to_json(r.positively_expansive);
  j["entropy"] = entropy_to_json(r.entropy);
  if (r.entropy_equicontinuity_observation)
    j["observation"] = *r.entropy_equicontinuity_observation;
  if (with_tree && r.tree) j["decomposition"] = tree_to_json(*r.tree);
  return j;
}

inline nlohmann::json factor_graph_to_json(const FactorGraph& g) {
  nlohmann::json j;
  j["m"] = g.m;
  j["simple_order"] = g.simple_order;
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : g.edges) {
    nlohmann::json ej;
    ej["source"] = e.source + 1;
    ej["target"] = e.target + 1;
    ej["offset"] = e.offset;
    edges.push_back(std::move(ej));
  }
  j["edges"] = std::move(edges);
  nlohmann::json dead = nlohmann::json::array();
  for (std::size_t t = 0; t < g.m; ++t)
    if (g.dead[t]) dead.push_back(t + 1);
  j["dead_factors"] = std::move(dead);
  nlohmann::json r = nlohmann::json::object();
  for (const auto& [off, cnt] : g.r) r[std::to_string(off)] = cnt;
  j["r"] = std::move(r);
  j["weighted_sum"] = g.weighted_sum;
  if (g.permutation) {
    j["o"] = g.pi_order;
    j["hat_orders"] = g.hat_orders;
    // cycle notation, 1-based
    std::string cyc;
    std::vector<char> seen(g.m, 0);
    for (std::size_t t = 0; t < g.m; ++t) {
      if (seen[t]) continue;
      cyc += "(";
      std::size_t u = t;
      bool first = true;
      do {
        if (!first) cyc += " ";
        cyc += std::to_string(u + 1);
        seen[u] = 1;
        u = g.pi[u];
        first = false;
      } while (u != t);
      cyc += ")";
    }
    j["pi"] = cyc;
  }
  return j;
}

inline std::string entropy_to_text(const EntropyValue& e) {
  std::ostringstream os;
  if (e.terms.empty() && e.unknown_terms == 0) {
    os << "0";
  } else {
    bool first = true;
    for (const auto& t : e.terms) {
      if (!first) os << " + ";
      first = false;
      if (t.num == t.den)
        os << "log " << t.base;
      else if (t.den == 1)
        os << t.num << "*log " << t.base;
      else
        os << "(" << t.num << "/" << t.den << ")*log " << t.base;
    }
    if (e.unknown_terms > 0) {
      if (!first) os << " + ";
      os << e.unknown_terms << " unknown term" << (e.unknown_terms == 1 ? "" : "s");
    }
  }
  if (auto v = e.value()) os << " = " << *v;
  return os.str();
}

inline std::string report_to_text(const PropertyReport& r) {
  std::ostringstream os;
  auto line = [&](const char* name, const Verdict& v) {
    os << name << ": " << tri_name(v.value) << " (" << method_name(v.method);
    if (!v.certificate.empty()) os << "; " << v.certificate;
    os << ")\n";
  };
  line("surjective", r.surjective);
  line("injective", r.injective);
  line("open", r.open_map);
  line("dpo", r.dpo);
  line("equicontinuous", r.equicontinuous);
  line("sensitive", r.sensitive);
  line("transitive", r.transitive);
  line("totally_transitive", r.totally_transitive);
  line("topologically_weakly_mixing", r.topologically_weakly_mixing);
  line("topologically_strongly_mixing", r.topologically_strongly_mixing);
  line("ergodically_weakly_mixing", r.ergodically_weakly_mixing);
  line("ergodically_strongly_mixing", r.ergodically_strongly_mixing);
  line("ergodic", r.ergodic);
  line("strongly_transitive", r.strongly_transitive);
  line("positively_expansive", r.positively_expansive);
  os << "entropy: " << entropy_to_text(r.entropy) << "\n";
  if (r.entropy_equicontinuity_observation)
    os << "observation (entropy-vs-equicontinuity): "
       << *r.entropy_equicontinuity_observation << "\n";
  return os.str();
}

}  // namespace gcalab
