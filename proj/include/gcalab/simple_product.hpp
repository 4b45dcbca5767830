#pragma once

// GCA on products of m isomorphic non-abelian simple groups. Each nontrivial
// endomorphism maps every factor either to the identity or isomorphically
// onto a single factor, so the rule's action on factors is a labeled graph
// with in-degree <= 1; all leaf dynamics are read off that graph.

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gcalab/error.hpp"
#include "gcalab/gca.hpp"
#include "gcalab/linear.hpp"
#include "gcalab/oracle.hpp"

namespace gcalab {

struct FactorEdge {
  std::size_t source = 0;
  std::size_t target = 0;
  int offset = 0;
  std::vector<elem_t> auto_map;  // automorphism of the simple type
};

struct FactorGraph {
  std::size_t m = 1;
  std::uint64_t simple_order = 1;
  std::vector<FactorEdge> edges;
  std::vector<std::vector<std::size_t>> out_edges;  // edge indices by source
  std::vector<int> in_edge;                         // edge index by target, -1 if none
  std::vector<char> dead;                           // factor inside every kernel
  std::map<int, std::size_t> r;                     // r_i = |J_i| per offset
  long long weighted_sum = 0;                       // sum_i i * r_i

  // permutation structure, present iff there is no dead factor
  bool permutation = false;
  std::vector<std::size_t> pi;                // pi[t] = target of t's out-edge
  std::size_t pi_order = 0;                   // o
  std::vector<std::vector<elem_t>> hat_autos; // return automorphism per factor
  std::vector<std::size_t> hat_orders;        // o_t
};

namespace sp_detail {

inline std::vector<elem_t> compose_autos(const std::vector<elem_t>& second,
                                         const std::vector<elem_t>& first) {
  std::vector<elem_t> r(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) r[i] = second[first[i]];
  return r;
}

inline std::size_t auto_order(const std::vector<elem_t>& a) {
  std::vector<elem_t> id(a.size());
  std::iota(id.begin(), id.end(), 0);
  std::vector<elem_t> cur = a;
  std::size_t o = 1;
  while (cur != id) {
    cur = compose_autos(a, cur);
    ++o;
  }
  return o;
}

}  // namespace sp_detail

inline FactorGraph build_factor_graph(const LocalRule& rule,
                                      const SimpleFactorization& fact) {
  if (fact.abelian)
    throw Error(ErrorKind::PreconditionViolated,
                "factor graph requires a non-abelian simple product");
  const FiniteGroup& G = rule.group;
  const std::size_t m = fact.m;
  const std::uint64_t s_order = fact.simple_type.order();
  FactorGraph g;
  g.m = m;
  g.simple_order = s_order;
  g.out_edges.assign(m, {});
  g.in_edge.assign(m, -1);
  g.dead.assign(m, 0);
  const auto& gens = fact.simple_type.generators();
  for (int off = -rule.rho; off <= rule.rho; ++off) {
    const Endo& h = rule.at(off);
    if (h.trivial()) continue;
    for (std::size_t t = 0; t < m; ++t) {
      // where do the generators of factor t land?
      std::optional<std::size_t> target;
      bool nontrivial = false;
      for (elem_t s : gens) {
        elem_t y = h(fact.embed[t][s]);
        if (y == 0) continue;
        auto c = fact.coords(G, y);
        for (std::size_t u = 0; u < m; ++u) {
          if (c[u] == 0) continue;
          nontrivial = true;
          if (target && *target != u)
            throw Error(ErrorKind::StructureViolation,
                        "image of factor " + std::to_string(t + 1) + " at offset " +
                            std::to_string(off) + " spreads over several factors");
          target = u;
        }
      }
      if (!nontrivial) continue;  // factor t lies in Ker(h_off)
      FactorEdge e;
      e.source = t;
      e.target = *target;
      e.offset = off;
      e.auto_map.resize(s_order);
      std::vector<char> hit(s_order, 0);
      for (std::uint64_t s = 0; s < s_order; ++s) {
        auto c = fact.coords(G, h(fact.embed[t][elem_t(s)]));
        e.auto_map[s] = c[*target];
        if (hit[e.auto_map[s]])
          throw Error(ErrorKind::StructureViolation,
                      "factor map is not injective on factor " + std::to_string(t + 1));
        hit[e.auto_map[s]] = 1;
      }
      if (g.in_edge[*target] != -1)
        throw Error(ErrorKind::StructureViolation,
                    "factor " + std::to_string(*target + 1) +
                        " receives two incoming factor maps");
      g.in_edge[*target] = int(g.edges.size());
      g.out_edges[t].push_back(g.edges.size());
      g.edges.push_back(std::move(e));
      ++g.r[off];
    }
  }
  for (std::size_t t = 0; t < m; ++t) g.dead[t] = g.out_edges[t].empty();
  for (const auto& [off, cnt] : g.r) g.weighted_sum += (long long)off * (long long)cnt;

  g.permutation = true;
  for (std::size_t t = 0; t < m; ++t)
    if (g.dead[t]) g.permutation = false;
  if (g.permutation) {
    // no dead factor: counting forces out-degree exactly 1
    g.pi.assign(m, 0);
    for (std::size_t t = 0; t < m; ++t) {
      if (g.out_edges[t].size() != 1)
        throw Error(ErrorKind::StructureViolation,
                    "no dead factors but factor " + std::to_string(t + 1) +
                        " has out-degree " + std::to_string(g.out_edges[t].size()));
      g.pi[t] = g.edges[g.out_edges[t][0]].target;
    }
    // order of pi = lcm of cycle lengths; return automorphisms per factor
    std::vector<char> seen(m, 0);
    g.pi_order = 1;
    g.hat_autos.assign(m, {});
    g.hat_orders.assign(m, 0);
    for (std::size_t t = 0; t < m; ++t) {
      if (seen[t]) continue;
      std::vector<std::size_t> cycle;
      std::size_t u = t;
      do {
        cycle.push_back(u);
        seen[u] = 1;
        u = g.pi[u];
      } while (u != t);
      g.pi_order = std::lcm(g.pi_order, cycle.size());
      for (std::size_t start = 0; start < cycle.size(); ++start) {
        std::vector<elem_t> acc(static_cast<std::size_t>(s_order), 0);
        std::iota(acc.begin(), acc.end(), 0);
        for (std::size_t step = 0; step < cycle.size(); ++step) {
          std::size_t v = cycle[(start + step) % cycle.size()];
          acc = sp_detail::compose_autos(g.edges[g.out_edges[v][0]].auto_map, acc);
        }
        g.hat_autos[cycle[start]] = acc;
        g.hat_orders[cycle[start]] = sp_detail::auto_order(acc);
      }
    }
  }
  return g;
}

struct SurjectivityCertificate {
  bool surjective = false;
  std::optional<std::size_t> dead_factor;          // 1-based witness when false
  std::map<int, std::vector<std::size_t>> images;  // J_i (1-based) when true
};

// Surjective iff the intersection of all kernels is trivial iff no factor is
// dead; when surjective the images J_i partition the factors.
inline SurjectivityCertificate is_surjective_simple_product(const FactorGraph& g) {
  SurjectivityCertificate c;
  for (std::size_t t = 0; t < g.m; ++t)
    if (g.dead[t]) {
      c.surjective = false;
      c.dead_factor = t + 1;
      return c;
    }
  c.surjective = true;
  for (const auto& e : g.edges) c.images[e.offset].push_back(e.target + 1);
  for (auto& [off, v] : c.images) {
    (void)off;
    std::sort(v.begin(), v.end());
  }
  return c;
}

// Weakly connected components of the factor graph, ascending by smallest
// member: the minimal blocks.
inline std::vector<std::vector<std::size_t>> factor_blocks(const FactorGraph& g) {
  std::vector<std::size_t> comp(g.m, std::size_t(-1));
  std::size_t ncomp = 0;
  for (std::size_t t = 0; t < g.m; ++t) {
    if (comp[t] != std::size_t(-1)) continue;
    std::vector<std::size_t> stack{t};
    comp[t] = ncomp;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t ei : g.out_edges[u]) {
        std::size_t v = g.edges[ei].target;
        if (comp[v] == std::size_t(-1)) {
          comp[v] = ncomp;
          stack.push_back(v);
        }
      }
      if (g.in_edge[u] != -1) {
        std::size_t v = g.edges[std::size_t(g.in_edge[u])].source;
        if (comp[v] == std::size_t(-1)) {
          comp[v] = ncomp;
          stack.push_back(v);
        }
      }
    }
    ++ncomp;
  }
  std::vector<std::vector<std::size_t>> blocks(ncomp);
  for (std::size_t t = 0; t < g.m; ++t) blocks[comp[t]].push_back(t);
  return blocks;
}

struct BlockGca {
  Gca gca;
  std::vector<std::size_t> factors;  // root factor indices (0-based)
  SimpleFactorization fact;          // factorization of the block group
};

// Build the GCA induced on one block of factors. The block group is a fresh
// product of copies of the simple type; the maps are assembled straight from
// the edges (componentwise construction, valid by construction).
inline BlockGca make_block_gca(const LocalRule& rule, const SimpleFactorization& fact,
                               const FactorGraph& g, std::vector<std::size_t> block) {
  const std::size_t bs = block.size();
  std::vector<std::size_t> pos(g.m, std::size_t(-1));
  for (std::size_t i = 0; i < bs; ++i) pos[block[i]] = i;
  std::vector<FiniteGroup> fs(bs, fact.simple_type);
  FiniteGroup B = direct_product(fs, fact.simple_type.name() + "^" + std::to_string(bs));

  LocalRule out;
  out.group = B;
  out.rho = rule.rho;
  out.untrimmed_rho = rule.rho;
  out.endos.resize(std::size_t(2 * rule.rho + 1));
  for (int off = -rule.rho; off <= rule.rho; ++off) {
    // edges with this offset inside the block
    std::vector<const FactorEdge*> es;
    for (const auto& e : g.edges)
      if (e.offset == off && pos[e.source] != std::size_t(-1)) {
        if (pos[e.target] == std::size_t(-1))
          throw Error(ErrorKind::StructureViolation, "edge leaves its weak component");
        es.push_back(&e);
      }
    if (es.empty()) continue;
    Endo en;
    en.map.resize(B.order());
    std::vector<elem_t> c(bs), outc(bs);
    for (std::size_t x = 0; x < B.order(); ++x) {
      for (std::size_t i = 0; i < bs; ++i) c[i] = B.component(elem_t(x), i);
      std::fill(outc.begin(), outc.end(), 0);
      for (const auto* e : es) outc[pos[e->target]] = e->auto_map[c[pos[e->source]]];
      en.map[x] = B.from_components(outc);
    }
    detail::normalize_endo(en);
    out.endos[std::size_t(off + rule.rho)] = std::move(en);
  }
  int new_rho = 0;
  for (int o = -rule.rho; o <= rule.rho; ++o)
    if (!out.at(o).trivial()) new_rho = std::max(new_rho, o < 0 ? -o : o);
  if (new_rho < rule.rho) {
    std::vector<Endo> kept(std::size_t(2 * new_rho + 1));
    for (int o = -new_rho; o <= new_rho; ++o) kept[std::size_t(o + new_rho)] = out.at(o);
    out.endos = std::move(kept);
    out.rho = new_rho;
  }
  BlockGca b;
  b.gca = Gca{std::move(out)};
  b.factors = std::move(block);
  auto bf = invariantly_simple_factorization(B);
  if (!bf)
    throw Error(ErrorKind::StructureViolation, "block group lost its factorization");
  b.fact = std::move(*bf);
  return b;
}

inline std::vector<BlockGca> minimal_split(const LocalRule& rule,
                                           const SimpleFactorization& fact,
                                           const FactorGraph& g) {
  std::vector<BlockGca> out;
  for (auto& block : factor_blocks(g)) out.push_back(make_block_gca(rule, fact, g, block));
  return out;
}

// ---------------------------------------------------------------------------
// Shift-power identity: minimal surjective F satisfies
// F^(o*n') = sigma^(-n' * sum_i i*r_i) with n' = gcd of the return-auto orders.
struct ShiftPowerIdentity {
  std::size_t n = 1;
  long long shift = 0;
};

inline ShiftPowerIdentity shift_power_identity(const LocalRule& rule,
                                               const FactorGraph& g,
                                               bool verify = true) {
  if (!g.permutation)
    throw Error(ErrorKind::PreconditionViolated, "shift-power identity needs surjectivity");
  if (factor_blocks(g).size() != 1)
    throw Error(ErrorKind::PreconditionViolated, "shift-power identity needs minimality");
  std::size_t nprime = 0;
  for (std::size_t o : g.hat_orders) nprime = std::gcd(nprime, o);
  if (nprime == 0) nprime = 1;
  ShiftPowerIdentity id;
  id.n = g.pi_order * nprime;
  id.shift = -(long long)nprime * g.weighted_sum;
  if (verify) {
    auto pn = power(rule, id.n);
    if (!rules_equal(pn, shift_rule(rule.group, id.shift)))
      throw Error(ErrorKind::StructureViolation,
                  "power rule does not equal the predicted shift");
  }
  return id;
}

// ---------------------------------------------------------------------------
// Sensitivity via backward cycle sums. In-degree <= 1 makes the backward
// dependency graph functional: every factor's backward walk either dies or
// enters a cycle; radii of F^n are displacement sums along these walks, so
// the rule is sensitive iff some reachable cycle has nonzero offset sum.
struct CycleSumResult {
  Tri sensitive = Tri::Unknown;
  std::string reason;
};

inline CycleSumResult cycle_sum_sensitivity(const FactorGraph& g, const LocalRule& rule,
                                            const Budgets& budgets = {},
                                            bool verify_empirically = true) {
  CycleSumResult res;
  bool any_nonzero_cycle = false;
  for (std::size_t t = 0; t < g.m && !any_nonzero_cycle; ++t) {
    // backward walk from factor t
    std::vector<long long> seen_at(g.m, -1);
    std::vector<long long> sums(g.m, 0);
    std::size_t u = t;
    long long sum = 0;
    long long step = 0;
    while (g.in_edge[u] != -1) {
      if (seen_at[u] >= 0) {
        if (sum - sums[u] != 0) any_nonzero_cycle = true;
        break;
      }
      seen_at[u] = step;
      sums[u] = sum;
      const auto& e = g.edges[std::size_t(g.in_edge[u])];
      sum += e.offset;
      u = e.source;
      ++step;
    }
  }
  res.sensitive = any_nonzero_cycle ? Tri::True : Tri::False;
  res.reason = any_nonzero_cycle ? "nonzero-cycle-sum" : "all-cycle-sums-zero";
  if (verify_empirically && rule.group.order() <= 4096) {
    Budgets b = budgets;
    b.power_budget = std::min<std::size_t>(b.power_budget, 64);
    auto prof = radius_growth_profile(rule, 64, b);
    bool consistent = any_nonzero_cycle ? !prof.repeat_found : prof.repeat_found;
    if (!consistent)
      throw Error(ErrorKind::StructureViolation,
                  "cycle-sum verdict contradicts the power-rule profile");
  }
  return res;
}

// ---------------------------------------------------------------------------
// Full leaf decider

struct SimpleProductReport {
  Tri surjective = Tri::Unknown;
  Tri injective = Tri::Unknown;
  Tri transitive = Tri::Unknown;
  Tri sensitive = Tri::Unknown;
  Tri strongly_transitive = Tri::False;
  Tri positively_expansive = Tri::False;
  std::vector<EntropyTerm> entropy_terms;
  std::size_t entropy_unknown = 0;
  std::vector<std::string> block_notes;
};

inline SimpleProductReport decide_simple_product(const LocalRule& rule,
                                                 const SimpleFactorization& fact,
                                                 const Budgets& budgets = {}) {
  FactorGraph g = build_factor_graph(rule, fact);
  auto blocks = minimal_split(rule, fact, g);
  SimpleProductReport rep;
  bool all_surj = true, all_trans = true, any_sensitive = false, any_unknown_sens = false;
  for (auto& b : blocks) {
    FactorGraph bg = build_factor_graph(b.gca.rule, b.fact);
    auto cert = is_surjective_simple_product(bg);
    bool surj = cert.surjective;
    all_surj = all_surj && surj;
    std::string note = "block{";
    for (std::size_t i = 0; i < b.factors.size(); ++i)
      note += (i ? "," : "") + std::to_string(b.factors[i] + 1);
    note += "}: ";
    if (surj) {
      bool trans = bg.weighted_sum != 0;
      all_trans = all_trans && trans;
      if (trans) any_sensitive = true;  // item (3): sensitive <=> transitive
      long long s = bg.weighted_sum < 0 ? -bg.weighted_sum : bg.weighted_sum;
      if (s != 0)
        rep.entropy_terms.push_back(EntropyTerm{
            s * (long long)b.factors.size(), (long long)bg.pi_order, bg.simple_order});
      note += "surjective, sum=" + std::to_string(bg.weighted_sum) +
              ", o=" + std::to_string(bg.pi_order);
    } else {
      all_trans = false;  // transitive would force surjective
      all_surj = false;
      auto cs = cycle_sum_sensitivity(bg, b.gca.rule, budgets);
      if (cs.sensitive == Tri::True) any_sensitive = true;
      if (cs.sensitive == Tri::Unknown) any_unknown_sens = true;
      ++rep.entropy_unknown;  // no entropy formula for non-surjective blocks
      note += "non-surjective (dead factor " + std::to_string(*cert.dead_factor) + ")";
    }
    rep.block_notes.push_back(std::move(note));
  }
  rep.surjective = all_surj ? Tri::True : Tri::False;
  rep.injective = rep.surjective;  // item (1)
  rep.transitive = all_trans ? Tri::True : Tri::False;
  if (any_sensitive)
    rep.sensitive = Tri::True;
  else
    rep.sensitive = any_unknown_sens ? Tri::Unknown : Tri::False;
  rep.strongly_transitive = Tri::False;
  rep.positively_expansive = Tri::False;
  return rep;
}

}  // namespace gcalab
