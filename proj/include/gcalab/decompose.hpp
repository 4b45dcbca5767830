#pragma once

// Recursive decomposition of a GCA into leaf GCA living on invariantly simple
// groups (elementary abelian, or products of isomorphic non-abelian simple
// groups). Each split picks a fully invariant subgroup H: the dynamics factor
// through the quotient GCA on G/H and the restriction GCA on H, and ancestry
// metadata lets any leaf be replayed from the root.

#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcalab/error.hpp"
#include "gcalab/gca.hpp"
#include "gcalab/group.hpp"

namespace gcalab {

enum class StepKind { Quotient, Restrict };

struct AncestryStep {
  StepKind kind = StepKind::Quotient;
  std::vector<elem_t> members;  // chosen subgroup, in the group at that stage
  std::string policy;           // candidate rule that produced the subgroup
  bool refinement = false;      // split of an abelian group (beyond the plain
                                // derived-series recursion)
  bool operator==(const AncestryStep&) const = default;
};

struct Component {
  Gca gca;
  // engaged iff the leaf group is invariantly simple (always, unless abelian
  // refinement was disabled and an abelian non-elementary leaf was kept)
  std::optional<SimpleFactorization> fact;
  std::vector<AncestryStep> ancestry;
  bool abelian_leaf() const { return gca.rule.group.abelian(); }
};

struct TreeNode {
  std::uint64_t group_order = 0;
  // split nodes
  std::vector<elem_t> subgroup;
  std::string policy;
  bool refinement = false;
  std::unique_ptr<TreeNode> quotient_child;
  std::unique_ptr<TreeNode> subgroup_child;
  // leaves
  int leaf_index = -1;
  bool leaf() const { return leaf_index >= 0; }
};

struct DecompositionTree {
  Gca root;
  std::unique_ptr<TreeNode> top;
  std::vector<Component> leaves;
};

// ---------------------------------------------------------------------------
// Candidate policy for the fully invariant subgroup of a split. Deterministic
// order: (a) commutator subgroup; (b) center of a quasi-simple group;
// (c) isotypic components of the socle when at least two isomorphism types of
// minimal normal subgroups exist; (d) power-verbal subgroups <g^k>;
// (e) exhaustive enumeration. Every candidate is verified fully invariant
// against the full endomorphism monoid before use.
inline std::optional<std::pair<Subgroup, std::string>> choose_fully_invariant_subgroup(
    const FiniteGroup& G, const Budgets& budgets = {}) {
  std::vector<GroupHom> endos;
  try {
    endos = enumerate_endomorphisms(G, budgets);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::BudgetExceeded) return std::nullopt;
    throw;
  }
  auto verified = [&](const Subgroup& H,
                      const char* tag) -> std::optional<std::pair<Subgroup, std::string>> {
    if (H.order() > 1 && H.order() < G.order() && is_fully_invariant(G, H, endos))
      return std::make_pair(H, std::string(tag));
    return std::nullopt;
  };

  // (a) commutator subgroup
  Subgroup D = commutator_subgroup(G);
  const bool perfect = D.order() == G.order();
  if (auto c = verified(D, "commutator")) return c;

  // (b) center of a quasi-simple group
  if (perfect) {
    Subgroup Z = center(G);
    if (Z.order() > 1 && Z.order() < G.order() && is_simple(quotient(G, Z).quotient))
      if (auto c = verified(Z, "center")) return c;
  }

  // (c) isotypic socle components (two or more isomorphism types of minimal
  // normal subgroups)
  if (!G.product_backed() && G.order() <= 4096) {
    std::vector<std::vector<elem_t>> closures;
    for (std::size_t g = 1; g < G.order(); ++g) {
      auto nc = normal_closure(G, elem_t(g)).members;
      if (std::find(closures.begin(), closures.end(), nc) == closures.end())
        closures.push_back(std::move(nc));
    }
    std::vector<std::vector<elem_t>> minimal;
    for (const auto& a : closures) {
      bool is_min = true;
      for (const auto& b : closures)
        if (b.size() < a.size() && std::includes(a.begin(), a.end(), b.begin(), b.end())) {
          is_min = false;
          break;
        }
      if (is_min) minimal.push_back(a);
    }
    std::sort(minimal.begin(), minimal.end(), [](const auto& a, const auto& b) {
      if (a.size() != b.size()) return a.size() < b.size();
      return a < b;
    });
    // group by isomorphism type
    std::vector<std::vector<std::size_t>> types;
    std::vector<FiniteGroup> reps;
    for (std::size_t i = 0; i < minimal.size(); ++i) {
      auto mat = materialize_subgroup(Subgroup{G, minimal[i]});
      bool placed = false;
      for (std::size_t ty = 0; ty < reps.size() && !placed; ++ty)
        if (are_isomorphic(reps[ty], mat.group, budgets)) {
          types[ty].push_back(i);
          placed = true;
        }
      if (!placed) {
        reps.push_back(mat.group);
        types.push_back({i});
      }
    }
    if (types.size() >= 2) {
      for (const auto& ty : types) {
        std::vector<elem_t> gens;
        for (std::size_t i : ty)
          gens.insert(gens.end(), minimal[i].begin(), minimal[i].end());
        if (auto c = verified(subgroup_generated(G, gens), "isotypic")) return c;
      }
    }
  }

  // (d) power-verbal subgroups <g^k : g in G> for divisors k of the exponent
  {
    std::size_t expo = 1;
    for (std::size_t g = 0; g < G.order(); ++g)
      expo = std::lcm(expo, G.element_order(elem_t(g)));
    for (std::size_t k = 2; k < expo; ++k) {
      if (expo % k != 0) continue;
      std::vector<elem_t> gens;
      for (std::size_t g = 0; g < G.order(); ++g)
        gens.push_back(G.power(elem_t(g), k));
      std::sort(gens.begin(), gens.end());
      gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
      auto tag = "power-verbal-" + std::to_string(k);
      if (auto c = verified(subgroup_generated(G, gens), tag.c_str())) return c;
    }
  }

  // (e) exhaustive
  try {
    for (const auto& H : fully_invariant_subgroups(G, budgets))
      if (auto c = verified(H, "exhaustive")) return c;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::BudgetExceeded) throw;
  }
  return std::nullopt;
}

namespace dec_detail {

inline std::unique_ptr<TreeNode> recurse(const Gca& F, std::vector<AncestryStep> anc,
                                         std::vector<Component>& leaves,
                                         const Budgets& budgets, bool refine_abelian) {
  const FiniteGroup& G = F.rule.group;
  auto node = std::make_unique<TreeNode>();
  node->group_order = G.order();
  auto fact = invariantly_simple_factorization(G, budgets);
  if (fact || (G.abelian() && !refine_abelian)) {
    node->leaf_index = int(leaves.size());
    leaves.push_back(Component{F, std::move(fact), std::move(anc)});
    return node;
  }
  auto choice = choose_fully_invariant_subgroup(G, budgets);
  if (!choice)
    throw Error(ErrorKind::DecompositionStuck,
                "no verified fully invariant subgroup of " + G.name() + " (order " +
                    std::to_string(G.order()) + ")");
  node->subgroup = choice->first.members;
  node->policy = choice->second;
  node->refinement = G.abelian();  // past the plain derived-series recursion

  auto anc_q = anc;
  anc_q.push_back(AncestryStep{StepKind::Quotient, node->subgroup, node->policy,
                               node->refinement});
  node->quotient_child = recurse(quotient_gca(F, choice->first).gca, std::move(anc_q),
                                 leaves, budgets, refine_abelian);
  auto anc_r = std::move(anc);
  anc_r.push_back(AncestryStep{StepKind::Restrict, node->subgroup, node->policy,
                               node->refinement});
  node->subgroup_child = recurse(restrict_gca(F, choice->first).gca, std::move(anc_r),
                                 leaves, budgets, refine_abelian);
  return node;
}

}  // namespace dec_detail

// Decomposition into invariantly simple leaves. With refine_abelian = false,
// abelian leaves are kept whole whatever their structure (the plain
// derived-series behaviour); with the default, abelian groups that are not
// elementary abelian are split further, and those steps carry the
// `refinement` flag in the ancestry.
inline DecompositionTree explicit_decomposition(const Gca& F, const Budgets& budgets = {},
                                                bool refine_abelian = true) {
  DecompositionTree t;
  t.root = F;
  t.top = dec_detail::recurse(F, {}, t.leaves, budgets, refine_abelian);
  return t;
}

inline DecompositionTree algorithm1(const Gca& F, const Budgets& budgets = {}) {
  return explicit_decomposition(F, budgets, true);
}

inline Gca replay_ancestry(const Gca& root, const std::vector<AncestryStep>& anc) {
  Gca cur = root;
  for (const auto& s : anc) {
    Subgroup H{cur.rule.group, s.members};
    if (s.kind == StepKind::Quotient)
      cur = quotient_gca(cur, H).gca;
    else
      cur = restrict_gca(cur, H).gca;
  }
  return cur;
}

inline std::uint64_t leaf_order_product(const DecompositionTree& t) {
  std::uint64_t p = 1;
  for (const auto& c : t.leaves) p *= c.gca.rule.group.order();
  return p;
}

}  // namespace gcalab
