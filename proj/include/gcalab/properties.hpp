#pragma once

// Top-level property deciders: decompose the GCA, decide each dynamical
// property exactly on the invariantly simple leaves, and recombine the leaf
// verdicts. Three-valued: Unknown is a real outcome (open questions, or
// budget-limited abelian rank > 1 leaves), never silently coerced.

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gcalab/decompose.hpp"
#include "gcalab/error.hpp"
#include "gcalab/gca.hpp"
#include "gcalab/linear.hpp"
#include "gcalab/oracle.hpp"
#include "gcalab/simple_product.hpp"

namespace gcalab {

enum class Method { Decomposition, Oracle, LeafFormula, Extension };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Decomposition: return "decomposition";
    case Method::Oracle: return "oracle";
    case Method::LeafFormula: return "leaf-formula";
    case Method::Extension: return "extension";
  }
  return "decomposition";
}

struct Verdict {
  Tri value = Tri::Unknown;
  Method method = Method::Decomposition;
  std::string certificate;
};

struct EntropyValue {
  std::vector<EntropyTerm> terms;
  std::size_t unknown_terms = 0;

  bool exact() const { return unknown_terms == 0; }
  std::optional<double> value() const {
    if (!exact()) return std::nullopt;
    double s = 0;
    for (const auto& t : terms)
      s += double(t.num) / double(t.den) * std::log(double(t.base));
    return s;
  }
};

struct PropertyReport {
  Verdict surjective, injective, open_map, dpo;
  Verdict equicontinuous, sensitive;
  Verdict transitive;
  Verdict totally_transitive, topologically_weakly_mixing, topologically_strongly_mixing;
  Verdict ergodically_weakly_mixing, ergodically_strongly_mixing, ergodic;
  Verdict strongly_transitive, positively_expansive;
  EntropyValue entropy;
  // informational only: the open conjecture "equicontinuous iff entropy zero",
  // checked as an observation whenever both sides are decided
  std::optional<std::string> entropy_equicontinuity_observation;
  std::shared_ptr<DecompositionTree> tree;  // null when the oracle fallback ran
};

namespace prop_detail {

inline Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
  return Tri::True;
}

inline Tri tri_not(Tri a) {
  if (a == Tri::True) return Tri::False;
  if (a == Tri::False) return Tri::True;
  return Tri::Unknown;
}

struct LeafOutcome {
  Tri surj = Tri::Unknown;
  Tri inj = Tri::Unknown;
  Tri equic = Tri::Unknown;
  Tri trans = Tri::Unknown;
  std::vector<EntropyTerm> terms;
  std::size_t unknown_terms = 0;
  bool quotient_only = false;  // reached from the root by quotient steps alone
  bool used_extension = false;
  std::string note;
};

// Analyze one invariantly simple leaf; abelian rank > 1 leaves are split
// further along rule-invariant subspaces when one exists.
inline void analyze_leaf(const Gca& F, const SimpleFactorization& fact,
                         bool quotient_only, const Budgets& budgets,
                         std::vector<LeafOutcome>& out) {
  const FiniteGroup& G = F.rule.group;
  LeafOutcome o;
  o.quotient_only = quotient_only;
  if (G.order() == 1) {
    o.surj = o.inj = o.trans = Tri::True;
    o.equic = Tri::True;
    o.note = "trivial group";
    out.push_back(std::move(o));
    return;
  }
  if (!fact.abelian) {
    auto rep = decide_simple_product(F.rule, fact, budgets);
    o.surj = rep.surjective;
    o.inj = rep.injective;
    o.trans = rep.transitive;
    o.equic = tri_not(rep.sensitive);
    o.terms = rep.entropy_terms;
    o.unknown_terms = rep.entropy_unknown;
    o.note = "simple product (" + std::to_string(fact.m) + " factor" +
             (fact.m == 1 ? "" : "s") + ")";
    for (const auto& n : rep.block_notes)
      if (n.find("non-surjective") != std::string::npos) o.used_extension = true;
    out.push_back(std::move(o));
    return;
  }

  auto M = to_matrix_rule(F.rule, fact);
  if (M.k > 1) {
    if (auto sub = invariant_subspace_refinement(M, F.rule, fact)) {
      // split along the invariant subspace and recurse on both parts; if the
      // subspace has an invariant complement, the restriction is also a
      // quotient (projection along the complement), so necessity-style
      // arguments keep applying to it
      bool complemented = has_invariant_complement(M, *sub, F.rule, fact);
      auto q = quotient_gca(F, *sub);
      auto qf = invariantly_simple_factorization(q.gca.rule.group, budgets);
      if (!qf)
        throw Error(ErrorKind::StructureViolation, "subspace quotient lost its structure");
      analyze_leaf(q.gca, *qf, quotient_only, budgets, out);
      auto r = restrict_gca(F, *sub);
      auto rf = invariantly_simple_factorization(r.gca.rule.group, budgets);
      if (!rf)
        throw Error(ErrorKind::StructureViolation, "subspace restriction lost its structure");
      analyze_leaf(r.gca, *rf, quotient_only && complemented, budgets, out);
      return;
    }
  }

  auto si = decide_surj_inj_linear(M);
  o.surj = si.surjective ? Tri::True : Tri::False;
  o.inj = si.injective ? Tri::True : Tri::False;
  if (M.k == 1) {
    Tri sens = decide_sensitive_k1(M);
    o.equic = tri_not(sens);
    o.trans = decide_transitive_k1(M);
    if (si.surjective) {
      auto t = entropy_linear_k1(M);
      if (t.num != 0) o.terms.push_back(t);
    }
    // non-surjective k = 1 means the zero rule: entropy 0, nothing unknown
    o.note = "linear, p=" + std::to_string(M.p);
  } else {
    auto sv = decide_sensitive_linear(M, F.rule, budgets);
    o.equic = tri_not(sv.sensitive);
    if (!si.surjective || sv.sensitive == Tri::False)
      o.trans = Tri::False;  // transitive forces surjective and sensitive
    else
      o.trans = Tri::Unknown;
    if (o.equic == Tri::True) {
      // certified power-rule repeat: radii bounded, so entropy is zero
    } else {
      ++o.unknown_terms;
    }
    o.note = "linear, p=" + std::to_string(M.p) + ", k=" + std::to_string(M.k) +
             " (" + sv.reason + ")";
  }
  out.push_back(std::move(o));
}

inline void strengthen(Verdict& v, Tri val, const std::string& why) {
  if (v.value == val) return;
  if (v.value == Tri::Unknown) {
    v.value = val;
    v.certificate = why;
    return;
  }
  if (val == Tri::Unknown) return;
  throw Error(ErrorKind::StructureViolation,
              "inconsistent verdicts: " + v.certificate + " vs " + why);
}

}  // namespace prop_detail

inline PropertyReport full_report(const Gca& F, const Budgets& budgets = {}) {
  using namespace prop_detail;
  PropertyReport rep;
  const FiniteGroup& G = F.rule.group;

  if (G.order() == 1) {
    // one-point space: every orbit is dense, nothing is expansive
    Verdict t{Tri::True, Method::LeafFormula, "one-point space"};
    Verdict f{Tri::False, Method::LeafFormula, "one-point space"};
    rep.surjective = rep.injective = rep.open_map = rep.dpo = t;
    rep.equicontinuous = t;
    rep.sensitive = f;
    rep.transitive = rep.strongly_transitive = t;
    rep.positively_expansive = f;
    for (Verdict* a : {&rep.totally_transitive, &rep.topologically_weakly_mixing,
                       &rep.topologically_strongly_mixing,
                       &rep.ergodically_weakly_mixing,
                       &rep.ergodically_strongly_mixing, &rep.ergodic})
      *a = t;
    return rep;
  }

  std::vector<LeafOutcome> leaves;
  bool decomposed = true;
  try {
    rep.tree = std::make_shared<DecompositionTree>(explicit_decomposition(F, budgets));
    for (const auto& c : rep.tree->leaves) {
      bool qonly = true;
      for (const auto& s : c.ancestry) qonly = qonly && s.kind == StepKind::Quotient;
      if (!c.fact)
        throw Error(ErrorKind::StructureViolation, "leaf without a factorization");
      analyze_leaf(c.gca, *c.fact, qonly, budgets, leaves);
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DecompositionStuck) throw;
    decomposed = false;
    rep.tree = nullptr;
  }

  if (decomposed) {
    Tri surj = Tri::True, inj = Tri::True, equic = Tri::True;
    bool all_trans = true, quotient_false = false, any_ext = false;
    std::size_t undecided_trans = 0;
    for (const auto& l : leaves) {
      surj = tri_and(surj, l.surj);
      inj = tri_and(inj, l.inj);
      equic = tri_and(equic, l.equic);
      if (l.trans != Tri::True) {
        all_trans = false;
        ++undecided_trans;
        if (l.trans == Tri::False && l.quotient_only) quotient_false = true;
      }
      for (const auto& t : l.terms) rep.entropy.terms.push_back(t);
      rep.entropy.unknown_terms += l.unknown_terms;
      any_ext = any_ext || l.used_extension;
    }
    std::string base = std::to_string(leaves.size()) + " leaf verdict" +
                       (leaves.size() == 1 ? "" : "s") + " combined";
    rep.surjective = {surj, Method::Decomposition, base};
    rep.injective = {inj, Method::Decomposition, base};
    rep.equicontinuous = {equic, Method::Decomposition, base};
    rep.sensitive = {tri_not(equic), any_ext ? Method::Extension : Method::Decomposition,
                     base};
    if (all_trans)
      rep.transitive = {Tri::True, Method::Decomposition, "all leaves transitive"};
    else if (surj == Tri::False)
      rep.transitive = {Tri::False, Method::Decomposition, "not surjective"};
    else if (quotient_false)
      rep.transitive = {Tri::False, Method::Decomposition,
                        "non-transitive leaf along a quotient-only ancestry"};
    else
      rep.transitive = {Tri::Unknown, Method::Decomposition,
                        "converse along restrictions is an open question (" +
                            std::to_string(undecided_trans) + " leaf/leaves undecided)"};
  } else {
    // decomposition stuck: fall back to the de Bruijn oracles
    std::string base = "decomposition stuck; de Bruijn oracle";
    try {
      rep.surjective = {debruijn_surjective(F.rule, budgets) ? Tri::True : Tri::False,
                        Method::Oracle, base};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::BudgetExceeded) throw;
      rep.surjective = {Tri::Unknown, Method::Oracle, base + " over budget"};
    }
    try {
      rep.injective = {debruijn_injective(F.rule, budgets) ? Tri::True : Tri::False,
                       Method::Oracle, base};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::BudgetExceeded) throw;
      rep.injective = {Tri::Unknown, Method::Oracle, base + " over budget"};
    }
    auto prof = radius_growth_profile(F.rule, budgets.power_budget, budgets);
    if (prof.repeat_found) {
      rep.equicontinuous = {Tri::True, Method::Oracle, "power-rule repeat"};
      rep.sensitive = {Tri::False, Method::Oracle, "power-rule repeat"};
    } else {
      rep.equicontinuous = {Tri::Unknown, Method::Oracle, "no repeat within budget"};
      rep.sensitive = {Tri::Unknown, Method::Oracle, "no repeat within budget"};
    }
    if (rep.surjective.value == Tri::False)
      rep.transitive = {Tri::False, Method::Oracle, "not surjective"};
    else
      rep.transitive = {Tri::Unknown, Method::Oracle, base};
    if (rep.equicontinuous.value == Tri::True) {
      // bounded radii bound the rectangle counts uniformly in time
    } else {
      rep.entropy.unknown_terms = 1;
    }
  }

  // side assertions that hold for surjective rules: every endomorphism image
  // is normal and the center is preserved (cheap only on dense tables)
  if (rep.surjective.value == Tri::True && !G.product_backed() && G.order() <= 4096) {
    auto Z = center(G);
    for (int off = -F.rule.rho; off <= F.rule.rho; ++off) {
      const Endo& h = F.rule.at(off);
      if (h.trivial()) continue;
      std::vector<elem_t> img;
      for (std::size_t g = 0; g < G.order(); ++g) img.push_back(h(elem_t(g)));
      std::sort(img.begin(), img.end());
      img.erase(std::unique(img.begin(), img.end()), img.end());
      if (!is_normal(G, Subgroup{G, img}))
        throw Error(ErrorKind::StructureViolation,
                    "surjective rule with non-normal image at offset " +
                        std::to_string(off));
      for (elem_t z : Z.members)
        if (!Z.contains(h(z)))
          throw Error(ErrorKind::StructureViolation,
                      "surjective rule does not preserve the center at offset " +
                          std::to_string(off));
    }
  }

  // open and having the dense periodic orbits property are equivalent to
  // surjectivity for GCA
  rep.open_map = {rep.surjective.value, rep.surjective.method,
                  "equivalent to surjectivity"};
  rep.dpo = {rep.surjective.value, rep.surjective.method, "equivalent to surjectivity"};

  // strong transitivity and positive expansivity
  if (!G.abelian()) {
    rep.strongly_transitive = {Tri::False, Method::Decomposition, "non-abelian group"};
    rep.positively_expansive = {Tri::False, Method::Decomposition, "non-abelian group"};
  } else {
    auto rootf = invariantly_simple_factorization(G, budgets);
    if (rootf && rootf->abelian && rootf->rank == 1 && G.order() > 1) {
      auto M = to_matrix_rule(F.rule, *rootf);
      Tri pe = decide_positively_expansive_k1(M);
      rep.positively_expansive = {pe, Method::LeafFormula,
                                  pe == Tri::True ? "coefficients on both sides of 0"
                                                  : "one-sided rule"};
      if (pe == Tri::True)
        rep.strongly_transitive = {Tri::True, Method::LeafFormula,
                                   "positively expansive"};
      else
        rep.strongly_transitive = {Tri::Unknown, Method::LeafFormula,
                                   "no criterion for non-expansive rules"};
    } else {
      rep.strongly_transitive = {Tri::Unknown, Method::Decomposition,
                                 "abelian group not of prime order"};
      rep.positively_expansive = {Tri::Unknown, Method::Decomposition,
                                  "abelian group not of prime order"};
    }
  }

  // consistency rules
  if (rep.injective.value == Tri::True)
    strengthen(rep.surjective, Tri::True, "injective implies surjective");
  if (rep.transitive.value == Tri::True) {
    strengthen(rep.surjective, Tri::True, "transitive implies surjective");
    strengthen(rep.sensitive, Tri::True, "transitive implies sensitive");
    strengthen(rep.equicontinuous, Tri::False, "transitive implies sensitive");
  }
  if (rep.sensitive.value == Tri::False && rep.transitive.value == Tri::Unknown)
    strengthen(rep.transitive, Tri::False, "equicontinuous rules are not transitive");
  if (rep.positively_expansive.value == Tri::True) {
    strengthen(rep.sensitive, Tri::True, "positively expansive");
    strengthen(rep.equicontinuous, Tri::False, "positively expansive");
    strengthen(rep.transitive, Tri::True, "positively expansive");
    strengthen(rep.surjective, Tri::True, "positively expansive");
    strengthen(rep.injective, Tri::False, "positively expansive");
    strengthen(rep.strongly_transitive, Tri::True, "positively expansive");
  }
  rep.open_map.value = rep.surjective.value;
  rep.dpo.value = rep.surjective.value;

  // aliases follow the transitivity verdict
  for (Verdict* a : {&rep.totally_transitive, &rep.topologically_weakly_mixing,
                     &rep.topologically_strongly_mixing, &rep.ergodically_weakly_mixing,
                     &rep.ergodically_strongly_mixing, &rep.ergodic}) {
    *a = rep.transitive;
    a->certificate = "equivalent to transitivity";
  }

  // informational conjecture observation, never used as evidence
  if (rep.equicontinuous.value != Tri::Unknown && rep.entropy.exact()) {
    bool zero = rep.entropy.terms.empty();
    for (const auto& t : rep.entropy.terms) zero = zero && t.num == 0;
    bool agrees = (rep.equicontinuous.value == Tri::True) == zero;
    rep.entropy_equicontinuity_observation =
        std::string(agrees ? "consistent" : "INCONSISTENT") +
        ": equicontinuous=" + tri_name(rep.equicontinuous.value) +
        ", entropy zero=" + (zero ? "true" : "false");
  }
  return rep;
}

inline Verdict decide_surjective(const Gca& F, const Budgets& b = {}) {
  return full_report(F, b).surjective;
}
inline Verdict decide_injective(const Gca& F, const Budgets& b = {}) {
  return full_report(F, b).injective;
}
inline Verdict decide_equicontinuous(const Gca& F, const Budgets& b = {}) {
  return full_report(F, b).equicontinuous;
}
inline Verdict decide_sensitive(const Gca& F, const Budgets& b = {}) {
  return full_report(F, b).sensitive;
}
inline Verdict decide_transitive(const Gca& F, const Budgets& b = {}) {
  return full_report(F, b).transitive;
}
inline Verdict decide_dpo(const Gca& F, const Budgets& b = {}) {
  return full_report(F, b).dpo;
}
inline Verdict decide_open(const Gca& F, const Budgets& b = {}) {
  return full_report(F, b).open_map;
}
inline Verdict decide_strongly_transitive(const Gca& F, const Budgets& b = {}) {
  return full_report(F, b).strongly_transitive;
}
inline Verdict decide_positively_expansive(const Gca& F, const Budgets& b = {}) {
  return full_report(F, b).positively_expansive;
}
inline EntropyValue entropy(const Gca& F, const Budgets& b = {}) {
  return full_report(F, b).entropy;
}

}  // namespace gcalab
