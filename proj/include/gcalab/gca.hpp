#pragma once

// Local rules and global maps of group cellular automata: validation,
// application to periodic configurations, composition/powers, restriction to
// invariant normal subgroups and induced quotient rules.

#include <cassert>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gcalab/error.hpp"
#include "gcalab/group.hpp"

namespace gcalab {

// One endomorphism slot of a local rule. An empty map is the trivial
// endomorphism (everything to the identity); that convention keeps rules on
// huge product groups cheap when most offsets are trivial.
struct Endo {
  std::vector<elem_t> map;

  bool trivial() const { return map.empty(); }
  elem_t operator()(elem_t a) const { return map.empty() ? 0 : map[a]; }

  static Endo identity(const FiniteGroup& G) {
    Endo e;
    e.map.resize(G.order());
    for (std::size_t i = 0; i < G.order(); ++i) e.map[i] = elem_t(i);
    return e;
  }
};

struct LocalRule {
  FiniteGroup group;
  int rho = 0;
  std::vector<Endo> endos;  // size 2*rho+1, endos[offset + rho]
  int untrimmed_rho = 0;    // declared radius before outer trivial trimming

  const Endo& at(int offset) const { return endos[std::size_t(offset + rho)]; }
  bool trivial_at(int offset) const {
    return offset < -rho || offset > rho || at(offset).trivial();
  }
  std::size_t nontrivial_count() const {
    std::size_t c = 0;
    for (const auto& e : endos) c += !e.trivial();
    return c;
  }
};

struct Gca {
  LocalRule rule;
};

struct PeriodicConfiguration {
  std::size_t period = 1;
  std::vector<elem_t> cells;
};

namespace detail {

inline std::size_t mod_index(long long i, std::size_t period) {
  long long p = (long long)period;
  long long r = i % p;
  if (r < 0) r += p;
  return std::size_t(r);
}

// A map is reduced to empty iff it is everywhere-identity-valued.
inline void normalize_endo(Endo& e) {
  for (elem_t v : e.map)
    if (v != 0) return;
  e.map.clear();
}

// Images of the group generators generate the image subgroup, so elementwise
// commutation of two images reduces to commutation of generator images.
inline std::vector<elem_t> image_generators(const FiniteGroup& G, const Endo& e) {
  std::vector<elem_t> out;
  if (e.trivial()) return out;
  for (elem_t s : G.generators()) out.push_back(e(s));
  return out;
}

}  // namespace detail

inline LocalRule validate_rule(const FiniteGroup& G,
                               const std::map<int, std::vector<elem_t>>& endo_maps) {
  int rho = 0;
  for (const auto& [off, m] : endo_maps) {
    (void)m;
    int a = off < 0 ? -off : off;
    if (a > rho) rho = a;
  }
  LocalRule r;
  r.group = G;
  r.rho = rho;
  r.untrimmed_rho = rho;
  r.endos.resize(std::size_t(2 * rho + 1));
  for (const auto& [off, m] : endo_maps) {
    if (m.empty()) continue;  // explicit trivial
    if (m.size() != G.order())
      throw Error(ErrorKind::BadInput,
                  "endomorphism at offset " + std::to_string(off) +
                      " has wrong length " + std::to_string(m.size()));
    Endo e{m};
    detail::normalize_endo(e);
    if (!e.trivial() && !is_homomorphism(G, G, e.map))
      throw Error(ErrorKind::NotEndomorphism,
                  "map at offset " + std::to_string(off) + " is not an endomorphism");
    r.endos[std::size_t(off + rho)] = std::move(e);
  }
  // Pairwise commuting images, via generator images.
  std::vector<std::vector<elem_t>> img(r.endos.size());
  for (std::size_t i = 0; i < r.endos.size(); ++i)
    img[i] = detail::image_generators(G, r.endos[i]);
  for (std::size_t i = 0; i < r.endos.size(); ++i)
    for (std::size_t j = i + 1; j < r.endos.size(); ++j)
      for (elem_t a : img[i])
        for (elem_t b : img[j])
          if (G.op(a, b) != G.op(b, a))
            throw Error(ErrorKind::ImagesDoNotCommute,
                        "images at offsets " + std::to_string(int(i) - rho) + " and " +
                            std::to_string(int(j) - rho) + " do not commute (witness " +
                            G.element_name(a) + ", " + G.element_name(b) + ")");
  // Trim outer all-trivial offsets: the radius is the max |offset| carrying a
  // nontrivial map.
  int new_rho = 0;
  for (int o = -rho; o <= rho; ++o)
    if (!r.at(o).trivial()) {
      int a = o < 0 ? -o : o;
      if (a > new_rho) new_rho = a;
    }
  if (new_rho < rho) {
    std::vector<Endo> kept(std::size_t(2 * new_rho + 1));
    for (int o = -new_rho; o <= new_rho; ++o) kept[std::size_t(o + new_rho)] = r.at(o);
    r.endos = std::move(kept);
    r.rho = new_rho;
  }
  return r;
}

inline Gca make_gca(const FiniteGroup& G, const std::map<int, std::vector<elem_t>>& maps) {
  return Gca{validate_rule(G, maps)};
}

inline PeriodicConfiguration apply(const LocalRule& r, const PeriodicConfiguration& c) {
  PeriodicConfiguration out;
  out.period = c.period;
  out.cells.resize(c.period);
  for (std::size_t i = 0; i < c.period; ++i) {
    elem_t v = 0;
    for (int k = -r.rho; k <= r.rho; ++k) {
      const Endo& h = r.at(k);
      if (h.trivial()) continue;
      v = r.group.op(v, h(c.cells[detail::mod_index((long long)i + k, c.period)]));
    }
    out.cells[i] = v;
  }
  return out;
}

inline PeriodicConfiguration apply(const Gca& F, const PeriodicConfiguration& c) {
  return apply(F.rule, c);
}

// rotate(c, s) = sigma^s(c): cell i of the result is c_{i-s}.
inline PeriodicConfiguration rotate(const PeriodicConfiguration& c, long long s) {
  PeriodicConfiguration out;
  out.period = c.period;
  out.cells.resize(c.period);
  for (std::size_t i = 0; i < c.period; ++i)
    out.cells[i] = c.cells[detail::mod_index((long long)i - s, c.period)];
  return out;
}

// Rule of the composed global map F1 o F2 (apply F2 first):
// h_j(x) = prod_k h1_k(h2_{j-k}(x)), k ascending.
inline LocalRule compose(const LocalRule& r1, const LocalRule& r2) {
  if (!r1.group.same_as(r2.group))
    throw Error(ErrorKind::PreconditionViolated, "compose: rules on different groups");
  const FiniteGroup& G = r1.group;
  const int rho = r1.rho + r2.rho;
  LocalRule out;
  out.group = G;
  out.rho = rho;
  out.untrimmed_rho = rho;
  out.endos.resize(std::size_t(2 * rho + 1));
  for (int j = -rho; j <= rho; ++j) {
    // collect the nontrivial terms first
    std::vector<const Endo*> h1s, h2s;
    for (int k = -r1.rho; k <= r1.rho; ++k) {
      int jk = j - k;
      if (jk < -r2.rho || jk > r2.rho) continue;
      const Endo& h1 = r1.at(k);
      const Endo& h2 = r2.at(jk);
      if (h1.trivial() || h2.trivial()) continue;
      h1s.push_back(&h1);
      h2s.push_back(&h2);
    }
    if (h1s.empty()) continue;
    Endo e;
    e.map.resize(G.order());
    for (std::size_t x = 0; x < G.order(); ++x) {
      elem_t v = 0;
      for (std::size_t t = 0; t < h1s.size(); ++t)
        v = G.op(v, (*h1s[t])((*h2s[t])(elem_t(x))));
      e.map[x] = v;
    }
    detail::normalize_endo(e);
    out.endos[std::size_t(j + rho)] = std::move(e);
  }
  // trim outer trivial offsets
  int new_rho = 0;
  for (int o = -rho; o <= rho; ++o)
    if (!out.at(o).trivial()) {
      int a = o < 0 ? -o : o;
      if (a > new_rho) new_rho = a;
    }
  if (new_rho < rho) {
    std::vector<Endo> kept(std::size_t(2 * new_rho + 1));
    for (int o = -new_rho; o <= new_rho; ++o) kept[std::size_t(o + new_rho)] = out.at(o);
    out.endos = std::move(kept);
    out.rho = new_rho;
  }
  return out;
}

inline LocalRule identity_rule(const FiniteGroup& G) {
  LocalRule r;
  r.group = G;
  r.rho = 0;
  r.untrimmed_rho = 0;
  r.endos.resize(1);
  r.endos[0] = Endo::identity(G);
  return r;
}

// sigma^s as a rule: the single nontrivial slot, identity map, at offset -s.
inline LocalRule shift_rule(const FiniteGroup& G, long long s) {
  int rho = int(s < 0 ? -s : s);
  LocalRule r;
  r.group = G;
  r.rho = rho;
  r.untrimmed_rho = rho;
  r.endos.resize(std::size_t(2 * rho + 1));
  r.endos[std::size_t(-s + rho)] = Endo::identity(G);
  return r;
}

inline LocalRule power(const LocalRule& r, std::size_t n) {
  LocalRule acc = identity_rule(r.group);
  LocalRule base = r;
  bool acc_is_identity = true;
  std::size_t e = n;
  while (e) {
    if (e & 1) {
      acc = acc_is_identity ? base : compose(acc, base);
      acc_is_identity = false;
    }
    e >>= 1;
    if (e) base = compose(base, base);
  }
  return acc;
}

inline int radius(const LocalRule& r) { return r.rho; }

enum class RuleClass { IdentityLike, ShiftLike, General };

struct Classification {
  RuleClass kind = RuleClass::General;
  int shift_offset = 0;        // ShiftLike: the unique nontrivial offset
  bool is_automorphism = false;  // ShiftLike: whether that endomorphism is bijective
};

inline bool endo_is_automorphism(const FiniteGroup& G, const Endo& e) {
  if (e.trivial()) return G.order() == 1;
  std::vector<char> hit(G.order(), 0);
  for (std::size_t x = 0; x < G.order(); ++x) {
    elem_t v = e.map[x];
    if (hit[v]) return false;
    hit[v] = 1;
  }
  return true;
}

inline Classification classify(const LocalRule& r) {
  Classification c;
  if (r.rho == 0) {
    c.kind = RuleClass::IdentityLike;
    return c;
  }
  int nontrivial_offset = 0;
  std::size_t count = 0;
  for (int o = -r.rho; o <= r.rho; ++o)
    if (!r.at(o).trivial()) {
      ++count;
      nontrivial_offset = o;
    }
  if (count == 1) {
    c.kind = RuleClass::ShiftLike;
    c.shift_offset = nontrivial_offset;
    c.is_automorphism = endo_is_automorphism(r.group, r.at(nontrivial_offset));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Restriction and quotient rules

inline void require_invariant(const LocalRule& r, const Subgroup& H) {
  for (int o = -r.rho; o <= r.rho; ++o) {
    const Endo& h = r.at(o);
    if (h.trivial()) continue;
    for (elem_t x : H.members)
      if (!H.contains(h(x)))
        throw Error(ErrorKind::NotInvariant,
                    "offset " + std::to_string(o) + " maps subgroup element " +
                        r.group.element_name(x) + " outside the subgroup");
  }
}

struct RestrictedGca {
  Gca gca;
  MaterializedSubgroup sub;  // index translation back into the parent
};

inline RestrictedGca restrict_gca(const Gca& F, const Subgroup& H) {
  const LocalRule& r = F.rule;
  if (!is_normal(r.group, H))
    throw Error(ErrorKind::NotNormal, "restriction target is not a normal subgroup");
  require_invariant(r, H);
  MaterializedSubgroup mat = materialize_subgroup(H);
  LocalRule out;
  out.group = mat.group;
  out.rho = r.rho;
  out.untrimmed_rho = r.rho;
  out.endos.resize(r.endos.size());
  for (int o = -r.rho; o <= r.rho; ++o) {
    const Endo& h = r.at(o);
    if (h.trivial()) continue;
    Endo e;
    e.map.resize(mat.group.order());
    for (std::size_t i = 0; i < mat.group.order(); ++i)
      e.map[i] = mat.parent_to_sub[h(mat.to_parent[i])];
    detail::normalize_endo(e);
    out.endos[std::size_t(o + r.rho)] = std::move(e);
  }
  // Re-trim: an endomorphism can vanish on the subgroup.
  int new_rho = 0;
  for (int o = -r.rho; o <= r.rho; ++o)
    if (!out.at(o).trivial()) {
      int a = o < 0 ? -o : o;
      if (a > new_rho) new_rho = a;
    }
  if (new_rho < r.rho) {
    std::vector<Endo> kept(std::size_t(2 * new_rho + 1));
    for (int o = -new_rho; o <= new_rho; ++o) kept[std::size_t(o + new_rho)] = out.at(o);
    out.endos = std::move(kept);
    out.rho = new_rho;
  }
  return RestrictedGca{Gca{std::move(out)}, std::move(mat)};
}

struct QuotientGca {
  Gca gca;
  QuotientData qd;
};

inline QuotientGca quotient_gca(const Gca& F, const Subgroup& N) {
  const LocalRule& r = F.rule;
  if (!is_normal(r.group, N))
    throw Error(ErrorKind::NotNormal, "quotient kernel is not a normal subgroup");
  require_invariant(r, N);
  QuotientData qd = quotient(r.group, N);
  LocalRule out;
  out.group = qd.quotient;
  out.rho = r.rho;
  out.untrimmed_rho = r.rho;
  out.endos.resize(r.endos.size());
  for (int o = -r.rho; o <= r.rho; ++o) {
    const Endo& h = r.at(o);
    if (h.trivial()) continue;
    Endo e;
    e.map.resize(qd.quotient.order());
    for (std::size_t q = 0; q < qd.quotient.order(); ++q)
      e.map[q] = qd.coset_of[h(qd.section[q])];
    // well-definedness: [h(g)] must only depend on [g]
    for (std::size_t g = 0; g < r.group.order(); ++g)
      if (qd.coset_of[h(elem_t(g))] != e.map[qd.coset_of[g]])
        throw Error(ErrorKind::NotInvariant,
                    "induced map at offset " + std::to_string(o) +
                        " is not well defined on cosets");
    detail::normalize_endo(e);
    out.endos[std::size_t(o + r.rho)] = std::move(e);
  }
  int new_rho = 0;
  for (int o = -r.rho; o <= r.rho; ++o)
    if (!out.at(o).trivial()) {
      int a = o < 0 ? -o : o;
      if (a > new_rho) new_rho = a;
    }
  if (new_rho < r.rho) {
    std::vector<Endo> kept(std::size_t(2 * new_rho + 1));
    for (int o = -new_rho; o <= new_rho; ++o) kept[std::size_t(o + new_rho)] = out.at(o);
    out.endos = std::move(kept);
    out.rho = new_rho;
  }
  return QuotientGca{Gca{std::move(out)}, std::move(qd)};
}

inline bool rules_equal(const LocalRule& a, const LocalRule& b) {
  if (a.rho != b.rho) return false;
  for (int o = -a.rho; o <= a.rho; ++o) {
    const Endo& ea = a.at(o);
    const Endo& eb = b.at(o);
    if (ea.trivial() != eb.trivial()) return false;
    if (!ea.trivial() && ea.map != eb.map) return false;
  }
  return true;
}

}  // namespace gcalab
