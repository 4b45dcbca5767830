#pragma once

// Exact finite-group arithmetic: Cayley tables, subgroups, quotients,
// endomorphism enumeration, invariantly-simple factorization.
//
// Elements are indices 0..n-1 with 0 always the identity. Groups are either
// dense (explicit n x n table) or product-backed (mixed-radix encoding over
// factor groups, no table materialized) so that products like A_5^4 stay
// affordable.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gcalab/error.hpp"

namespace gcalab {

using elem_t = std::uint32_t;

class FiniteGroup {
 public:
  struct Data {
    std::string name;
    std::size_t order = 1;
    // Dense representation (empty when product-backed).
    std::vector<elem_t> table;    // row-major, table[a * order + b] = a*b
    std::vector<elem_t> inverse;  // dense only
    std::vector<std::string> names;
    // Product representation (non-empty factors marks product-backed).
    std::vector<FiniteGroup> factors;
    std::vector<std::uint64_t> stride;  // stride[i] for factor i, last = 1
    bool abelian = true;
    std::vector<elem_t> gens;  // small generating set, ascending discovery order
  };

  FiniteGroup() : d_(trivial_data()) {}
  explicit FiniteGroup(std::shared_ptr<const Data> d) : d_(std::move(d)) {}

  std::size_t order() const { return d_->order; }
  bool abelian() const { return d_->abelian; }
  bool product_backed() const { return !d_->factors.empty(); }
  const std::string& name() const { return d_->name; }
  const std::vector<FiniteGroup>& factors() const { return d_->factors; }
  const std::vector<elem_t>& generators() const { return d_->gens; }
  const Data& data() const { return *d_; }
  bool same_as(const FiniteGroup& o) const { return d_ == o.d_; }

  elem_t op(elem_t a, elem_t b) const {
    if (!d_->table.empty()) return d_->table[std::size_t(a) * d_->order + b];
    elem_t r = 0;
    for (std::size_t i = 0; i < d_->factors.size(); ++i) {
      const auto& f = d_->factors[i];
      elem_t ca = elem_t((a / d_->stride[i]) % f.order());
      elem_t cb = elem_t((b / d_->stride[i]) % f.order());
      r = elem_t(r + std::uint64_t(f.op(ca, cb)) * d_->stride[i]);
    }
    return r;
  }

  elem_t inv(elem_t a) const {
    if (!d_->inverse.empty()) return d_->inverse[a];
    elem_t r = 0;
    for (std::size_t i = 0; i < d_->factors.size(); ++i) {
      const auto& f = d_->factors[i];
      elem_t ca = elem_t((a / d_->stride[i]) % f.order());
      r = elem_t(r + std::uint64_t(f.inv(ca)) * d_->stride[i]);
    }
    return r;
  }

  elem_t conj(elem_t g, elem_t x) const { return op(op(g, x), inv(g)); }

  std::size_t element_order(elem_t a) const {
    std::size_t k = 1;
    elem_t x = a;
    while (x != 0) {
      x = op(x, a);
      ++k;
    }
    return k;
  }

  elem_t power(elem_t a, std::uint64_t e) const {
    elem_t r = 0;
    elem_t b = a;
    while (e) {
      if (e & 1) r = op(r, b);
      b = op(b, b);
      e >>= 1;
    }
    return r;
  }

  std::string element_name(elem_t a) const {
    if (!d_->names.empty()) return d_->names[a];
    if (product_backed()) {
      std::string s = "(";
      for (std::size_t i = 0; i < d_->factors.size(); ++i) {
        if (i) s += ",";
        s += d_->factors[i].element_name(component(a, i));
      }
      return s + ")";
    }
    return std::to_string(a);
  }

  elem_t component(elem_t a, std::size_t i) const {
    assert(product_backed());
    return elem_t((a / d_->stride[i]) % d_->factors[i].order());
  }

  elem_t from_components(const std::vector<elem_t>& c) const {
    assert(product_backed() && c.size() == d_->factors.size());
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < c.size(); ++i) r += std::uint64_t(c[i]) * d_->stride[i];
    return elem_t(r);
  }

 private:
  static std::shared_ptr<const Data> trivial_data() {
    static std::shared_ptr<const Data> t = [] {
      auto d = std::make_shared<Data>();
      d->name = "trivial";
      d->order = 1;
      d->table = {0};
      d->inverse = {0};
      d->abelian = true;
      return d;
    }();
    return t;
  }

  std::shared_ptr<const Data> d_;
};

struct Subgroup {
  FiniteGroup parent;
  std::vector<elem_t> members;  // sorted ascending, contains 0

  std::size_t order() const { return members.size(); }
  bool contains(elem_t g) const {
    return std::binary_search(members.begin(), members.end(), g);
  }
  bool is_trivial() const { return members.size() == 1; }
  bool is_whole_group() const { return members.size() == parent.order(); }
};

struct GroupHom {
  FiniteGroup domain;
  FiniteGroup codomain;
  std::vector<elem_t> map;  // map[a] = image of a

  elem_t operator()(elem_t a) const { return map[a]; }
};

struct QuotientData {
  FiniteGroup quotient;
  GroupHom projection;          // parent -> quotient
  std::vector<elem_t> coset_of; // == projection.map
  std::vector<elem_t> section;  // per coset: smallest representative
};

namespace detail {

inline std::string join_witness(std::initializer_list<elem_t> xs) {
  std::string s;
  for (elem_t x : xs) {
    if (!s.empty()) s += ", ";
    s += std::to_string(x);
  }
  return s;
}

// Greedy deterministic generating set: repeatedly adjoin the smallest element
// outside the current closure.
inline std::vector<elem_t> greedy_generators(const FiniteGroup& G);

}  // namespace detail

// ---------------------------------------------------------------------------
// Construction / validation

// check_associativity=false is for internally constructed tables (quotients,
// materialized subgroups, permutation closures) that are associative by
// construction; the O(n^3) scan would dominate otherwise.
inline FiniteGroup validate_group(const std::vector<std::vector<elem_t>>& table,
                                  std::vector<std::string> names = {},
                                  std::string name = "",
                                  bool check_associativity = true) {
  const std::size_t n = table.size();
  if (n == 0) throw Error(ErrorKind::BadInput, "empty table");
  for (std::size_t a = 0; a < n; ++a) {
    if (table[a].size() != n)
      throw Error(ErrorKind::BadInput, "table row " + std::to_string(a) + " has wrong length");
    for (std::size_t b = 0; b < n; ++b)
      if (table[a][b] >= n)
        throw Error(ErrorKind::NotClosed,
                    "table[" + std::to_string(a) + "][" + std::to_string(b) +
                        "] = " + std::to_string(table[a][b]) + " out of range");
  }
  // Find two-sided identity.
  std::optional<std::size_t> id;
  for (std::size_t e = 0; e < n && !id; ++e) {
    bool ok = true;
    for (std::size_t a = 0; a < n && ok; ++a)
      ok = table[e][a] == a && table[a][e] == a;
    if (ok) id = e;
  }
  if (!id) throw Error(ErrorKind::NoIdentity, "no two-sided identity element");

  // Relabel so the identity is element 0 (swap labels 0 <-> id).
  std::vector<elem_t> relabel(n);
  for (std::size_t i = 0; i < n; ++i) relabel[i] = elem_t(i);
  if (*id != 0) std::swap(relabel[0], relabel[*id]);
  std::vector<elem_t> inv_relabel(n);
  for (std::size_t i = 0; i < n; ++i) inv_relabel[relabel[i]] = elem_t(i);

  auto d = std::make_shared<FiniteGroup::Data>();
  d->order = n;
  d->table.resize(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      d->table[std::size_t(inv_relabel[a]) * n + inv_relabel[b]] =
          inv_relabel[table[a][b]];

  // Associativity (witnessed).
  if (check_associativity)
    for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c) {
        elem_t ab = d->table[a * n + b];
        elem_t bc = d->table[b * n + c];
        if (d->table[std::size_t(ab) * n + c] != d->table[a * n + bc])
          throw Error(ErrorKind::NotAssociative,
                      "associativity fails at (" +
                          detail::join_witness({elem_t(a), elem_t(b), elem_t(c)}) + ")");
      }
  // Inverses.
  d->inverse.assign(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    bool found = false;
    for (std::size_t b = 0; b < n && !found; ++b)
      if (d->table[a * n + b] == 0 && d->table[b * n + a] == 0) {
        d->inverse[a] = elem_t(b);
        found = true;
      }
    if (!found)
      throw Error(ErrorKind::NoInverse, "element " + std::to_string(a) + " has no inverse");
  }
  d->abelian = true;
  for (std::size_t a = 0; a < n && d->abelian; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (d->table[a * n + b] != d->table[b * n + a]) {
        d->abelian = false;
        break;
      }
  if (!names.empty()) {
    if (names.size() != n) throw Error(ErrorKind::BadInput, "names length mismatch");
    std::vector<std::string> relabeled(n);
    for (std::size_t i = 0; i < n; ++i) relabeled[inv_relabel[i]] = names[i];
    d->names = std::move(relabeled);
  }
  d->name = name.empty() ? ("G" + std::to_string(n)) : std::move(name);
  FiniteGroup G(std::move(d));
  auto gens = detail::greedy_generators(G);
  auto d2 = std::make_shared<FiniteGroup::Data>(G.data());
  d2->gens = std::move(gens);
  return FiniteGroup(std::move(d2));
}

inline FiniteGroup cyclic_group(std::size_t n, std::string name = "") {
  std::vector<std::vector<elem_t>> t(n, std::vector<elem_t>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) t[a][b] = elem_t((a + b) % n);
  return validate_group(t, {}, name.empty() ? ("Z" + std::to_string(n)) : name);
}

// Direct product with factor metadata retained. Nested products are flattened.
inline FiniteGroup direct_product(std::vector<FiniteGroup> factors, std::string name = "") {
  if (factors.empty()) throw Error(ErrorKind::BadInput, "empty product");
  std::vector<FiniteGroup> flat;
  for (auto& f : factors) {
    if (f.product_backed())
      for (const auto& g : f.factors()) flat.push_back(g);
    else
      flat.push_back(f);
  }
  auto d = std::make_shared<FiniteGroup::Data>();
  d->factors = std::move(flat);
  d->stride.resize(d->factors.size());
  std::uint64_t s = 1;
  for (std::size_t i = d->factors.size(); i-- > 0;) {
    d->stride[i] = s;
    s *= d->factors[i].order();
  }
  if (s > (std::uint64_t(1) << 31))
    throw Error(ErrorKind::BudgetExceeded, "product order too large: " + std::to_string(s));
  d->order = std::size_t(s);
  d->abelian = true;
  for (const auto& f : d->factors) d->abelian = d->abelian && f.abelian();
  if (name.empty()) {
    for (std::size_t i = 0; i < d->factors.size(); ++i) {
      if (i) name += "x";
      name += d->factors[i].name();
    }
  }
  d->name = std::move(name);
  // Generators: union of embedded factor generating sets.
  for (std::size_t i = 0; i < d->factors.size(); ++i)
    for (elem_t g : d->factors[i].generators())
      d->gens.push_back(elem_t(std::uint64_t(g) * d->stride[i]));
  return FiniteGroup(std::move(d));
}

// Compile a permutation group given by generators into a Cayley table.
inline FiniteGroup from_permutation_generators(
    const std::vector<std::vector<int>>& perm_gens, std::size_t degree,
    std::string name = "", std::size_t max_order = 1u << 20) {
  using Perm = std::vector<int>;
  for (const auto& p : perm_gens) {
    if (p.size() != degree) throw Error(ErrorKind::BadInput, "generator degree mismatch");
    std::vector<char> seen(degree, 0);
    for (int v : p) {
      if (v < 0 || std::size_t(v) >= degree || seen[v])
        throw Error(ErrorKind::BadInput, "generator is not a permutation");
      seen[v] = 1;
    }
  }
  Perm id(degree);
  std::iota(id.begin(), id.end(), 0);
  std::vector<Perm> elems{id};
  std::set<Perm> seen{id};
  for (std::size_t i = 0; i < elems.size(); ++i) {
    for (const auto& g : perm_gens) {
      Perm q(degree);
      for (std::size_t x = 0; x < degree; ++x) q[x] = g[elems[i][x]];
      if (seen.insert(q).second) {
        elems.push_back(q);
        if (elems.size() > max_order)
          throw Error(ErrorKind::BudgetExceeded, "permutation group too large");
      }
    }
  }
  std::sort(elems.begin(), elems.end());
  const std::size_t n = elems.size();
  auto index_of = [&](const Perm& p) {
    return elem_t(std::lower_bound(elems.begin(), elems.end(), p) - elems.begin());
  };
  std::vector<std::vector<elem_t>> t(n, std::vector<elem_t>(n));
  Perm q(degree);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      // composition: (a*b)(x) = a(b(x))
      for (std::size_t x = 0; x < degree; ++x) q[x] = elems[a][elems[b][x]];
      t[a][b] = index_of(q);
    }
  return validate_group(t, {}, std::move(name), /*check_associativity=*/false);
}

inline FiniteGroup symmetric_group(std::size_t n) {
  std::vector<int> cycle(n), swap01(n);
  std::iota(cycle.begin(), cycle.end(), 0);
  std::iota(swap01.begin(), swap01.end(), 0);
  if (n >= 2) {
    for (std::size_t i = 0; i < n; ++i) cycle[i] = int((i + 1) % n);
    std::swap(swap01[0], swap01[1]);
  }
  return from_permutation_generators({cycle, swap01}, n, "S" + std::to_string(n));
}

inline FiniteGroup alternating_group(std::size_t n) {
  if (n < 3) return cyclic_group(1, "A" + std::to_string(n));
  std::vector<int> c3(n), rest(n);
  std::iota(c3.begin(), c3.end(), 0);
  std::iota(rest.begin(), rest.end(), 0);
  c3[0] = 1; c3[1] = 2; c3[2] = 0;  // (0 1 2)
  if (n % 2) {                      // n odd: n-cycle is even
    for (std::size_t i = 0; i < n; ++i) rest[i] = int((i + 1) % n);
  } else {                          // n even: (n-1)-cycle on 1..n-1 is even
    for (std::size_t i = 1; i < n; ++i) rest[i] = int(i % (n - 1) + 1);
  }
  return from_permutation_generators({c3, rest}, n, "A" + std::to_string(n));
}

inline FiniteGroup dihedral_group(std::size_t n) {
  // Symmetries of the regular n-gon, order 2n.
  std::vector<int> rot(n), refl(n);
  for (std::size_t i = 0; i < n; ++i) {
    rot[i] = int((i + 1) % n);
    refl[i] = int((n - i) % n);
  }
  return from_permutation_generators({rot, refl}, n, "D" + std::to_string(n));
}

inline FiniteGroup quaternion_group() {
  // Q_8 = {1,-1,i,-i,j,-j,k,-k} via its regular action, generators i and j.
  // Encode elements 0..7 as 1,-1,i,-i,j,-j,k,-k and give left-multiplication
  // permutations for i and j.
  std::vector<int> li = {2, 3, 1, 0, 7, 6, 4, 5};  // x -> i*x
  std::vector<int> lj = {4, 5, 6, 7, 1, 0, 3, 2};  // x -> j*x
  return from_permutation_generators({li, lj}, 8, "Q8");
}

// ---------------------------------------------------------------------------
// Subgroup machinery

inline std::vector<elem_t> close_under_product(const FiniteGroup& G,
                                               const std::vector<elem_t>& seed) {
  std::vector<char> in(G.order(), 0);
  std::vector<elem_t> reached{0};
  in[0] = 1;
  std::vector<elem_t> gens;
  for (elem_t g : seed)
    if (!in[g]) {
      in[g] = 1;
      reached.push_back(g);
      gens.push_back(g);
    }
  // BFS closure under right multiplication by the seed (powers supply
  // inverses in a finite group).
  for (std::size_t i = 0; i < reached.size(); ++i)
    for (elem_t s : gens) {
      elem_t y = G.op(reached[i], s);
      if (!in[y]) {
        in[y] = 1;
        reached.push_back(y);
      }
    }
  std::sort(reached.begin(), reached.end());
  return reached;
}

inline Subgroup subgroup_generated(const FiniteGroup& G, const std::vector<elem_t>& gens) {
  for (elem_t g : gens)
    if (g >= G.order()) throw Error(ErrorKind::BadInput, "generator out of range");
  return Subgroup{G, close_under_product(G, gens)};
}

inline Subgroup whole_group(const FiniteGroup& G) {
  std::vector<elem_t> m(G.order());
  std::iota(m.begin(), m.end(), 0);
  return Subgroup{G, std::move(m)};
}

inline Subgroup trivial_subgroup(const FiniteGroup& G) { return Subgroup{G, {0}}; }

namespace detail {

inline std::vector<elem_t> greedy_generators(const FiniteGroup& G) {
  std::vector<elem_t> gens;
  std::vector<elem_t> closure{0};
  while (closure.size() < G.order()) {
    elem_t next = 0;
    for (std::size_t g = 0, c = 0; g < G.order(); ++g) {
      if (c < closure.size() && closure[c] == g) {
        ++c;
        continue;
      }
      next = elem_t(g);
      break;
    }
    gens.push_back(next);
    closure = close_under_product(G, gens);
  }
  return gens;
}

}  // namespace detail

inline bool is_normal(const FiniteGroup& G, const Subgroup& H) {
  for (std::size_t g = 0; g < G.order(); ++g)
    for (elem_t h : H.members)
      if (!H.contains(G.conj(elem_t(g), h))) return false;
  return true;
}

inline Subgroup centralizer(const FiniteGroup& G, const std::vector<elem_t>& S) {
  std::vector<elem_t> members;
  for (std::size_t g = 0; g < G.order(); ++g) {
    bool ok = true;
    for (elem_t s : S)
      if (G.op(elem_t(g), s) != G.op(s, elem_t(g))) {
        ok = false;
        break;
      }
    if (ok) members.push_back(elem_t(g));
  }
  return Subgroup{G, std::move(members)};
}

inline Subgroup center(const FiniteGroup& G) {
  if (G.product_backed()) {
    // center of a direct product = product of factor centers
    std::vector<std::vector<elem_t>> fc;
    for (const auto& f : G.factors()) fc.push_back(center(f).members);
    std::vector<elem_t> members;
    std::vector<std::size_t> idx(fc.size(), 0);
    for (;;) {
      std::vector<elem_t> c(fc.size());
      for (std::size_t i = 0; i < fc.size(); ++i) c[i] = fc[i][idx[i]];
      members.push_back(G.from_components(c));
      std::size_t i = fc.size();
      bool done = true;
      while (i-- > 0) {
        if (++idx[i] < fc[i].size()) {
          done = false;
          break;
        }
        idx[i] = 0;
      }
      if (done) break;
    }
    std::sort(members.begin(), members.end());
    return Subgroup{G, std::move(members)};
  }
  // generators suffice: g is central iff it commutes with a generating set
  return centralizer(G, G.generators());
}

// Commutator subgroup of a subgroup H within G (members live in G).
inline Subgroup commutator_subgroup_of(const FiniteGroup& G, const Subgroup& H) {
  std::vector<elem_t> comms;
  std::vector<char> seen(G.order(), 0);
  for (elem_t a : H.members)
    for (elem_t b : H.members) {
      elem_t c = G.op(G.op(a, b), G.op(G.inv(a), G.inv(b)));
      if (!seen[c]) {
        seen[c] = 1;
        comms.push_back(c);
      }
    }
  return Subgroup{G, close_under_product(G, comms)};
}

inline Subgroup commutator_subgroup(const FiniteGroup& G) {
  if (G.product_backed()) {
    // [G1 x G2, G1 x G2] = [G1,G1] x [G2,G2]
    std::vector<std::vector<elem_t>> fc;
    std::uint64_t total = 1;
    for (const auto& f : G.factors()) {
      fc.push_back(commutator_subgroup(f).members);
      total *= fc.back().size();
    }
    std::vector<elem_t> members;
    members.reserve(std::size_t(total));
    std::vector<std::size_t> idx(fc.size(), 0);
    for (;;) {
      std::vector<elem_t> c(fc.size());
      for (std::size_t i = 0; i < fc.size(); ++i) c[i] = fc[i][idx[i]];
      members.push_back(G.from_components(c));
      std::size_t i = fc.size();
      bool done = true;
      while (i-- > 0) {
        if (++idx[i] < fc[i].size()) {
          done = false;
          break;
        }
        idx[i] = 0;
      }
      if (done) break;
    }
    std::sort(members.begin(), members.end());
    return Subgroup{G, std::move(members)};
  }
  if (G.abelian()) return trivial_subgroup(G);
  return commutator_subgroup_of(G, whole_group(G));
}

inline bool is_perfect(const FiniteGroup& G) {
  return commutator_subgroup(G).order() == G.order();
}

inline std::vector<Subgroup> derived_series(const FiniteGroup& G) {
  std::vector<Subgroup> series{whole_group(G)};
  for (;;) {
    Subgroup next = series.size() == 1
                        ? commutator_subgroup(G)
                        : commutator_subgroup_of(G, series.back());
    if (next.order() == series.back().order()) break;
    series.push_back(std::move(next));
    if (series.back().is_trivial()) break;
  }
  return series;
}

inline bool is_solvable(const FiniteGroup& G) {
  return derived_series(G).back().is_trivial();
}

// ---------------------------------------------------------------------------
// Quotients

inline QuotientData quotient(const FiniteGroup& G, const Subgroup& N) {
  if (!is_normal(G, N))
    throw Error(ErrorKind::NotNormal, "subgroup of order " + std::to_string(N.order()) +
                                          " is not normal in " + G.name());
  const std::size_t n = G.order();
  constexpr elem_t kUnset = ~elem_t(0);
  std::vector<elem_t> coset_of(n, kUnset);
  std::vector<elem_t> section;
  for (std::size_t g = 0; g < n; ++g) {
    if (coset_of[g] != kUnset) continue;
    elem_t id = elem_t(section.size());
    section.push_back(elem_t(g));  // smallest element of the coset (ascending scan)
    for (elem_t h : N.members) coset_of[G.op(elem_t(g), h)] = id;
  }
  const std::size_t q = section.size();
  std::vector<std::vector<elem_t>> t(q, std::vector<elem_t>(q));
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = 0; b < q; ++b)
      t[a][b] = coset_of[G.op(section[a], section[b])];
  std::vector<std::string> names(q);
  for (std::size_t a = 0; a < q; ++a) names[a] = "[" + G.element_name(section[a]) + "]";
  FiniteGroup Q = validate_group(t, names, G.name() + "/N" + std::to_string(N.order()),
                                 /*check_associativity=*/false);
  GroupHom proj{G, Q, coset_of};
  return QuotientData{Q, std::move(proj), std::move(coset_of), std::move(section)};
}

// Materialize a subgroup as a standalone group; to_parent maps the new
// indices back into G, parent_to_sub the other way (kUnset outside H).
struct MaterializedSubgroup {
  FiniteGroup group;
  std::vector<elem_t> to_parent;
  std::vector<elem_t> parent_to_sub;
  static constexpr elem_t kOutside = ~elem_t(0);
};

inline MaterializedSubgroup materialize_subgroup(const Subgroup& H) {
  const FiniteGroup& G = H.parent;
  const std::size_t m = H.order();
  std::vector<elem_t> parent_to_sub(G.order(), MaterializedSubgroup::kOutside);
  for (std::size_t i = 0; i < m; ++i) parent_to_sub[H.members[i]] = elem_t(i);
  std::vector<std::vector<elem_t>> t(m, std::vector<elem_t>(m));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      elem_t p = G.op(H.members[a], H.members[b]);
      elem_t s = parent_to_sub[p];
      if (s == MaterializedSubgroup::kOutside)
        throw Error(ErrorKind::NotClosed, "member set not closed at (" +
                                              detail::join_witness({H.members[a], H.members[b]}) + ")");
      t[a][b] = s;
    }
  std::vector<std::string> names(m);
  for (std::size_t a = 0; a < m; ++a) names[a] = G.element_name(H.members[a]);
  FiniteGroup sub = validate_group(t, names, G.name() + "|H" + std::to_string(m),
                                   /*check_associativity=*/false);
  return MaterializedSubgroup{std::move(sub), H.members, std::move(parent_to_sub)};
}

// ---------------------------------------------------------------------------
// Homomorphisms

// f is a homomorphism iff f(a*s) = f(a)*f(s) for all a in G, s in a generating
// set (checked along a BFS extension from generator images).
inline bool is_homomorphism(const FiniteGroup& dom, const FiniteGroup& cod,
                            const std::vector<elem_t>& map) {
  if (map.size() != dom.order()) return false;
  if (map[0] != 0) return false;
  for (std::size_t a = 0; a < dom.order(); ++a)
    if (map[a] >= cod.order()) return false;
  for (std::size_t a = 0; a < dom.order(); ++a)
    for (elem_t s : dom.generators())
      if (map[dom.op(elem_t(a), s)] != cod.op(map[a], map[s])) return false;
  return true;
}

namespace detail {

// Extend generator images to a full map by BFS over the Cayley graph.
// Returns false on inconsistency. kUnset-initialized `map` is filled in.
inline bool extend_hom(const FiniteGroup& dom, const FiniteGroup& cod,
                       const std::vector<elem_t>& gens,
                       const std::vector<elem_t>& images, std::vector<elem_t>& map,
                       std::vector<elem_t>& order_buf) {
  constexpr elem_t kUnset = ~elem_t(0);
  std::fill(map.begin(), map.end(), kUnset);
  map[0] = 0;
  order_buf.clear();
  order_buf.push_back(0);
  for (std::size_t i = 0; i < order_buf.size(); ++i) {
    elem_t x = order_buf[i];
    for (std::size_t k = 0; k < gens.size(); ++k) {
      elem_t y = dom.op(x, gens[k]);
      elem_t fy = cod.op(map[x], images[k]);
      if (map[y] == kUnset) {
        map[y] = fy;
        order_buf.push_back(y);
      } else if (map[y] != fy) {
        return false;
      }
    }
  }
  // gens generate dom, so BFS covers everything and has verified the
  // homomorphism law for every (element, generator) pair.
  return order_buf.size() == dom.order();
}

}  // namespace detail

// Complete End(G), deterministic order (sorted by map arrays).
inline std::vector<GroupHom> enumerate_endomorphisms(const FiniteGroup& G,
                                                     const Budgets& budgets = {}) {
  if (G.order() > budgets.endo_group_order)
    throw Error(ErrorKind::BudgetExceeded,
                "endomorphism enumeration: |G| = " + std::to_string(G.order()) +
                    " exceeds budget " + std::to_string(budgets.endo_group_order));
  const auto& gens = G.generators();
  // Candidate images per generator: elements whose order divides the
  // generator's order.
  std::vector<std::vector<elem_t>> cands(gens.size());
  for (std::size_t k = 0; k < gens.size(); ++k) {
    std::size_t ord = G.element_order(gens[k]);
    for (std::size_t g = 0; g < G.order(); ++g)
      if (ord % G.element_order(elem_t(g)) == 0) cands[k].push_back(elem_t(g));
  }
  std::vector<GroupHom> out;
  std::vector<elem_t> images(gens.size(), 0);
  std::vector<elem_t> map(G.order()), order_buf;
  order_buf.reserve(G.order());
  std::vector<std::size_t> idx(gens.size(), 0);
  if (gens.empty()) {
    out.push_back(GroupHom{G, G, std::vector<elem_t>{0}});
    return out;
  }
  for (;;) {
    for (std::size_t k = 0; k < gens.size(); ++k) images[k] = cands[k][idx[k]];
    if (detail::extend_hom(G, G, gens, images, map, order_buf))
      out.push_back(GroupHom{G, G, map});
    std::size_t k = gens.size();
    bool done = true;
    while (k-- > 0) {
      if (++idx[k] < cands[k].size()) {
        done = false;
        break;
      }
      idx[k] = 0;
    }
    if (done) break;
  }
  std::sort(out.begin(), out.end(),
            [](const GroupHom& a, const GroupHom& b) { return a.map < b.map; });
  return out;
}

// Test-only oracle: filter all |G|^|G| maps. Feasible for |G| <= 8.
inline std::size_t count_endomorphisms_exhaustive(const FiniteGroup& G) {
  const std::size_t n = G.order();
  std::vector<elem_t> map(n, 0);
  std::size_t count = 0;
  for (;;) {
    bool hom = map[0] == 0;
    for (std::size_t a = 0; a < n && hom; ++a)
      for (std::size_t b = 0; b < n && hom; ++b)
        hom = map[G.op(elem_t(a), elem_t(b))] == G.op(map[a], map[b]);
    if (hom) ++count;
    std::size_t i = n;
    bool done = true;
    while (i-- > 0) {
      if (++map[i] < n) {
        done = false;
        break;
      }
      map[i] = 0;
    }
    if (done) break;
  }
  return count;
}

inline std::vector<Subgroup> all_subgroups(const FiniteGroup& G,
                                           const Budgets& budgets = {}) {
  if (G.order() > budgets.subgroup_group_order)
    throw Error(ErrorKind::BudgetExceeded,
                "subgroup enumeration: |G| = " + std::to_string(G.order()) +
                    " exceeds budget " + std::to_string(budgets.subgroup_group_order));
  std::set<std::vector<elem_t>> seen;
  std::vector<std::vector<elem_t>> queue{{0}};
  seen.insert(queue[0]);
  for (std::size_t i = 0; i < queue.size(); ++i) {
    std::vector<elem_t> base = queue[i];
    for (std::size_t g = 0; g < G.order(); ++g) {
      if (std::binary_search(base.begin(), base.end(), elem_t(g))) continue;
      std::vector<elem_t> seed = base;
      seed.push_back(elem_t(g));
      auto closed = close_under_product(G, seed);
      if (seen.insert(closed).second) {
        queue.push_back(std::move(closed));
        if (seen.size() > budgets.subgroup_count)
          throw Error(ErrorKind::BudgetExceeded, "too many subgroups");
      }
    }
  }
  std::vector<Subgroup> out;
  out.reserve(seen.size());
  for (auto& m : seen) out.push_back(Subgroup{G, m});
  std::sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) {
    if (a.members.size() != b.members.size()) return a.members.size() < b.members.size();
    return a.members < b.members;
  });
  return out;
}

inline bool is_fully_invariant(const FiniteGroup& G, const Subgroup& H,
                               const std::vector<GroupHom>& endos) {
  for (const auto& phi : endos)
    for (elem_t h : H.members)
      if (!H.contains(phi.map[h])) return false;
  return true;
}

inline std::vector<Subgroup> fully_invariant_subgroups(const FiniteGroup& G,
                                                       const Budgets& budgets = {}) {
  auto endos = enumerate_endomorphisms(G, budgets);
  auto subs = all_subgroups(G, budgets);
  std::vector<Subgroup> out;
  for (auto& H : subs)
    if (is_fully_invariant(G, H, endos)) out.push_back(std::move(H));
  return out;
}

// ---------------------------------------------------------------------------
// Normal closures, simplicity

inline Subgroup normal_closure(const FiniteGroup& G, elem_t g) {
  std::vector<elem_t> members = close_under_product(G, {g});
  for (;;) {
    std::vector<elem_t> extra;
    Subgroup H{G, members};
    for (elem_t s : G.generators())
      for (elem_t h : members) {
        elem_t c = G.conj(s, h);
        if (!H.contains(c)) extra.push_back(c);
      }
    if (extra.empty()) return H;
    extra.insert(extra.end(), members.begin(), members.end());
    members = close_under_product(G, extra);
  }
}

inline bool is_simple(const FiniteGroup& G) {
  if (G.order() <= 1) return false;
  for (std::size_t g = 1; g < G.order(); ++g)
    if (normal_closure(G, elem_t(g)).order() != G.order()) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Isomorphism testing

namespace detail {

inline std::vector<std::pair<std::size_t, std::size_t>> order_profile(const FiniteGroup& G) {
  std::vector<std::size_t> orders(G.order());
  for (std::size_t g = 0; g < G.order(); ++g) orders[g] = G.element_order(elem_t(g));
  std::sort(orders.begin(), orders.end());
  std::vector<std::pair<std::size_t, std::size_t>> profile;
  for (std::size_t i = 0; i < orders.size();) {
    std::size_t j = i;
    while (j < orders.size() && orders[j] == orders[i]) ++j;
    profile.emplace_back(orders[i], j - i);
    i = j;
  }
  return profile;
}

}  // namespace detail

inline std::optional<GroupHom> are_isomorphic(const FiniteGroup& G1, const FiniteGroup& G2,
                                              const Budgets& budgets = {}) {
  if (G1.order() != G2.order()) return std::nullopt;
  if (G1.order() > budgets.endo_group_order)
    throw Error(ErrorKind::BudgetExceeded, "isomorphism search: order " +
                                               std::to_string(G1.order()) + " over budget");
  if (G1.abelian() != G2.abelian()) return std::nullopt;
  if (detail::order_profile(G1) != detail::order_profile(G2)) return std::nullopt;
  const auto& gens = G1.generators();
  std::vector<std::vector<elem_t>> cands(gens.size());
  for (std::size_t k = 0; k < gens.size(); ++k) {
    std::size_t ord = G1.element_order(gens[k]);
    for (std::size_t g = 0; g < G2.order(); ++g)
      if (G2.element_order(elem_t(g)) == ord) cands[k].push_back(elem_t(g));
  }
  std::vector<elem_t> map(G1.order()), order_buf, images(gens.size());
  order_buf.reserve(G1.order());
  std::vector<std::size_t> idx(gens.size(), 0);
  std::vector<char> hit(G2.order());
  if (gens.empty()) return GroupHom{G1, G2, {0}};
  for (;;) {
    for (std::size_t k = 0; k < gens.size(); ++k) images[k] = cands[k][idx[k]];
    if (detail::extend_hom(G1, G2, gens, images, map, order_buf)) {
      std::fill(hit.begin(), hit.end(), 0);
      bool bij = true;
      for (elem_t v : map) {
        if (hit[v]) {
          bij = false;
          break;
        }
        hit[v] = 1;
      }
      if (bij) return GroupHom{G1, G2, map};
    }
    std::size_t k = gens.size();
    bool done = true;
    while (k-- > 0) {
      if (++idx[k] < cands[k].size()) {
        done = false;
        break;
      }
      idx[k] = 0;
    }
    if (done) break;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Invariantly simple factorization

// Witness that G = S_1 x ... x S_m with all S_t isomorphic simple groups.
// Abelian case: (Z_p)^rank with a basis. Non-abelian case: embeddings of a
// common simple type into each internal factor.
struct SimpleFactorization {
  bool abelian = true;
  // abelian leaf: (Z_p)^rank; prime = 1, rank = 0 encodes the trivial group
  std::size_t prime = 1;
  std::size_t rank = 0;
  std::vector<elem_t> basis;  // abelian: independent generators

  // non-abelian leaf: m isomorphic copies of simple_type
  FiniteGroup simple_type;
  std::size_t m = 0;
  std::vector<Subgroup> factor_subgroups;
  // embed[t][s] = the element of G representing simple_type element s sitting
  // in factor t (non-abelian case)
  std::vector<std::vector<elem_t>> embed;

  // coordinates: dense table (small groups) or stride-decoded (product-backed)
  std::vector<std::vector<elem_t>> coord_table;
  bool stride_coords = false;

  std::size_t factor_count() const { return abelian ? rank : m; }

  std::vector<elem_t> coords(const FiniteGroup& G, elem_t g) const {
    if (stride_coords) {
      std::vector<elem_t> c(G.factors().size());
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = G.component(g, i);
      return c;
    }
    return coord_table[g];
  }

  elem_t assemble(const FiniteGroup& G, const std::vector<elem_t>& c) const {
    if (stride_coords) return G.from_components(c);
    if (abelian) {
      elem_t r = 0;
      for (std::size_t i = 0; i < c.size(); ++i) r = G.op(r, G.power(basis[i], c[i]));
      return r;
    }
    elem_t r = 0;
    for (std::size_t t = 0; t < m; ++t) r = G.op(r, embed[t][c[t]]);
    return r;
  }
};

namespace detail {

inline std::optional<SimpleFactorization> elementary_abelian_factorization(
    const FiniteGroup& G) {
  SimpleFactorization f;
  f.abelian = true;
  if (G.order() == 1) {
    f.prime = 1;
    f.rank = 0;
    f.coord_table = {{}};
    return f;
  }
  std::size_t p = G.element_order(1);
  // all non-identity elements must have order p, p prime, |G| = p^rank
  for (std::size_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return std::nullopt;
  std::size_t n = G.order(), rank = 0;
  while (n > 1) {
    if (n % p != 0) return std::nullopt;
    n /= p;
    ++rank;
  }
  for (std::size_t g = 1; g < G.order(); ++g)
    if (G.element_order(elem_t(g)) != p) return std::nullopt;
  f.prime = p;
  f.rank = rank;
  if (G.product_backed()) {
    bool all_zp = true;
    for (const auto& fac : G.factors()) all_zp = all_zp && fac.order() == p;
    if (all_zp && G.factors().size() == rank) {
      f.stride_coords = true;
      for (std::size_t t = 0; t < rank; ++t) {
        std::vector<elem_t> emb;
        // factor subgroup members: multiples of the embedded factor generator
        std::vector<elem_t> mem;
        for (std::size_t v = 0; v < p; ++v) {
          std::vector<elem_t> c(rank, 0);
          c[t] = elem_t(v);
          mem.push_back(G.from_components(c));
        }
        std::sort(mem.begin(), mem.end());
        f.factor_subgroups.push_back(Subgroup{G, std::move(mem)});
        std::vector<elem_t> c(rank, 0);
        c[t] = 1;
        f.basis.push_back(G.from_components(c));
      }
      return f;
    }
  }
  // dense path: greedy basis + coordinate table
  std::vector<elem_t> span{0};
  for (std::size_t g = 1; g < G.order() && f.basis.size() < rank; ++g) {
    if (std::binary_search(span.begin(), span.end(), elem_t(g))) continue;
    f.basis.push_back(elem_t(g));
    std::vector<elem_t> seed = f.basis;
    span = close_under_product(G, seed);
  }
  if (f.basis.size() != rank) return std::nullopt;
  std::vector<char> flat(G.order(), 0);
  f.coord_table.assign(G.order(), {});
  std::vector<elem_t> c(rank, 0);
  for (;;) {
    elem_t g = 0;
    for (std::size_t i = 0; i < rank; ++i) g = G.op(g, G.power(f.basis[i], c[i]));
    if (flat[g]) return std::nullopt;  // basis not independent
    flat[g] = 1;
    f.coord_table[g] = c;
    std::size_t i = rank;
    bool done = true;
    while (i-- > 0) {
      if (++c[i] < p) {
        done = false;
        break;
      }
      c[i] = 0;
    }
    if (done) break;
  }
  for (std::size_t i = 0; i < rank; ++i) {
    std::vector<elem_t> mem;
    for (std::size_t v = 0; v < p; ++v) mem.push_back(G.power(f.basis[i], v));
    std::sort(mem.begin(), mem.end());
    f.factor_subgroups.push_back(Subgroup{G, std::move(mem)});
  }
  return f;
}

inline std::optional<SimpleFactorization> nonabelian_simple_product_factorization(
    const FiniteGroup& G, const Budgets& budgets) {
  SimpleFactorization f;
  f.abelian = false;
  if (G.product_backed()) {
    const auto& facs = G.factors();
    const FiniteGroup& s0 = facs[0];
    if (s0.abelian() || !is_simple(s0)) return std::nullopt;
    std::vector<GroupHom> isos;  // factor t's group -> s0
    for (const auto& ft : facs) {
      if (ft.same_as(s0)) {
        std::vector<elem_t> idmap(s0.order());
        std::iota(idmap.begin(), idmap.end(), 0);
        isos.push_back(GroupHom{s0, s0, std::move(idmap)});
        continue;
      }
      auto iso = are_isomorphic(s0, ft, budgets);  // s0 -> ft
      if (!iso) return std::nullopt;
      isos.push_back(*iso);
    }
    f.simple_type = s0;
    f.m = facs.size();
    f.stride_coords = false;  // coords must be in simple_type indexing
    f.embed.resize(f.m);
    for (std::size_t t = 0; t < f.m; ++t) {
      f.embed[t].resize(s0.order());
      for (std::size_t s = 0; s < s0.order(); ++s) {
        std::vector<elem_t> c(f.m, 0);
        c[t] = isos[t].map[s];
        f.embed[t][s] = G.from_components(c);
      }
      std::vector<elem_t> mem = f.embed[t];
      std::sort(mem.begin(), mem.end());
      f.factor_subgroups.push_back(Subgroup{G, std::move(mem)});
    }
    // stride decoding works when every factor IS s0 (identity iso)
    bool identity_isos = true;
    for (const auto& ft : facs) identity_isos = identity_isos && ft.same_as(s0);
    if (identity_isos) {
      f.stride_coords = true;
    } else if (G.order() <= (std::uint64_t(1) << 22)) {
      f.coord_table.assign(G.order(), std::vector<elem_t>(f.m));
      for (std::size_t g = 0; g < G.order(); ++g) {
        for (std::size_t t = 0; t < f.m; ++t) {
          elem_t local = G.component(elem_t(g), t);
          // invert isos[t]
          elem_t s = 0;
          for (std::size_t x = 0; x < s0.order(); ++x)
            if (isos[t].map[x] == local) {
              s = elem_t(x);
              break;
            }
          f.coord_table[g][t] = s;
        }
      }
    } else {
      return std::nullopt;  // unsupported: huge product with non-identity factors
    }
    return f;
  }

  // Dense path: factors are the minimal normal subgroups.
  if (G.order() > budgets.endo_group_order * 16) return std::nullopt;
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
  std::sort(minimal.begin(), minimal.end());
  std::uint64_t prod = 1;
  for (const auto& mset : minimal) prod *= mset.size();
  if (prod != G.order()) return std::nullopt;
  // every minimal factor must be the same non-abelian simple group
  auto mat0 = materialize_subgroup(Subgroup{G, minimal[0]});
  if (mat0.group.abelian() || !is_simple(mat0.group)) return std::nullopt;
  f.simple_type = mat0.group;
  f.m = minimal.size();
  f.embed.resize(f.m);
  for (std::size_t t = 0; t < f.m; ++t) {
    Subgroup Ht{G, minimal[t]};
    auto mat = materialize_subgroup(Ht);
    if (t == 0) {
      f.embed[0] = mat.to_parent;
    } else {
      auto iso = are_isomorphic(f.simple_type, mat.group, budgets);
      if (!iso) return std::nullopt;
      f.embed[t].resize(f.simple_type.order());
      for (std::size_t s = 0; s < f.simple_type.order(); ++s)
        f.embed[t][s] = mat.to_parent[iso->map[s]];
    }
    f.factor_subgroups.push_back(std::move(Ht));
  }
  // internal-direct-product witness: pairwise commuting generators and
  // coordinates covering G exactly once
  for (std::size_t t1 = 0; t1 < f.m; ++t1)
    for (std::size_t t2 = t1 + 1; t2 < f.m; ++t2)
      for (elem_t a : f.simple_type.generators())
        for (elem_t b : f.simple_type.generators()) {
          elem_t x = f.embed[t1][a], y = f.embed[t2][b];
          if (G.op(x, y) != G.op(y, x)) return std::nullopt;
        }
  std::vector<char> covered(G.order(), 0);
  f.coord_table.assign(G.order(), {});
  std::vector<elem_t> c(f.m, 0);
  for (;;) {
    elem_t g = 0;
    for (std::size_t t = 0; t < f.m; ++t) g = G.op(g, f.embed[t][c[t]]);
    if (covered[g]) return std::nullopt;
    covered[g] = 1;
    f.coord_table[g] = c;
    std::size_t t = f.m;
    bool done = true;
    while (t-- > 0) {
      if (++c[t] < f.simple_type.order()) {
        done = false;
        break;
      }
      c[t] = 0;
    }
    if (done) break;
  }
  return f;
}

}  // namespace detail

inline std::optional<SimpleFactorization> invariantly_simple_factorization(
    const FiniteGroup& G, const Budgets& budgets = {}) {
  if (G.abelian()) return detail::elementary_abelian_factorization(G);
  return detail::nonabelian_simple_product_factorization(G, budgets);
}

}  // namespace gcalab
