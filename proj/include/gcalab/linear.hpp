#pragma once

// Elementary abelian leaves (Z_p)^k as linear CA: coefficient matrices over
// the p-element field, Laurent-polynomial determinant criteria, exact k=1
// deciders, invariant-subspace refinement for k>1.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gcalab/error.hpp"
#include "gcalab/gca.hpp"
#include "gcalab/oracle.hpp"

namespace gcalab {

// Laurent polynomial over F_p; c[i] is the coefficient of X^(lo+i).
// Normalized: either empty (zero) or both ends nonzero.
struct LaurentPoly {
  unsigned p = 2;
  int lo = 0;
  std::vector<unsigned> c;

  bool zero() const { return c.empty(); }
  int hi() const { return lo + int(c.size()) - 1; }
  bool monomial() const { return c.size() == 1; }
  int spread() const { return zero() ? 0 : int(c.size()) - 1; }

  void normalize() {
    std::size_t a = 0, b = c.size();
    while (b > a && c[b - 1] == 0) --b;
    while (a < b && c[a] == 0) ++a;
    lo += int(a);
    c = std::vector<unsigned>(c.begin() + long(a), c.begin() + long(b));
    if (c.empty()) lo = 0;
  }

  unsigned coeff(int off) const {
    if (off < lo || off > hi()) return 0;
    return c[std::size_t(off - lo)];
  }
};

inline LaurentPoly poly_add(const LaurentPoly& a, const LaurentPoly& b) {
  LaurentPoly r;
  r.p = a.p;
  if (a.zero()) return b;
  if (b.zero()) return a;
  r.lo = std::min(a.lo, b.lo);
  int hi = std::max(a.hi(), b.hi());
  r.c.assign(std::size_t(hi - r.lo + 1), 0);
  for (int o = r.lo; o <= hi; ++o)
    r.c[std::size_t(o - r.lo)] = (a.coeff(o) + b.coeff(o)) % r.p;
  r.normalize();
  return r;
}

inline LaurentPoly poly_mul(const LaurentPoly& a, const LaurentPoly& b) {
  LaurentPoly r;
  r.p = a.p;
  if (a.zero() || b.zero()) return r;
  r.lo = a.lo + b.lo;
  r.c.assign(a.c.size() + b.c.size() - 1, 0);
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j)
      r.c[i + j] = (r.c[i + j] + a.c[i] * b.c[j]) % r.p;
  r.normalize();
  return r;
}

inline LaurentPoly poly_neg(const LaurentPoly& a) {
  LaurentPoly r = a;
  for (auto& v : r.c) v = (r.p - v) % r.p;
  return r;
}

inline LaurentPoly poly_scalar(unsigned p, unsigned v, int off = 0) {
  LaurentPoly r;
  r.p = p;
  if (v % p) {
    r.lo = off;
    r.c = {v % p};
  }
  return r;
}

struct MatrixRule {
  unsigned p = 2;
  std::size_t k = 1;
  // offset -> k*k matrix (row-major), only nonzero matrices stored
  std::map<int, std::vector<unsigned>> coeffs;
};

// Extract coefficient matrices from a GCA on an elementary abelian group:
// column c of H_i is coords(h_i(basis_c)). Round-trip equality with the
// endomorphism tables is asserted on every element.
inline MatrixRule to_matrix_rule(const LocalRule& r, const SimpleFactorization& fact) {
  if (!fact.abelian)
    throw Error(ErrorKind::NotElementaryAbelian, "leaf is not elementary abelian");
  const FiniteGroup& G = r.group;
  MatrixRule M;
  M.p = unsigned(fact.prime);
  M.k = fact.rank;
  for (int off = -r.rho; off <= r.rho; ++off) {
    const Endo& h = r.at(off);
    if (h.trivial()) continue;
    std::vector<unsigned> H(M.k * M.k, 0);
    for (std::size_t col = 0; col < M.k; ++col) {
      auto img = fact.coords(G, h(fact.basis[col]));
      for (std::size_t row = 0; row < M.k; ++row) H[row * M.k + col] = img[row];
    }
    // verify the matrix reproduces the endomorphism on every element
    for (std::size_t g = 0; g < G.order(); ++g) {
      auto x = fact.coords(G, elem_t(g));
      auto y = fact.coords(G, h(elem_t(g)));
      for (std::size_t row = 0; row < M.k; ++row) {
        unsigned acc = 0;
        for (std::size_t col = 0; col < M.k; ++col)
          acc = (acc + H[row * M.k + col] * x[col]) % M.p;
        if (acc != y[row])
          throw Error(ErrorKind::StructureViolation,
                      "matrix does not reproduce the endomorphism at offset " +
                          std::to_string(off));
      }
    }
    bool nonzero = false;
    for (unsigned v : H) nonzero = nonzero || v;
    if (nonzero) M.coeffs.emplace(off, std::move(H));
  }
  return M;
}

// det(sum_i H_i X^i) over F_p[X, X^-1], cofactor expansion (k is small).
namespace linear_detail {

inline LaurentPoly det_rec(const std::vector<LaurentPoly>& m, std::size_t k,
                           std::vector<std::size_t> rows, std::vector<std::size_t> cols,
                           unsigned p) {
  if (rows.empty()) return poly_scalar(p, 1);
  if (rows.size() == 1) return m[rows[0] * k + cols[0]];
  LaurentPoly acc;
  acc.p = p;
  std::vector<std::size_t> sub_rows(rows.begin() + 1, rows.end());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const LaurentPoly& piv = m[rows[0] * k + cols[j]];
    if (piv.zero()) continue;
    std::vector<std::size_t> sub_cols;
    for (std::size_t t = 0; t < cols.size(); ++t)
      if (t != j) sub_cols.push_back(cols[t]);
    LaurentPoly term = poly_mul(piv, det_rec(m, k, sub_rows, sub_cols, p));
    acc = poly_add(acc, (j % 2) ? poly_neg(term) : term);
  }
  return acc;
}

}  // namespace linear_detail

inline LaurentPoly determinant(const MatrixRule& M) {
  if (M.k == 0) return poly_scalar(M.p, 1);
  std::vector<LaurentPoly> m(M.k * M.k);
  for (auto& e : m) e.p = M.p;
  for (const auto& [off, H] : M.coeffs)
    for (std::size_t i = 0; i < M.k * M.k; ++i)
      if (H[i]) m[i] = poly_add(m[i], poly_scalar(M.p, H[i], off));
  std::vector<std::size_t> idx(M.k);
  for (std::size_t i = 0; i < M.k; ++i) idx[i] = i;
  return linear_detail::det_rec(m, M.k, idx, idx, M.p);
}

struct LinearSurjInj {
  bool surjective = false;
  bool injective = false;
  LaurentPoly det;
};

// Surjective iff det != 0; injective iff det is a nonzero monomial.
inline LinearSurjInj decide_surj_inj_linear(const MatrixRule& M) {
  LinearSurjInj v;
  v.det = determinant(M);
  v.surjective = !v.det.zero();
  v.injective = !v.det.zero() && v.det.monomial();
  return v;
}

// k=1 rule as a single Laurent polynomial.
inline LaurentPoly poly_k1(const MatrixRule& M) {
  if (M.k != 1) throw Error(ErrorKind::PreconditionViolated, "poly_k1 needs k = 1");
  LaurentPoly r;
  r.p = M.p;
  for (const auto& [off, H] : M.coeffs) r = poly_add(r, poly_scalar(M.p, H[0], off));
  return r;
}

// entropy = (max(d+,0) - min(d-,0)) * log p for a nonzero k=1 rule.
struct EntropyTerm {
  long long num = 0;  // entropy = (num/den) * log(base)
  long long den = 1;
  std::uint64_t base = 1;
};

inline EntropyTerm entropy_linear_k1(const MatrixRule& M) {
  LaurentPoly f = poly_k1(M);
  if (f.zero()) throw Error(ErrorKind::NotSurjective, "zero rule has no entropy formula");
  long long dpos = std::max(f.hi(), 0);
  long long dneg = std::min(f.lo, 0);
  return EntropyTerm{dpos - dneg, 1, M.p};
}

// k=1 sensitivity: equicontinuous iff the rule is zero or a monomial at
// offset 0 (over a field, leading terms of powers never cancel, so any other
// term forces the power radii to infinity).
inline Tri decide_sensitive_k1(const MatrixRule& M) {
  LaurentPoly f = poly_k1(M);
  if (f.zero()) return Tri::False;
  if (f.monomial() && f.lo == 0) return Tri::False;
  return Tri::True;
}

// k=1 transitivity: transitive iff nonzero and some coefficient sits at a
// nonzero offset (classical linear-CA criterion over a prime field).
inline Tri decide_transitive_k1(const MatrixRule& M) {
  LaurentPoly f = poly_k1(M);
  if (f.zero()) return Tri::False;
  if (f.lo != 0 || f.hi() != 0) return Tri::True;
  return Tri::False;
}

// k=1 positive expansivity: both a strictly negative and a strictly positive
// offset carry a nonzero coefficient.
inline Tri decide_positively_expansive_k1(const MatrixRule& M) {
  LaurentPoly f = poly_k1(M);
  return (!f.zero() && f.lo < 0 && f.hi() > 0) ? Tri::True : Tri::False;
}

struct LinearSensitivity {
  Tri sensitive = Tri::Unknown;  // True = sensitive, False = equicontinuous
  std::string reason;
  RadiusProfile profile;  // attached when the power sequence was scanned
};

// k>1 sensitivity after refinement failed: (ii) det spread > 0 forces radius
// growth (det of the n-th power rule has spread n*spread, which lower-bounds
// the entry offset span); (iii) a power-rule repeat certifies bounded radii;
// (iv) otherwise Unknown with the observed profile.
inline LinearSensitivity decide_sensitive_linear(const MatrixRule& M,
                                                 const LocalRule& rule,
                                                 const Budgets& budgets = {}) {
  LinearSensitivity out;
  if (M.k == 0) {
    out.sensitive = Tri::False;
    out.reason = "trivial-leaf";
    return out;
  }
  if (M.k == 1) {
    out.sensitive = decide_sensitive_k1(M);
    out.reason = out.sensitive == Tri::True ? "k1-nonmonomial" : "k1-monomial";
    return out;
  }
  LaurentPoly d = determinant(M);
  if (d.spread() > 0) {
    out.sensitive = Tri::True;
    out.reason = "det-spread";
    return out;
  }
  out.profile = radius_growth_profile(rule, budgets.power_budget, budgets);
  if (out.profile.repeat_found) {
    out.sensitive = Tri::False;
    out.reason = "power-repeat";
    return out;
  }
  out.sensitive = Tri::Unknown;
  out.reason = "budget";
  return out;
}

// ---------------------------------------------------------------------------
// Invariant subspace refinement (k > 1)

namespace linear_detail {

// Row-echelon span over F_p with insertion; returns dimension.
struct Span {
  unsigned p;
  std::size_t k;
  std::vector<std::vector<unsigned>> rows;  // echelon rows, pivot positions ascending

  explicit Span(unsigned p_, std::size_t k_) : p(p_), k(k_) {}

  static unsigned inv_mod(unsigned a, unsigned p) {
    unsigned r = 1;
    for (unsigned e = p - 2; e; e >>= 1) {
      if (e & 1) r = (r * a) % p;
      a = (a * a) % p;
    }
    return r;
  }

  // returns true if v was independent (span grew)
  bool insert(std::vector<unsigned> v) {
    for (const auto& row : rows) {
      std::size_t piv = 0;
      while (piv < k && row[piv] == 0) ++piv;
      if (piv < k && v[piv]) {
        unsigned f = (v[piv] * inv_mod(row[piv], p)) % p;
        for (std::size_t i = 0; i < k; ++i) v[i] = (v[i] + (p - f) * row[i] % p) % p;
      }
    }
    for (std::size_t i = 0; i < k; ++i)
      if (v[i]) {
        rows.push_back(std::move(v));
        std::sort(rows.begin(), rows.end(), [this](const auto& a, const auto& b) {
          std::size_t pa = 0, pb = 0;
          while (pa < k && a[pa] == 0) ++pa;
          while (pb < k && b[pb] == 0) ++pb;
          return pa < pb;
        });
        return true;
      }
    return false;
  }

  std::size_t dim() const { return rows.size(); }
};

inline std::vector<unsigned> mat_vec(const std::vector<unsigned>& H,
                                     const std::vector<unsigned>& v, std::size_t k,
                                     unsigned p) {
  std::vector<unsigned> r(k, 0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) r[i] = (r[i] + H[i * k + j] * v[j]) % p;
  return r;
}

}  // namespace linear_detail

// Find a common nontrivial proper invariant subspace of all coefficient
// matrices by closing candidate vectors; returns the corresponding subgroup
// of the leaf group, or absent if the joint action is irreducible.
inline std::optional<Subgroup> invariant_subspace_refinement(
    const MatrixRule& M, const LocalRule& rule, const SimpleFactorization& fact) {
  if (M.k <= 1) return std::nullopt;
  const FiniteGroup& G = rule.group;
  const unsigned p = M.p;
  const std::size_t k = M.k;
  // candidate seeds: all nonzero coordinate vectors, lexicographic
  std::vector<unsigned> v(k, 0);
  auto next_vec = [&]() {
    for (std::size_t i = k; i-- > 0;) {
      if (++v[i] < p) return true;
      v[i] = 0;
    }
    return false;
  };
  std::optional<std::vector<std::vector<unsigned>>> best;
  while (next_vec()) {
    linear_detail::Span span(p, k);
    span.insert(v);
    bool grew = true;
    while (grew && span.dim() < k) {
      grew = false;
      std::vector<std::vector<unsigned>> cur = span.rows;
      for (const auto& row : cur)
        for (const auto& [off, H] : M.coeffs) {
          (void)off;
          if (span.insert(linear_detail::mat_vec(H, row, k, p))) grew = true;
        }
    }
    if (span.dim() < k) {
      if (!best || span.rows.size() < best->size()) best = span.rows;
      if (best->size() == 1) break;  // cannot do better
    }
  }
  if (!best) return std::nullopt;
  // assemble subgroup members: all linear combinations of the basis rows
  std::vector<elem_t> members;
  const std::size_t dim = best->size();
  std::vector<unsigned> coeff(dim, 0);
  for (;;) {
    std::vector<elem_t> coords(k, 0);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t i = 0; i < k; ++i)
        coords[i] = elem_t((coords[i] + coeff[r] * (*best)[r][i]) % p);
    members.push_back(fact.assemble(G, coords));
    std::size_t r = dim;
    bool done = true;
    while (r-- > 0) {
      if (++coeff[r] < p) {
        done = false;
        break;
      }
      coeff[r] = 0;
    }
    if (done) break;
  }
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return Subgroup{G, std::move(members)};
}

// True if the invariant subgroup `sub` admits an invariant complement under
// all coefficient matrices (the action is block-diagonal across the split).
// In that case the restriction to `sub` is also a quotient: the projection
// along the complement. Greedy search over closures of single vectors; a
// false negative only leaves a verdict Unknown, never wrong.
inline bool has_invariant_complement(const MatrixRule& M, const Subgroup& sub,
                                     const LocalRule& rule,
                                     const SimpleFactorization& fact) {
  const unsigned p = M.p;
  const std::size_t k = M.k;
  double total = 1;
  for (std::size_t i = 0; i < k; ++i) total *= p;
  if (total > 4096) return false;

  linear_detail::Span W(p, k);
  for (elem_t m : sub.members) {
    auto c = fact.coords(rule.group, m);
    W.insert(std::vector<unsigned>(c.begin(), c.end()));
  }
  const std::size_t dw = W.dim();
  if (dw == 0 || dw >= k) return false;

  linear_detail::Span accum = W;  // W plus the complement built so far
  std::size_t comp_dim = 0;
  std::vector<unsigned> v(k, 0);
  auto next_vec = [&]() {
    for (std::size_t i = k; i-- > 0;) {
      if (++v[i] < p) return true;
      v[i] = 0;
    }
    return false;
  };
  while (next_vec() && dw + comp_dim < k) {
    {
      linear_detail::Span probe = accum;
      if (!probe.insert(v)) continue;  // already covered
    }
    // invariant closure of v
    linear_detail::Span C(p, k);
    C.insert(v);
    bool grew = true;
    while (grew && C.dim() < k) {
      grew = false;
      auto cur = C.rows;
      for (const auto& row : cur)
        for (const auto& [off, H] : M.coeffs) {
          (void)off;
          if (C.insert(linear_detail::mat_vec(H, row, k, p))) grew = true;
        }
    }
    // accept the closure only if it is independent of everything so far
    linear_detail::Span trial = accum;
    bool indep = true;
    for (const auto& row : C.rows) indep = indep && trial.insert(row);
    if (indep) {
      accum = std::move(trial);
      comp_dim += C.dim();
    }
  }
  return dw + comp_dim == k;
}

}  // namespace gcalab
