#pragma once

// Brute-force cross-validation oracles. The GCA is treated as a plain
// finite-alphabet CA: decisions here use word/graph combinatorics only, an
// independent code path from the algebraic deciders.

#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "gcalab/error.hpp"
#include "gcalab/gca.hpp"

namespace gcalab {

namespace oracle_detail {

// f evaluated on the window (w_0,...,w_{2rho}) read as c_{i-rho}..c_{i+rho}.
inline elem_t eval_window(const LocalRule& r, const std::vector<elem_t>& w) {
  elem_t v = 0;
  for (int k = -r.rho; k <= r.rho; ++k) {
    const Endo& h = r.at(k);
    if (h.trivial()) continue;
    v = r.group.op(v, h(w[std::size_t(k + r.rho)]));
  }
  return v;
}

inline std::uint64_t ipow(std::uint64_t b, std::uint64_t e) {
  std::uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

}  // namespace oracle_detail

// Rule table of the CA: out[word] for all q^(2rho+1) windows, word encoded
// big-endian base q (leftmost cell most significant).
inline std::vector<elem_t> rule_table(const LocalRule& r, const Budgets& budgets = {}) {
  const std::uint64_t q = r.group.order();
  const std::uint64_t width = std::uint64_t(2 * r.rho + 1);
  const std::uint64_t words = oracle_detail::ipow(q, width);
  if (words > budgets.oracle_states * q)
    throw Error(ErrorKind::BudgetExceeded,
                "rule table: " + std::to_string(words) + " windows over budget");
  std::vector<elem_t> out(words);
  std::vector<elem_t> w(width, 0);
  for (std::uint64_t code = 0; code < words; ++code) {
    out[code] = oracle_detail::eval_window(r, w);
    for (std::size_t i = width; i-- > 0;) {
      if (++w[i] < q) break;
      w[i] = 0;
    }
  }
  return out;
}

// Balance property: every symbol has exactly q^(2rho) preimage windows.
inline bool is_balanced(const LocalRule& r, const Budgets& budgets = {}) {
  const std::uint64_t q = r.group.order();
  auto table = rule_table(r, budgets);
  std::vector<std::uint64_t> count(q, 0);
  for (elem_t v : table) ++count[v];
  const std::uint64_t expect = table.size() / q;
  for (std::uint64_t c : count)
    if (c != expect) return false;
  return true;
}

// Exact surjectivity: subset construction over de Bruijn nodes (words of
// length 2rho), starting from the full node set; surjective iff the empty set
// is unreachable. Also asserts the balance property on surjective rules.
inline bool debruijn_surjective(const LocalRule& r, const Budgets& budgets = {}) {
  const std::uint64_t q = r.group.order();
  if (r.rho == 0) {
    // single-cell rule: surjective iff h_0 is onto
    std::vector<char> hit(q, 0);
    for (std::uint64_t g = 0; g < q; ++g) hit[r.at(0)(elem_t(g))] = 1;
    for (std::uint64_t g = 0; g < q; ++g)
      if (!hit[g]) return false;
    return true;
  }
  const std::uint64_t nodes = oracle_detail::ipow(q, std::uint64_t(2 * r.rho));
  if (nodes > budgets.oracle_states)
    throw Error(ErrorKind::BudgetExceeded,
                "de Bruijn graph: " + std::to_string(nodes) + " nodes over budget");
  auto table = rule_table(r, budgets);
  // node u (word of length 2rho), appending symbol a gives window u*a with
  // output table[u*q + a] and successor (u*q + a) mod nodes
  std::set<std::vector<std::uint64_t>> seen;
  const std::size_t nwords = std::size_t((nodes + 63) / 64);
  std::vector<std::uint64_t> full(nwords, ~std::uint64_t(0));
  if (nodes % 64) full[nwords - 1] = (std::uint64_t(1) << (nodes % 64)) - 1;
  std::deque<std::vector<std::uint64_t>> queue{full};
  seen.insert(full);
  std::size_t expansions = 0;
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    if (++expansions > budgets.oracle_pair_states)
      throw Error(ErrorKind::BudgetExceeded, "subset construction exploded");
    for (std::uint64_t sym = 0; sym < q; ++sym) {
      std::vector<std::uint64_t> next(nwords, 0);
      bool empty = true;
      for (std::uint64_t u = 0; u < nodes; ++u) {
        if (!(cur[u >> 6] & (std::uint64_t(1) << (u & 63)))) continue;
        for (std::uint64_t a = 0; a < q; ++a) {
          std::uint64_t win = u * q + a;
          if (table[win] != sym) continue;
          std::uint64_t v = win % nodes;
          next[v >> 6] |= std::uint64_t(1) << (v & 63);
          empty = false;
        }
      }
      if (empty) return false;
      if (seen.insert(next).second) queue.push_back(std::move(next));
    }
  }
  // surjective rules must be balanced; failure here means a bug
  if (!is_balanced(r, budgets))
    throw Error(ErrorKind::StructureViolation,
                "surjective verdict contradicts the balance property");
  return true;
}

// Exact injectivity on bi-infinite configurations via the pair graph: states
// are pairs of de Bruijn nodes with equal-output synchronized transitions,
// iteratively trimmed to the bi-infinite core; injective iff only diagonal
// states survive.
inline bool debruijn_injective(const LocalRule& r, const Budgets& budgets = {}) {
  const std::uint64_t q = r.group.order();
  if (r.rho == 0) return endo_is_automorphism(r.group, r.at(0));
  const std::uint64_t nodes = oracle_detail::ipow(q, std::uint64_t(2 * r.rho));
  const std::uint64_t pairs = nodes * nodes;
  if (pairs > budgets.oracle_pair_states)
    throw Error(ErrorKind::BudgetExceeded,
                "pair graph: " + std::to_string(pairs) + " states over budget");
  auto table = rule_table(r, budgets);

  // out-degree / in-degree of every pair state under synchronized transitions
  std::vector<std::uint32_t> outdeg(pairs, 0), indeg(pairs, 0);
  std::vector<char> alive(pairs, 1);
  auto for_each_succ = [&](std::uint64_t u, std::uint64_t v, auto&& fn) {
    for (std::uint64_t a = 0; a < q; ++a) {
      std::uint64_t wu = u * q + a;
      elem_t out = table[wu];
      std::uint64_t su = wu % nodes;
      for (std::uint64_t b = 0; b < q; ++b) {
        std::uint64_t wv = v * q + b;
        if (table[wv] != out) continue;
        fn(su, wv % nodes);
      }
    }
  };
  for (std::uint64_t u = 0; u < nodes; ++u)
    for (std::uint64_t v = 0; v < nodes; ++v)
      for_each_succ(u, v, [&](std::uint64_t su, std::uint64_t sv) {
        ++outdeg[u * nodes + v];
        ++indeg[su * nodes + sv];
      });
  std::deque<std::uint64_t> dead;
  for (std::uint64_t s = 0; s < pairs; ++s)
    if (outdeg[s] == 0 || indeg[s] == 0) {
      alive[s] = 0;
      dead.push_back(s);
    }
  while (!dead.empty()) {
    std::uint64_t s = dead.front();
    dead.pop_front();
    std::uint64_t u = s / nodes, v = s % nodes;
    // removing s decrements indeg of its successors and outdeg of its
    // predecessors; predecessors of (u,v) are pairs (pu,pv) with pu*q+a ~ u
    for_each_succ(u, v, [&](std::uint64_t su, std::uint64_t sv) {
      std::uint64_t t = su * nodes + sv;
      if (alive[t] && --indeg[t] == 0) {
        alive[t] = 0;
        dead.push_back(t);
      }
    });
    // predecessors: pu such that u = (pu*q + a) mod nodes, i.e. pu in
    // { u/q + k*(nodes/q) } with a = u mod q ... simpler: pu ranges over all
    // nodes whose suffix matches u's prefix. u = (pu mod nodes/q)*q + a.
    const std::uint64_t stride = nodes / q;
    std::uint64_t a = u % q;  // last symbol appended to reach u
    std::uint64_t pu_base = u / q;
    std::uint64_t b = v % q;
    std::uint64_t pv_base = v / q;
    for (std::uint64_t x = 0; x < q; ++x) {
      std::uint64_t pu = x * stride + pu_base;
      elem_t out_u = table[pu * q + a];
      for (std::uint64_t y = 0; y < q; ++y) {
        std::uint64_t pv = y * stride + pv_base;
        if (table[pv * q + b] != out_u) continue;
        std::uint64_t t = pu * nodes + pv;
        if (alive[t] && --outdeg[t] == 0) {
          alive[t] = 0;
          dead.push_back(t);
        }
      }
    }
  }
  for (std::uint64_t u = 0; u < nodes; ++u)
    for (std::uint64_t v = 0; v < nodes; ++v)
      if (u != v && alive[u * nodes + v]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Radius growth / repeat detection

struct RadiusProfile {
  std::vector<std::pair<std::size_t, int>> entries;  // (n, trimmed radius of F^n)
  bool repeat_found = false;
  std::size_t repeat_start = 0;   // smallest m with rule(m) == rule(m + period)
  std::size_t repeat_period = 0;
  int max_radius = 0;
};

namespace oracle_detail {

inline std::string serialize_rule(const LocalRule& r) {
  std::string s = std::to_string(r.rho) + ";";
  for (const auto& e : r.endos) {
    s += e.trivial() ? "T" : "";
    for (elem_t v : e.map) {
      s += std::to_string(v);
      s += ',';
    }
    s += '|';
  }
  return s;
}

}  // namespace oracle_detail

inline RadiusProfile radius_growth_profile(const LocalRule& r, std::size_t n_max,
                                           const Budgets& budgets = {}) {
  RadiusProfile p;
  LocalRule cur = r;
  std::map<std::string, std::size_t> seen;
  for (std::size_t n = 1; n <= n_max && n <= budgets.power_budget; ++n) {
    if (n > 1) cur = compose(cur, r);
    p.entries.emplace_back(n, cur.rho);
    if (cur.rho > p.max_radius) p.max_radius = cur.rho;
    auto key = oracle_detail::serialize_rule(cur);
    auto [it, inserted] = seen.emplace(std::move(key), n);
    if (!inserted && !p.repeat_found) {
      p.repeat_found = true;
      p.repeat_start = it->second;
      p.repeat_period = n - it->second;
      break;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Space-time blocks, simulation, entropy estimation

struct SpaceTimeBlock {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<elem_t> cells;  // row-major, cells[t*width + x]

  elem_t at(std::size_t t, std::size_t x) const { return cells[t * width + x]; }
};

inline SpaceTimeBlock simulate(const LocalRule& r, const PeriodicConfiguration& c,
                               std::size_t t) {
  SpaceTimeBlock b;
  b.width = c.period;
  b.height = t;
  b.cells.reserve(t * c.period);
  PeriodicConfiguration cur = c;
  for (std::size_t row = 0; row < t; ++row) {
    b.cells.insert(b.cells.end(), cur.cells.begin(), cur.cells.end());
    cur = apply(r, cur);
  }
  return b;
}

inline std::string block_to_text(const SpaceTimeBlock& b) {
  std::string s;
  for (std::size_t t = 0; t < b.height; ++t) {
    for (std::size_t x = 0; x < b.width; ++x) {
      if (x) s += ' ';
      s += std::to_string(b.at(t, x));
    }
    s += '\n';
  }
  return s;
}

inline void write_pgm(const SpaceTimeBlock& b, std::size_t q, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::BadInput, "cannot open " + path);
  f << "P5\n" << b.width << " " << b.height << "\n255\n";
  for (elem_t v : b.cells) {
    unsigned char gray =
        q <= 1 ? 0 : (unsigned char)((std::size_t(v) * 255) / (q - 1));
    f.write((const char*)&gray, 1);
  }
}

// Exact number of distinct t x w space-time rectangles: every seed word of
// width w + 2*rho*(t-1) appears in some configuration, so rectangles are
// exactly the lightcone images of all seeds.
inline std::uint64_t rectangle_count(const LocalRule& r, std::size_t w, std::size_t t,
                                     const Budgets& budgets = {}) {
  const std::uint64_t q = r.group.order();
  const std::size_t margin = std::size_t(r.rho) * (t - 1);
  const std::size_t seed_w = w + 2 * margin;
  const std::uint64_t seeds = oracle_detail::ipow(q, seed_w);
  if (seeds > budgets.seed_budget)
    throw Error(ErrorKind::BudgetExceeded,
                "rectangle count: " + std::to_string(seeds) + " seeds over budget");
  std::unordered_set<std::string> blocks;
  std::vector<elem_t> seed(seed_w, 0);
  std::vector<elem_t> row, next;
  std::string key;
  key.reserve(w * t);
  for (std::uint64_t code = 0; code < seeds; ++code) {
    row = seed;
    key.clear();
    for (std::size_t rt = 0; rt < t; ++rt) {
      // middle w cells of the current (shrinking) row
      std::size_t off = (row.size() - w) / 2;
      for (std::size_t x = 0; x < w; ++x) key += char(row[off + x]);
      if (rt + 1 < t) {
        next.assign(row.size() - 2 * std::size_t(r.rho), 0);
        for (std::size_t i = 0; i < next.size(); ++i) {
          elem_t v = 0;
          for (int k = -r.rho; k <= r.rho; ++k) {
            const Endo& h = r.at(k);
            if (h.trivial()) continue;
            v = r.group.op(v, h(row[i + std::size_t(k + r.rho)]));
          }
          next[i] = v;
        }
        row.swap(next);
      }
    }
    blocks.insert(key);
    for (std::size_t i = seed_w; i-- > 0;) {
      if (++seed[i] < q) break;
      seed[i] = 0;
    }
  }
  return blocks.size();
}

// log R(w,t) / t, the literal finite-window quotient.
inline double entropy_estimate(const LocalRule& r, std::size_t w, std::size_t t,
                               const Budgets& budgets = {}) {
  return std::log(double(rectangle_count(r, w, t, budgets))) / double(t);
}

// Difference quotient log R(w,t) - log R(w,t-1): converges much faster in t
// and is what the acceptance checks use.
inline double entropy_estimate_growth(const LocalRule& r, std::size_t w, std::size_t t,
                                      const Budgets& budgets = {}) {
  if (t < 2) throw Error(ErrorKind::BadInput, "growth estimate needs t >= 2");
  return std::log(double(rectangle_count(r, w, t, budgets))) -
         std::log(double(rectangle_count(r, w, t - 1, budgets)));
}

}  // namespace gcalab
