#pragma once

// Deterministic random generation of valid GCA rules, shared by the unit and
// acceptance test suites.

#include <map>
#include <random>
#include <vector>

#include "gcalab/gca.hpp"
#include "gcalab/group.hpp"

namespace gcalab::corpus {

// Sample one valid rule of radius <= rho: each offset gets either no
// endomorphism or a uniformly chosen one; rejected if images fail to commute.
inline LocalRule random_rule(const FiniteGroup& G, int rho, std::mt19937_64& rng,
                             const std::vector<GroupHom>& endos) {
  for (;;) {
    std::map<int, std::vector<elem_t>> maps;
    for (int off = -rho; off <= rho; ++off) {
      if (rng() % 2 == 0) continue;  // leave the offset trivial
      maps[off] = endos[rng() % endos.size()].map;
    }
    if (maps.empty()) continue;
    try {
      return validate_rule(G, maps);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::ImagesDoNotCommute) continue;
      throw;
    }
  }
}

}  // namespace gcalab::corpus
