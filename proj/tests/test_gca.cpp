#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <functional>
#include <random>

#include "gcalab/gca.hpp"

using namespace gcalab;

namespace {

std::vector<elem_t> endo_map(const FiniteGroup& G,
                             const std::function<elem_t(elem_t)>& f) {
  std::vector<elem_t> m(G.order());
  for (std::size_t g = 0; g < G.order(); ++g) m[g] = f(elem_t(g));
  return m;
}

std::vector<elem_t> identity_map(const FiniteGroup& G) {
  return endo_map(G, [](elem_t g) { return g; });
}

// Rule of the canonical non-surjective product example on S x S:
// h_{-1}(x,y) = (y,e), h_{+1}(x,y) = (e,y).
Gca fsur_gca(const FiniteGroup& S) {
  auto G = direct_product({S, S});
  auto hm1 = endo_map(G, [&](elem_t g) {
    return G.from_components({G.component(g, 1), 0});
  });
  auto hp1 = endo_map(G, [&](elem_t g) {
    return G.from_components({0, G.component(g, 1)});
  });
  return make_gca(G, {{-1, hm1}, {1, hp1}});
}

}  // namespace

TEST_CASE("validate_rule accepts and trims") {
  auto z2 = cyclic_group(2);
  auto xr = validate_rule(z2, {{-1, identity_map(z2)}, {1, identity_map(z2)}});
  CHECK(xr.rho == 1);
  CHECK(xr.nontrivial_count() == 2);

  // declared radius 2, only offset 0 nontrivial -> trimmed to 0
  auto z4 = cyclic_group(4);
  auto trimmed = validate_rule(
      z4, {{-2, {}}, {0, identity_map(z4)}, {2, std::vector<elem_t>(4, 0)}});
  CHECK(trimmed.rho == 0);
  CHECK(trimmed.untrimmed_rho == 2);

  // zero rule is allowed (radius 0, trivial h_0)
  auto zero = validate_rule(z2, {{0, std::vector<elem_t>{0, 0}}});
  CHECK(zero.rho == 0);
  CHECK(zero.nontrivial_count() == 0);
}

TEST_CASE("validate_rule rejects bad maps") {
  auto z4 = cyclic_group(4);
  auto not_endo = endo_map(z4, [](elem_t g) { return elem_t((g + 1) % 4); });
  CHECK_THROWS_MATCHES(validate_rule(z4, {{0, not_endo}}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::NotEndomorphism;
                       }));

  auto s3 = symmetric_group(3);
  CHECK_THROWS_MATCHES(
      validate_rule(s3, {{-1, identity_map(s3)}, {1, identity_map(s3)}}), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.kind() == ErrorKind::ImagesDoNotCommute; }));
}

TEST_CASE("non-surjective product rule on S x S validates") {
  for (auto& S : {cyclic_group(3), symmetric_group(3)}) {
    auto F = fsur_gca(S);
    CHECK(F.rule.rho == 1);
    CHECK(F.rule.nontrivial_count() == 2);
  }
}

TEST_CASE("apply") {
  auto z2 = cyclic_group(2);

  auto idr = identity_rule(z2);
  PeriodicConfiguration c{4, {0, 1, 1, 0}};
  CHECK(apply(idr, c).cells == c.cells);

  auto sig = shift_rule(z2, 1);
  CHECK(sig.rho == 1);
  CHECK_FALSE(sig.at(-1).trivial());
  auto shifted = apply(sig, c);
  CHECK(shifted.cells == std::vector<elem_t>{0, 0, 1, 1});
  CHECK(shifted.cells == rotate(c, 1).cells);

  auto xr = validate_rule(z2, {{-1, identity_map(z2)}, {1, identity_map(z2)}});
  PeriodicConfiguration x{4, {0, 0, 1, 0}};
  CHECK(apply(xr, x).cells == std::vector<elem_t>{0, 1, 0, 1});
}

TEST_CASE("compose and power") {
  auto z2 = cyclic_group(2);
  auto xr = validate_rule(z2, {{-1, identity_map(z2)}, {1, identity_map(z2)}});

  auto x2 = power(xr, 2);
  CHECK(x2.rho == 2);
  CHECK(x2.at(-2).map == identity_map(z2));
  CHECK(x2.at(2).map == identity_map(z2));
  CHECK(x2.at(0).trivial());
  CHECK(x2.at(-1).trivial());
  CHECK(x2.at(1).trivial());

  auto sig = shift_rule(z2, 1);
  for (std::size_t n : {1u, 2u, 5u}) {
    auto sn = power(sig, n);
    CHECK(sn.rho == int(n));
    CHECK(rules_equal(sn, shift_rule(z2, (long long)n)));
  }

  auto idr = identity_rule(symmetric_group(3));
  CHECK(rules_equal(power(idr, 7), idr));

  // semigroup law on random configurations
  std::mt19937_64 rng(12345);
  for (auto& r : {xr, power(xr, 3), shift_rule(z2, -2), identity_rule(z2)}) {
    for (std::size_t period : {1u, 3u, 7u, 12u}) {
      PeriodicConfiguration c{period, {}};
      c.cells.resize(period);
      for (auto& v : c.cells) v = elem_t(rng() % 2);
      for (std::size_t n = 1; n <= 8; ++n) {
        auto via_power = apply(power(r, n), c);
        auto iter = c;
        for (std::size_t k = 0; k < n; ++k) iter = apply(r, iter);
        CHECK(via_power.cells == iter.cells);
      }
    }
  }
}

TEST_CASE("radius bound for powers") {
  auto z3 = cyclic_group(3);
  auto r = validate_rule(z3, {{-1, identity_map(z3)},
                              {0, endo_map(z3, [](elem_t g) { return elem_t((2 * g) % 3); })},
                              {1, identity_map(z3)}});
  for (std::size_t n = 1; n <= 6; ++n) CHECK(radius(power(r, n)) <= int(n) * radius(r));
}

TEST_CASE("classify") {
  auto z2 = cyclic_group(2);
  CHECK(classify(identity_rule(z2)).kind == RuleClass::IdentityLike);

  auto sig = classify(shift_rule(z2, 1));
  CHECK(sig.kind == RuleClass::ShiftLike);
  CHECK(sig.shift_offset == -1);
  CHECK(sig.is_automorphism);

  auto xr = validate_rule(z2, {{-1, identity_map(z2)}, {1, identity_map(z2)}});
  CHECK(classify(xr).kind == RuleClass::General);

  // shift-like with non-injective endomorphism
  auto z4 = cyclic_group(4);
  auto dbl = validate_rule(z4, {{1, endo_map(z4, [](elem_t g) { return elem_t((2 * g) % 4); })}});
  auto cd = classify(dbl);
  CHECK(cd.kind == RuleClass::ShiftLike);
  CHECK(cd.shift_offset == 1);
  CHECK_FALSE(cd.is_automorphism);
}

TEST_CASE("restrict") {
  auto z4 = cyclic_group(4);
  auto xr4 = make_gca(z4, {{-1, identity_map(z4)}, {1, identity_map(z4)}});
  auto sub = subgroup_generated(z4, {2});
  auto res = restrict_gca(xr4, sub);
  CHECK(res.gca.rule.group.order() == 2);
  CHECK(res.gca.rule.rho == 1);
  CHECK(res.gca.rule.at(-1).map == std::vector<elem_t>{0, 1});

  // restriction to the whole group is the same rule up to identity relabel
  auto whole = restrict_gca(xr4, whole_group(z4));
  CHECK(rules_equal(whole.gca.rule, xr4.rule));

  auto s3 = symmetric_group(3);
  auto sig3 = Gca{shift_rule(s3, 1)};
  elem_t trans = 0;
  for (std::size_t g = 0; g < 6; ++g)
    if (s3.element_order(elem_t(g)) == 2) {
      trans = elem_t(g);
      break;
    }
  CHECK_THROWS_MATCHES(restrict_gca(sig3, subgroup_generated(s3, {trans})), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::NotNormal;
                       }));

  // invariance failure: h maps subgroup outside itself
  auto fs = fsur_gca(cyclic_group(3));
  const auto& G = fs.rule.group;
  // subgroup {e} x S is normal but h_{-1}((e,y)) = (y,e) leaves it
  std::vector<elem_t> memb;
  for (elem_t y = 0; y < 3; ++y) memb.push_back(G.from_components({0, y}));
  std::sort(memb.begin(), memb.end());
  Subgroup right{G, memb};
  CHECK_THROWS_MATCHES(restrict_gca(fs, right), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::NotInvariant;
                       }));
}

TEST_CASE("quotient_gca") {
  auto s3 = symmetric_group(3);
  auto sig3 = Gca{shift_rule(s3, 1)};
  auto a3 = commutator_subgroup(s3);

  auto q = quotient_gca(sig3, a3);
  CHECK(q.gca.rule.group.order() == 2);
  CHECK(classify(q.gca.rule).kind == RuleClass::ShiftLike);

  auto q_triv = quotient_gca(sig3, trivial_subgroup(s3));
  CHECK(q_triv.gca.rule.group.order() == 6);

  auto q_all = quotient_gca(sig3, whole_group(s3));
  CHECK(q_all.gca.rule.group.order() == 1);
  CHECK(q_all.gca.rule.rho == 0);
}

TEST_CASE("restrict/quotient commute with apply") {
  std::mt19937_64 rng(99);
  auto s3 = symmetric_group(3);
  auto sig3 = Gca{shift_rule(s3, 1)};
  auto a3 = commutator_subgroup(s3);

  auto q = quotient_gca(sig3, a3);
  auto res = restrict_gca(sig3, a3);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t period = 1 + rng() % 10;
    PeriodicConfiguration c{period, {}};
    c.cells.resize(period);
    for (auto& v : c.cells) v = elem_t(rng() % 6);
    // projection commutes
    auto lhs = apply(sig3, c);
    PeriodicConfiguration proj{period, {}}, lhs_proj{period, {}};
    proj.cells.resize(period);
    lhs_proj.cells.resize(period);
    for (std::size_t i = 0; i < period; ++i) {
      proj.cells[i] = q.qd.coset_of[c.cells[i]];
      lhs_proj.cells[i] = q.qd.coset_of[lhs.cells[i]];
    }
    CHECK(apply(q.gca, proj).cells == lhs_proj.cells);

    // restriction agrees on subgroup-valued configurations
    PeriodicConfiguration cs{period, {}}, cs_sub{period, {}};
    cs.cells.resize(period);
    cs_sub.cells.resize(period);
    for (std::size_t i = 0; i < period; ++i) {
      elem_t s = elem_t(rng() % res.sub.group.order());
      cs_sub.cells[i] = s;
      cs.cells[i] = res.sub.to_parent[s];
    }
    auto big = apply(sig3, cs);
    auto small = apply(res.gca, cs_sub);
    for (std::size_t i = 0; i < period; ++i)
      CHECK(res.sub.to_parent[small.cells[i]] == big.cells[i]);
  }
}
