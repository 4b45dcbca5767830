#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <functional>

#include "gcalab/decompose.hpp"

using namespace gcalab;

namespace {

std::vector<elem_t> endo_map(const FiniteGroup& G,
                             const std::function<elem_t(elem_t)>& f) {
  std::vector<elem_t> m(G.order());
  for (std::size_t g = 0; g < G.order(); ++g) m[g] = f(elem_t(g));
  return m;
}

std::vector<std::size_t> leaf_orders(const DecompositionTree& t) {
  std::vector<std::size_t> o;
  for (const auto& c : t.leaves) o.push_back(c.gca.rule.group.order());
  std::sort(o.begin(), o.end());
  return o;
}

// SL(2,5) as permutations of the 24 nonzero vectors of F_5^2
FiniteGroup sl25() {
  auto idx = [](int a, int b) { return a * 5 + b - 1; };  // skip (0,0)
  std::vector<int> s(24), t(24);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      if (a == 0 && b == 0) continue;
      s[std::size_t(idx(a, b))] = idx((5 - b) % 5, a);  // (a,b) -> (-b,a)
      t[std::size_t(idx(a, b))] = idx((a + b) % 5, b);  // (a,b) -> (a+b,b)
    }
  return from_permutation_generators({s, t}, 24, "SL(2,5)");
}

}  // namespace

TEST_CASE("invariantly simple groups stay whole") {
  auto z5 = cyclic_group(5);
  auto t = explicit_decomposition(Gca{shift_rule(z5, 1)});
  REQUIRE(t.leaves.size() == 1);
  CHECK(t.leaves[0].ancestry.empty());
  CHECK(t.leaves[0].gca.rule.group.order() == 5);
  REQUIRE(t.leaves[0].fact.has_value());
  CHECK(t.leaves[0].fact->abelian);
  CHECK(t.top->leaf());

  auto a5 = alternating_group(5);
  auto ta = explicit_decomposition(Gca{identity_rule(a5)});
  REQUIRE(ta.leaves.size() == 1);
  REQUIRE(ta.leaves[0].fact.has_value());
  CHECK_FALSE(ta.leaves[0].fact->abelian);
  CHECK(ta.leaves[0].fact->m == 1);

  auto klein = direct_product({cyclic_group(2), cyclic_group(2)});
  auto tk = explicit_decomposition(Gca{identity_rule(klein)});
  CHECK(tk.leaves.size() == 1);

  std::vector<FiniteGroup> two(2, a5);
  auto a52 = direct_product(two, "A5^2");
  auto t2 = explicit_decomposition(Gca{shift_rule(a52, 1)});
  REQUIRE(t2.leaves.size() == 1);
  CHECK(t2.leaves[0].fact->m == 2);
}

TEST_CASE("shift on S_3 splits along the commutator") {
  auto s3 = symmetric_group(3);
  auto t = explicit_decomposition(Gca{shift_rule(s3, 1)});
  CHECK(leaf_orders(t) == std::vector<std::size_t>{2, 3});
  CHECK(leaf_order_product(t) == 6);
  CHECK(t.top->policy == "commutator");
  CHECK(t.top->subgroup.size() == 3);  // A_3
  CHECK_FALSE(t.top->refinement);
  REQUIRE(t.top->quotient_child);
  REQUIRE(t.top->subgroup_child);
  CHECK(t.top->quotient_child->group_order == 2);
  CHECK(t.top->subgroup_child->group_order == 3);

  // both leaves are still shifts
  for (const auto& c : t.leaves) {
    auto cls = classify(c.gca.rule);
    CHECK(cls.kind == RuleClass::ShiftLike);
  }

  // ancestry replays to the leaf exactly
  for (const auto& c : t.leaves) {
    auto re = replay_ancestry(t.root, c.ancestry);
    CHECK(re.rule.group.order() == c.gca.rule.group.order());
    CHECK(rules_equal(re.rule, c.gca.rule));
  }
}

TEST_CASE("abelian refinement of Z_4 and Z_6") {
  auto z4 = cyclic_group(4);
  auto t4 = explicit_decomposition(Gca{shift_rule(z4, 1)});
  CHECK(leaf_orders(t4) == std::vector<std::size_t>{2, 2});
  CHECK(t4.top->subgroup == std::vector<elem_t>{0, 2});
  CHECK(t4.top->refinement);
  for (const auto& c : t4.leaves) {
    REQUIRE(c.ancestry.size() == 1);
    CHECK(c.ancestry[0].refinement);
  }

  // opting out reproduces the plain behaviour: abelian leaf kept whole
  auto lit = explicit_decomposition(Gca{shift_rule(z4, 1)}, {}, /*refine_abelian=*/false);
  REQUIRE(lit.leaves.size() == 1);
  CHECK(lit.leaves[0].gca.rule.group.order() == 4);
  CHECK_FALSE(lit.leaves[0].fact.has_value());  // Z_4 is not invariantly simple

  auto z6 = cyclic_group(6);
  auto t6 = explicit_decomposition(Gca{shift_rule(z6, 1)});
  CHECK(leaf_orders(t6) == std::vector<std::size_t>{2, 3});
  CHECK(t6.top->policy == "isotypic");
}

TEST_CASE("three-level split of S_4") {
  auto s4 = symmetric_group(4);
  auto t = explicit_decomposition(Gca{shift_rule(s4, 1)});
  CHECK(leaf_orders(t) == std::vector<std::size_t>{2, 3, 4});
  CHECK(leaf_order_product(t) == 24);
  for (const auto& c : t.leaves) {
    REQUIRE(c.fact.has_value());
    CHECK(c.fact->abelian);
    auto re = replay_ancestry(t.root, c.ancestry);
    CHECK(rules_equal(re.rule, c.gca.rule));
  }
  // determinism: identical input, identical ancestry
  auto t2 = explicit_decomposition(Gca{shift_rule(s4, 1)});
  REQUIRE(t2.leaves.size() == t.leaves.size());
  for (std::size_t i = 0; i < t.leaves.size(); ++i)
    CHECK(t.leaves[i].ancestry == t2.leaves[i].ancestry);
}

TEST_CASE("D_4 and Q_8 split into {4,2}") {
  for (auto G : {dihedral_group(4), quaternion_group()}) {
    auto t = explicit_decomposition(Gca{shift_rule(G, 1)});
    CHECK(leaf_orders(t) == std::vector<std::size_t>{2, 4});
    CHECK(leaf_order_product(t) == 8);
    CHECK(t.top->policy == "commutator");
  }
}

TEST_CASE("center policy on a quasi-simple group") {
  auto G = sl25();
  REQUIRE(G.order() == 120);
  REQUIRE(is_perfect(G));
  REQUIRE_FALSE(is_simple(G));
  auto choice = choose_fully_invariant_subgroup(G);
  REQUIRE(choice.has_value());
  CHECK(choice->second == "center");
  CHECK(choice->first.order() == 2);

  auto t = explicit_decomposition(Gca{shift_rule(G, 1)});
  CHECK(leaf_orders(t) == std::vector<std::size_t>{2, 60});
  CHECK(leaf_order_product(t) == 120);
}

TEST_CASE("decomposition respects the rule, not just the group") {
  // non-shift rule on S_3: conjugation-free endomorphism x -> sign pattern
  auto s3 = symmetric_group(3);
  // h_0 maps everything through the sign quotient: x -> transposition^sign(x)
  elem_t tr = 0;
  for (std::size_t g = 1; g < s3.order(); ++g)
    if (s3.element_order(elem_t(g)) == 2) {
      tr = elem_t(g);
      break;
    }
  auto sign_map = endo_map(s3, [&](elem_t x) {
    bool even = s3.element_order(x) != 2;
    return even ? elem_t(0) : tr;
  });
  auto rule = validate_rule(s3, {{0, sign_map}});
  auto t = explicit_decomposition(Gca{rule});
  CHECK(leaf_orders(t) == std::vector<std::size_t>{2, 3});
  // the restriction to A_3 is the zero rule, the quotient is identity-like
  for (const auto& c : t.leaves) {
    if (c.gca.rule.group.order() == 3)
      CHECK(c.gca.rule.nontrivial_count() == 0);
    else
      CHECK(rules_equal(c.gca.rule, identity_rule(c.gca.rule.group)));
  }
}

TEST_CASE("decomposition stuck is reported honestly") {
  Budgets tiny;
  tiny.endo_group_order = 1;
  auto s3 = symmetric_group(3);
  CHECK_THROWS_MATCHES(explicit_decomposition(Gca{shift_rule(s3, 1)}, tiny), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::DecompositionStuck;
                       }));
}
