#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "gcalab/oracle.hpp"

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

LocalRule xor_rule() {
  auto z2 = cyclic_group(2);
  return validate_rule(z2, {{-1, identity_map(z2)}, {1, identity_map(z2)}});
}

LocalRule fsur_rule(const FiniteGroup& S) {
  auto G = direct_product({S, S});
  auto hm1 = endo_map(G, [&](elem_t g) {
    return G.from_components({G.component(g, 1), 0});
  });
  auto hp1 = endo_map(G, [&](elem_t g) {
    return G.from_components({0, G.component(g, 1)});
  });
  return validate_rule(G, {{-1, hm1}, {1, hp1}});
}

}  // namespace

TEST_CASE("rule table and balance") {
  auto xr = xor_rule();
  auto table = rule_table(xr);
  REQUIRE(table.size() == 8);
  for (std::size_t code = 0; code < 8; ++code) {
    elem_t left = elem_t(code >> 2), right = elem_t(code & 1);
    CHECK(table[code] == (left ^ right));
  }
  CHECK(is_balanced(xr));

  auto z2 = cyclic_group(2);
  auto zero = validate_rule(z2, {{0, std::vector<elem_t>{0, 0}}});
  CHECK_FALSE(is_balanced(zero));
}

TEST_CASE("debruijn surjectivity") {
  auto z2 = cyclic_group(2);
  CHECK(debruijn_surjective(xor_rule()));
  CHECK(debruijn_surjective(identity_rule(z2)));
  CHECK(debruijn_surjective(shift_rule(z2, 1)));
  CHECK(debruijn_surjective(shift_rule(symmetric_group(3), -2)));

  auto zero = validate_rule(z2, {{0, std::vector<elem_t>{0, 0}}});
  CHECK_FALSE(debruijn_surjective(zero));

  auto z4 = cyclic_group(4);
  auto dbl = validate_rule(z4, {{1, endo_map(z4, [](elem_t g) { return elem_t((2 * g) % 4); })}});
  CHECK_FALSE(debruijn_surjective(dbl));

  // the S x S construction is not surjective even though its local map is onto
  CHECK_FALSE(debruijn_surjective(fsur_rule(cyclic_group(3))));

  Budgets tiny;
  tiny.oracle_states = 2;
  CHECK_THROWS_MATCHES(debruijn_surjective(xor_rule(), tiny), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::BudgetExceeded;
                       }));
}

TEST_CASE("debruijn injectivity") {
  auto z2 = cyclic_group(2);
  CHECK(debruijn_injective(shift_rule(z2, 1)));
  CHECK(debruijn_injective(identity_rule(z2)));
  CHECK_FALSE(debruijn_injective(xor_rule()));

  auto z4 = cyclic_group(4);
  auto collapse = validate_rule(
      z4, {{0, endo_map(z4, [](elem_t g) { return elem_t((2 * g) % 4); })}});
  CHECK_FALSE(debruijn_injective(collapse));

  CHECK_FALSE(debruijn_injective(fsur_rule(cyclic_group(3))));

  // a radius-1 injective rule: sigma composed with an automorphism
  auto z5 = cyclic_group(5);
  auto aut2 = validate_rule(z5, {{-1, endo_map(z5, [](elem_t g) { return elem_t((2 * g) % 5); })}});
  CHECK(debruijn_injective(aut2));
  CHECK(debruijn_surjective(aut2));
}

TEST_CASE("radius growth profile") {
  auto z2 = cyclic_group(2);
  auto prof_sigma = radius_growth_profile(shift_rule(z2, 1), 16);
  REQUIRE(prof_sigma.entries.size() == 16);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(prof_sigma.entries[i].first == i + 1);
    CHECK(prof_sigma.entries[i].second == int(i + 1));
  }
  CHECK_FALSE(prof_sigma.repeat_found);
  CHECK(prof_sigma.max_radius == 16);

  auto prof_id = radius_growth_profile(identity_rule(z2), 16);
  CHECK(prof_id.repeat_found);
  CHECK(prof_id.repeat_start == 1);
  CHECK(prof_id.repeat_period == 1);
  CHECK(prof_id.max_radius == 0);

  auto prof_xor = radius_growth_profile(xor_rule(), 32);
  for (const auto& [n, rho] : prof_xor.entries) CHECK(rho == int(n));
  CHECK(prof_xor.max_radius == 32);

  // finite-order automorphism rule: x -> 2x on Z_5 at offset 0 has order 4
  auto z5 = cyclic_group(5);
  auto aut = validate_rule(z5, {{0, endo_map(z5, [](elem_t g) { return elem_t((2 * g) % 5); })}});
  auto prof_aut = radius_growth_profile(aut, 16);
  CHECK(prof_aut.repeat_found);
  CHECK(prof_aut.repeat_start == 1);
  CHECK(prof_aut.repeat_period == 4);
  CHECK(prof_aut.max_radius == 0);
}

TEST_CASE("simulate") {
  auto z2 = cyclic_group(2);
  PeriodicConfiguration imp{8, {0, 0, 0, 1, 0, 0, 0, 0}};

  auto id_block = simulate(identity_rule(z2), imp, 4);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t x = 0; x < 8; ++x) CHECK(id_block.at(t, x) == imp.cells[x]);

  auto sh_block = simulate(shift_rule(z2, 1), imp, 4);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t x = 0; x < 8; ++x)
      CHECK(sh_block.at(t, x) == imp.cells[(x + 8 - t) % 8]);

  auto xor_block = simulate(xor_rule(), imp, 3);
  CHECK(xor_block.cells == std::vector<elem_t>{0, 0, 0, 1, 0, 0, 0, 0,
                                               0, 0, 1, 0, 1, 0, 0, 0,
                                               0, 1, 0, 0, 0, 1, 0, 0});

  // row n of the base simulation equals row 1 of the power-rule simulation
  auto x3 = power(xor_rule(), 3);
  auto pow_block = simulate(x3, imp, 2);
  auto base_block = simulate(xor_rule(), imp, 4);
  for (std::size_t x = 0; x < 8; ++x) CHECK(pow_block.at(1, x) == base_block.at(3, x));

  CHECK(block_to_text(xor_block).substr(0, 15) == "0 0 0 1 0 0 0 0");
}

TEST_CASE("rectangle counts and entropy estimates") {
  auto z2 = cyclic_group(2);
  auto sigma = shift_rule(z2, 1);
  CHECK(rectangle_count(sigma, 3, 4) == 64);  // 2^(w+t-1)
  CHECK(rectangle_count(identity_rule(z2), 3, 4) == 8);

  const double log2 = std::log(2.0);
  CHECK(entropy_estimate_growth(sigma, 4, 6) == Catch::Approx(log2).epsilon(1e-9));
  CHECK(entropy_estimate_growth(xor_rule(), 4, 6) == Catch::Approx(2 * log2).epsilon(1e-9));
  CHECK(entropy_estimate_growth(identity_rule(z2), 4, 6) == Catch::Approx(0.0).margin(1e-12));

  auto z3 = cyclic_group(3);
  CHECK(entropy_estimate_growth(shift_rule(z3, 1), 4, 5) ==
        Catch::Approx(std::log(3.0)).epsilon(1e-9));

  // the literal window quotient over-counts by (w-1)/t * log q for sigma
  double naive = entropy_estimate(sigma, 4, 8);
  CHECK(naive == Catch::Approx((4.0 + 8.0 - 1.0) / 8.0 * log2).epsilon(1e-9));
}
