#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gcalab/io.hpp"
#include "gcalab/oracle.hpp"

using namespace gcalab;
namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("GCALAB_CLI");
  REQUIRE(p);
  return p;
}

fs::path corpus_dir() {
  const char* p = std::getenv("GCALAB_CORPUS");
  REQUIRE(p);
  return p;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
};

// run through /bin/sh; stderr folded into stdout
RunResult run(const std::string& cmd) {
  RunResult r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / name;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p);
  f << s;
}

}  // namespace

TEST_CASE("group JSON round trip, table format") {
  auto s3 = symmetric_group(3);
  auto j = group_to_json(s3);
  auto back = group_from_json(j);
  REQUIRE(back.order() == 6);
  CHECK(back.name() == s3.name());
  for (std::size_t a = 0; a < 6; ++a) {
    CHECK(back.element_name(elem_t(a)) == s3.element_name(elem_t(a)));
    for (std::size_t b = 0; b < 6; ++b)
      CHECK(back.op(elem_t(a), elem_t(b)) == s3.op(elem_t(a), elem_t(b)));
  }
}

TEST_CASE("group JSON, permutation-generator format") {
  auto G = load_group_file(corpus_dir() / "a5.json");
  CHECK(G.order() == 60);
  CHECK_FALSE(G.abelian());
  // product-backed groups serialize with a full table too
  auto klein = direct_product({cyclic_group(2), cyclic_group(2)}, "Klein");
  auto back = group_from_json(group_to_json(klein));
  CHECK(back.order() == 4);
  CHECK(back.abelian());
}

TEST_CASE("GCA JSON round trip with inline group") {
  auto z4 = cyclic_group(4);
  std::vector<elem_t> dbl{0, 2, 0, 2};
  auto F = make_gca(z4, {{-1, {0, 1, 2, 3}}, {1, dbl}});
  auto back = gca_from_json(gca_to_json(F));
  CHECK(rules_equal(back.rule, F.rule));
}

TEST_CASE("GCA JSON with a relative group path") {
  auto F = load_gca_file(corpus_dir() / "sigma_s3.json");
  CHECK(F.rule.group.order() == 6);
  CHECK(F.rule.rho == 1);
  CHECK(rules_equal(F.rule, shift_rule(F.rule.group, 1)));
}

TEST_CASE("schema errors carry JSON-pointer locations") {
  using nlohmann::json;
  CHECK_THROWS_WITH(group_from_json(json{{"order", 2}}),
                    Catch::Matchers::ContainsSubstring("/table"));
  CHECK_THROWS_WITH(group_from_json(json{{"order", 2}, {"table", {{0, 1}, {1}}}}),
                    Catch::Matchers::ContainsSubstring("/table/1"));

  json g = group_to_json(cyclic_group(2));
  CHECK_THROWS_WITH(
      gca_from_json(json{{"group", g}, {"endomorphisms", {{"x", {0, 1}}}}}),
      Catch::Matchers::ContainsSubstring("/endomorphisms/x"));
  CHECK_THROWS_WITH(
      gca_from_json(json{
          {"group", g}, {"radius", 1}, {"endomorphisms", {{"2", {0, 1}}}}}),
      Catch::Matchers::ContainsSubstring("outside the declared radius"));
  CHECK_THROWS_WITH(
      gca_from_json(json{{"group", g}, {"endomorphisms", {{"0", {0, 1, 0}}}}}),
      Catch::Matchers::ContainsSubstring("/endomorphisms/0"));
}

TEST_CASE("non-commuting images are rejected on load, naming the offsets") {
  using nlohmann::json;
  auto s3 = symmetric_group(3);
  std::vector<elem_t> id(6);
  for (std::size_t g = 0; g < 6; ++g) id[g] = elem_t(g);
  json j{{"group", group_to_json(s3)},
         {"endomorphisms", {{"-1", id}, {"1", id}}}};
  try {
    gca_from_json(j);
    FAIL("expected a commutation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ImagesDoNotCommute);
    CHECK(std::string(e.what()).find("-1") != std::string::npos);
  }
}

TEST_CASE("report JSON carries verdicts, entropy, and the decomposition") {
  auto F = load_gca_file(corpus_dir() / "sigma_s3.json");
  auto rep = full_report(F);
  auto j = report_to_json(rep);
  CHECK(j.at("surjective").at("value") == "true");
  CHECK(j.at("transitive").at("value") == "true");
  CHECK(j.at("entropy").at("unknown_terms") == 0);
  REQUIRE(j.contains("decomposition"));
  CHECK(j.at("decomposition").at("group_order") == 6);
  CHECK(j.at("decomposition").at("branches").contains("quotient"));
}

TEST_CASE("factor graph JSON") {
  auto a5 = alternating_group(5);
  auto fact = invariantly_simple_factorization(a5);
  REQUIRE(fact);
  auto g = build_factor_graph(shift_rule(a5, 1), *fact);
  auto j = factor_graph_to_json(g);
  CHECK(j.at("m") == 1);
  CHECK(j.at("weighted_sum") == -1);
  CHECK(j.at("o") == 1);
  CHECK(j.at("pi") == "(1)");
  CHECK(j.at("edges").size() == 1);
  CHECK(j.at("edges")[0].at("offset") == -1);
}

// ---------------------------------------------------------------------------
// CLI end-to-end

TEST_CASE("decide exit codes: true / false / unknown") {
  auto d = corpus_dir().string();
  CHECK(run(cli() + " decide surjective " + d + "/xor_z2.json").exit_code == 0);
  CHECK(run(cli() + " decide surjective " + d + "/fsur_counterexample.json").exit_code == 1);
  CHECK(run(cli() + " decide positively-expansive " + d + "/xor_z6.json").exit_code == 2);

  auto r = run(cli() + " decide transitive " + d + "/sigma_q8.json");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("transitive: true") == 0);
}

TEST_CASE("usage and data error exit codes") {
  CHECK(run(cli() + " nonsense").exit_code == 64);
  CHECK(run(cli() + " decide").exit_code == 64);
  CHECK(run(cli() + " decide surjective /does/not/exist.json").exit_code == 65);
  auto bad = temp_file("gcalab_bad_gca.json");
  write_text(bad, "{\"group\": {\"order\": 2}, \"endomorphisms\": {}}");
  auto r = run(cli() + " decide surjective " + bad.string());
  CHECK(r.exit_code == 65);
  CHECK(r.out.find("/table") != std::string::npos);
}

TEST_CASE("decompose --format json reports the S_3 leaf orders") {
  auto r = run(cli() + " decompose " + (corpus_dir() / "any_s3.json").string() +
               " --format json");
  REQUIRE(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("group_order") == 6);
  CHECK(j.at("policy") == "commutator");
  CHECK(j.at("chosen_subgroup").size() == 3);
  CHECK(j.at("branches").at("quotient").at("group_order") == 2);
  CHECK(j.at("branches").at("subgroup").at("group_order") == 3);
  CHECK(j.at("branches").at("quotient").at("leaf") == true);
}

TEST_CASE("budget environment variables apply, flags win over them") {
  auto f = (corpus_dir() / "sigma_s3.json").string();
  // endo budget 1 blocks decomposition; sensitivity falls back to Unknown
  CHECK(run("GCALAB_ENDO_BUDGET=1 " + cli() + " decide sensitive " + f).exit_code == 2);
  // the explicit flag overrides the crippling env value
  CHECK(run("GCALAB_ENDO_BUDGET=1 " + cli() + " decide sensitive " + f +
            " --endo-budget 256").exit_code == 0);
  // without interference the verdict is exact
  CHECK(run(cli() + " decide sensitive " + f).exit_code == 0);
}

TEST_CASE("simulate writes a valid PGM image") {
  auto pgm = temp_file("gcalab_sim.pgm");
  std::error_code ec;
  fs::remove(pgm, ec);
  auto r = run(cli() + " simulate " + (corpus_dir() / "xor_z2.json").string() +
               " --steps 5 --period 12 --seed 3 --pgm " + pgm.string());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(pgm, std::ios::binary);
  REQUIRE(in.good());
  std::string magic, dims;
  std::getline(in, magic);
  CHECK(magic == "P5");
  std::getline(in, dims);
  CHECK(dims == "12 5");
  std::getline(in, dims);  // maxval
  std::string pixels((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
  CHECK(pixels.size() == 60);
}

TEST_CASE("simulate honors an explicit configuration") {
  auto r = run(cli() + " simulate " + (corpus_dir() / "sigma_z3.json").string() +
               " --steps 2 --config '0,1,2'");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out == "0 1 2\n2 0 1\n");  // cell i of the image is cell i-1 of the source
}

TEST_CASE("oracle-check agrees on every bundled rule") {
  for (const auto& e : fs::directory_iterator(corpus_dir())) {
    auto name = e.path().filename().string();
    if (name.find("sigma_") != 0 && name.find("xor_") != 0) continue;
    auto r = run(cli() + " oracle-check " + e.path().string() + " --format json");
    INFO(name << ": " << r.out);
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("agreement") == true);
  }
}

TEST_CASE("corpus-check output is deterministic and clean") {
  auto r1 = run(cli() + " corpus-check " + corpus_dir().string());
  auto r2 = run(cli() + " corpus-check " + corpus_dir().string());
  CHECK(r1.exit_code == 0);
  CHECK(r1.out == r2.out);
  auto j = nlohmann::json::parse(r1.out);
  CHECK(j.at("agreement") == true);
  CHECK(j.at("load_failures").empty());
  CHECK(j.at("results").size() >= 14);
  // sorted by filename
  std::string prev;
  for (const auto& e : j.at("results")) {
    std::string f = e.at("file");
    CHECK(prev < f);
    prev = f;
  }
}
