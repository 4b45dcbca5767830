// Command-line front end: validate inputs, decompose, decide dynamical
// properties, compute/estimate entropy, simulate, and cross-check against the
// brute-force oracles.
//
// Exit codes: 0 = true/success, 1 = false/disagreement, 2 = unknown,
// 64 = usage error, 65 = data error, 70 = internal error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcalab/io.hpp"
#include "gcalab/oracle.hpp"
#include "gcalab/properties.hpp"

namespace {

using namespace gcalab;

constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitInternal = 70;

std::optional<std::size_t> env_budget(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw Error(ErrorKind::BadInput, std::string(name) + ": not an integer");
  }
}

struct Options {
  std::string format = "text";
  // -1 = unset; env fills unset values, flags always win
  long long endo_budget = -1;
  long long oracle_budget = -1;
  long long power_budget = -1;

  Budgets budgets() const {
    Budgets b;
    auto pick = [](long long flag, const char* env,
                   std::size_t fallback) -> std::size_t {
      if (flag >= 0) return std::size_t(flag);
      if (auto e = env_budget(env)) return *e;
      return fallback;
    };
    Budgets def;
    b.endo_group_order = pick(endo_budget, "GCALAB_ENDO_BUDGET", def.endo_group_order);
    b.subgroup_group_order = b.endo_group_order;
    b.oracle_states = pick(oracle_budget, "GCALAB_ORACLE_BUDGET", def.oracle_states);
    b.oracle_pair_states =
        std::max<std::size_t>(b.oracle_states, def.oracle_pair_states);
    b.power_budget = pick(power_budget, "GCALAB_POWER_BUDGET", def.power_budget);
    return b;
  }
  bool json() const { return format == "json"; }
};

int tri_exit(Tri t) {
  switch (t) {
    case Tri::True: return 0;
    case Tri::False: return 1;
    default: return 2;
  }
}

const Verdict& pick_property(const PropertyReport& r, const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '-', '_');
  if (n == "surjective") return r.surjective;
  if (n == "injective") return r.injective;
  if (n == "open") return r.open_map;
  if (n == "dpo") return r.dpo;
  if (n == "equicontinuous") return r.equicontinuous;
  if (n == "sensitive") return r.sensitive;
  if (n == "transitive") return r.transitive;
  if (n == "totally_transitive") return r.totally_transitive;
  if (n == "topologically_weakly_mixing") return r.topologically_weakly_mixing;
  if (n == "topologically_strongly_mixing") return r.topologically_strongly_mixing;
  if (n == "ergodically_weakly_mixing") return r.ergodically_weakly_mixing;
  if (n == "ergodically_strongly_mixing") return r.ergodically_strongly_mixing;
  if (n == "ergodic") return r.ergodic;
  if (n == "strongly_transitive") return r.strongly_transitive;
  if (n == "positively_expansive") return r.positively_expansive;
  throw CLI::ValidationError("unknown property '" + name + "'");
}

// -------------------------------------------------------------------------
// subcommand bodies

int cmd_validate(const std::string& path, const Options& opt) {
  Gca F = load_gca_file(path);
  const auto& r = F.rule;
  if (opt.json()) {
    nlohmann::json j;
    j["valid"] = true;
    j["group"] = r.group.name();
    j["order"] = r.group.order();
    j["radius"] = r.rho;
    j["nontrivial_offsets"] = [&] {
      nlohmann::json a = nlohmann::json::array();
      for (int k = -r.rho; k <= r.rho; ++k)
        if (!r.trivial_at(k)) a.push_back(k);
      return a;
    }();
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "valid GCA over " << r.group.name() << " (order "
              << r.group.order() << "), radius " << r.rho << ", "
              << r.nontrivial_count() << " nontrivial offset(s)\n";
  }
  return 0;
}

int cmd_decompose(const std::string& path, bool no_refine, const Options& opt) {
  Gca F = load_gca_file(path);
  auto tree = explicit_decomposition(F, opt.budgets(), !no_refine);
  if (opt.json()) {
    std::cout << tree_to_json(tree).dump(2) << "\n";
  } else {
    std::cout << "decomposed |G| = " << F.rule.group.order() << " into "
              << tree.leaves.size() << " leaf component(s):\n";
    for (std::size_t i = 0; i < tree.leaves.size(); ++i) {
      const auto& c = tree.leaves[i];
      std::cout << "  leaf " << i + 1 << ": order "
                << c.gca.rule.group.order();
      if (c.fact && !c.fact->abelian)
        std::cout << " = simple^" << c.fact->m << " (simple order "
                  << c.fact->simple_type.order() << ")";
      else if (c.fact && c.fact->abelian)
        std::cout << " = (Z_" << c.fact->prime << ")^" << c.fact->rank;
      std::cout << ", depth " << c.ancestry.size() << "\n";
    }
  }
  return 0;
}

int cmd_decide(const std::string& prop, const std::string& path,
               const Options& opt) {
  Gca F = load_gca_file(path);
  auto rep = full_report(F, opt.budgets());
  const Verdict& v = pick_property(rep, prop);
  if (opt.json()) {
    nlohmann::json j = verdict_to_json(v);
    j["property"] = prop;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << prop << ": " << tri_name(v.value) << " ("
              << method_name(v.method);
    if (!v.certificate.empty()) std::cout << "; " << v.certificate;
    std::cout << ")\n";
  }
  return tri_exit(v.value);
}

int cmd_entropy(const std::string& path, const Options& opt) {
  Gca F = load_gca_file(path);
  auto rep = full_report(F, opt.budgets());
  if (opt.json())
    std::cout << entropy_to_json(rep.entropy).dump(2) << "\n";
  else
    std::cout << "entropy: " << entropy_to_text(rep.entropy) << "\n";
  return rep.entropy.exact() ? 0 : 2;
}

int cmd_report(const std::string& path, const Options& opt) {
  Gca F = load_gca_file(path);
  auto rep = full_report(F, opt.budgets());
  if (opt.json())
    std::cout << report_to_json(rep).dump(2) << "\n";
  else
    std::cout << report_to_text(rep);
  return 0;
}

int cmd_simulate(const std::string& path, std::size_t steps, std::size_t period,
                 const std::string& cells_str, std::uint64_t seed,
                 const std::string& pgm, const Options& opt) {
  Gca F = load_gca_file(path);
  const std::size_t q = F.rule.group.order();
  PeriodicConfiguration c;
  if (!cells_str.empty()) {
    std::istringstream is(cells_str);
    long long v;
    char comma;
    while (is >> v) {
      if (v < 0 || std::size_t(v) >= q)
        throw Error(ErrorKind::BadInput, "cell value out of range");
      c.cells.push_back(elem_t(v));
      is >> comma;  // tolerate comma separators
    }
    if (c.cells.empty()) throw Error(ErrorKind::BadInput, "empty configuration");
    c.period = c.cells.size();
  } else {
    c.period = period;
    c.cells.resize(period);
    std::mt19937_64 rng(seed);
    for (auto& x : c.cells) x = elem_t(rng() % q);
  }
  auto block = simulate(F.rule, c, steps);
  if (!pgm.empty()) write_pgm(block, q, pgm);
  if (opt.json()) {
    nlohmann::json j;
    j["width"] = block.width;
    j["height"] = block.height;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t t = 0; t < block.height; ++t) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t x = 0; x < block.width; ++x) row.push_back(block.at(t, x));
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    std::cout << j.dump(2) << "\n";
  } else if (pgm.empty()) {
    std::cout << block_to_text(block);
  } else {
    std::cout << "wrote " << block.width << "x" << block.height << " PGM to "
              << pgm << "\n";
  }
  return 0;
}

struct OracleComparison {
  nlohmann::json detail = nlohmann::json::object();
  bool disagreement = false;
};

// Compare decomposition-based verdicts with the independent brute-force
// oracles; only exact (non-Unknown) verdicts are compared.
OracleComparison compare_with_oracles(const Gca& F, const PropertyReport& rep,
                                      const Budgets& budgets) {
  OracleComparison out;
  auto side = [&](const char* name, Tri decided, auto oracle_fn) {
    nlohmann::json j;
    j["decided"] = tri_name(decided);
    try {
      bool o = oracle_fn();
      j["oracle"] = o;
      bool agree = decided == Tri::Unknown || (decided == Tri::True) == o;
      j["agree"] = agree;
      if (!agree) out.disagreement = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::BudgetExceeded) throw;
      j["oracle"] = "budget-exceeded";
      j["agree"] = true;
    }
    out.detail[name] = std::move(j);
  };
  side("surjective", rep.surjective.value,
       [&] { return debruijn_surjective(F.rule, budgets); });
  side("injective", rep.injective.value,
       [&] { return debruijn_injective(F.rule, budgets); });
  // sensitivity vs the power-rule radius profile: a certified repeat means
  // equicontinuous, growth past the window means sensitive
  if (rep.sensitive.value != Tri::Unknown) {
    auto prof = radius_growth_profile(F.rule, 64, budgets);
    nlohmann::json j;
    j["decided"] = tri_name(rep.sensitive.value);
    j["oracle"] = !prof.repeat_found;
    bool agree = prof.repeat_found == (rep.sensitive.value == Tri::False);
    j["agree"] = agree;
    if (!agree) out.disagreement = true;
    out.detail["sensitive"] = std::move(j);
  }
  return out;
}

int cmd_oracle_check(const std::string& path, const Options& opt) {
  Gca F = load_gca_file(path);
  auto budgets = opt.budgets();
  auto rep = full_report(F, budgets);
  auto cmp = compare_with_oracles(F, rep, budgets);
  if (opt.json()) {
    nlohmann::json j;
    j["file"] = path;
    j["checks"] = cmp.detail;
    j["agreement"] = !cmp.disagreement;
    std::cout << j.dump(2) << "\n";
  } else {
    for (auto it = cmp.detail.begin(); it != cmp.detail.end(); ++it)
      std::cout << it.key() << ": decided=" << it.value()["decided"].dump()
                << " oracle=" << it.value()["oracle"].dump()
                << (it.value()["agree"].get<bool>() ? " (agree)" : " (DISAGREE)")
                << "\n";
    std::cout << (cmp.disagreement ? "DISAGREEMENT\n" : "all checks agree\n");
  }
  return cmp.disagreement ? 1 : 0;
}

int cmd_corpus_check(const std::string& dir, const Options& opt) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json")
      files.push_back(e.path());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });

  auto budgets = opt.budgets();
  nlohmann::json results = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();
  bool disagreement = false;
  for (const auto& f : files) {
    // group files and other support JSON are skipped, not failures
    nlohmann::json raw;
    {
      std::ifstream in(f);
      try {
        in >> raw;
      } catch (const nlohmann::json::exception& e) {
        failures.push_back({{"file", f.filename().string()}, {"error", e.what()}});
        continue;
      }
    }
    if (!raw.is_object() || !raw.contains("endomorphisms")) continue;
    try {
      Gca F = load_gca_file(f);
      auto rep = full_report(F, budgets);
      auto cmp = compare_with_oracles(F, rep, budgets);
      nlohmann::json entry;
      entry["file"] = f.filename().string();
      entry["report"] = report_to_json(rep, /*with_tree=*/false);
      entry["oracle_checks"] = cmp.detail;
      entry["agreement"] = !cmp.disagreement;
      if (cmp.disagreement) disagreement = true;
      results.push_back(std::move(entry));
    } catch (const Error& e) {
      failures.push_back({{"file", f.filename().string()}, {"error", e.what()}});
    }
  }
  nlohmann::json j;
  j["results"] = std::move(results);
  j["load_failures"] = std::move(failures);
  j["agreement"] = !disagreement;
  std::cout << j.dump(2) << "\n";
  return disagreement ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analyzer for one-dimensional cellular automata over finite groups"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  app.add_option("--endo-budget", opt.endo_budget,
                 "max group order for endomorphism enumeration");
  app.add_option("--oracle-budget", opt.oracle_budget,
                 "max de Bruijn state count for the brute-force oracles");
  app.add_option("--power-budget", opt.power_budget,
                 "max compositions in power-sequence scans");

  std::string path, prop, cells, pgm, dir;
  std::size_t steps = 32, period = 32;
  std::uint64_t seed = 1;
  bool no_refine = false;

  auto* validate = app.add_subcommand("validate", "check a GCA file");
  validate->add_option("file", path)->required();

  auto* decompose = app.add_subcommand("decompose", "iterated-quotient decomposition");
  decompose->add_option("file", path)->required();
  decompose->add_flag("--no-refine-abelian", no_refine,
                      "keep abelian leaves whole instead of splitting to (Z_p)^k");

  auto* decide = app.add_subcommand("decide", "decide a dynamical property");
  decide->add_option("property", prop)->required();
  decide->add_option("file", path)->required();

  auto* entropy = app.add_subcommand("entropy", "topological entropy");
  entropy->add_option("file", path)->required();

  auto* simulate = app.add_subcommand("simulate", "run a space-time diagram");
  simulate->add_option("file", path)->required();
  simulate->add_option("--steps", steps, "number of time steps")->capture_default_str();
  simulate->add_option("--period", period, "period of a random initial configuration")
      ->capture_default_str();
  simulate->add_option("--config", cells,
                       "explicit initial configuration (space/comma separated)");
  simulate->add_option("--seed", seed, "RNG seed for the random configuration")
      ->capture_default_str();
  simulate->add_option("--pgm", pgm, "write the diagram as a binary PGM image");

  auto* oracle = app.add_subcommand("oracle-check",
                                    "cross-check verdicts against brute force");
  oracle->add_option("file", path)->required();

  auto* report = app.add_subcommand("report", "full property report");
  report->add_option("file", path)->required();

  auto* corpus = app.add_subcommand("corpus-check",
                                    "check every GCA file in a directory");
  corpus->add_option("dir", dir)->required();

  // allow the global options (--format, budgets) after the subcommand too
  for (auto* s : {validate, decompose, decide, entropy, simulate, oracle, report, corpus})
    s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(validate)) return cmd_validate(path, opt);
    if (app.got_subcommand(decompose)) return cmd_decompose(path, no_refine, opt);
    if (app.got_subcommand(decide)) return cmd_decide(prop, path, opt);
    if (app.got_subcommand(entropy)) return cmd_entropy(path, opt);
    if (app.got_subcommand(simulate))
      return cmd_simulate(path, steps, period, cells, seed, pgm, opt);
    if (app.got_subcommand(oracle)) return cmd_oracle_check(path, opt);
    if (app.got_subcommand(report)) return cmd_report(path, opt);
    if (app.got_subcommand(corpus)) return cmd_corpus_check(dir, opt);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const gcalab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
