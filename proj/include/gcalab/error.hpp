#pragma once

#include <stdexcept>
#include <string>

namespace gcalab {

// Error kinds surfaced by validators and deciders. Each carries a
// human-readable message naming the witnessing elements.
enum class ErrorKind {
  NotClosed,
  NotAssociative,
  NoIdentity,
  NoInverse,
  NotNormal,
  NotInvariant,
  NotEndomorphism,
  ImagesDoNotCommute,
  NotElementaryAbelian,
  NotSurjective,
  StructureViolation,
  PreconditionViolated,
  BudgetExceeded,
  DecompositionStuck,
  BadInput,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::NotAssociative: return "NotAssociative";
    case ErrorKind::NoIdentity: return "NoIdentity";
    case ErrorKind::NoInverse: return "NoInverse";
    case ErrorKind::NotNormal: return "NotNormal";
    case ErrorKind::NotInvariant: return "NotInvariant";
    case ErrorKind::NotEndomorphism: return "NotEndomorphism";
    case ErrorKind::ImagesDoNotCommute: return "ImagesDoNotCommute";
    case ErrorKind::NotElementaryAbelian: return "NotElementaryAbelian";
    case ErrorKind::NotSurjective: return "NotSurjective";
    case ErrorKind::StructureViolation: return "StructureViolation";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::DecompositionStuck: return "DecompositionStuck";
    case ErrorKind::BadInput: return "BadInput";
  }
  return "Unknown";
}

// Three-valued truth: Unknown is a first-class outcome, used where the
// underlying question is open or a search budget ran out.
enum class Tri { False = 0, True = 1, Unknown = 2 };

inline const char* tri_name(Tri t) {
  switch (t) {
    case Tri::False: return "false";
    case Tri::True: return "true";
    case Tri::Unknown: return "unknown";
  }
  return "unknown";
}

// Enumeration budgets. Defaults keep every exhaustive search at desk scale;
// all of them are overridable from the CLI.
struct Budgets {
  std::size_t endo_group_order = 256;    // max |G| for End(G) enumeration
  std::size_t subgroup_group_order = 256;
  std::size_t subgroup_count = 100000;
  std::size_t oracle_states = 65536;     // max q^(2*rho) for de Bruijn graphs
  std::size_t oracle_pair_states = 2000000;
  std::size_t power_budget = 256;        // max compositions in power-sequence scans
  std::size_t seed_budget = 1u << 24;    // max enumerated seeds for rectangle counts
};

}  // namespace gcalab
