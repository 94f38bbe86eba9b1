#ifndef FOBN_SPEC_HPP
#define FOBN_SPEC_HPP

#include <optional>
#include <string>
#include <vector>

#include "fobn/logic.hpp"
#include "fobn/rational.hpp"

namespace fobn {

// Root predicate with its Bernoulli assessment, shared by all groundings.
struct RootDeclaration {
  PredId pred = -1;
  Rational alpha;
};

// Non-root predicate with its iff-definition s(head) <=> body.
struct Definition {
  PredId pred = -1;
  std::vector<std::string> head_vars;
  FormulaPtr body;
};

struct AcceptanceQuery {
  std::vector<PredId> conditioned;   // A_1..A_m'
  std::vector<PredId> conditioning;  // B_1..B_m''
};

// First-order Bayesian network specification: ordered predicates, each
// either a root with an assessment or defined by a formula over
// earlier-stratum predicates.
struct NetworkSpec {
  Vocabulary vocabulary;
  std::vector<RootDeclaration> roots;
  std::vector<Definition> definitions;

  // Input vocabulary sigma: the declared `vocabulary` block when present,
  // otherwise every predicate. Codecs and evidence are restricted to it.
  std::vector<PredId> sigma;
  bool sigma_declared = false;

  std::optional<AcceptanceQuery> query;

  bool is_root(PredId p) const;
  const RootDeclaration* root_of(PredId p) const;
  const Definition* definition_of(PredId p) const;
  Vocabulary sigma_vocab() const;
};

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string message;
  std::string location;  // predicate or statement the message refers to
};

struct ValidationReport {
  std::vector<Diagnostic> diagnostics;
  bool ok() const;
  std::string to_string() const;
};

NetworkSpec parse_spec(const std::string& text);

ValidationReport validate_spec(const NetworkSpec& spec);

// Edge q -> s whenever q occurs in the definition body of s.
struct DependencyGraph {
  std::vector<std::vector<PredId>> out;  // indexed by predicate
};

DependencyGraph predicate_dependency_graph(const NetworkSpec& spec);

// Predicates ordered so every definition body mentions only strictly
// earlier ones; nullopt when the dependency graph has a cycle.
std::optional<std::vector<PredId>> topological_order(const NetworkSpec& spec);

// Canonical DSL text; parse_spec(print_spec(s)) reproduces s exactly.
std::string print_spec(const NetworkSpec& spec);

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b);

} // namespace fobn

#endif
