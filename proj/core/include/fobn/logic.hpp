#ifndef FOBN_LOGIC_HPP
#define FOBN_LOGIC_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fobn {

using PredId = int;

struct Predicate {
  std::string name;
  int arity = 0;
  bool operator==(const Predicate& o) const = default;
};

// Ordered list of predicates. The declaration order is total and fixed;
// it determines the layout of every codec and the canonical atom order.
class Vocabulary {
public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<Predicate> preds);

  PredId add(const Predicate& p);
  std::optional<PredId> find(const std::string& name) const;

  const Predicate& operator[](PredId id) const { return preds_[id]; }
  int size() const { return static_cast<int>(preds_.size()); }
  const std::vector<Predicate>& predicates() const { return preds_; }

  bool operator==(const Vocabulary& o) const { return preds_ == o.preds_; }

private:
  std::vector<Predicate> preds_;
};

// Domains are canonical: elements are 0..size-1 and the numeric order is
// the encoding order.
struct Domain {
  int size = 0;
  explicit Domain(int n);
  bool operator==(const Domain& o) const = default;
};

// --- tuple enumeration -----------------------------------------------------

std::uint64_t int_pow(std::uint64_t base, int exp);

// Lexicographic rank of a k-tuple over 0..n-1 (row-major).
std::uint64_t tuple_rank(const std::vector<int>& tuple, int n);
std::vector<int> tuple_unrank(std::uint64_t rank, int n, int k);

// All n^k tuples in lexicographic order; k = 0 yields one empty tuple.
std::vector<std::vector<int>> enumerate_tuples(const Domain& domain, int k);

// --- formulas ---------------------------------------------------------------

struct Term {
  enum class Kind { Variable, Constant };
  Kind kind = Kind::Variable;
  std::string var;
  int value = 0;

  static Term variable(std::string name);
  static Term constant(int value);
  bool operator==(const Term& o) const = default;
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// AST of function-free first-order logic with equality. Immutable;
// subtrees are shared freely.
class Formula {
public:
  enum class Kind { Atom, Equal, Not, And, Or, Implies, Iff, Forall, Exists };

  Kind kind;
  PredId pred = -1;            // Atom
  std::vector<Term> args;      // Atom
  Term lhs, rhs;               // Equal
  FormulaPtr left, right;      // binary connectives; Not/quantifier use left
  std::string var;             // quantifier variable

  static FormulaPtr atom(PredId pred, std::vector<Term> args);
  static FormulaPtr equal(Term lhs, Term rhs);
  static FormulaPtr negation(FormulaPtr f);
  static FormulaPtr conj(FormulaPtr l, FormulaPtr r);
  static FormulaPtr disj(FormulaPtr l, FormulaPtr r);
  static FormulaPtr implies(FormulaPtr l, FormulaPtr r);
  static FormulaPtr iff(FormulaPtr l, FormulaPtr r);
  static FormulaPtr forall(std::string var, FormulaPtr body);
  static FormulaPtr exists(std::string var, FormulaPtr body);

  // Left fold; nullptr children are skipped, empty input yields nullptr
  // ("trivially true"/"trivially false" in builder context).
  static FormulaPtr conj_all(const std::vector<FormulaPtr>& fs);
  static FormulaPtr disj_all(const std::vector<FormulaPtr>& fs);

  // Closed formulas with constant truth value on every non-empty domain.
  static FormulaPtr always_true();
  static FormulaPtr always_false();
};

std::set<std::string> free_variables(const FormulaPtr& f);

// Parses the ASCII formula DSL against a vocabulary. Operator precedence is
// ! > & > | > -> > <->, quantifier bodies extend maximally to the right.
FormulaPtr parse_formula(const std::string& text, const Vocabulary& vocab);

std::string print_formula(const FormulaPtr& f, const Vocabulary& vocab);

} // namespace fobn

#endif
