#ifndef FOBN_MODEL_HPP
#define FOBN_MODEL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fobn/logic.hpp"

namespace fobn {

enum class Tristate : std::uint8_t { False = 0, True = 1, Unassigned = 2 };

// Total truth assignment for every grounding of every predicate of a
// vocabulary over a domain. Groundings are addressed by lexicographic
// tuple rank.
class Interpretation {
public:
  Interpretation() = default;
  Interpretation(const Vocabulary& vocab, const Domain& domain);

  bool get(PredId pred, std::uint64_t rank) const;
  bool get(PredId pred, const std::vector<int>& tuple) const;
  void set(PredId pred, std::uint64_t rank, bool value);
  void set(PredId pred, const std::vector<int>& tuple, bool value);

  std::uint64_t groundings(PredId pred) const { return truth_[pred].size(); }
  int domain_size() const { return n_; }

  bool operator==(const Interpretation& o) const = default;

private:
  int n_ = 0;
  std::vector<std::vector<std::uint8_t>> truth_;
};

struct Structure {
  Vocabulary vocab;
  Domain domain;
  Interpretation interp;

  Structure(Vocabulary v, Domain d)
      : vocab(std::move(v)), domain(d), interp(vocab, domain) {}

  bool operator==(const Structure& o) const = default;
};

// Three-valued partial interpretation; everything starts unassigned.
class EvidencePiece {
public:
  EvidencePiece() : domain_(1) {}
  EvidencePiece(Vocabulary vocab, Domain domain);

  Tristate get(PredId pred, std::uint64_t rank) const;
  Tristate get(PredId pred, const std::vector<int>& tuple) const;
  void set(PredId pred, std::uint64_t rank, Tristate value);
  void set(PredId pred, const std::vector<int>& tuple, Tristate value);

  const Vocabulary& vocab() const { return vocab_; }
  const Domain& domain() const { return domain_; }
  std::uint64_t groundings(PredId pred) const { return status_[pred].size(); }

  // Number of groundings carrying an assignment (true or false).
  std::uint64_t assigned_count() const;

  bool operator==(const EvidencePiece& o) const = default;

private:
  Vocabulary vocab_;
  Domain domain_;
  std::vector<std::vector<Tristate>> status_;
};

// --- evaluation ------------------------------------------------------------

using Binding = std::map<std::string, int>;

// Tarskian truth of `f` in `structure` under `binding`; equality is
// identity on domain elements. Throws DomainError on an unbound free
// variable or a constant outside the domain.
bool evaluate(const FormulaPtr& f, const Structure& structure,
              const Binding& binding = {});

// --- text format -----------------------------------------------------------
// `domain N;` followed by lines `pred(i, j) = true|false;`. Unlisted
// groundings are false in a structure, unassigned in an evidence piece.

Structure parse_structure_text(const std::string& text,
                               const Vocabulary& vocab);
EvidencePiece parse_evidence_text(const std::string& text,
                                  const Vocabulary& vocab);
std::string print_structure_text(const Structure& s);
std::string print_evidence_text(const EvidencePiece& e);

// --- isomorphism of domain/evidence pairs ------------------------------------

// Bijection on domain elements; preserves three-valued status of every
// grounding in both directions.
struct IsoWitness {
  std::vector<int> map;  // element -> image
  std::vector<int> inverse() const;
};

bool iso_preserves_status(const EvidencePiece& p1, const EvidencePiece& p2,
                          const std::vector<int>& g);

// Relabels every grounding of `e` through `g` (tuple (a..) becomes
// (g(a)..) in the result).
EvidencePiece apply_permutation(const EvidencePiece& e,
                                const std::vector<int>& g);

// Searches all n! bijections; nullopt when the pairs are not isomorphic
// (different domain sizes included). Throws ResourceCapError when the
// domain exceeds `max_domain_for_search`.
std::optional<IsoWitness> find_isomorphism(const EvidencePiece& p1,
                                           const EvidencePiece& p2,
                                           int max_domain_for_search = 8);

} // namespace fobn

#endif
