#ifndef FOBN_ESO_HPP
#define FOBN_ESO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fobn/logic.hpp"
#include "fobn/model.hpp"

namespace fobn {

// Existential second-order sentence: an existential block of predicates in
// front of a first-order matrix. The matrix is closed and is parsed against
// the combined vocabulary (input predicates first, quantified after).
struct EsoSentence {
  Vocabulary input_vocab;
  std::vector<Predicate> quantified;
  FormulaPtr matrix;

  Vocabulary combined_vocab() const;
};

// Text form:
//   input edge/2.
//   quantified partition/1.
//   matrix forall x: forall y: edge(x, y) -> (partition(x) <-> !partition(y)).
EsoSentence parse_eso(const std::string& text);

// True iff some interpretation of the quantified predicates makes the
// matrix true in the extended structure. Exhaustive over all
// 2^(sum n^arity) candidate interpretations; throws ResourceCapError when
// that count exceeds `max_candidates`.
bool eso_check(const EsoSentence& sentence, const Structure& structure,
               std::uint64_t max_candidates = std::uint64_t(1) << 24);

} // namespace fobn

#endif
