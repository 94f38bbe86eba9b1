#ifndef FOBN_INFER_HPP
#define FOBN_INFER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "fobn/ground.hpp"
#include "fobn/model.hpp"
#include "fobn/rational.hpp"
#include "fobn/spec.hpp"

namespace fobn {

// Consistent partial assignment over ground atoms.
class EventSpec {
public:
  void require(AtomId atom, bool value);
  const std::vector<std::pair<AtomId, bool>>& assignments() const {
    return assignments_;
  }
  bool empty() const { return assignments_.empty(); }

private:
  std::vector<std::pair<AtomId, bool>> assignments_;
};

struct EngineOptions {
  // Refuse when more than this many roots are relevant to the query.
  std::uint64_t max_roots = 40;
  // Refuse when the pruned search expands more than this many nodes.
  std::uint64_t max_search_nodes = std::uint64_t(200) << 20;
  int jobs = 1;
};

// Deterministic completion: root values extended to every defined atom by
// evaluating grounded definitions in topological order. `root_bits` is
// aligned with network.root_atoms(). Returns one value per atom.
std::vector<std::uint8_t> complete_values(const GroundedNetwork& network,
                                          const std::vector<std::uint8_t>& root_bits);

Interpretation complete_from_roots(const GroundedNetwork& network,
                                   const std::vector<std::uint8_t>& root_bits);

// Sum over root assignments whose completion satisfies the event, of the
// product over roots of alpha (true) or 1 - alpha (false). The search
// enumerates only roots the event depends on and prunes assignments whose
// partial completion already contradicts the event; the value equals the
// full 2^#roots enumeration exactly.
Rational event_probability(const GroundedNetwork& network,
                           const EventSpec& event,
                           const EngineOptions& options = {});

// P(target | given); nullopt when P(given) = 0. Throws DomainError on a
// contradictory overlap between target and given.
std::optional<Rational> conditional_probability(const GroundedNetwork& network,
                                                const EventSpec& target,
                                                const EventSpec& given,
                                                const EngineOptions& options = {});

struct AcceptanceDecision {
  enum class Kind { Accept, Reject, Undefined };
  Kind kind = Kind::Undefined;
  std::optional<Rational> probability;  // present unless Undefined
};

// Acceptance per the >1/2 rule: A assigns true to every grounding of the
// conditioned predicates, B to every grounding of the conditioning
// predicates; Accept iff P(A | B, E) > 1/2, Undefined when P(B, E) = 0.
// Evidence predicates must belong to the spec's input vocabulary sigma.
AcceptanceDecision decide_acceptance(const NetworkSpec& spec,
                                     const AcceptanceQuery& query,
                                     const Domain& domain,
                                     const EvidencePiece& evidence,
                                     const EngineOptions& options = {});

AcceptanceDecision decide_acceptance(const GroundedNetwork& network,
                                     const AcceptanceQuery& query,
                                     const EvidencePiece& evidence,
                                     const EngineOptions& options = {});

} // namespace fobn

#endif
