#ifndef FOBN_GROUND_HPP
#define FOBN_GROUND_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fobn/model.hpp"
#include "fobn/spec.hpp"

namespace fobn {

// Index of a ground atom in canonical order: predicates by declaration
// index, tuples by lexicographic rank.
using AtomId = std::int64_t;

struct GroundAtom {
  PredId pred = -1;
  std::vector<int> tuple;
  bool operator==(const GroundAtom& o) const = default;
};

// Variable-free formulas over ground atoms, pooled in one arena. Equalities
// are folded to True/False leaves at grounding time; atoms are kept even
// under constant guards so parent sets match the full quantifier expansion.
class GroundPool {
public:
  enum class Op : std::uint8_t { True, False, Atom, Not, And, Or, Implies, Iff };
  struct Node {
    Op op;
    std::int32_t a = -1;  // child / atom id (as int32)
    std::int32_t b = -1;  // right child
  };

  std::int32_t add(Op op, std::int32_t a = -1, std::int32_t b = -1);
  const Node& operator[](std::int32_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }

  // Kleene evaluation over a value array indexed by AtomId
  // (0 false, 1 true, 2 unknown); short-circuits.
  Tristate eval3(std::int32_t node, const std::vector<std::uint8_t>& values) const;
  // Two-valued evaluation when every referenced atom is assigned.
  bool eval2(std::int32_t node, const std::vector<std::uint8_t>& values) const;

  void collect_atoms(std::int32_t node, std::vector<AtomId>& out) const;

private:
  std::vector<Node> nodes_;
};

struct GroundNode {
  GroundAtom atom;
  bool is_root = false;
  Rational alpha;            // roots
  std::int32_t def = -1;     // defined: node index into the pool
};

struct NetworkStats {
  std::uint64_t nodes = 0;
  std::uint64_t edges = 0;
  std::uint64_t roots = 0;
  bool operator==(const NetworkStats& o) const = default;
};

// Explicit Bayesian network over ground atoms.
class GroundedNetwork {
public:
  const NetworkSpec& spec() const { return spec_; }
  const Domain& domain() const { return domain_; }

  AtomId atom_count() const { return total_atoms_; }
  AtomId atom_id(PredId pred, const std::vector<int>& tuple) const;
  GroundAtom atom(AtomId id) const;
  std::string atom_name(AtomId id) const;

  bool is_root(AtomId id) const { return def_[id] < 0; }
  const Rational& alpha(AtomId id) const;
  std::int32_t definition(AtomId id) const { return def_[id]; }
  const std::vector<AtomId>& parents(AtomId id) const { return parents_[id]; }

  const std::vector<AtomId>& root_atoms() const { return root_atoms_; }
  // Defined atoms ordered so every definition sees assigned parents.
  const std::vector<AtomId>& defined_topo() const { return defined_topo_; }

  const GroundPool& pool() const { return pool_; }

  NetworkStats stats() const;
  std::string to_dot() const;

  friend GroundedNetwork ground(const NetworkSpec&, const Domain&,
                                std::uint64_t);

private:
  GroundedNetwork(NetworkSpec spec, Domain domain)
      : spec_(std::move(spec)), domain_(domain) {}

  NetworkSpec spec_;
  Domain domain_;
  std::vector<std::uint64_t> offsets_;  // per predicate, plus total
  AtomId total_atoms_ = 0;
  std::vector<std::int32_t> def_;       // -1 for roots
  std::vector<Rational> alpha_;         // per atom; zero for defined
  std::vector<std::vector<AtomId>> parents_;
  std::vector<AtomId> root_atoms_;
  std::vector<AtomId> defined_topo_;
  GroundPool pool_;
};

// Grounds a validated specification over a domain. Throws DomainError if
// the spec does not validate and ResourceCapError when the total number of
// ground atoms exceeds `max_atoms`.
GroundedNetwork ground(const NetworkSpec& spec, const Domain& domain,
                       std::uint64_t max_atoms = std::uint64_t(1) << 22);

// Parent atoms of one grounding; throws DomainError for an unknown atom.
std::vector<GroundAtom> node_parents(const GroundedNetwork& network,
                                     const GroundAtom& atom);

} // namespace fobn

#endif
