#ifndef FOBN_CAPTURE_HPP
#define FOBN_CAPTURE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fobn/codec.hpp"
#include "fobn/infer.hpp"
#include "fobn/model.hpp"
#include "fobn/rational.hpp"
#include "fobn/spec.hpp"

namespace fobn {

enum class TapeSym : std::uint8_t { S0 = 0, S1 = 1, Blank = 2 };
enum class Move : std::uint8_t { Left, Right, Stay };

struct MachineChoice {
  int state = -1;
  TapeSym write = TapeSym::Blank;
  Move move = Move::Stay;
  bool operator==(const MachineChoice& o) const = default;
};

// Single-tape nondeterministic machine with explicit transition relation
// and polynomial time/space exponents: T = n^kt steps over S = n^kp cells.
struct NTMachine {
  std::vector<std::string> state_names;
  int initial = -1;
  int accept = -1;
  int reject = -1;
  // transitions[state][symbol]; exactly two choices after normalization.
  std::vector<std::array<std::vector<MachineChoice>, 3>> transitions;
  int time_exp = 1;
  std::optional<int> space_exp;  // nullopt: derived from the input layout
  bool normalized = false;

  int state_count() const { return static_cast<int>(state_names.size()); }
  std::optional<int> find_state(const std::string& name) const;
};

// Lines: `state <name> [initial|accept|reject]`,
// `trans <q>, <0|1|_> -> <q'>, <0|1|_>, <L|R|S>`, `bounds kt=<int> kp=<int|auto>`.
NTMachine parse_machine(const std::string& text);

// Exactly two choices per (state, symbol): singletons are duplicated,
// larger sets rejected; accept/reject become absorbing self-loops.
NTMachine normalize_machine(const NTMachine& machine);

struct PathCount {
  std::uint64_t accepting = 0;
  std::uint64_t total = 0;
  bool operator==(const PathCount& o) const = default;
};

struct CountOptions {
  // A move off the tape freezes the configuration; by default the path is
  // permanently non-accepting, with `clamp` it continues with the head
  // clamped to the boundary cell.
  bool clamp = false;
  std::uint64_t max_paths = std::uint64_t(1) << 22;
};

// Exhaustive walk of the depth-T binary choice tree, T = n^kt. The input
// code is placed on cells 0..len-1 (truncated at S cells), blanks beyond;
// a path accepts when the machine is in the accept state after T steps.
PathCount count_paths(const NTMachine& machine, int domain_size,
                      const BitString& input_bits,
                      const CountOptions& options = {});

enum class Majority { Accept, Reject };

// Accept iff accepting/total > 1/2, strictly.
Majority majority_decision(const PathCount& count);

// Closed formula forcing `less_than` to be a strict total order:
// irreflexive, transitive, and total on distinct elements.
FormulaPtr build_order_formula(const Vocabulary& vocab, PredId less_than);

struct CaptureLayout {
  int k_t = 1;
  int k_p = 1;
  PredId less_than = -1;
  PredId choice = -1;
  std::vector<PredId> state_preds;   // aligned with machine states
  PredId head = -1;
  std::array<PredId, 3> tape{};      // tape_0, tape_1, tape_blank
  std::vector<PredId> match;         // aligned with sigma predicates
  PredId accepted = -1;              // conditioned A
  PredId valid = -1;                 // conditioning B
};

// Machine compiled into a network specification over sigma plus auxiliary
// predicates, all roots at 1/2, with `valid` asserting a total order and a
// well-formed computation and `accepted` asserting the run accepts.
struct CompiledCapture {
  NTMachine machine;
  NetworkSpec spec;
  AcceptanceQuery query;
  CaptureLayout layout;
};

// kp is taken from the machine when fixed; otherwise the smallest kp with
// n^kp >= pair-encoding length for every target size 2..max(2, max_n)
// (size 1 cannot hold any code and is served by truncation).
CompiledCapture compile_machine(const NTMachine& machine,
                                const Vocabulary& sigma, int max_n = 2);

// P(accepted | valid, evidence) computed without grounding: enumerate the
// n! orders, the completions of unassigned sigma groundings and the 2^T
// choice strings, and simulate the machine on the per-order encoding.
// Equals the grounded-network conditional exactly.
std::optional<Rational> structured_conditional(const CompiledCapture& compiled,
                                               const Domain& domain,
                                               const EvidencePiece& evidence);

struct VerifyMismatch {
  int n = 0;
  BitString pair_code;
  PathCount machine_count;
  Majority machine_side = Majority::Reject;
  bool spec_accepts = false;
  Rational spec_probability;
};

struct VerifyReport {
  struct PerDomain {
    int n = 0;
    std::uint64_t pieces = 0;
  };
  std::vector<PerDomain> checked;
  std::vector<VerifyMismatch> mismatches;
  std::uint64_t cross_checks = 0;
  bool ok() const { return mismatches.empty(); }
};

struct VerifyOptions {
  std::uint64_t max_pieces = 200000;
  // Also run the generic grounded-network engine and demand exact rational
  // agreement with the structured counter.
  bool cross_check = false;
  EngineOptions engine{.max_roots = 128};
  CountOptions count;
};

// For every domain size up to max_n and every evidence piece over sigma,
// checks that the majority decision of the machine on the encoded pair
// equals the spec-side acceptance decision.
VerifyReport verify_capture(const NTMachine& machine, const Vocabulary& sigma,
                            int max_n, const VerifyOptions& options = {});

} // namespace fobn

#endif
