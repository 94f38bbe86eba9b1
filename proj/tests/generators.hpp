#ifndef FOBN_TESTS_GENERATORS_HPP
#define FOBN_TESTS_GENERATORS_HPP

#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fobn/ground.hpp"
#include "fobn/infer.hpp"
#include "fobn/logic.hpp"
#include "fobn/model.hpp"
#include "fobn/rational.hpp"
#include "fobn/spec.hpp"

namespace fobn::testing {

using Rng = std::mt19937_64;

inline std::string data_path(const std::string& name) {
  return std::string(FOBN_DATA_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

inline int pick(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Random formula over the vocabulary with the given candidate variables.
inline FormulaPtr random_formula(Rng& rng, const Vocabulary& vocab,
                                 const std::vector<std::string>& vars,
                                 int depth, bool constants = true) {
  auto term = [&]() {
    if (!vars.empty() && (!constants || pick(rng, 0, 4) > 0))
      return Term::variable(vars[pick(rng, 0, vars.size() - 1)]);
    return Term::constant(0);
  };
  if (depth <= 0 || pick(rng, 0, 5) == 0) {
    if (pick(rng, 0, 3) == 0 && !vars.empty())
      return Formula::equal(term(), term());
    PredId p = pick(rng, 0, vocab.size() - 1);
    std::vector<Term> args;
    for (int i = 0; i < vocab[p].arity; ++i) args.push_back(term());
    return Formula::atom(p, std::move(args));
  }
  switch (pick(rng, 0, 6)) {
    case 0:
      return Formula::negation(random_formula(rng, vocab, vars, depth - 1, constants));
    case 1:
      return Formula::conj(random_formula(rng, vocab, vars, depth - 1, constants),
                           random_formula(rng, vocab, vars, depth - 1, constants));
    case 2:
      return Formula::disj(random_formula(rng, vocab, vars, depth - 1, constants),
                           random_formula(rng, vocab, vars, depth - 1, constants));
    case 3:
      return Formula::implies(random_formula(rng, vocab, vars, depth - 1, constants),
                              random_formula(rng, vocab, vars, depth - 1, constants));
    case 4:
      return Formula::iff(random_formula(rng, vocab, vars, depth - 1, constants),
                          random_formula(rng, vocab, vars, depth - 1, constants));
    default: {
      std::string v = "v" + std::to_string(pick(rng, 0, 3));
      std::vector<std::string> inner = vars;
      inner.push_back(v);
      FormulaPtr body = random_formula(rng, vocab, inner, depth - 1, constants);
      return pick(rng, 0, 1) ? Formula::forall(v, body)
                             : Formula::exists(v, body);
    }
  }
}

inline Structure random_structure(Rng& rng, const Vocabulary& vocab, int n) {
  Structure s(vocab, Domain(n));
  for (PredId p = 0; p < vocab.size(); ++p) {
    std::uint64_t count = int_pow(n, vocab[p].arity);
    for (std::uint64_t r = 0; r < count; ++r)
      s.interp.set(p, r, pick(rng, 0, 1) == 1);
  }
  return s;
}

inline EvidencePiece random_evidence(Rng& rng, const Vocabulary& vocab,
                                     int n) {
  EvidencePiece e(vocab, Domain(n));
  for (PredId p = 0; p < vocab.size(); ++p) {
    std::uint64_t count = e.groundings(p);
    for (std::uint64_t r = 0; r < count; ++r)
      e.set(p, r, static_cast<Tristate>(pick(rng, 0, 2)));
  }
  return e;
}

inline Vocabulary random_vocabulary(Rng& rng, int max_preds = 3,
                                    int max_arity = 2) {
  Vocabulary v;
  int count = pick(rng, 1, max_preds);
  for (int i = 0; i < count; ++i)
    v.add({"p" + std::to_string(i), pick(rng, 0, max_arity)});
  return v;
}

// Random specification: a root layer and a defined layer over it.
inline NetworkSpec random_spec(Rng& rng, int max_roots = 3,
                               int max_defined = 2) {
  NetworkSpec spec;
  int roots = pick(rng, 1, max_roots);
  for (int i = 0; i < roots; ++i) {
    PredId id = spec.vocabulary.add({"r" + std::to_string(i),
                                     pick(rng, 0, 2)});
    spec.roots.push_back(
        {id, Rational(pick(rng, 0, 4), pick(rng, 5, 8))});
  }
  int defined = pick(rng, 1, max_defined);
  for (int i = 0; i < defined; ++i) {
    Vocabulary before = spec.vocabulary;  // bodies over earlier predicates
    int arity = pick(rng, 0, 2);
    PredId id = spec.vocabulary.add({"d" + std::to_string(i), arity});
    std::vector<std::string> head;
    for (int h = 0; h < arity; ++h) head.push_back("x" + std::to_string(h));
    // Definition bodies are kept constant-free so grounding commutes with
    // domain permutations; propositional heads quantify a helper variable
    // so terms always have one in scope.
    FormulaPtr body;
    if (head.empty())
      body = Formula::exists("z0",
                             random_formula(rng, before, {"z0"}, 2, false));
    else
      body = random_formula(rng, before, head, 2, false);
    spec.definitions.push_back({id, std::move(head), body});
  }
  spec.sigma.resize(spec.vocabulary.size());
  std::iota(spec.sigma.begin(), spec.sigma.end(), 0);
  return spec;
}

// Independent brute-force oracle: enumerates every root assignment,
// completes it with the formula evaluator (not the engine), and sums the
// weights of assignments satisfying the event.
inline Rational oracle_event_probability(const NetworkSpec& spec,
                                         const Domain& domain,
                                         const std::vector<std::pair<GroundAtom, bool>>& event) {
  auto order = topological_order(spec);
  if (!order) throw std::runtime_error("oracle needs an acyclic spec");

  struct RootSlot {
    PredId pred;
    std::uint64_t rank;
    Rational alpha;
  };
  std::vector<RootSlot> slots;
  for (PredId p = 0; p < spec.vocabulary.size(); ++p) {
    const RootDeclaration* r = spec.root_of(p);
    if (!r) continue;
    std::uint64_t count = int_pow(domain.size, spec.vocabulary[p].arity);
    for (std::uint64_t j = 0; j < count; ++j)
      slots.push_back({p, j, r->alpha});
  }
  if (slots.size() > 22)
    throw std::runtime_error("oracle limited to 22 root groundings");

  Rational total = Rational::zero();
  std::uint64_t combos = std::uint64_t(1) << slots.size();
  for (std::uint64_t mask = 0; mask < combos; ++mask) {
    Structure world(spec.vocabulary, domain);
    Rational weight = Rational::one();
    for (std::size_t i = 0; i < slots.size(); ++i) {
      bool v = (mask >> i) & 1;
      world.interp.set(slots[i].pred, slots[i].rank, v);
      weight *= v ? slots[i].alpha : Rational::one() - slots[i].alpha;
    }
    for (PredId p : *order) {
      const Definition* d = spec.definition_of(p);
      if (!d) continue;
      std::uint64_t count = int_pow(domain.size, spec.vocabulary[p].arity);
      for (std::uint64_t j = 0; j < count; ++j) {
        std::vector<int> tuple =
            tuple_unrank(j, domain.size, spec.vocabulary[p].arity);
        Binding binding;
        for (std::size_t h = 0; h < d->head_vars.size(); ++h)
          binding[d->head_vars[h]] = tuple[h];
        world.interp.set(p, j, evaluate(d->body, world, binding));
      }
    }
    bool ok = true;
    for (const auto& [atom, value] : event)
      if (world.interp.get(atom.pred, atom.tuple) != value) {
        ok = false;
        break;
      }
    if (ok) total += weight;
  }
  return total;
}

} // namespace fobn::testing

#endif
