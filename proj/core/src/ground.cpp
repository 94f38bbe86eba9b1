#include "fobn/ground.hpp"

#include <algorithm>
#include <sstream>

#include "fobn/errors.hpp"

namespace fobn {

// --- pool ----------------------------------------------------------------

std::int32_t GroundPool::add(Op op, std::int32_t a, std::int32_t b) {
  nodes_.push_back({op, a, b});
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

namespace {
inline Tristate tri_not(Tristate t) {
  if (t == Tristate::Unassigned) return t;
  return t == Tristate::True ? Tristate::False : Tristate::True;
}
} // namespace

Tristate GroundPool::eval3(std::int32_t node,
                           const std::vector<std::uint8_t>& values) const {
  const Node& nd = nodes_[node];
  switch (nd.op) {
    case Op::True: return Tristate::True;
    case Op::False: return Tristate::False;
    case Op::Atom: return static_cast<Tristate>(values[nd.a]);
    case Op::Not: return tri_not(eval3(nd.a, values));
    case Op::And: {
      Tristate l = eval3(nd.a, values);
      if (l == Tristate::False) return Tristate::False;
      Tristate r = eval3(nd.b, values);
      if (r == Tristate::False) return Tristate::False;
      if (l == Tristate::True && r == Tristate::True) return Tristate::True;
      return Tristate::Unassigned;
    }
    case Op::Or: {
      Tristate l = eval3(nd.a, values);
      if (l == Tristate::True) return Tristate::True;
      Tristate r = eval3(nd.b, values);
      if (r == Tristate::True) return Tristate::True;
      if (l == Tristate::False && r == Tristate::False) return Tristate::False;
      return Tristate::Unassigned;
    }
    case Op::Implies: {
      Tristate l = eval3(nd.a, values);
      if (l == Tristate::False) return Tristate::True;
      Tristate r = eval3(nd.b, values);
      if (r == Tristate::True) return Tristate::True;
      if (l == Tristate::True && r == Tristate::False) return Tristate::False;
      return Tristate::Unassigned;
    }
    case Op::Iff: {
      Tristate l = eval3(nd.a, values);
      if (l == Tristate::Unassigned) return l;
      Tristate r = eval3(nd.b, values);
      if (r == Tristate::Unassigned) return r;
      return l == r ? Tristate::True : Tristate::False;
    }
  }
  throw Error("unreachable ground op");
}

bool GroundPool::eval2(std::int32_t node,
                       const std::vector<std::uint8_t>& values) const {
  const Node& nd = nodes_[node];
  switch (nd.op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Atom: return values[nd.a] != 0;
    case Op::Not: return !eval2(nd.a, values);
    case Op::And: return eval2(nd.a, values) && eval2(nd.b, values);
    case Op::Or: return eval2(nd.a, values) || eval2(nd.b, values);
    case Op::Implies: return !eval2(nd.a, values) || eval2(nd.b, values);
    case Op::Iff: return eval2(nd.a, values) == eval2(nd.b, values);
  }
  throw Error("unreachable ground op");
}

void GroundPool::collect_atoms(std::int32_t node,
                               std::vector<AtomId>& out) const {
  const Node& nd = nodes_[node];
  switch (nd.op) {
    case Op::True:
    case Op::False:
      return;
    case Op::Atom:
      out.push_back(nd.a);
      return;
    case Op::Not:
      collect_atoms(nd.a, out);
      return;
    default:
      collect_atoms(nd.a, out);
      collect_atoms(nd.b, out);
  }
}

// --- network accessors ------------------------------------------------------

AtomId GroundedNetwork::atom_id(PredId pred,
                                const std::vector<int>& tuple) const {
  return static_cast<AtomId>(offsets_[pred] +
                             tuple_rank(tuple, domain_.size));
}

GroundAtom GroundedNetwork::atom(AtomId id) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(),
                             static_cast<std::uint64_t>(id));
  PredId pred = static_cast<PredId>(it - offsets_.begin() - 1);
  std::uint64_t rank = id - offsets_[pred];
  return {pred,
          tuple_unrank(rank, domain_.size, spec_.vocabulary[pred].arity)};
}

std::string GroundedNetwork::atom_name(AtomId id) const {
  GroundAtom a = atom(id);
  std::string out = spec_.vocabulary[a.pred].name;
  if (!a.tuple.empty()) {
    out += '(';
    for (std::size_t i = 0; i < a.tuple.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(a.tuple[i]);
    }
    out += ')';
  }
  return out;
}

const Rational& GroundedNetwork::alpha(AtomId id) const {
  if (!is_root(id)) throw DomainError("atom is not a root");
  return alpha_[id];
}

NetworkStats GroundedNetwork::stats() const {
  NetworkStats s;
  s.nodes = static_cast<std::uint64_t>(total_atoms_);
  s.roots = root_atoms_.size();
  for (const auto& p : parents_) s.edges += p.size();
  return s;
}

std::string GroundedNetwork::to_dot() const {
  std::ostringstream os;
  os << "digraph fobn {\n";
  for (AtomId id = 0; id < total_atoms_; ++id)
    os << "  \"" << atom_name(id) << "\";\n";
  for (AtomId id = 0; id < total_atoms_; ++id)
    for (AtomId p : parents_[id])
      os << "  \"" << atom_name(p) << "\" -> \"" << atom_name(id) << "\";\n";
  os << "}\n";
  return os.str();
}

// --- grounding ----------------------------------------------------------------

namespace {

using Op = GroundPool::Op;

struct Grounder {
  const NetworkSpec& spec;
  const Domain& domain;
  const std::vector<std::uint64_t>& offsets;
  GroundPool& pool;
  std::vector<std::pair<std::string, int>> scope;

  int resolve(const Term& t) {
    if (t.kind == Term::Kind::Constant) {
      if (t.value < 0 || t.value >= domain.size)
        throw DomainError("constant #" + std::to_string(t.value) +
                          " outside domain of size " +
                          std::to_string(domain.size));
      return t.value;
    }
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == t.var) return it->second;
    throw DomainError("unbound variable '" + t.var + "' in definition body");
  }

  bool is_const(std::int32_t n, bool& value) const {
    Op op = pool[n].op;
    if (op == Op::True) { value = true; return true; }
    if (op == Op::False) { value = false; return true; }
    return false;
  }

  std::int32_t constant(bool v) { return pool.add(v ? Op::True : Op::False); }

  // Identity folds only: a fold must never drop a subtree that contains
  // atoms, since parent sets are defined by the full expansion.
  std::int32_t combine(Op op, std::int32_t l, std::int32_t r) {
    bool lv, rv;
    bool lc = is_const(l, lv), rc = is_const(r, rv);
    if (lc && rc) {
      switch (op) {
        case Op::And: return constant(lv && rv);
        case Op::Or: return constant(lv || rv);
        case Op::Implies: return constant(!lv || rv);
        case Op::Iff: return constant(lv == rv);
        default: break;
      }
    }
    if (lc) {
      if (op == Op::And && lv) return r;
      if (op == Op::Or && !lv) return r;
      if (op == Op::Implies && lv) return r;
      if (op == Op::Iff && lv) return r;
      if (op == Op::Iff && !lv) return pool.add(Op::Not, r);
    }
    if (rc) {
      if (op == Op::And && rv) return l;
      if (op == Op::Or && !rv) return l;
      if (op == Op::Iff && rv) return l;
      if (op == Op::Iff && !rv) return pool.add(Op::Not, l);
    }
    return pool.add(op, l, r);
  }

  std::int32_t walk(const FormulaPtr& f) {
    switch (f->kind) {
      case Formula::Kind::Atom: {
        std::vector<int> tuple;
        tuple.reserve(f->args.size());
        for (const auto& a : f->args) tuple.push_back(resolve(a));
        std::uint64_t id = offsets[f->pred] + tuple_rank(tuple, domain.size);
        return pool.add(Op::Atom, static_cast<std::int32_t>(id));
      }
      case Formula::Kind::Equal:
        return constant(resolve(f->lhs) == resolve(f->rhs));
      case Formula::Kind::Not: {
        std::int32_t c = walk(f->left);
        bool v;
        if (is_const(c, v)) return constant(!v);
        return pool.add(Op::Not, c);
      }
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Implies:
      case Formula::Kind::Iff: {
        Op op = f->kind == Formula::Kind::And       ? Op::And
                : f->kind == Formula::Kind::Or      ? Op::Or
                : f->kind == Formula::Kind::Implies ? Op::Implies
                                                    : Op::Iff;
        std::int32_t l = walk(f->left);
        std::int32_t r = walk(f->right);
        return combine(op, l, r);
      }
      case Formula::Kind::Forall:
      case Formula::Kind::Exists: {
        Op op = f->kind == Formula::Kind::Forall ? Op::And : Op::Or;
        scope.emplace_back(f->var, 0);
        std::int32_t acc = -1;
        for (int v = 0; v < domain.size; ++v) {
          scope.back().second = v;
          std::int32_t c = walk(f->left);
          acc = acc < 0 ? c : combine(op, acc, c);
        }
        scope.pop_back();
        return acc;
      }
    }
    throw Error("unreachable formula kind");
  }
};

} // namespace

GroundedNetwork ground(const NetworkSpec& spec, const Domain& domain,
                       std::uint64_t max_atoms) {
  ValidationReport report = validate_spec(spec);
  if (!report.ok())
    throw DomainError("specification does not validate:\n" +
                      report.to_string());

  GroundedNetwork net(spec, domain);
  int n = domain.size;

  net.offsets_.resize(spec.vocabulary.size() + 1, 0);
  for (PredId p = 0; p < spec.vocabulary.size(); ++p) {
    std::uint64_t count = int_pow(n, spec.vocabulary[p].arity);
    net.offsets_[p + 1] = net.offsets_[p] + count;
    if (net.offsets_[p + 1] > max_atoms)
      throw ResourceCapError("grounding exceeds the atom cap of " +
                             std::to_string(max_atoms));
  }
  net.total_atoms_ = static_cast<AtomId>(net.offsets_.back());
  net.def_.assign(net.total_atoms_, -1);
  net.alpha_.assign(net.total_atoms_, Rational::zero());
  net.parents_.resize(net.total_atoms_);

  for (const auto& r : spec.roots) {
    std::uint64_t count = int_pow(n, spec.vocabulary[r.pred].arity);
    for (std::uint64_t j = 0; j < count; ++j) {
      AtomId id = static_cast<AtomId>(net.offsets_[r.pred] + j);
      net.alpha_[id] = r.alpha;
      net.root_atoms_.push_back(id);
    }
  }
  std::sort(net.root_atoms_.begin(), net.root_atoms_.end());

  Grounder g{spec, domain, net.offsets_, net.pool_, {}};
  for (const auto& d : spec.definitions) {
    int arity = spec.vocabulary[d.pred].arity;
    std::uint64_t count = int_pow(n, arity);
    for (std::uint64_t j = 0; j < count; ++j) {
      std::vector<int> tuple = tuple_unrank(j, n, arity);
      g.scope.clear();
      for (int i = 0; i < arity; ++i)
        g.scope.emplace_back(d.head_vars[i], tuple[i]);
      std::int32_t node = g.walk(d.body);
      AtomId id = static_cast<AtomId>(net.offsets_[d.pred] + j);
      net.def_[id] = node;
      std::vector<AtomId> atoms;
      net.pool_.collect_atoms(node, atoms);
      std::sort(atoms.begin(), atoms.end());
      atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
      net.parents_[id] = std::move(atoms);
    }
  }

  // Evaluation order: predicate-level topological order, ranks ascending.
  auto order = topological_order(spec);
  for (PredId p : *order) {
    if (spec.is_root(p)) continue;
    std::uint64_t count = int_pow(n, spec.vocabulary[p].arity);
    for (std::uint64_t j = 0; j < count; ++j)
      net.defined_topo_.push_back(static_cast<AtomId>(net.offsets_[p] + j));
  }
  return net;
}

std::vector<GroundAtom> node_parents(const GroundedNetwork& network,
                                     const GroundAtom& atom) {
  if (atom.pred < 0 || atom.pred >= network.spec().vocabulary.size())
    throw DomainError("unknown predicate in atom");
  if (static_cast<int>(atom.tuple.size()) !=
      network.spec().vocabulary[atom.pred].arity)
    throw DomainError("atom tuple does not match predicate arity");
  for (int el : atom.tuple)
    if (el < 0 || el >= network.domain().size)
      throw DomainError("atom tuple element outside the domain");
  AtomId id = network.atom_id(atom.pred, atom.tuple);
  std::vector<GroundAtom> out;
  for (AtomId p : network.parents(id)) out.push_back(network.atom(p));
  return out;
}

} // namespace fobn
