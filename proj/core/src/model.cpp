#include "fobn/model.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "fobn/errors.hpp"
#include "lexer.hpp"

namespace fobn {

// --- interpretation ----------------------------------------------------------

Interpretation::Interpretation(const Vocabulary& vocab, const Domain& domain)
    : n_(domain.size) {
  truth_.reserve(vocab.size());
  for (const auto& p : vocab.predicates())
    truth_.emplace_back(int_pow(domain.size, p.arity), 0);
}

bool Interpretation::get(PredId pred, std::uint64_t rank) const {
  return truth_.at(pred).at(rank) != 0;
}

bool Interpretation::get(PredId pred, const std::vector<int>& tuple) const {
  return get(pred, tuple_rank(tuple, n_));
}

void Interpretation::set(PredId pred, std::uint64_t rank, bool value) {
  truth_.at(pred).at(rank) = value ? 1 : 0;
}

void Interpretation::set(PredId pred, const std::vector<int>& tuple,
                         bool value) {
  set(pred, tuple_rank(tuple, n_), value);
}

// --- evidence ----------------------------------------------------------------

EvidencePiece::EvidencePiece(Vocabulary vocab, Domain domain)
    : vocab_(std::move(vocab)), domain_(domain) {
  status_.reserve(vocab_.size());
  for (const auto& p : vocab_.predicates())
    status_.emplace_back(int_pow(domain_.size, p.arity),
                         Tristate::Unassigned);
}

Tristate EvidencePiece::get(PredId pred, std::uint64_t rank) const {
  return status_.at(pred).at(rank);
}

Tristate EvidencePiece::get(PredId pred, const std::vector<int>& tuple) const {
  return get(pred, tuple_rank(tuple, domain_.size));
}

void EvidencePiece::set(PredId pred, std::uint64_t rank, Tristate value) {
  status_.at(pred).at(rank) = value;
}

void EvidencePiece::set(PredId pred, const std::vector<int>& tuple,
                        Tristate value) {
  set(pred, tuple_rank(tuple, domain_.size), value);
}

std::uint64_t EvidencePiece::assigned_count() const {
  std::uint64_t c = 0;
  for (const auto& v : status_)
    for (Tristate t : v)
      if (t != Tristate::Unassigned) ++c;
  return c;
}

// --- evaluation ----------------------------------------------------------------

namespace {

struct Env {
  const Structure& structure;
  std::vector<std::pair<std::string, int>> scope;

  int resolve(const Term& t) const {
    if (t.kind == Term::Kind::Constant) {
      if (t.value < 0 || t.value >= structure.domain.size)
        throw DomainError("constant #" + std::to_string(t.value) +
                          " outside domain of size " +
                          std::to_string(structure.domain.size));
      return t.value;
    }
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == t.var) return it->second;
    throw DomainError("unbound variable '" + t.var + "'");
  }
};

bool eval_rec(const FormulaPtr& f, Env& env) {
  switch (f->kind) {
    case Formula::Kind::Atom: {
      std::vector<int> tuple;
      tuple.reserve(f->args.size());
      for (const auto& a : f->args) tuple.push_back(env.resolve(a));
      return env.structure.interp.get(f->pred, tuple);
    }
    case Formula::Kind::Equal:
      return env.resolve(f->lhs) == env.resolve(f->rhs);
    case Formula::Kind::Not:
      return !eval_rec(f->left, env);
    case Formula::Kind::And:
      return eval_rec(f->left, env) && eval_rec(f->right, env);
    case Formula::Kind::Or:
      return eval_rec(f->left, env) || eval_rec(f->right, env);
    case Formula::Kind::Implies:
      return !eval_rec(f->left, env) || eval_rec(f->right, env);
    case Formula::Kind::Iff:
      return eval_rec(f->left, env) == eval_rec(f->right, env);
    case Formula::Kind::Forall: {
      env.scope.emplace_back(f->var, 0);
      bool ok = true;
      for (int v = 0; ok && v < env.structure.domain.size; ++v) {
        env.scope.back().second = v;
        ok = eval_rec(f->left, env);
      }
      env.scope.pop_back();
      return ok;
    }
    case Formula::Kind::Exists: {
      env.scope.emplace_back(f->var, 0);
      bool ok = false;
      for (int v = 0; !ok && v < env.structure.domain.size; ++v) {
        env.scope.back().second = v;
        ok = eval_rec(f->left, env);
      }
      env.scope.pop_back();
      return ok;
    }
  }
  throw Error("unreachable formula kind");
}

} // namespace

bool evaluate(const FormulaPtr& f, const Structure& structure,
              const Binding& binding) {
  Env env{structure, {}};
  env.scope.assign(binding.begin(), binding.end());
  return eval_rec(f, env);
}

// --- text format ----------------------------------------------------------------

namespace {

struct Assignment {
  PredId pred;
  std::vector<int> tuple;
  bool value;
};

// `domain N;` then `pred(i, j) = true|false;` statements.
std::pair<Domain, std::vector<Assignment>> parse_assignments(
    const std::string& text, const Vocabulary& vocab) {
  detail::Lexer lex(text);
  using detail::Tok;
  using detail::Token;

  Token kw = lex.expect(Tok::Ident, "at start (expected 'domain')");
  if (kw.text != "domain")
    throw ParseError("expected 'domain'", kw.line, kw.col);
  Token n = lex.expect(Tok::Number, "after 'domain'");
  if (n.text.find('.') != std::string::npos)
    throw ParseError("domain size must be an integer", n.line, n.col);
  Domain domain(std::stoi(n.text));
  lex.expect(Tok::Semi, "after domain size");

  std::vector<Assignment> out;
  while (!lex.at(Tok::End)) {
    Token id = lex.expect(Tok::Ident, "as predicate name");
    auto pid = vocab.find(id.text);
    if (!pid)
      throw ParseError("unknown predicate '" + id.text + "'", id.line, id.col);
    std::vector<int> tuple;
    if (lex.accept(Tok::LParen)) {
      if (!lex.at(Tok::RParen)) {
        do {
          Token el = lex.expect(Tok::Number, "as domain element");
          if (el.text.find('.') != std::string::npos)
            throw ParseError("domain element must be an integer", el.line,
                             el.col);
          tuple.push_back(std::stoi(el.text));
        } while (lex.accept(Tok::Comma));
      }
      lex.expect(Tok::RParen, "to close tuple");
    }
    if (static_cast<int>(tuple.size()) != vocab[*pid].arity)
      throw ParseError("predicate '" + id.text + "' expects " +
                           std::to_string(vocab[*pid].arity) + " element(s)",
                       id.line, id.col);
    for (int el : tuple)
      if (el < 0 || el >= domain.size)
        throw ParseError("element " + std::to_string(el) +
                             " outside domain of size " +
                             std::to_string(domain.size),
                         id.line, id.col);
    lex.expect(Tok::Eq, "after grounding");
    Token val = lex.expect(Tok::Ident, "as truth value");
    bool b;
    if (val.text == "true") b = true;
    else if (val.text == "false") b = false;
    else throw ParseError("expected 'true' or 'false'", val.line, val.col);
    lex.expect(Tok::Semi, "after assignment");
    out.push_back({*pid, std::move(tuple), b});
  }
  return {domain, std::move(out)};
}

std::string tuple_str(const std::vector<int>& tuple) {
  if (tuple.empty()) return "";
  std::string out = "(";
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(tuple[i]);
  }
  return out + ")";
}

} // namespace

Structure parse_structure_text(const std::string& text,
                               const Vocabulary& vocab) {
  auto [domain, assigns] = parse_assignments(text, vocab);
  Structure s(vocab, domain);
  for (const auto& a : assigns) s.interp.set(a.pred, a.tuple, a.value);
  return s;
}

EvidencePiece parse_evidence_text(const std::string& text,
                                  const Vocabulary& vocab) {
  auto [domain, assigns] = parse_assignments(text, vocab);
  EvidencePiece e(vocab, domain);
  for (const auto& a : assigns)
    e.set(a.pred, a.tuple, a.value ? Tristate::True : Tristate::False);
  return e;
}

std::string print_structure_text(const Structure& s) {
  std::ostringstream os;
  os << "domain " << s.domain.size << ";\n";
  for (PredId p = 0; p < s.vocab.size(); ++p) {
    std::uint64_t count = int_pow(s.domain.size, s.vocab[p].arity);
    for (std::uint64_t r = 0; r < count; ++r)
      if (s.interp.get(p, r))
        os << s.vocab[p].name
           << tuple_str(tuple_unrank(r, s.domain.size, s.vocab[p].arity))
           << " = true;\n";
  }
  return os.str();
}

std::string print_evidence_text(const EvidencePiece& e) {
  std::ostringstream os;
  os << "domain " << e.domain().size << ";\n";
  for (PredId p = 0; p < e.vocab().size(); ++p) {
    std::uint64_t count = e.groundings(p);
    for (std::uint64_t r = 0; r < count; ++r) {
      Tristate t = e.get(p, r);
      if (t == Tristate::Unassigned) continue;
      os << e.vocab()[p].name
         << tuple_str(tuple_unrank(r, e.domain().size, e.vocab()[p].arity))
         << " = " << (t == Tristate::True ? "true" : "false") << ";\n";
    }
  }
  return os.str();
}

// --- isomorphism ----------------------------------------------------------------

std::vector<int> IsoWitness::inverse() const {
  std::vector<int> inv(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) inv[map[i]] = static_cast<int>(i);
  return inv;
}

bool iso_preserves_status(const EvidencePiece& p1, const EvidencePiece& p2,
                          const std::vector<int>& g) {
  int n = p1.domain().size;
  for (PredId pred = 0; pred < p1.vocab().size(); ++pred) {
    int k = p1.vocab()[pred].arity;
    std::uint64_t count = int_pow(n, k);
    for (std::uint64_t r = 0; r < count; ++r) {
      std::vector<int> tuple = tuple_unrank(r, n, k);
      std::vector<int> image(k);
      for (int i = 0; i < k; ++i) image[i] = g[tuple[i]];
      if (p1.get(pred, r) != p2.get(pred, image)) return false;
    }
  }
  return true;
}

EvidencePiece apply_permutation(const EvidencePiece& e,
                                const std::vector<int>& g) {
  EvidencePiece out(e.vocab(), e.domain());
  int n = e.domain().size;
  for (PredId pred = 0; pred < e.vocab().size(); ++pred) {
    int k = e.vocab()[pred].arity;
    std::uint64_t count = int_pow(n, k);
    for (std::uint64_t r = 0; r < count; ++r) {
      std::vector<int> tuple = tuple_unrank(r, n, k);
      std::vector<int> image(k);
      for (int i = 0; i < k; ++i) image[i] = g[tuple[i]];
      out.set(pred, image, e.get(pred, r));
    }
  }
  return out;
}

std::optional<IsoWitness> find_isomorphism(const EvidencePiece& p1,
                                           const EvidencePiece& p2,
                                           int max_domain_for_search) {
  if (!(p1.vocab() == p2.vocab()))
    throw DomainError("isomorphism requires a shared vocabulary");
  if (p1.domain().size != p2.domain().size) return std::nullopt;
  int n = p1.domain().size;
  if (n > max_domain_for_search)
    throw ResourceCapError("isomorphism search over " + std::to_string(n) +
                           "! bijections exceeds the cap");
  std::vector<int> g(n);
  std::iota(g.begin(), g.end(), 0);
  do {
    if (iso_preserves_status(p1, p2, g)) return IsoWitness{g};
  } while (std::next_permutation(g.begin(), g.end()));
  return std::nullopt;
}

} // namespace fobn
