#include "fobn/logic.hpp"

#include <algorithm>
#include <sstream>

#include "fobn/errors.hpp"
#include "lexer.hpp"
#include "parser_detail.hpp"

namespace fobn {

// --- vocabulary ------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<Predicate> preds) {
  for (auto& p : preds) add(p);
}

PredId Vocabulary::add(const Predicate& p) {
  if (p.arity < 0) throw DomainError("negative arity for '" + p.name + "'");
  if (find(p.name))
    throw DomainError("duplicate predicate '" + p.name + "'");
  preds_.push_back(p);
  return static_cast<PredId>(preds_.size() - 1);
}

std::optional<PredId> Vocabulary::find(const std::string& name) const {
  for (std::size_t i = 0; i < preds_.size(); ++i)
    if (preds_[i].name == name) return static_cast<PredId>(i);
  return std::nullopt;
}

Domain::Domain(int n) : size(n) {
  if (n < 1) throw DomainError("domain size must be at least 1");
}

// --- tuples ----------------------------------------------------------------

std::uint64_t int_pow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > UINT64_MAX / base)
      throw ResourceCapError("tuple space overflows 64 bits");
    r *= base;
  }
  return r;
}

std::uint64_t tuple_rank(const std::vector<int>& tuple, int n) {
  std::uint64_t r = 0;
  for (int v : tuple) r = r * static_cast<std::uint64_t>(n) + v;
  return r;
}

std::vector<int> tuple_unrank(std::uint64_t rank, int n, int k) {
  std::vector<int> t(k, 0);
  for (int i = k - 1; i >= 0; --i) {
    t[i] = static_cast<int>(rank % n);
    rank /= n;
  }
  return t;
}

std::vector<std::vector<int>> enumerate_tuples(const Domain& domain, int k) {
  if (k < 0) throw DomainError("negative tuple arity");
  std::uint64_t count = int_pow(domain.size, k);
  std::vector<std::vector<int>> out;
  out.reserve(count);
  for (std::uint64_t r = 0; r < count; ++r)
    out.push_back(tuple_unrank(r, domain.size, k));
  return out;
}

// --- terms and formulas ----------------------------------------------------

Term Term::variable(std::string name) {
  Term t;
  t.kind = Kind::Variable;
  t.var = std::move(name);
  return t;
}

Term Term::constant(int value) {
  Term t;
  t.kind = Kind::Constant;
  t.value = value;
  return t;
}

namespace {
std::shared_ptr<Formula> make(Formula::Kind k) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  return f;
}
} // namespace

FormulaPtr Formula::atom(PredId pred, std::vector<Term> args) {
  auto f = make(Kind::Atom);
  f->pred = pred;
  f->args = std::move(args);
  return f;
}

FormulaPtr Formula::equal(Term lhs, Term rhs) {
  auto f = make(Kind::Equal);
  f->lhs = std::move(lhs);
  f->rhs = std::move(rhs);
  return f;
}

FormulaPtr Formula::negation(FormulaPtr c) {
  auto f = make(Kind::Not);
  f->left = std::move(c);
  return f;
}

namespace {
FormulaPtr binary(Formula::Kind k, FormulaPtr l, FormulaPtr r) {
  auto f = make(k);
  f->left = std::move(l);
  f->right = std::move(r);
  return f;
}
} // namespace

FormulaPtr Formula::conj(FormulaPtr l, FormulaPtr r) {
  return binary(Kind::And, std::move(l), std::move(r));
}
FormulaPtr Formula::disj(FormulaPtr l, FormulaPtr r) {
  return binary(Kind::Or, std::move(l), std::move(r));
}
FormulaPtr Formula::implies(FormulaPtr l, FormulaPtr r) {
  return binary(Kind::Implies, std::move(l), std::move(r));
}
FormulaPtr Formula::iff(FormulaPtr l, FormulaPtr r) {
  return binary(Kind::Iff, std::move(l), std::move(r));
}

FormulaPtr Formula::forall(std::string var, FormulaPtr body) {
  auto f = make(Kind::Forall);
  f->var = std::move(var);
  f->left = std::move(body);
  return f;
}

FormulaPtr Formula::exists(std::string var, FormulaPtr body) {
  auto f = make(Kind::Exists);
  f->var = std::move(var);
  f->left = std::move(body);
  return f;
}

FormulaPtr Formula::conj_all(const std::vector<FormulaPtr>& fs) {
  FormulaPtr acc;
  for (const auto& f : fs) {
    if (!f) continue;
    acc = acc ? conj(acc, f) : f;
  }
  return acc;
}

FormulaPtr Formula::disj_all(const std::vector<FormulaPtr>& fs) {
  FormulaPtr acc;
  for (const auto& f : fs) {
    if (!f) continue;
    acc = acc ? disj(acc, f) : f;
  }
  return acc;
}

FormulaPtr Formula::always_true() {
  return forall("_x", equal(Term::variable("_x"), Term::variable("_x")));
}

FormulaPtr Formula::always_false() {
  return negation(always_true());
}

// --- free variables ---------------------------------------------------------

namespace {
void collect_free(const FormulaPtr& f, std::vector<std::string>& bound,
                  std::set<std::string>& out) {
  if (!f) return;
  auto term_free = [&](const Term& t) {
    if (t.kind == Term::Kind::Variable &&
        std::find(bound.rbegin(), bound.rend(), t.var) == bound.rend())
      out.insert(t.var);
  };
  switch (f->kind) {
    case Formula::Kind::Atom:
      for (const auto& a : f->args) term_free(a);
      break;
    case Formula::Kind::Equal:
      term_free(f->lhs);
      term_free(f->rhs);
      break;
    case Formula::Kind::Not:
      collect_free(f->left, bound, out);
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies:
    case Formula::Kind::Iff:
      collect_free(f->left, bound, out);
      collect_free(f->right, bound, out);
      break;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      bound.push_back(f->var);
      collect_free(f->left, bound, out);
      bound.pop_back();
      break;
  }
}
} // namespace

std::set<std::string> free_variables(const FormulaPtr& f) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  collect_free(f, bound, out);
  return out;
}

// --- parser ----------------------------------------------------------------

namespace detail {

namespace {

Term parse_term(Lexer& lex) {
  if (lex.at(Tok::HashConst)) {
    Token t = lex.next();
    return Term::constant(static_cast<int>(t.value));
  }
  Token t = lex.expect(Tok::Ident, "as term");
  return Term::variable(t.text);
}

FormulaPtr parse_primary(Lexer& lex, const Vocabulary& vocab);

FormulaPtr parse_unary(Lexer& lex, const Vocabulary& vocab) {
  if (lex.accept(Tok::Bang)) return Formula::negation(parse_unary(lex, vocab));
  return parse_primary(lex, vocab);
}

FormulaPtr parse_and(Lexer& lex, const Vocabulary& vocab) {
  FormulaPtr f = parse_unary(lex, vocab);
  while (lex.accept(Tok::Amp)) f = Formula::conj(f, parse_unary(lex, vocab));
  return f;
}

FormulaPtr parse_or(Lexer& lex, const Vocabulary& vocab) {
  FormulaPtr f = parse_and(lex, vocab);
  while (lex.accept(Tok::Pipe)) f = Formula::disj(f, parse_and(lex, vocab));
  return f;
}

FormulaPtr parse_implies(Lexer& lex, const Vocabulary& vocab) {
  FormulaPtr f = parse_or(lex, vocab);
  if (lex.accept(Tok::Arrow))
    return Formula::implies(f, parse_implies(lex, vocab));
  return f;
}

FormulaPtr parse_iff(Lexer& lex, const Vocabulary& vocab) {
  FormulaPtr f = parse_implies(lex, vocab);
  while (lex.accept(Tok::IffOp)) f = Formula::iff(f, parse_implies(lex, vocab));
  return f;
}

FormulaPtr parse_primary(Lexer& lex, const Vocabulary& vocab) {
  if (lex.accept(Tok::LParen)) {
    FormulaPtr f = parse_formula_expr(lex, vocab);
    lex.expect(Tok::RParen, "to close group");
    return f;
  }

  if (lex.at(Tok::HashConst)) {
    Term lhs = parse_term(lex);
    lex.expect(Tok::Eq, "after constant term");
    return Formula::equal(lhs, parse_term(lex));
  }

  Token id = lex.expect(Tok::Ident, "at start of formula");
  if (id.text == "forall" || id.text == "exists") {
    Token var = lex.expect(Tok::Ident, "after quantifier");
    lex.expect(Tok::Colon, "after quantified variable");
    FormulaPtr body = parse_formula_expr(lex, vocab);
    return id.text == "forall" ? Formula::forall(var.text, body)
                               : Formula::exists(var.text, body);
  }

  if (lex.accept(Tok::LParen)) {
    std::vector<Term> args;
    if (!lex.at(Tok::RParen)) {
      args.push_back(parse_term(lex));
      while (lex.accept(Tok::Comma)) args.push_back(parse_term(lex));
    }
    lex.expect(Tok::RParen, "to close argument list");
    auto pid = vocab.find(id.text);
    if (!pid)
      throw ParseError("unknown predicate '" + id.text + "'", id.line, id.col);
    int arity = vocab[*pid].arity;
    if (static_cast<int>(args.size()) != arity)
      throw ParseError("predicate '" + id.text + "' expects " +
                           std::to_string(arity) + " argument(s), got " +
                           std::to_string(args.size()),
                       id.line, id.col);
    return Formula::atom(*pid, std::move(args));
  }

  if (lex.accept(Tok::Eq))
    return Formula::equal(Term::variable(id.text), parse_term(lex));

  auto pid = vocab.find(id.text);
  if (!pid)
    throw ParseError("unknown predicate '" + id.text + "'", id.line, id.col);
  if (vocab[*pid].arity != 0)
    throw ParseError("predicate '" + id.text + "' expects " +
                         std::to_string(vocab[*pid].arity) + " argument(s)",
                     id.line, id.col);
  return Formula::atom(*pid, {});
}

} // namespace

FormulaPtr parse_formula_expr(Lexer& lex, const Vocabulary& vocab) {
  return parse_iff(lex, vocab);
}

} // namespace detail

FormulaPtr parse_formula(const std::string& text, const Vocabulary& vocab) {
  detail::Lexer lex(text);
  FormulaPtr f = detail::parse_formula_expr(lex, vocab);
  if (!lex.at(detail::Tok::End))
    lex.fail("trailing input after formula");
  return f;
}

// --- printer ---------------------------------------------------------------

namespace {

int precedence(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: return 0;
    case Formula::Kind::Iff: return 1;
    case Formula::Kind::Implies: return 2;
    case Formula::Kind::Or: return 3;
    case Formula::Kind::And: return 4;
    case Formula::Kind::Not: return 5;
    case Formula::Kind::Atom:
    case Formula::Kind::Equal: return 6;
  }
  return 6;
}

std::string print_term(const Term& t) {
  if (t.kind == Term::Kind::Variable) return t.var;
  return "#" + std::to_string(t.value);
}

void print_rec(const FormulaPtr& f, const Vocabulary& vocab, int min_prec,
               std::string& out) {
  bool parens = precedence(f) < min_prec;
  if (parens) out += '(';
  switch (f->kind) {
    case Formula::Kind::Atom: {
      out += vocab[f->pred].name;
      if (!f->args.empty()) {
        out += '(';
        for (std::size_t i = 0; i < f->args.size(); ++i) {
          if (i) out += ", ";
          out += print_term(f->args[i]);
        }
        out += ')';
      }
      break;
    }
    case Formula::Kind::Equal:
      out += print_term(f->lhs) + " = " + print_term(f->rhs);
      break;
    case Formula::Kind::Not:
      out += '!';
      print_rec(f->left, vocab, 5, out);
      break;
    case Formula::Kind::And:
      print_rec(f->left, vocab, 4, out);
      out += " & ";
      print_rec(f->right, vocab, 5, out);
      break;
    case Formula::Kind::Or:
      print_rec(f->left, vocab, 3, out);
      out += " | ";
      print_rec(f->right, vocab, 4, out);
      break;
    case Formula::Kind::Implies:
      print_rec(f->left, vocab, 3, out);
      out += " -> ";
      print_rec(f->right, vocab, 2, out);
      break;
    case Formula::Kind::Iff:
      print_rec(f->left, vocab, 1, out);
      out += " <-> ";
      print_rec(f->right, vocab, 2, out);
      break;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      out += (f->kind == Formula::Kind::Forall ? "forall " : "exists ");
      out += f->var + ": ";
      print_rec(f->left, vocab, 0, out);
      break;
  }
  if (parens) out += ')';
}

} // namespace

std::string print_formula(const FormulaPtr& f, const Vocabulary& vocab) {
  std::string out;
  print_rec(f, vocab, 0, out);
  return out;
}

} // namespace fobn
