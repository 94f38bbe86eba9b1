#include "fobn/spec.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>

#include "fobn/errors.hpp"
#include "lexer.hpp"
#include "parser_detail.hpp"

namespace fobn {

bool NetworkSpec::is_root(PredId p) const { return root_of(p) != nullptr; }

const RootDeclaration* NetworkSpec::root_of(PredId p) const {
  for (const auto& r : roots)
    if (r.pred == p) return &r;
  return nullptr;
}

const Definition* NetworkSpec::definition_of(PredId p) const {
  for (const auto& d : definitions)
    if (d.pred == p) return &d;
  return nullptr;
}

Vocabulary NetworkSpec::sigma_vocab() const {
  Vocabulary v;
  for (PredId p : sigma) v.add(vocabulary[p]);
  return v;
}

bool ValidationReport::ok() const {
  return std::none_of(diagnostics.begin(), diagnostics.end(),
                      [](const Diagnostic& d) {
                        return d.severity == Diagnostic::Severity::Error;
                      });
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& d : diagnostics) {
    os << (d.severity == Diagnostic::Severity::Error ? "error" : "warning");
    if (!d.location.empty()) os << " [" << d.location << "]";
    os << ": " << d.message << "\n";
  }
  return os.str();
}

// --- parsing ----------------------------------------------------------------

namespace {

using detail::Lexer;
using detail::Tok;
using detail::Token;

struct PredDecl {
  std::string name;
  int arity;
  int line, col;
};

PredDecl parse_pred_arity(Lexer& lex) {
  Token name = lex.expect(Tok::Ident, "as predicate name");
  lex.expect(Tok::Slash, "before arity");
  Token ar = lex.expect(Tok::Number, "as arity");
  if (ar.text.find('.') != std::string::npos)
    throw ParseError("arity must be an integer", ar.line, ar.col);
  return {name.text, std::stoi(ar.text), name.line, name.col};
}

Rational parse_probability(Lexer& lex) {
  Token num = lex.expect(Tok::Number, "as probability");
  std::string text = num.text;
  if (lex.accept(Tok::Slash)) {
    Token den = lex.expect(Tok::Number, "as denominator");
    if (num.text.find('.') != std::string::npos ||
        den.text.find('.') != std::string::npos)
      throw ParseError("fraction parts must be integers", den.line, den.col);
    text += "/" + den.text;
  }
  Rational r = Rational::parse(text);
  if (r < Rational::zero() || r > Rational::one())
    throw ParseError("probability " + text + " outside [0, 1]", num.line,
                     num.col);
  return r;
}

// Skips the remainder of a statement up to and including its '.'.
void skip_statement(Lexer& lex) {
  while (!lex.at(Tok::End) && !lex.accept(Tok::Dot)) lex.next();
}

void declare(NetworkSpec& spec, const PredDecl& d, bool as_sigma,
             std::vector<std::string>& kind_by_name,
             const std::string& kind) {
  auto existing = spec.vocabulary.find(d.name);
  if (existing) {
    if (spec.vocabulary[*existing].arity != d.arity)
      throw ParseError("predicate '" + d.name + "' redeclared with arity " +
                           std::to_string(d.arity),
                       d.line, d.col);
  } else {
    spec.vocabulary.add({d.name, d.arity});
    kind_by_name.emplace_back();
  }
  PredId id = *spec.vocabulary.find(d.name);
  if (as_sigma) {
    if (std::find(spec.sigma.begin(), spec.sigma.end(), id) !=
        spec.sigma.end())
      throw ParseError("predicate '" + d.name + "' listed twice in vocabulary",
                       d.line, d.col);
    spec.sigma.push_back(id);
    return;
  }
  std::string& k = kind_by_name[id];
  if (!k.empty()) {
    if (k == kind)
      throw ParseError("duplicate " + kind + " declaration of '" + d.name + "'",
                       d.line, d.col);
    throw ParseError("predicate '" + d.name + "' is both root and defined",
                     d.line, d.col);
  }
  k = kind;
}

} // namespace

NetworkSpec parse_spec(const std::string& text) {
  NetworkSpec spec;
  std::vector<std::string> kind_by_name;

  // First pass: declarations only, so definition bodies may refer to
  // predicates introduced later in the file.
  {
    Lexer lex(text);
    while (!lex.at(Tok::End)) {
      Token kw = lex.expect(Tok::Ident, "at statement start");
      if (kw.text == "vocabulary") {
        do {
          declare(spec, parse_pred_arity(lex), true, kind_by_name, "sigma");
        } while (lex.accept(Tok::Comma));
        lex.expect(Tok::Dot, "after vocabulary list");
        spec.sigma_declared = true;
      } else if (kw.text == "root") {
        declare(spec, parse_pred_arity(lex), false, kind_by_name, "root");
        skip_statement(lex);
      } else if (kw.text == "define") {
        Token name = lex.expect(Tok::Ident, "as defined predicate");
        int arity = 0;
        if (lex.accept(Tok::LParen)) {
          if (!lex.at(Tok::RParen)) {
            do {
              lex.expect(Tok::Ident, "as head variable");
              ++arity;
            } while (lex.accept(Tok::Comma));
          }
          lex.expect(Tok::RParen, "to close head");
        }
        declare(spec, {name.text, arity, name.line, name.col}, false,
                kind_by_name, "define");
        skip_statement(lex);
      } else if (kw.text == "query") {
        skip_statement(lex);
      } else {
        throw ParseError("unknown statement '" + kw.text + "'", kw.line,
                         kw.col);
      }
    }
  }

  // Second pass: full parse against the complete vocabulary.
  Lexer lex(text);
  while (!lex.at(Tok::End)) {
    Token kw = lex.next();
    if (kw.text == "vocabulary") {
      skip_statement(lex);
    } else if (kw.text == "root") {
      PredDecl d = parse_pred_arity(lex);
      lex.expect(Tok::Eq, "after root predicate");
      Rational alpha = parse_probability(lex);
      lex.expect(Tok::Dot, "after root declaration");
      spec.roots.push_back({*spec.vocabulary.find(d.name), alpha});
    } else if (kw.text == "define") {
      Token name = lex.expect(Tok::Ident, "as defined predicate");
      std::vector<std::string> head;
      if (lex.accept(Tok::LParen)) {
        if (!lex.at(Tok::RParen)) {
          do {
            head.push_back(lex.expect(Tok::Ident, "as head variable").text);
          } while (lex.accept(Tok::Comma));
        }
        lex.expect(Tok::RParen, "to close head");
      }
      for (std::size_t i = 0; i < head.size(); ++i)
        for (std::size_t j = i + 1; j < head.size(); ++j)
          if (head[i] == head[j])
            throw ParseError("head variable '" + head[i] + "' repeated",
                             name.line, name.col);
      lex.expect(Tok::DefIff, "after definition head");
      FormulaPtr body = detail::parse_formula_expr(lex, spec.vocabulary);
      lex.expect(Tok::Dot, "after definition body");
      spec.definitions.push_back(
          {*spec.vocabulary.find(name.text), std::move(head), body});
    } else if (kw.text == "query") {
      AcceptanceQuery q;
      Token c = lex.expect(Tok::Ident, "after 'query'");
      if (c.text != "conditioned")
        throw ParseError("expected 'conditioned'", c.line, c.col);
      auto parse_names = [&](std::vector<PredId>& into) {
        while (lex.at(Tok::Ident)) {
          Token name = lex.next();
          auto id = spec.vocabulary.find(name.text);
          if (!id)
            throw ParseError("unknown predicate '" + name.text + "'",
                             name.line, name.col);
          into.push_back(*id);
          if (!lex.accept(Tok::Comma)) break;
        }
      };
      parse_names(q.conditioned);
      if (lex.accept(Tok::Semi)) {
        if (lex.at(Tok::Ident) && lex.peek().text == "conditioning") {
          lex.next();
          parse_names(q.conditioning);
        }
      }
      lex.expect(Tok::Dot, "after query block");
      if (spec.query)
        throw ParseError("duplicate query block", kw.line, kw.col);
      spec.query = std::move(q);
    }
  }

  if (!spec.sigma_declared) {
    spec.sigma.resize(spec.vocabulary.size());
    std::iota(spec.sigma.begin(), spec.sigma.end(), 0);
  }
  return spec;
}

// --- validation ----------------------------------------------------------------

namespace {

void collect_atom_preds(const FormulaPtr& f, std::vector<bool>& seen) {
  if (!f) return;
  if (f->kind == Formula::Kind::Atom) seen[f->pred] = true;
  if (f->left) collect_atom_preds(f->left, seen);
  if (f->right) collect_atom_preds(f->right, seen);
}

bool check_arities(const FormulaPtr& f, const Vocabulary& vocab,
                   std::string& bad) {
  if (!f) return true;
  if (f->kind == Formula::Kind::Atom) {
    if (f->pred < 0 || f->pred >= vocab.size()) {
      bad = "atom with unknown predicate id";
      return false;
    }
    if (static_cast<int>(f->args.size()) != vocab[f->pred].arity) {
      bad = "arity mismatch on '" + vocab[f->pred].name + "'";
      return false;
    }
  }
  return check_arities(f->left, vocab, bad) &&
         check_arities(f->right, vocab, bad);
}

} // namespace

DependencyGraph predicate_dependency_graph(const NetworkSpec& spec) {
  DependencyGraph g;
  g.out.resize(spec.vocabulary.size());
  for (const auto& d : spec.definitions) {
    std::vector<bool> seen(spec.vocabulary.size(), false);
    collect_atom_preds(d.body, seen);
    for (PredId q = 0; q < spec.vocabulary.size(); ++q)
      if (seen[q]) g.out[q].push_back(d.pred);
  }
  return g;
}

std::optional<std::vector<PredId>> topological_order(const NetworkSpec& spec) {
  DependencyGraph g = predicate_dependency_graph(spec);
  int n = spec.vocabulary.size();
  std::vector<int> indegree(n, 0);
  for (PredId q = 0; q < n; ++q)
    for (PredId s : g.out[q]) ++indegree[s];
  // Ties broken by declaration index so the order is deterministic.
  std::priority_queue<PredId, std::vector<PredId>, std::greater<>> ready;
  for (PredId p = 0; p < n; ++p)
    if (indegree[p] == 0) ready.push(p);
  std::vector<PredId> order;
  while (!ready.empty()) {
    PredId p = ready.top();
    ready.pop();
    order.push_back(p);
    for (PredId s : g.out[p])
      if (--indegree[s] == 0) ready.push(s);
  }
  if (static_cast<int>(order.size()) != n) return std::nullopt;
  return order;
}

ValidationReport validate_spec(const NetworkSpec& spec) {
  ValidationReport report;
  auto error = [&](std::string msg, std::string where) {
    report.diagnostics.push_back(
        {Diagnostic::Severity::Error, std::move(msg), std::move(where)});
  };

  std::vector<int> mentions(spec.vocabulary.size(), 0);
  for (const auto& r : spec.roots) {
    ++mentions[r.pred];
    if (r.alpha < Rational::zero() || r.alpha > Rational::one())
      error("assessment outside [0, 1]", spec.vocabulary[r.pred].name);
  }
  for (const auto& d : spec.definitions) ++mentions[d.pred];
  for (PredId p = 0; p < spec.vocabulary.size(); ++p) {
    if (mentions[p] == 0)
      error("predicate is neither a root nor defined",
            spec.vocabulary[p].name);
    else if (mentions[p] > 1)
      error("predicate declared more than once", spec.vocabulary[p].name);
  }

  for (const auto& d : spec.definitions) {
    const std::string& name = spec.vocabulary[d.pred].name;
    if (static_cast<int>(d.head_vars.size()) != spec.vocabulary[d.pred].arity)
      error("head variable count differs from arity", name);
    for (std::size_t i = 0; i < d.head_vars.size(); ++i)
      for (std::size_t j = i + 1; j < d.head_vars.size(); ++j)
        if (d.head_vars[i] == d.head_vars[j])
          error("head variable '" + d.head_vars[i] + "' repeated", name);
    std::string bad;
    if (!check_arities(d.body, spec.vocabulary, bad)) {
      error(bad, name);
      continue;
    }
    for (const auto& v : free_variables(d.body))
      if (std::find(d.head_vars.begin(), d.head_vars.end(), v) ==
          d.head_vars.end())
        error("free variable '" + v + "' does not appear in the head", name);
  }

  for (PredId p : spec.sigma)
    if (p < 0 || p >= spec.vocabulary.size())
      error("sigma refers to an unknown predicate", std::to_string(p));
  if (spec.query) {
    for (PredId p : spec.query->conditioned)
      if (p < 0 || p >= spec.vocabulary.size())
        error("query conditioned predicate unknown", std::to_string(p));
    for (PredId p : spec.query->conditioning)
      if (p < 0 || p >= spec.vocabulary.size())
        error("query conditioning predicate unknown", std::to_string(p));
  }

  if (!topological_order(spec)) {
    // Name one cycle for the report.
    DependencyGraph g = predicate_dependency_graph(spec);
    error("predicate dependency graph has a cycle", "");
  }
  return report;
}

// --- printing ----------------------------------------------------------------

std::string print_spec(const NetworkSpec& spec) {
  std::ostringstream os;
  if (spec.sigma_declared) {
    os << "vocabulary ";
    for (std::size_t i = 0; i < spec.sigma.size(); ++i) {
      if (i) os << ", ";
      const auto& p = spec.vocabulary[spec.sigma[i]];
      os << p.name << "/" << p.arity;
    }
    os << ".\n";
  }
  // Statements in declaration order keep reparsing stable.
  for (PredId p = 0; p < spec.vocabulary.size(); ++p) {
    if (const RootDeclaration* r = spec.root_of(p)) {
      os << "root " << spec.vocabulary[p].name << "/"
         << spec.vocabulary[p].arity << " = " << r->alpha.str() << ".\n";
    } else if (const Definition* d = spec.definition_of(p)) {
      os << "define " << spec.vocabulary[p].name;
      if (!d->head_vars.empty()) {
        os << "(";
        for (std::size_t i = 0; i < d->head_vars.size(); ++i) {
          if (i) os << ", ";
          os << d->head_vars[i];
        }
        os << ")";
      }
      os << " <=> " << print_formula(d->body, spec.vocabulary) << ".\n";
    }
  }
  if (spec.query) {
    os << "query conditioned";
    for (std::size_t i = 0; i < spec.query->conditioned.size(); ++i)
      os << (i ? ", " : " ") << spec.vocabulary[spec.query->conditioned[i]].name;
    os << "; conditioning";
    for (std::size_t i = 0; i < spec.query->conditioning.size(); ++i)
      os << (i ? ", " : " ")
         << spec.vocabulary[spec.query->conditioning[i]].name;
    os << ".\n";
  }
  return os.str();
}

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Formula::Kind::Atom:
      return a->pred == b->pred && a->args == b->args;
    case Formula::Kind::Equal:
      return a->lhs == b->lhs && a->rhs == b->rhs;
    case Formula::Kind::Not:
      return formula_equal(a->left, b->left);
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      return a->var == b->var && formula_equal(a->left, b->left);
    default:
      return formula_equal(a->left, b->left) &&
             formula_equal(a->right, b->right);
  }
}

} // namespace fobn
