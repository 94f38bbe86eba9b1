#include "fobn/capture.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "fobn/errors.hpp"
#include "fobn/ground.hpp"
#include "lexer.hpp"

namespace fobn {

std::optional<int> NTMachine::find_state(const std::string& name) const {
  for (std::size_t i = 0; i < state_names.size(); ++i)
    if (state_names[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

// --- machine files ------------------------------------------------------------

namespace {

TapeSym parse_symbol(const detail::Token& t) {
  if (t.kind == detail::Tok::Number) {
    if (t.text == "0") return TapeSym::S0;
    if (t.text == "1") return TapeSym::S1;
  } else if (t.kind == detail::Tok::Ident && t.text == "_") {
    return TapeSym::Blank;
  }
  throw ParseError("expected tape symbol 0, 1 or _", t.line, t.col);
}

} // namespace

NTMachine parse_machine(const std::string& text) {
  detail::Lexer lex(text);
  using detail::Tok;
  using detail::Token;

  NTMachine m;
  struct PendingTrans {
    std::string from, to;
    TapeSym read, write;
    Move move;
    int line, col;
  };
  std::vector<PendingTrans> pending;

  while (!lex.at(Tok::End)) {
    Token kw = lex.expect(Tok::Ident, "at statement start");
    if (kw.text == "state") {
      Token name = lex.expect(Tok::Ident, "as state name");
      if (m.find_state(name.text))
        throw ParseError("state '" + name.text + "' declared twice", name.line,
                         name.col);
      int id = m.state_count();
      m.state_names.push_back(name.text);
      m.transitions.emplace_back();
      if (lex.at(Tok::Ident)) {
        std::string role = lex.peek().text;
        if (role == "initial" || role == "accept" || role == "reject") {
          lex.next();
          int& slot = role == "initial" ? m.initial
                      : role == "accept" ? m.accept
                                         : m.reject;
          if (slot != -1)
            throw ParseError("duplicate " + role + " state", name.line,
                             name.col);
          slot = id;
        }
      }
    } else if (kw.text == "trans") {
      PendingTrans t;
      Token from = lex.expect(Tok::Ident, "as source state");
      t.from = from.text;
      t.line = from.line;
      t.col = from.col;
      lex.expect(Tok::Comma, "after source state");
      t.read = parse_symbol(lex.next());
      lex.expect(Tok::Arrow, "in transition");
      t.to = lex.expect(Tok::Ident, "as target state").text;
      lex.expect(Tok::Comma, "after target state");
      t.write = parse_symbol(lex.next());
      lex.expect(Tok::Comma, "after written symbol");
      Token mv = lex.expect(Tok::Ident, "as move");
      if (mv.text == "L") t.move = Move::Left;
      else if (mv.text == "R") t.move = Move::Right;
      else if (mv.text == "S") t.move = Move::Stay;
      else throw ParseError("expected move L, R or S", mv.line, mv.col);
      pending.push_back(std::move(t));
    } else if (kw.text == "bounds") {
      while (lex.at(Tok::Ident)) {
        Token key = lex.next();
        lex.expect(Tok::Eq, "in bounds");
        if (key.text == "kt") {
          Token v = lex.expect(Tok::Number, "as time exponent");
          m.time_exp = std::stoi(v.text);
        } else if (key.text == "kp") {
          if (lex.at(Tok::Ident) && lex.peek().text == "auto") {
            lex.next();
            m.space_exp = std::nullopt;
          } else {
            Token v = lex.expect(Tok::Number, "as space exponent");
            m.space_exp = std::stoi(v.text);
          }
        } else {
          throw ParseError("unknown bound '" + key.text + "'", key.line,
                           key.col);
        }
      }
    } else {
      throw ParseError("expected 'state', 'trans' or 'bounds'", kw.line,
                       kw.col);
    }
  }

  for (const auto& t : pending) {
    auto from = m.find_state(t.from);
    auto to = m.find_state(t.to);
    if (!from)
      throw ParseError("undeclared state '" + t.from + "'", t.line, t.col);
    if (!to) throw ParseError("undeclared state '" + t.to + "'", t.line, t.col);
    m.transitions[*from][static_cast<int>(t.read)].push_back(
        {*to, t.write, t.move});
  }

  if (m.initial < 0) throw ParseError("no initial state declared");
  if (m.accept < 0) throw ParseError("no accept state declared");
  if (m.reject < 0) throw ParseError("no reject state declared");
  if (m.time_exp < 1) throw ParseError("time exponent must be at least 1");
  if (m.space_exp && *m.space_exp < 1)
    throw ParseError("space exponent must be at least 1");
  return m;
}

NTMachine normalize_machine(const NTMachine& machine) {
  NTMachine m = machine;
  for (int q = 0; q < m.state_count(); ++q) {
    for (int s = 0; s < 3; ++s) {
      auto& choices = m.transitions[q][s];
      if (q == m.accept || q == m.reject) {
        MachineChoice loop{q, static_cast<TapeSym>(s), Move::Stay};
        choices = {loop, loop};
        continue;
      }
      if (choices.empty())
        throw DomainError("state '" + m.state_names[q] +
                          "' has no transition on symbol " +
                          std::to_string(s));
      if (choices.size() == 1) choices.push_back(choices[0]);
      if (choices.size() > 2)
        throw DomainError(
            "state '" + m.state_names[q] + "' has " +
            std::to_string(choices.size()) +
            " choices on one symbol; pre-split branches into a binary tree");
    }
  }
  m.normalized = true;
  return m;
}

// --- path counting ------------------------------------------------------------

namespace {

int auto_space_exp(const NTMachine& m, int n, std::size_t input_len) {
  if (m.space_exp) return *m.space_exp;
  if (n < 2) return 1;
  int k = 1;
  while (int_pow(n, k) < input_len) ++k;
  return k;
}

std::vector<TapeSym> initial_tape(const BitString& bits, std::uint64_t cells) {
  std::vector<TapeSym> tape(cells, TapeSym::Blank);
  for (std::size_t i = 0; i < bits.size() && i < cells; ++i) {
    if (bits[i] == '0') tape[i] = TapeSym::S0;
    else if (bits[i] == '1') tape[i] = TapeSym::S1;
    else throw ParseError("input code contains a character besides 0/1");
  }
  return tape;
}

// One run of T steps; choice bit j selects the transition of step j. A
// blocked move freezes the configuration for that step; in the default
// mode the whole path additionally becomes permanently non-accepting.
bool simulate_accepts(const NTMachine& m, std::vector<TapeSym> tape, int T,
                      std::uint64_t choices, bool clamp) {
  int state = m.initial;
  int head = 0;
  bool dead = false;
  int cells = static_cast<int>(tape.size());
  for (int step = 0; step < T; ++step) {
    const MachineChoice& tr =
        m.transitions[state][static_cast<int>(tape[head])]
                     [(choices >> step) & 1];
    int delta = tr.move == Move::Left ? -1 : tr.move == Move::Right ? 1 : 0;
    int next = head + delta;
    if (next < 0 || next >= cells) {
      if (clamp) {
        tape[head] = tr.write;
        state = tr.state;
      } else {
        dead = true;  // configuration unchanged
      }
      continue;
    }
    tape[head] = tr.write;
    state = tr.state;
    head = next;
  }
  return state == m.accept && !dead;
}

} // namespace

PathCount count_paths(const NTMachine& machine, int domain_size,
                      const BitString& input_bits,
                      const CountOptions& options) {
  if (!machine.normalized)
    throw DomainError("count_paths requires a normalized machine");
  Domain domain(domain_size);
  std::uint64_t T = int_pow(domain_size, machine.time_exp);
  if (T >= 62 || (std::uint64_t(1) << T) > options.max_paths)
    throw ResourceCapError("2^" + std::to_string(T) +
                           " computation paths exceed the cap");
  std::uint64_t cells =
      int_pow(domain_size, auto_space_exp(machine, domain_size,
                                          input_bits.size()));
  std::vector<TapeSym> tape = initial_tape(input_bits, cells);

  PathCount out;
  out.total = std::uint64_t(1) << T;
  for (std::uint64_t mask = 0; mask < out.total; ++mask)
    if (simulate_accepts(machine, tape, static_cast<int>(T), mask,
                         options.clamp))
      ++out.accepting;
  return out;
}

Majority majority_decision(const PathCount& count) {
  if (count.total == 0) throw DomainError("majority over zero paths");
  return 2 * count.accepting > count.total ? Majority::Accept
                                           : Majority::Reject;
}

// --- order sentence ------------------------------------------------------------

FormulaPtr build_order_formula(const Vocabulary& vocab, PredId less_than) {
  if (vocab[less_than].arity != 2)
    throw DomainError("order predicate must be binary");
  auto V = [](const char* s) { return Term::variable(s); };
  auto lt = [&](const char* a, const char* b) {
    return Formula::atom(less_than, {V(a), V(b)});
  };
  FormulaPtr irreflexive =
      Formula::forall("x", Formula::negation(lt("x", "x")));
  FormulaPtr transitive = Formula::forall(
      "x", Formula::forall(
               "y", Formula::forall(
                        "z", Formula::implies(
                                 Formula::conj(lt("x", "y"), lt("y", "z")),
                                 lt("x", "z")))));
  FormulaPtr total = Formula::forall(
      "x", Formula::forall(
               "y", Formula::disj_all(
                        {Formula::equal(V("x"), V("y")), lt("x", "y"),
                         lt("y", "x")})));
  return Formula::conj_all({irreflexive, transitive, total});
}

// --- compilation ------------------------------------------------------------

namespace {

using Vars = std::vector<std::string>;

Vars stem_vars(const std::string& stem, int k) {
  Vars out;
  out.reserve(k);
  for (int i = 1; i <= k; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

Vars concat(const Vars& a, const Vars& b) {
  Vars out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Builders for the auxiliary formulas of a compiled machine. Tuple
// positions are compared through the quantified order predicate; inner
// helper quantifiers use the reserved stems zz/mm/ww.
struct Builder {
  const CaptureLayout& lay;
  const NTMachine& m;

  static Term V(const std::string& s) { return Term::variable(s); }
  static std::vector<Term> terms(const Vars& vs) {
    std::vector<Term> out;
    out.reserve(vs.size());
    for (const auto& v : vs) out.push_back(V(v));
    return out;
  }

  FormulaPtr as_true(FormulaPtr f) const {
    return f ? f : Formula::always_true();
  }
  FormulaPtr as_false(FormulaPtr f) const {
    return f ? f : Formula::always_false();
  }
  FormulaPtr not_opt(FormulaPtr f) const {
    return f ? Formula::negation(f) : Formula::always_false();
  }

  FormulaPtr all(const Vars& vs, FormulaPtr body) const {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it)
      body = Formula::forall(*it, body);
    return body;
  }
  FormulaPtr any(const Vars& vs, FormulaPtr body) const {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it)
      body = Formula::exists(*it, body);
    return body;
  }

  FormulaPtr lt(const std::string& a, const std::string& b) const {
    return Formula::atom(lay.less_than, {V(a), V(b)});
  }
  FormulaPtr eq(const std::string& a, const std::string& b) const {
    return Formula::equal(V(a), V(b));
  }

  // x is the minimum / maximum element.
  FormulaPtr first(const std::string& x) const {
    return Formula::forall("zz",
                           Formula::disj(Formula::equal(V("zz"), V(x)),
                                         lt(x, "zz")));
  }
  FormulaPtr last(const std::string& x) const {
    return Formula::forall("zz",
                           Formula::disj(Formula::equal(V("zz"), V(x)),
                                         lt("zz", x)));
  }
  FormulaPtr succ(const std::string& x, const std::string& y) const {
    return Formula::conj(
        lt(x, y),
        Formula::forall("zz", Formula::negation(Formula::conj(
                                  lt(x, "zz"), lt("zz", y)))));
  }
  FormulaPtr succ_of_min(const std::string& x) const {
    return Formula::exists("mm",
                           Formula::conj(first("mm"), succ("mm", x)));
  }

  // Tuple predicates under the lexicographic order; empty tuples yield
  // nullptr (vacuously true for tfirst/tlast/teq, false for tsucc).
  FormulaPtr tfirst(const Vars& xs) const {
    std::vector<FormulaPtr> cs;
    for (const auto& x : xs) cs.push_back(first(x));
    return Formula::conj_all(cs);
  }
  FormulaPtr tlast(const Vars& xs) const {
    std::vector<FormulaPtr> cs;
    for (const auto& x : xs) cs.push_back(last(x));
    return Formula::conj_all(cs);
  }
  FormulaPtr teq(const Vars& xs, const Vars& ys) const {
    std::vector<FormulaPtr> cs;
    for (std::size_t i = 0; i < xs.size(); ++i)
      cs.push_back(eq(xs[i], ys[i]));
    return Formula::conj_all(cs);
  }
  FormulaPtr tsucc(const Vars& xs, const Vars& ys) const {
    std::vector<FormulaPtr> ds;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::vector<FormulaPtr> cs;
      for (std::size_t j = 0; j < i; ++j) cs.push_back(eq(xs[j], ys[j]));
      cs.push_back(succ(xs[i], ys[i]));
      for (std::size_t j = i + 1; j < xs.size(); ++j) {
        cs.push_back(last(xs[j]));
        cs.push_back(first(ys[j]));
      }
      ds.push_back(Formula::conj_all(cs));
    }
    return Formula::disj_all(ds);
  }
  // ys = xs + 2, via an intermediate tuple with the given stem.
  FormulaPtr tsucc2(const Vars& xs, const Vars& ys,
                    const std::string& stem) const {
    Vars mid = stem_vars(stem, static_cast<int>(xs.size()));
    return any(mid, Formula::conj(as_false(tsucc(xs, mid)),
                                  as_false(tsucc(mid, ys))));
  }
  // Cell-address predicates on position tuples: rank < n holds exactly
  // when every component but the last is minimal; rank = n is the address
  // of the header terminator (digits 0..0,1,0).
  FormulaPtr rank_lt_n(const Vars& ps) const {
    std::vector<FormulaPtr> cs;
    for (std::size_t j = 0; j + 1 < ps.size(); ++j)
      cs.push_back(first(ps[j]));
    return Formula::conj_all(cs);  // nullptr when k_p == 1
  }
  FormulaPtr rank_eq_n(const Vars& ps) const {
    if (ps.size() < 2) return Formula::always_false();
    std::vector<FormulaPtr> cs;
    for (std::size_t j = 0; j + 2 < ps.size(); ++j)
      cs.push_back(first(ps[j]));
    cs.push_back(succ_of_min(ps[ps.size() - 2]));
    cs.push_back(first(ps[ps.size() - 1]));
    return Formula::conj_all(cs);
  }

  // Machine-layout atoms.
  FormulaPtr state_at(int q, const Vars& ts) const {
    return Formula::atom(lay.state_preds[q], terms(ts));
  }
  FormulaPtr head_at(const Vars& ts, const Vars& ps) const {
    return Formula::atom(lay.head, terms(concat(ts, ps)));
  }
  FormulaPtr tape_at(TapeSym s, const Vars& ts, const Vars& ps) const {
    return Formula::atom(lay.tape[static_cast<int>(s)],
                         terms(concat(ts, ps)));
  }
  FormulaPtr choice_is(int c, const Vars& ts) const {
    FormulaPtr a = Formula::atom(lay.choice, terms(ts));
    return c ? a : Formula::negation(a);
  }
  FormulaPtr sigma_atom(std::size_t i, const Vars& as) const {
    auto id = static_cast<PredId>(i);
    return Formula::atom(id, terms(as));
  }
  FormulaPtr match_atom(std::size_t i, const Vars& ps, const Vars& as) const {
    return Formula::atom(lay.match[i], terms(concat(ps, as)));
  }

  FormulaPtr read_is(TapeSym s, const Vars& ts) const {
    Vars ps = stem_vars("ww", lay.k_p);
    return any(ps, Formula::conj(head_at(ts, ps), tape_at(s, ts, ps)));
  }
  FormulaPtr head_at_boundary(const Vars& ts, bool left) const {
    Vars ps = stem_vars("ww", lay.k_p);
    return any(ps, Formula::conj(head_at(ts, ps), as_true(left ? tfirst(ps)
                                                               : tlast(ps))));
  }

  // The selected transition would move off the tape.
  FormulaPtr blocked(const Vars& ts) const {
    std::vector<FormulaPtr> ds;
    for (int q = 0; q < m.state_count(); ++q)
      for (int s = 0; s < 3; ++s)
        for (int c = 0; c < 2; ++c) {
          const MachineChoice& tr = m.transitions[q][s][c];
          if (tr.move == Move::Stay) continue;
          ds.push_back(Formula::conj_all(
              {state_at(q, ts), read_is(static_cast<TapeSym>(s), ts),
               choice_is(c, ts),
               head_at_boundary(ts, tr.move == Move::Left)}));
        }
    return Formula::disj_all(ds);  // nullptr when every move is Stay
  }

  // The transition selected at ts leads into the accept state.
  FormulaPtr peek_accept(const Vars& ts) const {
    std::vector<FormulaPtr> ds;
    for (int q = 0; q < m.state_count(); ++q)
      for (int s = 0; s < 3; ++s)
        for (int c = 0; c < 2; ++c)
          if (m.transitions[q][s][c].state == m.accept)
            ds.push_back(Formula::conj_all(
                {state_at(q, ts), read_is(static_cast<TapeSym>(s), ts),
                 choice_is(c, ts)}));
    return disj_or_false(ds);
  }

  FormulaPtr disj_or_false(const std::vector<FormulaPtr>& ds) const {
    return as_false(Formula::disj_all(ds));
  }
};

} // namespace

CompiledCapture compile_machine(const NTMachine& machine,
                                const Vocabulary& sigma, int max_n) {
  if (!machine.normalized)
    throw DomainError("compile_machine requires a normalized machine");
  if (sigma.size() == 0)
    throw DomainError("compilation requires a non-empty input vocabulary");

  CompiledCapture out;
  out.machine = machine;
  CaptureLayout& lay = out.layout;
  lay.k_t = machine.time_exp;

  if (machine.space_exp) {
    lay.k_p = *machine.space_exp;
  } else {
    int top = std::max(2, max_n);
    int k = 1;
    for (;;) {
      bool fits = true;
      for (int n = 2; n <= top; ++n)
        if (int_pow(n, k) < pair_code_length(sigma, n)) fits = false;
      if (fits) break;
      ++k;
    }
    lay.k_p = k;
  }
  out.machine.space_exp = lay.k_p;

  NetworkSpec& spec = out.spec;
  auto add_aux = [&](const std::string& name, int arity) -> PredId {
    try {
      return spec.vocabulary.add({name, arity});
    } catch (const DomainError&) {
      throw DomainError("auxiliary predicate '" + name +
                        "' collides with an input predicate");
    }
  };

  for (const auto& p : sigma.predicates()) {
    PredId id = spec.vocabulary.add(p);
    spec.sigma.push_back(id);
  }
  spec.sigma_declared = true;

  int m_arity = lay.k_t + lay.k_p;
  lay.less_than = add_aux("less_than", 2);
  lay.choice = add_aux("choice", lay.k_t);
  for (std::size_t i = 0; i < sigma.predicates().size(); ++i)
    lay.match.push_back(add_aux("match_" + sigma.predicates()[i].name,
                                lay.k_p + sigma.predicates()[i].arity));
  for (const auto& name : machine.state_names)
    lay.state_preds.push_back(add_aux("state_" + name, lay.k_t));
  lay.head = add_aux("head", m_arity);
  lay.tape[0] = add_aux("tape_0", m_arity);
  lay.tape[1] = add_aux("tape_1", m_arity);
  lay.tape[2] = add_aux("tape_blank", m_arity);
  lay.accepted = add_aux("accepted", 0);
  lay.valid = add_aux("valid", 0);

  Rational half(1, 2);
  for (PredId p = 0; p < spec.vocabulary.size(); ++p)
    if (p != lay.accepted && p != lay.valid)
      spec.roots.push_back({p, half});

  Builder bx{lay, out.machine};
  Vars ts = stem_vars("t", lay.k_t);
  Vars us = stem_vars("u", lay.k_t);
  Vars ps = stem_vars("p", lay.k_p);
  Vars qs = stem_vars("q", lay.k_p);
  Vars rs = stem_vars("r", lay.k_p);

  std::vector<FormulaPtr> ax;

  // Exactly one state per time.
  {
    std::vector<FormulaPtr> some, nopair;
    for (int q = 0; q < machine.state_count(); ++q) {
      some.push_back(bx.state_at(q, ts));
      for (int q2 = q + 1; q2 < machine.state_count(); ++q2)
        nopair.push_back(Formula::negation(
            Formula::conj(bx.state_at(q, ts), bx.state_at(q2, ts))));
    }
    ax.push_back(bx.all(ts, Formula::conj_all({Formula::disj_all(some),
                                               Formula::conj_all(nopair)})));
  }

  // Exactly one head position per time.
  ax.push_back(bx.all(ts, bx.any(ps, bx.head_at(ts, ps))));
  ax.push_back(bx.all(concat(ts, concat(ps, qs)),
                      Formula::implies(Formula::conj(bx.head_at(ts, ps),
                                                     bx.head_at(ts, qs)),
                                       bx.as_true(bx.teq(ps, qs)))));

  // Exactly one symbol per cell and time.
  {
    std::vector<FormulaPtr> some, nopair;
    for (int s = 0; s < 3; ++s) {
      some.push_back(bx.tape_at(static_cast<TapeSym>(s), ts, ps));
      for (int s2 = s + 1; s2 < 3; ++s2)
        nopair.push_back(Formula::negation(Formula::conj(
            bx.tape_at(static_cast<TapeSym>(s), ts, ps),
            bx.tape_at(static_cast<TapeSym>(s2), ts, ps))));
    }
    ax.push_back(bx.all(concat(ts, ps),
                        Formula::conj_all({Formula::disj_all(some),
                                           Formula::conj_all(nopair)})));
  }

  // Initial state and head position.
  ax.push_back(bx.all(ts, Formula::implies(bx.as_true(bx.tfirst(ts)),
                                           bx.state_at(machine.initial, ts))));
  ax.push_back(bx.all(concat(ts, ps),
                      Formula::implies(bx.as_true(bx.tfirst(ts)),
                                       Formula::iff(bx.head_at(ts, ps),
                                                    bx.as_true(bx.tfirst(ps))))));

  // Input layout at the first time: n zeros, the terminator, then per
  // input predicate two cells per grounding in tuple-rank order, blanks
  // past the code. The match predicates walk the two-cell blocks.
  ax.push_back(bx.all(concat(ts, ps),
                      Formula::implies(
                          Formula::conj(bx.as_true(bx.tfirst(ts)),
                                        bx.as_true(bx.rank_lt_n(ps))),
                          bx.tape_at(TapeSym::S0, ts, ps))));
  ax.push_back(bx.all(concat(ts, ps),
                      Formula::implies(
                          Formula::conj(bx.as_true(bx.tfirst(ts)),
                                        bx.rank_eq_n(ps)),
                          bx.tape_at(TapeSym::S1, ts, ps))));

  for (std::size_t i = 0; i < sigma.predicates().size(); ++i) {
    int a = sigma.predicates()[i].arity;
    Vars as = stem_vars("a", a);
    Vars bs = stem_vars("b", a);
    std::vector<FormulaPtr> rhs;
    if (i == 0) {
      // First cell after the terminator starts the first block.
      rhs.push_back(Formula::conj(
          bx.any(qs, Formula::conj(bx.rank_eq_n(qs),
                                   bx.as_false(bx.tsucc(qs, ps)))),
          bx.as_true(bx.tfirst(as))));
    } else {
      int pa = sigma.predicates()[i - 1].arity;
      Vars prev = stem_vars("b", pa);
      rhs.push_back(bx.any(concat(rs, prev),
                           Formula::conj_all(
                               {bx.match_atom(i - 1, rs, prev),
                                bx.as_true(bx.tlast(prev)),
                                bx.tsucc2(rs, ps, "q"),
                                bx.as_true(bx.tfirst(as))})));
    }
    if (a > 0) {
      rhs.push_back(bx.any(concat(rs, bs),
                           Formula::conj_all(
                               {bx.match_atom(i, rs, bs),
                                bx.tsucc2(rs, ps, "q"),
                                bx.as_false(bx.tsucc(bs, as))})));
    }
    ax.push_back(bx.all(concat(ps, as),
                        Formula::iff(bx.match_atom(i, ps, as),
                                     Formula::disj_all(rhs))));

    // The two block cells carry the grounding's value.
    FormulaPtr value = bx.sigma_atom(i, as);
    ax.push_back(bx.all(concat(ts, concat(ps, as)),
                        Formula::implies(
                            Formula::conj(bx.as_true(bx.tfirst(ts)),
                                          bx.match_atom(i, ps, as)),
                            Formula::conj(
                                Formula::iff(bx.tape_at(TapeSym::S1, ts, ps),
                                             value),
                                Formula::iff(bx.tape_at(TapeSym::S0, ts, ps),
                                             Formula::negation(value))))));
    ax.push_back(bx.all(concat(ts, concat(ps, concat(qs, as))),
                        Formula::implies(
                            Formula::conj_all(
                                {bx.as_true(bx.tfirst(ts)),
                                 bx.match_atom(i, ps, as),
                                 bx.as_false(bx.tsucc(ps, qs))}),
                            Formula::conj(
                                Formula::iff(bx.tape_at(TapeSym::S1, ts, qs),
                                             value),
                                Formula::iff(bx.tape_at(TapeSym::S0, ts, qs),
                                             Formula::negation(value))))));
  }

  // Cells past the code are blank at the first time.
  {
    std::vector<FormulaPtr> covered;
    for (std::size_t i = 0; i < sigma.predicates().size(); ++i) {
      Vars as = stem_vars("a", sigma.predicates()[i].arity);
      covered.push_back(bx.any(as, bx.match_atom(i, ps, as)));
    }
    std::vector<FormulaPtr> prev_covered;
    for (std::size_t i = 0; i < sigma.predicates().size(); ++i) {
      Vars as = stem_vars("a", sigma.predicates()[i].arity);
      prev_covered.push_back(bx.any(as, bx.match_atom(i, rs, as)));
    }
    FormulaPtr in_block = Formula::disj(
        bx.as_false(Formula::disj_all(covered)),
        bx.any(rs, Formula::conj(bx.as_false(bx.tsucc(rs, ps)),
                                 bx.as_false(Formula::disj_all(prev_covered)))));
    ax.push_back(bx.all(concat(ts, ps),
                        Formula::implies(
                            Formula::conj_all(
                                {bx.as_true(bx.tfirst(ts)),
                                 bx.not_opt(bx.rank_lt_n(ps)),
                                 Formula::negation(bx.rank_eq_n(ps)),
                                 Formula::negation(in_block)}),
                            bx.tape_at(TapeSym::Blank, ts, ps))));
  }

  // Steps: the configuration at the successor time follows the selected
  // transition, or is frozen when the move would leave the tape.
  {
    FormulaPtr blk = bx.blocked(ts);
    std::vector<FormulaPtr> normal;
    for (int q = 0; q < machine.state_count(); ++q)
      for (int s = 0; s < 3; ++s)
        for (int c = 0; c < 2; ++c) {
          const MachineChoice& tr = machine.transitions[q][s][c];
          FormulaPtr guard = Formula::conj_all(
              {bx.state_at(q, ts), bx.read_is(static_cast<TapeSym>(s), ts),
               bx.choice_is(c, ts)});
          FormulaPtr headmove;
          if (tr.move == Move::Stay) {
            headmove = bx.head_at(us, ps);
          } else if (tr.move == Move::Left) {
            headmove = bx.all(qs, Formula::implies(
                                      bx.as_false(bx.tsucc(qs, ps)),
                                      bx.head_at(us, qs)));
          } else {
            headmove = bx.all(qs, Formula::implies(
                                      bx.as_false(bx.tsucc(ps, qs)),
                                      bx.head_at(us, qs)));
          }
          FormulaPtr at_head = bx.all(
              ps, Formula::implies(
                      bx.head_at(ts, ps),
                      Formula::conj(bx.tape_at(tr.write, us, ps), headmove)));
          normal.push_back(Formula::implies(
              guard, Formula::conj(bx.state_at(tr.state, us), at_head)));
        }
    // Untouched cells keep their symbol.
    {
      std::vector<FormulaPtr> keep;
      for (int s = 0; s < 3; ++s)
        keep.push_back(Formula::iff(bx.tape_at(static_cast<TapeSym>(s), us, ps),
                                    bx.tape_at(static_cast<TapeSym>(s), ts, ps)));
      normal.push_back(bx.all(ps, Formula::implies(
                                      Formula::negation(bx.head_at(ts, ps)),
                                      Formula::conj_all(keep))));
    }

    std::vector<FormulaPtr> frozen;
    for (int q = 0; q < machine.state_count(); ++q)
      frozen.push_back(Formula::implies(bx.state_at(q, ts),
                                        bx.state_at(q, us)));
    frozen.push_back(bx.all(ps, Formula::implies(bx.head_at(ts, ps),
                                                 bx.head_at(us, ps))));
    {
      std::vector<FormulaPtr> keep;
      for (int s = 0; s < 3; ++s)
        keep.push_back(Formula::iff(bx.tape_at(static_cast<TapeSym>(s), us, ps),
                                    bx.tape_at(static_cast<TapeSym>(s), ts, ps)));
      frozen.push_back(bx.all(ps, Formula::conj_all(keep)));
    }

    // blk == nullptr means no transition can ever block.
    FormulaPtr normal_part =
        blk ? Formula::implies(Formula::negation(blk),
                               Formula::conj_all(normal))
            : Formula::conj_all(normal);
    FormulaPtr frozen_part =
        blk ? Formula::implies(blk, Formula::conj_all(frozen)) : nullptr;
    FormulaPtr step = Formula::conj_all({normal_part, frozen_part});
    ax.push_back(bx.all(concat(ts, us),
                        Formula::implies(bx.as_false(bx.tsucc(ts, us)),
                                         step)));
  }

  FormulaPtr phi_order = build_order_formula(spec.vocabulary, lay.less_than);
  FormulaPtr phi_valid = Formula::conj_all(ax);
  spec.definitions.push_back({lay.valid, {},
                              Formula::conj(phi_order, phi_valid)});

  // Accepts: never blocked, and the transition selected at the last time
  // leads into the accept state.
  {
    FormulaPtr blk = bx.blocked(ts);
    std::vector<FormulaPtr> parts;
    if (blk) parts.push_back(bx.all(ts, Formula::negation(blk)));
    parts.push_back(bx.all(ts, Formula::implies(bx.as_true(bx.tlast(ts)),
                                                bx.peek_accept(ts))));
    spec.definitions.push_back({lay.accepted, {}, Formula::conj_all(parts)});
  }

  out.query.conditioned = {lay.accepted};
  out.query.conditioning = {lay.valid};
  spec.query = out.query;
  return out;
}

// --- structured counting ------------------------------------------------------

namespace {

// Pair code under the element order given by perm (perm[d] is the element
// with order-rank d); values come from a completed interpretation stored
// in canonical tuple order.
BitString encode_for_order(const Vocabulary& sigma, int n,
                           const std::vector<int>& perm,
                           const std::vector<std::vector<std::uint8_t>>& values) {
  BitString out;
  out.append(n, '0');
  out.push_back('1');
  for (PredId p = 0; p < sigma.size(); ++p) {
    int a = sigma[p].arity;
    std::uint64_t count = int_pow(n, a);
    for (std::uint64_t r = 0; r < count; ++r) {
      std::vector<int> digits = tuple_unrank(r, n, a);
      std::vector<int> tuple(a);
      for (int i = 0; i < a; ++i) tuple[i] = perm[digits[i]];
      bool v = values[p][tuple_rank(tuple, n)] != 0;
      out += v ? "11" : "00";
    }
  }
  return out;
}

} // namespace

std::optional<Rational> structured_conditional(const CompiledCapture& compiled,
                                               const Domain& domain,
                                               const EvidencePiece& evidence) {
  const NTMachine& m = compiled.machine;
  Vocabulary sigma = compiled.spec.sigma_vocab();
  if (!(evidence.vocab() == sigma))
    throw DomainError("evidence vocabulary must match the compiled input "
                      "vocabulary");
  if (evidence.domain().size != domain.size)
    throw DomainError("evidence domain does not match the query domain");

  int n = domain.size;
  std::uint64_t T = int_pow(n, compiled.layout.k_t);
  std::uint64_t S = int_pow(n, compiled.layout.k_p);
  if (T >= 62) throw ResourceCapError("time bound too large");

  // Unassigned groundings become extra half-weight coins.
  std::vector<std::pair<PredId, std::uint64_t>> free_slots;
  std::vector<std::vector<std::uint8_t>> values(sigma.size());
  for (PredId p = 0; p < sigma.size(); ++p) {
    std::uint64_t count = int_pow(n, sigma[p].arity);
    values[p].assign(count, 0);
    for (std::uint64_t r = 0; r < count; ++r) {
      Tristate t = evidence.get(p, r);
      if (t == Tristate::Unassigned) free_slots.emplace_back(p, r);
      else values[p][r] = t == Tristate::True ? 1 : 0;
    }
  }
  if (free_slots.size() > 24 || n > 8)
    throw ResourceCapError("structured enumeration too large");

  std::uint64_t completions = std::uint64_t(1) << free_slots.size();
  std::uint64_t num = 0, den = 0;

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    for (std::uint64_t mask = 0; mask < completions; ++mask) {
      for (std::size_t i = 0; i < free_slots.size(); ++i)
        values[free_slots[i].first][free_slots[i].second] = (mask >> i) & 1;
      BitString enc = encode_for_order(sigma, n, perm, values);
      std::vector<TapeSym> tape(S, TapeSym::Blank);
      for (std::size_t i = 0; i < enc.size() && i < S; ++i)
        tape[i] = enc[i] == '1' ? TapeSym::S1 : TapeSym::S0;
      for (std::uint64_t choices = 0; choices < (std::uint64_t(1) << T);
           ++choices) {
        ++den;
        if (simulate_accepts(m, tape, static_cast<int>(T), choices, false))
          ++num;
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  if (den == 0) return std::nullopt;
  return Rational::parse(std::to_string(num) + "/" + std::to_string(den));
}

// --- verification ------------------------------------------------------------

VerifyReport verify_capture(const NTMachine& machine, const Vocabulary& sigma,
                            int max_n, const VerifyOptions& options) {
  NTMachine norm = machine.normalized ? machine : normalize_machine(machine);
  CompiledCapture compiled = compile_machine(norm, sigma, max_n);

  VerifyReport report;
  for (int n = 1; n <= max_n; ++n) {
    Domain domain(n);
    std::uint64_t groundings = 0;
    for (const auto& p : sigma.predicates()) groundings += int_pow(n, p.arity);
    std::uint64_t pieces = 1;
    for (std::uint64_t i = 0; i < groundings; ++i) {
      pieces *= 3;
      if (pieces > options.max_pieces)
        throw ResourceCapError("3^" + std::to_string(groundings) +
                               " evidence pieces exceed the cap");
    }

    std::optional<GroundedNetwork> net;
    if (options.cross_check)
      net.emplace(ground(compiled.spec, domain));

    for (std::uint64_t code = 0; code < pieces; ++code) {
      // Decode `code` as base-3 digits over the groundings.
      EvidencePiece piece(sigma, domain);
      std::uint64_t rest = code;
      for (PredId p = 0; p < sigma.size(); ++p) {
        std::uint64_t count = int_pow(n, sigma[p].arity);
        for (std::uint64_t r = 0; r < count; ++r) {
          piece.set(p, r, static_cast<Tristate>(rest % 3));
          rest /= 3;
        }
      }

      BitString enc = encode_pair(piece);
      PathCount pc = count_paths(compiled.machine, n, enc, options.count);
      Majority mdec = majority_decision(pc);

      Rational p = *structured_conditional(compiled, domain, piece);
      bool spec_accepts = p > Rational(1, 2);

      if ((mdec == Majority::Accept) != spec_accepts)
        report.mismatches.push_back(
            {n, enc, pc, mdec, spec_accepts, p});

      if (options.cross_check) {
        AcceptanceDecision dec =
            decide_acceptance(*net, compiled.query, piece, options.engine);
        bool engine_accepts = dec.kind == AcceptanceDecision::Kind::Accept;
        if (!dec.probability || !(*dec.probability == p) ||
            engine_accepts != spec_accepts)
          report.mismatches.push_back(
              {n, enc, pc, mdec, engine_accepts,
               dec.probability ? *dec.probability : Rational::zero()});
        else
          ++report.cross_checks;
      }
    }
    report.checked.push_back({n, pieces});
  }
  return report;
}

} // namespace fobn
