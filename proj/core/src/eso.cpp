#include "fobn/eso.hpp"

#include "fobn/errors.hpp"
#include "lexer.hpp"
#include "parser_detail.hpp"

namespace fobn {

Vocabulary EsoSentence::combined_vocab() const {
  Vocabulary v = input_vocab;
  for (const auto& p : quantified) v.add(p);
  return v;
}

EsoSentence parse_eso(const std::string& text) {
  detail::Lexer lex(text);
  using detail::Tok;
  using detail::Token;

  EsoSentence out;
  std::vector<Predicate> inputs;
  bool have_matrix = false;

  auto parse_pred_list = [&](std::vector<Predicate>& into) {
    do {
      Token name = lex.expect(Tok::Ident, "as predicate name");
      lex.expect(Tok::Slash, "before arity");
      Token ar = lex.expect(Tok::Number, "as arity");
      if (ar.text.find('.') != std::string::npos)
        throw ParseError("arity must be an integer", ar.line, ar.col);
      into.push_back({name.text, std::stoi(ar.text)});
    } while (lex.accept(Tok::Comma));
    lex.expect(Tok::Dot, "after predicate list");
  };

  while (!lex.at(Tok::End)) {
    Token kw = lex.expect(Tok::Ident, "at statement start");
    if (kw.text == "input") {
      parse_pred_list(inputs);
    } else if (kw.text == "quantified") {
      parse_pred_list(out.quantified);
    } else if (kw.text == "matrix") {
      out.input_vocab = Vocabulary(inputs);
      Vocabulary combined = out.combined_vocab();
      out.matrix = detail::parse_formula_expr(lex, combined);
      lex.expect(Tok::Dot, "after matrix formula");
      have_matrix = true;
    } else {
      throw ParseError("expected 'input', 'quantified' or 'matrix'", kw.line,
                       kw.col);
    }
  }
  if (!have_matrix) throw ParseError("missing 'matrix' statement");
  if (!free_variables(out.matrix).empty())
    throw ParseError("matrix must be a closed sentence");
  return out;
}

bool eso_check(const EsoSentence& sentence, const Structure& structure,
               std::uint64_t max_candidates) {
  if (!(structure.vocab == sentence.input_vocab))
    throw DomainError(
        "structure must interpret exactly the non-quantified predicates");

  int n = structure.domain.size;
  // Flat layout of the candidate bits for the quantified predicates.
  std::vector<std::uint64_t> sizes;
  std::uint64_t total_bits = 0;
  for (const auto& p : sentence.quantified) {
    sizes.push_back(int_pow(n, p.arity));
    total_bits += sizes.back();
  }
  if (total_bits >= 63 || (std::uint64_t(1) << total_bits) > max_candidates)
    throw ResourceCapError("eso_check: 2^" + std::to_string(total_bits) +
                           " candidate interpretations exceed the cap");

  Structure extended(sentence.combined_vocab(), structure.domain);
  for (PredId p = 0; p < structure.vocab.size(); ++p) {
    std::uint64_t count = int_pow(n, structure.vocab[p].arity);
    for (std::uint64_t r = 0; r < count; ++r)
      extended.interp.set(p, r, structure.interp.get(p, r));
  }

  int base = structure.vocab.size();
  std::uint64_t candidates = std::uint64_t(1) << total_bits;
  for (std::uint64_t mask = 0; mask < candidates; ++mask) {
    std::uint64_t bit = 0;
    for (std::size_t q = 0; q < sentence.quantified.size(); ++q)
      for (std::uint64_t r = 0; r < sizes[q]; ++r, ++bit)
        extended.interp.set(base + static_cast<PredId>(q), r,
                            (mask >> bit) & 1);
    if (evaluate(sentence.matrix, extended)) return true;
  }
  return false;
}

} // namespace fobn
