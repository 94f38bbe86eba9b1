#ifndef FOBN_SRC_PARSER_DETAIL_HPP
#define FOBN_SRC_PARSER_DETAIL_HPP

#include "fobn/logic.hpp"
#include "lexer.hpp"

namespace fobn::detail {

// Parses one formula starting at the lexer's current token, leaving the
// first token past the formula in place. Shared by the standalone formula
// parser and the specification parser.
FormulaPtr parse_formula_expr(Lexer& lex, const Vocabulary& vocab);

} // namespace fobn::detail

#endif
