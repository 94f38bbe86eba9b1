#ifndef FOBN_SRC_LEXER_HPP
#define FOBN_SRC_LEXER_HPP

#include <string>

#include "fobn/errors.hpp"

namespace fobn::detail {

enum class Tok {
  Ident,
  Number,     // digits, optionally with one interior decimal point
  HashConst,  // #123
  LParen,
  RParen,
  Comma,
  Colon,
  Dot,
  Semi,
  Eq,
  Bang,
  Amp,
  Pipe,
  Arrow,      // ->
  IffOp,      // <->
  DefIff,     // <=>
  Slash,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long value = 0;  // HashConst payload
  int line = 1;
  int col = 1;
};

const char* tok_name(Tok t);

// Hand-rolled scanner shared by the formula, specification, structure and
// machine file formats. `#` starts a comment unless immediately followed
// by a digit, in which case it is a domain constant.
class Lexer {
public:
  explicit Lexer(const std::string& text);

  const Token& peek() const { return cur_; }
  Token next();
  bool at(Tok k) const { return cur_.kind == k; }

  // Consumes the current token if it matches, else throws ParseError.
  Token expect(Tok k, const std::string& what);
  bool accept(Tok k);

  [[noreturn]] void fail(const std::string& msg) const;

private:
  void advance();
  std::string text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token cur_;
};

} // namespace fobn::detail

#endif
