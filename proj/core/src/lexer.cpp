#include "lexer.hpp"

#include <cctype>

namespace fobn::detail {

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::HashConst: return "constant";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::Semi: return "';'";
    case Tok::Eq: return "'='";
    case Tok::Bang: return "'!'";
    case Tok::Amp: return "'&'";
    case Tok::Pipe: return "'|'";
    case Tok::Arrow: return "'->'";
    case Tok::IffOp: return "'<->'";
    case Tok::DefIff: return "'<=>'";
    case Tok::Slash: return "'/'";
    case Tok::End: return "end of input";
  }
  return "?";
}

Lexer::Lexer(const std::string& text) : text_(text) { advance(); }

Token Lexer::next() {
  Token out = cur_;
  advance();
  return out;
}

bool Lexer::accept(Tok k) {
  if (cur_.kind != k) return false;
  advance();
  return true;
}

Token Lexer::expect(Tok k, const std::string& what) {
  if (cur_.kind != k)
    throw ParseError("expected " + std::string(tok_name(k)) + " " + what +
                         ", found " + tok_name(cur_.kind),
                     cur_.line, cur_.col);
  return next();
}

void Lexer::fail(const std::string& msg) const {
  throw ParseError(msg, cur_.line, cur_.col);
}

void Lexer::advance() {
  auto peekc = [&](std::size_t off = 0) -> int {
    return pos_ + off < text_.size()
               ? static_cast<unsigned char>(text_[pos_ + off])
               : -1;
  };
  auto bump = [&] {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  };

  // Skip whitespace and comments.
  for (;;) {
    int c = peekc();
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      bump();
    } else if (c == '#' && !std::isdigit(peekc(1))) {
      while (peekc() != -1 && peekc() != '\n') bump();
    } else {
      break;
    }
  }

  cur_ = Token{};
  cur_.line = line_;
  cur_.col = col_;
  int c = peekc();
  if (c == -1) {
    cur_.kind = Tok::End;
    return;
  }

  if (std::isalpha(c) || c == '_') {
    std::string id;
    while (std::isalnum(peekc()) || peekc() == '_') {
      id += static_cast<char>(peekc());
      bump();
    }
    cur_.kind = Tok::Ident;
    cur_.text = std::move(id);
    return;
  }

  if (std::isdigit(c)) {
    std::string num;
    while (std::isdigit(peekc())) {
      num += static_cast<char>(peekc());
      bump();
    }
    // A decimal point only if digits follow; otherwise the dot is a
    // statement terminator.
    if (peekc() == '.' && std::isdigit(peekc(1))) {
      num += '.';
      bump();
      while (std::isdigit(peekc())) {
        num += static_cast<char>(peekc());
        bump();
      }
    }
    cur_.kind = Tok::Number;
    cur_.text = std::move(num);
    return;
  }

  if (c == '#') {
    bump();
    std::string num;
    while (std::isdigit(peekc())) {
      num += static_cast<char>(peekc());
      bump();
    }
    cur_.kind = Tok::HashConst;
    cur_.text = "#" + num;
    cur_.value = std::stol(num);
    return;
  }

  auto two = [&](char a, char b) { return c == a && peekc(1) == b; };
  if (two('-', '>')) {
    bump(); bump();
    cur_.kind = Tok::Arrow;
    return;
  }
  if (c == '<' && peekc(1) == '-' && peekc(2) == '>') {
    bump(); bump(); bump();
    cur_.kind = Tok::IffOp;
    return;
  }
  if (c == '<' && peekc(1) == '=' && peekc(2) == '>') {
    bump(); bump(); bump();
    cur_.kind = Tok::DefIff;
    return;
  }

  bump();
  switch (c) {
    case '(': cur_.kind = Tok::LParen; return;
    case ')': cur_.kind = Tok::RParen; return;
    case ',': cur_.kind = Tok::Comma; return;
    case ':': cur_.kind = Tok::Colon; return;
    case '.': cur_.kind = Tok::Dot; return;
    case ';': cur_.kind = Tok::Semi; return;
    case '=': cur_.kind = Tok::Eq; return;
    case '!': cur_.kind = Tok::Bang; return;
    case '&': cur_.kind = Tok::Amp; return;
    case '|': cur_.kind = Tok::Pipe; return;
    case '/': cur_.kind = Tok::Slash; return;
    default:
      throw ParseError(std::string("unexpected character '") +
                           static_cast<char>(c) + "'",
                       cur_.line, cur_.col);
  }
}

} // namespace fobn::detail
