#ifndef FOBN_ERRORS_HPP
#define FOBN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fobn {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lexical or syntactic failure in one of the text formats. Carries the
// 1-based source position when known (0 means "not applicable").
struct ParseError : Error {
  int line = 0;
  int column = 0;
  ParseError(std::string msg, int ln = 0, int col = 0)
      : Error(ln > 0 ? msg + " (line " + std::to_string(ln) + ", column " +
                           std::to_string(col) + ")"
                     : msg),
        line(ln), column(col) {}
};

// A well-formed request that refers to something that does not exist or
// does not fit (unknown predicate, arity mismatch, atom outside a network).
struct DomainError : Error {
  using Error::Error;
};

// An exhaustive enumeration would exceed the configured cap.
struct ResourceCapError : Error {
  using Error::Error;
};

} // namespace fobn

#endif
