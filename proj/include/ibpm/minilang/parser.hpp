// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ibpm/minilang/ast.hpp"

namespace ibpm::minilang {

class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& message)
      : Error("parse", std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

enum class TokenKind { Ident, Number, Keyword, Symbol, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  int line = 1;
  int column = 1;
};

// Splits source text into tokens; `//` starts a comment. Throws ParseError
// on characters outside the language.
std::vector<Token> lex(std::string_view source);

// Parses and checks a whole program: declared-before-use variables, no
// duplicate variables in scope, known classes, fields and methods, matching
// call arity, and no statements after a return in the same block.
Program parse(std::string_view source);

}  // namespace ibpm::minilang
