// SPDX-License-Identifier: Apache-2.0
#include <cctype>
#include <set>

#include "ibpm/minilang/parser.hpp"

namespace ibpm::minilang {

namespace {

const std::set<std::string>& keywords() {
  static const std::set<std::string> k{"class", "extends", "int", "void", "if", "else", "while",
                                       "return", "new", "null", "len", "instanceof"};
  return k;
}

}  // namespace

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.text = std::string(src.substr(i, j - i));
      t.kind = keywords().count(t.text) ? TokenKind::Keyword : TokenKind::Ident;
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j - i > 18) throw ParseError(line, col, "integer literal too long");
      t.text = std::string(src.substr(i, j - i));
      t.kind = TokenKind::Number;
      advance(j - i);
    } else {
      static const char* two[] = {"==", "!=", "<=", ">="};
      t.kind = TokenKind::Symbol;
      for (const char* op : two) {
        if (src.substr(i, 2) == op) t.text = op;
      }
      if (t.text.empty()) {
        if (std::string("{}()[];,.=<>+-*").find(c) == std::string::npos) {
          throw ParseError(line, col, std::string("unexpected character '") + c + "'");
        }
        t.text = std::string(1, c);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = TokenKind::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

}  // namespace ibpm::minilang
