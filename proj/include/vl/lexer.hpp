#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "vl/ast.hpp"

namespace vl {

struct SyntaxError : Error {
  SyntaxError(Span s, const std::string& msg) : Error(msg), span(s) {}
  Span span;
};

enum class Tok {
  Int, Version, Ident,
  KwModule, KwWhere, KwImport, KwLet, KwIn, KwCase, KwOf, KwIf, KwThen, KwElse,
  KwVer, KwUnversion,
  Lambda, Arrow, Equals, LParen, RParen, LBracket, RBracket, LBrace, RBrace,
  Comma, Semi, Colon,
  Plus, Minus, Star, EqEq, NotEq, Lt, Le, Gt, Ge, AndAnd, OrOr, Dot, Pipe,
  End
};

struct Token {
  Tok kind;
  std::string text;
  long value = 0;
  Span span;
};

inline const char* token_name(Tok k) {
  switch (k) {
    case Tok::Int: return "integer";
    case Tok::Version: return "version";
    case Tok::Ident: return "identifier";
    case Tok::KwModule: return "'module'";
    case Tok::KwWhere: return "'where'";
    case Tok::KwImport: return "'import'";
    case Tok::KwLet: return "'let'";
    case Tok::KwIn: return "'in'";
    case Tok::KwCase: return "'case'";
    case Tok::KwOf: return "'of'";
    case Tok::KwIf: return "'if'";
    case Tok::KwThen: return "'then'";
    case Tok::KwElse: return "'else'";
    case Tok::KwVer: return "'ver'";
    case Tok::KwUnversion: return "'unversion'";
    case Tok::Lambda: return "'\\'";
    case Tok::Arrow: return "'->'";
    case Tok::Equals: return "'='";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'/='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Dot: return "'.'";
    case Tok::Pipe: return "'|'";
    case Tok::End: return "end of input";
  }
  return "?";
}

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;

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
  auto make = [&](Tok k, std::size_t len, std::string text = {}) {
    Token t{k, std::move(text), 0, Span{i, i + len, line, col}};
    advance(len);
    out.push_back(std::move(t));
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      bool dotted = false;
      while (j < src.size()) {
        if (std::isdigit(static_cast<unsigned char>(src[j]))) {
          ++j;
          continue;
        }
        // a dot continues the number only when a digit follows (versions)
        if (src[j] == '.' && j + 1 < src.size() &&
            std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
          dotted = true;
          j += 2;
          continue;
        }
        break;
      }
      std::string text = src.substr(i, j - i);
      if (dotted) {
        make(Tok::Version, j - i, text);
      } else {
        Token t{Tok::Int, text, std::stol(text), Span{i, j, line, col}};
        advance(j - i);
        out.push_back(std::move(t));
      }
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                                src[j] == '_' || src[j] == '\''))
        ++j;
      std::string word = src.substr(i, j - i);
      Tok k = Tok::Ident;
      if (word == "module") k = Tok::KwModule;
      else if (word == "where") k = Tok::KwWhere;
      else if (word == "import") k = Tok::KwImport;
      else if (word == "let") k = Tok::KwLet;
      else if (word == "in") k = Tok::KwIn;
      else if (word == "case") k = Tok::KwCase;
      else if (word == "of") k = Tok::KwOf;
      else if (word == "if") k = Tok::KwIf;
      else if (word == "then") k = Tok::KwThen;
      else if (word == "else") k = Tok::KwElse;
      else if (word == "ver") k = Tok::KwVer;
      else if (word == "unversion") k = Tok::KwUnversion;
      make(k, j - i, word);
      continue;
    }
    auto two = [&](const char* s) {
      return i + 1 < src.size() && src[i] == s[0] && src[i + 1] == s[1];
    };
    if (two("->")) { make(Tok::Arrow, 2); continue; }
    if (two("==")) { make(Tok::EqEq, 2); continue; }
    if (two("/=")) { make(Tok::NotEq, 2); continue; }
    if (two("<=")) { make(Tok::Le, 2); continue; }
    if (two(">=")) { make(Tok::Ge, 2); continue; }
    if (two("&&")) { make(Tok::AndAnd, 2); continue; }
    if (two("||")) { make(Tok::OrOr, 2); continue; }
    switch (c) {
      case '\\': make(Tok::Lambda, 1); continue;
      case '=': make(Tok::Equals, 1); continue;
      case '(': make(Tok::LParen, 1); continue;
      case ')': make(Tok::RParen, 1); continue;
      case '[': make(Tok::LBracket, 1); continue;
      case ']': make(Tok::RBracket, 1); continue;
      case '{': make(Tok::LBrace, 1); continue;
      case '}': make(Tok::RBrace, 1); continue;
      case ',': make(Tok::Comma, 1); continue;
      case ';': make(Tok::Semi, 1); continue;
      case ':': make(Tok::Colon, 1); continue;
      case '+': make(Tok::Plus, 1); continue;
      case '-': make(Tok::Minus, 1); continue;
      case '*': make(Tok::Star, 1); continue;
      case '<': make(Tok::Lt, 1); continue;
      case '.': make(Tok::Dot, 1); continue;
      case '|': make(Tok::Pipe, 1); continue;
      case '>': make(Tok::Gt, 1); continue;
      default:
        throw SyntaxError(Span{i, i + 1, line, col},
                          std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back(Token{Tok::End, "", 0, Span{i, i, line, col}});
  return out;
}

}  // namespace vl
