#pragma once

// Parser for lambda-VL core terms in ASCII:
//
//   [t]                      promotion
//   <{M=1.0.0} = t, ...>     versioned record
//   <... | {M=1.0.0}>        record with a chosen label
//   t.{M=1.0.0}              extraction
//   let [x] = t in t         contextual let
//   \x -> t, \[x] -> t       abstraction
//
// Used by the core-eval command to feed the evaluator directly.

#include <map>
#include <set>
#include <string>

#include "vl/lambdavl.hpp"
#include "vl/lexer.hpp"

namespace vl {

class CoreParser {
 public:
  explicit CoreParser(const std::string& src) : toks_(lex(src)) {}

  LTermPtr parse() {
    LTermPtr t = expr();
    if (peek().kind != Tok::End)
      throw SyntaxError(peek().span, "trailing input after core term");
    return t;
  }

  // Modules and versions mentioned anywhere in the parsed term.
  const std::map<ModuleName, std::set<VersionString>>& mentioned() const { return mentioned_; }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<ModuleName, std::set<VersionString>> mentioned_;

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at(Tok k) const { return peek().kind == k; }
  const Token& expect(Tok k) {
    if (!at(k))
      throw SyntaxError(peek().span, std::string("expected ") + token_name(k) + ", found " +
                                         token_name(peek().kind));
    return next();
  }

  VersionLabel label() {
    expect(Tok::LBrace);
    std::map<ModuleName, VersionString> a;
    while (true) {
      std::string m = expect(Tok::Ident).text;
      expect(Tok::Equals);
      if (!at(Tok::Version) && !at(Tok::Int))
        throw SyntaxError(peek().span, "expected a version");
      std::string v = next().text;
      a[m] = v;
      mentioned_[m].insert(v);
      if (!at(Tok::Comma)) break;
      next();
    }
    expect(Tok::RBrace);
    return VersionLabel(std::move(a));
  }

  LTermPtr expr() {
    if (at(Tok::Lambda)) {
      next();
      MPatternPtr p;
      if (at(Tok::LBracket)) {
        next();
        p = MPattern::promote(MPattern::var(expect(Tok::Ident).text));
        expect(Tok::RBracket);
      } else {
        p = MPattern::var(expect(Tok::Ident).text);
      }
      expect(Tok::Arrow);
      return LTerm::lam(p, expr());
    }
    if (at(Tok::KwLet)) {
      next();
      expect(Tok::LBracket);
      std::string x = expect(Tok::Ident).text;
      expect(Tok::RBracket);
      expect(Tok::Equals);
      LTermPtr bound = expr();
      expect(Tok::KwIn);
      return LTerm::clet(x, bound, expr());
    }
    LTermPtr t = postfix();
    while (at(Tok::Int) || at(Tok::Ident) || at(Tok::LParen) || at(Tok::LBracket) || at(Tok::Lt))
      t = LTerm::app(t, postfix());
    return t;
  }

  LTermPtr postfix() {
    LTermPtr t = atom();
    while (at(Tok::Dot)) {
      next();
      t = LTerm::extract(t, label());
    }
    return t;
  }

  LTermPtr atom() {
    switch (peek().kind) {
      case Tok::Int:
        return LTerm::integer(next().value);
      case Tok::Ident:
        return LTerm::var(next().text);
      case Tok::LBracket: {
        next();
        LTermPtr body = expr();
        expect(Tok::RBracket);
        return LTerm::promote(body);
      }
      case Tok::Lt: {
        next();
        std::map<VersionLabel, LTermPtr> entries;
        while (true) {
          VersionLabel l = label();
          expect(Tok::Equals);
          entries[l] = expr();
          if (!at(Tok::Comma)) break;
          next();
        }
        if (at(Tok::Pipe)) {
          next();
          VersionLabel chosen = label();
          expect(Tok::Gt);
          return LTerm::vrecord_at(std::move(entries), chosen);
        }
        expect(Tok::Gt);
        return LTerm::vrecord(std::move(entries));
      }
      case Tok::LParen: {
        next();
        LTermPtr t = expr();
        expect(Tok::RParen);
        return t;
      }
      default:
        throw SyntaxError(peek().span, std::string("unexpected ") + token_name(peek().kind));
    }
  }
};

inline LTermPtr parse_core_term(const std::string& src) { return CoreParser(src).parse(); }

}  // namespace vl
