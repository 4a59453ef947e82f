#pragma once

// Recursive-descent parser for the surface language. Haskell-flavored:
//
//   module M where
//   import N
//   f x = case x of { 0 -> 1; y -> y * f' y }
//
// Top-level items start in column 1; continuation lines are indented.
// `if c then a else b` desugars to `case c of { 1 -> a; _ -> b }` and
// `&&`/`||` to two-branch cases, since booleans are integers 0/1.

#include <set>
#include <string>
#include <vector>

#include "vl/lexer.hpp"

namespace vl {

struct DuplicateDefinition : Error {
  DuplicateDefinition(const std::string& symbol, Span s)
      : Error("duplicate definition of '" + symbol + "'"), span(s) {}
  Span span;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : toks_(lex(src)) {}

  SurfaceModule parse_module() {
    SurfaceModule mod;
    expect(Tok::KwModule);
    mod.name = expect(Tok::Ident).text;
    expect(Tok::KwWhere);
    while (peek().kind == Tok::KwImport) {
      next();
      mod.imports.push_back(expect(Tok::Ident).text);
    }
    std::set<std::string> seen;
    while (peek().kind != Tok::End) {
      SurfaceDef def = parse_def();
      if (!seen.insert(def.symbol).second) throw DuplicateDefinition(def.symbol, def.span);
      mod.defs.push_back(std::move(def));
    }
    return mod;
  }

  STermPtr parse_expr_only() {
    auto t = expr();
    expect(Tok::End);
    return t;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int fresh_wildcard_ = 0;

  const Token& peek(std::size_t k = 0) const {
    std::size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at(Tok k) const { return peek().kind == k; }

  const Token& expect(Tok k) {
    if (!at(k)) fail({k});
    return next();
  }

  [[noreturn]] void fail(std::initializer_list<Tok> expected) const {
    std::string msg = "expected ";
    bool first = true;
    for (Tok k : expected) {
      if (!first) msg += " or ";
      msg += token_name(k);
      first = false;
    }
    msg += ", found " + std::string(token_name(peek().kind));
    if (!peek().text.empty()) msg += " '" + peek().text + "'";
    throw SyntaxError(peek().span, msg);
  }

  // A token in column 1 opens the next top-level item.
  bool boundary() const { return peek().kind == Tok::End || peek().span.col == 1; }

  SurfaceDef parse_def() {
    Token name = expect(Tok::Ident);
    std::vector<std::string> params;
    while (at(Tok::Ident)) params.push_back(next().text);
    expect(Tok::Equals);
    STermPtr body = expr();
    for (auto it = params.rbegin(); it != params.rend(); ++it)
      body = STerm::lam(*it, body, name.span);
    return SurfaceDef{name.text, body, name.span};
  }

  std::string fresh_wildcard() { return "_" + std::to_string(fresh_wildcard_++); }

  STermPtr expr() {
    switch (peek().kind) {
      case Tok::Lambda: return lambda_expr();
      case Tok::KwLet: return let_expr();
      case Tok::KwCase: return case_expr();
      case Tok::KwIf: return if_expr();
      case Tok::KwVer: return ver_expr();
      case Tok::KwUnversion: return unversion_expr();
      default: return or_expr();
    }
  }

  STermPtr lambda_expr() {
    Span s = peek().span;
    expect(Tok::Lambda);
    std::vector<std::string> params;
    params.push_back(expect(Tok::Ident).text);
    while (at(Tok::Ident)) params.push_back(next().text);
    expect(Tok::Arrow);
    STermPtr body = expr();
    for (auto it = params.rbegin(); it != params.rend(); ++it)
      body = STerm::lam(*it, body, s);
    return body;
  }

  STermPtr let_expr() {
    Span s = peek().span;
    expect(Tok::KwLet);
    std::vector<std::pair<std::string, STermPtr>> binds;
    auto one_bind = [&] {
      std::string name = expect(Tok::Ident).text;
      expect(Tok::Equals);
      binds.emplace_back(std::move(name), expr());
    };
    one_bind();
    while (at(Tok::Semi)) {
      next();
      one_bind();
    }
    expect(Tok::KwIn);
    STermPtr body = expr();
    for (auto it = binds.rbegin(); it != binds.rend(); ++it)
      body = STerm::let(it->first, it->second, body, s);
    return body;
  }

  STermPtr case_expr() {
    Span s = peek().span;
    expect(Tok::KwCase);
    STermPtr scrutinee = expr();
    expect(Tok::KwOf);
    expect(Tok::LBrace);
    std::vector<SBranch> branches;
    while (true) {
      SPatternPtr p = pattern();
      expect(Tok::Arrow);
      branches.push_back(SBranch{p, expr()});
      if (at(Tok::Semi)) {
        next();
        if (at(Tok::RBrace)) break;
        continue;
      }
      break;
    }
    expect(Tok::RBrace);
    return STerm::case_of(scrutinee, std::move(branches), s);
  }

  STermPtr if_expr() {
    Span s = peek().span;
    expect(Tok::KwIf);
    STermPtr c = expr();
    expect(Tok::KwThen);
    STermPtr then_branch = expr();
    expect(Tok::KwElse);
    STermPtr else_branch = expr();
    return STerm::case_of(
        c,
        {SBranch{SPattern::integer(1, s), then_branch},
         SBranch{SPattern::var(fresh_wildcard(), s), else_branch}},
        s);
  }

  STermPtr ver_expr() {
    Span s = peek().span;
    expect(Tok::KwVer);
    expect(Tok::LBracket);
    PartialLabel label;
    while (true) {
      std::string m = expect(Tok::Ident).text;
      expect(Tok::Equals);
      if (!at(Tok::Version) && !at(Tok::Int)) fail({Tok::Version});
      label[m] = next().text;
      if (at(Tok::Comma)) {
        next();
        continue;
      }
      break;
    }
    expect(Tok::RBracket);
    expect(Tok::KwOf);
    return STerm::ver_of(std::move(label), atom(), s);
  }

  STermPtr unversion_expr() {
    Span s = peek().span;
    expect(Tok::KwUnversion);
    return STerm::unversion(atom(), s);
  }

  STermPtr or_expr() {
    STermPtr l = and_expr();
    while (at(Tok::OrOr) && !boundary()) {
      Span s = next().span;
      STermPtr r = and_expr();
      l = STerm::case_of(l,
                         {SBranch{SPattern::integer(1, s), STerm::integer(1, s)},
                          SBranch{SPattern::var(fresh_wildcard(), s), r}},
                         s);
    }
    return l;
  }

  STermPtr and_expr() {
    STermPtr l = cmp_expr();
    while (at(Tok::AndAnd) && !boundary()) {
      Span s = next().span;
      STermPtr r = cmp_expr();
      l = STerm::case_of(l,
                         {SBranch{SPattern::integer(1, s), r},
                          SBranch{SPattern::var(fresh_wildcard(), s), STerm::integer(0, s)}},
                         s);
    }
    return l;
  }

  STermPtr cmp_expr() {
    STermPtr l = cons_expr();
    BinOpKind op;
    switch (peek().kind) {
      case Tok::EqEq: op = BinOpKind::Eq; break;
      case Tok::NotEq: op = BinOpKind::Ne; break;
      case Tok::Lt: op = BinOpKind::Lt; break;
      case Tok::Le: op = BinOpKind::Le; break;
      case Tok::Gt: op = BinOpKind::Gt; break;
      case Tok::Ge: op = BinOpKind::Ge; break;
      default: return l;
    }
    Span s = next().span;
    return STerm::binop(op, l, cons_expr(), s);
  }

  STermPtr cons_expr() {
    STermPtr l = add_expr();
    if (at(Tok::Colon) && !boundary()) {
      Span s = next().span;
      return STerm::cons(l, cons_expr(), s);  // right-associative
    }
    return l;
  }

  STermPtr add_expr() {
    STermPtr l = mul_expr();
    while ((at(Tok::Plus) || at(Tok::Minus)) && !boundary()) {
      BinOpKind op = at(Tok::Plus) ? BinOpKind::Add : BinOpKind::Sub;
      Span s = next().span;
      l = STerm::binop(op, l, mul_expr(), s);
    }
    return l;
  }

  STermPtr mul_expr() {
    STermPtr l = app_expr();
    while (at(Tok::Star) && !boundary()) {
      Span s = next().span;
      l = STerm::binop(BinOpKind::Mul, l, app_expr(), s);
    }
    return l;
  }

  bool starts_atom() const {
    switch (peek().kind) {
      case Tok::Int:
      case Tok::Ident:
      case Tok::LParen:
      case Tok::LBracket:
        return true;
      default:
        return false;
    }
  }

  STermPtr app_expr() {
    STermPtr fn = atom();
    while (starts_atom() && !boundary()) {
      STermPtr arg = atom();
      fn = STerm::app(fn, arg, fn->span);
    }
    return fn;
  }

  STermPtr atom() {
    Span s = peek().span;
    switch (peek().kind) {
      case Tok::Int:
        return STerm::integer(next().value, s);
      case Tok::Ident:
        return STerm::var(next().text, s);
      case Tok::LParen: {
        next();
        STermPtr first = expr();
        if (at(Tok::Comma)) {
          next();
          STermPtr second = expr();
          expect(Tok::RParen);
          return STerm::pair(first, second, s);
        }
        expect(Tok::RParen);
        return first;
      }
      case Tok::LBracket: {
        next();
        std::vector<STermPtr> elems;
        if (!at(Tok::RBracket)) {
          elems.push_back(expr());
          while (at(Tok::Comma)) {
            next();
            elems.push_back(expr());
          }
        }
        expect(Tok::RBracket);
        STermPtr list = STerm::nil(s);
        for (auto it = elems.rbegin(); it != elems.rend(); ++it)
          list = STerm::cons(*it, list, s);
        return list;
      }
      default:
        fail({Tok::Int, Tok::Ident, Tok::LParen, Tok::LBracket});
    }
  }

  SPatternPtr pattern() {
    SPatternPtr p = apattern();
    if (at(Tok::Colon)) {
      Span s = next().span;
      return SPattern::cons(p, pattern(), s);
    }
    return p;
  }

  SPatternPtr apattern() {
    Span s = peek().span;
    switch (peek().kind) {
      case Tok::Int:
        return SPattern::integer(next().value, s);
      case Tok::Ident: {
        std::string n = next().text;
        if (n == "_") n = fresh_wildcard();
        return SPattern::var(std::move(n), s);
      }
      case Tok::LParen: {
        next();
        SPatternPtr first = pattern();
        if (at(Tok::Comma)) {
          next();
          SPatternPtr second = pattern();
          expect(Tok::RParen);
          return SPattern::pair(first, second, s);
        }
        expect(Tok::RParen);
        return first;
      }
      case Tok::LBracket: {
        next();
        std::vector<SPatternPtr> elems;
        if (!at(Tok::RBracket)) {
          elems.push_back(pattern());
          while (at(Tok::Comma)) {
            next();
            elems.push_back(pattern());
          }
        }
        expect(Tok::RBracket);
        SPatternPtr list = SPattern::nil(s);
        for (auto it = elems.rbegin(); it != elems.rend(); ++it)
          list = SPattern::cons(*it, list, s);
        return list;
      }
      default:
        fail({Tok::Int, Tok::Ident, Tok::LParen, Tok::LBracket});
    }
  }
};

inline SurfaceModule parse_module(const std::string& source) {
  return Parser(source).parse_module();
}

inline STermPtr parse_term(const std::string& source) {
  return Parser(source).parse_expr_only();
}

}  // namespace vl
