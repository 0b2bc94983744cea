#include "lr/parser.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "lr/lexer.hpp"

namespace lr {

namespace {

bool is_level_keyword(Tok t) {
  return t == Tok::KwTask || t == Tok::KwSkill || t == Tok::KwAction || t == Tok::KwComponent;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string file)
      : toks_(std::move(tokens)), file_(std::move(file)) {}

  ParseResult run() {
    ParseResult r;
    r.unit.file = file_;
    while (!at(Tok::Eof)) {
      if (at(Tok::KwUse)) {
        advance();
        if (at(Tok::String)) {
          r.unit.uses.push_back(cur().text);
          advance();
        } else {
          error("expected file name string after 'use'");
        }
        expect(Tok::Semi, "';'");
      } else if (is_level_keyword(cur().kind)) {
        auto c = parse_component();
        if (c) r.unit.components.push_back(std::move(*c));
      } else {
        error(fmt::format("expected declaration, found {}", token_name(cur().kind)));
        // resynchronize at the next top-level declaration
        while (!at(Tok::Eof) && !is_level_keyword(cur().kind) && !at(Tok::KwUse)) advance();
      }
    }
    r.diagnostics = std::move(diags_);
    return r;
  }

  CondPtr condition_entry() {
    CondPtr c = parse_cond();
    if (!at(Tok::Eof)) error("unexpected trailing input after condition");
    return c;
  }

  std::vector<Diagnostic> take_diags() { return std::move(diags_); }

 private:
  std::vector<Token> toks_;
  std::string file_;
  size_t idx_ = 0;
  int depth_ = 0;  // nesting guard for components and condition groups
  std::vector<Diagnostic> diags_;

  const Token& cur() const { return toks_[idx_]; }
  const Token& prev() const { return toks_[idx_ ? idx_ - 1 : 0]; }
  bool at(Tok t) const { return cur().kind == t; }
  void advance() {
    if (idx_ + 1 < toks_.size()) ++idx_;
  }
  bool accept(Tok t) {
    if (at(t)) {
      advance();
      return true;
    }
    return false;
  }
  void error(const std::string& msg) { error_at(cur().span, msg); }
  void error_at(const SourceSpan& sp, const std::string& msg) {
    diags_.push_back(Diagnostic{"E050", Severity::Error, sp, msg});
  }
  bool expect(Tok t, const char* what) {
    if (accept(t)) return true;
    error(fmt::format("expected {}, found {}", what, token_name(cur().kind)));
    return false;
  }

  /// Skips to the next statement boundary inside a component body.
  void recover_item() {
    int depth = 0;
    while (!at(Tok::Eof)) {
      if (at(Tok::Semi) && depth == 0) {
        advance();
        return;
      }
      if (at(Tok::LBrace)) ++depth;
      if (at(Tok::RBrace)) {
        if (depth == 0) return;
        --depth;
      }
      advance();
    }
  }

  std::string parse_ident(const char* what) {
    if (at(Tok::Ident)) {
      std::string s = cur().text;
      advance();
      return s;
    }
    error(fmt::format("expected {}, found {}", what, token_name(cur().kind)));
    return "";
  }

  // QNAME / PATH: dotted identifier chain.
  std::string parse_qname() {
    std::string s = parse_ident("name");
    while (at(Tok::Dot)) {
      advance();
      s += "." + parse_ident("name segment");
    }
    return s;
  }

  std::optional<double> parse_signed_number() {
    bool neg = accept(Tok::Minus);
    if (!at(Tok::Number)) {
      error("expected number");
      return std::nullopt;
    }
    double v = cur().number;
    advance();
    return neg ? -v : v;
  }

  std::optional<Value> parse_literal() {
    if (at(Tok::Number) || at(Tok::Minus)) {
      auto n = parse_signed_number();
      if (!n) return std::nullopt;
      return Value::num(*n);
    }
    if (accept(Tok::KwTrue)) return Value::boolean(true);
    if (accept(Tok::KwFalse)) return Value::boolean(false);
    if (at(Tok::String)) {
      Value v = Value::str(cur().text);
      advance();
      return v;
    }
    if (accept(Tok::LBracket)) {
      std::vector<double> elems;
      if (!at(Tok::RBracket)) {
        do {
          auto n = parse_signed_number();
          if (!n) return std::nullopt;
          elems.push_back(*n);
        } while (accept(Tok::Comma));
      }
      if (!expect(Tok::RBracket, "']'")) return std::nullopt;
      return Value::vec(std::move(elems));
    }
    error(fmt::format("expected literal, found {}", token_name(cur().kind)));
    return std::nullopt;
  }

  std::optional<Expr> parse_expr() {
    SourceSpan sp = cur().span;
    if (at(Tok::Ident)) {
      Expr e;
      e.node = ParamRef{cur().text};
      e.span = sp;
      advance();
      return e;
    }
    auto lit = parse_literal();
    if (!lit) return std::nullopt;
    Expr e;
    e.node = std::move(*lit);
    e.span = sp;
    return e;
  }

  bool parse_arg_bindings(std::vector<ArgBinding>& out) {
    do {
      ArgBinding b;
      b.span = cur().span;
      b.name = parse_ident("argument name");
      if (b.name.empty()) return false;
      if (!expect(Tok::Assign, "'='")) return false;
      auto e = parse_expr();
      if (!e) return false;
      b.value = std::move(*e);
      out.push_back(std::move(b));
    } while (accept(Tok::Comma));
    return true;
  }

  // --- conditions --------------------------------------------------------

  CondPtr parse_cond() { return parse_or(); }

  CondPtr parse_or() {
    CondPtr lhs = parse_and();
    while (lhs && at(Tok::KwOr)) {
      SourceSpan sp = cur().span;
      advance();
      CondPtr rhs = parse_and();
      if (!rhs) return nullptr;
      lhs = make_cond(ConditionExpr{CondOr{lhs, rhs}, sp});
    }
    return lhs;
  }

  CondPtr parse_and() {
    CondPtr lhs = parse_not();
    while (lhs && at(Tok::KwAnd)) {
      SourceSpan sp = cur().span;
      advance();
      CondPtr rhs = parse_not();
      if (!rhs) return nullptr;
      lhs = make_cond(ConditionExpr{CondAnd{lhs, rhs}, sp});
    }
    return lhs;
  }

  CondPtr parse_not() {
    if (at(Tok::KwNot)) {
      SourceSpan sp = cur().span;
      advance();
      CondPtr inner = parse_not();
      if (!inner) return nullptr;
      return make_cond(ConditionExpr{CondNot{inner}, sp});
    }
    return parse_atom();
  }

  CondPtr parse_atom() {
    SourceSpan sp = cur().span;
    if (accept(Tok::LParen)) {
      if (++depth_ > 256) {
        error("condition nesting too deep");
        --depth_;
        return nullptr;
      }
      CondPtr inner = parse_cond();
      --depth_;
      if (!inner) return nullptr;
      if (!expect(Tok::RParen, "')'")) return nullptr;
      return inner;
    }
    if (accept(Tok::KwTrue)) return make_cond(ConditionExpr{CondConst{true}, sp});
    if (accept(Tok::KwFalse)) return make_cond(ConditionExpr{CondConst{false}, sp});
    if (at(Tok::Ident)) {
      std::string path = parse_qname();
      std::optional<CmpOp> op;
      switch (cur().kind) {
        case Tok::Lt: op = CmpOp::Lt; break;
        case Tok::Le: op = CmpOp::Le; break;
        case Tok::Gt: op = CmpOp::Gt; break;
        case Tok::Ge: op = CmpOp::Ge; break;
        case Tok::EqEq: op = CmpOp::Eq; break;
        case Tok::Ne: op = CmpOp::Ne; break;
        default: break;
      }
      if (!op) return make_cond(ConditionExpr{CondBool{path}, sp});
      advance();
      auto n = parse_signed_number();
      if (!n) return nullptr;
      return make_cond(ConditionExpr{CondCompare{path, *op, *n}, sp});
    }
    error(fmt::format("expected condition, found {}", token_name(cur().kind)));
    return nullptr;
  }

  // --- declarations ------------------------------------------------------

  std::optional<Level> parse_level() {
    Level lvl;
    if (accept(Tok::KwTask)) {
      lvl.tag = Level::Tag::Task;
    } else if (accept(Tok::KwSkill)) {
      lvl.tag = Level::Tag::Skill;
    } else if (accept(Tok::KwAction)) {
      lvl.tag = Level::Tag::Action;
    } else if (accept(Tok::KwComponent)) {
      lvl.tag = Level::Tag::Generic;
      if (at(Tok::Number)) {
        double v = cur().number;
        if (v < 0 || v != static_cast<int>(v)) {
          error("generic level must be a non-negative integer");
          v = 0;
        }
        lvl.depth = static_cast<int>(v);
        advance();
      } else {
        error("expected level number after 'component'");
      }
    } else {
      return std::nullopt;
    }
    return lvl;
  }

  std::optional<PType> parse_type() {
    if (accept(Tok::KwNum)) return PType::Num;
    if (accept(Tok::KwBool)) return PType::Bool;
    if (accept(Tok::KwString)) return PType::String;
    if (accept(Tok::KwFrame)) return PType::Frame;
    if (accept(Tok::KwVec6)) return PType::Vec6;
    return std::nullopt;
  }

  std::optional<GenericActionComponent> parse_component() {
    GenericActionComponent c;
    c.span = cur().span;
    auto lvl = parse_level();
    if (!lvl) return std::nullopt;
    c.level = *lvl;
    c.name = parse_ident("component name");
    if (accept(Tok::LParen)) {
      if (!at(Tok::RParen)) {
        do {
          Parameter p;
          p.span = cur().span;
          auto t = parse_type();
          if (!t) {
            error(fmt::format("expected parameter type, found {}", token_name(cur().kind)));
            break;
          }
          p.type = *t;
          p.name = parse_ident("parameter name");
          if (accept(Tok::Assign)) {
            auto lit = parse_literal();
            if (lit) p.defaultValue = std::move(*lit);
          }
          c.params.push_back(std::move(p));
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen, "')'");
    }
    if (accept(Tok::KwExtends)) c.extendsRef = parse_qname();
    if (!expect(Tok::LBrace, "'{'")) {
      // No body to parse; return what we have so later passes still see it.
      return c;
    }
    if (++depth_ > 256) {
      error_at(c.span, "component nesting too deep");
      --depth_;
      recover_item();
      return c;
    }
    while (!at(Tok::RBrace) && !at(Tok::Eof)) {
      parse_item(c);
    }
    --depth_;
    expect(Tok::RBrace, "'}'");
    return c;
  }

  void parse_item(GenericActionComponent& c) {
    switch (cur().kind) {
      case Tok::KwStart:
      case Tok::KwEnd: {
        ConditionPort p;
        p.span = cur().span;
        p.kind = at(Tok::KwStart) ? PortKind::Start : PortKind::End;
        advance();
        p.name = parse_ident("port name");
        if (accept(Tok::KwWhen)) p.guard = parse_cond();
        if (!expect(Tok::Semi, "';'")) recover_item();
        if (!p.name.empty()) c.ports.push_back(std::move(p));
        return;
      }
      case Tok::KwUses: {
        ChildRef r;
        r.span = cur().span;
        advance();
        r.qualifiedName = parse_qname();
        if (!expect(Tok::KwAs, "'as'")) {
          recover_item();
          return;
        }
        r.alias = parse_ident("alias");
        if (accept(Tok::LParen)) {
          if (!at(Tok::RParen)) {
            if (!parse_arg_bindings(r.args)) {
              recover_item();
              return;
            }
          }
          expect(Tok::RParen, "')'");
        }
        if (!expect(Tok::Semi, "';'")) recover_item();
        c.children.push_back(Child{std::move(r)});
        return;
      }
      case Tok::KwOn: {
        Transition t;
        t.span = cur().span;
        advance();
        if (!parse_endpoint(t.source) || !expect(Tok::Arrow, "'->'") ||
            !parse_endpoint(t.target)) {
          recover_item();
          return;
        }
        if (accept(Tok::KwPre)) {
          t.pre = parse_cond();
          if (!t.pre) {
            recover_item();
            return;
          }
        }
        if (accept(Tok::KwPost)) {
          t.post = parse_cond();
          if (!t.post) {
            recover_item();
            return;
          }
        }
        if (accept(Tok::KwSet)) {
          if (!parse_arg_bindings(t.bindings)) {
            recover_item();
            return;
          }
        }
        if (!expect(Tok::Semi, "';'")) recover_item();
        c.transitions.push_back(std::move(t));
        return;
      }
      case Tok::KwExec: {
        DeviceCall call;
        call.span = cur().span;
        advance();
        call.path = parse_qname();
        if (!expect(Tok::LParen, "'('")) {
          recover_item();
          return;
        }
        if (!at(Tok::RParen)) {
          if (!parse_arg_bindings(call.args)) {
            recover_item();
            return;
          }
        }
        expect(Tok::RParen, "')'");
        if (accept(Tok::KwUntil)) {
          call.stop = parse_cond();
          if (!call.stop) {
            recover_item();
            return;
          }
        }
        if (accept(Tok::KwYields)) {
          do {
            UpdateBinding u;
            u.span = cur().span;
            std::string path = parse_qname();
            if (path.empty()) {
              recover_item();
              return;
            }
            size_t start = 0;
            for (size_t dot = path.find('.'); ; dot = path.find('.', start)) {
              if (dot == std::string::npos) {
                u.emPath.push_back(path.substr(start));
                break;
              }
              u.emPath.push_back(path.substr(start, dot - start));
              start = dot + 1;
            }
            if (!expect(Tok::ColonAssign, "':='") || !expect(Tok::KwResult, "'result'") ||
                !expect(Tok::Dot, "'.'")) {
              recover_item();
              return;
            }
            u.resultField = parse_ident("result field");
            call.updates.push_back(std::move(u));
          } while (accept(Tok::Comma));
        }
        if (!expect(Tok::Semi, "';'")) recover_item();
        if (c.exec) {
          error_at(call.span, "component already declares an exec");
        } else {
          c.exec = std::move(call);
        }
        return;
      }
      case Tok::KwTask:
      case Tok::KwSkill:
      case Tok::KwAction:
      case Tok::KwComponent: {
        auto nested = parse_component();
        if (nested) c.children.push_back(Child{std::move(*nested)});
        return;
      }
      default:
        error(fmt::format("expected declaration, found {}", token_name(cur().kind)));
        recover_item();
        return;
    }
  }

  bool parse_endpoint(Endpoint& e) {
    e.span = cur().span;
    if (accept(Tok::KwSelf)) {
      e.owner = "self";
    } else {
      e.owner = parse_ident("endpoint owner");
      if (e.owner.empty()) return false;
    }
    if (!expect(Tok::Dot, "'.'")) return false;
    e.port = parse_ident("port name");
    return !e.port.empty();
  }
};

}  // namespace

ParseResult parse(std::string_view text, const std::string& fileName) {
  Parser p(lex(text, fileName), fileName);
  ParseResult r = p.run();
  sort_diagnostics(r.diagnostics);
  return r;
}

CondPtr parse_condition(std::string_view text, std::vector<Diagnostic>& diags) {
  Parser p(lex(text, "<condition>"), "<condition>");
  CondPtr c = p.condition_entry();
  auto d = p.take_diags();
  diags.insert(diags.end(), d.begin(), d.end());
  return d.empty() ? c : nullptr;
}

ParseResult parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ParseResult r;
    r.unit.file = path;
    r.diagnostics.push_back(
        Diagnostic{"E051", Severity::Error, SourceSpan{path, 0, 0, 0, 0}, "cannot read file"});
    return r;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

}  // namespace lr
