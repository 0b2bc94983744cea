#include "lr/lexer.hpp"

#include <cctype>
#include <cstdlib>
#include <map>

namespace lr {

namespace {

const std::map<std::string_view, Tok> kKeywords = {
    {"task", Tok::KwTask},       {"skill", Tok::KwSkill},   {"action", Tok::KwAction},
    {"component", Tok::KwComponent}, {"start", Tok::KwStart}, {"end", Tok::KwEnd},
    {"when", Tok::KwWhen},       {"use", Tok::KwUse},       {"uses", Tok::KwUses},
    {"as", Tok::KwAs},           {"extends", Tok::KwExtends}, {"on", Tok::KwOn},
    {"pre", Tok::KwPre},         {"post", Tok::KwPost},     {"set", Tok::KwSet},
    {"exec", Tok::KwExec},       {"until", Tok::KwUntil},   {"yields", Tok::KwYields},
    {"num", Tok::KwNum},         {"bool", Tok::KwBool},     {"string", Tok::KwString},
    {"frame", Tok::KwFrame},     {"vec6", Tok::KwVec6},     {"true", Tok::KwTrue},
    {"false", Tok::KwFalse},     {"not", Tok::KwNot},       {"and", Tok::KwAnd},
    {"or", Tok::KwOr},           {"self", Tok::KwSelf},     {"result", Tok::KwResult},
};

struct Lexer {
  std::string_view src;
  std::string file;
  size_t pos = 0;
  int line = 1;
  int col = 1;

  char peek(size_t ahead = 0) const {
    return pos + ahead < src.size() ? src[pos + ahead] : '\0';
  }
  char advance() {
    char c = src[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }
  bool at_end() const { return pos >= src.size(); }

  void skip_trivia() {
    for (;;) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token make(Tok kind, const std::string& text, int sl, int sc) {
    Token t;
    t.kind = kind;
    t.text = text;
    t.span = SourceSpan{file, sl, sc, line, col};
    return t;
  }

  Token next() {
    skip_trivia();
    int sl = line, sc = col;
    if (at_end()) return make(Tok::Eof, "", sl, sc);
    char c = advance();
    switch (c) {
      case '{': return make(Tok::LBrace, "{", sl, sc);
      case '}': return make(Tok::RBrace, "}", sl, sc);
      case '(': return make(Tok::LParen, "(", sl, sc);
      case ')': return make(Tok::RParen, ")", sl, sc);
      case '[': return make(Tok::LBracket, "[", sl, sc);
      case ']': return make(Tok::RBracket, "]", sl, sc);
      case ';': return make(Tok::Semi, ";", sl, sc);
      case ',': return make(Tok::Comma, ",", sl, sc);
      case '.': return make(Tok::Dot, ".", sl, sc);
      case '-':
        if (peek() == '>') {
          advance();
          return make(Tok::Arrow, "->", sl, sc);
        }
        return make(Tok::Minus, "-", sl, sc);
      case ':':
        if (peek() == '=') {
          advance();
          return make(Tok::ColonAssign, ":=", sl, sc);
        }
        return make(Tok::Error, ":", sl, sc);
      case '=':
        if (peek() == '=') {
          advance();
          return make(Tok::EqEq, "==", sl, sc);
        }
        return make(Tok::Assign, "=", sl, sc);
      case '<':
        if (peek() == '=') {
          advance();
          return make(Tok::Le, "<=", sl, sc);
        }
        return make(Tok::Lt, "<", sl, sc);
      case '>':
        if (peek() == '=') {
          advance();
          return make(Tok::Ge, ">=", sl, sc);
        }
        return make(Tok::Gt, ">", sl, sc);
      case '!':
        if (peek() == '=') {
          advance();
          return make(Tok::Ne, "!=", sl, sc);
        }
        return make(Tok::Error, "!", sl, sc);
      case '"': {
        std::string value;
        while (!at_end() && peek() != '"' && peek() != '\n') {
          char d = advance();
          if (d == '\\' && !at_end()) {
            char e = advance();
            switch (e) {
              case 'n': value += '\n'; break;
              case 't': value += '\t'; break;
              case '\\': value += '\\'; break;
              case '"': value += '"'; break;
              default: value += e; break;
            }
          } else {
            value += d;
          }
        }
        if (peek() == '"') {
          advance();
          return make(Tok::String, value, sl, sc);
        }
        return make(Tok::Error, "unterminated string", sl, sc);
      }
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string text(1, c);
      while (std::isdigit(static_cast<unsigned char>(peek()))) text += advance();
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        text += advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) text += advance();
      }
      if (peek() == 'e' || peek() == 'E') {
        size_t mark = pos;
        std::string expPart(1, peek());
        advance();
        if (peek() == '+' || peek() == '-') expPart += advance();
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
          while (std::isdigit(static_cast<unsigned char>(peek()))) expPart += advance();
          text += expPart;
        } else {
          pos = mark;  // lone 'e': not part of the number
        }
      }
      Token t = make(Tok::Number, text, sl, sc);
      t.number = std::strtod(text.c_str(), nullptr);
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string text(1, c);
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') text += advance();
      auto it = kKeywords.find(text);
      if (it != kKeywords.end()) return make(it->second, text, sl, sc);
      return make(Tok::Ident, text, sl, sc);
    }
    return make(Tok::Error, std::string(1, c), sl, sc);
  }
};

}  // namespace

std::vector<Token> lex(std::string_view src, const std::string& fileName) {
  Lexer lx{src, fileName};
  std::vector<Token> out;
  for (;;) {
    Token t = lx.next();
    bool done = t.kind == Tok::Eof;
    out.push_back(std::move(t));
    if (done) break;
  }
  return out;
}

const char* token_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::String: return "string";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Arrow: return "'->'";
    case Tok::ColonAssign: return "':='";
    case Tok::Assign: return "'='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::EqEq: return "'=='";
    case Tok::Ne: return "'!='";
    case Tok::Minus: return "'-'";
    case Tok::Eof: return "end of file";
    case Tok::Error: return "invalid token";
    default: return "keyword";
  }
}

}  // namespace lr
