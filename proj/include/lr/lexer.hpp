#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lr/diag.hpp"

namespace lr {

enum class Tok {
  Ident,
  Number,   // numeric literal; text holds the spelling
  String,   // quoted string; text holds the decoded value
  // keywords
  KwTask, KwSkill, KwAction, KwComponent,
  KwStart, KwEnd, KwWhen,
  KwUse, KwUses, KwAs, KwExtends,
  KwOn, KwPre, KwPost, KwSet,
  KwExec, KwUntil, KwYields,
  KwNum, KwBool, KwString, KwFrame, KwVec6,
  KwTrue, KwFalse, KwNot, KwAnd, KwOr,
  KwSelf, KwResult,
  // punctuation
  LBrace, RBrace, LParen, RParen, LBracket, RBracket,
  Semi, Comma, Dot, Arrow, ColonAssign, Assign,
  Lt, Le, Gt, Ge, EqEq, Ne, Minus,
  Eof, Error,
};

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  double number = 0.0;
  SourceSpan span;
};

/// Tokenizes a whole buffer. `//` comments run to end of line; CRLF and LF
/// are both accepted. Unknown characters become Error tokens (one each) so
/// the parser can report and recover.
std::vector<Token> lex(std::string_view src, const std::string& fileName);

const char* token_name(Tok t);

}  // namespace lr
