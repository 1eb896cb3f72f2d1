"""Tokenizer for the SQL subset used by text-to-SQL benchmark gold queries."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import SqlSyntaxError

KEYWORDS = {
    "select", "distinct", "from", "where", "group", "by", "having", "order",
    "limit", "as", "join", "inner", "left", "outer", "cross", "on", "and",
    "or", "not", "in", "between", "like", "is", "null", "exists", "case",
    "when", "then", "else", "end", "cast", "union", "all", "intersect",
    "except", "asc", "desc", "true", "false",
}

_SYMBOLS = ("<=", ">=", "<>", "!=", "==", "||", "=", "<", ">", "+", "-", "*", "/", "%",
            "(", ")", ",", ".", ";")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | number | string | symbol | eof
    text: str  # normalized: keywords lowercased, idents unquoted, strings unescaped
    pos: int   # character offset in the input
    index: int  # 1-based position in the token stream


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(text)

    def add(kind: str, value: str, pos: int) -> None:
        tokens.append(Token(kind, value, pos, len(tokens) + 1))

    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text.startswith("--", i):
            nl = text.find("\n", i)
            i = n if nl == -1 else nl + 1
            continue
        if ch == "'":
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise SqlSyntaxError("unterminated string literal", i, len(tokens) + 1)
                if text[j] == "'":
                    if j + 1 < n and text[j + 1] == "'":
                        buf.append("'")
                        j += 2
                        continue
                    break
                buf.append(text[j])
                j += 1
            add("string", "".join(buf), i)
            i = j + 1
            continue
        if ch == '"' or ch == "`" or ch == "[":
            close = {'"': '"', "`": "`", "[": "]"}[ch]
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise SqlSyntaxError("unterminated quoted identifier", i, len(tokens) + 1)
                if text[j] == close:
                    if close != "]" and j + 1 < n and text[j + 1] == close:
                        buf.append(close)
                        j += 2
                        continue
                    break
                buf.append(text[j])
                j += 1
            add("ident", "".join(buf), i)
            i = j + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    # a bare trailing dot belongs to qualified-name syntax
                    if j + 1 >= n or not text[j + 1].isdigit():
                        break
                    seen_dot = True
                j += 1
            if j < n and text[j] in "eE" and j + 1 < n and (
                text[j + 1].isdigit() or (text[j + 1] in "+-" and j + 2 < n and text[j + 2].isdigit())
            ):
                j += 2
                while j < n and text[j].isdigit():
                    j += 1
            add("number", text[i:j], i)
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word.lower() in KEYWORDS:
                add("keyword", word.lower(), i)
            else:
                add("ident", word, i)
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                add("symbol", sym, i)
                i += len(sym)
                break
        else:
            raise SqlSyntaxError(f"unexpected character {ch!r}", i, len(tokens) + 1)

    tokens.append(Token("eof", "", n, len(tokens) + 1))
    return tokens
