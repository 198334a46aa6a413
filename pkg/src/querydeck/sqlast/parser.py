"""Hand-rolled lexer and recursive-descent parser for the supported SQL subset.

The parser emits a *raw* tree: boolean logic under WHERE is kept as nested
And / Or / Not / Between nodes exactly as typed.  ``canonicalize`` flattens
that into the conjunctive normal form the rest of the package works on.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import SqlSyntaxError, UnsupportedConstruct
from .nodes import Node, node

KEYWORDS = {
    "SELECT", "FROM", "WHERE", "GROUP", "ORDER", "BY", "LIMIT",
    "AND", "OR", "NOT", "BETWEEN", "AS", "ASC", "DESC",
}

_SYMBOLS = ("<=", ">=", "!=", "<>", "=", "<", ">", "(", ")", ",", "*")


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # IDENT | INT | FLOAT | STRING | SYM | EOF
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if text.startswith("--", i):  # comment to end of line, discarded
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == "'":
            j = i + 1
            buf: list[str] = []
            while True:
                if j >= n:
                    raise SqlSyntaxError("unterminated string literal", start_line, start_col)
                if text[j] == "'":
                    if j + 1 < n and text[j + 1] == "'":  # doubled quote escape
                        buf.append("'")
                        j += 2
                        continue
                    break
                buf.append(text[j])
                j += 1
            tokens.append(Token("STRING", "".join(buf), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        negative = ch == "-" and i + 1 < n and (
            text[i + 1].isdigit()
            or (text[i + 1] == "." and i + 2 < n and text[i + 2].isdigit())
        )
        if negative or ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1 if negative else i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            kind = "FLOAT" if seen_dot else "INT"
            tokens.append(Token(kind, text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("SYM", sym, start_line, start_col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise SqlSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    # -- token helpers -----------------------------------------------------
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def is_kw(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "IDENT" and tok.text.upper() == word

    def take_kw(self, word: str) -> Token:
        if not self.is_kw(word):
            tok = self.peek()
            raise SqlSyntaxError(f"expected {word}, got {tok.text or 'end of input'}",
                                 tok.line, tok.col)
        return self.advance()

    def take_sym(self, sym: str) -> Token:
        tok = self.peek()
        if tok.kind != "SYM" or tok.text != sym:
            raise SqlSyntaxError(f"expected {sym!r}, got {tok.text or 'end of input'}",
                                 tok.line, tok.col)
        return self.advance()

    def take_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "IDENT" or tok.text.upper() in KEYWORDS:
            raise SqlSyntaxError(f"expected identifier, got {tok.text or 'end of input'}",
                                 tok.line, tok.col)
        return self.advance()

    # -- grammar -----------------------------------------------------------
    def select_stmt(self) -> Node:
        self.take_kw("SELECT")
        projs = [self.proj_clause()]
        while self.try_sym(","):
            projs.append(self.proj_clause())
        self.take_kw("FROM")
        tables = [node("TableRef", {"name": self.take_ident().text})]
        while self.try_sym(","):
            tables.append(node("TableRef", {"name": self.take_ident().text}))
        where_children: list[Node] = []
        if self.is_kw("WHERE"):
            self.advance()
            where_children = [self.or_expr()]
        group: list[Node] = []
        if self.is_kw("GROUP"):
            self.advance()
            self.take_kw("BY")
            group = [self.column()]
            while self.try_sym(","):
                group.append(self.column())
        order: list[Node] = []
        if self.is_kw("ORDER"):
            self.advance()
            self.take_kw("BY")
            order = [self.order_key()]
            while self.try_sym(","):
                order.append(self.order_key())
        limit: list[Node] = []
        if self.is_kw("LIMIT"):
            self.advance()
            tok = self.peek()
            if tok.kind != "INT":
                raise SqlSyntaxError("LIMIT expects an integer", tok.line, tok.col)
            self.advance()
            limit = [node("IntExpr", {"value": int(tok.text)})]
        tok = self.peek()
        if tok.kind != "EOF":
            raise SqlSyntaxError(f"unexpected trailing input: {tok.text!r}", tok.line, tok.col)
        return node("Select", None, (
            node("Project", None, projs),
            node("From", None, tables),
            node("Where", None, where_children),
            node("GroupBy", None, group),
            node("OrderBy", None, order),
            node("Limit", None, limit),
        ))

    def try_sym(self, sym: str) -> bool:
        tok = self.peek()
        if tok.kind == "SYM" and tok.text == sym:
            self.advance()
            return True
        return False

    def proj_clause(self) -> Node:
        expr = self.value_expr()
        attrs: dict[str, object] = {}
        if self.is_kw("AS"):
            self.advance()
            attrs["alias"] = self.take_ident().text
        return node("ProjClause", attrs, (expr,))

    def value_expr(self) -> Node:
        """Column, aggregate call, or literal — the things a SELECT item can be."""
        tok = self.peek()
        if tok.kind in ("INT", "FLOAT", "STRING"):
            return self.literal()
        if tok.kind == "SYM" and tok.text == "*":
            raise UnsupportedConstruct("bare * projections are not supported")
        name = self.take_ident()
        if self.peek().kind == "SYM" and self.peek().text == "(":
            self.advance()
            arg = self.column()
            self.take_sym(")")
            return node("FuncExpr", {"name": name.text.lower()}, (arg,))
        return node("ColExpr", {"name": name.text})

    def column(self) -> Node:
        tok = self.take_ident()
        if self.peek().kind == "SYM" and self.peek().text == "(":
            raise UnsupportedConstruct("nested function calls are not supported here")
        return node("ColExpr", {"name": tok.text})

    def order_key(self) -> Node:
        col = self.column()
        direction = "asc"
        if self.is_kw("ASC"):
            self.advance()
        elif self.is_kw("DESC"):
            self.advance()
            direction = "desc"
        return node("OrderKey", {"dir": direction}, (col,))

    def literal(self) -> Node:
        tok = self.advance()
        if tok.kind == "INT":
            return node("IntExpr", {"value": int(tok.text)})
        if tok.kind == "FLOAT":
            return node("FloatExpr", {"value": float(tok.text)})
        if tok.kind == "STRING":
            return node("StrExpr", {"value": tok.text})
        raise SqlSyntaxError(f"expected literal, got {tok.text!r}", tok.line, tok.col)

    def or_expr(self) -> Node:
        left = self.and_expr()
        while self.is_kw("OR"):
            self.advance()
            left = node("Or", None, (left, self.and_expr()))
        return left

    def and_expr(self) -> Node:
        left = self.not_expr()
        while self.is_kw("AND"):
            self.advance()
            left = node("And", None, (left, self.not_expr()))
        return left

    def not_expr(self) -> Node:
        if self.is_kw("NOT"):
            self.advance()
            return node("Not", None, (self.not_expr(),))
        return self.bool_atom()

    def bool_atom(self) -> Node:
        if self.try_sym("("):
            inner = self.or_expr()
            self.take_sym(")")
            return inner
        left = self.operand()
        if self.is_kw("BETWEEN"):
            self.advance()
            lo = self.operand()
            self.take_kw("AND")
            hi = self.operand()
            return node("Between", None, (left, lo, hi))
        tok = self.peek()
        if tok.kind != "SYM" or tok.text not in ("=", "!=", "<>", "<", "<=", ">", ">="):
            raise SqlSyntaxError(f"expected comparison, got {tok.text or 'end of input'}",
                                 tok.line, tok.col)
        self.advance()
        op = "!=" if tok.text == "<>" else tok.text
        return node("BiExpr", {"op": op}, (left, self.operand()))

    def operand(self) -> Node:
        tok = self.peek()
        if tok.kind in ("INT", "FLOAT", "STRING"):
            return self.literal()
        return node("ColExpr", {"name": self.take_ident().text})


def parse(text: str) -> Node:
    """Parse SQL text into a raw tree (boolean logic not yet normalized)."""
    if not text or not text.strip():
        raise SqlSyntaxError("empty input", 1, 1)
    return _Parser(tokenize(text)).select_stmt()


def parse_fragment(text: str, element_type: str) -> Node:
    """Parse the rendering of one list element back into a canonical node.

    Inverse of ``unparse_fragment`` for the node types that occur as list
    elements — projection items, table names, filter groups, grouping
    columns, order keys — plus the literal leaves.  A filter group may use
    OR but must stay a single conjunct.
    """
    if not text or not text.strip():
        raise SqlSyntaxError("empty input", 1, 1)
    parser = _Parser(tokenize(text))
    if element_type == "ProjClause":
        result = parser.proj_clause()
    elif element_type == "TableRef":
        result = node("TableRef", {"name": parser.take_ident().text})
    elif element_type == "ColExpr":
        result = parser.column()
    elif element_type == "OrderKey":
        result = parser.order_key()
    elif element_type == "FuncExpr":
        result = parser.value_expr()
    elif element_type in ("IntExpr", "FloatExpr", "StrExpr"):
        result = parser.literal()
    elif element_type == "BiExpr":
        result = parser.bool_atom()
    elif element_type == "Or":
        from .canon import _cnf  # deferred: canon imports nothing from here

        groups = _cnf(parser.or_expr())
        if len(groups) != 1:
            raise SqlSyntaxError(
                "a filter group must normalize to a single conjunct", 1, 1
            )
        result = node("Or", None, tuple(groups[0]))
    else:
        raise UnsupportedConstruct(
            f"cannot parse a fragment of node type {element_type}"
        )
    tok = parser.peek()
    if tok.kind != "EOF":
        raise SqlSyntaxError(f"unexpected trailing input: {tok.text!r}", tok.line, tok.col)
    if result.node_type != element_type:
        raise SqlSyntaxError(
            f"fragment parsed as {result.node_type}, expected {element_type}", 1, 1
        )
    return result
