"""Parser for statement files.

File format: statements separated by blank lines; ``--`` starts a comment
running to end of line.  Grammar::

    statement := FROM binding (',' binding)* [WHERE predicate] MATCH name ['(' var ')']
    binding   := pathexpr AS var
    pathexpr  := ['/'] step (('/' | '//') step)*
    step      := (TYPE | '*') ['[' INT ']']

Predicates support comparisons, IS [NOT] NULL, AND/OR/NOT and navigation
references like ``T.τ1/ColExpr[0].name`` (``tau1`` is accepted as an ASCII
spelling).  A bare ``.τ`` reference expands into the conjunction of the same
atom over both sides.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import PilangSyntaxError, UnboundVariable
from .ast import (
    Binding,
    BoolOp,
    Comparison,
    Literal,
    NavRef,
    NavStep,
    NotOp,
    NullTest,
    PathExpr,
    Predicate,
    Statement,
    Step,
)

_KEYWORDS = {"FROM", "AS", "WHERE", "MATCH", "AND", "OR", "NOT", "IS", "NULL"}
_SIDES = {"τ": "both", "tau": "both", "τ1": "t1", "tau1": "t1", "τ2": "t2", "tau2": "t2"}
_TWO_CHAR = ("//", "..", "<=", ">=", "!=", "<>")
_ONE_CHAR = "/.[](),*=<>"


@dataclass(frozen=True, slots=True)
class _Tok:
    kind: str  # IDENT | INT | FLOAT | STRING | SYM | EOF
    text: str
    pos: int
    end: int


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, n = 0, len(text)

    def ident_char(c: str) -> bool:
        return c.isalnum() or c in "_-" or c == "τ"

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start = i
        if c == "'":
            j = i + 1
            buf: list[str] = []
            while True:
                if j >= n:
                    raise PilangSyntaxError(f"unterminated string at offset {start}")
                if text[j] == "'":
                    if j + 1 < n and text[j + 1] == "'":
                        buf.append("'")
                        j += 2
                        continue
                    break
                buf.append(text[j])
                j += 1
            toks.append(_Tok("STRING", "".join(buf), start, j + 1))
            i = j + 1
            continue
        if c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not dot)):
                # ".." after a number is the parent hop, not a decimal point
                if text[j] == ".":
                    if j + 1 < n and text[j + 1] == ".":
                        break
                    dot = True
                j += 1
            toks.append(_Tok("FLOAT" if dot else "INT", text[i:j], start, j))
            i = j
            continue
        if c.isalpha() or c in "_τ":
            j = i
            while j < n and ident_char(text[j]):
                if text.startswith("--", j):  # a comment ends the identifier
                    break
                j += 1
            toks.append(_Tok("IDENT", text[i:j], start, j))
            i = j
            continue
        for sym in _TWO_CHAR:
            if text.startswith(sym, i):
                toks.append(_Tok("SYM", sym, start, start + 2))
                i += 2
                break
        else:
            if c in _ONE_CHAR:
                toks.append(_Tok("SYM", c, start, start + 1))
                i += 1
            else:
                raise PilangSyntaxError(f"unexpected character {c!r} at offset {i}")
    toks.append(_Tok("EOF", "", n, n))
    return toks


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.toks = _lex(text)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def advance(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str) -> PilangSyntaxError:
        tok = self.peek()
        at = tok.text or "end of statement"
        return PilangSyntaxError(f"{message}, got {at!r} (offset {tok.pos})")

    def is_kw(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "IDENT" and tok.text.upper() == word

    def take_kw(self, word: str) -> None:
        if not self.is_kw(word):
            raise self.fail(f"expected {word}")
        self.advance()

    def take_sym(self, sym: str) -> None:
        tok = self.peek()
        if tok.kind != "SYM" or tok.text != sym:
            raise self.fail(f"expected {sym!r}")
        self.advance()

    def try_sym(self, sym: str) -> bool:
        tok = self.peek()
        if tok.kind == "SYM" and tok.text == sym:
            self.advance()
            return True
        return False

    def take_ident(self) -> str:
        tok = self.peek()
        if tok.kind != "IDENT" or tok.text.upper() in _KEYWORDS:
            raise self.fail("expected an identifier")
        return self.advance().text

    def take_type(self) -> str:
        # node types may be spelled like keywords (Where, From, Or, Not)
        tok = self.peek()
        if tok.kind != "IDENT":
            raise self.fail("expected a node type")
        return self.advance().text

    # -- grammar ------------------------------------------------------------
    def statement(self) -> Statement:
        stmt = self.statement_body()
        if self.peek().kind != "EOF":
            raise self.fail("unexpected trailing input")
        return stmt

    def statement_body(self) -> Statement:
        start = self.peek().pos
        self.take_kw("FROM")
        bindings = [self.binding()]
        while self.try_sym(","):
            bindings.append(self.binding())
        seen: set[str] = set()
        for b in bindings:
            if b.var in seen:
                raise PilangSyntaxError(f"variable {b.var} declared twice")
            seen.add(b.var)
        predicate: Predicate | None = None
        if self.is_kw("WHERE"):
            self.advance()
            predicate = self.or_pred()
        self.take_kw("MATCH")
        name = self.take_ident()
        returned: str | None = None
        if self.try_sym("("):
            returned = self.take_ident()
            self.take_sym(")")
        end = self.toks[self.pos - 1].end  # end of the last consumed token
        declared = {b.var for b in bindings}
        if returned is not None and returned not in declared:
            raise UnboundVariable(f"MATCH references undeclared variable {returned}")
        if predicate is not None:
            predicate = _expand_both_sides(predicate)
            for var in _predicate_vars(predicate):
                if var not in declared:
                    raise UnboundVariable(f"predicate references undeclared variable {var}")
        return Statement(name, tuple(bindings), predicate, returned, self.text[start:end].strip())

    def binding(self) -> Binding:
        expr = self.path_expr()
        self.take_kw("AS")
        return Binding(expr, self.take_ident())

    def path_expr(self) -> PathExpr:
        if self.try_sym("/"):
            first_axis = "root"
        elif self.try_sym("//"):
            first_axis = "anywhere"
        else:
            first_axis = "anywhere"
        steps = [self.step(first_axis)]
        while True:
            if self.try_sym("/"):
                steps.append(self.step("child"))
            elif self.try_sym("//"):
                steps.append(self.step("descendant"))
            else:
                break
        return PathExpr(tuple(steps))

    def step(self, axis: str) -> Step:
        if self.try_sym("*"):
            node_type: str | None = None
        else:
            node_type = self.take_type()
        index: int | None = None
        if self.try_sym("["):
            tok = self.peek()
            if tok.kind != "INT":
                raise self.fail("expected an integer selector")
            index = int(self.advance().text)
            self.take_sym("]")
        return Step(axis, node_type, index)

    def or_pred(self) -> Predicate:
        items = [self.and_pred()]
        while self.is_kw("OR"):
            self.advance()
            items.append(self.and_pred())
        return items[0] if len(items) == 1 else BoolOp("or", tuple(items))

    def and_pred(self) -> Predicate:
        items = [self.not_pred()]
        while self.is_kw("AND"):
            self.advance()
            items.append(self.not_pred())
        return items[0] if len(items) == 1 else BoolOp("and", tuple(items))

    def not_pred(self) -> Predicate:
        if self.is_kw("NOT"):
            self.advance()
            return NotOp(self.not_pred())
        return self.atom()

    def atom(self) -> Predicate:
        if self.try_sym("("):
            inner = self.or_pred()
            self.take_sym(")")
            return inner
        left = self.operand()
        if self.is_kw("IS"):
            if isinstance(left, Literal):
                raise self.fail("IS NULL applies to navigation references")
            self.advance()
            negated = False
            if self.is_kw("NOT"):
                self.advance()
                negated = True
            self.take_kw("NULL")
            return NullTest(left, negated)
        tok = self.peek()
        if tok.kind != "SYM" or tok.text not in ("=", "!=", "<>", "<", "<=", ">", ">="):
            raise self.fail("expected a comparison operator or IS")
        self.advance()
        op = "!=" if tok.text == "<>" else tok.text
        return Comparison(left, op, self.operand())

    def operand(self) -> Literal | NavRef:
        tok = self.peek()
        if tok.kind == "STRING":
            self.advance()
            return Literal(tok.text)
        if tok.kind == "INT":
            self.advance()
            return Literal(int(tok.text))
        if tok.kind == "FLOAT":
            self.advance()
            return Literal(float(tok.text))
        var = self.take_ident()
        self.take_sym(".")
        side_name = self.take_ident()
        side = _SIDES.get(side_name)
        if side is None:
            raise PilangSyntaxError(f"unknown subtree side {side_name!r} (expected τ, τ1 or τ2)")
        steps: list[NavStep] = []
        attr: str | None = None
        while True:
            if self.try_sym("/"):
                if self.try_sym("*"):
                    node_type: str | None = None
                else:
                    node_type = self.take_type()
                index: int | None = None
                if self.try_sym("["):
                    itok = self.peek()
                    if itok.kind != "INT":
                        raise self.fail("expected an integer selector")
                    index = int(self.advance().text)
                    self.take_sym("]")
                steps.append(NavStep("child", node_type, index))
            elif self.try_sym(".."):
                steps.append(NavStep("parent"))
            elif self.try_sym("."):
                attr = self.take_ident()
                break
            else:
                break
        return NavRef(var, side, tuple(steps), attr)


def _expand_both_sides(pred: Predicate) -> Predicate:
    """Rewrite each atom using ``.τ`` into (atom over τ1) AND (atom over τ2)."""
    if isinstance(pred, BoolOp):
        return BoolOp(pred.op, tuple(_expand_both_sides(p) for p in pred.items))
    if isinstance(pred, NotOp):
        return NotOp(_expand_both_sides(pred.item))
    if not _mentions_both(pred):
        return pred
    return BoolOp("and", (_fix_side(pred, "t1"), _fix_side(pred, "t2")))


def _mentions_both(pred: Predicate) -> bool:
    if isinstance(pred, Comparison):
        sides = [p.side for p in (pred.left, pred.right) if isinstance(p, NavRef)]
        return "both" in sides
    if isinstance(pred, NullTest):
        return pred.operand.side == "both"
    return False


def _fix_side(pred: Predicate, side: str) -> Predicate:
    def fix(op):
        if isinstance(op, NavRef) and op.side == "both":
            return NavRef(op.var, side, op.steps, op.attr)
        return op

    if isinstance(pred, Comparison):
        return Comparison(fix(pred.left), pred.op, fix(pred.right))
    if isinstance(pred, NullTest):
        return NullTest(fix(pred.operand), pred.negated)
    return pred


def _predicate_vars(pred: Predicate):
    if isinstance(pred, Comparison):
        for op in (pred.left, pred.right):
            if isinstance(op, NavRef):
                yield op.var
    elif isinstance(pred, NullTest):
        yield pred.operand.var
    elif isinstance(pred, BoolOp):
        for item in pred.items:
            yield from _predicate_vars(item)
    elif isinstance(pred, NotOp):
        yield from _predicate_vars(pred.item)


def parse_statement(text: str) -> Statement:
    return _Parser(text).statement()


def parse_statements(text: str) -> list[Statement]:
    """Parse a statement file: blank-line separated, ``--`` comments.

    Statements are self-delimiting (each ends after its MATCH clause), so the
    file is consumed as one token stream; blank lines and comments fall out of
    lexing for free.
    """
    parser = _Parser(text)
    statements: list[Statement] = []
    names: set[str] = set()
    while parser.peek().kind != "EOF":
        stmt = parser.statement_body()
        if stmt.name in names:
            raise PilangSyntaxError(f"duplicate statement name {stmt.name}")
        names.add(stmt.name)
        statements.append(stmt)
    return statements
