"""Statement object model for the diff-filtering DSL."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class Step:
    """One path-expression step.

    ``axis`` says how the step attaches to the previous one: ``child`` (direct
    child), ``descendant`` (one or more levels below), ``root`` (must be the
    tree root — first step of an absolute expression) or ``anywhere`` (first
    step of a relative expression).  ``node_type`` is ``None`` for ``*``.
    ``index`` carries an ``[i]`` selector: with a wildcard it means the i-th
    child overall, with a named type the i-th child of that type.
    """

    axis: str
    node_type: str | None
    index: int | None = None


@dataclass(frozen=True, slots=True)
class PathExpr:
    steps: tuple[Step, ...]

    def render(self) -> str:
        parts: list[str] = []
        for step in self.steps:
            if step.axis == "root":
                parts.append("/")
            elif step.axis == "descendant" and parts:
                parts.append("//")
            elif step.axis == "child":
                parts.append("/")
            name = step.node_type or "*"
            if step.index is not None:
                name += f"[{step.index}]"
            parts.append(name)
        return "".join(parts)


@dataclass(frozen=True, slots=True)
class Binding:
    expr: PathExpr
    var: str


# -- predicate operand / expression nodes -----------------------------------

@dataclass(frozen=True, slots=True)
class Literal:
    value: object


@dataclass(frozen=True, slots=True)
class NavStep:
    """Navigation inside a lifted subtree: a child step or a parent hop."""

    kind: str  # "child" | "parent"
    node_type: str | None = None
    index: int | None = None


@dataclass(frozen=True, slots=True)
class NavRef:
    """``T.τ1/ColExpr[0].name`` — variable, side, steps, optional attribute."""

    var: str
    side: str  # "t1" | "t2" | "both" (pre-expansion)
    steps: tuple[NavStep, ...] = ()
    attr: str | None = None


@dataclass(frozen=True, slots=True)
class Comparison:
    left: Literal | NavRef
    op: str
    right: Literal | NavRef


@dataclass(frozen=True, slots=True)
class NullTest:
    operand: NavRef
    negated: bool  # True for "is not null"


@dataclass(frozen=True, slots=True)
class BoolOp:
    op: str  # "and" | "or"
    items: tuple["Predicate", ...]


@dataclass(frozen=True, slots=True)
class NotOp:
    item: "Predicate"


Predicate = Comparison | NullTest | BoolOp | NotOp


@dataclass(frozen=True, slots=True)
class Statement:
    name: str
    bindings: tuple[Binding, ...]
    predicate: Predicate | None
    returned_var: str | None
    source: str = ""

    def binding_for(self, var: str) -> Binding:
        for binding in self.bindings:
            if binding.var == var:
                return binding
        raise KeyError(var)
