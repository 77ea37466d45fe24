"""Syntax tree for the teaching language.

Nodes are frozen dataclasses.  Every node carries a parser-assigned ``nid``
(unique within one parse) and a ``pos`` of ``(line, column)``.  Neither takes
part in equality, so two trees compare equal when their structure and
payloads match.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Iterator, Optional, Union

FUNC_ENTRY = "Func-Entry"
LOOP_ENTRY = "Loop-Entry"

SCALAR_TYPES = ("int", "float")


def _meta():
    return field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Node:
    def children(self) -> Iterator["Node"]:
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Node):
                yield value
            elif isinstance(value, tuple):
                for item in value:
                    if isinstance(item, Node):
                        yield item

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.children():
            yield from child.walk()

    @property
    def label(self) -> Optional[str]:
        return None


# expressions

@dataclass(frozen=True)
class IntLit(Node):
    value: int
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class FloatLit(Node):
    value: float
    text: str = field(default="", compare=False)
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Var(Node):
    name: str
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Index(Node):
    name: str
    index: "Expr"
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Unary(Node):
    op: str
    operand: "Expr"
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: "Expr"
    right: "Expr"
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Cast(Node):
    type: str
    operand: "Expr"
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Read(Node):
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


Expr = Union[IntLit, FloatLit, BoolLit, Var, Index, Unary, Binary, Cast, Call, Read]
Target = Union[Var, Index]


# statements

@dataclass(frozen=True)
class Decl(Node):
    type: str
    name: str
    size: Optional[int] = None
    init: Optional[Expr] = None
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Assign(Node):
    target: Target
    value: Expr
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Print(Node):
    value: Expr
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Block(Node):
    body: tuple
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class If(Node):
    cond: Expr
    then: Block
    orelse: Optional[Block] = None
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class While(Node):
    cond: Expr
    body: Block
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)

    @property
    def label(self) -> str:
        return LOOP_ENTRY


@dataclass(frozen=True)
class For(Node):
    init: Optional[Node]
    cond: Expr
    step: Optional[Node]
    body: Block
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)

    @property
    def label(self) -> str:
        return LOOP_ENTRY


@dataclass(frozen=True)
class Break(Node):
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Return(Node):
    value: Optional[Expr] = None
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Empty(Node):
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


Stmt = Union[Decl, Assign, Print, Block, If, While, For, Break, Return, Empty]
Loop = Union[While, For]


@dataclass(frozen=True)
class Param(Node):
    type: str
    name: str
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Function(Node):
    ret_type: str
    name: str
    params: tuple
    body: Block
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)

    @property
    def label(self) -> str:
        return FUNC_ENTRY


@dataclass(frozen=True)
class Program(Node):
    functions: tuple
    nid: int = _meta()
    pos: tuple = field(default=(0, 0), compare=False, repr=False)

    def function(self, name: str) -> Function:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)

    @property
    def entry(self) -> Function:
        """``main`` when defined, otherwise the last function in the file."""
        for fn in self.functions:
            if fn.name == "main":
                return fn
        return self.functions[-1]


def is_loop(node: Node) -> bool:
    return isinstance(node, (While, For))


def labelled(node: Node) -> bool:
    return node.label is not None


def strip_meta(node):
    """Copy of ``node`` with all ids and positions zeroed (for hashing)."""
    if isinstance(node, tuple):
        return tuple(strip_meta(n) for n in node)
    if not isinstance(node, Node):
        return node
    changes = {}
    for f in fields(node):
        value = getattr(node, f.name)
        if f.name == "nid":
            changes["nid"] = 0
        elif f.name == "pos":
            changes["pos"] = (0, 0)
        elif isinstance(value, (Node, tuple)):
            changes[f.name] = strip_meta(value)
    return replace(node, **changes)


@dataclass
class VarInfo:
    name: str
    type: str
    size: Optional[int] = None
    is_param: bool = False

    @property
    def is_array(self) -> bool:
        return self.size is not None


def variables_of(fn: Function) -> dict:
    """Parameters then locals of ``fn`` in declaration order."""
    out = {}
    for p in fn.params:
        out[p.name] = VarInfo(p.name, p.type, None, True)
    for node in fn.body.walk():
        if isinstance(node, Decl):
            out.setdefault(node.name, VarInfo(node.name, node.type, node.size))
    return out
