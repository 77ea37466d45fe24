"""AST size and ordered tree edit distance (unit costs)."""
from __future__ import annotations

from dataclasses import dataclass

import zss

from . import ast as A


@dataclass(frozen=True)
class LTree:
    """Plain labelled ordered tree."""
    label: str
    kids: tuple = ()

    def size(self) -> int:
        return 1 + sum(k.size() for k in self.kids)


def _label(node: A.Node) -> str:
    kind = type(node).__name__
    if isinstance(node, (A.IntLit, A.BoolLit)):
        return f"{kind}:{node.value}"
    if isinstance(node, A.FloatLit):
        return f"{kind}:{node.value!r}"
    if isinstance(node, (A.Var, A.Index, A.Call)):
        return f"{kind}:{node.name}"
    if isinstance(node, (A.Unary, A.Binary)):
        return f"{kind}:{node.op}"
    if isinstance(node, A.Cast):
        return f"{kind}:{node.type}"
    if isinstance(node, A.Param):
        return f"{kind}:{node.type}:{node.name}"
    if isinstance(node, A.Decl):
        size = "" if node.size is None else f"[{node.size}]"
        return f"{kind}:{node.type}:{node.name}{size}"
    if isinstance(node, A.Function):
        return f"{kind}:{node.ret_type}:{node.name}"
    if isinstance(node, A.If):
        return f"{kind}:{'else' if node.orelse is not None else ''}"
    return kind


def to_tree(node: A.Node) -> LTree:
    return LTree(_label(node), tuple(to_tree(c) for c in node.children()))


def ast_size(node: A.Node) -> int:
    return to_tree(node).size()


def _zss(t: LTree) -> zss.Node:
    n = zss.Node(t.label)
    for k in t.kids:
        n.addkid(_zss(k))
    return n


def tree_distance(a: LTree, b: LTree) -> int:
    return int(zss.simple_distance(
        _zss(a), _zss(b),
        get_children=zss.Node.get_children,
        get_label=zss.Node.get_label,
        label_dist=lambda x, y: 0 if x == y else 1,
    ))


def tree_edit_distance(a: A.Node, b: A.Node) -> int:
    return tree_distance(to_tree(a), to_tree(b))
