"""Extract-method transform: split a function after its first k statements.

The head keeps statements 1..k and gains ``return <fn>_tail(live...)``;
the tail function takes the live variables as parameters and is inserted
right after the top-level statement containing the split function.  Live
variables are the names the tail may read before defining, intersected
with names the head (or the parameter list) may define, in first-read
order.  Definitions inside branches or loops of the tail do not count as
definite, so the analysis never drops a needed parameter.

The result is rebuilt through print-and-reparse, which renumbers ids and
recomputes spans in one step.
"""

from __future__ import annotations

import copy

from ..errors import SplitError
from .nodes import AstNode, AstTree, CallRef, Name, expr_reads
from .parser import parse_source
from .printer import pretty_print


def _call_reads(node: AstNode) -> list[str]:
    """Names read by a Call node's own arguments, nested calls included."""
    out: list[str] = []
    for arg in node.args:
        out.extend(expr_reads(arg))
    for child in node.children:
        if child.kind == "Call":
            out.extend(_call_reads(child))
    return out


def _own_reads(node: AstNode) -> list[str]:
    """Names this single node reads (payload expressions, not child stmts)."""
    out: list[str] = []
    if node.kind in ("Assign", "Return", "For"):
        out.extend(expr_reads(node.value))
    elif node.kind == "Compare":
        out.extend(expr_reads(node.left))
        out.extend(expr_reads(node.right))
    elif node.kind == "Call":
        out.extend(_call_reads(node))
    for child in node.children:
        if child.kind == "Call" and node.kind != "Call":
            out.extend(_call_reads(child))
    return out


def _may_define(stmts: list[AstNode]) -> set[str]:
    """Names possibly bound anywhere in these subtrees."""
    defs: set[str] = set()
    for stmt in stmts:
        for node in stmt.walk():
            if node.kind in ("Assign", "For", "Import") and node.name is not None:
                defs.add(node.name)
    return defs


def _scan_reads(stmts: list[AstNode], killed: set[str], order: list[str]) -> None:
    """Collect reads not preceded by a definite same-level definition."""
    for stmt in stmts:
        cond = stmt.cond()
        if cond is not None:
            for name in _own_reads(cond):
                if name not in killed:
                    order.append(name)
        for name in _own_reads(stmt):
            if name not in killed:
                order.append(name)
        if stmt.kind == "Assign":
            if stmt.name is not None:
                killed.add(stmt.name)
        elif stmt.kind == "Import":
            if stmt.name is not None:
                killed.add(stmt.name)
        elif stmt.kind == "If":
            _scan_reads(stmt.body(), set(killed), order)
            _scan_reads(stmt.orelse(), set(killed), order)
        elif stmt.kind == "While":
            _scan_reads(stmt.body(), set(killed), order)
        elif stmt.kind == "For":
            inner = set(killed)
            if stmt.name is not None:
                inner.add(stmt.name)
            _scan_reads(stmt.body(), inner, order)
        elif stmt.kind == "FunctionDef":
            # conservative: treat the nested body as possible reads
            _scan_reads(stmt.body(), set(killed), order)


def live_variables(fn: AstNode, k: int) -> list[str]:
    """Variables the tail needs as parameters, in first-read order."""
    head = fn.children[:k]
    tail = fn.children[k:]
    may_defs = _may_define(head) | set(fn.params)
    order: list[str] = []
    _scan_reads(tail, set(), order)
    live: list[str] = []
    for name in order:
        if name in may_defs and name not in live:
            live.append(name)
    return live


def _contains_return(stmts: list[AstNode]) -> bool:
    return any(n.kind == "Return" for stmt in stmts for n in stmt.walk())


def _tail_name(tree: AstTree, base: str) -> str:
    taken = {fn.name for fn in tree.functions()}
    candidate = f"{base}_tail"
    suffix = 2
    while candidate in taken:
        candidate = f"{base}_tail{suffix}"
        suffix += 1
    return candidate


def extract_split(tree: AstTree, fn_name: str, k: int) -> AstTree:
    """Split ``fn_name`` after its first k statements (k is 1-based).

    Raises SplitError if the function is missing, k is out of range
    (1 <= k < body length), or the head contains a Return.
    """
    fn = next((f for f in tree.functions() if f.name == fn_name), None)
    if fn is None:
        raise SplitError(f"no function named {fn_name!r}")
    body = fn.children
    if not 1 <= k < len(body):
        raise SplitError(
            f"split index {k} out of range for body of {len(body)} statements"
        )
    if _contains_return(body[:k]):
        raise SplitError("head of split contains a return")

    live = live_variables(fn, k)
    tail_name = _tail_name(tree, fn_name)

    root = copy.deepcopy(tree.root)
    new_tree = AstTree.from_root(root)
    new_fn = new_tree.node(fn.id)

    tail_stmts = new_fn.children[k:]
    tail_fn = AstNode(
        "FunctionDef", name=tail_name, children=tail_stmts, params=tuple(live)
    )
    call = AstNode("Call", name=tail_name, args=tuple(Name(v) for v in live))
    handoff = AstNode("Return", children=[call], value=CallRef(call))
    new_fn.children = new_fn.children[:k] + [handoff]

    # insert the tail right after the top-level statement containing fn
    anchor = fn.id
    path = tree.ancestors(fn.id)
    top_level = path[1] if len(path) > 1 else anchor
    position = next(
        i for i, stmt in enumerate(root.children) if stmt.id == top_level
    )
    root.children.insert(position + 1, tail_fn)

    return parse_source(pretty_print(root))
