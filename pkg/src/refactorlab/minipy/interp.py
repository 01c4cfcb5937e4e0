"""Reference interpreter for MiniPy.

Used as the behavioral oracle for code transforms: two trees are
equivalent on an input when running them yields the same return value and
the same observable trace.  Values are integers.  Semantics:

* ``for v in e`` evaluates ``e`` once and iterates v = 0 .. e-1.
* ``range(n)`` is the identity on n, so ``for i in range(n)`` matches
  Python's loop count.  ``print(...)`` appends a trace event, returns 0.
* Dotted calls (``m.f(...)``) are external: they append a trace event and
  return 0.  Plain calls must resolve to a defined function.
* Falling off the end of a function returns 0.  Conditions compare two
  integers.  Locals shadow module globals; assignment in a function is
  always local.

Execution is fuel-limited so runaway loops fail deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import MiniPyRuntimeError
from .nodes import AstNode, AstTree, BinOp, CallRef, Expr, Name, Num

MAX_STEPS = 1_000_000
# each MiniPy frame costs several host frames; keep the guard low enough
# that it always fires before the host interpreter's own recursion limit
MAX_CALL_DEPTH = 100

TraceEvent = tuple  # ("print", args) | ("call", dotted_name, args)


@dataclass
class RunResult:
    value: int | None
    env: dict[str, int]
    trace: list[TraceEvent] = field(default_factory=list)


class _Return(Exception):
    def __init__(self, value: int) -> None:
        self.value = value


class _Interp:
    def __init__(self, tree: AstTree, max_steps: int) -> None:
        self.tree = tree
        self.fns: dict[str, AstNode] = {}
        self.globals: dict[str, int] = {}
        self.trace: list[TraceEvent] = []
        self.steps = max_steps
        self.depth = 0

    # -- helpers ---------------------------------------------------------------

    def tick(self) -> None:
        self.steps -= 1
        if self.steps < 0:
            raise MiniPyRuntimeError("step limit exceeded")

    def lookup(self, name: str, env: dict[str, int]) -> int:
        if name in env:
            return env[name]
        if name in self.globals:
            return self.globals[name]
        raise MiniPyRuntimeError(f"undefined name {name!r}")

    # -- evaluation ---------------------------------------------------------------

    def eval(self, expr: Expr, env: dict[str, int]) -> int:
        if isinstance(expr, Num):
            return expr.value
        if isinstance(expr, Name):
            return self.lookup(expr.id, env)
        if isinstance(expr, CallRef):
            return self.eval_call(expr.node, env)
        if isinstance(expr, BinOp):
            left = self.eval(expr.left, env)
            right = self.eval(expr.right, env)
            if expr.op == "+":
                return left + right
            if expr.op == "-":
                return left - right
            if expr.op == "*":
                return left * right
            raise MiniPyRuntimeError(f"unknown operator {expr.op!r}")
        raise MiniPyRuntimeError(f"cannot evaluate {expr!r}")

    def eval_call(self, node: AstNode, env: dict[str, int]) -> int:
        name = node.name or ""
        args = [self.eval(a, env) for a in node.args]
        if "." in name:
            self.trace.append(("call", name, tuple(args)))
            return 0
        if name == "range":
            if len(args) != 1:
                raise MiniPyRuntimeError("range takes one argument")
            return args[0]
        if name == "print":
            self.trace.append(("print", tuple(args)))
            return 0
        fn = self.fns.get(name)
        if fn is None:
            raise MiniPyRuntimeError(f"call to undefined function {name!r}")
        if len(args) != len(fn.params):
            raise MiniPyRuntimeError(
                f"{name}() takes {len(fn.params)} arguments, got {len(args)}"
            )
        return self.invoke(fn, args)

    def invoke(self, fn: AstNode, args: list[int]) -> int:
        self.depth += 1
        if self.depth > MAX_CALL_DEPTH:
            raise MiniPyRuntimeError("call depth exceeded")
        local = dict(zip(fn.params, args))
        try:
            self.exec_block(fn.body(), local)
        except _Return as ret:
            return ret.value
        finally:
            self.depth -= 1
        return 0

    def truth(self, cond: AstNode | None, env: dict[str, int]) -> bool:
        if cond is None:
            raise MiniPyRuntimeError("condition missing")
        left = self.eval(cond.left, env) if cond.left is not None else 0
        right = self.eval(cond.right, env) if cond.right is not None else 0
        op = cond.name
        if op == "<":
            return left < right
        if op == ">":
            return left > right
        if op == "<=":
            return left <= right
        if op == ">=":
            return left >= right
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        raise MiniPyRuntimeError(f"unknown comparison {op!r}")

    # -- statements -----------------------------------------------------------

    def exec_block(self, stmts: list[AstNode], env: dict[str, int]) -> None:
        for stmt in stmts:
            self.exec_stmt(stmt, env)

    def exec_stmt(self, node: AstNode, env: dict[str, int]) -> None:
        self.tick()
        kind = node.kind
        if kind == "Assign":
            if node.name is None:
                raise MiniPyRuntimeError("assignment without target")
            env[node.name] = self.eval(node.value, env) if node.value is not None else 0
        elif kind == "Call":
            self.eval_call(node, env)
        elif kind == "Return":
            value = self.eval(node.value, env) if node.value is not None else 0
            raise _Return(value)
        elif kind == "If":
            branch = node.body() if self.truth(node.cond(), env) else node.orelse()
            self.exec_block(branch, env)
        elif kind == "While":
            while self.truth(node.cond(), env):
                self.tick()
                self.exec_block(node.body(), env)
        elif kind == "For":
            if node.name is None:
                raise MiniPyRuntimeError("for loop without variable")
            bound = self.eval(node.value, env) if node.value is not None else 0
            for i in range(bound):
                self.tick()
                env[node.name] = i
                self.exec_block(node.body(), env)
        elif kind == "FunctionDef":
            if node.name is None:
                raise MiniPyRuntimeError("function without name")
            self.fns[node.name] = node
        elif kind == "Import":
            if node.name is not None:
                env[node.name] = 0
        else:
            raise MiniPyRuntimeError(f"cannot execute node kind {kind}")


def run_module(tree: AstTree, max_steps: int = MAX_STEPS) -> RunResult:
    """Execute top-level statements; returns the final global environment."""
    interp = _Interp(tree, max_steps)
    try:
        interp.exec_block(tree.root.children, interp.globals)
    except _Return as exc:
        raise MiniPyRuntimeError("return outside function") from exc
    return RunResult(value=None, env=interp.globals, trace=interp.trace)


def call_function(
    tree: AstTree, name: str, args: list[int], max_steps: int = MAX_STEPS
) -> tuple[int, list[TraceEvent]]:
    """Run the module, then call a defined function.

    Returns (value, trace); the trace covers module execution plus the call.
    """
    interp = _Interp(tree, max_steps)
    try:
        interp.exec_block(tree.root.children, interp.globals)
    except _Return as exc:
        raise MiniPyRuntimeError("return outside function") from exc
    fn = interp.fns.get(name)
    if fn is None:
        raise MiniPyRuntimeError(f"no function named {name!r}")
    if len(args) != len(fn.params):
        raise MiniPyRuntimeError(
            f"{name}() takes {len(fn.params)} arguments, got {len(args)}"
        )
    value = interp.invoke(fn, list(args))
    return value, interp.trace


def behavior_fingerprint(
    tree: AstTree, name: str, args: list[int], max_steps: int = MAX_STEPS
) -> tuple:
    """Comparable summary of one run: ("ok", value, trace) or ("error",).

    Two trees are behaviorally equivalent on an input when their
    fingerprints match.  All runtime errors collapse to one outcome since
    a failing run has no well-defined observable suffix.
    """
    try:
        value, trace = call_function(tree, name, args, max_steps)
    except MiniPyRuntimeError:
        return ("error",)
    return ("ok", value, tuple(trace))
