"""Seeded generator of labeled MiniPy programs.

The generator exists to make the model comparison falsifiable at desk
scale.  It emits seven program families:

* ``pos_small`` / ``pos_large`` — a function with a loop enclosing two or
  more decisions and real work after the loop (the refactor pattern).
  Small ones stay under every fixed threshold, so the rule engine misses
  them; large ones exceed the complexity cutoff.
* ``outside_*`` / ``noafter_*`` — decoys cut from the same cloth: the
  identical statement and decision budget, but decisions sit before the
  loop, or nothing but a return follows it.  Flat feature marginals match
  the positives almost exactly; only the arrangement differs.
* ``flat_decoy`` — straight-line nested conditionals with high cyclomatic
  complexity and no loop at all (the classic threshold false positive).
* ``coupled`` — small logic that leans on more than five imported
  modules, tripping the coupling rule.
* ``neutral`` — ordinary small programs and scripts.

Every emitted program parses, terminates under the interpreter for any
non-negative integer arguments (loops are range-bound or strict
countdowns), and gets its label recomputed structurally downstream —
the family tags here are generation intent, not ground truth.
"""

from __future__ import annotations

from typing import Final

from .minipy.source import SourceUnit
from .rng import Rng

# (family, weight) — weights are percentages of the mix.
ARCHETYPES: Final[tuple[tuple[str, int], ...]] = (
    ("pos_small", 10),
    ("pos_large", 16),
    ("outside_small", 6),
    ("outside_large", 6),
    ("noafter_small", 5),
    ("noafter_large", 5),
    ("flat_decoy", 8),
    ("coupled", 6),
    ("neutral", 38),
)

_FN_WORDS = (
    "scan", "merge", "fold", "pack", "rank", "tally",
    "shift", "probe", "trim", "blend", "route", "grade",
)
_VAR_WORDS = (
    "acc", "total", "count", "left", "right", "step",
    "size", "mark", "score", "span", "bias", "gap",
)
_MODULE_WORDS = ("os", "sys", "math", "json", "net", "db", "ui", "log", "fmt", "cfg")
_CMP_OPS = ("<", ">", "<=", ">=", "==", "!=")


class _Emit:
    """Indentation-aware line buffer."""

    def __init__(self) -> None:
        self.rows: list[str] = []

    def line(self, depth: int, text: str) -> None:
        self.rows.append("    " * depth + text)

    def text(self) -> str:
        return "\n".join(self.rows) + "\n"


class _Scope:
    """Tracks which names are definitely assigned and which are frozen.

    Reads draw from ``readable``; assignment targets come from
    ``writable`` minus ``protected`` (loop counters must only be touched
    by their own decrement, or termination breaks).
    """

    def __init__(self, rng: Rng, names: list[str]) -> None:
        self.rng = rng
        self.pool = names
        self.readable: list[str] = []
        self.writable: list[str] = []
        self.protected: set[str] = set()

    def fresh(self) -> str:
        for name in self.pool:
            if name not in self.readable:
                self.readable.append(name)
                self.writable.append(name)
                return name
        name = f"v{len(self.readable)}"
        self.readable.append(name)
        self.writable.append(name)
        return name

    def add_param(self, name: str) -> None:
        self.readable.append(name)
        self.writable.append(name)

    def read(self) -> str:
        return self.rng.choice(self.readable)

    def target(self) -> str:
        options = [n for n in self.writable if n not in self.protected]
        return self.rng.choice(options)


def _operand(scope: _Scope) -> str:
    if scope.rng.random() < 0.35:
        return str(scope.rng.randint(0, 9))
    return scope.read()


def _expr(scope: _Scope) -> str:
    roll = scope.rng.random()
    if roll < 0.25:
        return _operand(scope)
    op = scope.rng.choice(["+", "+", "-", "-", "*"])
    rhs = str(scope.rng.randint(1, 4)) if op == "*" else _operand(scope)
    return f"{scope.read()} {op} {rhs}"


def _cond(scope: _Scope) -> str:
    op = scope.rng.choice(list(_CMP_OPS[:4]) + ["==", "!="])
    return f"{scope.read()} {op} {_operand(scope)}"


def _assign(em: _Emit, scope: _Scope, depth: int) -> None:
    em.line(depth, f"{scope.target()} = {_expr(scope)}")


def _assign_fresh(em: _Emit, scope: _Scope, depth: int) -> None:
    """Introduce a new variable bound right here.

    The right-hand side is built before the name joins the pool, so every
    name in scope is definitely assigned at the point it becomes readable
    — conditionals further down only ever rebind.
    """
    rhs = _expr(scope) if scope.readable else str(scope.rng.randint(0, 9))
    em.line(depth, f"{scope.fresh()} = {rhs}")


def _emit_decisions(em: _Emit, scope: _Scope, depth: int, k: int, nest_bias: float) -> None:
    """Emit statements containing exactly k decision nodes."""
    while k > 0:
        roll = scope.rng.random()
        if k >= 2 and roll < nest_bias:
            em.line(depth, f"if {_cond(scope)}:")
            _assign(em, scope, depth + 1)
            em.line(depth + 1, f"if {_cond(scope)}:")
            _assign(em, scope, depth + 2)
            k -= 2
        elif k >= 2 and roll < nest_bias + 0.2:
            em.line(depth, f"if {_cond(scope)}:")
            _assign(em, scope, depth + 1)
            em.line(depth, f"elif {_cond(scope)}:")
            _assign(em, scope, depth + 1)
            k -= 2
        else:
            em.line(depth, f"if {_cond(scope)}:")
            _assign(em, scope, depth + 1)
            if scope.rng.random() < 0.3:
                em.line(depth, "else:")
                _assign(em, scope, depth + 1)
            k -= 1


def _emit_wrapped_decisions(em: _Emit, scope: _Scope, depth: int, k: int) -> None:
    """k decisions as one guard conditional enclosing the rest.

    Mirrors the depth profile of a loop body: the guard sits where a loop
    header would, the enclosed decisions one level in, so programs built
    this way are depth-indistinguishable from loop-nested ones.
    """
    if k <= 1:
        _emit_decisions(em, scope, depth, k, nest_bias=0.3)
        return
    em.line(depth, f"if {_cond(scope)}:")
    _assign(em, scope, depth + 1)
    _emit_decisions(em, scope, depth + 1, k - 1, nest_bias=0.3)


def _emit_simple_loop(em: _Emit, scope: _Scope, depth: int) -> None:
    """Loop with at most one decision inside: never a refactor pattern."""
    var = f"j{scope.rng.randint(0, 9)}"
    em.line(depth, f"for {var} in range({scope.rng.randint(2, 5)}):")
    scope.readable.append(var)
    if scope.rng.random() < 0.4:
        em.line(depth + 1, f"if {_cond(scope)}:")
        _assign(em, scope, depth + 2)
    _assign(em, scope, depth + 1)
    scope.readable.remove(var)


def _emit_main_loop(em: _Emit, scope: _Scope, depth: int, d_in: int, param: str) -> None:
    """The pattern loop: d_in decisions strictly inside."""
    if scope.rng.random() < 0.5:
        var = "i"
        em.line(depth, f"for {var} in range({param}):")
        scope.readable.append(var)
        body = depth + 1
        if d_in > 0:
            _emit_decisions(em, scope, body, d_in, nest_bias=0.3)
        _assign(em, scope, body)
        scope.readable.remove(var)
    else:
        ctr = "w"
        em.line(depth, f"{ctr} = {param} + {scope.rng.randint(0, 3)}")
        scope.add_param(ctr)
        scope.protected.add(ctr)
        em.line(depth, f"while {ctr} > 0:")
        body = depth + 1
        if d_in > 0:
            _emit_decisions(em, scope, body, d_in, nest_bias=0.3)
        if scope.rng.random() < 0.5:
            _assign(em, scope, body)
        em.line(body, f"{ctr} = {ctr} - 1")
        scope.protected.discard(ctr)


def _emit_pattern_fn(em: _Emit, rng: Rng, name: str, twist: str, size: str) -> None:
    """One function from the shared skeleton.

    ``twist`` places the decision budget: "pos" inside the loop with a
    tail after it, "outside" before the loop, "noafter" inside the loop
    with only a return following.  Budgets are identical across twists
    for a given size, so flat counts line up.
    """
    scope = _Scope(rng, _shuffled(rng, _VAR_WORDS))
    params = ["n"] if rng.random() < 0.5 else ["n", "m"]
    for p in params:
        scope.add_param(p)
    d_total = rng.randint(2, 4) if size == "small" else rng.randint(11, 13)
    d_in_pos = max(2, (d_total + 1) // 2)
    d_tail_pos = d_total - d_in_pos
    n_setup = rng.randint(2, 3)
    n_tail = rng.randint(1, 2)
    extra_loop = rng.random() < 0.3

    em.line(0, f"def {name}({', '.join(params)}):")
    acc = scope.fresh()
    em.line(1, f"{acc} = 0")
    for _ in range(n_setup - 1):
        _assign_fresh(em, scope, 1)

    if twist == "pos":
        _emit_main_loop(em, scope, 1, d_in_pos, params[0])
        for _ in range(n_tail):
            _assign(em, scope, 1)
        if d_tail_pos > 0:
            _emit_decisions(em, scope, 1, d_tail_pos, nest_bias=0.3)
        if extra_loop:
            _emit_simple_loop(em, scope, 1)
    elif twist == "outside":
        d_in = rng.randint(0, 1)
        d_pre = d_total - d_in - d_tail_pos
        if d_pre > 0:
            _emit_wrapped_decisions(em, scope, 1, d_pre)
        _emit_main_loop(em, scope, 1, d_in, params[0])
        for _ in range(n_tail):
            _assign(em, scope, 1)
        if d_tail_pos > 0:
            _emit_decisions(em, scope, 1, d_tail_pos, nest_bias=0.3)
        if extra_loop:
            _emit_simple_loop(em, scope, 1)
    elif twist == "noafter":
        for _ in range(n_tail):
            _assign(em, scope, 1)
        if extra_loop:
            _emit_simple_loop(em, scope, 1)
        d_pre = d_total - d_in_pos
        if d_pre > 0:
            _emit_decisions(em, scope, 1, d_pre, nest_bias=0.3)
        _emit_main_loop(em, scope, 1, d_in_pos, params[0])
    else:
        raise ValueError(f"unknown twist {twist!r}")
    em.line(1, f"return {acc}")


def _emit_helper_fn(em: _Emit, rng: Rng, name: str) -> None:
    """Tiny leaf function; occasionally called from the main one."""
    scope = _Scope(rng, _shuffled(rng, _VAR_WORDS))
    scope.add_param("x")
    em.line(0, f"def {name}(x):")
    out = scope.fresh()
    em.line(1, f"{out} = x + {rng.randint(1, 5)}")
    if rng.random() < 0.5:
        em.line(1, f"if {_cond(scope)}:")
        _assign(em, scope, 2)
    em.line(1, f"return {out}")


def _shuffled(rng: Rng, words: tuple[str, ...]) -> list[str]:
    pool = list(words)
    rng.shuffle(pool)
    return pool


def _fn_name(rng: Rng, used: set[str]) -> str:
    while True:
        name = f"{rng.choice(list(_FN_WORDS))}{rng.randint(0, 99)}"
        if name not in used:
            used.add(name)
            return name


def _driver(em: _Emit, rng: Rng, fn: str, n_args: int) -> None:
    args = ", ".join(str(rng.randint(2, 9)) for _ in range(n_args))
    em.line(0, f"out = {fn}({args})")
    em.line(0, "print(out)")


def _pattern_program(rng: Rng, twist: str, size: str) -> str:
    em = _Emit()
    used: set[str] = set()
    imported = None
    if rng.random() < 0.3:
        imported = rng.choice(list(_MODULE_WORDS))
        em.line(0, f"import {imported}")
    helper = None
    if rng.random() < 0.35:
        helper = _fn_name(rng, used)
        _emit_helper_fn(em, rng, helper)
    name = _fn_name(rng, used)
    mark = len(em.rows)
    _emit_pattern_fn(em, rng, name, twist, size)
    n_args = 2 if f"def {name}(n, m):" in em.rows[mark] else 1
    if imported and rng.random() < 0.7:
        em.line(0, f"base = {imported}.load({rng.randint(1, 9)})")
    if helper:
        em.line(0, f"seed = {helper}({rng.randint(1, 9)})")
    _driver(em, rng, name, n_args)
    return em.text()


def _flat_decoy_program(rng: Rng) -> str:
    em = _Emit()
    used: set[str] = set()
    name = _fn_name(rng, used)
    scope = _Scope(rng, _shuffled(rng, _VAR_WORDS))
    params = ["n"] if rng.random() < 0.5 else ["n", "m"]
    for p in params:
        scope.add_param(p)
    em.line(0, f"def {name}({', '.join(params)}):")
    acc = scope.fresh()
    em.line(1, f"{acc} = 0")
    for _ in range(rng.randint(1, 2)):
        _assign_fresh(em, scope, 1)
    _emit_decisions(em, scope, 1, rng.randint(11, 14), nest_bias=0.4)
    _assign(em, scope, 1)
    em.line(1, f"return {acc}")
    _driver(em, rng, name, len(params))
    return em.text()


def _coupled_program(rng: Rng) -> str:
    em = _Emit()
    used: set[str] = set()
    mods = _shuffled(rng, _MODULE_WORDS)[: rng.randint(6, 8)]
    for mod in sorted(mods):
        em.line(0, f"import {mod}")
    name = _fn_name(rng, used)
    scope = _Scope(rng, _shuffled(rng, _VAR_WORDS))
    scope.add_param("n")
    em.line(0, f"def {name}(n):")
    acc = scope.fresh()
    em.line(1, f"{acc} = 0")
    for mod in mods[:2]:
        v = scope.fresh()
        em.line(1, f"{v} = {mod}.pull(n)")
    if rng.random() < 0.5:
        em.line(1, f"if {_cond(scope)}:")
        _assign(em, scope, 2)
    em.line(1, f"return {acc}")
    for mod in mods[2:]:
        em.line(0, f"{mod}.push({rng.randint(1, 9)})")
    _driver(em, rng, name, 1)
    return em.text()


def _neutral_program(rng: Rng) -> str:
    kind = rng.choice(["fn", "script", "pair"])
    em = _Emit()
    used: set[str] = set()
    if kind == "script":
        scope = _Scope(rng, _shuffled(rng, _VAR_WORDS))
        for _ in range(rng.randint(2, 4)):
            _assign_fresh(em, scope, 0)
        if rng.random() < 0.4:
            _emit_simple_loop(em, scope, 0)
        if rng.random() < 0.5:
            em.line(0, f"if {_cond(scope)}:")
            _assign(em, scope, 1)
        em.line(0, f"print({scope.read()})")
        return em.text()
    if kind == "pair":
        first = _fn_name(rng, used)
        _emit_helper_fn(em, rng, first)
        second = _fn_name(rng, used)
        em.line(0, f"def {second}(n):")
        em.line(1, f"t = {first}(n)")
        em.line(1, f"if t > {rng.randint(2, 9)}:")
        em.line(2, f"t = t - {rng.randint(1, 3)}")
        em.line(1, "return t")
        _driver(em, rng, second, 1)
        return em.text()
    # single function with modest structure
    name = _fn_name(rng, used)
    scope = _Scope(rng, _shuffled(rng, _VAR_WORDS))
    scope.add_param("n")
    em.line(0, f"def {name}(n):")
    acc = scope.fresh()
    em.line(1, f"{acc} = {rng.randint(0, 3)}")
    for _ in range(rng.randint(1, 2)):
        _assign_fresh(em, scope, 1)
    d = rng.randint(0, 2)
    if d > 0:
        _emit_decisions(em, scope, 1, d, nest_bias=0.3)
    if rng.random() < 0.5:
        _emit_simple_loop(em, scope, 1)
        if rng.random() < 0.6:
            _assign(em, scope, 1)
    em.line(1, f"return {acc}")
    _driver(em, rng, name, 1)
    return em.text()


def generate_program(rng: Rng, archetype: str) -> str:
    """One program of the requested family; consumes the rng."""
    if archetype.startswith(("pos_", "outside_", "noafter_")):
        twist, size = archetype.rsplit("_", 1)
        twist = {"pos": "pos", "outside": "outside", "noafter": "noafter"}[twist]
        return _pattern_program(rng, twist, size)
    if archetype == "flat_decoy":
        return _flat_decoy_program(rng)
    if archetype == "coupled":
        return _coupled_program(rng)
    if archetype == "neutral":
        return _neutral_program(rng)
    raise ValueError(f"unknown archetype {archetype!r}")


def _pick_archetype(rng: Rng) -> str:
    total = sum(w for _, w in ARCHETYPES)
    roll = rng.randrange(total)
    upto = 0
    for name, weight in ARCHETYPES:
        upto += weight
        if roll < upto:
            return name
    return ARCHETYPES[-1][0]


def generate_units(n: int, seed: int = 42) -> list[SourceUnit]:
    """n seeded programs as in-memory source units."""
    master = Rng(seed)
    units: list[SourceUnit] = []
    for i in range(n):
        prog_rng = Rng(master.next_u64())
        archetype = _pick_archetype(prog_rng)
        body = generate_program(prog_rng, archetype)
        units.append(SourceUnit.from_text(f"synth_{i:05d}.mpy", body))
    return units
