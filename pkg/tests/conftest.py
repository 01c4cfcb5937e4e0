"""Shared fixtures: canned sources, parsed trees, and a small cached corpus."""

from __future__ import annotations

import contextlib
import io
import sys

import pytest

from refactorlab.cli import main as cli_main
from refactorlab.corpus import Dataset, build_dataset, ingest_units
from refactorlab.graph import CodeGraph, build_graph
from refactorlab.minipy.parser import parse_source
from refactorlab.synth import generate_units


def run_cli(argv, stdin_text: str | None = None) -> tuple[int, str, str]:
    """Drive the CLI in-process, capturing stdout and stderr."""
    out, err = io.StringIO(), io.StringIO()
    old_stdin = sys.stdin
    try:
        if stdin_text is not None:
            sys.stdin = io.StringIO(stdin_text)
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = cli_main(list(argv))
    finally:
        sys.stdin = old_stdin
    return code, out.getvalue(), err.getvalue()

# A function whose body ends in a loop with decisions inside and real work
# after it: the shape every detector is supposed to flag.
SPLITTABLE_SRC = """\
def tally(n, base):
    acc = base
    for i in range(n):
        if i > 2:
            acc = acc + i
        else:
            if acc > 10:
                acc = acc - 1
    scaled = acc * 2
    extra = scaled + n
    return extra

print(tally(6, 1))
"""

# Same decision count, but everything after the loop is a bare return, so
# splitting would extract nothing.
UNSPLITTABLE_SRC = """\
def drain(n):
    acc = 0
    for i in range(n):
        if i > 1:
            acc = acc + i
        else:
            if acc > 5:
                acc = acc - 2
    return acc
"""

PLAIN_SRC = """\
def double(x):
    y = x * 2
    return y

print(double(4))
"""

IMPORT_HEAVY_SRC = """\
import alpha
import beta
import gamma
import delta
import epsilon
import zeta

def hub(x):
    a = alpha.pull(x)
    b = beta.pull(a)
    c = gamma.pull(b)
    d = delta.pull(c)
    e = epsilon.pull(d)
    f = zeta.pull(e)
    return f
"""


@pytest.fixture
def splittable_tree():
    return parse_source(SPLITTABLE_SRC)


@pytest.fixture
def splittable_graph(splittable_tree) -> CodeGraph:
    return build_graph(splittable_tree)


@pytest.fixture
def plain_tree():
    return parse_source(PLAIN_SRC)


@pytest.fixture(scope="session")
def small_dataset() -> Dataset:
    """An 80-program synthetic corpus, built once per test session."""
    units, prov = ingest_units(generate_units(80, seed=7))
    return build_dataset(units, seed=7, provenance=prov)
