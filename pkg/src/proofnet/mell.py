"""MELL formulas, typing of untyped nets, and the cut-size termination measure."""

from __future__ import annotations

from collections import Counter
from functools import lru_cache
from typing import Iterable

from .net import Link, LinkKind, Net, walk

# Formulas are tuples: ("var", X), ("covar", X), ("one",), ("bot",),
# ("tensor", A, B), ("par", A, B), ("ofc", A), ("whynot", A).
Formula = tuple


def var(x: str) -> Formula:
    return ("var", x)


def covar(x: str) -> Formula:
    return ("covar", x)


ONE: Formula = ("one",)
BOT: Formula = ("bot",)


def tensor(a: Formula, b: Formula) -> Formula:
    return ("tensor", a, b)


def par(a: Formula, b: Formula) -> Formula:
    return ("par", a, b)


def ofc(a: Formula) -> Formula:
    return ("ofc", a)


def whynot(a: Formula) -> Formula:
    return ("whynot", a)


_DUAL_HEAD = {
    "var": "covar",
    "covar": "var",
    "one": "bot",
    "bot": "one",
    "tensor": "par",
    "par": "tensor",
    "ofc": "whynot",
    "whynot": "ofc",
}


@lru_cache(maxsize=None)
def fdual(a: Formula) -> Formula:
    head = _DUAL_HEAD[a[0]]
    if a[0] in ("var", "covar"):
        return (head, a[1])
    return (head,) + tuple(fdual(b) for b in a[1:])


@lru_cache(maxsize=None)
def complexity(a: Formula) -> int:
    """Number of occurrences of 1, ⊥, ⊗, ⅋, ?, ! in ``a``."""
    if a[0] in ("var", "covar"):
        return 0
    return 1 + sum(complexity(b) for b in a[1:])


def show_formula(a: Formula) -> str:
    h = a[0]
    if h == "var":
        return a[1]
    if h == "covar":
        return a[1] + "^"
    if h == "one":
        return "1"
    if h == "bot":
        return "bot"
    if h == "ofc":
        return "!" + show_formula(a[1])
    if h == "whynot":
        return "?" + show_formula(a[1])
    op = " * " if h == "tensor" else " | "
    return "(" + show_formula(a[1]) + op + show_formula(a[2]) + ")"


def parse_formula(text: str) -> Formula:
    """Inverse of :func:`show_formula`."""
    pos = 0

    def peek():
        while pos < len(text) and text[pos] == " ":
            skip()
        return text[pos] if pos < len(text) else ""

    def skip(n=1):
        nonlocal pos
        pos += n

    def atom_or_unary() -> Formula:
        c = peek()
        if c == "!":
            skip()
            return ofc(atom_or_unary())
        if c == "?":
            skip()
            return whynot(atom_or_unary())
        if c == "(":
            skip()
            left = atom_or_unary()
            op = peek()
            skip()
            right = atom_or_unary()
            if peek() != ")":
                raise ValueError(f"bad formula {text!r}")
            skip()
            return tensor(left, right) if op == "*" else par(left, right)
        if text.startswith("1", pos):
            skip()
            return ONE
        if text.startswith("bot", pos):
            skip(3)
            return BOT
        start = pos
        while pos < len(text) and (text[pos].isalnum() or text[pos] == "_"):
            skip()
        name = text[start:pos]
        if not name:
            raise ValueError(f"bad formula {text!r}")
        if peek() == "^":
            skip()
            return covar(name)
        return var(name)

    out = atom_or_unary()
    if peek():
        raise ValueError(f"trailing input in {text!r}")
    return out


# -- typing --------------------------------------------------------------------------


def _flat_premise(net: Net, path: tuple, edge: str) -> str:
    """Premise of the flat associated with a structural edge of ``at(path)``."""
    g = net
    for bid in path:
        g = g.boxes[bid].net
    link, _ = g.source[edge]
    while link.kind is LinkKind.BANG:
        box = g.box(link)
        edge = box.inner[edge]
        g = box.net
        link, _ = g.source[edge]
    return link.premises[0]


def typecheck_mell(n: Net, assignment: dict) -> bool:
    """Check the MELL typing constraints at every link of every depth.

    ``assignment`` maps every logical edge to a formula; structural edges take
    the type of the premise of their associated flat.
    """
    try:
        return all(_check_link(n, path, g, l, assignment) for path, g in walk(n) for l in g.links)
    except KeyError:
        return False


def _check_link(root: Net, path: tuple, g: Net, link: Link, ty: dict) -> bool:
    k = link.kind
    if k is LinkKind.AX:
        a, b = link.conclusions
        return ty[a] == fdual(ty[b])
    if k is LinkKind.CUT:
        a, b = link.premises
        return ty[a] == fdual(ty[b])
    if k is LinkKind.ONE:
        return ty[link.main] == ONE
    if k is LinkKind.BOT:
        return ty[link.main] == BOT
    if k in (LinkKind.TENSOR, LinkKind.PAR):
        head = "tensor" if k is LinkKind.TENSOR else "par"
        a, b = link.premises
        return ty[link.main] == (head, ty[a], ty[b])
    if k is LinkKind.FLAT:
        return link.premises[0] in ty
    if k is LinkKind.WHY:
        c = ty[link.main]
        if c[0] != "whynot":
            return False
        return all(ty[_flat_premise(root, path, b)] == c[1] for b in link.premises)
    if k is LinkKind.BANG:
        box = g.box(link)
        return ty[link.main] == ofc(ty[box.main])
    return True


def cut_size_measure(n: Net, assignment: dict) -> list[int]:
    """Sorted list of the complexities of all cuts, at every depth."""
    if not typecheck_mell(n, assignment):
        raise ValueError("net is not MELL-typed by the given assignment")
    return sorted(
        complexity(assignment[l.premises[0]])
        for _, g in walk(n)
        for l in g.links
        if l.kind is LinkKind.CUT
    )


def multiset_less(m: Iterable[int], m2: Iterable[int]) -> bool:
    """The multiset extension of < on naturals, by comparing maxima.

    >>> multiset_less([3, 1], [3, 2])
    True
    """
    a, b = Counter(m), Counter(m2)
    while True:
        if not a:
            return bool(b)
        if not b:
            return False
        ma, mb = max(a), max(b)
        if ma != mb:
            return ma < mb
        if a[ma] != b[mb]:
            return a[ma] < b[mb]
        del a[ma], b[mb]


def transfer_types(assignment: dict, ancestor_map: dict) -> dict:
    """Types of a reduct's edges, read off their ancestors."""
    out = {}
    for e, anc in ancestor_map.items():
        if anc in assignment:
            out[e] = assignment[anc]
    return out
