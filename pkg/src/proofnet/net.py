"""Untyped proof nets: links, ground structures with boxes, the s-expression
text format, and the structural checks (well-formedness, switchings, cuts).

A net is a g-structure (a list of links over named edges, plus an ordered list
of conclusions) together with one box per ``!``-link.  Edge names are global:
no two edges of a net share a name, at any depth.  Links carry no name of
their own; :attr:`Link.id` derives one from the edges they touch.
"""

from __future__ import annotations

import enum
import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator


class LinkKind(enum.Enum):
    AX = "ax"
    CUT = "cut"
    TENSOR = "tensor"
    PAR = "par"
    ONE = "one"
    BOT = "bot"
    BANG = "bang"
    FLAT = "flat"
    WHY = "why"
    PIN = "pin"  # conclusion pin; never written in the text format


_KIND_RANK = {k: i for i, k in enumerate(LinkKind)}


@dataclass(frozen=True)
class Link:
    """A link with its premise and conclusion edges.

    For a ``!``-link the first conclusion is the main one and the others are
    auxiliary (structural) conclusions.
    """

    kind: LinkKind
    premises: tuple[str, ...] = ()
    conclusions: tuple[str, ...] = ()

    @property
    def id(self) -> str:
        k = self.kind
        if k is LinkKind.CUT:
            return "cut:" + ",".join(self.premises)
        if k is LinkKind.PIN:
            return "pin:" + self.premises[0]
        if k is LinkKind.AX:
            return "ax:" + ",".join(self.conclusions)
        return f"{k.value}:{self.conclusions[0]}"

    @property
    def main(self) -> str:
        return self.conclusions[0]

    @property
    def aux(self) -> tuple[str, ...]:
        return self.conclusions[1:] if self.kind is LinkKind.BANG else ()


@dataclass(frozen=True)
class Box:
    """Content of a ``!``-link: a net and the map aux edge -> box conclusion."""

    net: "Net"
    mapping: tuple[tuple[str, str], ...]

    @cached_property
    def inner(self) -> dict[str, str]:
        return dict(self.mapping)

    @cached_property
    def outer(self) -> dict[str, str]:
        return {b: a for a, b in self.mapping}

    @property
    def main(self) -> str:
        (m,) = [c for c in self.net.conclusions if not self.net.is_structural(c)]
        return m


def _link_key(link: Link):
    return (_KIND_RANK[link.kind], link.id)


@dataclass(frozen=True)
class Net:
    links: tuple[Link, ...] = ()
    conclusions: tuple[str, ...] = ()
    boxes: dict = field(default_factory=dict)  # bang link id -> Box

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(sorted(self.links, key=_link_key)))

    # -- per g-structure indexes -------------------------------------------

    @cached_property
    def source(self) -> dict[str, tuple[Link, int]]:
        out = {}
        for link in self.links:
            for i, e in enumerate(link.conclusions):
                out[e] = (link, i)
        return out

    @cached_property
    def target(self) -> dict[str, tuple[Link, int]]:
        out = {}
        for link in itertools.chain(self.links, self.pins):
            for i, e in enumerate(link.premises):
                out[e] = (link, i)
        return out

    @cached_property
    def pins(self) -> tuple[Link, ...]:
        return tuple(Link(LinkKind.PIN, (c,)) for c in self.conclusions)

    @cached_property
    def by_id(self) -> dict[str, Link]:
        return {l.id: l for l in self.links}

    @cached_property
    def edges(self) -> tuple[str, ...]:
        return tuple(self.source)

    def is_structural(self, edge: str) -> bool:
        link, port = self.source[edge]
        return link.kind is LinkKind.FLAT or (link.kind is LinkKind.BANG and port > 0)

    def box(self, bang: Link | str) -> Box:
        return self.boxes[bang if isinstance(bang, str) else bang.id]

    @property
    def is_proper(self) -> bool:
        """True when the net has no structural conclusion."""
        return not any(self.is_structural(c) for c in self.conclusions)

    @cached_property
    def depth(self) -> int:
        return 1 + max((b.net.depth for b in self.boxes.values()), default=-1)

    def __str__(self) -> str:
        return serialize(self)


# -- traversal helpers -------------------------------------------------------

Path = tuple  # tuple of bang link ids leading from the ground to a g-structure


def walk(net: Net, path: Path = ()) -> Iterator[tuple[Path, Net]]:
    """Yield ``(path, g-structure)`` for the ground and every nested box."""
    yield path, net
    for bid in sorted(net.boxes):
        yield from walk(net.boxes[bid].net, path + (bid,))


def at(net: Net, path: Path) -> Net:
    for bid in path:
        net = net.boxes[bid].net
    return net


def locate(net: Net, link_id: str) -> tuple[Path, Link]:
    for path, g in walk(net):
        if link_id in g.by_id:
            return path, g.by_id[link_id]
    raise KeyError(link_id)


def all_edges(net: Net) -> set[str]:
    return {e for _, g in walk(net) for e in g.edges}


def rename_edges(n: Net, f) -> Net:
    """Rename every edge at every depth through ``f``."""

    def link(l: Link) -> Link:
        return Link(l.kind, tuple(map(f, l.premises)), tuple(map(f, l.conclusions)))

    boxes = {}
    for l in n.links:
        if l.kind is LinkKind.BANG:
            box = n.box(l)
            boxes[link(l).id] = Box(rename_edges(box.net, f), tuple((f(a), f(b)) for a, b in box.mapping))
    return Net(tuple(map(link, n.links)), tuple(map(f, n.conclusions)), boxes)


def net_size(n: Net) -> int:
    """Number of logical edges, boxes included."""
    own = sum(1 for e in n.edges if not n.is_structural(e))
    return own + sum(net_size(b.net) for b in n.boxes.values())


def count_cuts(n: Net) -> int:
    return sum(1 for _, g in walk(n) for l in g.links if l.kind is LinkKind.CUT)


# -- errors --------------------------------------------------------------------


class NetError(ValueError):
    """Raised for malformed net text or structure; ``code`` names the problem."""

    def __init__(self, code: str, message: str, position=None):
        self.code = code
        self.position = position
        where = f" at line {position[0]}, column {position[1]}" if position else ""
        super().__init__(f"{code}: {message}{where}")


# -- text format ---------------------------------------------------------------


class _Sym(str):
    pos: tuple[int, int]


class _List(list):
    pos: tuple[int, int]


def _read_sexp(text: str) -> list:
    stack = [_List()]
    stack[0].pos = (1, 1)
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == "(":
            lst = _List()
            lst.pos = (line, col)
            stack[-1].append(lst)
            stack.append(lst)
            i, col = i + 1, col + 1
            continue
        if ch == ")":
            if len(stack) == 1:
                raise NetError("syntax", "unbalanced ')'", (line, col))
            stack.pop()
            i, col = i + 1, col + 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        sym = _Sym(text[i:j])
        sym.pos = (line, col)
        stack[-1].append(sym)
        col += j - i
        i = j
    if len(stack) != 1:
        raise NetError("syntax", "missing ')'", stack[-1].pos)
    return stack[0]


def _expect_sym(x, what: str) -> str:
    if not isinstance(x, _Sym):
        raise NetError("syntax", f"expected {what}", getattr(x, "pos", None))
    return str(x)


def _head(form) -> str:
    if not isinstance(form, _List) or not form or not isinstance(form[0], _Sym):
        raise NetError("syntax", "expected a form", getattr(form, "pos", None))
    return str(form[0])


def _split_arrow(items, pos):
    syms = [_expect_sym(x, "edge name") for x in items]
    if syms.count("->") != 1:
        raise NetError("syntax", "expected exactly one '->'", pos)
    k = syms.index("->")
    return syms[:k], syms[k + 1 :]


def _parse_net_form(form) -> Net:
    if _head(form) != "net":
        raise NetError("syntax", "expected (net ...)", form.pos)
    if len(form) < 2 or _head(form[1]) != "concl":
        raise NetError("syntax", "expected (concl ...)", form.pos)
    concl = tuple(_expect_sym(x, "edge name") for x in form[1][1:])
    links, boxes = [], {}
    for lf in form[2:]:
        h = _head(lf)
        args = lf[1:]
        if h in ("ax", "cut"):
            es = tuple(_expect_sym(x, "edge name") for x in args)
            if len(es) != 2:
                raise NetError("syntax", f"{h} takes two edges", lf.pos)
            kind = LinkKind.AX if h == "ax" else LinkKind.CUT
            links.append(Link(kind, (), es) if h == "ax" else Link(kind, es, ()))
        elif h in ("one", "bot"):
            if len(args) != 1:
                raise NetError("syntax", f"{h} takes one edge", lf.pos)
            links.append(Link(LinkKind(h), (), (_expect_sym(args[0], "edge name"),)))
        elif h in ("tensor", "par", "flat", "why"):
            prem, conc = _split_arrow(args, lf.pos)
            want = {"tensor": 2, "par": 2, "flat": 1}.get(h)
            if len(conc) != 1 or (want is not None and len(prem) != want):
                raise NetError("syntax", f"wrong number of edges for {h}", lf.pos)
            links.append(Link(LinkKind(h), tuple(prem), tuple(conc)))
        elif h == "bang":
            if len(args) != 5 or args[0] != "->":
                raise NetError("syntax", "expected (bang -> e (aux ...) (box ...) (map ...))", lf.pos)
            main = _expect_sym(args[1], "edge name")
            if _head(args[2]) != "aux" or _head(args[3]) != "box" or _head(args[4]) != "map":
                raise NetError("syntax", "expected (aux ...) (box ...) (map ...)", lf.pos)
            aux = tuple(_expect_sym(x, "edge name") for x in args[2][1:])
            if len(args[3]) != 2:
                raise NetError("syntax", "box holds exactly one net", args[3].pos)
            inner = _parse_net_form(args[3][1])
            mapping = []
            for m in args[4][1:]:
                if not isinstance(m, _List) or len(m) != 3 or m[1] != "=":
                    raise NetError("syntax", "expected (aux = boxconcl)", getattr(m, "pos", None))
                mapping.append((_expect_sym(m[0], "edge name"), _expect_sym(m[2], "edge name")))
            link = Link(LinkKind.BANG, (), (main,) + aux)
            boxes[link.id] = Box(inner, tuple(mapping))
            links.append(link)
        else:
            raise NetError("syntax", f"unknown link {h!r}", lf.pos)
    return Net(tuple(links), concl, boxes)


def parse_net(text: str) -> Net:
    """Parse the s-expression text format and check well-formedness.

    >>> parse_net("(net (concl c) (one c))").links
    (Link(kind=<LinkKind.ONE: 'one'>, premises=(), conclusions=('c',)),)
    """
    forms = _read_sexp(text)
    if len(forms) != 1:
        raise NetError("syntax", "expected exactly one (net ...) form", (1, 1))
    net = _parse_net_form(forms[0])
    check_net(net)
    return net


def _fmt_link(link: Link, net: Net, indent: str) -> str:
    k = link.kind
    if k is LinkKind.AX:
        return f"(ax {' '.join(link.conclusions)})"
    if k is LinkKind.CUT:
        return f"(cut {' '.join(link.premises)})"
    if k in (LinkKind.ONE, LinkKind.BOT):
        return f"({k.value} {link.main})"
    if k is LinkKind.BANG:
        box = net.box(link)
        inner = _fmt_net(box.net, indent + "    ")
        maps = " ".join(f"({a} = {b})" for a, b in sorted(box.mapping))
        return (
            f"(bang -> {link.main} (aux {' '.join(link.aux)})\n{indent}  (box {inner})"
            f"\n{indent}  (map {maps}))".replace("(aux )", "(aux)").replace("(map )", "(map)")
        )
    prem = " ".join(link.premises)
    sep = " " if prem else ""
    return f"({k.value} {prem}{sep}-> {link.main})"


def _fmt_net(net: Net, indent: str) -> str:
    head = f"(net (concl {' '.join(net.conclusions)})".replace("(concl )", "(concl)")
    parts = [head] + [indent + "  " + _fmt_link(l, net, indent + "  ") for l in net.links]
    return "\n".join(parts) + ")"


def serialize(net: Net) -> str:
    """Canonical text of a net (links sorted by kind, then by id)."""
    return _fmt_net(net, "") + "\n"


# -- well-formedness -----------------------------------------------------------

_STRUCTURAL_PREMISE = {LinkKind.WHY}


def check_net(net: Net) -> None:
    """Raise :class:`NetError` unless every g-structure is well formed."""
    seen: set[str] = set()
    _check(net, seen)


def _check(net: Net, seen: set[str]) -> None:
    sources: dict[str, Link] = {}
    for link in net.links:
        for e in link.conclusions:
            if e in sources or e in seen:
                raise NetError("duplicate-edge", f"edge {e!r} has two sources")
            sources[e] = link
    seen.update(sources)
    targets: dict[str, Link] = {}
    for link in itertools.chain(net.links, net.pins):
        for e in link.premises:
            if e in targets:
                raise NetError("duplicate-edge", f"edge {e!r} has two targets")
            targets[e] = link
    for e in sources.keys() - targets.keys():
        raise NetError("dangling-edge", f"edge {e!r} has no target")
    for e in targets.keys() - sources.keys():
        raise NetError("dangling-edge", f"edge {e!r} has no source")
    for e, link in targets.items():
        if link.kind is LinkKind.PIN:
            continue
        want = link.kind in _STRUCTURAL_PREMISE
        if net.is_structural(e) != want:
            kind = "structural" if want else "logical"
            raise NetError("port-kind-mismatch", f"{link.kind.value} expects a {kind} edge, got {e!r}")
    bangs = {l.id for l in net.links if l.kind is LinkKind.BANG}
    if bangs != set(net.boxes):
        raise NetError("box-arity-mismatch", "every !-link needs exactly one box")
    for link in net.links:
        if link.kind is not LinkKind.BANG:
            continue
        box = net.box(link)
        if not box.net.links:
            raise NetError("empty-box", f"box of {link.id} is empty")
        _check(box.net, seen)
        inner = box.net
        logical = [c for c in inner.conclusions if not inner.is_structural(c)]
        structural = {c for c in inner.conclusions if inner.is_structural(c)}
        if len(logical) != 1:
            raise NetError("box-arity-mismatch", f"box of {link.id} needs one logical conclusion")
        aux = [a for a, _ in box.mapping]
        concl = [b for _, b in box.mapping]
        if (
            sorted(aux) != sorted(link.aux)
            or len(set(concl)) != len(concl)
            or set(concl) != structural
        ):
            raise NetError("box-arity-mismatch", f"aux map of {link.id} is not a bijection")


# -- switchings ----------------------------------------------------------------


@dataclass
class ValidationReport:
    acyclic_switchings: bool
    failures: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"acyclic_switchings": self.acyclic_switchings, "failures": self.failures})


def _undirected_edges(g: Net) -> list[tuple[str, str, str]]:
    return [(e, g.source[e][0].id, g.target[e][0].id) for e in g.edges]


def _find_cycle(edges) -> list[str] | None:
    parent: dict[str, str] = {}

    def find(x):
        while parent.get(x, x) != x:
            x = parent[x]
        return x

    adj: dict[str, list] = {}
    for e, u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return _tree_path(adj, u, v) + [e]
        parent[ru] = rv
        adj.setdefault(u, []).append((v, e))
        adj.setdefault(v, []).append((u, e))
    return None


def _tree_path(adj, u, v) -> list[str]:
    prev = {u: None}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        if x == v:
            break
        for y, e in adj.get(x, ()):
            if y not in prev:
                prev[y] = (x, e)
                queue.append(y)
    out = []
    while prev[v] is not None:
        v, e = prev[v]
        out.append(e)
    return out[::-1]


def switchings(g: Net) -> Iterator[tuple[list[str], list[tuple[str, str, str]]]]:
    """Yield ``(choices, undirected edges)`` for each switching of one g-structure."""
    full = _undirected_edges(g)
    choice_points = [l for l in g.links if (l.kind is LinkKind.PAR or (l.kind is LinkKind.WHY and l.premises))]
    for pick in itertools.product(*(l.premises for l in choice_points)):
        dropped = set()
        for link, keep in zip(choice_points, pick):
            dropped.update(p for p in link.premises if p != keep)
        choices = [f"{l.id}={k}" for l, k in zip(choice_points, pick)]
        yield choices, [t for t in full if t[0] not in dropped]


def validate_net(n: Net) -> ValidationReport:
    """Check that every switching of every g-structure is acyclic."""
    failures = []
    for path, g in walk(n):
        if _find_cycle(_undirected_edges(g)) is None:
            continue  # a forest stays a forest under every switching
        for choices, edges in switchings(g):
            cycle = _find_cycle(edges)
            if cycle is not None:
                failures.append({"depth": len(path), "switching": choices, "cycle": cycle})
    return ValidationReport(not failures, failures)


# -- cuts ------------------------------------------------------------------------


class CutClass(enum.Enum):
    CLASH = "Clash"
    AX = "Ax"
    TENSOR_PAR = "TensorPar"
    ONE_BOT = "OneBot"
    BANG_WHY = "BangWhy"


_DUAL_PAIRS = {
    frozenset((LinkKind.TENSOR, LinkKind.PAR)): CutClass.TENSOR_PAR,
    frozenset((LinkKind.ONE, LinkKind.BOT)): CutClass.ONE_BOT,
    frozenset((LinkKind.BANG, LinkKind.WHY)): CutClass.BANG_WHY,
}


@dataclass(frozen=True)
class CutInfo:
    cut: str
    depth: int
    cls: CutClass
    erasing: bool
    linear: bool | None
    path: Path = ()

    @property
    def reducible(self) -> bool:
        return self.cls is not CutClass.CLASH


def cut_class(g: Net, cut: Link) -> CutClass:
    a, b = (g.source[p][0].kind for p in cut.premises)
    if LinkKind.AX in (a, b):
        return CutClass.AX
    if a != b:
        return _DUAL_PAIRS.get(frozenset((a, b)), CutClass.CLASH)
    return CutClass.CLASH


def why_of(g: Net, cut: Link) -> Link:
    for p in cut.premises:
        if g.source[p][0].kind is LinkKind.WHY:
            return g.source[p][0]
    raise ValueError("no ?-link premise")


def bang_of(g: Net, cut: Link) -> Link:
    for p in cut.premises:
        if g.source[p][0].kind is LinkKind.BANG:
            return g.source[p][0]
    raise ValueError("no !-link premise")


def classify_cuts(n: Net) -> list[CutInfo]:
    """One record per cut link at every depth, ordered by (depth, id)."""
    out = []
    for path, g in walk(n):
        for link in g.links:
            if link.kind is not LinkKind.CUT:
                continue
            cls = cut_class(g, link)
            erasing, linear = False, None
            if cls is CutClass.BANG_WHY:
                arity = len(why_of(g, link).premises)
                erasing, linear = arity == 0, arity == 1
            out.append(CutInfo(link.id, len(path), cls, erasing, linear, path))
    out.sort(key=lambda c: (c.depth, c.cut))
    return out


def stratified_nonerasing(cuts: list[CutInfo]) -> list[CutInfo]:
    """Non-erasing cuts of minimal depth among the non-erasing non-clash cuts."""
    cand = [c for c in cuts if c.reducible and not c.erasing]
    if not cand:
        return []
    d = min(c.depth for c in cand)
    return [c for c in cand if c.depth == d]


def antistratified_erasing(cuts: list[CutInfo]) -> list[CutInfo]:
    """When every cut is erasing, those of maximal depth; otherwise none."""
    if not cuts or not all(c.erasing for c in cuts):
        return []
    d = max(c.depth for c in cuts)
    return [c for c in cuts if c.depth == d]


def is_ne_normal(n: Net) -> bool:
    return all(c.erasing for c in classify_cuts(n))


def has_clash(n: Net) -> bool:
    return any(c.cls is CutClass.CLASH for c in classify_cuts(n))
