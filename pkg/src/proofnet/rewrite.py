"""Cut elimination: one-step rules, strategies, exhaustive longest-reduction
search, and the canonical non-erasing-then-erasing decomposition."""

from __future__ import annotations

import hashlib
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

import networkx as nx
from networkx.algorithms import isomorphism as iso

from .net import (
    Box,
    CutClass,
    CutInfo,
    Link,
    LinkKind,
    Net,
    all_edges,
    antistratified_erasing,
    classify_cuts,
    cut_class,
    locate,
    stratified_nonerasing,
    walk,
)

DEFAULT_FUEL = 100_000


# -- mutable working copy ---------------------------------------------------------


class _MLink:
    __slots__ = ("kind", "premises", "conclusions", "box", "mapping")

    def __init__(self, kind, premises=(), conclusions=(), box=None, mapping=None):
        self.kind = kind
        self.premises = list(premises)
        self.conclusions = list(conclusions)
        self.box = box
        self.mapping = mapping

    @property
    def id(self) -> str:
        return Link(self.kind, tuple(self.premises), tuple(self.conclusions)).id


class _MG:
    __slots__ = ("links", "concl")

    def __init__(self, links, concl):
        self.links = links
        self.concl = concl

    def source(self, edge: str) -> tuple[_MLink, int]:
        for l in self.links:
            if edge in l.conclusions:
                return l, l.conclusions.index(edge)
        raise KeyError(edge)

    def target(self, edge: str) -> _MLink | None:
        """The link taking ``edge`` as premise, or None for a conclusion."""
        for l in self.links:
            if edge in l.premises:
                return l
        if edge in self.concl:
            return None
        raise KeyError(edge)

    def find(self, link_id: str) -> _MLink:
        for l in self.links:
            if l.id == link_id:
                return l
        raise KeyError(link_id)


def _thaw(net: Net) -> _MG:
    links = []
    for l in net.links:
        m = _MLink(l.kind, l.premises, l.conclusions)
        if l.kind is LinkKind.BANG:
            box = net.box(l)
            m.box = _thaw(box.net)
            m.mapping = dict(box.mapping)
        links.append(m)
    return _MG(links, list(net.conclusions))


def _freeze(g: _MG) -> Net:
    links, boxes = [], {}
    for m in g.links:
        link = Link(m.kind, tuple(m.premises), tuple(m.conclusions))
        if m.kind is LinkKind.BANG:
            boxes[link.id] = Box(_freeze(m.box), tuple(sorted(m.mapping.items())))
        links.append(link)
    return Net(tuple(links), tuple(g.concl), boxes)


def _mlocate(root: _MG, link_id: str):
    """Chain of (g-structure, bang) pairs from the ground, the g-structure, the link."""

    def go(g, chain):
        for l in g.links:
            if l.id == link_id:
                return chain, g, l
        for l in g.links:
            if l.kind is LinkKind.BANG:
                found = go(l.box, chain + [(g, l)])
                if found:
                    return found
        return None

    found = go(root, [])
    if found is None:
        raise KeyError(link_id)
    return found


def _medges(g: _MG) -> Iterator[str]:
    for l in g.links:
        yield from l.conclusions
        if l.box is not None:
            yield from _medges(l.box)


class _Names:
    """Fresh edge names, deterministic for a given net."""

    def __init__(self, used):
        self.used = set(used)
        self.n = 0

    def copy_of(self, name: str, i: int) -> str:
        cand = f"{name}:{i}"
        while cand in self.used:
            cand += f":{i}"
        self.used.add(cand)
        return cand

    def fresh(self) -> str:
        while True:
            self.n += 1
            cand = f"~{self.n}"
            if cand not in self.used:
                self.used.add(cand)
                return cand


# -- reduction steps ---------------------------------------------------------------


@dataclass(frozen=True)
class ReductionStep:
    """One cut-elimination step.

    ``ancestor_map`` sends every edge of the reduct to the edge of the redex
    it descends from; ``link_ancestor_map`` does the same for created cuts and
    copied links.
    """

    cut: str
    rule: str
    erasing: bool
    depth: int
    ancestor_map: dict = field(default_factory=dict, compare=False, repr=False)
    link_ancestor_map: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def residue_map(self) -> dict:
        out: dict = {}
        for new, old in itertools.chain(self.ancestor_map.items(), self.link_ancestor_map.items()):
            out.setdefault(old, set()).add(new)
        return out

    def to_json(self, index: int) -> dict:
        return {"step": index, "cut": self.cut, "rule": self.rule, "erasing": self.erasing, "depth": self.depth}


@dataclass
class ReductionTrace:
    start: Net
    steps: list = field(default_factory=list)
    end: Net | None = None

    def __len__(self) -> int:
        return len(self.steps)


class ClashError(ValueError):
    pass


def reduce_cut(n: Net, cut: str) -> tuple[Net, ReductionStep]:
    """Fire the cut link ``cut`` (at any depth) and return the reduct."""
    path, link = locate(n, cut)
    if link.kind is not LinkKind.CUT:
        raise KeyError(f"{cut} is not a cut link")
    g0 = n
    for bid in path:
        g0 = g0.boxes[bid].net
    cls = cut_class(g0, link)
    if cls is CutClass.CLASH:
        raise ClashError(f"{cut} is a clash")
    root = _thaw(n)
    chain, g, mcut = _mlocate(root, cut)
    names = _Names(_medges(root))
    anc: dict[str, str] = {}
    link_anc: dict[str, str] = {}
    erasing = False
    if cls is CutClass.AX:
        _ax(g, mcut, anc)
    elif cls is CutClass.TENSOR_PAR:
        _tensor_par(g, mcut, link_anc, cut)
    elif cls is CutClass.ONE_BOT:
        _one_bot(g, mcut)
    else:
        erasing = _bang_why(chain, g, mcut, names, anc, link_anc, cut)
    out = _freeze(root)
    full = {e: anc.get(e, e) for e in all_edges(out)}
    step = ReductionStep(cut, cls.value, erasing, len(path), full, link_anc)
    return out, step


def _ax(g: _MG, cut: _MLink, anc: dict) -> None:
    p1, p2 = cut.premises
    s1, _ = g.source(p1)
    if s1.kind is LinkKind.AX:
        ax, b, c = s1, p1, p2
    else:
        ax, _ = g.source(p2)
        b, c = p2, p1
    a = ax.conclusions[1] if ax.conclusions[0] == b else ax.conclusions[0]
    if a == c:
        raise ValueError("axiom cut against itself")
    g.links.remove(ax)
    g.links.remove(cut)
    src, port = g.source(c)
    src.conclusions[port] = a
    anc[a] = c


def _tensor_par(g: _MG, cut: _MLink, link_anc: dict, cut_id: str) -> None:
    l1, _ = g.source(cut.premises[0])
    l2, _ = g.source(cut.premises[1])
    g.links.remove(cut)
    g.links.remove(l1)
    g.links.remove(l2)
    for x, y in zip(l1.premises, l2.premises):
        new = _MLink(LinkKind.CUT, (x, y))
        g.links.append(new)
        link_anc[new.id] = cut_id


def _one_bot(g: _MG, cut: _MLink) -> None:
    for p in cut.premises:
        g.links.remove(g.source(p)[0])
    g.links.remove(cut)


def _trace_flat(g: _MG, edge: str):
    """Follow a structural edge up through boxes to its flat."""
    steps = []
    while True:
        link, _ = g.source(edge)
        if link.kind is LinkKind.FLAT:
            return steps, g, link
        inner = link.mapping[edge]
        steps.append((g, link, edge, inner))
        g, edge = link.box, inner


def _copy(g: _MG, i: int, names: _Names, anc: dict, link_anc: dict) -> tuple[_MG, dict]:
    ren: dict[str, str] = {}

    def name(e):
        if e not in ren:
            ren[e] = names.copy_of(e, i)
            anc[ren[e]] = e
        return ren[e]

    def go(h: _MG) -> _MG:
        links = []
        for l in h.links:
            m = _MLink(l.kind, [name(e) for e in l.premises], [name(e) for e in l.conclusions])
            if l.box is not None:
                m.box = go(l.box)
                m.mapping = {name(a): name(b) for a, b in l.mapping.items()}
            link_anc[m.id] = l.id
            links.append(m)
        return _MG(links, [name(e) for e in h.concl])

    return go(g), ren


def _replace_struct(chain: list, g: _MG, edge: str, new: list, names: _Names, anc: dict) -> None:
    """Replace the structural edge ``edge`` of ``g`` by the edges ``new``.

    When ``edge`` is a conclusion of a box, the replacement propagates to the
    auxiliary conclusions of the enclosing !-link, and so on down to the ?-link.
    """
    tgt = g.target(edge)
    if tgt is not None:
        idx = tgt.premises.index(edge)
        tgt.premises[idx : idx + 1] = new
        return
    idx = g.concl.index(edge)
    g.concl[idx : idx + 1] = new
    parent, bang = chain[-1]
    (aux,) = [a for a, b in bang.mapping.items() if b == edge]
    outer = [names.fresh() for _ in new]
    for o in outer:
        anc[o] = aux
    j = bang.conclusions.index(aux)
    bang.conclusions[j : j + 1] = outer
    del bang.mapping[aux]
    bang.mapping.update(zip(outer, new))
    _replace_struct(chain[:-1], parent, aux, outer, names, anc)


def _bang_why(chain, g: _MG, cut: _MLink, names: _Names, anc: dict, link_anc: dict, cut_id: str) -> bool:
    l1, _ = g.source(cut.premises[0])
    l2, _ = g.source(cut.premises[1])
    o, w = (l1, l2) if l1.kind is LinkKind.BANG else (l2, l1)
    traces = [_trace_flat(g, b) for b in w.premises]
    for steps, h, flat in traces:
        for _, bang, aux, inner in steps:
            bang.conclusions.remove(aux)
            del bang.mapping[aux]
            bang.box.concl.remove(inner)
        h.links.remove(flat)
    routed: dict[str, list] = {a: [] for a in o.conclusions[1:]}
    for i, (steps, h, flat) in enumerate(traces, 1):
        copy, ren = _copy(o.box, i, names, anc, link_anc)
        main = ren[_box_main(o)]
        h.links.extend(copy.links)
        new_cut = _MLink(LinkKind.CUT, (flat.premises[0], main))
        h.links.append(new_cut)
        link_anc[new_cut.id] = cut_id
        for aux, inner in o.mapping.items():
            e = ren[inner]
            for _, bang, _, _ in reversed(steps):
                bang.box.concl.append(e)
                up = names.fresh()
                anc[up] = aux
                bang.conclusions.append(up)
                bang.mapping[up] = e
                e = up
            routed[aux].append(e)
    g.links.remove(cut)
    g.links.remove(w)
    g.links.remove(o)
    for aux in o.conclusions[1:]:
        _replace_struct(chain, g, aux, routed[aux], names, anc)
    return not traces


def _box_main(o: _MLink) -> str:
    inner = set(o.mapping.values())
    (m,) = [c for c in o.box.concl if c not in inner]
    return m


# -- strategies ----------------------------------------------------------------------

STRATEGIES = ("any", "nonerasing", "stratified_nonerasing", "antistratified_erasing")


def eligible_cuts(n: Net, strategy: str) -> list[CutInfo]:
    """Cuts a strategy may fire, in (depth, id) order."""
    cuts = classify_cuts(n)
    if strategy == "any":
        return [c for c in cuts if c.reducible]
    if strategy == "nonerasing":
        return [c for c in cuts if c.reducible and not c.erasing]
    if strategy == "stratified_nonerasing":
        return stratified_nonerasing(cuts)
    if strategy == "antistratified_erasing":
        return antistratified_erasing(cuts)
    raise ValueError(f"unknown strategy {strategy!r}")


def _terminal(n: Net) -> str:
    cuts = classify_cuts(n)
    if not cuts:
        return "normal"
    if any(not c.reducible for c in cuts):
        return "clash_blocked"
    if all(c.erasing for c in cuts):
        return "ne_normal"
    return "blocked"


def normalize(n: Net, strategy: str = "any", fuel: int = DEFAULT_FUEL) -> tuple[ReductionTrace, str]:
    """Fire the first eligible cut until none is left or the fuel runs out.

    The terminal status is one of ``normal``, ``ne_normal``,
    ``fuel_exhausted`` or ``clash_blocked``.
    """
    if strategy == "antistratified_erasing" and any(
        c.reducible and not c.erasing for c in classify_cuts(n)
    ):
        raise ValueError("antistratified erasing reduction needs a net without non-erasing cuts")
    trace = ReductionTrace(n)
    cur = n
    while True:
        todo = eligible_cuts(cur, strategy)
        if not todo:
            trace.end = cur
            status = _terminal(cur)
            return trace, status
        if len(trace.steps) >= fuel:
            trace.end = cur
            return trace, "fuel_exhausted"
        cur, step = reduce_cut(cur, todo[0].cut)
        trace.steps.append(step)


# -- isomorphism ---------------------------------------------------------------------

_PREMISE_PORTS = {LinkKind.TENSOR, LinkKind.PAR}


def net_graph(n: Net) -> nx.DiGraph:
    """Labelled digraph whose isomorphisms are the isomorphisms of nets."""
    G = nx.DiGraph()

    def add(g: Net, pre: tuple, ground: bool, mapped: set) -> list:
        nodes = []
        for l in g.links:
            node = (pre, "l", l.id)
            G.add_node(node, label=l.kind.value)
            nodes.append(node)
        for i, c in enumerate(g.conclusions):
            node = (pre, "pin", c)
            if ground:
                label = f"pin{i}"
            else:
                label = "pin-aux" if c in mapped else "pin-main"
            G.add_node(node, label=label)
            nodes.append(node)
        for e in g.edges:
            en = (pre, "e", e)
            G.add_node(en, label="edge")
            src, port = g.source[e]
            out = "a" if src.kind is LinkKind.BANG and port > 0 else "c"
            G.add_edge((pre, "l", src.id), en, label=out)
            tgt, tport = g.target[e]
            if tgt.kind is LinkKind.PIN:
                G.add_edge(en, (pre, "pin", e), label="p")
            else:
                lab = f"p{tport}" if tgt.kind in _PREMISE_PORTS else "p"
                G.add_edge(en, (pre, "l", tgt.id), label=lab)
        for l in g.links:
            if l.kind is not LinkKind.BANG:
                continue
            box = g.box(l)
            inner = add(box.net, pre + (l.id,), False, set(box.outer))
            for node in inner:
                G.add_edge((pre, "l", l.id), node, label="in")
            for a, b in box.mapping:
                G.add_edge((pre, "e", a), (pre + (l.id,), "pin", b), label="map")
        return nodes

    add(n, (), True, set())
    return G


def _digest(x) -> str:
    return hashlib.sha1(repr(x).encode()).hexdigest()[:20]


def _refine(G: nx.DiGraph, rounds: int = 4) -> str:
    """Colour refinement over in- and out-edges; colours go to the ``color`` attribute.

    Isomorphisms preserve colours, so matching on them is sound and prunes
    the search on nets with many duplicated boxes.  Returns a graph hash.
    """
    color = {v: d["label"] for v, d in G.nodes(data=True)}
    for _ in range(rounds):
        sig = {
            v: (
                color[v],
                tuple(sorted((d["label"], color[u]) for u, _, d in G.in_edges(v, data=True))),
                tuple(sorted((d["label"], color[w]) for _, w, d in G.out_edges(v, data=True))),
            )
            for v in G
        }
        stable = len(set(sig.values())) == len(set(color.values()))
        color = {v: _digest(sig[v]) for v in G}
        if stable:
            break
    nx.set_node_attributes(G, color, "color")
    return _digest(sorted(color.values()))


_NODE = iso.categorical_node_match("color", None)
_EDGE = iso.categorical_edge_match("label", None)


def nets_isomorphic(a: Net, b: Net) -> bool:
    ga, gb = net_graph(a), net_graph(b)
    if ga.number_of_nodes() != gb.number_of_nodes() or _refine(ga) != _refine(gb):
        return False
    return nx.is_isomorphic(ga, gb, node_match=_NODE, edge_match=_EDGE)


class IsoTable:
    """Nets up to isomorphism, each with a dense integer index."""

    def __init__(self):
        self.nets: list[Net] = []
        self._buckets: dict[str, list[tuple[nx.DiGraph, int]]] = {}

    def lookup(self, n: Net, add: bool = True) -> tuple[int, bool]:
        G = net_graph(n)
        h = _refine(G)
        bucket = self._buckets.setdefault(h, [])
        for H, i in bucket:
            if nx.is_isomorphic(G, H, node_match=_NODE, edge_match=_EDGE):
                return i, False
        if not add:
            return -1, False
        i = len(self.nets)
        self.nets.append(n)
        bucket.append((G, i))
        return i, True

    def __len__(self) -> int:
        return len(self.nets)


# -- longest reductions ----------------------------------------------------------------


@dataclass(frozen=True)
class LengthOutcome:
    status: str  # "SN", "NotSN" or "Unknown"
    max_len: int | None = None
    witness: str | None = None  # "cycle", "clash" or "fuel"
    cycle_length: int | None = None
    states: int = 0

    def __str__(self) -> str:
        if self.status == "SN":
            return f"SN({self.max_len})"
        if self.status == "NotSN":
            extra = f", length {self.cycle_length}" if self.cycle_length else ""
            return f"NotSN({self.witness}{extra})"
        return "Unknown(fuel)"

    def to_json(self) -> dict:
        out = {"status": self.status, "max_len": self.max_len, "witness": self.witness, "states": self.states}
        if self.cycle_length is not None:
            out["cycle_length"] = self.cycle_length
        return out


def _distance(succ: dict, src: int, dst: int) -> int | None:
    seen = {src: 0}
    queue = deque([src])
    while queue:
        x = queue.popleft()
        if x == dst:
            return seen[x]
        for y in succ.get(x, ()):
            if y not in seen:
                seen[y] = seen[x] + 1
                queue.append(y)
    return None


class _Explorer:
    """Breadth-first exploration of the reduction graph up to isomorphism."""

    def __init__(self, n: Net, nonerasing_only: bool, fuel: int):
        self.table = IsoTable()
        self.table.lookup(n)
        self.succ: dict[int, set] = {}
        self.nonerasing_only = nonerasing_only
        self.fuel = fuel
        self.spent = 0

    def run(self) -> LengthOutcome:
        queue = deque([0])
        done = set()
        while queue:
            i = queue.popleft()
            if i in done:
                continue
            done.add(i)
            net = self.table.nets[i]
            cuts = classify_cuts(net)
            if any(not c.reducible for c in cuts):
                return LengthOutcome("NotSN", witness="clash", states=len(self.table))
            out = self.succ.setdefault(i, set())
            for c in cuts:
                if self.nonerasing_only and c.erasing:
                    continue
                if self.spent >= self.fuel:
                    return LengthOutcome("Unknown", witness="fuel", states=len(self.table))
                nxt, _ = reduce_cut(net, c.cut)
                self.spent += 1
                j, new = self.table.lookup(nxt)
                out.add(j)
                if new:
                    queue.append(j)
                    continue
                back = _distance(self.succ, j, i)
                if back is not None:
                    return LengthOutcome("NotSN", witness="cycle", cycle_length=back + 1, states=len(self.table))
        dag = nx.DiGraph()
        dag.add_nodes_from(range(len(self.table)))
        dag.add_edges_from((i, j) for i, js in self.succ.items() for j in js)
        return LengthOutcome("SN", max_len=nx.dag_longest_path_length(dag), states=len(self.table))


def strong_length(n: Net, mode: str = "all_steps", fuel: int = DEFAULT_FUEL) -> LengthOutcome:
    """Longest reduction length by exhaustive search, or why there is none.

    ``mode`` is ``all_steps`` or ``nonerasing_only``.  Fuel counts reduction
    steps performed during the search.
    """
    if mode not in ("all_steps", "nonerasing_only"):
        raise ValueError(f"unknown mode {mode!r}")
    return _Explorer(n, mode == "nonerasing_only", fuel).run()


class NotStronglyNormalizing(ValueError):
    def __init__(self, outcome: LengthOutcome):
        self.outcome = outcome
        super().__init__(str(outcome))


def longest_stratified(n: Net, fuel: int = DEFAULT_FUEL) -> ReductionTrace:
    """A longest stratified non-erasing sequence from ``n`` to a ¬e-normal net."""
    table = IsoTable()
    best: dict[int, int] = {}
    spent = 0

    def length(net: Net) -> int:
        nonlocal spent
        i, _ = table.lookup(net)
        if i in best:
            return best[i]
        if best.get(("open", i)):
            raise NotStronglyNormalizing(LengthOutcome("NotSN", witness="cycle"))
        best[("open", i)] = True
        top = 0
        for c in eligible_cuts(net, "stratified_nonerasing"):
            spent += 1
            if spent > fuel:
                raise NotStronglyNormalizing(LengthOutcome("Unknown", witness="fuel"))
            top = max(top, 1 + length(reduce_cut(net, c.cut)[0]))
        best[i] = top
        return top

    remaining = length(n)
    trace = ReductionTrace(n)
    cur = n
    while remaining:
        for c in eligible_cuts(cur, "stratified_nonerasing"):
            nxt, step = reduce_cut(cur, c.cut)
            if length(nxt) == remaining - 1:
                trace.steps.append(step)
                cur, remaining = nxt, remaining - 1
                break
    trace.end = cur
    return trace


def canonical_sequence(n: Net, fuel: int = DEFAULT_FUEL) -> tuple[ReductionTrace, ReductionTrace]:
    """Longest stratified non-erasing sequence, then antistratified erasing steps.

    Raises :class:`NotStronglyNormalizing` when ``n`` is not SN.
    """
    outcome = strong_length(n, "all_steps", fuel)
    if outcome.status != "SN":
        raise NotStronglyNormalizing(outcome)
    r1 = longest_stratified(n, fuel)
    r2, status = normalize(r1.end, "antistratified_erasing", fuel)
    if status != "normal":
        raise RuntimeError(f"erasing phase ended in {status}")
    return r1, r2
