"""Experiments of nets in the relational domain and the derived interpretations.

Interpretations are infinite, so everything here works on budgeted slices and
represents a set of points closed under substitution by its most general
elements.  Experiments are generated with fresh atoms on axioms; cut equations
are then solved by unification, which yields the most general experiments.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from .net import LinkKind, Net, is_ne_normal
from .points import (
    ATOM,
    BAG,
    NEG,
    PAIR,
    POS,
    Fresh,
    InterpPoint,
    apply,
    apply_all,
    atoms_all,
    bag,
    dual,
    exhaustive,
    from_flat,
    instance_of,
    match_all,
    most_general,
    msum,
    pair,
    shape_key,
    star,
    unify_all,
    unify_dual_all,
)


@dataclass(frozen=True)
class Budget:
    """Bounds that make the interpretations finite.

    Atoms occurring in ``weakening_candidates`` are templates: each use gets
    fresh atoms, so ``[(+, w)]`` stands for every singleton multiset.
    ``max_copies_per_box=None`` bounds copies only through ``max_total_sbis``.
    ``work_limit`` caps the partial experiments examined by one enumeration.
    """

    max_copies_per_box: int | None = 2
    weakening_candidates: tuple = ((), ((ATOM, POS, "w"),))
    max_total_sbis: int = 64
    cap: int = 256
    substitution_candidates: tuple = ()
    work_limit: int | None = 200_000

    def with_(self, **kw) -> "Budget":
        return Budget(**{**self.__dict__, **kw})

    def to_json(self) -> dict:
        from .points import show

        return {
            "max_copies_per_box": self.max_copies_per_box,
            "weakening_candidates": [[show(x) for x in c] for c in self.weakening_candidates],
            "max_total_sbis": self.max_total_sbis,
            "cap": self.cap,
            "work_limit": self.work_limit,
        }


class Experiment:
    """An experiment of a net: labels of ground edges and sub-experiments per box.

    Substitutions are applied lazily to the internal labels; ``result`` and
    ``w`` are always up to date.
    """

    __slots__ = ("mode", "net", "_labels", "_boxes", "_subst", "result", "w", "s")

    def __init__(self, mode, net, labels, boxes, result, w, s, subst=()):
        self.mode = mode
        self.net = net
        self._labels = labels
        self._boxes = boxes
        self._subst = subst
        self.result = result
        self.w = w
        self.s = s

    @property
    def s_bis(self) -> int:
        return self.s + 2 * len(self.w)

    @property
    def point(self) -> InterpPoint:
        return InterpPoint(self.result, self.w)

    def substitute(self, sigma: dict) -> "Experiment":
        if not sigma:
            return self
        return Experiment(
            self.mode,
            self.net,
            self._labels,
            self._boxes,
            apply_all(sigma, self.result),
            tuple(sorted(apply_all(sigma, self.w))),
            self.s,
            self._subst + (sigma,),
        )

    def _resolve(self, x):
        for sigma in self._subst:
            x = apply(sigma, x)
        return x

    @property
    def labels(self) -> dict:
        return {e: self._resolve(x) for e, x in self._labels.items()}

    @property
    def boxes(self) -> dict:
        out = {}
        for bid, subs in self._boxes.items():
            lst = []
            for sub in subs:
                for sigma in self._subst:
                    sub = sub.substitute(sigma)
                lst.append(sub)
            out[bid] = tuple(lst)
        return out

    def copies(self) -> dict:
        return {bid: len(subs) for bid, subs in self._boxes.items()}

    def __repr__(self) -> str:
        return f"Experiment({self.mode}, s={self.s}, point={self.point})"


# -- generation -----------------------------------------------------------------------


def _logical_count(g: Net) -> int:
    return sum(1 for e in g.edges if not g.is_structural(e))


def _multisets(items: list, lo: int, hi: int | None, budget: int) -> Iterator[tuple]:
    """Multisets of ``items`` (sorted by cost) with size in [lo, hi] and total cost ≤ budget."""

    def go(start, left, chosen, spent):
        if len(chosen) >= lo:
            yield tuple(chosen)
        if hi is not None and len(chosen) >= hi:
            return
        for j in range(start, len(items)):
            c = items[j].s_bis
            if spent + c > budget:
                break
            chosen.append(items[j])
            yield from go(j, left, chosen, spent + c)
            chosen.pop()

    yield from go(0, budget, [], 0)


def _prune(subs: list[Experiment]) -> list[Experiment]:
    """Keep experiments not dominated by a more general and no larger one."""
    subs = sorted(subs, key=lambda e: (e.s_bis, -len(atoms_all(e.point.flat()))))
    kept: list[Experiment] = []
    buckets: dict = {}
    for e in subs:
        f = e.point.flat()
        if any(instance_of(f, q.point.flat()) for q in kept if len(q.result) == len(e.result)):
            continue
        kept.append(e)
        buckets.setdefault(shape_key(f), []).append(e)
    return sorted(kept, key=lambda e: e.s_bis)


class BudgetExhausted(RuntimeError):
    """The enumeration examined more partial experiments than ``Budget.work_limit``."""


class _Gen:
    def __init__(self, mode: str, budget: Budget):
        if mode not in ("sm", "smbis"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.budget = budget
        self.fresh = Fresh("g")
        self.work = 0

    def tick(self) -> None:
        self.work += 1
        if self.budget.work_limit is not None and self.work > self.budget.work_limit:
            raise BudgetExhausted(f"more than {self.budget.work_limit} partial experiments")

    def rename(self, e: Experiment) -> Experiment:
        names = atoms_all(e.result) | atoms_all(e.w)
        return e.substitute({a: (ATOM, POS, self.fresh()) for a in sorted(names)})

    def template(self, cand: tuple) -> tuple:
        names = atoms_all(cand)
        sigma = {a: (ATOM, POS, self.fresh()) for a in sorted(names)}
        return tuple(sorted(apply_all(sigma, cand)))

    def experiments(self, g: Net, bound: int) -> Iterator[Experiment]:
        """Most general experiments of ``g`` with s′ ≤ bound.

        Weakenings and boxes are chosen one at a time; each cut is unified as
        soon as every choice its premises depend on has been made.
        """
        base = _logical_count(g)
        weak = [l for l in g.links if l.kind is LinkKind.WHY and not l.premises]
        bangs = [l for l in g.links if l.kind is LinkKind.BANG]
        lo = 0 if self.mode == "sm" else 1
        floor = {b.id: _min_cost(g.box(b).net, self.mode) for b in bangs}
        min_rest = base + lo * sum(floor.values())
        if min_rest > bound:
            return
        sources = weak + bangs
        reserve = [lo * sum(floor[b.id] for b in sources[i:] if b.kind is LinkKind.BANG) for i in range(len(sources) + 1)]
        subs = {}
        for b in bangs:
            room = bound - min_rest + (floor[b.id] if lo else 0)
            subs[b.id] = _prune(list(self.experiments(g.box(b).net, room))) if room > 0 else []
            if lo and not subs[b.id]:
                return

        fixed: dict = {}
        for l in g.links:
            if l.kind is LinkKind.AX:
                a = self.fresh()
                fixed[l.conclusions[0]] = (ATOM, POS, a)
                fixed[l.conclusions[1]] = (ATOM, NEG, a)
            elif l.kind is LinkKind.ONE:
                fixed[l.main] = star(POS)
            elif l.kind is LinkKind.BOT:
                fixed[l.main] = star(NEG)

        index = {l.id: i for i, l in enumerate(sources)}
        cuts = [l for l in g.links if l.kind is LinkKind.CUT]
        ready: dict = {}
        for c in cuts:
            d = max((index[x] for p in c.premises for x in _deps(g, p)), default=-1)
            ready.setdefault(d, []).append(c)
        cands = [()] if self.mode == "sm" else list(self.budget.weakening_candidates)
        hi = self.budget.max_copies_per_box

        def labeller(assign: dict):
            labels = dict(fixed)
            labels.update(assign)

            def lab(e):
                v = labels.get(e)
                if v is not None:
                    return v
                link, _ = g.source[e]
                k = link.kind
                if k is LinkKind.TENSOR or k is LinkKind.PAR:
                    v = pair(POS if k is LinkKind.TENSOR else NEG, lab(link.premises[0]), lab(link.premises[1]))
                elif k is LinkKind.FLAT:
                    v = bag(NEG, (lab(link.premises[0]),))
                else:  # why with premises
                    v = bag(NEG, msum(*(lab(p)[2] for p in link.premises)))
                labels[e] = v
                return v

            return labels, lab

        def check(i, assign, sigma):
            todo = ready.get(i, ())
            if not todo:
                yield sigma
                return
            _, lab = labeller(assign)
            left = [lab(c.premises[0]) for c in todo]
            right = [dual(lab(c.premises[1])) for c in todo]
            yield from unify_all(left, right, sigma, self.tick)

        def go(i, assign, boxes, wsum, s, left, sigma):
            self.tick()
            if i == len(sources):
                labels, lab = labeller(assign)
                for e in g.edges:
                    lab(e)
                result = tuple(labels[c] for c in g.conclusions)
                raw = Experiment(self.mode, g, labels, dict(boxes), result, tuple(sorted(wsum)), s)
                yield raw.substitute(sigma)
                return
            src = sources[i]
            room = left - reserve[i + 1]
            if src.kind is LinkKind.WHY:
                for cand in cands:
                    cost = 2 * len(cand)
                    if cost > room:
                        continue
                    items = self.template(cand)
                    a2 = {**assign, src.main: bag(NEG, items)}
                    for s2 in check(i, a2, sigma):
                        yield from go(i + 1, a2, boxes, wsum + list(items), s, left - cost, s2)
                return
            box = g.box(src)
            idx = {c: j for j, c in enumerate(box.net.conclusions)}
            for ms in _multisets(subs[src.id], lo, hi, room):
                copies = tuple(self.rename(e) for e in ms)
                a2 = dict(assign)
                a2[src.main] = bag(POS, (e.result[idx[box.main]] for e in copies))
                for aux in src.aux:
                    j = idx[box.inner[aux]]
                    a2[aux] = bag(NEG, msum(*(e.result[j][2] for e in copies)))
                cost = sum(e.s_bis for e in copies)
                w2 = wsum + [x for e in copies for x in e.w]
                s2 = s + sum(e.s for e in copies)
                for sig in check(i, a2, sigma):
                    yield from go(i + 1, a2, {**boxes, src.id: copies}, w2, s2, left - cost, sig)

        seen = set()
        for sigma in check(-1, {}, {}):
            for e in go(0, {}, {}, [], base, bound - base, sigma):
                key = (e.result, e.w, e.s)
                if key not in seen:
                    seen.add(key)
                    yield e


def _deps(g: Net, edge: str) -> set:
    """Weakening and ! links of ``g`` whose choice determines the label of ``edge``."""
    link, _ = g.source[edge]
    k = link.kind
    if k is LinkKind.BANG or (k is LinkKind.WHY and not link.premises):
        return {link.id}
    out = set()
    for p in link.premises:
        out |= _deps(g, p)
    return out


def _min_cost(g: Net, mode: str) -> int:
    """Least s′ of an experiment of ``g``, ignoring cut equations."""
    base = _logical_count(g)
    if mode == "sm":
        return base
    return base + sum(_min_cost(b.net, mode) for b in g.boxes.values())


def enumerate_experiments(
    n: Net, mode: str = "smbis", atomic: bool = True, budget: Budget = Budget()
) -> Iterator[Experiment]:
    """Most general experiments of ``n`` within the budget.

    Every experiment within the budget is an instance (by a substitution on
    atoms) of an emitted experiment, or of one with the same copies and no
    larger size.  With ``atomic=False`` the stream is also closed under the
    substitutions sending atoms to ``budget.substitution_candidates``.
    """
    gen = _Gen(mode, budget)
    for e in gen.experiments(n, budget.max_total_sbis):
        yield e
        if not atomic:
            yield from _instances(e, budget.substitution_candidates)


def _instances(e: Experiment, cands: tuple) -> Iterator[Experiment]:
    names = sorted(atoms_all(e.result) | atoms_all(e.w))
    for choice in itertools.product((None,) + tuple(cands), repeat=len(names)):
        sigma = {a: v for a, v in zip(names, choice) if v is not None}
        if sigma:
            yield e.substitute(sigma)


def interpretation(n: Net, mode: str = "smbis", budget: Budget = Budget()) -> list[InterpPoint]:
    """Most general points of the budgeted slice of ⟦n⟧ (``sm``) or ⟦n⟧′ (``smbis``)."""
    return most_general(e.point for e in enumerate_experiments(n, mode, True, budget))


def sm_results(n: Net, budget: Budget = Budget()) -> list[tuple]:
    return [p.result for p in interpretation(n, "sm", budget)]


def min_experiments(n: Net, budget: Budget = Budget()) -> tuple[int, list[Experiment]] | None:
    """Experiments of least s′, by iterative deepening on the s′ bound."""
    bound = max(4, _min_cost(n, "smbis"))
    limit = budget.cap
    while True:
        b = budget.with_(max_total_sbis=bound)
        try:
            found = list(enumerate_experiments(n, "smbis", True, b))
        except BudgetExhausted:
            return None
        if found:
            low = min(e.s_bis for e in found)
            return low, [e for e in found if e.s_bis == low]
        if bound >= limit:
            return None
        bound = min(2 * bound, limit)


# -- special experiments and the equivalence ----------------------------------------------


def one_experiment(n: Net) -> Experiment:
    """The w-sparing 1-experiment labelling axioms with (+,∗) and (−,∗)."""
    if not is_ne_normal(n):
        raise ValueError("net has a non-erasing cut")
    return _one(n)


def _one(g: Net) -> Experiment:
    labels: dict = {}
    boxes = {}
    s = _logical_count(g)
    wsum: list = []
    cut_of = {}
    for l in g.links:
        if l.kind is LinkKind.CUT:
            a, b = l.premises
            cut_of[a], cut_of[b] = b, a
    for l in g.links:
        k = l.kind
        if k is LinkKind.AX:
            labels[l.conclusions[0]] = star(POS)
            labels[l.conclusions[1]] = star(NEG)
        elif k is LinkKind.ONE:
            labels[l.main] = star(POS)
        elif k is LinkKind.BOT:
            labels[l.main] = star(NEG)
        elif k is LinkKind.BANG:
            box = g.box(l)
            sub = _one(box.net)
            boxes[l.id] = (sub,)
            s += sub.s
            wsum.extend(sub.w)
            idx = {c: i for i, c in enumerate(box.net.conclusions)}
            labels[l.main] = bag(POS, (sub.result[idx[box.main]],))
            for aux in l.aux:
                labels[aux] = bag(NEG, sub.result[idx[box.inner[aux]]][2])

    def lab(e):
        if e in labels:
            return labels[e]
        link, _ = g.source[e]
        k = link.kind
        if k is LinkKind.TENSOR or k is LinkKind.PAR:
            v = pair(POS if k is LinkKind.TENSOR else NEG, lab(link.premises[0]), lab(link.premises[1]))
        elif k is LinkKind.FLAT:
            v = bag(NEG, (lab(link.premises[0]),))
        elif link.premises:
            v = bag(NEG, msum(*(lab(p)[2] for p in link.premises)))
        elif e in cut_of:
            v = dual(lab(cut_of[e]))
            wsum.extend(v[2])
        else:
            v = bag(NEG)
        labels[e] = v
        return v

    for e in g.edges:
        lab(e)
    result = tuple(labels[c] for c in g.conclusions)
    return Experiment("smbis", g, labels, boxes, result, tuple(sorted(wsum)), s)


def experiments_equivalent(e: Experiment, e2: Experiment) -> bool:
    """Same weakening cardinalities and, recursively, same box multiplicities."""
    if e.mode != "smbis" or e2.mode != "smbis":
        raise ValueError("equivalence is defined on smbis experiments")
    if e.net is not e2.net and e.net != e2.net:
        return False
    g = e.net
    l1, l2 = e.labels, e2.labels
    for l in g.links:
        if l.kind is LinkKind.WHY and not l.premises:
            if len(l1[l.main][2]) != len(l2[l.main][2]):
                return False
    b1, b2 = e.boxes, e2.boxes
    for bid in b1:
        if not _matchable(list(b1[bid]), list(b2[bid])):
            return False
    return True


def _matchable(xs: list, ys: list) -> bool:
    if len(xs) != len(ys):
        return False
    if not xs:
        return True
    head, rest = xs[0], xs[1:]
    for j, y in enumerate(ys):
        if experiments_equivalent(head, y) and _matchable(rest, ys[:j] + ys[j + 1 :]):
            return True
    return False


# -- from ⟦·⟧ to ⟦·⟧′ ---------------------------------------------------------------------


def _F(x, fresh: Fresh, cands) -> list[tuple]:
    tag = x[0]
    if tag == PAIR:
        return [
            (pair(x[1], y, z), msum(w1, w2))
            for (y, w1), (z, w2) in itertools.product(_F(x[2], fresh, cands), _F(x[3], fresh, cands))
        ]
    if tag == BAG:
        if not x[2]:
            if x[1] == POS:
                raise ValueError("point is not exhaustive")
            out = []
            for c in cands:
                names = atoms_all(c)
                sigma = {a: (ATOM, POS, fresh()) for a in sorted(names)}
                a = tuple(sorted(apply_all(sigma, c)))
                out.append((bag(NEG, a), a))
            return out
        parts = [_F(y, fresh, cands) for y in x[2]]
        return [
            (bag(x[1], (y for y, _ in combo)), msum(*(w for _, w in combo)))
            for combo in itertools.product(*parts)
        ]
    return [(x, ())]


def expand_F(x, budget: Budget = Budget()) -> set[InterpPoint]:
    """The map F on an exhaustive point or vector, its empty-bag clause
    restricted to ``budget.weakening_candidates``."""
    fresh = Fresh("f")
    vec = (x,) if x and isinstance(x[0], int) else tuple(x)
    parts = [_F(y, fresh, budget.weakening_candidates) for y in vec]
    out = set()
    for combo in itertools.product(*parts):
        out.add(InterpPoint(tuple(y for y, _ in combo), msum(*(w for _, w in combo))))
    return out


def atomic_part(E: Iterable[tuple]) -> set[tuple]:
    """Elements reached from other elements only through atom-to-atom substitutions."""
    E = [tuple(r) for r in E]
    out = set()
    for r in E:
        ok = True
        for r2 in E:
            r2 = _rename_apart(r2, atoms_all(r))
            if len(r2) != len(r):
                continue
            for sigma in match_all(r2, r):
                if any(v[0] != ATOM for v in sigma.values()):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.add(r)
    return out


def _rename_apart(xs: tuple, avoid: frozenset) -> tuple:
    names = atoms_all(xs)
    if not names & avoid:
        return xs
    fresh = Fresh("r~")
    sigma = {}
    for a in sorted(names):
        name = fresh()
        while name in avoid:
            name = fresh()
        sigma[a] = (ATOM, POS, name)
    return apply_all(sigma, xs)


def smbis_from_sm(E: Iterable[tuple], budget: Budget = Budget()) -> list[InterpPoint]:
    """⟦π⟧′ of a cut-free net from (a slice of) ⟦π⟧."""
    out = set()
    for r in atomic_part(E):
        if all(exhaustive(x) for x in r):
            out |= expand_F(r, budget)
    closed = set(out)
    if budget.substitution_candidates:
        for p in out:
            names = sorted(atoms_all(p.flat()))
            for choice in itertools.product((None,) + tuple(budget.substitution_candidates), repeat=len(names)):
                sigma = {a: v for a, v in zip(names, choice) if v is not None}
                if sigma:
                    closed.add(from_flat(apply_all(sigma, p.flat())))
    return most_general(closed)


# -- composition ----------------------------------------------------------------------------


def compose_interpretations(I: Iterable[InterpPoint], I2: Iterable[InterpPoint], c: int, c2: int) -> list[InterpPoint]:
    """Points of the net cutting conclusion ``c`` of one side against ``c2`` of the other."""
    I, I2 = list(I), list(I2)
    avoid = atoms_all(itertools.chain.from_iterable(p.flat() for p in I))
    out = []
    for q in I2:
        qf = _rename_apart(q.flat(), avoid)
        q = from_flat(qf)
        for p in I:
            for sigma in unify_dual_all(p.result[c], q.result[c2]):
                rest = p.result[:c] + p.result[c + 1 :] + q.result[:c2] + q.result[c2 + 1 :]
                out.append(InterpPoint(apply_all(sigma, rest), apply_all(sigma, p.w + q.w)))
    return most_general(out)


def sbis_inf(I: Iterable[InterpPoint]) -> float:
    return min((p.s_bis for p in I), default=math.inf)
