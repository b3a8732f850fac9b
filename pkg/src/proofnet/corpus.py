"""The fixture corpus: hand-built nets and seeded random MELL-typed pairs.

Each fixture is a ``NAME.net`` file and a ``NAME.expected.json`` file.  Every
expected value is stored as ``{"value": ..., "basis": ...}`` where the basis
is ``literature`` (a value stated in the literature on these nets), ``derived``
(counted by hand on the net), ``trivial`` or ``oracle`` (frozen from the
exhaustive reduction search when the fixture was generated).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .mell import BOT, ONE, Formula, covar, fdual, ofc, par, show_formula, tensor, var, whynot
from .net import Box, Link, LinkKind, Net, parse_net, serialize
from .rewrite import strong_length

SEED = 20240515
PAIR_COUNT = 30


@dataclass
class Fixture:
    name: str
    net_text: str
    expected: dict
    tags: list = field(default_factory=list)
    pair: dict | None = None  # {"left", "right", "c", "c2"}
    types: dict | None = None  # edge -> formula text

    @property
    def net(self) -> Net:
        return parse_net(self.net_text)

    def value(self, key: str):
        return self.expected[key]["value"]

    def to_json(self) -> dict:
        out = {"name": self.name, "tags": self.tags, "expected": self.expected}
        if self.pair is not None:
            out["pair"] = self.pair
        if self.types is not None:
            out["types"] = self.types
        return out


def _v(value, basis: str) -> dict:
    return {"value": value, "basis": basis}


# -- hand-built nets ----------------------------------------------------------------------------

ONE_NET = "(net (concl c) (one c))"
BOT_NET = "(net (concl c) (bot c))"
AX_NET = "(net (concl a b) (ax a b))"

AX_CUT = "(net (concl c d) (ax c a) (ax b d) (cut a b))"

TENSOR_PAR = """(net (concl x2 y2 u2 v2)
  (ax x x2) (ax y y2) (tensor x y -> t)
  (ax u u2) (ax v v2) (par u v -> p)
  (cut t p))"""

ONE_BOT = "(net (concl) (one a) (bot b) (cut a b))"

CLASH_TENSOR_BOT = "(net (concl) (one x) (one y) (tensor x y -> t) (bot b) (cut t b))"

CLASH_BANG_TENSOR = """(net (concl)
  (bang -> m (aux) (box (net (concl x) (one x))) (map))
  (bot u) (bot v) (tensor u v -> t)
  (cut m t))"""

OKADA_BODY = """(cut m n)
  (why b1 b2 -> n)
  (flat m2 -> b2)
  (bang -> m2 (aux b1)
    (box (net (concl mc s1) (ax c1 mc) (flat c1 -> s1)))
    (map (b1 = s1)))
  (bang -> m (aux)
    (box (net (concl nb)
      (why x1 x2 -> nb)
      (flat mb -> x2)
      (bang -> mb (aux x1)
        (box (net (concl mcb s1b) (ax c1b mcb) (flat c1b -> s1b)))
        (map (x1 = s1b)))))
    (map))"""

OKADA = f"(net (concl)\n  {OKADA_BODY})"

FIG6 = f"""(net (concl e0)
  (one e0)
  (bang -> o (aux)
    (box (net (concl e)
      (one e)
      {OKADA_BODY}))
    (map))
  (why -> w0)
  (cut o w0))"""

ERASING_1 = """(net (concl)
  (bang -> m (aux) (box (net (concl x) (one x))) (map))
  (why -> w)
  (cut m w))"""

ERASING_2 = """(net (concl)
  (bang -> m (aux)
    (box (net (concl x)
      (one x)
      (bang -> m2 (aux) (box (net (concl y) (one y))) (map))
      (why -> w2)
      (cut m2 w2)))
    (map))
  (why -> w)
  (cut m w))"""

NE_AND_E = """(net (concl)
  (one a) (bot b) (cut a b)
  (bang -> m (aux) (box (net (concl x) (one x))) (map))
  (why -> w)
  (cut m w))"""

DERELICTION = """(net (concl)
  (bang -> m (aux) (box (net (concl x) (one x))) (map))
  (bot y) (flat y -> s) (why s -> w)
  (cut m w))"""

CONTRACTION = """(net (concl)
  (bang -> m (aux) (box (net (concl x) (one x))) (map))
  (bot y) (flat y -> s) (bot z) (flat z -> s2) (why s s2 -> w)
  (cut m w))"""

# a box with an auxiliary door, duplicated by a contraction
AUX_DUPLICATION = """(net (concl q)
  (bang -> m (aux a)
    (box (net (concl mx sx) (ax ix mx) (flat ix -> sx)))
    (map (a = sx)))
  (why a -> q)
  (ax y1 y2) (flat y1 -> s) (flat y2 -> s2) (why s s2 -> w)
  (cut m w))"""

EXAMPLE_POINTS = {
    "pi": "(point (result (- (bag (+ *) (+ *))) (+ (bag (- (bag (+ (bag (- *))))) (- (bag (+ (bag (- *)))))))) (w))",
    "pi1": "(point (result (- (bag (+ (bag (- (bag (+ *))))) (+ (bag (- (bag (+ *)))))))) (w (+ *)))",
    "inf": "(point (result (- (bag (+ *) (+ *)))) (w (+ *)))",
}


def _hand() -> list[Fixture]:
    SN = lambda k, basis="derived": _v({"status": "SN", "max_len": k}, basis)  # noqa: E731
    out = [
        Fixture("one", ONE_NET, {"sm": _v(["(+ *)"], "literature"), "strong": SN(0, "trivial"), "size": _v(1, "trivial")}, ["cut-free"]),
        Fixture("bot", BOT_NET, {"sm": _v(["(- *)"], "trivial"), "strong": SN(0, "trivial"), "size": _v(1, "trivial")}, ["cut-free"]),
        Fixture("ax", AX_NET, {"strong": SN(0, "trivial"), "size": _v(2, "trivial")}, ["cut-free"]),
        Fixture("ax-cut", AX_CUT, {"strong": SN(1), "size": _v(4, "trivial")}, ["cuts"]),
        Fixture("tensor-par", TENSOR_PAR, {"strong": SN(3)}, ["cuts"]),
        Fixture("one-bot", ONE_BOT, {"strong": SN(1), "size": _v(2, "trivial")}, ["cuts"]),
        Fixture("clash-tensor-bot", CLASH_TENSOR_BOT, {"strong": _v({"status": "NotSN", "witness": "clash"}, "trivial")}, ["clash"]),
        Fixture("clash-bang-tensor", CLASH_BANG_TENSOR, {"strong": _v({"status": "NotSN", "witness": "clash"}, "trivial")}, ["clash"]),
        Fixture(
            "okada",
            OKADA,
            {
                "strong": _v({"status": "NotSN", "witness": "cycle", "cycle_length": 2}, "literature"),
                "sm": _v([], "literature"),
            },
            ["not-sn"],
        ),
        Fixture(
            "fig6-pi-prime",
            FIG6,
            {
                "strong": _v({"status": "NotSN", "witness": "cycle"}, "literature"),
                "normal_form": _v(ONE_NET, "literature"),
                "sm": _v(["(+ *)"], "literature"),
            },
            ["not-sn", "wn"],
        ),
        Fixture("erasing-1", ERASING_1, {"strong": SN(1), "erasing_cuts": _v(1, "derived"), "size": _v(3, "derived")}, ["ne-normal"]),
        Fixture("erasing-2", ERASING_2, {"strong": SN(2), "erasing_cuts": _v(2, "derived"), "size": _v(6, "derived")}, ["ne-normal"]),
        Fixture("ne-and-e", NE_AND_E, {"strong": SN(2)}, ["cuts"]),
        Fixture("dereliction", DERELICTION, {"strong": SN(2)}, ["cuts"]),
        Fixture("contraction", CONTRACTION, {"strong": SN(3)}, ["cuts"]),
        Fixture("aux-duplication", AUX_DUPLICATION, {"strong": SN(3)}, ["cuts"]),
    ]
    return out


def _example() -> Fixture:
    """The worked example given as interpretation points only."""
    return Fixture(
        "example-arithmetic",
        "",
        {
            "points": _v(EXAMPLE_POINTS, "literature"),
            "sbis": _v({"pi": 10, "pi1": 10, "inf": 6}, "literature"),
            "strong": _v(6, "literature"),
        },
        ["arithmetic"],
    )


# -- random MELL-typed pairs -------------------------------------------------------------------


def random_formula(rng: random.Random, size: int = 4, bangs: int = 3) -> Formula:
    """A formula with at most ``size`` connectives and ``bangs`` nested exponentials."""
    if size <= 0:
        return rng.choice([var("X"), var("Y"), covar("X"), ONE, BOT])
    k = rng.random()
    if k < 0.4 and bangs > 0:
        f = ofc if rng.random() < 0.5 else whynot
        return f(random_formula(rng, size - 1, bangs - 1))
    left = rng.randint(0, size - 1)
    f = tensor if rng.random() < 0.5 else par
    return f(random_formula(rng, left, bangs), random_formula(rng, size - 1 - left, bangs))


class _Part:
    def __init__(self, main: str, links=(), boxes=None, extras=()):
        self.main = main
        self.links = list(links)
        self.boxes = dict(boxes or {})
        self.extras = list(extras)

    def absorb(self, other: "_Part") -> None:
        self.links += other.links
        self.boxes.update(other.boxes)
        self.extras += other.extras


class ProofBuilder:
    """Random cut-free typed nets with a given conclusion type.

    Atoms come from axioms, so every net also has the dual atoms among its
    conclusions.  ``?`` is proved by weakening, dereliction or a binary
    contraction; ``!`` boxes the proof of its body, closing the other
    conclusions with ``?`` links, or pulling existing ``?`` links out of the box.
    """

    def __init__(self, rng: random.Random, prefix: str):
        self.rng = rng
        self.prefix = prefix
        self.n = 0
        self.types: dict = {}

    def edge(self, ty: Formula | None = None) -> str:
        self.n += 1
        e = f"{self.prefix}{self.n}"
        if ty is not None:
            self.types[e] = ty
        return e

    def prove(self, f: Formula) -> _Part:
        h = f[0]
        rng = self.rng
        if h in ("var", "covar"):
            a, b = self.edge(f), self.edge(fdual(f))
            return _Part(a, [Link(LinkKind.AX, (), (a, b))], extras=[b])
        if h in ("one", "bot"):
            e = self.edge(f)
            return _Part(e, [Link(LinkKind.ONE if h == "one" else LinkKind.BOT, (), (e,))])
        if h in ("tensor", "par"):
            if h == "par" and f[2] == fdual(f[1]) and f[1][0] in ("var", "covar") and rng.random() < 0.5:
                a, b, p = self.edge(f[1]), self.edge(f[2]), self.edge(f)
                return _Part(p, [Link(LinkKind.AX, (), (a, b)), Link(LinkKind.PAR, (a, b), (p,))])
            pa, pb = self.prove(f[1]), self.prove(f[2])
            e = self.edge(f)
            kind = LinkKind.TENSOR if h == "tensor" else LinkKind.PAR
            out = _Part(e, [Link(kind, (pa.main, pb.main), (e,))])
            out.absorb(pa)
            out.absorb(pb)
            return out
        if h == "whynot":
            k = rng.random()
            arity = 0 if k < 0.3 else 1 if k < 0.8 else 2
            w = self.edge(f)
            out = _Part(w)
            structs = []
            for _ in range(arity):
                p = self.prove(f[1])
                s = self.edge()
                out.links.append(Link(LinkKind.FLAT, (p.main,), (s,)))
                structs.append(s)
                out.absorb(p)
            out.links.append(Link(LinkKind.WHY, tuple(structs), (w,)))
            return out
        return self.promote(f)

    def promote(self, f: Formula) -> _Part:
        inner = self.prove(f[1])
        links = list(inner.links)
        concl = [inner.main]
        outer_links = []
        mapping = []
        aux = []
        for e in inner.extras:
            ty = self.types[e]
            why = next((l for l in links if l.kind is LinkKind.WHY and l.main == e), None)
            if why is not None and self.rng.random() < 0.5:
                # pull the ? link out of the box
                links.remove(why)
                del self.types[e]
                structs = list(why.premises)
                ty_out = ty
            else:
                s = self.edge()
                links.append(Link(LinkKind.FLAT, (e,), (s,)))
                structs = [s]
                ty_out = whynot(ty)
            outs = []
            for s in structs:
                a = self.edge()
                concl.append(s)
                mapping.append((a, s))
                outs.append(a)
            aux += outs
            q = self.edge(ty_out)
            outer_links.append(Link(LinkKind.WHY, tuple(outs), (q,)))
        m = self.edge(f)
        bang = Link(LinkKind.BANG, (), (m, *aux))
        box = Box(Net(tuple(links), tuple(concl), inner.boxes), tuple(mapping))
        out = _Part(m, [bang] + outer_links, {bang.id: box})
        out.extras = [l.main for l in outer_links]
        return out

    def net(self, part: _Part) -> Net:
        return Net(tuple(part.links), (part.main, *part.extras), part.boxes)


def random_pair(rng: random.Random, size: int = 4):
    """Two cut-free typed nets with dual first conclusions, and their typings."""
    f = random_formula(rng, size)
    lb, rb = ProofBuilder(rng, "l"), ProofBuilder(rng, "r")
    left, right = lb.net(lb.prove(f)), rb.net(rb.prove(fdual(f)))
    return f, left, right, {**lb.types, **rb.types}


def _pairs(seed: int, count: int, max_states: int = 4000) -> list[Fixture]:
    from .predictor import cut_nets

    rng = random.Random(seed)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        f, left, right, types = random_pair(rng, rng.randint(2, 5))
        c, c2 = left.conclusions[0], right.conclusions[0]
        n = cut_nets(left, right, c, c2)
        res = strong_length(n, fuel=max_states)
        if res.status != "SN":
            # typed nets are strongly normalizing; an unfinished search only means too large
            continue
        i = len(out)
        out.append(
            Fixture(
                f"pair-{i:02d}",
                serialize(n),
                {"strong": _v({"status": "SN", "max_len": res.max_len}, "oracle")},
                ["pair", "typed"],
                pair={"left": serialize(left), "right": serialize(right), "c": c, "c2": c2, "formula": show_formula(f)},
                types={e: show_formula(t) for e, t in sorted(types.items())},
            )
        )
    return out


# -- building and loading -----------------------------------------------------------------------


def hand_pairs() -> list[Fixture]:
    """Hand-built cut-free pairs declared for comparison."""
    from .predictor import cut_nets

    specs = [
        ("hp-one-bot", ONE_NET, BOT_NET, "c", "c"),
        ("hp-ax-ax", AX_NET, AX_NET, "a", "b"),
        ("hp-bang-weakening", "(net (concl m) (bang -> m (aux) (box (net (concl x) (one x))) (map)))", "(net (concl c) (why -> c))", "m", "c"),
        ("hp-bang-dereliction", "(net (concl m) (bang -> m (aux) (box (net (concl x) (one x))) (map)))", "(net (concl c) (bot x) (flat x -> s) (why s -> c))", "m", "c"),
    ]
    out = []
    for name, a, b, c, c2 in specs:
        left, right = parse_net(a), parse_net(b)
        n = cut_nets(left, right, c, c2)
        res = strong_length(n)
        out.append(
            Fixture(
                name,
                serialize(n),
                {"strong": _v({"status": res.status, "max_len": res.max_len}, "oracle")},
                ["pair"],
                pair={"left": serialize(left), "right": serialize(right), "c": c, "c2": c2},
            )
        )
    return out


def build_corpus(out_dir: str | Path | None = None, seed: int = SEED, pairs: int = PAIR_COUNT) -> list[Fixture]:
    fixtures = _hand() + [_example()] + hand_pairs() + _pairs(seed, pairs)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for fx in fixtures:
            if fx.net_text:
                (out / f"{fx.name}.net").write_text(fx.net_text.rstrip() + "\n")
            meta = fx.to_json()
            if fx.name.startswith("pair-"):
                meta["seed"] = seed
            (out / f"{fx.name}.expected.json").write_text(json.dumps(meta, indent=2) + "\n")
    return fixtures


def load_corpus(directory: str | Path) -> list[Fixture]:
    d = Path(directory)
    out = []
    for meta_path in sorted(d.glob("*.expected.json")):
        meta = json.loads(meta_path.read_text())
        name = meta["name"]
        net_path = d / f"{name}.net"
        text = net_path.read_text() if net_path.exists() else ""
        out.append(Fixture(name, text, meta["expected"], meta.get("tags", []), meta.get("pair"), meta.get("types")))
    return out
