"""Points of the relational domain, substitutions and unification.

A point is a plain tuple whose first component is a tag, so that points are
hashable and totally ordered:

    (ATOM, p, name)   polarized atom
    (STAR, p)         (p, *)
    (PAIR, p, x, y)   (p, x, y)
    (BAG,  p, items)  (p, [items]) with ``items`` a sorted tuple

Polarities are ``+1`` and ``-1``.  Atoms double as unification variables:
a substitution maps an atom name ``a`` to the point taken by ``(+, a)``, and
``(-, a)`` is sent to the dual of that point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

ATOM, STAR, PAIR, BAG = 0, 1, 2, 3
POS, NEG = 1, -1

Point = tuple


def atom(p: int, name: str) -> Point:
    return (ATOM, p, name)


def star(p: int) -> Point:
    return (STAR, p)


def pair(p: int, x: Point, y: Point) -> Point:
    return (PAIR, p, x, y)


def bag(p: int, items: Iterable[Point] = ()) -> Point:
    return (BAG, p, tuple(sorted(items)))


def msum(*bags: Iterable[Point]) -> tuple:
    """Sum of multisets given as iterables, as a sorted tuple."""
    return tuple(sorted(itertools.chain.from_iterable(bags)))


@lru_cache(maxsize=None)
def dual(x: Point) -> Point:
    tag, p = x[0], -x[1]
    if tag == ATOM:
        return (ATOM, p, x[2])
    if tag == STAR:
        return (STAR, p)
    if tag == PAIR:
        return (PAIR, p, dual(x[2]), dual(x[3]))
    return (BAG, p, tuple(sorted(dual(y) for y in x[2])))


@lru_cache(maxsize=None)
def size(x: Point) -> int:
    """Number of polarity occurrences."""
    tag = x[0]
    if tag == PAIR:
        return 1 + size(x[2]) + size(x[3])
    if tag == BAG:
        return 1 + sum(size(y) for y in x[2])
    return 1


def size_all(xs: Iterable[Point]) -> int:
    return sum(size(x) for x in xs)


@lru_cache(maxsize=None)
def rank(x: Point) -> int:
    tag = x[0]
    if tag == PAIR:
        return 1 + max(rank(x[2]), rank(x[3]))
    if tag == BAG:
        return 1 + max((rank(y) for y in x[2]), default=0)
    return 0


@lru_cache(maxsize=None)
def exhaustive(x: Point) -> bool:
    tag = x[0]
    if tag == PAIR:
        return exhaustive(x[2]) and exhaustive(x[3])
    if tag == BAG:
        if x[1] == POS and not x[2]:
            return False
        return all(exhaustive(y) for y in x[2])
    return True


@lru_cache(maxsize=None)
def atoms(x: Point) -> frozenset:
    tag = x[0]
    if tag == ATOM:
        return frozenset((x[2],))
    if tag == PAIR:
        return atoms(x[2]) | atoms(x[3])
    if tag == BAG:
        return frozenset().union(*(atoms(y) for y in x[2]))
    return frozenset()


def atoms_all(xs: Iterable[Point]) -> frozenset:
    return frozenset().union(*(atoms(x) for x in xs))


def atom_occurrences(xs: Iterable[Point]) -> list[str]:
    """Atom names in left-to-right order of first occurrence."""
    out: dict[str, None] = {}

    def go(x):
        tag = x[0]
        if tag == ATOM:
            out.setdefault(x[2])
        elif tag == PAIR:
            go(x[2])
            go(x[3])
        elif tag == BAG:
            for y in x[2]:
                go(y)

    for x in xs:
        go(x)
    return list(out)


# -- substitutions ---------------------------------------------------------------


def apply(sigma: dict, x: Point) -> Point:
    if not sigma:
        return x
    tag = x[0]
    if tag == ATOM:
        v = sigma.get(x[2])
        if v is None:
            return x
        return v if x[1] == POS else dual(v)
    if tag == STAR:
        return x
    if tag == PAIR:
        return (PAIR, x[1], apply(sigma, x[2]), apply(sigma, x[3]))
    return (BAG, x[1], tuple(sorted(apply(sigma, y) for y in x[2])))


def apply_all(sigma: dict, xs: Iterable[Point]) -> tuple:
    return tuple(apply(sigma, x) for x in xs)


def renaming(names: Iterable[str], fresh) -> dict:
    """Substitution sending each name to a fresh positive atom."""
    return {a: (ATOM, POS, fresh()) for a in names}


class Fresh:
    """Deterministic supply of atom names ``prefix1, prefix2, ...``."""

    def __init__(self, prefix: str = "g"):
        self.prefix = prefix
        self.n = 0

    def __call__(self) -> str:
        self.n += 1
        return f"{self.prefix}{self.n}"


# -- unification -------------------------------------------------------------------


def _bind(sigma: dict, x: Point, t: Point, rigid: frozenset):
    name = x[2]
    if name in rigid:
        return None
    v = t if x[1] == POS else dual(t)
    if name in atoms(v):
        return None
    step = {name: v}
    out = {k: apply(step, w) for k, w in sigma.items()}
    out[name] = v
    return out


def _solve(pairs: list, sigma: dict, rigid: frozenset, tick=None) -> Iterator[dict]:
    if tick is not None:
        tick()
    while pairs:
        x, y = pairs[-1]
        pairs = pairs[:-1]
        x, y = apply(sigma, x), apply(sigma, y)
        if x == y:
            continue
        if x[0] == ATOM and x[2] not in rigid:
            s = _bind(sigma, x, y, rigid)
        elif y[0] == ATOM and y[2] not in rigid:
            s = _bind(sigma, y, x, rigid)
        else:
            s = None
            if x[0] != y[0] or x[1] != y[1]:
                return
            if x[0] == PAIR:
                pairs = pairs + [(x[3], y[3]), (x[2], y[2])]
                continue
            if x[0] != BAG or len(x[2]) != len(y[2]):
                return
            xs, ys = list(x[2]), list(y[2])
            for item in x[2]:
                if item in ys:
                    ys.remove(item)
                    xs.remove(item)
            if not xs:
                continue
            p = x[1]
            head, rest = xs[0], xs[1:]
            tried = set()
            for j, cand in enumerate(ys):
                if cand in tried or not _compatible(head, cand, rigid):
                    continue
                tried.add(cand)
                others = ys[:j] + ys[j + 1 :]
                more = [(bag(p, rest), bag(p, others)), (head, cand)] if rest else [(head, cand)]
                yield from _solve(pairs + more, sigma, rigid, tick)
            return
        if s is None:
            return
        sigma = s
    yield sigma


def _compatible(x: Point, y: Point, rigid: frozenset) -> bool:
    if (x[0] == ATOM and x[2] not in rigid) or (y[0] == ATOM and y[2] not in rigid):
        return True
    return x[0] == y[0] and x[1] == y[1]


def unify_all(xs: Iterable[Point], ys: Iterable[Point], sigma: dict | None = None, tick=None) -> Iterator[dict]:
    """Unifiers of two point sequences; bags are unified up to permutation.

    The stream covers every unifier up to instantiation, possibly with
    repetitions.  ``tick`` is called once per search branch.
    """
    pairs = list(zip(xs, ys))
    yield from _solve(pairs[::-1], dict(sigma or {}), frozenset(), tick)


def unify(x: Point, y: Point) -> dict | None:
    return next(unify_all((x,), (y,)), None)


def unify_dual(x: Point, y: Point) -> dict | None:
    """A substitution with ``σ(x) = σ(y)⊥``, or None.

    >>> unify_dual(star(POS), star(NEG))
    {}
    """
    return unify(x, dual(y))


def unify_dual_all(x: Point, y: Point, sigma: dict | None = None) -> Iterator[dict]:
    return unify_all((x,), (dual(y),), sigma)


def match_all(pattern: Iterable[Point], target: Iterable[Point]) -> Iterator[dict]:
    """Substitutions σ with σ(pattern) = target (target atoms are constants).

    The two sides must not share atom names.
    """
    target = tuple(target)
    pairs = list(zip(pattern, target))
    yield from _solve(pairs[::-1], {}, atoms_all(target))


def _apart(xs: tuple, avoid: frozenset, tag: str = "~") -> tuple:
    names = atoms_all(xs)
    if not names & avoid:
        return xs
    sigma = {a: (ATOM, POS, f"{a}{tag}") for a in names}
    while any(v[2] in avoid for v in sigma.values()):
        sigma = {a: (ATOM, POS, v[2] + tag) for a, v in sigma.items()}
    return apply_all(sigma, xs)


def instance_of(specific: Iterable[Point], general: Iterable[Point]) -> bool:
    """True when some substitution maps ``general`` onto ``specific``."""
    specific, general = tuple(specific), tuple(general)
    if len(specific) != len(general):
        return False
    general = _apart(general, atoms_all(specific))
    return next(match_all(general, specific), None) is not None


def variant(x: Iterable[Point], y: Iterable[Point]) -> bool:
    """Equal up to a renaming of atoms (polarity flips included)."""
    x, y = tuple(x), tuple(y)
    return shape_key(x) == shape_key(y) and instance_of(x, y) and instance_of(y, x)


def _shape(x: Point) -> Point:
    tag = x[0]
    if tag == ATOM:
        return (ATOM, 0, "")
    if tag == PAIR:
        return (PAIR, x[1], _shape(x[2]), _shape(x[3]))
    if tag == BAG:
        return (BAG, x[1], tuple(sorted(_shape(y) for y in x[2])))
    return x


def shape_key(xs: Iterable[Point]) -> tuple:
    """Invariant under atom renaming; used to bucket candidates."""
    return tuple(_shape(x) for x in xs)


def canonical_names(xs: tuple, prefix: str = "a") -> tuple:
    """Rename atoms to ``a1, a2, ...`` by order of first occurrence."""
    names = atom_occurrences(xs)
    sigma = {n: (ATOM, POS, f"{prefix}{i}~") for i, n in enumerate(names, 1)}
    xs = apply_all(sigma, xs)
    sigma = {f"{prefix}{i}~": (ATOM, POS, f"{prefix}{i}") for i in range(1, len(names) + 1)}
    return apply_all(sigma, xs)


# -- interpretation points -----------------------------------------------------------


@dataclass(frozen=True, order=True)
class InterpPoint:
    """A result vector with its multiset of weakening labels."""

    result: tuple
    w: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(sorted(self.w)))

    @property
    def s(self) -> int:
        return size_all(self.result)

    @property
    def s_bis(self) -> int:
        return sbis_point_size(self)

    @property
    def key(self) -> int:
        """s(result) − s(W) + 2|W|, the quantity minimized by the length formula."""
        return size_all(self.result) - size_all(self.w) + 2 * len(self.w)

    def flat(self) -> tuple:
        # result and W as one sequence, with a separator bag of fixed shape
        return self.result + ((BAG, 0, self.w),)

    def __str__(self) -> str:
        return show_interp(self)


def from_flat(xs: tuple) -> InterpPoint:
    return InterpPoint(xs[:-1], xs[-1][2])


def point_size(x) -> int:
    """Size of a point, or of a vector or multiset of points (summed)."""
    if isinstance(x, InterpPoint):
        return x.s
    if x and isinstance(x, tuple) and isinstance(x[0], int):
        return size(x)
    return size_all(x)


def sbis_point_size(p: InterpPoint) -> int:
    return size_all(p.result) + sum(size(a) + 2 for a in p.w)


def apply_substitution(sigma: dict, x):
    """Apply σ to a point, a vector, or an :class:`InterpPoint`."""
    if isinstance(x, InterpPoint):
        return InterpPoint(apply_all(sigma, x.result), apply_all(sigma, x.w))
    if x and isinstance(x, tuple) and isinstance(x[0], int):
        return apply(sigma, x)
    return apply_all(sigma, x)


def canonical(p: InterpPoint) -> InterpPoint:
    return from_flat(canonical_names(p.flat()))


def most_general(points: Iterable[InterpPoint]) -> list[InterpPoint]:
    """Drop duplicates up to renaming and proper instances; canonical names."""
    pts = sorted(
        {canonical(p) for p in points},
        key=lambda p: (size_all(p.flat()), -len(atoms_all(p.flat())), p),
    )
    kept: list[InterpPoint] = []
    for p in pts:
        f = p.flat()
        if any(len(q.result) == len(p.result) and instance_of(f, q.flat()) for q in kept):
            continue
        kept.append(p)
    return sorted(kept)


def same_points(a: Iterable[InterpPoint], b: Iterable[InterpPoint]) -> bool:
    """Equality of two sets of points closed under substitution."""
    ma, mb = most_general(a), most_general(b)
    if len(ma) != len(mb):
        return False
    buckets: dict = {}
    for q in mb:
        buckets.setdefault(shape_key(q.flat()), []).append(q)
    for p in ma:
        cands = buckets.get(shape_key(p.flat()), [])
        if not any(variant(p.flat(), q.flat()) for q in cands):
            return False
    return True


def difference(a: Iterable[InterpPoint], b: Iterable[InterpPoint]) -> list[InterpPoint]:
    """Points of ``a`` that are not instances of any point of ``b``."""
    mb = most_general(b)
    return [p for p in most_general(a) if not any(instance_of(p.flat(), q.flat()) for q in mb)]


# -- text form ------------------------------------------------------------------------


def show(x: Point) -> str:
    s = "+" if x[1] == POS else "-"
    tag = x[0]
    if tag == ATOM:
        return f"({s} {x[2]})"
    if tag == STAR:
        return f"({s} *)"
    if tag == PAIR:
        return f"({s} (pair {show(x[2])} {show(x[3])}))"
    return f"({s} (bag{''.join(' ' + show(y) for y in x[2])}))"


def show_interp(p: InterpPoint) -> str:
    res = " ".join(show(x) for x in p.result)
    w = " ".join(show(x) for x in p.w)
    return f"(point (result {res}) (w {w}) (sbis {p.s_bis}))".replace("( ", "(").replace(" )", ")")


def _tokens(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _read(tokens: list[str], i: int):
    if tokens[i] != "(":
        return tokens[i], i + 1
    out = []
    i += 1
    while tokens[i] != ")":
        x, i = _read(tokens, i)
        out.append(x)
    return out, i + 1


def _to_point(t) -> Point:
    if not isinstance(t, list) or len(t) != 2 or t[0] not in "+-":
        raise ValueError(f"not a point: {t!r}")
    p = POS if t[0] == "+" else NEG
    body = t[1]
    if body == "*":
        return star(p)
    if isinstance(body, str):
        return atom(p, body)
    if body and body[0] == "pair" and len(body) == 3:
        return pair(p, _to_point(body[1]), _to_point(body[2]))
    if body and body[0] == "bag":
        return bag(p, (_to_point(y) for y in body[1:]))
    raise ValueError(f"not a point: {t!r}")


def parse_point(text: str) -> Point:
    """Read ``(+ *)``, ``(- a1)``, ``(+ (pair x y))`` or ``(- (bag x y))``."""
    t, i = _read(_tokens(text), 0)
    return _to_point(t)


def parse_interp(text: str) -> InterpPoint:
    t, _ = _read(_tokens(text), 0)
    if not isinstance(t, list) or not t or t[0] != "point":
        raise ValueError("expected (point ...)")
    parts = {x[0]: x[1:] for x in t[1:]}
    return InterpPoint(
        tuple(_to_point(x) for x in parts.get("result", [])),
        tuple(_to_point(x) for x in parts.get("w", [])),
    )
