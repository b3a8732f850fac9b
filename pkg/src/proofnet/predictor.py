"""Strong normalization and exact reduction lengths read off interpretations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .net import Box, Link, LinkKind, Net, all_edges, count_cuts, is_ne_normal, net_size, rename_edges
from .points import InterpPoint, apply_all, atoms_all, from_flat, show, show_interp, unify_dual_all
from .rewrite import DEFAULT_FUEL, normalize
from .semantics import (
    Budget,
    Experiment,
    _rename_apart,
    compose_interpretations,
    enumerate_experiments,
    interpretation,
    min_experiments,
    sbis_inf,
)


class PredictionError(RuntimeError):
    """An internal inconsistency between the semantic and syntactic sides."""


@dataclass
class Prediction:
    status: str  # "SN", "NotSN_within_budget" or "Inconclusive"
    predicted_strong: int | None = None
    nonerasing_part: int | None = None
    erasing_part: int | None = None
    witness: tuple | None = None  # (point, point, substitution)
    budget_used: Budget = field(default_factory=Budget)
    sinf: int | None = None
    log: list = field(default_factory=list)

    def to_json(self) -> dict:
        w = None
        if self.witness is not None:
            p, q, sigma = self.witness
            w = {
                "left": show_interp(p),
                "right": show_interp(q),
                "sigma": {a: show(v) for a, v in sorted(sigma.items())},
            }
        return {
            "status": self.status,
            "predicted_strong": self.predicted_strong,
            "nonerasing_part": self.nonerasing_part,
            "erasing_part": self.erasing_part,
            "witness": w,
            "budget": self.budget_used.to_json(),
        }


# -- building the cut net ------------------------------------------------------------------


def cut_nets(a: Net, b: Net, c: str, c2: str) -> Net:
    """Cut conclusion ``c`` of ``a`` against ``c2`` of ``b``, renaming clashing edges of ``b``."""
    if c not in a.conclusions or c2 not in b.conclusions:
        raise ValueError("cut edges must be conclusions of their nets")
    if a.is_structural(c) or b.is_structural(c2):
        raise ValueError("cut edges must be logical")
    used = all_edges(a)
    taken = used | all_edges(b)
    ren = {}
    for e in sorted(all_edges(b)):
        if e in used:
            i = 1
            while f"{e}'{i}" in taken:
                i += 1
            ren[e] = f"{e}'{i}"
            taken.add(ren[e])
    b = rename_edges(b, lambda e: ren.get(e, e))
    c2 = ren.get(c2, c2)
    cut = Link(LinkKind.CUT, (c, c2))
    concl = tuple(x for x in a.conclusions if x != c) + tuple(x for x in b.conclusions if x != c2)
    return Net(a.links + b.links + (cut,), concl, {**a.boxes, **b.boxes})


# -- the pairwise analyses -------------------------------------------------------------------


def _apart(I: list[InterpPoint], I2: list[InterpPoint]) -> list[InterpPoint]:
    avoid = atoms_all(x for p in I for x in p.flat())
    return [from_flat(_rename_apart(q.flat(), avoid)) for q in I2]


def semantic_sn_check(I, I2, c: int, c2: int) -> tuple[str, tuple | None]:
    """``("SN", (p, q, σ))`` when some pair of points meets on the cut, else ``("NotFound", None)``."""
    I = sorted(I, key=show_interp)
    I2 = _apart(I, sorted(I2, key=show_interp))
    for p in I:
        for q in I2:
            for sigma in unify_dual_all(p.result[c], q.result[c2]):
                return "SN", (p, q, sigma)
    return "NotFound", None


def _pairs(I, I2, c: int, c2: int, sinf: int):
    """Best (value, erasing, witness) over meeting pairs, or None."""
    I = list(I)
    I2 = _apart(I, list(I2))
    best = None
    for p in I:
        for q in I2:
            sigma = next(unify_dual_all(p.result[c], q.result[c2]), None)
            if sigma is None:
                continue
            # non-minimal pairs may give an odd numerator, the minimum may not
            num = p.key + q.key - sinf
            cand = (num, show_interp(p) + show_interp(q), len(p.w) + len(q.w), (p, q, sigma))
            if best is None or cand[:2] < best[:2]:
                best = cand
    if best is None:
        return None
    num = best[0]
    if num % 2:
        p, q, _ = best[3]
        raise PredictionError(f"odd numerator {num} for {show_interp(p)} / {show_interp(q)}")
    return num // 2, best[2], best[3]


def predict_strong_length(I, I2, c: int, c2: int, sinf: int) -> int | None:
    """min over meeting pairs of (s′(z,W) + s′(z′,W′) − sinf)/2 − s(W + W′)."""
    best = _pairs(I, I2, c, c2, sinf)
    return None if best is None else best[0]


def _syntactic_sinf(n: Net, fuel: int) -> int | None:
    trace, status = normalize(n, "nonerasing", fuel)
    if status not in ("normal", "ne_normal"):
        return None
    end = trace.end
    if not end.is_proper:
        return None
    return net_size(end)


def predict(a: Net, b: Net, c: str, c2: str, budget: Budget = Budget(), fuel: int = DEFAULT_FUEL) -> Prediction:
    """Strong reduction length of the net cutting ``c`` of ``a`` against ``c2`` of ``b``.

    Both nets must be cut-free.  The enumeration bound is doubled until the
    minimum is certified or the cap is reached.  A point of key k is reached by
    an experiment of size s′ ≤ k, so a bound L covers every point of key ≤ L.
    """
    if count_cuts(a) or count_cuts(b):
        raise ValueError("predict needs cut-free nets")
    i, i2 = a.conclusions.index(c), b.conclusions.index(c2)
    syn = _syntactic_sinf(cut_nets(a, b, c, c2), fuel)
    sa, sb = net_size(a), net_size(b)
    bound = max(8, sa, sb)
    log = []
    while True:
        used = budget.with_(max_total_sbis=bound, max_copies_per_box=None)
        I = interpretation(a, "smbis", used)
        I2 = interpretation(b, "smbis", used)
        sem = sbis_inf(compose_interpretations(I, I2, i, i2))
        if syn is not None and sem < syn:
            raise PredictionError(f"semantic sinf {sem} below syntactic {syn}")
        sinf = syn if syn is not None else sem
        best = _pairs(I, I2, i, i2, sinf) if sinf != math.inf else None
        last = bound >= budget.cap
        if best is not None:
            value, erasing, witness = best
            need = 2 * value + sinf - 1
            certified = bound >= need - sb and bound >= need - sa and sem == sinf
            if certified or last:
                return Prediction(
                    "SN" if certified else "Inconclusive",
                    value if certified else None,
                    value - erasing if certified else None,
                    erasing if certified else None,
                    witness,
                    used,
                    sinf,
                    log,
                )
        elif last:
            return Prediction("NotSN_within_budget", budget_used=used, log=log)
        bound = min(2 * bound, budget.cap)
        log.append(f"bound raised to {bound}")


# -- single-net analyses ------------------------------------------------------------------------


def min_sbis_experiment(n: Net, budget: Budget = Budget()) -> Experiment | None:
    """An experiment of least s′ (then least s), searched up to ``budget.cap``."""
    found = min_experiments(n, budget.with_(max_copies_per_box=None))
    if found is None:
        return None
    _, exps = found
    return min(exps, key=lambda e: (e.s, show_interp(e.point)))


def nonerasing_length_from_semantics(n: Net, budget: Budget = Budget()) -> int | None:
    """(s(e₀) − s′_inf(⟦n⟧′))/2 for a minimal experiment e₀."""
    e0 = min_sbis_experiment(n, budget)
    if e0 is None:
        return None
    bound = max(budget.max_total_sbis, e0.s_bis)
    sinf = sbis_inf(interpretation(n, "smbis", budget.with_(max_total_sbis=bound, max_copies_per_box=None)))
    num = e0.s - sinf
    if num % 2 or num < 0:
        raise PredictionError(f"bad numerator {num}")
    return num // 2


def erasing_cut_count(n: Net, budget: Budget = Budget()) -> int:
    """|W(e₀)| for a minimal experiment of a net without non-erasing cuts."""
    if not is_ne_normal(n):
        raise ValueError("net has a non-erasing cut")
    e0 = min_sbis_experiment(n, budget)
    if e0 is None:
        raise PredictionError("no experiment found for a net without non-erasing cuts")
    return len(e0.w)
