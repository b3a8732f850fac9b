import itertools
import math

import pytest

from proofnet import net_size, parse_net, reduce_cut
from proofnet.corpus import AX_NET, BOT_NET, EXAMPLE_POINTS, ONE_NET
from proofnet.net import LinkKind, classify_cuts, count_cuts, walk
from proofnet.points import (
    NEG,
    POS,
    InterpPoint,
    atom,
    bag,
    dual,
    exhaustive,
    instance_of,
    msum,
    pair,
    parse_interp,
    parse_point,
    same_points,
    size_all,
    star,
)
from proofnet.semantics import (
    Budget,
    _logical_count,
    atomic_part,
    compose_interpretations,
    enumerate_experiments,
    experiments_equivalent,
    expand_F,
    interpretation,
    one_experiment,
    sbis_inf,
    smbis_from_sm,
)

P = parse_point
WHY0 = "(net (concl c) (why -> c))"
STAR_CANDS = Budget(weakening_candidates=((), (star(POS),)))
BANG_ONE = "(net (concl m) (bang -> m (aux) (box (net (concl x) (one x))) (map)))"


def check_experiment(e):
    """Independent check of every local condition of an experiment; returns (result, W, s)."""
    g, lab = e.net, e.labels
    boxes = e.boxes
    w = []
    s = _logical_count(g)
    for l in g.links:
        k = l.kind
        if k is LinkKind.AX:
            assert lab[l.conclusions[0]] == dual(lab[l.conclusions[1]])
        elif k is LinkKind.CUT:
            assert lab[l.premises[0]] == dual(lab[l.premises[1]])
        elif k is LinkKind.ONE:
            assert lab[l.main] == star(POS)
        elif k is LinkKind.BOT:
            assert lab[l.main] == star(NEG)
        elif k in (LinkKind.TENSOR, LinkKind.PAR):
            pol = POS if k is LinkKind.TENSOR else NEG
            assert lab[l.main] == pair(pol, lab[l.premises[0]], lab[l.premises[1]])
        elif k is LinkKind.FLAT:
            assert lab[l.main] == bag(NEG, (lab[l.premises[0]],))
        elif k is LinkKind.WHY and l.premises:
            assert lab[l.main] == bag(NEG, msum(*(lab[p][2] for p in l.premises)))
        elif k is LinkKind.WHY:
            x = lab[l.main]
            assert x[0] == 3 and x[1] == NEG
            if e.mode == "sm":
                assert x[2] == ()
            w.extend(x[2])
        elif k is LinkKind.BANG:
            subs = boxes[l.id]
            assert len(subs) >= (1 if e.mode == "smbis" else 0)
            box = g.box(l)
            idx = {c: i for i, c in enumerate(box.net.conclusions)}
            for sub in subs:
                assert sub.net == box.net
                r, sw, ss = check_experiment(sub)
                assert r == sub.result and tuple(sorted(sw)) == sub.w and ss == sub.s
                w.extend(sub.w)
                s += sub.s
            assert lab[l.main] == bag(POS, (sub.result[idx[box.main]] for sub in subs))
            for aux in l.aux:
                j = idx[box.inner[aux]]
                assert lab[aux] == bag(NEG, msum(*(sub.result[j][2] for sub in subs)))
    for x in (lab[c] for c in g.edges if g.is_structural(c)):
        assert x[0] == 3 and x[1] == NEG
    result = tuple(lab[c] for c in g.conclusions)
    assert result == e.result
    assert tuple(sorted(w)) == e.w
    assert s == e.s
    return result, w, s


def _is_one_experiment(e):
    return all(len(subs) == 1 and all(_is_one_experiment(x) for x in subs) for subs in e.boxes.values())


# -- enumeration ---------------------------------------------------------------------------


def test_enumerate_one_sm():
    (e,) = enumerate_experiments(parse_net(ONE_NET), "sm")
    assert e.result == (star(POS),)


def test_enumerate_why0_sm():
    (e,) = enumerate_experiments(parse_net(WHY0), "sm")
    assert e.result == (bag(NEG),)


def test_enumerate_why0_smbis():
    es = list(enumerate_experiments(parse_net(WHY0), "smbis", budget=STAR_CANDS))
    assert sorted(e.w for e in es) == [(), (star(POS),)]
    for e in es:
        assert e.result == (bag(NEG, e.w),)


def test_enumerate_respects_copy_bound():
    es = list(enumerate_experiments(parse_net(BANG_ONE), "sm", budget=Budget(max_copies_per_box=3)))
    assert sorted(len(e.boxes["bang:m"]) for e in es) == [0, 1, 2, 3]
    es = list(enumerate_experiments(parse_net(BANG_ONE), "smbis", budget=Budget(max_copies_per_box=3)))
    assert sorted(len(e.boxes["bang:m"]) for e in es) == [1, 2, 3]


def test_enumerate_respects_size_bound():
    es = list(enumerate_experiments(parse_net(BANG_ONE), "smbis", budget=Budget(max_copies_per_box=None, max_total_sbis=5)))
    assert sorted(e.s_bis for e in es) == [2, 3, 4, 5]


def test_enumerate_unknown_mode():
    with pytest.raises(ValueError):
        list(enumerate_experiments(parse_net(ONE_NET), "xx"))


def test_enumerated_experiments_are_experiments(corpus):
    budget = Budget(max_total_sbis=14, max_copies_per_box=None)
    nets = [fx.net for fx in corpus if fx.net_text and "not-sn" not in fx.tags] + _cut_free_nets(corpus)
    count = 0
    for n in nets:
        if net_size(n) > 12:
            continue
        for mode in ("sm", "smbis"):
            for e in enumerate_experiments(n, mode, budget=budget):
                check_experiment(e)
                assert e.s_bis <= 14
                count += 1
    assert count > 100


def test_enumerate_with_cut_solves_equation():
    n = parse_net("(net (concl c d) (ax c a) (ax b d) (cut a b))")
    (e,) = enumerate_experiments(n, "smbis")
    check_experiment(e)
    x, y = e.result
    assert x == dual(y) and x[0] == 0


def test_non_atomic_stream_closes_under_candidates():
    budget = Budget(substitution_candidates=(star(POS),))
    es = list(enumerate_experiments(parse_net(AX_NET), "smbis", atomic=False, budget=budget))
    results = {e.result for e in es}
    assert (star(POS), star(NEG)) in results
    assert len(results) == 2


# -- one-experiments ---------------------------------------------------------------------------


def test_one_experiment_ax():
    e = one_experiment(parse_net(AX_NET))
    assert e.result == (star(POS), star(NEG))
    assert e.s == 2 and e.w == ()


def test_one_experiment_cut_free(corpus):
    for fx in corpus:
        if fx.pair:
            for side in ("left", "right"):
                n = parse_net(fx.pair[side])
                if any(l.kind is LinkKind.WHY and not l.premises for _, g in walk(n) for l in g.links):
                    continue
                e = one_experiment(n)
                check_experiment(e)
                assert e.s == net_size(n) and e.w == ()


def test_one_experiment_erasing(fixtures):
    e = one_experiment(fixtures["erasing-1"].net)
    check_experiment(e)
    assert len(e.w) == 1
    e = one_experiment(fixtures["erasing-2"].net)
    check_experiment(e)
    assert len(e.w) == 2


def test_one_experiment_needs_ne_normal(fixtures):
    with pytest.raises(ValueError):
        one_experiment(fixtures["ax-cut"].net)


# -- equivalence ---------------------------------------------------------------------------------


def test_equivalent_to_itself():
    (e,) = enumerate_experiments(parse_net(ONE_NET), "smbis")
    assert experiments_equivalent(e, e)


def test_equivalent_weakening_contents():
    n = parse_net(WHY0)
    cands = Budget(weakening_candidates=((star(POS),), (atom(POS, "w"),)))
    e1, e2 = enumerate_experiments(n, "smbis", budget=cands)
    assert e1.w != e2.w
    assert experiments_equivalent(e1, e2)
    empty = next(e for e in enumerate_experiments(n, "smbis") if not e.w)
    assert not experiments_equivalent(e1, empty)


def test_inequivalent_box_cardinalities():
    es = sorted(enumerate_experiments(parse_net(BANG_ONE), "smbis"), key=lambda e: e.s)
    one, two = es[0], es[1]
    assert len(one.boxes["bang:m"]) == 1 and len(two.boxes["bang:m"]) == 2
    assert not experiments_equivalent(one, two)


def test_equivalence_needs_smbis():
    (e,) = enumerate_experiments(parse_net(ONE_NET), "sm")
    with pytest.raises(ValueError):
        experiments_equivalent(e, e)


def test_equivalent_experiments_have_equal_size(corpus):
    budget = Budget(
        max_total_sbis=12,
        max_copies_per_box=None,
        weakening_candidates=((), (star(POS),), (bag(NEG, [star(POS)]),)),
        substitution_candidates=(star(POS), bag(POS, [star(NEG)])),
    )
    pairs = 0
    for fx in corpus:
        if not fx.net_text or "not-sn" in fx.tags or net_size(fx.net) > 10:
            continue
        es = list(enumerate_experiments(fx.net, "smbis", atomic=False, budget=budget))
        for e, e2 in itertools.combinations(es, 2):
            if experiments_equivalent(e, e2):
                pairs += 1
                assert e.s_bis == e2.s_bis, fx.name
    assert pairs > 0


# -- properties of smbis experiments over the corpus -------------------------------------------------


def _cut_free_nets(corpus):
    out = []
    for fx in corpus:
        if fx.pair:
            out += [parse_net(fx.pair["left"]), parse_net(fx.pair["right"])]
        elif fx.net_text and count_cuts(fx.net) == 0:
            out.append(fx.net)
    return out


def test_smbis_results_exhaustive(corpus):
    for n in _cut_free_nets(corpus):
        for e in enumerate_experiments(n, "smbis", budget=Budget(max_total_sbis=net_size(n) + 4)):
            assert all(exhaustive(x) for x in e.result)


def test_size_at_least_net_size(corpus):
    for n in _cut_free_nets(corpus):
        for e in enumerate_experiments(n, "smbis", budget=Budget(max_total_sbis=net_size(n) + 6, max_copies_per_box=None)):
            assert e.s >= net_size(n)
            assert (e.s == net_size(n)) == _is_one_experiment(e)


def _flat_nets(corpus):
    # contents of boxes: cut-free nets, possibly with structural conclusions
    out = []
    for n in _cut_free_nets(corpus):
        for path, g in walk(n):
            if path and count_cuts(g) == 0:
                out.append(g)
    return out


def test_size_bound_and_attainment(corpus):
    nets = _flat_nets(corpus) + _cut_free_nets(corpus)
    assert any(not g.is_proper for g in nets)
    for g in nets:
        k = sum(1 for c in g.conclusions if g.is_structural(c))
        es = list(enumerate_experiments(g, "smbis", budget=Budget(max_total_sbis=net_size(g) + 6, max_copies_per_box=None)))
        for e in es:
            bound = size_all(e.result) - size_all(e.w) - k
            assert e.s <= bound
            assert any(experiments_equivalent(e, e2) and e2.s == size_all(e2.result) - size_all(e2.w) - k for e2 in es)


def test_substitution_closure(corpus):
    # a substituted experiment is again an experiment, equivalent to the original
    values = [star(POS), star(NEG), bag(POS, [star(NEG)]), pair(NEG, star(POS), star(POS))]
    for n in _cut_free_nets(corpus)[:30]:
        for e in enumerate_experiments(n, "smbis", budget=Budget(max_total_sbis=net_size(n) + 2)):
            names = sorted({a for x in e.result + e.w for a in _atoms(x)})[:2]
            for vs in itertools.product(values, repeat=len(names)):
                e2 = e.substitute(dict(zip(names, vs)))
                check_experiment(e2)
                assert experiments_equivalent(e, e2)


def _atoms(x):
    from proofnet.points import atoms

    return atoms(x)


# -- F, atomic parts and the passage from sm to smbis ----------------------------------------------


def test_expand_F_star():
    assert expand_F(star(POS)) == {InterpPoint((star(POS),), ())}


def test_expand_F_empty_bag():
    assert expand_F(bag(NEG), STAR_CANDS) == {
        InterpPoint((bag(NEG),), ()),
        InterpPoint((bag(NEG, [star(POS)]),), (star(POS),)),
    }


def test_expand_F_nonempty_bag():
    x = bag(NEG, [star(POS)])
    assert expand_F(x) == {InterpPoint((x,), ())}


def test_expand_F_vector_sums_W():
    out = expand_F((bag(NEG), bag(NEG)), STAR_CANDS)
    assert InterpPoint((bag(NEG, [star(POS)]), bag(NEG, [star(POS)])), (star(POS), star(POS))) in out
    assert len(out) == 4


def test_expand_F_rejects_non_exhaustive():
    with pytest.raises(ValueError):
        expand_F(bag(POS))


def test_atomic_part_prefers_atoms():
    g = (atom(POS, "g"), atom(NEG, "g"))
    s = (star(POS), star(NEG))
    assert atomic_part([g, s]) == {g}


def test_atomic_part_trivial():
    assert atomic_part([(star(POS),)]) == {(star(POS),)}
    assert atomic_part([]) == set()


def test_smbis_from_sm_one():
    assert smbis_from_sm([(star(POS),)]) == [InterpPoint((star(POS),), ())]


def test_smbis_from_sm_why0():
    got = smbis_from_sm([(bag(NEG),)], STAR_CANDS)
    direct = interpretation(parse_net(WHY0), "smbis", STAR_CANDS)
    assert sorted(got) == sorted(direct) == sorted(
        [InterpPoint((bag(NEG),), ()), InterpPoint((bag(NEG, [star(POS)]),), (star(POS),))]
    )


def test_smbis_from_sm_drops_non_exhaustive():
    assert smbis_from_sm([(bag(POS),)]) == []


# -- composition ------------------------------------------------------------------------------------


def test_compose_one_bot():
    I = interpretation(parse_net(ONE_NET), "smbis")
    I2 = interpretation(parse_net(BOT_NET), "smbis")
    assert compose_interpretations(I, I2, 0, 0) == [InterpPoint((), ())]


def test_compose_no_unifier():
    I = [InterpPoint((star(POS),))]
    assert compose_interpretations(I, I, 0, 0) == []


def test_compose_ax_ax():
    I = interpretation(parse_net(AX_NET), "smbis")
    out = compose_interpretations(I, I, 1, 0)
    (p,) = out
    x, y = p.result
    assert x == dual(y) and x[0] == 0
    assert same_points(out, interpretation(parse_net(AX_NET), "smbis"))


def test_compose_example_points():
    pi, pi1, inf = (parse_interp(EXAMPLE_POINTS[k]) for k in ("pi", "pi1", "inf"))
    out = compose_interpretations([pi], [pi1], 1, 0)
    assert out == [inf]
    assert sbis_inf(out) == 6


def test_sbis_inf():
    assert sbis_inf([]) == math.inf
    assert sbis_inf(interpretation(parse_net(ONE_NET), "smbis")) == 1


# -- steps ---------------------------------------------------------------------------------------


def test_erasing_step_changes_smbis(fixtures):
    n = fixtures["erasing-1"].net
    m, step = reduce_cut(n, classify_cuts(n)[0].cut)
    assert step.erasing
    budget = Budget(max_total_sbis=8, max_copies_per_box=None)
    before, after = interpretation(n, "smbis", budget), interpretation(m, "smbis", budget)
    assert not same_points(before, after)
    assert same_points(interpretation(n, "sm", budget), interpretation(m, "sm", budget))


def test_nonerasing_steps_shrink_experiments(corpus, strong):
    # every experiment before a non-erasing step has a strictly smaller one after it with a more general point
    budget = Budget(max_total_sbis=12, max_copies_per_box=None)
    steps = 0
    for fx in corpus:
        if not fx.net_text or strong[fx.name].status != "SN" or net_size(fx.net) > 12:
            continue
        n = fx.net
        for c in classify_cuts(n):
            if c.erasing:
                continue
            m, _ = reduce_cut(n, c.cut)
            after = list(enumerate_experiments(m, "smbis", budget=budget))
            for e in enumerate_experiments(n, "smbis", budget=budget):
                assert any(e1.s_bis < e.s_bis and instance_of(e.point.flat(), e1.point.flat()) for e1 in after), fx.name
            steps += 1
    assert steps >= 10
