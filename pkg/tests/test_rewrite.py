import pytest

from proofnet import canonical_sequence, classify_cuts, net_size, nets_isomorphic, normalize, parse_net, reduce_cut, strong_length
from proofnet.corpus import AX_CUT, AX_NET, BOT_NET, ONE_BOT, ONE_NET
from proofnet.net import count_cuts, has_clash
from proofnet.rewrite import ClashError, IsoTable, NotStronglyNormalizing, eligible_cuts


def _only_cut(n):
    (c,) = classify_cuts(n)
    return c.cut


def _steps(n, strategy="any"):
    for c in eligible_cuts(n, strategy):
        yield c, reduce_cut(n, c.cut)


def _longest_naive(n, limit=40):
    # every reduction sequence, no sharing; None when the limit is hit or a clash is reachable
    if limit == 0 or has_clash(n):
        return None
    best = 0
    for _, (m, _) in _steps(n):
        sub = _longest_naive(m, limit - 1)
        if sub is None:
            return None
        best = max(best, sub + 1)
    return best


def _reach(starts, strategy, limit=200):
    # states reachable from any of ``starts`` (included), up to isomorphism
    table = IsoTable()
    todo = [m for m in starts if table.lookup(m)[1]]
    while todo and len(table) < limit:
        cur = todo.pop()
        for _, (m, _) in _steps(cur, strategy):
            if table.lookup(m)[1]:
                todo.append(m)
    return table


def _contains(table, net):
    return table.lookup(net, add=False)[0] >= 0


# -- single steps ------------------------------------------------------------------------


def test_reduce_ax_cut():
    n = parse_net(AX_CUT)
    m, step = reduce_cut(n, _only_cut(n))
    assert nets_isomorphic(m, parse_net("(net (concl c d) (ax c d))"))
    assert m.conclusions == ("c", "d")
    assert step.rule == "Ax" and not step.erasing and step.depth == 0


def test_reduce_one_bot():
    n = parse_net(ONE_BOT)
    m, step = reduce_cut(n, _only_cut(n))
    assert m.links == () and m.conclusions == ()
    assert step.rule == "OneBot"


def test_reduce_erasing(fixtures):
    n = fixtures["erasing-1"].net
    m, step = reduce_cut(n, _only_cut(n))
    assert m.links == () and m.boxes == {}
    assert step.rule == "BangWhy" and step.erasing


def test_reduce_tensor_par_creates_two_cuts(fixtures):
    n = fixtures["tensor-par"].net
    m, step = reduce_cut(n, _only_cut(n))
    assert [c.cls.value for c in classify_cuts(m)] == ["Ax", "Ax"]
    created = {c for c, old in step.link_ancestor_map.items() if c.startswith("cut:")}
    assert len(created) == 2
    assert step.residue_map[_only_cut(n)] == created


def test_reduce_contraction_copies_box(fixtures):
    n = fixtures["contraction"].net
    m, step = reduce_cut(n, _only_cut(n))
    # each copy of the box is cut against one bot
    assert [c.cls.value for c in classify_cuts(m)] == ["OneBot", "OneBot"]
    assert net_size(m) == net_size(n) - 1
    # every edge of the reduct has an ancestor in the redex
    from proofnet.net import all_edges

    assert set(step.ancestor_map) == all_edges(m)
    assert set(step.ancestor_map.values()) <= all_edges(n)


def test_reduce_aux_duplication_contracts_doors(fixtures):
    n = fixtures["aux-duplication"].net
    m, _ = reduce_cut(n, _only_cut(n))
    (q,) = [l for l in m.links if l.kind.value == "why" and l.main == "q"]
    assert len(q.premises) == 2


def test_reduce_clash_raises(fixtures):
    n = fixtures["clash-tensor-bot"].net
    with pytest.raises(ClashError):
        reduce_cut(n, _only_cut(n))


def test_reduce_unknown_cut():
    with pytest.raises(KeyError):
        reduce_cut(parse_net(AX_CUT), "cut:nope,nope")


def test_reduce_inside_box():
    n = parse_net("(net (concl m) (bang -> m (aux) (box (net (concl x) (one u) (bot v) (cut u v) (one x))) (map)))")
    m, step = reduce_cut(n, _only_cut(n))
    assert step.depth == 1 and count_cuts(m) == 0


# -- strategies ---------------------------------------------------------------------------


def test_normalize_ax_cut():
    trace, status = normalize(parse_net(AX_CUT), "any")
    assert len(trace) == 1 and status == "normal"


def test_normalize_okada_runs_out(fixtures):
    trace, status = normalize(fixtures["okada"].net, "any", 10)
    assert status == "fuel_exhausted" and len(trace) == 10


def test_normalize_clash(fixtures):
    trace, status = normalize(fixtures["clash-tensor-bot"].net, "any")
    assert status == "clash_blocked" and len(trace) == 0


def test_normalize_nonerasing_stops_at_ne_normal(fixtures):
    trace, status = normalize(fixtures["ne-and-e"].net, "nonerasing")
    assert status == "ne_normal" and len(trace) == 1


def test_normalize_antistratified_needs_ne_normal(fixtures):
    with pytest.raises(ValueError):
        normalize(fixtures["ne-and-e"].net, "antistratified_erasing")


def test_trace_replays(corpus):
    for fx in corpus:
        if not fx.net_text:
            continue
        trace, _ = normalize(fx.net, "any", 20)
        cur = trace.start
        for step in trace.steps:
            cur, again = reduce_cut(cur, step.cut)
            assert again == step
        assert nets_isomorphic(cur, trace.end)


# -- longest reductions ---------------------------------------------------------------------


def test_strong_cut_free():
    assert str(strong_length(parse_net(ONE_NET))) == "SN(0)"


def test_strong_ax_cut():
    assert strong_length(parse_net(AX_CUT)).max_len == 1
    assert _longest_naive(parse_net(AX_CUT)) == 1


def test_strong_okada(fixtures):
    res = strong_length(fixtures["okada"].net)
    assert res.status == "NotSN" and res.witness == "cycle" and res.cycle_length == 2


def test_strong_clash(fixtures):
    res = strong_length(fixtures["clash-bang-tensor"].net)
    assert res.status == "NotSN" and res.witness == "clash"


def test_strong_fuel(fixtures):
    assert strong_length(fixtures["tensor-par"].net, fuel=1).status == "Unknown"


def test_strong_bad_mode():
    with pytest.raises(ValueError):
        strong_length(parse_net(AX_CUT), "some")


def test_strong_matches_naive_search(corpus, strong):
    checked = 0
    for fx in corpus:
        if not fx.net_text or "not-sn" in fx.tags:
            continue
        res = strong[fx.name]
        if res.status != "SN" or res.max_len > 6:
            continue
        assert _longest_naive(fx.net) == res.max_len, fx.name
        checked += 1
    assert checked >= 15


def test_expected_strong_values(corpus, strong):
    for fx in corpus:
        if not fx.net_text or "strong" not in fx.expected:
            continue
        exp = fx.value("strong")
        res = strong[fx.name]
        assert res.status == exp["status"], fx.name
        if res.status == "SN":
            assert res.max_len == exp["max_len"], fx.name
        else:
            assert res.witness == exp["witness"], fx.name


# -- canonical sequences ----------------------------------------------------------------------


def test_canonical_ax_cut():
    r1, r2 = canonical_sequence(parse_net(AX_CUT))
    assert (len(r1), len(r2)) == (1, 0)


def test_canonical_mixed(fixtures):
    r1, r2 = canonical_sequence(fixtures["ne-and-e"].net)
    assert (len(r1), len(r2)) == (1, 1)


def test_canonical_two_depths(fixtures):
    r1, r2 = canonical_sequence(fixtures["erasing-2"].net)
    assert (len(r1), len(r2)) == (0, 2)
    assert r2.steps[0].depth == 1 and r2.steps[1].depth == 0


def test_canonical_not_sn(fixtures):
    with pytest.raises(NotStronglyNormalizing):
        canonical_sequence(fixtures["okada"].net)


# -- isomorphism -------------------------------------------------------------------------------


def test_iso_self(fixtures):
    n = fixtures["tensor-par"].net
    assert nets_isomorphic(n, n)


def test_iso_one_bot():
    assert not nets_isomorphic(parse_net(ONE_NET), parse_net(BOT_NET))


def test_iso_okada_two_steps(fixtures):
    n = fixtures["okada"].net
    (c,) = classify_cuts(n)
    m1, step = reduce_cut(n, c.cut)
    assert step.rule == "BangWhy" and not nets_isomorphic(m1, n)
    back = [m2 for c2, (m2, s2) in _steps(m1) if s2.rule == "Ax" and nets_isomorphic(m2, n)]
    assert back


def test_iso_respects_conclusion_order():
    a = parse_net(AX_NET)
    b = parse_net("(net (concl a b) (one a) (bot b))")
    c = parse_net("(net (concl b a) (one a) (bot b))")
    assert nets_isomorphic(a, parse_net("(net (concl x y) (ax x y))"))
    assert not nets_isomorphic(b, c)


# -- properties checked by search over the corpus ----------------------------------------------


def _sn_nets(corpus, strong, max_states=60):
    out = []
    for fx in corpus:
        if fx.net_text:
            res = strong[fx.name]
            if res.status == "SN" and res.states <= max_states:
                out.append((fx.name, fx.net))
    return out


@pytest.fixture(scope="module")
def sn_states(corpus, strong):
    # every reachable state of the smaller SN corpus nets
    out = []
    for name, n in _sn_nets(corpus, strong, 40):
        table = _reach([n], "any")
        out += [(name, m) for m in table.nets]
    return out


def test_erasing_steps_create_no_clash(sn_states, fixtures):
    states = sn_states + [("clash", fixtures["clash-bang-tensor"].net)]
    for name, n in states:
        for c, (m, step) in _steps(n):
            if step.erasing and has_clash(m):
                assert has_clash(n), name


def test_nonerasing_loses_at_most_one_cut(sn_states):
    for name, n in sn_states:
        for c, (m, step) in _steps(n, "nonerasing"):
            assert count_cuts(m) >= count_cuts(n) - 1, name


def test_erasing_sequences_bounded_by_cuts(sn_states):
    for name, n in sn_states:
        if not all(c.erasing for c in classify_cuts(n)):
            continue

        def longest(net):
            return max((1 + longest(m) for c, (m, s) in _steps(net) if s.erasing), default=0)

        assert longest(n) <= count_cuts(n), name


def test_postponement(sn_states):
    seen = 0
    for name, n in sn_states:
        later = None
        for c, (m1, step) in _steps(n):
            if not step.erasing:
                continue
            for _, (m2, _) in _steps(m1, "nonerasing"):
                seen += 1
                if later is None:
                    later = _reach([m for _, (m, _) in _steps(n, "nonerasing")], "any")
                assert _contains(later, m2), name
    assert seen > 0


def test_local_diagram(sn_states):
    seen = 0
    for name, n in sn_states:
        strat = [(m, None) for _, (m, _) in _steps(n, "stratified_nonerasing")]
        for _, (m1, _) in _steps(n, "nonerasing"):
            joins = None
            for i, (m2, after) in enumerate(strat):
                if nets_isomorphic(m1, m2):
                    continue
                seen += 1
                if after is None:
                    after = _reach([m for _, (m, _) in _steps(m2, "nonerasing")], "nonerasing")
                    strat[i] = (m2, after)
                if joins is None:
                    joins = [m for _, (m, _) in _steps(m1, "stratified_nonerasing")]
                assert any(_contains(after, j) for j in joins), name
    assert seen > 0


def test_stratified_maximality(corpus, strong):
    from proofnet.rewrite import longest_stratified

    for name, n in _sn_nets(corpus, strong):
        ne = strong_length(n, "nonerasing_only")
        assert len(longest_stratified(n)) == ne.max_len, name


def test_sn_iff_sn_nonerasing(corpus, strong):
    for fx in corpus:
        if not fx.net_text:
            continue
        full = strong[fx.name].status == "SN"
        ne = strong_length(fx.net, "nonerasing_only", fuel=5000)
        # a terminating search has seen every non-erasing reduct
        clash = ne.status == "SN" and any(has_clash(m) for m in _reach([fx.net], "nonerasing", 10**4).nets)
        assert full == (ne.status == "SN" and not clash), fx.name
