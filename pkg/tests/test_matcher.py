import random

import pytest
from hypothesis import given, settings, strategies as st

from setrewrite import DependencyKind, construct, parse_trs
from setrewrite.errors import ConstructionError, NoSuchBudError
from setrewrite.fuzz import check_laws, make_case, random_fragment
from setrewrite.matcher import (
    Bud,
    Node,
    buds,
    completed,
    confs,
    evaluate,
    grow,
    is_fragment,
    matches,
    nodes,
    prune,
    subtree_at,
)
from setrewrite.rewriter import brute_force_redexes
from setrewrite.terms import domain, term_size

from conftest import ADD_TERM, IF_TERM, IF_TRS, NONLINEAR_TERM


def _names(redexes):
    return sorted(map(str, redexes))


@pytest.fixture
def if_std():
    trs = parse_trs(IF_TRS)
    return trs, construct(trs, DependencyKind.STANDARD), trs.parse_term(IF_TERM)


def test_add_term_evaluation(add_auto):
    trs, a = add_auto
    t = trs.parse_term(ADD_TERM)
    res = evaluate(a, t, trace=True)
    assert _names(res.redexes) == ["R1@1", "R1@ε"]
    assert res.inspections == 10
    rows = [(e["state"], e["position"], e["observed_position"], e["observed_symbol"]) for e in res.trace]
    assert rows == [
        (0, (), (), "add"),
        (1, (), (2,), "s"),
        (2, (), (1,), "add"),
        (0, (2, 1), (2, 1), "0"),
        (3, (), (1, 2), "s"),
        (2, (1,), (1, 1), "add"),
        (0, (1, 2, 1), (1, 2, 1), "0"),
        (3, (1,), (1, 1, 2), "s"),
        (2, (1, 1), (1, 1, 1), "0"),
        (0, (1, 1, 2, 1), (1, 1, 2, 1), "0"),
    ]


def test_if_evaluation(if_std):
    _, a, t = if_std
    assert _names(evaluate(a, t).redexes) == ["R3@1.1", "R5@1"]


def test_normal_form_constant(add_auto):
    trs, a = add_auto
    assert evaluate(a, trs.parse_term("0")).redexes == frozenset()


def test_completed_tree(add_auto):
    trs, a = add_auto
    t = trs.parse_term(ADD_TERM)
    ct = completed(a, t)
    assert len(nodes(ct)) == 10 and buds(ct) == []
    assert completed(a, trs.parse_term("0")) == Node(0, ())


def test_grow_steps(add_auto):
    trs, a = add_auto
    t = trs.parse_term(ADD_TERM)
    ct = grow(a, Bud(0, ()), 0, (), t)
    assert ct == Node(0, (), (Bud(1, ()),))
    ct = grow(a, ct, 1, (), t)
    assert sorted(buds(ct)) == [(0, (2, 1)), (2, ())]
    ct = grow(a, ct, 0, (2, 1), t)
    assert Node(0, (2, 1)) in ct.children[0].children
    with pytest.raises(NoSuchBudError):
        grow(a, ct, 0, (2, 1), t)


def test_partial_tree_extends_to_completed(add_auto):
    trs, a = add_auto
    t = trs.parse_term(ADD_TERM)
    ct = Bud(0, ())
    full = completed(a, t)
    for _ in range(term_size(t)):
        assert is_fragment(ct, full)
        s, p = min(buds(ct), key=lambda c: (c[1], c[0]))
        ct = grow(a, ct, s, p, t)
    assert ct == full


def test_prune_after_the_inner_step(if_std):
    _, a, t = if_std
    ct = completed(a, t)
    assert subtree_at(a, ct, (1,)).config == (1, ())
    pruned = prune(a, ct, (1,))
    assert pruned == Node(0, (), (Node(0, (2,)), Node(0, (3,)), Bud(1, ())))
    assert prune(a, Bud(2, (1,)), (1,)) == Bud(2, (1,))
    assert prune(a, ct, ()) == Bud(0, ())


def test_subtree_at(if_std):
    _, a, t = if_std
    ct = completed(a, t)
    assert subtree_at(a, Bud(0, ()), (1,)) is None
    for p in domain(t):
        assert subtree_at(a, ct, p) is not None


def test_matches(if_std, add_auto, nonlinear_trs):
    _, a, t = if_std
    lin, nonlin = matches(a, 2, (1,), t)
    assert _names(lin) == ["R5@1"] and not nonlin
    assert matches(a, 0, (2,), t) == (frozenset(), frozenset())
    trs, a1 = add_auto
    lin, _ = matches(a1, 3, (), trs.parse_term(ADD_TERM))
    assert _names(lin) == ["R1@ε"]
    a2 = construct(nonlinear_trs)
    t2 = nonlinear_trs.parse_term(NONLINEAR_TERM)
    found = set()
    for s, p in nodes(completed(a2, t2)):
        found |= matches(a2, s, p, t2)[1]
    assert _names(found) == ["R1@ε", "R2@ε", "R3@ε"]


def test_fragment_order(if_std):
    _, a, t = if_std
    ct = completed(a, t)
    assert is_fragment(ct, ct)
    assert is_fragment(Bud(0, ()), ct)
    assert not is_fragment(ct, Bud(0, ()))
    assert not is_fragment(Bud(1, ()), ct)
    assert is_fragment(prune(a, ct, (1,)), ct)


def test_deep_terms_do_not_recurse(add_auto):
    trs, a = add_auto
    n = 5000
    t = trs.parse_term("s(" * n + "0" + ")" * n)
    ct = completed(a, t)
    assert len(confs(ct)) == n + 1
    assert prune(a, ct, (1,) * 10) != ct


# -- properties over random systems -----------------------------------------------------


def _case(i):
    case, rng = make_case("matcher", i)
    autos = []
    for rel in DependencyKind:
        try:
            autos.append(construct(case.trs, rel, max_states=2000))
        except ConstructionError:
            return None, None, None
    return case, rng, autos


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_evaluation_equals_brute_force(i):
    case, _, autos = _case(i)
    if case is None:
        return
    want = brute_force_redexes(case.trs, case.term, prematch=True)
    for a in autos:
        res = evaluate(a, case.term)
        assert set(res.redexes) == want
        assert res.inspections == term_size(case.term)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_configuration_tree_laws(i):
    case, rng, autos = _case(i)
    if case is None:
        return
    for a in autos:
        assert check_laws(rng, a, case) is None


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.data())
def test_completed_nodes_biject_with_positions(i, data):
    case, _, autos = _case(i)
    if case is None:
        return
    t = case.term
    for a in autos:
        ct = completed(a, t)
        observed = sorted(p + a.labels[s] for s, p in nodes(ct))
        assert observed == sorted(domain(t))
        frag = random_fragment(random.Random(i), a, t, data.draw(st.integers(0, term_size(t))))
        assert is_fragment(frag, ct)
        q = data.draw(st.sampled_from(domain(t)))
        assert is_fragment(prune(a, frag, q), frag)
