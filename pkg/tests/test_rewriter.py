import pytest
from hypothesis import given, settings, strategies as st

from setrewrite import DependencyKind, RewriteSession, construct, parse_trs
from setrewrite.errors import ConstructionError, StepLimitError, UnsupportedRuleError
from setrewrite.fuzz import make_case, unique_normal_form
from setrewrite.matcher import Redex
from setrewrite.rewriter import (
    STRATEGIES,
    builtin_strategies,
    explore_all_then_reduce,
    find_redex,
    is_normal_form,
    normalize,
    normalize_nonlinear,
    oracle_normalize,
    oracle_run,
    reduce_on_discovery,
)
from setrewrite.terms import subterm_at, term_size
from setrewrite.trs import is_consistent, variable_partition

from conftest import ADD_TERM, IF_TERM, NONLINEAR_TERM, PEANO_FIB, peano


@pytest.fixture
def if_std(if_trs):
    return if_trs, construct(if_trs, DependencyKind.STANDARD), if_trs.parse_term(IF_TERM)


def test_if_normal_form(if_std):
    trs, a, t = if_std
    sess = RewriteSession(a, t, trace=True, debug=True)
    assert str(sess.run()) == "false"
    assert sess.counters == {"rewrite_steps": 2, "symbol_inspections": 5, "consistency_checks": 0}
    assert [str(r) for r in sess.applied] == ["R5@1", "R1@ε"]


def test_reduce_on_discovery_leaves_siblings_unexplored(if_std):
    _, a, t = if_std
    sess = RewriteSession(a, t, trace=True)
    sess.run(reduce_on_discovery)
    first_reduce = next(k for k, ev in enumerate(sess.trace) if ev["kind"] == "reduce")
    grown = [ev["position"] for ev in sess.trace[:first_reduce] if ev["kind"] == "grow"]
    assert grown == [(), (), (1,)]
    assert all(ev["position"] not in ((2,), (3,)) for ev in sess.trace if ev["kind"] == "grow")


def test_normal_form_input(if_std):
    trs, a, _ = if_std
    t = trs.parse_term("not(true)")
    nf = trs.parse_term("false")
    for strategy in (reduce_on_discovery, explore_all_then_reduce):
        sess = RewriteSession(a, nf)
        assert sess.run(strategy) is nf and sess.rewrite_steps == 0
        assert sess.symbol_inspections == term_size(nf)
    assert normalize(a, t) is nf


def test_explore_all_on_a_normal_form(add_auto):
    trs, a = add_auto
    t = trs.parse_term("add(s(0),add(0,s(0)))")
    sess = RewriteSession(a, t, trace=True)
    assert sess.run(explore_all_then_reduce) is t
    assert [ev["kind"] for ev in sess.trace] == ["grow"] * term_size(t)


def test_add_system_agrees_with_oracle(add_auto):
    trs, a = add_auto
    t = trs.parse_term(ADD_TERM)
    want = oracle_normalize(trs, t)
    assert normalize(a, t, debug=True) is want
    assert normalize(a, t, explore_all_then_reduce, debug=True) is want
    assert str(want) == "add(add(0,s(0)),0)"


def test_nonlinear_session(nonlinear_trs):
    a = construct(nonlinear_trs)
    t = nonlinear_trs.parse_term(NONLINEAR_TERM)
    with pytest.raises(UnsupportedRuleError):
        normalize(a, t)
    sess = RewriteSession(a, t, debug=True)
    assert str(sess.run()) == "a"
    assert [str(r) for r in sess.applied] == ["R2@ε"]
    assert sess.consistency_checks == 2
    for strategy in STRATEGIES.values():
        assert normalize_nonlinear(a, t, strategy, debug=True) is oracle_normalize(nonlinear_trs, t)


def _explored(nonlinear_trs):
    a = construct(nonlinear_trs)
    sess = RewriteSession(a, nonlinear_trs.parse_term(NONLINEAR_TERM), debug=True)
    while sess.buds():
        sess.grow(*min(sess.buds(), key=lambda c: (c[1], c[0])))
    for r in sorted(sess.am, key=lambda r: r.rule.id):
        sess.check(r)
    return sess, {r.name: r for r in nonlinear_trs.rules}


def test_update_after_the_inner_step(nonlinear_trs):
    sess, R = _explored(nonlinear_trs)
    assert sess.update((2,)) == {Redex(R["R1"], ()), Redex(R["R2"], ())}
    assert sess.dis == {Redex(R["R3"], ())} and not sess.en


def test_update_below_no_repeated_variable():
    trs = parse_trs("symbols: f:3 h:1 g:1 a:0\nvars: x y\nrules:\nf(x,x,g(y)) -> y\nh(a) -> a\n")
    a = construct(trs)
    sess = RewriteSession(a, trs.parse_term("f(a,h(a),g(h(a)))"))
    while sess.buds():
        sess.grow(*min(sess.buds(), key=lambda c: (c[1], c[0])))
    for r in list(sess.am):
        sess.check(r)
    assert sess.update((3, 1)) == set()


def test_explore_all_then_reduce_nonlinear(nonlinear_trs):
    a = construct(nonlinear_trs)
    sess = RewriteSession(a, nonlinear_trs.parse_term(NONLINEAR_TERM), debug=True)
    assert str(sess.run(explore_all_then_reduce)) == "a"


def test_step_limit(if_trs):
    loop = parse_trs("symbols: a:0 b:0\nvars:\nrules:\na -> b\nb -> a\n")
    a = construct(loop)
    with pytest.raises(StepLimitError):
        RewriteSession(a, loop.parse_term("a"), max_steps=10).run()
    with pytest.raises(StepLimitError):
        oracle_run(loop, loop.parse_term("a"), max_steps=10)


def test_oracle(if_trs):
    t = if_trs.parse_term(IF_TERM)
    assert str(oracle_normalize(if_trs, t)) == "false"
    assert oracle_run(if_trs, t).steps == 2
    nf = if_trs.parse_term("true")
    assert oracle_normalize(if_trs, nf) is nf
    assert is_normal_form(if_trs, nf) and not is_normal_form(if_trs, t)
    inner = find_redex(if_trs, t, "leftmost-innermost")
    outer = find_redex(if_trs, t, "leftmost-outermost")
    assert str(inner[0]) == "R3@1.1" and str(outer[0]) == "R5@1"


def test_builtin_strategies():
    names = set(builtin_strategies())
    assert {"reduce-on-discovery", "explore-all-then-reduce"} <= names


def test_peano_fibonacci_reference():
    trs = parse_trs(PEANO_FIB)
    a = construct(trs)
    t = trs.parse_term(f"fib({peano(8)})")
    assert normalize(a, t) is trs.parse_term(peano(21))


# -- properties --------------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_strategies_agree_on_unique_normal_forms(i):
    case, _ = make_case("rewriter", i)
    try:
        a = construct(case.trs, max_states=2000)
    except ConstructionError:
        return
    want = unique_normal_form(case.trs, case.term)
    for strategy in (reduce_on_discovery, explore_all_then_reduce):
        try:
            got = RewriteSession(a, case.term, max_steps=60 if want is None else 10_000,
                                 debug=True).run(strategy)
        except StepLimitError:
            assert want is None
            continue
        assert is_normal_form(case.trs, got)
        if want is not None:
            assert got is want


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_verdicts_survive_outside_the_removed_set(i):
    case, _ = make_case("update", i)
    if case.trs.linear:
        return
    try:
        a = construct(case.trs, max_states=2000)
    except ConstructionError:
        return
    sess = RewriteSession(a, case.term)
    while sess.buds():
        sess.grow(*min(sess.buds(), key=lambda c: (c[1], c[0])))
    for r in list(sess.am):
        sess.check(r)
    reds = sorted(sess.reds_L | sess.en, key=lambda r: (len(r.position), r.position, r.rule.id))
    if not reds:
        return
    before = {r: r in sess.en for r in sess.en | sess.dis}
    sess.reduce(reds[-1])
    for r in sess.en | sess.dis:
        verdict = is_consistent(subterm_at(sess.t, r.position), variable_partition(r.rule.lhs))
        assert verdict == before[r]
