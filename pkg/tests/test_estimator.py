import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from setrewrite import SetAutomatonRewriter, parse_trs
from setrewrite.errors import ParseError, StepLimitError, TermError, UnsupportedRuleError
from setrewrite.estimator import ENGINES, check_terms, check_trs

from conftest import IF_TERM, IF_TRS, NONLINEAR_TERM, NONLINEAR_TRS, PEANO_FIB, peano


@pytest.fixture
def trs_file(tmp_path):
    path = tmp_path / "if.trs"
    path.write_text(IF_TRS)
    return path


@pytest.mark.parametrize("engine", ENGINES)
def test_every_engine_normalises(engine):
    est = SetAutomatonRewriter(engine=engine).fit(IF_TRS)
    [nf] = est.transform([IF_TERM])
    assert str(nf) == "false"
    rep = est.reports_[-1]
    assert rep.rewrite_steps == 2 and rep.engine == engine and rep.normal_form == "false"
    if engine == "oracle":
        assert rep.symbol_inspections is None and est.automaton_ is None
    else:
        assert rep.symbol_inspections == 5


def test_fit_accepts_paths_text_and_trs(trs_file):
    for source in (trs_file, str(trs_file), IF_TRS, parse_trs(IF_TRS)):
        est = SetAutomatonRewriter().fit(source)
        assert len(est.trs_.rules) == 5


def test_params_roundtrip():
    est = SetAutomatonRewriter(engine="reference", strategy="explore-all-then-reduce", max_steps=7)
    params = est.get_params()
    assert params["engine"] == "reference" and params["max_steps"] == 7
    twin = clone(est)
    assert twin.get_params() == params and not hasattr(twin, "trs_")
    est.set_params(engine="oracle")
    assert est.engine == "oracle"


def test_not_fitted():
    with pytest.raises(NotFittedError):
        SetAutomatonRewriter().transform([IF_TERM])


@pytest.mark.parametrize(
    "params",
    [
        {"engine": "fast"},
        {"engine": "stack", "relation": "standard"},
        {"strategy": "random"},
        {"oracle_order": "rightmost"},
        {"max_steps": -1},
    ],
)
def test_bad_params(params):
    with pytest.raises(ValueError):
        SetAutomatonRewriter(**params).fit(IF_TRS)


def test_auto_relation():
    assert SetAutomatonRewriter().fit(IF_TRS).automaton_.relation.value == "outermost"
    assert SetAutomatonRewriter(engine="reference").fit(IF_TRS).automaton_.relation.value == "standard"


def test_reference_linear_refuses_nonlinear_rules():
    est = SetAutomatonRewriter(engine="reference-linear").fit(NONLINEAR_TRS)
    with pytest.raises(UnsupportedRuleError):
        est.transform(NONLINEAR_TERM)
    assert [str(t) for t in SetAutomatonRewriter(engine="reference").fit(NONLINEAR_TRS)
            .transform(NONLINEAR_TERM)] == ["a"]


def test_fit_transform_and_stats():
    est = SetAutomatonRewriter()
    est.fit(PEANO_FIB)
    out = est.transform([f"fib({peano(6)})", f"plus({peano(2)},{peano(3)})"])
    assert [str(t) for t in out] == [peano(8), peano(5)]
    st = est.stats()
    assert st["transition_cells"] == st["states"] * st["symbols"] and st["construct_ms"] >= 0


def test_step_budget():
    est = SetAutomatonRewriter(max_steps=3).fit(PEANO_FIB)
    with pytest.raises(StepLimitError):
        est.transform(f"fib({peano(6)})")


def test_trace_and_debug():
    est = SetAutomatonRewriter(trace=True, debug=True).fit(IF_TRS)
    rep = est.rewrite_one(est.trs_.parse_term(IF_TERM))
    assert [ev["kind"] for ev in rep.trace].count("reduce") == 2
    d = rep.as_dict()
    assert "trace" not in d and "result" not in d and d["normal_form"] == "false"
    assert rep.as_dict(with_trace=True)["trace"] is rep.trace


def test_check_terms():
    trs = parse_trs(IF_TRS)
    t = trs.parse_term("true")
    assert check_terms(t, trs) == [t]
    assert check_terms(["true", t], trs) == [t, t]
    with pytest.raises(TermError):
        check_terms(parse_trs(IF_TRS).parse_term("true"), trs)
    with pytest.raises(TermError):
        check_terms(trs.parse_term("not(x)", allow_variables=True), trs)
    with pytest.raises(TypeError):
        check_terms([3], trs)
    with pytest.raises(ParseError):
        check_terms("not(", trs)


def test_check_trs_rejects_other_types():
    with pytest.raises(TypeError):
        check_trs(42)
