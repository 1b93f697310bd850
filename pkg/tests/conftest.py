import pytest

from setrewrite import DependencyKind, construct, parse_trs

ADD_TRS = """\
symbols: add:2 s:1 0:0
vars: x y z
rules:
add(add(x,s(y)),s(z)) -> add(x,z)
"""

ADD_TERM = "add(add(add(0,s(0)),s(0)),s(0))"

IF_TRS = """\
symbols: if:3 not:1 true:0 false:0
vars: x y
rules:
if(true,x,y) -> x
if(false,x,y) -> y
not(true) -> false
not(false) -> true
not(not(x)) -> x
"""

IF_TERM = "if(not(not(true)),false,true)"

NONLINEAR_TRS = """\
symbols: f:3 h:1 a:0
vars: x y
rules:
f(x,x,y) -> y
f(x,y,y) -> x
f(x,y,x) -> x
h(a) -> a
"""

NONLINEAR_TERM = "f(a,h(a),h(a))"

PEANO_FIB = """\
symbols: 0:0 s:1 plus:2 fib:1
vars: x y
rules:
plus(0,y) -> y
plus(s(x),y) -> s(plus(x,y))
fib(0) -> 0
fib(s(0)) -> s(0)
fib(s(s(x))) -> plus(fib(s(x)),fib(x))
"""


def peano(n: int) -> str:
    return "s(" * n + "0" + ")" * n


@pytest.fixture
def add_auto():
    trs = parse_trs(ADD_TRS)
    return trs, construct(trs, DependencyKind.STANDARD)


@pytest.fixture
def if_trs():
    return parse_trs(IF_TRS)


@pytest.fixture
def nonlinear_trs():
    return parse_trs(NONLINEAR_TRS)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for n, m in sys.modules.items() if n.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])


# -- hypothesis helpers ---------------------------------------------------------------

from hypothesis import strategies as st  # noqa: E402

from setrewrite import Symbol, TermPool  # noqa: E402

SIGNATURE = (Symbol("f", 2), Symbol("g", 1), Symbol("h", 3), Symbol("a", 0), Symbol("b", 0))


def term_shapes(max_leaves=12):
    """Nested (name, children) tuples over SIGNATURE; build them with ``build``."""
    leaves = st.sampled_from([("a", ()), ("b", ())])
    return st.recursive(
        leaves,
        lambda kids: st.one_of(
            st.tuples(st.just("g"), st.tuples(kids)),
            st.tuples(st.just("f"), st.tuples(kids, kids)),
            st.tuples(st.just("h"), st.tuples(kids, kids, kids)),
        ),
        max_leaves=max_leaves,
    )


def build(pool: TermPool, shape):
    syms = {s.name: s for s in SIGNATURE}
    name, kids = shape
    return pool.make(syms[name], [build(pool, k) for k in kids])
