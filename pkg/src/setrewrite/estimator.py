"""Estimator-style front end: ``fit`` builds the automaton, ``transform`` normalises."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field, fields
from typing import List, Optional, Union

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .automaton import DependencyKind, SetAutomaton, construct
from .engine import StackEngine
from .errors import TermError, TrsError, UnsupportedRuleError
from .rewriter import (
    DEFAULT_MAX_STEPS,
    RewriteSession,
    STRATEGIES,
    oracle_run,
)
from .terms import Term, format_term
from .trs import Trs, parse_trs

ENGINES = ("stack", "reference", "reference-linear", "oracle")
ORACLE_ORDERS = ("leftmost-outermost", "leftmost-innermost")


@dataclass
class RunReport:
    """One normalisation: input, result, counters and wall time."""

    term: str
    normal_form: str
    engine: str
    rewrite_steps: int
    symbol_inspections: Optional[int]
    consistency_checks: Optional[int]
    wall_time_ms: float
    trace: Optional[list] = field(default=None, repr=False)
    result: Optional[Term] = field(default=None, repr=False, compare=False)

    def as_dict(self, *, with_trace: bool = False) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("trace", "result")}
        if with_trace:
            d["trace"] = self.trace
        return d


def check_trs(trs: Union[Trs, str, os.PathLike]) -> Trs:
    """Accept a parsed TRS, TRS text, or a path to a TRS file."""
    if isinstance(trs, Trs):
        if not trs.rules:
            raise TrsError("a TRS needs at least one rule")
        return trs
    if isinstance(trs, os.PathLike) or (isinstance(trs, str) and "\n" not in trs and os.path.isfile(trs)):
        with open(trs, encoding="utf-8") as fh:
            return parse_trs(fh.read())
    if isinstance(trs, str):
        return parse_trs(trs)
    raise TypeError(f"expected a Trs, TRS text or a path, got {type(trs).__name__}")


def check_terms(terms, trs: Trs) -> List[Term]:
    """Turn a term, a string, or an iterable of either into ground terms of ``trs``'s pool."""
    if isinstance(terms, (str, Term)):
        terms = [terms]
    out = []
    for t in terms:
        if isinstance(t, str):
            t = trs.parse_term(t)
        elif not isinstance(t, Term):
            raise TypeError(f"expected a term or term text, got {type(t).__name__}")
        if t not in trs.pool:
            raise TermError(f"term {format_term(t)} belongs to a different pool")
        if not t.ground:
            raise TermError(f"term {format_term(t)} is not ground")
        out.append(t)
    return out


class SetAutomatonRewriter(TransformerMixin, BaseEstimator):
    """Normalise terms with a set-automaton engine.

    Parameters
    ----------
    engine : {"stack", "reference", "reference-linear", "oracle"}
        ``stack`` is the depth-first outermost engine, ``reference`` the
        configuration-tree engine (``reference-linear`` refuses non-linear
        rules), ``oracle`` the brute-force leftmost rewriter.
    relation : {"standard", "outermost"} or None
        Dependency relation for construction; None picks ``outermost`` for
        the stack engine and ``standard`` otherwise.
    max_steps : int
        Rewrite step budget per term.
    max_states : int
        Automaton construction budget.
    strategy : str
        Strategy for the reference engine.
    oracle_order : str
        Redex order for the oracle.
    debug : bool
        Check engine invariants while running (slow).
    trace : bool
        Keep an event trace in each report.
    """

    def __init__(self, engine="stack", relation=None, max_steps=DEFAULT_MAX_STEPS, max_states=1_000_000,
                 strategy="reduce-on-discovery", oracle_order="leftmost-outermost", debug=False, trace=False):
        self.engine = engine
        self.relation = relation
        self.max_steps = max_steps
        self.max_states = max_states
        self.strategy = strategy
        self.oracle_order = oracle_order
        self.debug = debug
        self.trace = trace

    def _relation(self) -> DependencyKind:
        if self.relation is None:
            return DependencyKind.OUTERMOST if self.engine == "stack" else DependencyKind.STANDARD
        return DependencyKind(self.relation)

    def _validate_params(self):
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        rel = self._relation()
        if self.engine == "stack" and rel != DependencyKind.OUTERMOST:
            raise ValueError("the stack engine needs relation='outermost'")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.oracle_order not in ORACLE_ORDERS:
            raise ValueError(f"oracle_order must be one of {ORACLE_ORDERS}")
        if not isinstance(self.max_steps, int) or self.max_steps < 0:
            raise ValueError("max_steps must be a non-negative integer")
        return rel

    def fit(self, X, y=None):
        """Parse ``X`` (a Trs, TRS text or path) and construct its automaton."""
        rel = self._validate_params()
        trs = check_trs(X)
        start = time.perf_counter()
        automaton: Optional[SetAutomaton] = None
        stack = None
        if self.engine != "oracle":
            automaton = construct(trs, rel, max_states=self.max_states)
            if self.engine == "stack":
                stack = StackEngine(automaton, max_steps=self.max_steps, debug=self.debug)
        self.construct_ms_ = (time.perf_counter() - start) * 1000.0
        self.trs_ = trs
        self.automaton_ = automaton
        self._stack = stack
        self.reports_: List[RunReport] = []
        return self

    def rewrite_one(self, t: Term) -> RunReport:
        check_is_fitted(self, "trs_")
        start = time.perf_counter()
        trace = [] if self.trace else None
        inspections = checks = None
        if self.engine == "stack":
            if self._stack.max_steps != self.max_steps or self._stack.debug != self.debug:
                self._stack = StackEngine(self.automaton_, max_steps=self.max_steps, debug=self.debug)
            nf, c = self._stack.rewrite(t, trace=trace)
            steps, inspections, checks = c.rewrite_steps, c.symbol_inspections, c.consistency_checks
        elif self.engine in ("reference", "reference-linear"):
            if self.engine == "reference-linear":
                bad = [r for r in self.trs_.rules if not r.linear]
                if bad:
                    raise UnsupportedRuleError(
                        f"rule {bad[0].name} ({bad[0]}) is non-linear; use the reference engine"
                    )
            session = RewriteSession(self.automaton_, t, max_steps=self.max_steps, debug=self.debug,
                                     trace=self.trace)
            nf = session.run(STRATEGIES[self.strategy])
            steps = session.rewrite_steps
            inspections, checks = session.symbol_inspections, session.consistency_checks
            trace = session.trace
        else:
            res = oracle_run(self.trs_, t, self.oracle_order, max_steps=self.max_steps)
            nf, steps = res.term, res.steps
        ms = (time.perf_counter() - start) * 1000.0
        return RunReport(format_term(t), format_term(nf), self.engine, steps, inspections, checks, ms,
                         trace, nf)

    def transform(self, X) -> List[Term]:
        """Normal forms of the terms in ``X`` (terms or term text)."""
        check_is_fitted(self, "trs_")
        terms = check_terms(X, self.trs_)
        out = []
        for t in terms:
            report = self.rewrite_one(t)
            self.reports_.append(report)
            out.append(report.result)
        return out

    def stats(self) -> dict:
        check_is_fitted(self, "trs_")
        d = {"construct_ms": self.construct_ms_}
        if self.automaton_ is not None:
            d.update(self.automaton_.stats())
        return d
