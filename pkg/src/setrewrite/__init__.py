"""Term rewriting with set automata.

Quick start::

    from setrewrite import SetAutomatonRewriter
    est = SetAutomatonRewriter().fit("rules.trs")
    [nf] = est.transform(["if(not(not(true)),false,true)"])
"""

from .automaton import DependencyKind, SetAutomaton, construct, export_dot
from .engine import EngineCounters, StackEngine, constant_time_prune_support, is_duplicating, rewrite_outermost
from .errors import (
    ArityError,
    ConstructionError,
    InternalInconsistencyError,
    NoSuchBudError,
    ParseError,
    PositionError,
    RewriteError,
    StepLimitError,
    SubstitutionError,
    TermError,
    TrsError,
    UnsupportedRuleError,
)
from .estimator import RunReport, SetAutomatonRewriter, check_terms, check_trs
from .matcher import Bud, Node, Redex, completed, evaluate, grow, is_fragment, prune
from .rewriter import (
    RewriteSession,
    brute_force_redexes,
    is_normal_form,
    normalize,
    normalize_nonlinear,
    oracle_normalize,
)
from .terms import Symbol, Term, TermPool, format_term, parse_term
from .trs import Rule, Trs, make_trs, parse_trs

__version__ = "0.1.0"

__all__ = [
    "ArityError", "Bud", "ConstructionError", "DependencyKind", "EngineCounters",
    "InternalInconsistencyError", "NoSuchBudError", "Node", "ParseError", "PositionError",
    "Redex", "RewriteError", "RewriteSession", "Rule", "RunReport", "SetAutomaton",
    "SetAutomatonRewriter", "StackEngine", "StepLimitError", "SubstitutionError", "Symbol",
    "Term", "TermError", "TermPool", "Trs", "TrsError", "UnsupportedRuleError",
    "brute_force_redexes", "check_terms", "check_trs", "completed", "constant_time_prune_support",
    "construct", "evaluate", "export_dot", "format_term", "grow", "is_duplicating", "is_fragment",
    "is_normal_form", "make_trs", "normalize", "normalize_nonlinear", "oracle_normalize",
    "parse_term", "parse_trs", "prune", "rewrite_outermost",
]
