"""Rewrite rules, the TRS file format, and non-linear matching predicates."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .errors import ParseError, TrsError
from .terms import (
    Position,
    Symbol,
    Term,
    TermPool,
    format_term,
    iter_positions,
    parse_term,
    subterm_at,
)

VariablePartition = Tuple[FrozenSet[Position], ...]


@dataclass(frozen=True, eq=False)
class Rule:
    id: int
    lhs: Term
    rhs: Term

    @property
    def linear(self) -> bool:
        return is_linear(self.lhs)

    @property
    def name(self) -> str:
        return f"R{self.id + 1}"

    def __str__(self):
        return f"{format_term(self.lhs)} -> {format_term(self.rhs)}"

    def __repr__(self):
        return f"<{self.name}: {self}>"


@dataclass(eq=False)
class Trs:
    symbols: Dict[str, Symbol]
    variables: FrozenSet[str]
    rules: List[Rule]
    pool: TermPool = field(default_factory=TermPool)

    @property
    def alphabet(self) -> List[Symbol]:
        return list(self.symbols.values())

    @property
    def linear(self) -> bool:
        return all(r.linear for r in self.rules)

    def parse_term(self, text: str, *, allow_variables: bool = False) -> Term:
        return parse_term(text, self.pool, self.symbols, self.variables if allow_variables else ())

    def patterns(self) -> List[Term]:
        """Distinct left-hand sides in rule order."""
        seen = {}
        for r in self.rules:
            seen.setdefault(r.lhs, None)
        return list(seen)

    def to_text(self) -> str:
        lines = ["symbols: " + " ".join(str(s) for s in self.symbols.values())]
        lines.append("vars: " + " ".join(sorted(self.variables)))
        lines.append("rules:")
        lines.extend(str(r) for r in self.rules)
        return "\n".join(lines) + "\n"


def make_trs(
    symbols: Sequence[Symbol],
    rules: Sequence[Tuple[Term, Term]],
    variables: Sequence[str] = (),
    pool: Optional[TermPool] = None,
) -> Trs:
    """Build and validate a TRS from already constructed terms."""
    trs = Trs({s.name: s for s in symbols}, frozenset(variables), [], TermPool() if pool is None else pool)
    if not rules:
        raise TrsError("a TRS needs at least one rule")
    for lhs, rhs in rules:
        _check_rule(lhs, rhs)
        trs.rules.append(Rule(len(trs.rules), lhs, rhs))
    return trs


def _check_rule(lhs: Term, rhs: Term, line=None):
    if lhs.is_var:
        raise TrsError(_at(line, "left-hand side must not be a variable"))
    fresh = {v.name for _, v in iter_positions(rhs) if v.is_var} - {
        v.name for _, v in iter_positions(lhs) if v.is_var
    }
    if fresh:
        raise TrsError(_at(line, f"right-hand side has fresh variables: {', '.join(sorted(fresh))}"))


def _at(line, msg):
    return f"line {line}: {msg}" if line is not None else msg


def _strip_comment(line: str) -> str:
    k = line.find("#")
    return line if k < 0 else line[:k]


def parse_trs(text: str, pool: Optional[TermPool] = None) -> Trs:
    """Parse the ``symbols:`` / ``vars:`` / ``rules:`` file format."""
    pool = TermPool() if pool is None else pool
    lines = [(n, _strip_comment(raw).strip()) for n, raw in enumerate(text.splitlines(), 1)]
    lines = [(n, l) for n, l in lines if l]
    sections = ["symbols:", "vars:", "rules:"]
    symbols: Dict[str, Symbol] = {}
    variables: set = set()
    rule_lines: List[Tuple[int, str]] = []
    stage = -1
    for n, l in lines:
        head = next((s for s in sections if l.startswith(s)), None)
        if head is not None:
            k = sections.index(head)
            if k != stage + 1:
                raise ParseError(f"section {head!r} out of order", n, 1)
            stage = k
            rest = l[len(head):].strip()
            if k == 2:
                if rest:
                    rule_lines.append((n, rest))
                continue
            for item in rest.split():
                if k == 0:
                    name, sep, ar = item.rpartition(":")
                    if not sep or not name or not ar.isdigit():
                        raise ParseError(f"malformed symbol declaration {item!r}", n)
                    sym = Symbol(name, int(ar))
                    if name in symbols and symbols[name] != sym:
                        raise TrsError(f"line {n}: symbol {name} declared with two arities")
                    symbols[name] = sym
                else:
                    if item in symbols:
                        raise TrsError(f"line {n}: {item} declared both as symbol and variable")
                    variables.add(item)
            continue
        if stage == 2:
            rule_lines.append((n, l))
        elif stage in (0, 1):
            # continuation of a declaration line
            raise ParseError(f"unexpected line in {sections[stage]} section", n, 1)
        else:
            raise ParseError("expected 'symbols:' section", n, 1)
    if stage != 2:
        raise ParseError("missing 'rules:' section")
    if not rule_lines:
        raise TrsError("empty rules section: a TRS needs at least one rule")
    trs = Trs(symbols, frozenset(variables), [], pool)
    for n, l in rule_lines:
        lhs_text, arrow, rhs_text = l.partition("->")
        if not arrow:
            raise ParseError("expected 'lhs -> rhs'", n, 1)
        lhs = parse_term(lhs_text, pool, symbols, variables, line=n)
        rhs = parse_term(rhs_text, pool, symbols, variables, line=n)
        _check_rule(lhs, rhs, n)
        trs.rules.append(Rule(len(trs.rules), lhs, rhs))
    return trs


def is_linear(pattern: Term) -> bool:
    names = [u for _, u in iter_positions(pattern) if u.is_var]
    return len(names) == len(set(names))


def variable_partition(pattern: Term) -> VariablePartition:
    """Group the variable positions of ``pattern`` by variable."""
    groups: Dict[Term, List[Position]] = {}
    for p, u in iter_positions(pattern):
        if u.is_var:
            groups.setdefault(u, []).append(p)
    return tuple(frozenset(ps) for ps in groups.values())


def repeated_classes(partition: VariablePartition) -> VariablePartition:
    return tuple(P for P in partition if len(P) >= 2)


def is_consistent(t: Term, partition: VariablePartition) -> bool:
    for P in partition:
        if len(P) < 2:
            continue
        it = iter(P)
        first = subterm_at(t, next(it))
        for q in it:
            if subterm_at(t, q) is not first:
                return False
    return True


def pre_matches(t: Term, pattern: Term) -> bool:
    """Heads of ``t`` agree with ``pattern`` on its non-variable positions."""
    stack = [(pattern, t)]
    while stack:
        l, u = stack.pop()
        if l.is_var:
            continue
        if l.symbol != u.symbol:
            return False
        stack.extend(zip(l.args, u.args))
    return True


def is_duplicating(rule: Rule) -> bool:
    """Some variable occurs more often in the rhs than in the lhs."""
    lhs = Counter(u for _, u in iter_positions(rule.lhs) if u.is_var)
    rhs = Counter(u for _, u in iter_positions(rule.rhs) if u.is_var)
    return any(n > lhs[v] for v, n in rhs.items())
