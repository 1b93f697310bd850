"""Exception hierarchy shared by every module of the package."""


class RewriteError(Exception):
    """Base class for all domain errors (CLI exit code 1)."""


class TermError(RewriteError):
    pass


class ArityError(TermError):
    pass


class PositionError(TermError):
    """A position is not in the domain of the term it is applied to."""


class SubstitutionError(TermError):
    pass


class ParseError(RewriteError):
    def __init__(self, message, line=None, col=None):
        self.message = message
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f"line {line}"
            if col is not None:
                where += f", col {col}"
            where += ": "
        super().__init__(where + message)


class TrsError(RewriteError):
    pass


class ConstructionError(RewriteError):
    """Automaton construction exceeded its state budget."""


class StepLimitError(RewriteError):
    def __init__(self, limit, term=None):
        self.limit = limit
        self.term = term
        super().__init__(f"step limit of {limit} rewrite steps exhausted")


class UnsupportedRuleError(RewriteError):
    pass


class NoSuchBudError(RewriteError):
    pass


class InternalInconsistencyError(Exception):
    """An engine invariant was violated (CLI exit code 3)."""
