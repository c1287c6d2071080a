"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class AffpressError(Exception):
    """Base class for all library errors."""


class InputError(AffpressError):
    """Invalid input: bad shapes, out-of-range parameters, schema violations.

    CLI exit code 2.
    """


class BudgetError(AffpressError):
    """A word-enumeration request exceeded the configured budget.

    Raised instead of silently truncating. CLI exit code 3.
    """


class DegenerateError(AffpressError):
    """Numerical degeneracy: a quantity required to be positive vanished.

    CLI exit code 4.
    """
