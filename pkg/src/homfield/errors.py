"""Exception hierarchy.

Everything a caller can trigger by handing in inputs that violate a stated
precondition derives from :class:`PreconditionError`; the CLI maps those to
exit status 2.
"""


class PreconditionError(ValueError):
    """An input violates a documented precondition."""


class GridError(PreconditionError):
    pass


class DivisionError(PreconditionError):
    """Division by a function that vanishes on the grid (condition C2 fails)."""


class DegenerateError(PreconditionError):
    """A function that must have isolated zeros vanishes identically (C1 fails)."""


class FieldError(PreconditionError):
    pass


class AmbiguousError(PreconditionError):
    """A numerical classification sits too close to a decision threshold."""


class ResonanceError(PreconditionError):
    pass


class IndexConditionError(PreconditionError):
    pass


class InconclusiveError(PreconditionError):
    pass


class ConvergenceError(RuntimeError):
    """A resolution-doubling or refinement check disagreed with itself."""
