"""Exception taxonomy shared by all modules.

ValidationError marks bad inputs (rejected before any integration starts);
NumericalError marks a computation that started fine and then went bad
(NaN/Inf, norm or trace drift, positivity loss, non-convergence treated as
fatal by the caller).  The CLI maps them to exit codes 1 and 2.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class NumericalError(RuntimeError):
    """Numerical failure detected during a computation."""
