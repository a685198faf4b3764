"""Exception taxonomy shared across the package.

Validation problems raise ValueError; numerical breakdowns (diverging
steppers, singular solves, non-convergent quadrature) raise NumericError so
the CLI can map them to a distinct exit code.
"""


class NumericError(RuntimeError):
    """A numerical procedure failed (instability, singular system, ...)."""
