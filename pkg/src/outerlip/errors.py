"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain of the requested map."""


class AccuracyError(RuntimeError):
    """A quadrature or extremal estimate missed its tolerance at maximum refinement."""


class DivergenceError(ArithmeticError):
    """A truncation sequence failed the Cauchy-increment test.

    Raised only where a finite value is required (boundary phase, A_h);
    estimators that can legitimately diverge report a ``divergent`` flag instead.
    """


class MarginError(ValueError):
    """Boundary phase requested inside the exclusion margin around the zero set."""


class ConfigError(ValueError):
    """Malformed configuration, CLI spec string or input file."""
