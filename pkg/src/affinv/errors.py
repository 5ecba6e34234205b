"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class DegeneracyError(ValueError):
    """Input is degenerate (rank-deficient, coplanar, all-zero)."""


class InfeasibleError(RuntimeError):
    """A construction or sampler cannot be carried out for these parameters."""


class ConvergenceError(RuntimeError):
    """An iterative method hit its iteration cap."""


class ValidityError(ValueError):
    """A closed form was evaluated outside the regime in which it holds."""


class AmbiguityError(RuntimeError):
    """A brute-force profile has more than one local optimum."""


class SolverError(RuntimeError):
    """A root or optimizer landed outside its admissible interval."""


class FormulaDegenerateError(ValueError):
    """The unit-square chord formula does not apply to this pair of points."""


class GeometryError(RuntimeError):
    """A geometric search (bracketing, clipping) failed."""
