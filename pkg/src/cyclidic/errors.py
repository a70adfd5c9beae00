"""Exception hierarchy shared by all modules."""


class CyclideError(Exception):
    """Base class for every error raised by this package."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class ParameterError(CyclideError, ValueError):
    code = "parameter"


class DomainError(CyclideError, ValueError):
    code = "domain"


class DegenerateInputError(CyclideError, ValueError):
    code = "degenerate-input"


class BoundaryCoordinateError(CyclideError, ValueError):
    code = "boundary-coordinate"


class PoleError(CyclideError, ValueError):
    code = "pole"


class SingularError(CyclideError, ValueError):
    code = "singular"


class TrivialSolutionError(CyclideError, ValueError):
    code = "trivial-solution"


class NumericalError(CyclideError, ArithmeticError):
    """Numerical failure; ``diagnostics`` carries whatever state helps debugging."""

    code = "numerical"

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def to_dict(self):
        out = super().to_dict()
        out["diagnostics"] = {k: _jsonable(v) for k, v in self.diagnostics.items()}
        return out


class AccuracyError(NumericalError):
    code = "accuracy"


class SearchError(NumericalError):
    code = "search"


class ConvergenceError(NumericalError):
    code = "convergence"


class IllConditionedError(NumericalError):
    code = "ill-conditioned"


class PartialResultError(NumericalError):
    code = "partial-result"


def _jsonable(v):
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    try:
        return float(v)
    except (TypeError, ValueError):
        return str(v)
