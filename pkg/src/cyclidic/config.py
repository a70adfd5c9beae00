"""Run configuration shared by the command line and the scripts."""

from dataclasses import asdict, dataclass, field, replace
import json
import math
import os

from .elliptic import CACHE_ENV, DEFAULT_TOL as OMEGA_TOL
from .errors import ParameterError
from .geometry import DEFAULT_A, ParamsA
from .sturm import DEFAULT_ATOL, DEFAULT_RTOL, set_ode_tolerances

FORMATS = ("csv", "json")


@dataclass(frozen=True)
class Config:
    a: ParamsA = DEFAULT_A
    omega_tol: float = OMEGA_TOL
    ode_rtol: float = DEFAULT_RTOL
    ode_atol: float = DEFAULT_ATOL
    eigen_tol: float = 1e-12
    quad_order: int = 0  # 0: chosen from the truncation
    format: str = "json"
    cache: str = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not isinstance(self.a, ParamsA):
            object.__setattr__(self, "a", ParamsA.from_sequence(self.a))
        for name in ("omega_tol", "ode_rtol", "ode_atol", "eigen_tol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be a positive number, got {v!r}")
        if int(self.quad_order) < 0:
            raise ParameterError("quad_order must be nonnegative")
        if self.format not in FORMATS:
            raise ParameterError(f"format must be one of {FORMATS}, got {self.format!r}")

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = {k: data.pop(k) for k in list(data) if k in cls.__dataclass_fields__ and k != "extra"}
        return cls(**known, extra=data)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def updated(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        if "a" in changes and not isinstance(changes["a"], ParamsA):
            changes["a"] = ParamsA.from_sequence(changes["a"])
        return replace(self, **changes)

    def to_dict(self):
        d = asdict(self)
        d["a"] = list(self.a.values)
        d.pop("extra")
        return d

    def activate(self):
        """Install the process-wide settings (ODE tolerances, cache directory)."""
        set_ode_tolerances(self.ode_rtol, self.ode_atol)
        if self.cache:
            os.environ[CACHE_ENV] = str(self.cache)
        return self
