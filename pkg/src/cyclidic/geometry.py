"""Five-cyclide coordinates on R^3 and the sphero-conal/stereographic maps behind them.

All point-valued functions are vectorised over leading axes: a point array has
shape ``(..., 3)`` (or ``(..., k+1)`` for sphero-conal coordinates).
"""

from dataclasses import dataclass
import itertools
import json

import numpy as np

from .errors import (
    AccuracyError,
    BoundaryCoordinateError,
    DegenerateInputError,
    DomainError,
    ParameterError,
    PoleError,
    SingularError,
)

DEGENERACY_TOL = 1e-12
CLAMP_TOL = 1e-13


@dataclass(frozen=True)
class ParamsA:
    """Focal parameters a0 < a1 < a2 < a3 of the confocal family."""

    a0: float = 0.0
    a1: float = 1.0
    a2: float = 2.0
    a3: float = 3.0

    def __post_init__(self):
        vals = (self.a0, self.a1, self.a2, self.a3)
        if not all(np.isfinite(v) for v in vals):
            raise ParameterError(f"focal parameters must be finite, got {vals}")
        if not (self.a0 < self.a1 < self.a2 < self.a3):
            raise ParameterError(f"focal parameters must be strictly increasing, got {vals}")

    @classmethod
    def from_sequence(cls, values):
        values = [float(v) for v in values]
        if len(values) != 4:
            raise ParameterError(f"expected four focal parameters, got {len(values)}")
        return cls(*values)

    @classmethod
    def from_json(cls, source):
        """Read ``{"a": [a0, a1, a2, a3]}`` from a dict, JSON text or file path."""
        if isinstance(source, dict):
            data = source
        else:
            try:
                data = json.loads(source)
            except (TypeError, ValueError):
                with open(source) as fh:
                    data = json.load(fh)
        if "a" not in data:
            raise ParameterError("config has no 'a' entry")
        return cls.from_sequence(data["a"])

    def to_json(self):
        return json.dumps({"a": list(self.values)})

    @property
    def values(self):
        return (self.a0, self.a1, self.a2, self.a3)

    @property
    def array(self):
        return np.array(self.values)

    def interval(self, i):
        """Closed interval [a_{i-1}, a_i] of coordinate s_i, i = 1, 2, 3."""
        if i not in (1, 2, 3):
            raise ParameterError(f"coordinate index must be 1, 2 or 3, got {i}")
        return self.values[i - 1], self.values[i]

    @property
    def scale(self):
        return self.a3 - self.a0


DEFAULT_A = ParamsA()


def _as_params(a):
    if isinstance(a, ParamsA):
        return a
    return ParamsA.from_sequence(a)


def _increasing(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise ParameterError("need at least two focal parameters")
    if not np.all(np.diff(a) > 0):
        raise ParameterError(f"focal parameters must be strictly increasing, got {a.tolist()}")
    return a


# ---------------------------------------------------------------------------
# secular equation  sum_j c_j / (s - a_j) = 0

def _secular_roots(c, a):
    """Roots of sum_j c_j/(s - a_j) = 0 for c_j >= 0, one in each [a_i, a_{i+1}].

    The roots are the eigenvalues of diag(a) compressed to the hyperplane
    orthogonal to sqrt(c); this is well defined (and continuous) even when some
    c_j vanish.  Each root is then polished by Newton's method on the cleared
    polynomial written in offsets from its nearest endpoint, so that small
    distances to the endpoints carry full relative accuracy.

    Returns ``(s, lo, hi)`` with ``lo = s - a_i`` and ``hi = a_{i+1} - s``.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    m = a.size
    shape = c.shape[:-1]
    c = c.reshape(-1, m)
    norm = np.sqrt(np.sum(c, axis=1))
    if np.any(norm == 0):
        raise DegenerateInputError("all coefficients of the secular equation vanish")
    z = np.sqrt(c) / norm[:, None]
    piv = np.argmax(z, axis=1)
    rows = np.arange(z.shape[0])
    v = z.copy()
    v[rows, piv] += 1.0
    vv = np.sum(v * v, axis=1)
    house = np.eye(m)[None, :, :] - 2.0 * v[:, :, None] * v[:, None, :] / vv[:, None, None]
    keep = np.ones((z.shape[0], m), dtype=bool)
    keep[rows, piv] = False
    basis = house.transpose(0, 2, 1)[keep].reshape(z.shape[0], m - 1, m)  # rows span z-perp
    comp = np.einsum("nik,k,njk->nij", basis, a, basis)
    s = np.linalg.eigvalsh(comp)
    s = np.clip(s, a[:-1], a[1:])
    s, lo, hi = _polish(c, a, s)
    return s.reshape(shape + (m - 1,)), lo.reshape(shape + (m - 1,)), hi.reshape(shape + (m - 1,))


def _poly_and_slope(c, factors):
    """P = sum_j c_j prod_{k!=j} F_k and dP/ds, for factor arrays F_k = s - a_k."""
    m = len(factors)
    p = 0.0
    dp = 0.0
    for j in range(m):
        others = [factors[k] for k in range(m) if k != j]
        p = p + c[:, j] * np.prod(others, axis=0)
        for q in range(len(others)):
            rest = [others[r] for r in range(len(others)) if r != q]
            dp = dp + c[:, j] * (np.prod(rest, axis=0) if rest else 1.0)
    return p, dp


def _polish(c, a, s0):
    m = a.size
    s = s0.copy()
    lo = s - a[:-1]
    hi = a[1:] - s
    for i in range(m - 1):
        left = lo[:, i] <= hi[:, i]
        for side, mask in ((i, left), (i + 1, ~left)):
            if not np.any(mask):
                continue
            cc = c[mask]
            delta = (s[mask, i] - a[side]).copy()
            span = (a[i] - a[side], a[i + 1] - a[side])

            def resid(dl):
                factors = [a[side] - a[k] + dl if k != side else dl for k in range(m)]
                return _poly_and_slope(cc, factors)

            p, dp = resid(delta)
            for _ in range(6):
                with np.errstate(divide="ignore", invalid="ignore"):
                    step = np.where(dp != 0, p / dp, 0.0)
                # clip rather than reject: a root sitting on an endpoint is often overshot by rounding
                trial = np.clip(delta - step, min(span), max(span))
                ok = np.isfinite(trial)
                pt, dpt = resid(np.where(ok, trial, delta))
                better = ok & (np.abs(pt) <= np.abs(p))
                delta = np.where(better, trial, delta)
                p = np.where(better, pt, p)
                dp = np.where(better, dpt, dp)
                if not np.any(better):
                    break
            if side == i:
                lo[mask, i] = delta
                hi[mask, i] = (a[i + 1] - a[i]) - delta
                s[mask, i] = a[i] + delta
            else:
                hi[mask, i] = -delta
                lo[mask, i] = (a[i + 1] - a[i]) + delta
                s[mask, i] = a[i + 1] + delta
    return s, lo, hi


# ---------------------------------------------------------------------------
# sphero-conal coordinates

def sphero_conal_forward(x, a):
    """(r, s_1..s_k) of points in the open positive cone of R^{k+1}."""
    a = _increasing(a)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != a.size:
        raise ParameterError(f"point dimension {x.shape[-1]} does not match {a.size} parameters")
    if np.any(x <= 0):
        raise DegenerateInputError("sphero-conal coordinates need a point in the open positive cone")
    r = np.sqrt(np.sum(x * x, axis=-1))
    s, _, _ = _secular_roots(x * x, a)
    return r, s


def sphero_conal_inverse(r, s, a):
    """Positive-cone point with sphero-conal coordinates (r, s)."""
    a = _increasing(a)
    s = np.asarray(s, dtype=float)
    r = np.asarray(r, dtype=float)
    k = a.size - 1
    if s.shape[-1] != k:
        raise ParameterError(f"expected {k} angular coordinates, got {s.shape[-1]}")
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    if np.any(s <= a[:-1]) or np.any(s >= a[1:]):
        raise DomainError("need a_{i-1} < s_i < a_i")
    sq = _squares_from_offsets(s[..., None, :] - a[:, None], a)
    return r[..., None] * np.sqrt(sq)


def sphero_conal(value, a, direction="forward"):
    """Forward: point -> (r, s). Inverse: (r, s) -> point."""
    if direction == "forward":
        return sphero_conal_forward(value, a)
    if direction == "inverse":
        r, s = value
        return sphero_conal_inverse(r, s, a)
    raise ParameterError(f"unknown direction {direction!r}")


def _squares_from_offsets(offsets, a):
    """x_j^2 = prod_i (s_i - a_j) / prod_{i != j} (a_i - a_j) on the unit sphere.

    ``offsets[..., j, i]`` holds s_i - a_j, so callers can supply accurate
    small differences near the interval endpoints.
    """
    a = np.asarray(a, dtype=float)
    diff = a[None, :] - a[:, None]  # [j, i] = a_i - a_j
    np.fill_diagonal(diff, 1.0)
    denom = np.prod(diff, axis=1)
    return np.prod(offsets, axis=-1) / denom


def sphero_conal_scale_factors(x, a):
    """Both expressions for H_{s_i}^2: the sum form and the product form."""
    a = _increasing(a)
    x = np.asarray(x, dtype=float)
    r, s = sphero_conal_forward(x, a)
    x2 = x * x
    sum_form = 0.25 * np.sum(x2[..., None, :] / (s[..., :, None] - a) ** 2, axis=-1)
    k = s.shape[-1]
    prod_form = np.empty_like(sum_form)
    for i in range(k):
        num = np.ones_like(r)
        for j in range(k):
            if j != i:
                num = num * (s[..., i] - s[..., j])
        den = np.prod(s[..., i, None] - a, axis=-1)
        prod_form[..., i] = -0.25 * r * r * num / den
    return sum_form, prod_form


# ---------------------------------------------------------------------------
# stereographic projection

def stereographic_project(p):
    """P(x0, x1, x2, x3) = (x1, x2, x3) / (1 - x0) for points of S^3."""
    p = np.asarray(p, dtype=float)
    norm = np.sqrt(np.sum(p * p, axis=-1))
    if np.any(np.abs(norm - 1.0) > 1e-9):
        raise DomainError("stereographic projection needs points on the unit sphere S^3")
    den = 1.0 - p[..., 0]
    if np.any(den <= 0):
        raise PoleError("cannot project the pole (1, 0, 0, 0)")
    return p[..., 1:] / den[..., None]


def stereographic_invert(q):
    """P^{-1}(x, y, z) = (rho^2 - 1, 2x, 2y, 2z) / (rho^2 + 1)."""
    q = np.asarray(q, dtype=float)
    rho2 = np.sum(q * q, axis=-1)
    out = np.concatenate([(rho2 - 1.0)[..., None], 2.0 * q], axis=-1)
    return out / (rho2 + 1.0)[..., None]


def stereographic(p, direction="project"):
    if direction == "project":
        return stereographic_project(p)
    if direction == "invert":
        return stereographic_invert(p)
    raise ParameterError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------------------
# five-cyclide coordinates

def cubic_coefficients(p):
    """Weights (rho^2-1)^2, 4x^2, 4y^2, 4z^2 of the confocal family at p."""
    p = np.asarray(p, dtype=float)
    rho2 = np.sum(p * p, axis=-1)
    return np.stack([(rho2 - 1.0) ** 2, 4 * p[..., 0] ** 2, 4 * p[..., 1] ** 2, 4 * p[..., 2] ** 2], axis=-1)


def cyclide_gaps(p, a=DEFAULT_A):
    """Coordinates s and their offsets to both ends of their intervals.

    Returns ``(s, lo, hi)`` with ``lo_i = s_i - a_{i-1}`` and ``hi_i = a_i - s_i``;
    whichever offset is smaller is computed with full relative accuracy.
    """
    a = _as_params(a)
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise DomainError("point coordinates must be finite")
    return _secular_roots(cubic_coefficients(p), a.array)


def to_cyclide(p, a=DEFAULT_A):
    """Five-cyclide coordinates (s1, s2, s3) of points p, sorted s1 <= s2 <= s3."""
    return cyclide_gaps(p, a)[0]


@dataclass(frozen=True)
class SignProfile:
    """Which of the 16 points with given coordinates: octant signs and ball side."""

    eps: tuple = (1, 1, 1)
    inside: bool = True

    def __post_init__(self):
        if len(self.eps) != 3 or any(e not in (1, -1) for e in self.eps):
            raise ParameterError(f"octant signs must be three of +1/-1, got {self.eps}")

    @property
    def word(self):
        """Exponents (e0, e1, e2, e3) of sigma_0..sigma_3 mapping the positive representative here."""
        return (0 if self.inside else 1,) + tuple(0 if e > 0 else 1 for e in self.eps)

    @property
    def sheet_id(self):
        e0, e1, e2, e3 = self.word
        return 8 * e0 + 4 * e3 + 2 * e2 + e1

    @classmethod
    def from_word(cls, word):
        e0, e1, e2, e3 = word
        return cls(eps=(1 - 2 * e1, 1 - 2 * e2, 1 - 2 * e3), inside=not e0)

    @classmethod
    def parse(cls, text, inv="inside"):
        signs = tuple(1 if ch == "+" else -1 if ch == "-" else None for ch in text)
        if len(signs) != 3 or None in signs:
            raise ParameterError(f"sign text must look like '+-+', got {text!r}")
        if inv not in ("inside", "outside"):
            raise ParameterError(f"inv must be 'inside' or 'outside', got {inv!r}")
        return cls(eps=signs, inside=inv == "inside")


def all_sign_profiles():
    return [SignProfile.from_word(w) for w in itertools.product((0, 1), repeat=4)]


def _cartesian(s, lo, hi, a, profile):
    """Point with coordinates s (closed intervals allowed) and the given sign profile."""
    av = _as_params(a).array
    s = np.asarray(s, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    offsets = s[..., None, :] - av[:, None]  # [..., j, i] = s_i - a_j
    for i in range(3):
        offsets[..., i, i] = lo[..., i]
        offsets[..., i + 1, i] = -hi[..., i]
    sq = _squares_from_offsets(offsets, av)
    if np.any(sq < -CLAMP_TOL):
        raise DegenerateInputError("coordinates do not correspond to a point (negative square)")
    sq = np.maximum(sq, 0.0)
    x0 = -np.sqrt(sq[..., 0])
    q = np.sqrt(sq[..., 1:]) / (1.0 - x0)[..., None]
    if not profile.inside:
        q = q / np.sum(q * q, axis=-1)[..., None]
    return q * np.asarray(profile.eps, dtype=float)


def from_cyclide(c, signs=SignProfile(), a=DEFAULT_A):
    """Point of R^3 with five-cyclide coordinates c selected by a sign profile."""
    a = _as_params(a)
    c = np.asarray(c, dtype=float)
    av = a.array
    lo = c - av[:-1]
    hi = av[1:] - c
    if np.any(lo <= 0) or np.any(hi <= 0):
        raise BoundaryCoordinateError(
            "coordinates must lie strictly inside (a_{i-1}, a_i); the preimage is ambiguous on the boundary"
        )
    return _cartesian(c, lo, hi, a, signs)


def apply_symmetry(i, p):
    """sigma_0 = inversion in the unit sphere; sigma_1..3 = coordinate-plane reflections."""
    p = np.asarray(p, dtype=float)
    if i == 0:
        rho2 = np.sum(p * p, axis=-1)
        if np.any(rho2 == 0):
            raise SingularError("inversion is undefined at the origin")
        return p / rho2[..., None]
    if i in (1, 2, 3):
        out = p.copy()
        out[..., i - 1] = -out[..., i - 1]
        return out
    raise ParameterError(f"symmetry index must be 0..3, got {i}")


def apply_word(word, p):
    """Apply sigma_0^e0 sigma_1^e1 sigma_2^e2 sigma_3^e3 (the generators commute)."""
    out = np.asarray(p, dtype=float)
    for i, e in enumerate(word):
        if e:
            out = apply_symmetry(i, out)
    return out


def _scaling_sum(p, s, a):
    """h^2 = (1/16)[(rho^2-1)^2/(s-a0)^2 + 4x^2/(s-a1)^2 + 4y^2/(s-a2)^2 + 4z^2/(s-a3)^2]."""
    av = _as_params(a).array
    c = cubic_coefficients(p)
    return np.sum(c / (np.asarray(s)[..., None] - av) ** 2, axis=-1) / 16.0


def scale_factor_at(p, s, a=DEFAULT_A):
    """Scale factor of the coordinate surface through p at coordinate value s."""
    return np.sqrt(_scaling_sum(p, s, a))


def _scaling_product(rho2, s, a):
    av = _as_params(a).array
    s1, s2, s3 = s[..., 0], s[..., 1], s[..., 2]
    k = (rho2 + 1.0) ** 2 / 16.0
    h1 = k * (s3 - s1) * (s2 - s1) / ((s1 - av[0]) * (av[1] - s1) * (av[2] - s1) * (av[3] - s1))
    h2 = k * (s2 - s1) * (s3 - s2) / ((s2 - av[0]) * (s2 - av[1]) * (av[2] - s2) * (av[3] - s2))
    h3 = k * (s3 - s1) * (s3 - s2) / ((s3 - av[0]) * (s3 - av[1]) * (s3 - av[2]) * (av[3] - s3))
    return np.stack([h1, h2, h3], axis=-1)


def scale_factors_both(p, a=DEFAULT_A):
    """Scale factors from the sum form and from the product form, as two arrays."""
    a = _as_params(a)
    p = np.asarray(p, dtype=float)
    s, lo, hi = cyclide_gaps(p, a)
    tol = DEGENERACY_TOL * a.scale
    if np.any(np.diff(s, axis=-1) < tol):
        raise DegenerateInputError("coincident coordinates (point on A1 or A2)")
    if np.any(lo < tol) or np.any(hi < tol):
        raise DegenerateInputError("a coordinate sits at an interval endpoint (symmetry set)")
    sum_form = np.sqrt(np.stack([_scaling_sum(p, s[..., i], a) for i in range(3)], axis=-1))
    rho2 = np.sum(p * p, axis=-1)
    prod_form = np.sqrt(_scaling_product(rho2, s, a))
    return sum_form, prod_form


def scale_factors(p, a=DEFAULT_A, rtol=1e-8):
    """(h1, h2, h3) at p; both closed forms are evaluated and must agree."""
    sum_form, prod_form = scale_factors_both(p, a)
    rel = np.max(np.abs(sum_form - prod_form) / prod_form)
    if rel > rtol:
        raise AccuracyError("scale-factor formulas disagree", relative_difference=rel)
    return prod_form


# ---------------------------------------------------------------------------
# regions

REGION_KINDS = ("first", "second", "third")


@dataclass(frozen=True)
class RegionSpec:
    """Region bounded by the coordinate surface s_k = d, k = 1, 2, 3 for first/second/third."""

    kind: str
    d: float

    def __post_init__(self):
        kind = str(self.kind).lower()
        aliases = {"i": "first", "1": "first", "ii": "second", "2": "second", "iii": "third", "3": "third"}
        kind = aliases.get(kind, kind)
        if kind not in REGION_KINDS:
            raise ParameterError(f"region kind must be one of {REGION_KINDS}, got {self.kind!r}")
        object.__setattr__(self, "kind", kind)

    @property
    def index(self):
        """Index i of the coordinate s_i held fixed on the boundary."""
        return REGION_KINDS.index(self.kind) + 1

    def validate(self, a=DEFAULT_A):
        lo, hi = _as_params(a).interval(self.index)
        if not lo < self.d < hi:
            raise ParameterError(f"{self.kind} region needs d in ({lo}, {hi}), got {self.d}")
        return self


def region_contains(region, p, a=DEFAULT_A):
    """Open-region membership: boundary points are outside."""
    region.validate(a)
    p = np.asarray(p, dtype=float)
    s = to_cyclide(p, a)
    if region.kind == "first":
        return (np.sum(p * p, axis=-1) < 1.0) & (s[..., 0] > region.d)
    if region.kind == "second":
        return s[..., 1] < region.d
    return (p[..., 2] > 0) & (s[..., 2] < region.d)


def surface_residual(p, d, a=DEFAULT_A):
    """Relative residual of the cleared surface equation at coordinate value d."""
    av = _as_params(a).array
    c = cubic_coefficients(p)
    terms = np.stack(
        [c[..., j] * np.prod([d - av[k] for k in range(4) if k != j]) for j in range(4)], axis=-1
    )
    scale = np.sum(np.abs(terms), axis=-1)
    return np.abs(np.sum(terms, axis=-1)) / np.where(scale > 0, scale, 1.0)


# ---------------------------------------------------------------------------
# coordinate-surface meshes

@dataclass
class SurfaceMesh:
    """Grid sheets of the coordinate surface s_i = d.

    ``points[k]`` is the ``(n_u, n_v, 3)`` grid of sheet ``profiles[k]``;
    ``components[k]`` labels the connected component the sheet belongs to.
    """

    index: int
    d: float
    points: np.ndarray
    profiles: list
    components: list

    @property
    def sheet_ids(self):
        return [pr.sheet_id for pr in self.profiles]


def surface_mesh(i, d, resolution=(24, 24), a=DEFAULT_A):
    """Mesh the coordinate surface s_i = d over all 16 sign sheets.

    The other two coordinates run over a uniform grid in an angle theta with
    s = a_lo + (a_hi - a_lo) sin^2(theta), which spaces points evenly near the
    symmetry planes.  Sheets are left unstitched.
    """
    a = _as_params(a)
    lo_i, hi_i = a.interval(i)
    if not lo_i < d < hi_i:
        raise DegenerateInputError(f"surface s_{i} = d needs d strictly inside ({lo_i}, {hi_i})")
    nu, nv = resolution
    if nu < 2 or nv < 2:
        raise ParameterError("resolution must be at least 2 x 2")
    others = [j for j in (1, 2, 3) if j != i]
    grids = []
    for j, n in zip(others, (nu, nv)):
        alo, ahi = a.interval(j)
        theta = np.linspace(0.0, 0.5 * np.pi, n)
        width = ahi - alo
        grids.append((alo + width * np.sin(theta) ** 2, width * np.sin(theta) ** 2, width * np.cos(theta) ** 2))
    (su, lu, hu), (sv, lv, hv) = grids
    shape = (nu, nv)
    s = np.empty(shape + (3,))
    lo = np.empty(shape + (3,))
    hi = np.empty(shape + (3,))
    s[..., i - 1], lo[..., i - 1], hi[..., i - 1] = d, d - lo_i, hi_i - d
    for j, (sg, lg, hg), ax in ((others[0], grids[0], 0), (others[1], grids[1], 1)):
        bshape = (nu, 1) if ax == 0 else (1, nv)
        s[..., j - 1] = np.broadcast_to(sg.reshape(bshape), shape)
        lo[..., j - 1] = np.broadcast_to(lg.reshape(bshape), shape)
        hi[..., j - 1] = np.broadcast_to(hg.reshape(bshape), shape)
    profiles = all_sign_profiles()
    pts = np.stack([_cartesian(s, lo, hi, a, pr) for pr in profiles])
    if i == 1:
        components = [0 if pr.inside else 1 for pr in profiles]
    elif i == 3:
        components = [0 if pr.eps[2] > 0 else 1 for pr in profiles]
    else:
        components = [0] * len(profiles)
    return SurfaceMesh(index=i, d=d, points=pts, profiles=profiles, components=components)


def mesh_to_csv(mesh):
    """CSV text with columns x,y,z,sheet."""
    lines = ["x,y,z,sheet"]
    for pr, grid in zip(mesh.profiles, mesh.points):
        for x, y, z in grid.reshape(-1, 3):
            lines.append(f"{x:.17g},{y:.17g},{z:.17g},{pr.sheet_id}")
    return "\n".join(lines) + "\n"


def mesh_to_triangles(mesh, digits=10):
    """Indexed-triangle text; coincident vertices along sheet seams are merged.

    Format: ``vertices N`` followed by N lines ``x y z``, then ``triangles M``
    followed by M lines of three zero-based vertex indices.
    """
    index = {}
    verts = []
    tris = []

    def vid(pt):
        key = tuple(np.round(pt, digits) + 0.0)
        if key not in index:
            index[key] = len(verts)
            verts.append(pt)
        return index[key]

    for grid in mesh.points:
        nu, nv = grid.shape[:2]
        ids = [[vid(grid[u, v]) for v in range(nv)] for u in range(nu)]
        for u in range(nu - 1):
            for v in range(nv - 1):
                a_, b_, c_, d_ = ids[u][v], ids[u + 1][v], ids[u + 1][v + 1], ids[u][v + 1]
                for tri in ((a_, b_, c_), (a_, c_, d_)):
                    if len(set(tri)) == 3:
                        tris.append(tri)
    out = [f"vertices {len(verts)}"]
    out += [f"{x:.17g} {y:.17g} {z:.17g}" for x, y, z in verts]
    out.append(f"triangles {len(tris)}")
    out += [f"{i} {j} {k}" for i, j, k in tris]
    return "\n".join(out) + "\n"
