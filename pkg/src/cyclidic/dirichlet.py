"""Dirichlet problems on the three cyclidic regions by separation of variables.

Region kinds (d fixed in the interval of the held coordinate):

* first:  inside the unit ball with s1 > d; boundary s1 = d, 8 sheets
* second: s2 < d (a ring); boundary s2 = d, 16 sheets
* third:  z > 0 with s3 < d; boundary s3 = d on z > 0, 8 sheets

Boundary data e enters through f = (rho^2 + 1)^{1/2} e.  On the boundary the
two free coordinates (s_a, s_b) are replaced by t = Omega(s), turning the
weighted inner product into a bounded weight phi(t_b) - phi(t_a) on a
rectangle.  All integrals are tensor Gauss-Legendre rules on that rectangle,
taken over every sheet of the boundary; sheet k is the image of the positive
sector under the symmetry word eps_k, so averaging (-1)^{p.eps_k} f over the
sheets is exactly the parity projection f_p.
"""

from dataclasses import dataclass, field
import itertools

import numpy as np

from . import cheb
from .eigensolver import ParityVector, ProblemKind, all_parities, get_eigen
from .elliptic import get_table, omega_weight
from .errors import DomainError, ParameterError, PartialResultError
from .geometry import (
    DEFAULT_A,
    RegionSpec,
    SignProfile,
    _as_params,
    _cartesian,
    apply_word,
    cyclide_gaps,
    region_contains,
    scale_factor_at,
    surface_mesh,
)
from .harmonics import eval_G, parity_sign, product_values, symmetry_exponents

GROUPS = {
    "reflections3": (1, 2, 3),
    "reflections3+inversion": (0, 1, 2, 3),
    "inversion+2reflections": (0, 1, 2),
}
KIND_OF_REGION = {"first": "I", "second": "II", "third": "III"}
GROUP_OF_KIND = {"I": "reflections3", "II": "reflections3+inversion", "III": "inversion+2reflections"}
DROP_TOL = 1e-12
DENOMINATOR_TOL = 1e-12


def _region(region):
    if isinstance(region, RegionSpec):
        return region
    kind, d = region
    return RegionSpec(kind, float(d))


def parity_project(f, p, group):
    """f_p(x) = 2^{-m} sum_eps (-1)^{p.eps} f(sigma^eps x) over the m generators of ``group``."""
    if group not in GROUPS:
        raise ParameterError(f"group must be one of {sorted(GROUPS)}, got {group!r}")
    gens = GROUPS[group]
    bits = ParityVector.parse(p).bits
    if len(bits) != len(gens):
        raise ParameterError(f"group {group} needs {len(gens)} parity bits, got {len(bits)}")

    def fp(x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for eps in itertools.product((0, 1), repeat=len(gens)):
            word = [0, 0, 0, 0]
            for g, e in zip(gens, eps):
                word[g] = e
            sgn = (-1) ** sum(b * e for b, e in zip(bits, eps))
            total = total + sgn * f(apply_word(word, x))
        return total / 2 ** len(gens)

    return fp


@dataclass
class BoundaryFunction:
    """Boundary data e(x); ``f`` is (rho^2 + 1)^{1/2} e, derived when not supplied."""

    e: object
    f: object = None

    def __post_init__(self):
        if self.f is None:
            e = self.e

            def f(x):
                x = np.asarray(x, dtype=float)
                return np.sqrt(np.sum(x * x, axis=-1) + 1.0) * e(x)

            self.f = f

    @classmethod
    def point_source(cls, centre):
        """Trace of 1/|x - centre| (harmonic away from the centre)."""
        c = np.asarray(centre, dtype=float)

        def e(x):
            return 1.0 / np.linalg.norm(np.asarray(x, dtype=float) - c, axis=-1)

        return cls(e)

    @classmethod
    def zero(cls):
        return cls(lambda x: np.zeros(np.shape(x)[:-1]))

    @classmethod
    def from_grid(cls, region, ta, tb, values, a=DEFAULT_A, table=None):
        """Data given on a (t_a, t_b) grid per boundary sheet, bilinearly interpolated.

        ``values[k]`` holds e on the grid of sheet k as listed by
        :func:`boundary_sheets`.
        """
        from scipy.interpolate import RegularGridInterpolator

        region = _region(region)
        a = _as_params(a)
        table = table or get_table(a)
        sheets = boundary_sheets(region)
        values = np.asarray(values, dtype=float)
        if values.shape != (len(sheets), len(ta), len(tb)):
            raise ParameterError(f"grid values must have shape {(len(sheets), len(ta), len(tb))}")
        interps = [RegularGridInterpolator((ta, tb), v, bounds_error=False, fill_value=None) for v in values]
        ia, ib = _spectral_indices(region)
        words = [pr.word for pr in sheets]

        def e(x):
            x = np.asarray(x, dtype=float)
            s, lo, hi = cyclide_gaps(x, a)
            t_a = table.omega_from_gaps(ia, lo[..., ia - 1], hi[..., ia - 1])
            t_b = table.omega_from_gaps(ib, lo[..., ib - 1], hi[..., ib - 1])
            eps = symmetry_exponents(x)
            out = np.empty(np.shape(x)[:-1])
            for k, word in enumerate(words):
                m = np.all(eps == np.array(word), axis=-1)
                if np.any(m):
                    out[m] = interps[k](np.stack([t_a[m], t_b[m]], axis=-1))
            return out

        return cls(e)


def _spectral_indices(region):
    kind = KIND_OF_REGION[region.kind]
    (ja, _), (jb, _) = ProblemKind.of(kind).spectral
    return ja, jb


def boundary_sheets(region):
    """Sign profiles of the boundary sheets, in a fixed order."""
    region = _region(region)
    profiles = []
    for word in itertools.product((0, 1), repeat=4):
        if region.kind == "first" and word[0]:
            continue
        if region.kind == "third" and word[3]:
            continue
        profiles.append(SignProfile.from_word(word))
    return profiles


# ---------------------------------------------------------------------------
# quadrature on the boundary rectangle

@dataclass
class _Rule:
    """Tensor Gauss-Legendre rule on the (t_a, t_b) rectangle plus the sheet points at level s_c."""

    ta: np.ndarray
    tb: np.ndarray
    wa: np.ndarray
    wb: np.ndarray
    weight: np.ndarray  # phi(t_b) - phi(t_a) on the grid
    s: np.ndarray  # (ma, mb, 3) coordinates
    lo: np.ndarray
    hi: np.ndarray
    points: np.ndarray  # (S, ma, mb, 3)
    words: np.ndarray  # (S, 4)

    @property
    def w2(self):
        return self.wa[:, None] * self.wb[None, :] * self.weight


def _rule(region, level, table, m):
    region = _region(region)
    ia, ib = _spectral_indices(region)
    ic = region.index
    ta, wa = cheb.gauss_legendre(m, table.interval(ia))
    tb, wb = cheb.gauss_legendre(m, table.interval(ib))
    sa, la, ha = table.phi_gaps(ta)
    sb, lb, hb = table.phi_gaps(tb)
    av = table.a.array
    shape = (m, m)
    s = np.empty(shape + (3,))
    lo = np.empty(shape + (3,))
    hi = np.empty(shape + (3,))
    s[..., ia - 1], lo[..., ia - 1], hi[..., ia - 1] = sa[:, None], la[:, None], ha[:, None]
    s[..., ib - 1], lo[..., ib - 1], hi[..., ib - 1] = sb[None, :], lb[None, :], hb[None, :]
    s[..., ic - 1], lo[..., ic - 1], hi[..., ic - 1] = level, level - av[ic - 1], av[ic] - level
    sheets = boundary_sheets(region)
    pts = np.stack([_cartesian(s, lo, hi, table.a, pr) for pr in sheets])
    words = np.array([pr.word for pr in sheets])
    weight = sb[None, :] - sa[:, None]
    return _Rule(ta, tb, wa, wb, weight, s, lo, hi, pts, words)


def _default_m(N):
    return max(48, 8 * N + 24)


def _projected_data(rule, f_vals, kind, parity):
    """g_p on the rectangle: sheet average of (-1)^{p.eps} f."""
    signs = parity_sign(kind, parity, rule.words)
    return np.tensordot(signs, f_vals, axes=(0, 0)) / len(signs)


def fourier_coeff(g, triple, m=None):
    """Weighted double integral of g E_a E_b over the spectral rectangle.

    ``g`` is a vectorised function of (s_a, s_b), or an array of its values on
    the Gauss-Legendre grid of order m.
    """
    table = triple.table
    ja, jb = triple.spectral
    ua, ub = triple.u[ja], triple.u[jb]
    if m is None:
        m = g.shape[0] if isinstance(g, np.ndarray) else max(48, len(ua.coef) + len(ub.coef) + 24)
    ta, wa = cheb.gauss_legendre(m, table.interval(ja))
    tb, wb = cheb.gauss_legendre(m, table.interval(jb))
    sa, sb = table.phi(ta), table.phi(tb)
    if isinstance(g, np.ndarray):
        vals = g
    else:
        vals = np.asarray(g(sa[:, None] * np.ones((1, m)), sb[None, :] * np.ones((m, 1))), dtype=float)
        vals = np.broadcast_to(vals, (m, m))
    w = wa[:, None] * wb[None, :] * (sb[None, :] - sa[:, None])
    return float(np.einsum("ij,ij,i,j->", w, vals, ua(ta), ub(tb)))


@dataclass
class SurfaceQuadrature:
    """Boundary quantities shared by every surface-form coefficient for one data set.

    Coordinates are recomputed from the Cartesian boundary points, so this
    route does not reuse the tensor rule's coordinates.
    """

    region: RegionSpec
    table: object
    s: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    eps: np.ndarray
    base: np.ndarray  # e / sqrt(rho^2 + 1) (h_a omega_a)(h_b omega_b) / h_c times the weights
    k: float


def surface_quadrature(e, region, table, m):
    region = _region(region)
    if isinstance(e, BoundaryFunction):
        e = e.e
    ja, jb = _spectral_indices(region)
    rule = _rule(region, region.d, table, m)
    s, lo, hi = cyclide_gaps(rule.points, table.a)
    rho2 = np.sum(rule.points**2, axis=-1)
    ha_wa = 0.25 * (rho2 + 1.0) * np.sqrt(np.abs(_others_product(s, ja)))
    hb_wb = 0.25 * (rho2 + 1.0) * np.sqrt(np.abs(_others_product(s, jb)))
    hc = scale_factor_at(rule.points, region.d, table.a)
    base = e(rule.points) / np.sqrt(rho2 + 1.0) * ha_wa * hb_wb / hc
    base = base * rule.wa[None, :, None] * rule.wb[None, None, :]
    return SurfaceQuadrature(region, table, s, lo, hi, symmetry_exponents(rule.points), base,
                             len(rule.words) / 4)


def fourier_coeff_surface(e, triple, region, m=None, quadrature=None):
    """The same coefficient as a surface integral of e G / h_c over the whole boundary.

    c = 1/(k omega(d) E_c(d)) int e G / h_c dS with k = 2 for 8 sheets and
    k = 4 for 16; dS = (h_a omega_a)(h_b omega_b) dt_a dt_b and G is evaluated
    at the Cartesian boundary points.  Pass ``quadrature`` (from
    :func:`surface_quadrature`) to reuse the boundary geometry across terms.
    """
    region = _region(region)
    table = triple.table
    ja, jb = triple.spectral
    if quadrature is None:
        if m is None:
            m = max(48, len(triple.u[ja].coef) + len(triple.u[jb].coef) + 24)
        quadrature = surface_quadrature(e, region, table, m)
    q = quadrature
    g = parity_sign(triple.kind, triple.parity, q.eps) * product_values(triple, q.s, q.lo, q.hi)
    total = float(np.sum(q.base * g))
    d = region.d
    ec = float(triple.u[region.index](table.omega(d)))
    return total / (q.k * float(omega_weight(d, table.a)) * ec)


def _others_product(s, i):
    out = np.ones(s.shape[:-1])
    for j in range(3):
        if j != i - 1:
            out = out * (s[..., i - 1] - s[..., j])
    return out


# ---------------------------------------------------------------------------
# series solutions

@dataclass
class SeriesSolution:
    """Truncated expansion u = sum c / E_c(d) G over n_a, n_b < N and all parities."""

    region: RegionSpec
    N: int
    a: object
    table: object
    coefficients: dict  # (n, parity string) -> c
    denominators: dict  # (n, parity string) -> E_c(d)
    triples: dict
    diagnostics: dict = field(default_factory=dict)

    @property
    def kind(self):
        return KIND_OF_REGION[self.region.kind]

    def keys(self):
        """Term keys in increasing n_a + n_b order."""
        return sorted(self.coefficients, key=lambda k: (k[0][0] + k[0][1], k[0], k[1]))

    def active_keys(self):
        """Keys of terms used in evaluation (negligible terms are skipped)."""
        dropped = {(tuple(d["n"]), d["parity"]) for d in self.diagnostics.get("dropped", [])}
        return [k for k in self.keys() if k not in dropped]

    def truncated(self, N):
        """The same series restricted to n_a, n_b < N (coefficients do not depend on N)."""
        if N > self.N:
            raise ParameterError(f"cannot extend a series computed at N={self.N} to N={N}")
        keep = {k for k in self.coefficients if max(k[0]) < N}
        return SeriesSolution(
            self.region, N, self.a, self.table,
            {k: v for k, v in self.coefficients.items() if k in keep},
            {k: v for k, v in self.denominators.items() if k in keep},
            {k: v for k, v in self.triples.items() if k in keep},
            {**self.diagnostics, "dropped": [d for d in self.diagnostics.get("dropped", []) if max(d["n"]) < N]},
        )

    def __call__(self, p):
        return eval_solution(self, p)

    def sum_of_squares(self):
        return float(sum(c * c for c in self.coefficients.values()))

    def to_dict(self):
        return {
            "region": self.region.kind,
            "d": self.region.d,
            "N": self.N,
            "a": list(self.a.values),
            "terms": [
                {
                    "n": list(k[0]),
                    "parity": k[1],
                    "lambda1": self.triples[k].lambda1,
                    "lambda2": self.triples[k].lambda2,
                    "c": self.coefficients[k],
                    "denominator": self.denominators[k],
                }
                for k in self.keys()
            ],
            "diagnostics": self.diagnostics,
        }


def solve_dirichlet(region, e, N, a=DEFAULT_A, table=None, m=None):
    """Coefficients of the truncated series solution for boundary data e."""
    region = _region(region)
    a = _as_params(a)
    region.validate(a)
    if N < 1:
        raise ParameterError("truncation N must be at least 1")
    if not isinstance(e, BoundaryFunction):
        e = BoundaryFunction(e)
    if table is None:
        table = get_table(a)
    kind = KIND_OF_REGION[region.kind]
    m = m or _default_m(N)
    rule = _rule(region, region.d, table, m)
    f_vals = np.asarray(e.f(rule.points), dtype=float)
    if not np.all(np.isfinite(f_vals)):
        raise DomainError("boundary data is not finite on the boundary")
    t_d = table.omega(region.d)
    coefficients, denominators, triples = {}, {}, {}
    failed, ill, dropped = [], [], []
    for parity in all_parities(kind):
        gp = _projected_data(rule, f_vals, kind, parity)
        for n in itertools.product(range(N), repeat=2):
            key = (n, str(parity))
            try:
                triple = get_eigen(kind, n, str(parity), a)
            except (ArithmeticError, ValueError) as exc:
                failed.append({"n": list(n), "parity": str(parity), "error": str(exc)})
                continue
            ja, jb = triple.spectral
            c = float(np.einsum("ij,ij,i,j->", rule.w2, gp, triple.u[ja](rule.ta), triple.u[jb](rule.tb)))
            comp = triple.u[region.index]
            denom = float(comp(t_d))
            scale = float(np.max(np.abs(comp(cheb.map_to(comp.domain, cheb.lobatto(64))))))
            if abs(denom) < DENOMINATOR_TOL * scale:
                ill.append({"n": list(n), "parity": str(parity), "denominator": denom})
                continue
            coefficients[key] = c
            denominators[key] = denom
            triples[key] = triple
            # max |G| is reached on the boundary, where it is at most |E_c(d)| max|u_a| max|u_b|
            size = abs(c) * float(np.max(np.abs(triple.u[ja](rule.ta)))) * float(np.max(np.abs(triple.u[jb](rule.tb))))
            if size < DROP_TOL:
                dropped.append({"n": list(n), "parity": str(parity), "bound": size})
    sol = SeriesSolution(region, N, a, table, coefficients, denominators, triples,
                         {"quadrature_order": m, "ill_conditioned": ill, "dropped": dropped})
    if failed:
        raise PartialResultError("eigenpairs failed for some indices", failed=failed, partial=sol)
    return sol


def _series_at(sol, s, lo, hi, rho2, eps):
    """Series value from coordinates (with endpoint offsets), rho^2 and symmetry exponents."""
    kind = sol.kind
    total = np.zeros(np.shape(rho2))
    signs = {}
    for key in sol.active_keys():
        c = sol.coefficients[key]
        if c == 0.0:
            continue
        parity = key[1]
        if parity not in signs:
            signs[parity] = parity_sign(kind, parity, eps)
        total = total + (c / sol.denominators[key]) * signs[parity] * product_values(sol.triples[key], s, lo, hi)
    return total / np.sqrt(rho2 + 1.0)


def eval_solution(sol, p, check=True):
    """Series solution at points strictly inside the region."""
    p = np.asarray(p, dtype=float)
    if check and not np.all(region_contains(sol.region, p, sol.a)):
        raise DomainError("evaluation points must lie strictly inside the region")
    s, lo, hi = cyclide_gaps(p, sol.a)
    return _series_at(sol, s, lo, hi, np.sum(p * p, axis=-1), symmetry_exponents(p))


def _level_values(sol, level, m):
    """Series on the level surface s_c = level over the boundary rule's grid and sheets.

    The coordinates are shared by all sheets, so each term's product
    E1 E2 E3 is computed once and combined with the per-sheet parity signs.
    """
    rule = _rule(sol.region, level, sol.table, m)
    rho2 = np.sum(rule.points**2, axis=-1)
    by_parity = {}
    for key in sol.active_keys():
        c = sol.coefficients[key]
        if c == 0.0:
            continue
        term = (c / sol.denominators[key]) * product_values(sol.triples[key], rule.s, rule.lo, rule.hi)
        by_parity[key[1]] = by_parity.get(key[1], 0.0) + term
    vals = np.zeros(rho2.shape)
    for parity, acc in by_parity.items():
        signs = parity_sign(sol.kind, parity, rule.words)
        vals = vals + signs[:, None, None] * acc
    return rule, vals / np.sqrt(rho2 + 1.0), rho2


def boundary_l2_error(sol, e, s_level, m=None):
    """Weighted L^2 distance between the series on the level surface and the data.

    Points on the level surface and on the boundary are paired through the same
    (t_a, t_b) and sheet; the squared error is averaged over sheets, which sums
    the errors of all parity components.
    """
    region = sol.region
    av = sol.a.array
    ic = region.index
    lo, hi = (region.d, av[ic]) if region.kind == "first" else (av[ic - 1], region.d)
    if not lo < s_level < hi:
        raise ParameterError(f"level must lie strictly between {lo} and {hi} on the region side")
    if not isinstance(e, BoundaryFunction):
        e = BoundaryFunction(e)
    m = m or sol.diagnostics.get("quadrature_order") or _default_m(sol.N)
    rule_l, u_vals, rho2 = _level_values(sol, s_level, m)
    rule_b = _rule(region, region.d, sol.table, m)
    diff = np.sqrt(rho2 + 1.0) * u_vals - e.f(rule_b.points)
    err2 = np.einsum("kij,ij->", diff * diff, rule_b.w2) / len(rule_b.words)
    return float(np.sqrt(max(err2, 0.0)))


def weighted_norm(e, region, a=DEFAULT_A, table=None, m=96):
    """||f||: sheet-averaged weighted L^2 norm of f = (rho^2+1)^{1/2} e on the boundary."""
    region = _region(region)
    table = table or get_table(_as_params(a))
    if not isinstance(e, BoundaryFunction):
        e = BoundaryFunction(e)
    rule = _rule(region, region.d, table, m)
    f = e.f(rule.points)
    return float(np.sqrt(np.einsum("kij,ij->", f * f, rule.w2) / len(rule.words)))


def interior_points(region, count, margin=0.1, a=DEFAULT_A, seed=0, resolution=(160, 160)):
    """Random points of the region at distance >= margin from its boundary surface.

    Distances are taken to the vertices of a fine boundary mesh, padded by half
    the largest mesh edge so that the margin holds for the true surface.
    """
    from scipy.spatial import cKDTree

    region = _region(region)
    a = _as_params(a)
    region.validate(a)
    mesh = surface_mesh(region.index, region.d, resolution, a)
    grids = mesh.points
    edge = max(float(np.max(np.linalg.norm(np.diff(grids, axis=ax), axis=-1))) for ax in (1, 2))
    pts = grids.reshape(-1, 3)
    if region.kind == "third":
        pts = pts[pts[:, 2] >= -edge]
    tree = cKDTree(pts)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    rng = np.random.default_rng(seed)
    found = []
    total = 0
    for _ in range(200):
        cand = rng.uniform(lo, hi, size=(4 * count + 64, 3))
        cand = cand[region_contains(region, cand, a)]
        dist, _ = tree.query(cand)
        cand = cand[dist >= margin + 0.5 * edge]
        found.append(cand)
        total += len(cand)
        if total >= count:
            break
    out = np.concatenate(found)[:count]
    if len(out) < count:
        raise DomainError(f"only {len(out)} interior points found at margin {margin}")
    return out
