"""The three two-parameter eigenvalue problems and their E-functions.

Each problem couples two equations u'' + sigma Q(phi(t)) u = 0 on two of the
intervals [b0,b1], [b1,b2], [b2,b3] through the shared (lambda1, lambda2);
the third interval carries a companion initial-value solution.  Kinds I, II
and III belong to the regions bounded by s1 = d, s2 = d and s3 = d.

For fixed lambda1 each equation has a unique lambda2 with a prescribed zero
count (its eigencurve).  The eigenpair is where the two eigencurves cross.
Writing A for the lower and B for the upper spectral interval, the gap
Delta(lambda1) = lambda2_A - lambda2_B has derivative mean_B(phi) - mean_A(phi) > 0
(Hellmann-Feynman), so Newton's method with a bisection safeguard finds the
crossing.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from . import cheb
from .elliptic import DEFAULT_TOL as OMEGA_TOL, get_table
from .errors import ConvergenceError, DomainError, ParameterError, SingularError
from .geometry import DEFAULT_A, _as_params
from .sturm import BCPair, VanVleck, bc_residual, count_zeros, init_from_bit, integrate_ivp, piecewise_ivp, sl_eigen

KINDS = ("I", "II", "III")


@dataclass(frozen=True)
class ProblemKind:
    """Interval layout of one problem.

    ``spectral`` holds two (interval index, sign) pairs, lower interval first;
    ``companion`` is (interval index, sign, endpoint where it starts).
    """

    name: str
    spectral: tuple
    companion: tuple
    parity_length: int

    @classmethod
    def of(cls, kind):
        if isinstance(kind, ProblemKind):
            return kind
        key = str(kind).upper()
        aliases = {"1": "I", "2": "II", "3": "III", "FIRST": "I", "SECOND": "II", "THIRD": "III"}
        key = aliases.get(key, key)
        if key not in _LAYOUTS:
            raise ParameterError(f"problem kind must be one of {KINDS}, got {kind!r}")
        return _LAYOUTS[key]

    @property
    def index(self):
        return KINDS.index(self.name) + 1

    def bc_pairs(self, parity):
        """Boundary conditions on the two spectral intervals."""
        p = parity.bits
        if self.name == "I":
            return BCPair.from_bits(p[0], p[1]), BCPair.from_bits(p[1], p[2])
        if self.name == "II":
            return BCPair.from_bits(p[0], p[1]), BCPair.from_bits(p[2], p[3])
        return BCPair.from_bits(p[0], p[1]), BCPair.from_bits(p[1], p[2])

    def companion_bit(self, parity):
        p = parity.bits
        return {"I": p[0], "II": p[1], "III": p[2]}[self.name]


_LAYOUTS = {
    "I": ProblemKind("I", ((2, 1), (3, -1)), (1, -1, "right"), 3),
    "II": ProblemKind("II", ((1, -1), (3, -1)), (2, 1, "left"), 4),
    "III": ProblemKind("III", ((1, -1), (2, 1)), (3, -1, "left"), 3),
}


@dataclass(frozen=True)
class ParityVector:
    """Parity bits: (p1,p2,p3) for kind I, (p0,p1,p2,p3) for II, (p0,p1,p2) for III."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ParameterError(f"parity bits must be 0 or 1, got {self.bits}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def parse(cls, value, kind=None):
        if isinstance(value, ParityVector):
            bits = value.bits
        elif isinstance(value, str):
            text = value.replace(",", "").strip()
            if not text or any(ch not in "01" for ch in text):
                raise ParameterError(f"parity must be a string of 0/1, got {value!r}")
            bits = tuple(int(ch) for ch in text)
        else:
            bits = tuple(value)
        pv = cls(bits)
        if kind is not None:
            pk = ProblemKind.of(kind)
            if len(pv.bits) != pk.parity_length:
                raise ParameterError(f"kind {pk.name} needs {pk.parity_length} parity bits, got {len(pv.bits)}")
        return pv

    def __str__(self):
        return "".join(str(b) for b in self.bits)


def all_parities(kind):
    import itertools

    n = ProblemKind.of(kind).parity_length
    return [ParityVector(bits) for bits in itertools.product((0, 1), repeat=n)]


@dataclass
class EigenTriple:
    """A solved eigenpair with its three E-functions (as functions of t).

    ``u[i]`` is the Chebyshev series of E_i in t on [b_{i-1}, b_i]; the two
    spectral functions are normalised, the companion carries its initial data.
    """

    kind: ProblemKind
    n: tuple
    parity: ParityVector
    lam: VanVleck
    table: object
    u: dict
    spectral: tuple  # coordinate indices (lower, upper)
    companion: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def lambda1(self):
        return self.lam.lambda1

    @property
    def lambda2(self):
        return self.lam.lambda2

    def u_t(self, i, t):
        """E_i as a function of t = Omega(s_i)."""
        return self.u[i](t)

    def du_t(self, i, t):
        return self.u[i].deriv()(t)

    def E(self, i, s):
        return eval_E(self, i, s)

    def norm_integral(self):
        return _product_norm(self.u[self.spectral[0]], self.u[self.spectral[1]], self.table)

    def to_dict(self):
        return {
            "kind": self.kind.name,
            "n": list(self.n),
            "parity": str(self.parity),
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
        }


# ---------------------------------------------------------------------------
# quadrature helpers

def _gauss_rule(table, domain, m):
    """Cached Gauss-Legendre nodes, weights and phi values on one table interval."""
    for j in (1, 2, 3):
        if np.allclose(table.interval(j), domain, rtol=0, atol=1e-12):
            return table.phi_at_gauss(j, m)
    raise ParameterError(f"{tuple(domain)} is not a table interval")


def _moments(f, g, table):
    """(int f g dt, int phi f g dt) over the common interval of two series."""
    m = 8 * ((max(len(f.coef), len(g.coef)) + 24) // 8 + 1)
    t, w, phi = _gauss_rule(table, f.domain, m)
    fg = f(t) * g(t)
    return float(np.dot(w, fg)), float(np.dot(w, phi * fg))


def _product_norm(ua, ub, table):
    """int int (phi(t_b) - phi(t_a)) u_a^2 u_b^2 via the separated identity."""
    a0, a1 = _moments(ua, ua, table)
    b0, b1 = _moments(ub, ub, table)
    return a0 * b1 - a1 * b0


def normalize(triple):
    """Scale so that int_A u_a^2 = 1 and the weighted product norm is 1."""
    lo, hi = triple.spectral
    ua, ub = triple.u[lo], triple.u[hi]
    ma, _ = _moments(ua, ua, triple.table)
    if not ma > 0:
        raise SingularError("vanishing eigenfunction norm")
    ua = ua / math.sqrt(ma)
    d = _product_norm(ua, ub, triple.table)
    if not d > 0:
        raise SingularError("weighted product norm is not positive", value=d)
    ub = ub / math.sqrt(d)
    triple.u[lo], triple.u[hi] = ua, ub
    triple.diagnostics["norm_check"] = _product_norm(ua, ub, triple.table)
    return triple


# ---------------------------------------------------------------------------
# two-parameter solve

class _Eigencurves:
    """Memoised single-equation eigenpairs along the lambda1 search."""

    def __init__(self, kind, n, parity, table):
        self.table = table
        self.setup = []
        for (j, sign), bc, nj in zip(kind.spectral, kind.bc_pairs(parity), n):
            self.setup.append((table.interval(j), sign, bc, nj))
        self.cache = {}

    def __call__(self, lambda1):
        key = float(lambda1)
        if key not in self.cache:
            self.cache[key] = tuple(
                sl_eigen(interval, sign, key, bc, nj, table=self.table) for interval, sign, bc, nj in self.setup
            )
        return self.cache[key]

    def gap(self, lambda1):
        ea, eb = self(lambda1)
        return ea.lambda2 - eb.lambda2, eb.mean_phi - ea.mean_phi


def _seed(kind, n, parity, table):
    """lambda1 from freezing phi at its mean on each spectral interval."""
    rows, rhs = [], []
    for (j, sign), bc, nj in zip(kind.spectral, kind.bc_pairs(parity), n):
        lo, hi = table.interval(j)
        _, w, phi = table.phi_at_gauss(j, 40)
        m = float(np.dot(w, phi) / (hi - lo))
        shift = {0: 0.0, 1: 0.5, 2: 1.0}[bc.dirichlet_count]
        k = (nj + shift) * math.pi / (hi - lo)
        rows.append([m, 1.0])
        rhs.append(sign * k * k - 0.1875 * m * m)
    lam1, _ = np.linalg.solve(np.array(rows), np.array(rhs))
    return float(lam1)


def _bracket_scale(kind, n, a, table):
    """Half-width C (n_a^2 + n_b^2 + 1) of a default lambda1 bracket."""
    lengths = [table.interval(j)[1] - table.interval(j)[0] for j in (1, 2, 3)]
    av = a.array
    c = 4 * math.pi**2 / min(lengths) ** 2 / (av[2] - av[1]) + 0.375 * abs(av[3])
    return c * (n[0] ** 2 + n[1] ** 2 + 1)


def _find_lambda1(curves, start, bracket, tol, scale, maxiter=100):
    lo = hi = None
    f_lo = f_hi = None
    if bracket is not None:
        lo, hi = (float(v) for v in bracket)
        f_lo, _ = curves.gap(lo)
        f_hi, _ = curves.gap(hi)
        if not (f_lo <= 0 <= f_hi):
            # bracket does not straddle the crossing; fall back to its midpoint as a start
            start = 0.5 * (lo + hi)
            lo = hi = None
    x = float(start)
    history = []
    for it in range(maxiter):
        f, df = curves.gap(x)
        history.append((x, f))
        if f < 0:
            lo, f_lo = x, f
        elif f > 0:
            hi, f_hi = x, f
        if abs(f) <= tol * max(1.0, abs(x)):
            return x, it + 1, f
        step = f / df if df > 0 else math.copysign(scale, -f)
        nxt = x - step
        if lo is not None and hi is not None:
            if not (lo < nxt < hi):
                nxt = 0.5 * (lo + hi)
            if hi - lo <= 4e-16 * max(1.0, abs(x)):
                return x, it + 1, f
        else:
            # one-sided: never jump further than the default bracket scale
            nxt = x - math.copysign(min(abs(step), scale), step)
        if nxt == x:
            return x, it + 1, f
        x = nxt
    raise ConvergenceError(
        "two-parameter search did not converge", bracket=(lo, hi), values=(f_lo, f_hi), history=history[-5:]
    )


def solve_two_param(kind, n, parity, a=DEFAULT_A, table=None, tol=1e-12, bracket=None, start=None):
    """Eigenpair with zero counts n = (n_a, n_b) on the two spectral intervals.

    ``bracket`` (a lambda1 interval, searched from its midpoint) or ``start``
    override the default seed; the result does not depend on them.
    """
    pk = ProblemKind.of(kind)
    a = _as_params(a)
    parity = ParityVector.parse(parity, pk)
    n = tuple(int(v) for v in n)
    if len(n) != 2 or min(n) < 0:
        raise ParameterError(f"zero counts must be two nonnegative integers, got {n}")
    if table is None:
        table = get_table(a)
    curves = _Eigencurves(pk, n, parity, table)
    scale = _bracket_scale(pk, n, a, table)
    if start is None:
        start = 0.5 * (bracket[0] + bracket[1]) if bracket is not None else _seed(pk, n, parity, table)
    lam1, iters, miss = _find_lambda1(curves, start, bracket, tol, scale)
    ea, eb = curves(lam1)
    lam = VanVleck(lam1, 0.5 * (ea.lambda2 + eb.lambda2))
    (ja, _), (jb, _) = pk.spectral
    jc, sc, at = pk.companion
    comp = companion_solution(pk, lam, parity, table)
    triple = EigenTriple(
        kind=pk,
        n=n,
        parity=parity,
        lam=lam,
        table=table,
        u={ja: ea.u, jb: eb.u, jc: comp},
        spectral=(ja, jb),
        companion=jc,
        diagnostics={"iterations": iters, "gap": miss, "lambda2_pair": (ea.lambda2, eb.lambda2)},
    )
    return normalize(triple)


def companion_solution(kind, lam, parity, table):
    """Companion solution on its interval, started at the endpoint shared with a spectral interval.

    Returned piecewise (see :class:`PiecewiseSeries`): the companion may grow
    by many orders of magnitude and its values are divided by one another.
    """
    pk = ProblemKind.of(kind)
    parity = ParityVector.parse(parity, pk)
    j, sign, at = pk.companion
    return piecewise_ivp(table.interval(j), sign, lam, init_from_bit(pk.companion_bit(parity)), at=at, table=table)


@lru_cache(maxsize=4096)
def get_eigen(kind, n, parity, a=DEFAULT_A, omega_tol=OMEGA_TOL):
    """Memoised :func:`solve_two_param` on the shared table for ``a``."""
    a = _as_params(a)
    return solve_two_param(kind, tuple(n), ParityVector.parse(parity), a, get_table(a, omega_tol))


def verify_pruefer(triple, rtol=None, atol=None):
    """Independent check of an eigenpair by Runge-Kutta shooting at its (lambda1, lambda2).

    On each spectral interval one solution is shot from the left end with the
    left boundary condition and one from the right end with the right
    condition, both to the point where the eigenfunction is largest.  The
    residual is |sin(theta_L - theta_R)| there (zero exactly when one solution
    meets both conditions), which stays well conditioned when the
    eigenfunction grows steeply towards an end; the zero count is the sum over
    the two halves.
    """
    counts, residuals = [], []
    for (j, sign), bc in zip(triple.kind.spectral, triple.kind.bc_pairs(triple.parity)):
        lo, hi = triple.table.interval(j)
        grid = np.linspace(lo, hi, 401)
        tm = float(np.clip(grid[np.argmax(np.abs(triple.u[j](grid)))], lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo)))
        left = integrate_ivp((lo, hi), sign, triple.lam, _bc_vector(bc.left), table=triple.table,
                             rtol=rtol, atol=atol, stop=tm)
        right = integrate_ivp((lo, hi), sign, triple.lam, _bc_vector(bc.right), direction="right-to-left",
                              table=triple.table, rtol=rtol, atol=atol, stop=tm)
        counts.append(count_zeros(left) + count_zeros(right))
        residuals.append(abs(math.sin(left.theta_end - right.theta_end)))
    return {"zero_counts": counts, "residuals": residuals}


def _bc_vector(bc):
    return (1.0, 0.0) if bc == "neumann" else (0.0, 1.0)


# ---------------------------------------------------------------------------
# evaluation

def eval_E(triple, i, s):
    """E_i(s) = u_i(Omega(s)) for s in [a_{i-1}, a_i]."""
    if i not in (1, 2, 3):
        raise ParameterError(f"E-function index must be 1, 2 or 3, got {i}")
    lo, hi = triple.table.a.interval(i)
    s = np.asarray(s, dtype=float)
    if np.any(s < lo) or np.any(s > hi) or np.any(np.isnan(s)):
        raise DomainError(f"E_{i} is defined on [{lo}, {hi}]")
    return triple.u[i](triple.table.omega(s))


def gram_matrix(kind, parity, N, a=DEFAULT_A, table=None, triples=None):
    """Gram matrix of the products u_a u_b for n_a, n_b < N under the weighted inner product.

    Rows and columns are ordered by (n_a, n_b) lexicographically.
    """
    pk = ProblemKind.of(kind)
    a = _as_params(a)
    if N < 1:
        raise ParameterError("truncation N must be at least 1")
    if table is None:
        table = get_table(a)
    idx = [(i, j) for i in range(N) for j in range(N)]
    if triples is None:
        triples = {nn: solve_two_param(pk, nn, parity, a, table) for nn in idx}
    lo, hi = triples[idx[0]].spectral
    ja = [triples[nn].u[lo] for nn in idx]
    jb = [triples[nn].u[hi] for nn in idx]
    ta, wa, pa = _gauss_rule(table, ja[0].domain, max(len(u.coef) for u in ja) * 2 + 24)
    tb, wb, pb = _gauss_rule(table, jb[0].domain, max(len(u.coef) for u in jb) * 2 + 24)
    va = np.array([u(ta) for u in ja])
    vb = np.array([u(tb) for u in jb])
    a0 = (va * wa) @ va.T
    a1 = (va * wa * pa) @ va.T
    b0 = (vb * wb) @ vb.T
    b1 = (vb * wb * pb) @ vb.T
    return a0 * b1 - a1 * b0
