"""The weight omega, the elliptic integral Omega and its inverse phi.

Omega(s) = int_{a0}^{s} d sigma / omega(sigma) with
omega(s) = |(s-a0)(s-a1)(s-a2)(s-a3)|^{1/2}.  The integrand has inverse
square-root singularities at every a_j; on each interval the substitutions
sigma = a_{j-1} + u^2 (left half) and sigma = a_j - v^2 (right half) turn it
into an analytic function, which is what both routes below integrate.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import hashlib
import json
import os

import numpy as np
from numpy.polynomial import Chebyshev

from . import cheb
from .errors import AccuracyError, DomainError
from .geometry import DEFAULT_A, ParamsA, _as_params

DEFAULT_TOL = 1e-11
CACHE_ENV = "CYCLIDIC_CACHE_DIR"
CACHE_FORMAT = "cyclidic-omega-table"
CACHE_VERSION = 1


def omega_weight(s, a=DEFAULT_A):
    """|(s-a0)(s-a1)(s-a2)(s-a3)|^{1/2}."""
    av = _as_params(a).array
    s = np.asarray(s, dtype=float)
    if np.any(s < av[0]) or np.any(s > av[3]) or np.any(np.isnan(s)):
        raise DomainError(f"omega is defined on [{av[0]}, {av[3]}]")
    return np.sqrt(np.abs(np.prod(s[..., None] - av, axis=-1)))


def _half_integrand(av, j, side):
    """Substituted integrand on interval j (1..3) from the left or right endpoint.

    Left:  Omega(a_{j-1} + u^2) - b_{j-1} = int_0^u g(w) dw
    Right: b_j - Omega(a_j - v^2)         = int_0^v g(w) dw
    """
    base = j - 1 if side == "left" else j
    sign = 1.0 if side == "left" else -1.0
    others = [av[k] for k in range(4) if k != base]

    def g(w):
        w = np.asarray(w, dtype=float)
        sig = av[base] + sign * w * w
        prod = np.ones_like(sig)
        for ak in others:
            prod = prod * (sig - ak)
        return 2.0 / np.sqrt(np.abs(prod))

    return g


def _gl_adaptive(g, lo, hi, tol, order=20, depth=0):
    """Composite Gauss-Legendre with interval bisection; returns (value, error estimate)."""
    x1, w1 = cheb.gauss_legendre(order, (lo, hi))
    x2, w2 = cheb.gauss_legendre(2 * order, (lo, hi))
    coarse = float(np.dot(w1, g(x1)))
    fine = float(np.dot(w2, g(x2)))
    err = abs(fine - coarse)
    if err <= tol or depth >= 30:
        return fine, err
    mid = 0.5 * (lo + hi)
    v1, e1 = _gl_adaptive(g, lo, mid, 0.5 * tol, order, depth + 1)
    v2, e2 = _gl_adaptive(g, mid, hi, 0.5 * tol, order, depth + 1)
    return v1 + v2, e1 + e2


def omega_integral(s, a=DEFAULT_A, tol=DEFAULT_TOL, return_error=False):
    """Omega(s) by adaptive Gauss-Legendre quadrature after endpoint substitution.

    This is the direct route, independent of :class:`OmegaTable`; use the
    table for repeated evaluations.
    """
    av = _as_params(a).array
    s = float(s)
    if not av[0] <= s <= av[3] or np.isnan(s):
        raise DomainError(f"Omega is defined on [{av[0]}, {av[3]}], got {s}")
    total = 0.0
    err = 0.0
    for j in (1, 2, 3):
        lo, hi = av[j - 1], av[j]
        if s <= lo:
            break
        half = 0.5 * (hi - lo)
        mid = lo + half
        end = min(s, hi)
        ul = np.sqrt(min(end, mid) - lo)
        v, e = _gl_adaptive(_half_integrand(av, j, "left"), 0.0, ul, tol / 6)
        total += v
        err += e
        if end > mid:
            g = _half_integrand(av, j, "right")
            v, e = _gl_adaptive(g, np.sqrt(hi - end), np.sqrt(half), tol / 6)
            total += v
            err += e
    return (total, err) if return_error else total


@dataclass
class _Piece:
    """One interval [a_{j-1}, a_j] of the table."""

    lo: float
    hi: float
    b_lo: float
    b_hi: float
    umax: float
    left: Chebyshev  # u -> Omega(lo + u^2) - b_lo
    right: Chebyshev  # v -> b_hi - Omega(hi - v^2)
    gl: Chebyshev  # substituted integrands (derivatives of left/right)
    gr: Chebyshev
    tau_l: float  # left(umax)
    tau_r: float  # right(umax)
    inv_left: Chebyshev  # tau -> u on [0, tau_l]
    inv_right: Chebyshev  # tau -> v on [0, tau_r]
    phi_coeffs: list = field(default_factory=list)  # phi on [b_lo, b_hi], for scalar evaluation


class OmegaTable:
    """Omega, its breakpoints b_j and the inverse phi on all of [a0, a3].

    On each interval the substituted integrands are represented by adaptive
    Chebyshev interpolants and integrated exactly; phi is represented by the
    Chebyshev interpolants of the inverse maps tau -> u and tau -> v (both
    analytic), followed by one Newton step at query time.  phi(b_j) = a_j
    exactly.
    """

    def __init__(self, a=DEFAULT_A, tol=DEFAULT_TOL, _pieces=None):
        self.a = _as_params(a)
        self.tol = float(tol)
        av = self.a.array
        if _pieces is None:
            _pieces = []
            b = 0.0
            for j in (1, 2, 3):
                _pieces.append(self._build_piece(av, j, b))
                b = _pieces[-1].b_hi
        self._pieces = _pieces
        self.b = np.array([0.0] + [pc.b_hi for pc in _pieces])
        self._node_cache = {}

    # -- construction ---------------------------------------------------
    @staticmethod
    def _build_piece(av, j, b_lo):
        lo, hi = av[j - 1], av[j]
        umax = np.sqrt(0.5 * (hi - lo))
        gl = cheb.fit(_half_integrand(av, j, "left"), (0.0, umax), tol=1e-16)
        gr = cheb.fit(_half_integrand(av, j, "right"), (0.0, umax), tol=1e-16)
        left = gl.integ(lbnd=0.0)
        right = gr.integ(lbnd=0.0)
        tau_l = float(left(umax))
        tau_r = float(right(umax))
        inv_left = cheb.fit(lambda tau: _invert(left, gl, tau, umax), (0.0, tau_l), tol=1e-15)
        inv_right = cheb.fit(lambda tau: _invert(right, gr, tau, umax), (0.0, tau_r), tol=1e-15)
        b_hi = b_lo + tau_l + tau_r
        piece = _Piece(lo, hi, b_lo, b_hi, umax, left, right, gl, gr, tau_l, tau_r, inv_left, inv_right)
        phi_fit = cheb.fit(lambda t: _piece_phi(piece, t), (b_lo, b_hi), tol=1e-15)
        piece.phi_coeffs = [float(c) for c in phi_fit.coef]
        return piece

    # -- queries --------------------------------------------------------
    @property
    def b0(self):
        return float(self.b[0])

    @property
    def b1(self):
        return float(self.b[1])

    @property
    def b2(self):
        return float(self.b[2])

    @property
    def b3(self):
        return float(self.b[3])

    def interval(self, j):
        """[b_{j-1}, b_j] for j = 1, 2, 3."""
        return float(self.b[j - 1]), float(self.b[j])

    def omega(self, s):
        """Omega(s) for s in [a0, a3] (vectorised)."""
        s = np.asarray(s, dtype=float)
        av = self.a.array
        if np.any(s < av[0]) or np.any(s > av[3]) or np.any(np.isnan(s)):
            raise DomainError(f"Omega is defined on [{av[0]}, {av[3]}]")
        j = np.clip(np.searchsorted(av, s, side="right"), 1, 3)
        lo = s - av[j - 1]
        hi = av[j] - s
        return self.omega_from_gaps(j, lo, hi)

    def omega_from_gaps(self, j, lo, hi):
        """Omega at a point of interval j given both distances to its ends.

        Passing accurately computed small distances keeps Omega accurate in
        relative terms next to the breakpoints.
        """
        j = np.broadcast_to(np.asarray(j), np.shape(lo))
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        out = np.empty(np.broadcast(lo, hi).shape)
        for k, pc in enumerate(self._pieces, start=1):
            m = j == k
            if not np.any(m):
                continue
            l_, h_ = np.maximum(lo[m], 0.0), np.maximum(hi[m], 0.0)
            use_left = l_ <= h_
            val = np.where(
                use_left,
                pc.b_lo + pc.left(np.sqrt(np.minimum(l_, pc.umax**2))),
                pc.b_hi - pc.right(np.sqrt(np.minimum(h_, pc.umax**2))),
            )
            out[m] = val
        return out if out.ndim else float(out)

    def phi(self, t, refine=True):
        """phi(t) for t in [0, b3] (vectorised)."""
        s, _, _ = self.phi_gaps(t, refine=refine)
        return s

    def phi_gaps(self, t, refine=True):
        """phi(t) together with its distances to both ends of the interval it lies in."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.b[3]) or np.any(np.isnan(t)):
            raise DomainError(f"phi is defined on [0, {self.b[3]}]")
        j = np.clip(np.searchsorted(self.b, t, side="right"), 1, 3)
        s = np.empty(t.shape)
        lo = np.empty(t.shape)
        hi = np.empty(t.shape)
        for k, pc in enumerate(self._pieces, start=1):
            m = j == k
            if not np.any(m):
                continue
            s[m], lo[m], hi[m] = _piece_phi(pc, t[m], refine=refine, gaps=True)
        if s.ndim == 0:
            return float(s), float(lo), float(hi)
        return s, lo, hi

    def phi_scalar(self, t, j):
        """phi(t) on interval j from a single Chebyshev series (for ODE right-hand sides)."""
        pc = self._pieces[j - 1]
        return cheb.clenshaw(pc.phi_coeffs, pc.b_lo, pc.b_hi, t)

    def phi_series(self, j):
        """Chebyshev series of phi on [b_{j-1}, b_j]."""
        pc = self._pieces[j - 1]
        return Chebyshev(pc.phi_coeffs, domain=[pc.b_lo, pc.b_hi])

    def phi_at_lobatto(self, j, n):
        """phi at the n+1 Chebyshev-Lobatto points of [b_{j-1}, b_j] (cached, read-only)."""
        key = ("lobatto", j, n)
        if key not in self._node_cache:
            t = cheb.map_to(self.interval(j), cheb.lobatto(n))
            vals = self.phi_series(j)(t)
            vals.flags.writeable = False
            self._node_cache[key] = (t, vals)
        return self._node_cache[key]

    def phi_at_gauss(self, j, m):
        """Gauss-Legendre nodes, weights and phi values on [b_{j-1}, b_j] (cached, read-only)."""
        key = ("gauss", j, m)
        if key not in self._node_cache:
            t, w = cheb.gauss_legendre(m, self.interval(j))
            vals = self.phi(t)
            for arr in (t, w, vals):
                arr.flags.writeable = False
            self._node_cache[key] = (t, w, vals)
        return self._node_cache[key]

    def phi_prime(self, t):
        """dphi/dt = omega(phi(t))."""
        return omega_weight(self.phi(t), self.a)

    # -- persistence ----------------------------------------------------
    def to_dict(self):
        pieces = []
        for pc in self._pieces:
            pieces.append(
                {
                    "lo": pc.lo,
                    "hi": pc.hi,
                    "gl": pc.gl.coef.tolist(),
                    "gr": pc.gr.coef.tolist(),
                    "inv_left": pc.inv_left.coef.tolist(),
                    "inv_right": pc.inv_right.coef.tolist(),
                    "phi": pc.phi_coeffs,
                }
            )
        return {
            "format": CACHE_FORMAT,
            "version": CACHE_VERSION,
            "a": list(self.a.values),
            "tol": self.tol,
            "pieces": pieces,
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != CACHE_FORMAT or data.get("version") != CACHE_VERSION:
            raise ValueError("not a compatible Omega table cache")
        a = ParamsA.from_sequence(data["a"])
        pieces = []
        b = 0.0
        for item in data["pieces"]:
            lo, hi = item["lo"], item["hi"]
            umax = np.sqrt(0.5 * (hi - lo))
            gl = Chebyshev(item["gl"], domain=[0.0, umax])
            gr = Chebyshev(item["gr"], domain=[0.0, umax])
            left, right = gl.integ(lbnd=0.0), gr.integ(lbnd=0.0)
            tau_l, tau_r = float(left(umax)), float(right(umax))
            pc = _Piece(
                lo, hi, b, b + tau_l + tau_r, umax, left, right, gl, gr, tau_l, tau_r,
                Chebyshev(item["inv_left"], domain=[0.0, tau_l]),
                Chebyshev(item["inv_right"], domain=[0.0, tau_r]),
                list(item["phi"]),
            )
            pieces.append(pc)
            b = pc.b_hi
        return cls(a, data["tol"], _pieces=pieces)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def __repr__(self):
        return f"OmegaTable(a={self.a.values}, b={self.b.tolist()})"


def _invert(series, deriv, tau, umax):
    """Solve series(u) = tau for u in [0, umax] by safeguarded Newton."""
    tau = np.asarray(tau, dtype=float)
    # linear start from the endpoint slope, then Newton; series is increasing and nearly linear
    u = np.clip(tau / deriv(0.0), 0.0, umax)
    for _ in range(50):
        step = (series(u) - tau) / deriv(u)
        u = np.clip(u - step, 0.0, umax)
        if np.max(np.abs(step), initial=0.0) < 1e-16 * max(umax, 1.0):
            break
    return u


def _piece_phi(pc, t, refine=True, gaps=False):
    t = np.asarray(t, dtype=float)
    tau_left = t - pc.b_lo
    tau_right = pc.b_hi - t
    use_left = tau_left <= pc.tau_l
    tl = np.clip(tau_left, 0.0, pc.tau_l)
    tr = np.clip(tau_right, 0.0, pc.tau_r)
    u = np.clip(pc.inv_left(tl), 0.0, pc.umax)
    v = np.clip(pc.inv_right(tr), 0.0, pc.umax)
    if refine:
        u = np.clip(u - (pc.left(u) - tl) / pc.gl(u), 0.0, pc.umax)
        v = np.clip(v - (pc.right(v) - tr) / pc.gr(v), 0.0, pc.umax)
    width = pc.hi - pc.lo
    lo = np.where(use_left, u * u, width - v * v)
    hi = np.where(use_left, width - u * u, v * v)
    s = np.where(use_left, pc.lo + lo, pc.hi - hi)
    # pin the breakpoints
    s = np.where(tau_left <= 0, pc.lo, np.where(tau_right <= 0, pc.hi, s))
    if gaps:
        return s, lo, hi
    return s


def _cache_dir():
    return os.environ.get(CACHE_ENV)


def _cache_key(a, tol):
    text = json.dumps({"a": list(a.values), "tol": tol, "v": CACHE_VERSION})
    return hashlib.sha1(text.encode()).hexdigest()[:16]


@lru_cache(maxsize=16)
def get_table(a=DEFAULT_A, tol=DEFAULT_TOL):
    """Shared table per (a, tol); persisted under $CYCLIDIC_CACHE_DIR when set."""
    a = _as_params(a)
    directory = _cache_dir()
    path = None
    if directory:
        path = os.path.join(directory, f"omega-{_cache_key(a, tol)}.json")
        if os.path.exists(path):
            try:
                table = OmegaTable.load(path)
                if table.a == a:
                    return table
            except (ValueError, KeyError, OSError):
                pass
    table = OmegaTable(a, tol)
    if path:
        try:
            os.makedirs(directory, exist_ok=True)
            table.save(path)
        except OSError:
            pass
    return table


def phi(t, table=None):
    """Inverse of Omega."""
    if table is None:
        table = get_table()
    return table.phi(t)


def check_breakpoints(table, tol=1e-10):
    """Compare table breakpoints with the direct quadrature route."""
    direct = np.array([omega_integral(x, table.a, tol=1e-13) for x in table.a.values])
    diff = float(np.max(np.abs(direct - table.b)))
    if diff > tol:
        raise AccuracyError("breakpoints disagree with direct quadrature", difference=diff)
    return diff
