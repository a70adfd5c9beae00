"""Single Sturm-Liouville equations u'' + sigma * Q(phi(t)) * u = 0 on one interval.

Two independent routes are provided:

* Runge-Kutta shooting in Pruefer variables (u = rho sin theta,
  u' = rho cos theta).  Zero counts come from crossings of theta through
  multiples of pi, and log(rho) keeps exponentially growing solutions finite.
* Chebyshev collocation of the eigenvalue problem.  This is the fast route
  used by the two-parameter solver; shooting is used to verify it.

``potential`` hooks replace the lambda2-free part 3/16 phi^2 + lambda1 phi of
Q(phi(t)) by an arbitrary function of t; lambda2 is still added.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg
from numpy.polynomial import Chebyshev
from scipy.integrate import solve_ivp

from . import cheb
from .errors import (
    AccuracyError,
    ConvergenceError,
    ParameterError,
    SearchError,
    TrivialSolutionError,
)

NEUMANN = "neumann"
DIRICHLET = "dirichlet"
DEFAULT_RTOL = 1e-12
DEFAULT_ATOL = 1e-13

_ode_tol = {"rtol": DEFAULT_RTOL, "atol": DEFAULT_ATOL}


def set_ode_tolerances(rtol=None, atol=None):
    """Process-wide Runge-Kutta tolerances used when a call passes none."""
    for name, value in (("rtol", rtol), ("atol", atol)):
        if value is None:
            continue
        if not (value > 0 and math.isfinite(value)):
            raise ParameterError(f"ODE {name} must be positive, got {value!r}")
        _ode_tol[name] = float(value)
    return dict(_ode_tol)


def ode_tolerances():
    return dict(_ode_tol)


@dataclass(frozen=True)
class VanVleck:
    """Separation constants of Q(s) = 3/16 s^2 + lambda1 s + lambda2."""

    lambda1: float
    lambda2: float

    def __post_init__(self):
        if not (math.isfinite(self.lambda1) and math.isfinite(self.lambda2)):
            raise ParameterError("separation constants must be finite")

    def __call__(self, s):
        return van_vleck(s, self)


def van_vleck(s, vv):
    return 0.1875 * s * s + vv.lambda1 * s + vv.lambda2


def bc_from_bit(bit):
    """Parity bit 0 -> u' = 0 (exponent 0); bit 1 -> u = 0 (exponent 1/2)."""
    if bit not in (0, 1):
        raise ParameterError(f"parity bits are 0 or 1, got {bit!r}")
    return NEUMANN if bit == 0 else DIRICHLET


def init_from_bit(bit):
    """Initial (u, u') selected by a parity bit: (1, 0) or (0, 1)."""
    return (1.0, 0.0) if bc_from_bit(bit) == NEUMANN else (0.0, 1.0)


@dataclass(frozen=True)
class BCPair:
    left: str = NEUMANN
    right: str = NEUMANN

    def __post_init__(self):
        for side in (self.left, self.right):
            if side not in (NEUMANN, DIRICHLET):
                raise ParameterError(f"boundary condition must be {NEUMANN!r} or {DIRICHLET!r}, got {side!r}")

    @classmethod
    def from_bits(cls, left, right):
        return cls(bc_from_bit(left), bc_from_bit(right))

    @property
    def dirichlet_count(self):
        return (self.left == DIRICHLET) + (self.right == DIRICHLET)


def _interval_index(table, interval):
    lo, hi = float(interval[0]), float(interval[1])
    for j in (1, 2, 3):
        blo, bhi = table.interval(j)
        if abs(lo - blo) <= 1e-12 * (1 + abs(blo)) and abs(hi - bhi) <= 1e-12 * (1 + abs(bhi)):
            return j
    return None


def _potential_functions(interval, lambda1, table, potential):
    """Vectorised and scalar versions of the lambda2-free potential on the interval."""
    if potential is not None:
        return potential, potential
    if table is None:
        raise ParameterError("need an Omega table (or a potential hook)")
    j = _interval_index(table, interval)
    if j is None:
        raise ParameterError(f"interval {tuple(interval)} is not one of [b0,b1], [b1,b2], [b2,b3]")
    series = table.phi_series(j)
    coeffs = [float(c) for c in series.coef]
    lo, hi = table.interval(j)

    def vec(t):
        p = series(t)
        return 0.1875 * p * p + lambda1 * p

    def scalar(t):
        p = cheb.clenshaw(coeffs, lo, hi, t)
        return 0.1875 * p * p + lambda1 * p

    return vec, scalar


# ---------------------------------------------------------------------------
# Runge-Kutta integration in Pruefer variables

@dataclass
class IvpSolution:
    """Solution of u'' + sigma Q u = 0 from one endpoint to the other."""

    interval: tuple
    sign: int
    start: float
    end: float
    dense: object  # scipy OdeSolution over (theta, log rho)
    t: np.ndarray  # integrator steps
    theta: np.ndarray
    logrho: np.ndarray

    def state(self, t):
        """(u, u') at t, vectorised."""
        theta, lr = self.dense(t)
        rho = np.exp(lr)
        return rho * np.sin(theta), rho * np.cos(theta)

    def u(self, t):
        return self.state(t)[0]

    def du(self, t):
        return self.state(t)[1]

    def phase(self, t):
        return self.dense(t)[0]

    @property
    def theta_start(self):
        return float(self.theta[0])

    @property
    def theta_end(self):
        return float(self.theta[-1])

    @property
    def terminal(self):
        return tuple(float(v) for v in self.state(self.end))

    @property
    def zero_count(self):
        return count_zeros(self)

    def theta_at(self, side):
        """Phase at the left or right end of the interval."""
        at_left = (self.start <= self.end) == (side == "left")
        return self.theta_start if at_left else self.theta_end


def integrate_ivp(interval, sign, vv, init, direction="left-to-right", table=None,
                  potential=None, rtol=None, atol=None, stop=None):
    """Integrate from one endpoint across the interval with dense output.

    ``init`` is (u, u') at the starting endpoint; ``direction`` is
    ``"left-to-right"`` or ``"right-to-left"``.  ``stop`` ends the integration
    at an interior point instead of the far endpoint.
    """
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign!r}")
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise ParameterError("interval must have positive length")
    u0, du0 = (float(v) for v in init)
    if u0 == 0.0 and du0 == 0.0:
        raise TrivialSolutionError("initial vector (0, 0) gives the zero solution")
    if direction == "left-to-right":
        start, end = lo, hi
    elif direction == "right-to-left":
        start, end = hi, lo
    else:
        raise ParameterError(f"unknown direction {direction!r}")
    if stop is not None:
        if not lo <= stop <= hi:
            raise ParameterError(f"stop point {stop} is outside the interval")
        end = float(stop)
    _, q0 = _potential_functions((lo, hi), vv.lambda1, table, potential)
    lam2 = vv.lambda2
    rtol = _ode_tol["rtol"] if rtol is None else rtol
    atol = _ode_tol["atol"] if atol is None else atol

    def rhs(t, y):
        c = math.cos(y[0])
        s = math.sin(y[0])
        q = sign * (q0(t) + lam2)
        return [c * c + q * s * s, (1.0 - q) * s * c]

    theta0 = math.atan2(u0, du0)
    y0 = [theta0, math.log(math.hypot(u0, du0))]
    res = solve_ivp(rhs, (start, end), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
    if not res.success:
        raise AccuracyError("Runge-Kutta integration failed", message=res.message, interval=(lo, hi))
    return IvpSolution((lo, hi), sign, start, end, res.sol, res.t, res.y[0], res.y[1])


def count_zeros(sol, tol=1e-6):
    """Interior zeros of u: multiples of pi strictly between the end phases.

    theta increases through every multiple of pi (theta' = 1 there), so the
    count is exact; ``tol`` keeps a zero sitting on an endpoint from counting.
    """
    a = sol.theta_at("left") / math.pi
    b = sol.theta_at("right") / math.pi
    n = math.ceil(b - tol) - math.floor(a + tol) - 1
    return max(int(n), 0)


def bc_residual(sol, bc, side="right"):
    """|cos theta| for u' = 0, |sin theta| for u = 0, at the given end."""
    theta = sol.theta_at(side)
    return abs(math.cos(theta)) if bc == NEUMANN else abs(math.sin(theta))


def wronskian(sol1, sol2, t):
    """u1 u2' - u1' u2, constant along the interval for two solutions of the same equation."""
    u1, d1 = sol1.state(t)
    u2, d2 = sol2.state(t)
    return u1 * d2 - d1 * u2


def _phase_target(bc, n):
    return n * math.pi + (0.5 * math.pi if bc.right == NEUMANN else math.pi)


def _initial_vector(bc_side):
    return (1.0, 0.0) if bc_side == NEUMANN else (0.0, 1.0)


def shooting_eigenvalue(interval, sign, lambda1, bc, n, table=None, potential=None,
                        rtol=None, atol=None, bracket=None, xtol=1e-12):
    """lambda2 by Pruefer shooting and bisection on the terminal phase."""
    from scipy.optimize import brentq

    lo, hi = float(interval[0]), float(interval[1])
    target = _phase_target(bc, n)
    init = _initial_vector(bc.left)
    vec, _ = _potential_functions((lo, hi), lambda1, table, potential)

    def miss(mu):
        sol = integrate_ivp((lo, hi), sign, VanVleck(lambda1, sign * mu), init, table=table,
                            potential=potential, rtol=rtol, atol=atol)
        return sol.theta_end - target

    if bracket is None:
        mu_lo, mu_hi = _mu_bracket(vec, sign, lo, hi, n)
    else:
        mu_lo, mu_hi = sorted(sign * np.asarray(bracket, dtype=float))
    f_lo, f_hi = miss(mu_lo), miss(mu_hi)
    tried = [(mu_lo, mu_hi)]
    for _ in range(60):
        if f_lo < 0 < f_hi:
            break
        width = mu_hi - mu_lo
        if f_lo >= 0:
            mu_lo -= width
            f_lo = miss(mu_lo)
        if f_hi <= 0:
            mu_hi += width
            f_hi = miss(mu_hi)
        tried.append((mu_lo, mu_hi))
    else:
        raise SearchError("could not bracket the shooting eigenvalue", brackets=tried[-1])
    mu = brentq(miss, mu_lo, mu_hi, xtol=xtol * max(1.0, abs(mu_lo), abs(mu_hi)), rtol=1e-15, maxiter=200)
    return sign * mu


def _mu_bracket(vec, sign, lo, hi, n):
    """Constant-potential bounds for mu = sigma lambda2 giving n interior zeros."""
    t = cheb.map_to((lo, hi), cheb.lobatto(64))
    q = sign * vec(t)
    length = hi - lo
    return (n * math.pi / length) ** 2 - np.max(q) - 1.0, ((n + 1) * math.pi / length) ** 2 - np.min(q) + 1.0


# ---------------------------------------------------------------------------
# Chebyshev collocation

@dataclass
class SLEigen:
    """The n-th eigenpair of one equation at fixed lambda1.

    ``u`` is the eigenfunction as a Chebyshev series in t (unnormalised: scaled
    to max |u| = 1 over the collocation nodes, with the sign convention applied); ``mean_phi`` is the
    u^2-weighted mean of phi, so that d lambda2 / d lambda1 = -mean_phi.
    """

    lambda2: float
    n: int
    sign: int
    interval: tuple
    bc: BCPair
    u: Chebyshev
    mean_phi: float
    degree: int


def _bc_rows(d, bc):
    m = d.shape[0]
    rows = np.zeros((2, m))
    for k, (side, idx) in enumerate(((bc.left, 0), (bc.right, m - 1))):
        if side == NEUMANN:
            rows[k] = d[idx]
        else:
            rows[k, idx] = 1.0
    return rows


def _reduced_operator(n_pts, lo, hi, sign, q, bc):
    """Collocation matrix of -u'' - sigma q u with both boundary rows eliminated."""
    scale = 2.0 / (hi - lo)
    d = cheb.diff_matrix(n_pts) * scale
    a = -(d @ d)
    a[np.diag_indices_from(a)] -= sign * q
    c = _bc_rows(d, bc)
    bidx = [0, n_pts]
    iidx = np.arange(1, n_pts)
    elim = -np.linalg.solve(c[:, bidx], c[:, iidx])  # u_B = elim @ u_I
    red = a[np.ix_(iidx, iidx)] + a[np.ix_(iidx, bidx)] @ elim
    return red, elim


def _sign_convention(u_vals, du_vals):
    """Make the first nonvanishing of (u, u') at the left end positive."""
    ref = u_vals[0] if abs(u_vals[0]) > 1e-8 * np.max(np.abs(u_vals)) else du_vals[0]
    return -1.0 if ref < 0 else 1.0


def sl_eigen(interval, sign, lambda1, bc, n, table=None, potential=None, tol=1e-13, nmax=1024):
    """n-th eigenpair of u'' + sigma (q0 + lambda2) u = 0 by Chebyshev collocation.

    Writing mu = sigma lambda2, the problem is -u'' - sigma q0 u = mu u; the
    n-th smallest mu has an eigenfunction with exactly n interior zeros.
    The degree is increased until the eigenfunction's Chebyshev tail is below
    ``tol``.
    """
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign!r}")
    if n < 0:
        raise ParameterError("zero count must be nonnegative")
    lo, hi = float(interval[0]), float(interval[1])
    j = None if potential is not None else _interval_index(table, (lo, hi))
    if potential is None and j is None:
        raise ParameterError(f"interval {(lo, hi)} is not one of [b0,b1], [b1,b2], [b2,b3]")
    n_pts = max(32, 8 + 4 * n)
    while True:
        if potential is None:
            t, phi_t = table.phi_at_lobatto(j, n_pts)
            q = 0.1875 * phi_t * phi_t + lambda1 * phi_t
        else:
            t = cheb.map_to((lo, hi), cheb.lobatto(n_pts))
            q = potential(t)
        red, elim = _reduced_operator(n_pts, lo, hi, sign, q, bc)
        vals, vecs = scipy.linalg.eig(red)
        real = np.abs(vals.imag) <= 1e-8 * np.maximum(1.0, np.abs(vals.real))
        order = np.argsort(np.where(real, vals.real, np.inf))
        if n >= int(np.sum(real)):
            raise ConvergenceError("not enough real collocation eigenvalues", n=n, degree=n_pts)
        k = order[n]
        mu = float(vals[k].real)
        ui = vecs[:, k].real
        full = np.empty(n_pts + 1)
        full[1:-1] = ui
        full[[0, -1]] = elim @ ui
        coef = cheb.vals2coeffs(full)
        if cheb.tail_ratio(coef) < tol or n_pts >= nmax:
            break
        n_pts = int(n_pts * 1.5)
    if cheb.tail_ratio(coef) >= max(tol, 1e-11):
        raise ConvergenceError("eigenfunction not resolved", degree=n_pts, tail=cheb.tail_ratio(coef))
    series = Chebyshev(coef, domain=[lo, hi])
    dseries = series.deriv()
    flip = _sign_convention(series(np.array([lo, hi])), dseries(np.array([lo, hi])))
    amp = np.max(np.abs(full))
    series = series * (flip / amp)
    w = cheb.cc_weights(n_pts) * 0.5 * (hi - lo)
    u2 = (full / amp) ** 2
    mean_phi = float("nan")
    if potential is None:
        mean_phi = float(np.dot(w, phi_t * u2) / np.dot(w, u2))
    return SLEigen(sign * mu, n, sign, (lo, hi), bc, series, mean_phi, n_pts)


def single_sl_eigenvalue(interval, sign, lambda1, bc, n, table=None, method="spectral",
                         potential=None, **kwargs):
    """The unique lambda2 whose eigenfunction meets ``bc`` with exactly n interior zeros."""
    if method == "spectral":
        return sl_eigen(interval, sign, lambda1, bc, n, table=table, potential=potential, **kwargs).lambda2
    if method == "shooting":
        return shooting_eigenvalue(interval, sign, lambda1, bc, n, table=table, potential=potential, **kwargs)
    raise ParameterError(f"unknown method {method!r}")


def _collocation_piece(lo, hi, sign, vec, lam2, u0, du0, at, n_pts):
    """Values of u and u' at the Lobatto nodes of [lo, hi] for data (u0, du0) at one end.

    The unknown is v = u'' with u = u0 + u0' (t - t0) + (J^2 v)(t), J integrating
    from t0, which gives the second-kind system
    (I + sigma diag(Q) J^2) v = -sigma Q (u0 + u0' (t - t0)).
    """
    t0 = lo if at == "left" else hi
    t = cheb.map_to((lo, hi), cheb.lobatto(n_pts))
    jm = cheb.integration_matrix(n_pts) * (0.5 * (hi - lo))
    if at == "right":
        jm = jm - jm[-1][None, :]
    q = sign * (vec(t) + lam2)
    base = u0 + du0 * (t - t0)
    j2 = jm @ jm
    v = np.linalg.solve(np.eye(n_pts + 1) + q[:, None] * j2, -q * base)
    return base + j2 @ v, du0 + jm @ v


def collocation_ivp(interval, sign, vv, init, at="left", table=None, potential=None, tol=1e-13, nmax=1024):
    """Single Chebyshev series solving u'' + sigma Q u = 0 with (u, u') given at one end.

    Accurate relative to max |u|; see :func:`piecewise_ivp` for solutions
    spanning many orders of magnitude.
    """
    lo, hi = float(interval[0]), float(interval[1])
    u0, du0 = (float(v) for v in init)
    if u0 == 0.0 and du0 == 0.0:
        raise TrivialSolutionError("initial vector (0, 0) gives the zero solution")
    if at not in ("left", "right"):
        raise ParameterError(f"initial point must be 'left' or 'right', got {at!r}")
    vec, _ = _potential_functions((lo, hi), vv.lambda1, table, potential)
    n_pts = 32
    while True:
        vals, _ = _collocation_piece(lo, hi, sign, vec, vv.lambda2, u0, du0, at, n_pts)
        coef = cheb.vals2coeffs(vals)
        if cheb.tail_ratio(coef) < tol or n_pts >= nmax:
            break
        n_pts = int(n_pts * 1.5)
    if cheb.tail_ratio(coef) >= max(tol, 1e-11):
        raise ConvergenceError("initial-value solution not resolved", degree=n_pts)
    return Chebyshev(coef, domain=[lo, hi])


class PiecewiseSeries:
    """u on an interval as Chebyshev pieces, piece k scaled by exp(log_scale[k]).

    Keeps full relative accuracy for solutions that grow or decay by many
    orders of magnitude across the interval.
    """

    def __init__(self, breaks, pieces, log_scale, sign=1.0):
        self.breaks = np.asarray(breaks, dtype=float)
        self.pieces = list(pieces)
        self.log_scale = np.asarray(log_scale, dtype=float)
        self.sign = float(sign)
        self.domain = np.array([self.breaks[0], self.breaks[-1]])

    def _eval(self, series, t):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        k = np.clip(np.searchsorted(self.breaks, flat, side="right") - 1, 0, len(series) - 1)
        out = np.empty(flat.shape)
        for i in np.unique(k):
            m = k == i
            out[m] = series[i](flat[m]) * math.exp(self.log_scale[i])
        out = self.sign * out.reshape(t.shape)
        return out if out.ndim else float(out)

    def __call__(self, t):
        return self._eval(self.pieces, t)

    def deriv(self):
        return PiecewiseSeries(self.breaks, [p.deriv() for p in self.pieces], self.log_scale, self.sign)

    @property
    def degree(self):
        return max(len(p.coef) for p in self.pieces) - 1

    def __mul__(self, c):
        c = float(c)
        if c == 0:
            raise ParameterError("cannot scale a piecewise solution by zero")
        return PiecewiseSeries(self.breaks, self.pieces, self.log_scale + math.log(abs(c)),
                               self.sign * math.copysign(1.0, c))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / float(c))


def piecewise_ivp(interval, sign, vv, init, at="left", table=None, potential=None, tol=1e-14,
                  max_growth=1e3, n_pts=32):
    """Initial-value solution from one end as a :class:`PiecewiseSeries`.

    Pieces are collocated one after another, each started from the previous
    piece's end state rescaled to unit size; a piece is halved until its
    Chebyshev tail is below ``tol`` and the state grows by at most
    ``max_growth`` across it.
    """
    lo, hi = float(interval[0]), float(interval[1])
    u0, du0 = (float(v) for v in init)
    if u0 == 0.0 and du0 == 0.0:
        raise TrivialSolutionError("initial vector (0, 0) gives the zero solution")
    if at not in ("left", "right"):
        raise ParameterError(f"initial point must be 'left' or 'right', got {at!r}")
    vec, _ = _potential_functions((lo, hi), vv.lambda1, table, potential)
    length = hi - lo
    direction = 1.0 if at == "left" else -1.0
    pos = lo if at == "left" else hi
    norm = math.hypot(u0, du0)
    state = (u0 / norm, du0 / norm)
    scale = math.log(norm)
    step = length / 4
    pieces = []
    while True:
        end = pos + direction * step
        last = (end >= hi) if direction > 0 else (end <= lo)
        if last:
            end = hi if direction > 0 else lo
        a_, b_ = (pos, end) if direction > 0 else (end, pos)
        side = "left" if direction > 0 else "right"
        vals, dvals = _collocation_piece(a_, b_, sign, vec, vv.lambda2, state[0], state[1], side, n_pts)
        coef = cheb.vals2coeffs(vals)
        growth = float(np.max(np.hypot(vals, dvals)))
        if cheb.tail_ratio(coef) > tol or growth > max_growth:
            step *= 0.5
            if step < 1e-9 * length:
                raise ConvergenceError("piecewise initial-value solution not resolved", at=pos)
            continue
        pieces.append((a_, b_, Chebyshev(coef, domain=[a_, b_]), scale))
        end_state = (vals[-1], dvals[-1]) if direction > 0 else (vals[0], dvals[0])
        norm = math.hypot(*end_state)
        state = (end_state[0] / norm, end_state[1] / norm)
        scale += math.log(norm)
        pos = end
        if last:
            break
        step *= 1.5
    pieces.sort(key=lambda p: p[0])
    breaks = [p[0] for p in pieces] + [pieces[-1][1]]
    return PiecewiseSeries(breaks, [p[2] for p in pieces], [p[3] for p in pieces])
