"""Chebyshev-Lobatto utilities: nodes, differentiation, interpolation, quadrature.

Nodes are always returned in ascending order, ``x_j = -cos(pi j / n)``.
"""

from functools import lru_cache

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.fft import dct


@lru_cache(maxsize=None)
def lobatto(n):
    """n+1 Chebyshev-Lobatto nodes on [-1, 1], ascending."""
    x = -np.cos(np.pi * np.arange(n + 1) / n)
    # exact symmetry and endpoints
    x = 0.5 * (x - x[::-1])
    x.flags.writeable = False
    return x


@lru_cache(maxsize=None)
def diff_matrix(n):
    """Spectral differentiation matrix on ``lobatto(n)``."""
    x = lobatto(n)
    w = (-1.0) ** np.arange(n + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    d = (w[None, :] / w[:, None]) / dx
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    d.flags.writeable = False
    return d


@lru_cache(maxsize=None)
def cc_weights(n):
    """Clenshaw-Curtis weights for ``lobatto(n)`` on [-1, 1]."""
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    inner = slice(1, n)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n * n - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k * k - 1)
        v -= np.cos(n * theta[inner]) / (n * n - 1)
    else:
        w[0] = w[n] = 1.0 / (n * n)
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k * k - 1)
    w[inner] = 2.0 * v / n
    w.flags.writeable = False
    return w


@lru_cache(maxsize=None)
def integration_matrix(n):
    """Values at ``lobatto(n)`` of the integral from -1 of the interpolant through given values."""
    eye = np.eye(n + 1)
    coeffs = vals2coeffs(eye)  # column k: coefficients of the k-th cardinal function
    x = lobatto(n)
    out = np.empty((n + 1, n + 1))
    for k in range(n + 1):
        out[:, k] = np.polynomial.chebyshev.chebval(x, np.polynomial.chebyshev.chebint(coeffs[:, k], lbnd=-1))
    out.flags.writeable = False
    return out


def map_to(domain, x):
    lo, hi = domain
    return lo + 0.5 * (x + 1.0) * (hi - lo)


def vals2coeffs(values):
    """Chebyshev coefficients of the interpolant through values at ``lobatto(n)``."""
    f = np.asarray(values, dtype=float)[::-1]
    n = f.shape[0] - 1
    c = dct(f, type=1, axis=0) / n
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def interpolant(values, domain):
    return Chebyshev(vals2coeffs(values), domain=list(domain))


def fit(func, domain, tol=1e-15, nmin=16, nmax=4096):
    """Adaptive Chebyshev interpolant of a vectorised ``func`` on ``domain``.

    The degree is doubled until the trailing coefficients fall below
    ``tol`` relative to the largest one.
    """
    n = nmin
    while True:
        vals = func(map_to(domain, lobatto(n)))
        c = vals2coeffs(vals)
        scale = max(np.max(np.abs(c)), 1e-300)
        if np.max(np.abs(c[-4:])) <= tol * scale:
            keep = np.nonzero(np.abs(c) > 0.1 * tol * scale)[0]
            m = int(keep[-1]) + 1 if keep.size else 1
            return Chebyshev(c[:m], domain=list(domain))
        if n >= nmax:
            raise ArithmeticError(f"Chebyshev fit did not resolve at degree {n}")
        n *= 2


def tail_ratio(coeffs):
    c = np.abs(np.asarray(coeffs))
    return float(np.max(c[-3:]) / max(np.max(c), 1e-300))


def clenshaw(coeffs, lo, hi, t):
    """Scalar Clenshaw evaluation in plain floats (fast inside ODE right-hand sides)."""
    x = (2.0 * t - lo - hi) / (hi - lo)
    x2 = 2.0 * x
    b1 = 0.0
    b2 = 0.0
    for c in reversed(coeffs[1:]):
        b1, b2 = c + x2 * b1 - b2, b1
    return coeffs[0] + x * b1 - b2


def gauss_legendre(m, domain):
    """m-point Gauss-Legendre nodes and weights mapped to ``domain``."""
    x, w = _leggauss(m)
    lo, hi = domain
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


@lru_cache(maxsize=None)
def _leggauss(m):
    x, w = np.polynomial.legendre.leggauss(m)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w
