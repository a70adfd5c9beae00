"""Internal 5-cyclidic harmonics and finite-difference harmonicity checks.

G(x) = (rho^2 + 1)^{-1/2} E1(s1) E2(s2) E3(s3) on the positive sector, extended
by parity.  The coordinates s are invariant under the inversion sigma_0 and
the reflections sigma_1..3, so the extension only contributes the sign
(-1)^{p . eps}, where eps records which generators map the positive
representative to x.  For kinds II and III it is (rho^2 + 1)^{1/2} G that is
extended, which is the same as evaluating the product at the actual rho.
"""

from dataclasses import dataclass

import numpy as np

from .eigensolver import ParityVector, ProblemKind, get_eigen
from .errors import DomainError
from .geometry import DEFAULT_A, _as_params, cyclide_gaps, stereographic_project

A2_FLAG_TOL = 1e-10


def symmetry_exponents(p):
    """eps = (rho > 1, x < 0, y < 0, z < 0) as integer arrays."""
    p = np.asarray(p, dtype=float)
    rho2 = np.sum(p * p, axis=-1)
    return np.stack([rho2 > 1.0, p[..., 0] < 0, p[..., 1] < 0, p[..., 2] < 0], axis=-1).astype(int)


def parity_sign(kind, parity, eps):
    """(-1)^{p . eps} with the generators that act for the given kind."""
    pk = ProblemKind.of(kind)
    bits = np.asarray(ParityVector.parse(parity, pk).bits)
    gens = {"I": [1, 2, 3], "II": [0, 1, 2, 3], "III": [0, 1, 2]}[pk.name]
    power = np.asarray(eps)[..., gens] @ bits
    return 1.0 - 2.0 * (power % 2)


@dataclass
class CyclidicHarmonic:
    triple: object

    @property
    def kind(self):
        return self.triple.kind

    @property
    def parity(self):
        return self.triple.parity

    @property
    def a(self):
        return self.triple.table.a

    def __call__(self, p):
        return eval_G(self, p)

    def w(self, p):
        """(rho^2 + 1)^{1/2} G."""
        p = np.asarray(p, dtype=float)
        return eval_G(self, p) * np.sqrt(np.sum(p * p, axis=-1) + 1.0)


def harmonic(kind, n, parity, a=DEFAULT_A):
    """The harmonic G_{n,p} of the given kind on the shared Omega table."""
    pk = ProblemKind.of(kind)
    return CyclidicHarmonic(get_eigen(pk.name, tuple(n), str(ParityVector.parse(parity, pk)), _as_params(a)))


def product_values(triple, s, lo, hi):
    """E1(s1) E2(s2) E3(s3) from coordinates and their endpoint offsets."""
    table = triple.table
    out = np.ones(np.shape(s)[:-1])
    for i in (1, 2, 3):
        t = table.omega_from_gaps(i, lo[..., i - 1], hi[..., i - 1])
        out = out * triple.u[i](t)
    return out


def _check_domain(kind, p, s, hi):
    rho2 = np.sum(p * p, axis=-1)
    if kind == "I" and np.any(rho2 > 1.0 + 1e-12):
        raise DomainError("harmonics of the first kind live in the closed unit ball")
    if kind == "III" and np.any(p[..., 2] <= 0):
        raise DomainError("harmonics of the third kind live in the upper half-space z > 0")
    return rho2


def eval_G(h, p, return_flags=False):
    """G at points p (vectorised).

    For the second kind, points on the set s2 = a2 (where harmonicity may fail)
    are evaluated and, with ``return_flags``, reported in a boolean array.
    """
    triple = h.triple if isinstance(h, CyclidicHarmonic) else h
    kind = triple.kind.name
    p = np.asarray(p, dtype=float)
    s, lo, hi = cyclide_gaps(p, triple.table.a)
    rho2 = _check_domain(kind, p, s, hi)
    sign = parity_sign(kind, triple.parity, symmetry_exponents(p))
    g = sign * product_values(triple, s, lo, hi) / np.sqrt(rho2 + 1.0)
    if return_flags:
        scale = triple.table.a.scale
        flags = hi[..., 1] < A2_FLAG_TOL * scale if kind == "II" else np.zeros(g.shape, dtype=bool)
        return g, flags
    return g


# ---------------------------------------------------------------------------
# finite differences

def laplacian_residual(f, p, h=1e-3):
    """Seven-point finite-difference Laplacian of a vectorised field f at points p."""
    p = np.asarray(p, dtype=float)
    dim = p.shape[-1]
    centre = f(p)
    total = -2.0 * dim * centre
    for k in range(dim):
        step = np.zeros(dim)
        step[k] = h
        total = total + f(p + step) + f(p - step)
    return total / (h * h)


def laplacian_convergence(f, p, h=1e-2):
    """Residual norms at h and h/2 and their ratio (about 4 for O(h^2) convergence)."""
    r1 = laplacian_residual(f, p, h)
    r2 = laplacian_residual(f, p, h / 2)
    n1 = float(np.sqrt(np.mean(r1 * r1)))
    n2 = float(np.sqrt(np.mean(r2 * r2)))
    return {"h": h, "residual_h": n1, "residual_h2": n2, "ratio": n1 / n2 if n2 > 0 else np.inf}


def lift_to_r4(w):
    """U(X) = |X|^{-1/2} w(P(X/|X|)), homogeneous of degree -1/2 on R^4.

    U is harmonic exactly when w (rho^2 + 1)^{-1/2} is harmonic in R^3.
    """

    def U(X):
        X = np.asarray(X, dtype=float)
        r = np.sqrt(np.sum(X * X, axis=-1))
        return w(stereographic_project(X / r[..., None])) / np.sqrt(r)

    return U


def sample_points(kind, count, seed=0, a=DEFAULT_A, margin=0.05):
    """Random points where G of the given kind is smooth, for finite-difference checks.

    Kind I: |p| < 0.8.  Kind II: the box [-2, 2]^3 with a2 - s2 > margin (a3 - a0),
    away from the set where harmonicity can fail.  Kind III: z > 0.2.
    """
    kind = ProblemKind.of(kind).name
    a = _as_params(a)
    rng = np.random.default_rng(seed)
    out = []
    while sum(len(o) for o in out) < count:
        p = rng.uniform(-2.0, 2.0, size=(4 * count, 3))
        if kind == "I":
            p = p * 0.4
            p = p[np.sum(p * p, axis=-1) < 0.64]
        elif kind == "II":
            _, _, hi = cyclide_gaps(p, a)
            p = p[hi[:, 1] > margin * a.scale]
        else:
            p[:, 2] = np.abs(p[:, 2]) * 0.9 + 0.2
        out.append(p)
    return np.concatenate(out)[:count]
