"""Reference values frozen into the tests, from routes independent of the library's.

* Omega: scipy's QUADPACK QAWS rule, which integrates the algebraic endpoint
  singularities of 1/omega exactly in its weight.
* Eigenvalues: the two-parameter problem solved with Runge-Kutta shooting on
  both equations and Brent's method on lambda1 (the library uses Chebyshev
  collocation and Newton's method).

Run:  python3 scripts/oracles.py
"""

import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from cyclidic.eigensolver import ProblemKind, ParityVector
from cyclidic.elliptic import get_table
from cyclidic.sturm import shooting_eigenvalue

A = (0.0, 1.0, 2.0, 3.0)


def omega_qaws(s, a=A):
    """Omega(s) = int_{a0}^{s} d sigma / |prod (sigma - a_j)|^{1/2} with QAWS on each piece."""
    total = 0.0
    for j in (1, 2, 3):
        lo, hi = a[j - 1], a[j]
        if s <= lo:
            break
        end = min(s, hi)
        others = [a[k] for k in range(4) if k not in (j - 1, j)]

        def f(x, others=others):
            return 1.0 / math.sqrt(abs((x - others[0]) * (x - others[1])))

        if end == hi:
            v, _ = quad(f, lo, hi, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-14, epsrel=1e-14, limit=200)
        else:
            def g(x, f=f, hi=hi):
                return f(x) / math.sqrt(hi - x)

            v, _ = quad(g, lo, end, weight="alg", wvar=(-0.5, 0.0), epsabs=1e-14, epsrel=1e-14, limit=200)
        total += v
    return total


def shooting_pair(kind, n, parity, lam1_bracket):
    """(lambda1, lambda2) where both shooting eigencurves cross."""
    pk = ProblemKind.of(kind)
    parity = ParityVector.parse(parity, pk)
    table = get_table(A)
    setup = [(table.interval(j), sign, bc, nj) for (j, sign), bc, nj in zip(pk.spectral, pk.bc_pairs(parity), n)]

    def curves(l1):
        return [shooting_eigenvalue(iv, sg, l1, bc, nj, table=table) for iv, sg, bc, nj in setup]

    def gap(l1):
        la, lb = curves(l1)
        return la - lb

    l1 = brentq(gap, *lam1_bracket, xtol=1e-13, rtol=1e-14)
    la, lb = curves(l1)
    return l1, 0.5 * (la + lb), abs(la - lb)


CASES = [
    ("I", (0, 0), "000", (-5.0, 5.0)),
    ("I", (1, 2), "101", (-60.0, 0.0)),
    ("II", (0, 0), "0000", (-5.0, 5.0)),
    ("II", (2, 1), "1010", (-20.0, 40.0)),
    ("III", (0, 0), "000", (-5.0, 5.0)),
    ("III", (1, 2), "011", (0.0, 60.0)),
]


if __name__ == "__main__":
    print("Omega at the breakpoints and interior points (QAWS):")
    for s in (1.0, 2.0, 3.0, 0.3, 1.5, 2.7):
        print(f"  Omega({s}) = {omega_qaws(s)!r}")
    print("eigenvalues by shooting:")
    for kind, n, parity, br in CASES:
        l1, l2, miss = shooting_pair(kind, n, parity, br)
        print(f"  {kind} {n} {parity}: lambda1={l1!r} lambda2={l2!r} (gap {miss:.1e})")
