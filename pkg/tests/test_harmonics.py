import numpy as np
import pytest
from hypothesis import given, strategies as st

from cyclidic.errors import DomainError
from cyclidic.geometry import apply_symmetry
from cyclidic.harmonics import (
    eval_G,
    harmonic,
    laplacian_convergence,
    laplacian_residual,
    lift_to_r4,
    parity_sign,
    sample_points,
    symmetry_exponents,
)

coord = st.floats(-2.0, 2.0, allow_nan=False)


@pytest.mark.parametrize(
    "kind,n,parity",
    [("I", (0, 0), "000"), ("I", (2, 1), "011"), ("II", (1, 1), "1001"), ("II", (0, 2), "0110"),
     ("III", (1, 0), "000"), ("III", (2, 2), "111")],
)
def test_second_order_laplacian_convergence(kind, n, parity):
    h = harmonic(kind, n, parity)
    p = sample_points(kind, 40, seed=3)
    rep = laplacian_convergence(h, p, 1e-2)
    assert 3.8 < rep["ratio"] < 4.2


def test_non_harmonic_field_is_detected():
    p = sample_points("I", 20, seed=1)
    rep = laplacian_convergence(lambda x: np.sum(x * x, axis=-1), p, 1e-2)
    # Laplacian of |x|^2 is 6: the residual does not shrink
    np.testing.assert_allclose(laplacian_residual(lambda x: np.sum(x * x, axis=-1), p, 1e-2), 6.0, rtol=1e-8)
    assert rep["ratio"] < 1.01


@given(st.tuples(coord, coord, coord), st.integers(1, 3))
def test_reflection_parity(p, i):
    p = np.array(p) * 0.45
    if np.dot(p, p) > 0.8 or np.min(np.abs(p)) < 1e-3:
        return
    h = harmonic("I", (1, 2), "110")
    bit = (1, 1, 0)[i - 1]
    assert abs(h(apply_symmetry(i, p)) - (-1) ** bit * h(p)) < 1e-11 * max(1.0, abs(h(p)))


@given(st.tuples(coord, coord, coord))
def test_kelvin_parity_kind_two(p):
    p = np.array(p)
    r2 = np.dot(p, p)
    if r2 < 0.05 or abs(r2 - 1) < 1e-3:
        return
    h = harmonic("II", (1, 2), "1011")
    # G(p / |p|^2) = (-1)^{p0} |p| G(p): the Kelvin transform of a parity-0 harmonic is itself
    assert abs(h(p / r2) + np.sqrt(r2) * h(p)) < 1e-10 * max(1.0, abs(h(p)) * np.sqrt(r2))


def test_kelvin_parity_kind_three():
    p = np.array([[0.3, -0.4, 0.7], [1.2, 0.5, 2.0], [-0.1, 0.2, 0.05]])
    r2 = np.sum(p * p, axis=1)
    for parity, sign in (("101", -1), ("011", 1)):
        h = harmonic("III", (1, 2), parity)
        np.testing.assert_allclose(h(p / r2[:, None]), sign * np.sqrt(r2) * h(p), rtol=1e-10)


def test_parity_sign_table():
    eps = np.array([[1, 0, 1, 1], [0, 1, 1, 0]])
    np.testing.assert_array_equal(parity_sign("I", "101", eps), [-1, -1])
    np.testing.assert_array_equal(parity_sign("II", "1101", eps), [1, -1])
    np.testing.assert_array_equal(parity_sign("III", "110", eps), [-1, -1])
    np.testing.assert_array_equal(symmetry_exponents(np.array([[2.0, -1.0, 0.5]])), [[1, 0, 1, 0]])


def test_lift_to_four_dimensions_is_harmonic(rng):
    h = harmonic("II", (1, 1), "0101")
    U = lift_to_r4(h.w)
    X = rng.normal(size=(30, 4))
    X[:, 0] = -np.abs(X[:, 0])  # keep away from the projection pole direction
    X /= np.linalg.norm(X, axis=1)[:, None]
    X *= rng.uniform(0.8, 1.5, size=(30, 1))
    # avoid the set s2 = a2, where harmonicity may fail
    _, flags = eval_G(h, _project(X), return_flags=True)
    X = X[~flags]
    rep = laplacian_convergence(U, X, 1e-2)
    assert 3.8 < rep["ratio"] < 4.2


def _project(X):
    Y = X / np.linalg.norm(X, axis=1)[:, None]
    return Y[:, 1:] / (1 - Y[:, :1])


def test_domains_and_flags():
    with pytest.raises(DomainError):
        harmonic("I", (0, 0), "000")(np.array([1.5, 0.0, 0.1]))
    with pytest.raises(DomainError):
        harmonic("III", (0, 0), "000")(np.array([0.5, 0.5, -0.1]))
    h = harmonic("II", (0, 1), "0000")
    # on the x-axis s2 = a2
    g, flags = eval_G(h, np.array([[0.5, 0.0, 0.0], [0.5, 0.3, 0.2]]), return_flags=True)
    assert flags.tolist() == [True, False]
    assert np.all(np.isfinite(g))


def test_w_is_g_times_weight():
    h = harmonic("III", (0, 1), "010")
    p = np.array([[0.2, 0.4, 1.3]])
    np.testing.assert_allclose(h.w(p), h(p) * np.sqrt(np.sum(p * p) + 1))
