import numpy as np
import pytest
from hypothesis import given, strategies as st

from cyclidic.elliptic import (
    OmegaTable,
    check_breakpoints,
    get_table,
    omega_integral,
    omega_weight,
)
from cyclidic.errors import DomainError

# Omega by QUADPACK's QAWS rule (scripts/oracles.py), a = (0, 1, 2, 3)
QAWS = {
    1.0: 1.6857503548125963,
    2.0: 3.8422660023122392,
    3.0: 5.5280163571248355,
    0.3: 0.49570235064523077,
    1.5: 2.7640081785624178,
    2.7: 5.032314006479605,
}


@pytest.mark.parametrize("s", sorted(QAWS))
def test_table_matches_qaws(table, s):
    assert abs(table.omega(s) - QAWS[s]) < 1e-11


@pytest.mark.parametrize("s", sorted(QAWS))
def test_direct_quadrature_matches_qaws(s):
    value, err = omega_integral(s, return_error=True)
    assert abs(value - QAWS[s]) < 1e-11
    assert err < 1e-10


def test_breakpoints(table):
    np.testing.assert_allclose(table.b, [0.0, QAWS[1.0], QAWS[2.0], QAWS[3.0]], atol=1e-11)
    assert check_breakpoints(table) < 1e-11
    for j, aj in enumerate((0.0, 1.0, 2.0, 3.0)):
        assert table.phi(table.b[j]) == aj


def test_reflection_identities(table):
    # s -> 3 - s maps omega to itself when a = (0, 1, 2, 3)
    assert abs(table.omega(3.0) - 2 * table.omega(1.5)) < 1e-12
    assert abs(table.omega(2.0) - (table.omega(3.0) - table.omega(1.0))) < 1e-12
    s = np.linspace(0.01, 2.99, 37)
    np.testing.assert_allclose(table.omega(3.0 - s), table.b[3] - table.omega(s), atol=1e-12)


def test_phi_inverts_omega(table, rng):
    s = rng.uniform(0, 3, 1000)
    np.testing.assert_allclose(table.phi(table.omega(s)), s, atol=1e-12)
    t = rng.uniform(0, table.b[3], 1000)
    np.testing.assert_allclose(table.omega(table.phi(t)), t, atol=1e-12)


def test_phi_near_breakpoints_keeps_relative_accuracy(table):
    for j in (1, 2, 3):
        lo, hi = table.interval(j)
        for dt in (1e-3, 1e-6):
            s, gap_lo, gap_hi = table.phi_gaps(np.array([lo + dt, hi - dt]))
            # phi(b + dt) - a ~ (omega'(a) dt / 2)^2 is quadratic in dt, so the gaps are tiny but positive
            assert gap_lo[0] > 0 and gap_hi[1] > 0
            np.testing.assert_allclose(table.omega_from_gaps(j, gap_lo, gap_hi), [lo + dt, hi - dt], rtol=0,
                                       atol=1e-14)


@given(st.floats(0.0, 3.0))
def test_omega_monotone_with_derivative(s):
    table = get_table()
    h = 1e-5
    if 0.05 < s < 2.95 and min(abs(s - 1), abs(s - 2)) > 0.05:
        fd = (table.omega(s + h) - table.omega(s - h)) / (2 * h)
        assert abs(fd * omega_weight(s) - 1) < 1e-6
    assert table.omega(min(s + 1e-3, 3.0)) >= table.omega(s)


def test_phi_prime_and_series(table):
    t = np.linspace(0.1, table.b[3] - 0.1, 11)
    h = 1e-5
    fd = (table.phi(t + h) - table.phi(t - h)) / (2 * h)
    np.testing.assert_allclose(table.phi_prime(t), fd, atol=1e-7)
    for j in (1, 2, 3):
        tt = np.linspace(*table.interval(j), 9)
        np.testing.assert_allclose(table.phi_series(j)(tt), table.phi(tt), atol=1e-13)
        assert abs(table.phi_scalar(tt[3], j) - table.phi(tt[3])) < 1e-13


def test_save_load(tmp_path, table):
    path = tmp_path / "omega.json"
    table.save(path)
    other = OmegaTable.load(path)
    np.testing.assert_array_equal(other.b, table.b)
    t = np.linspace(0, table.b[3], 50)
    np.testing.assert_array_equal(other.phi(t), table.phi(t))


def test_cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("CYCLIDIC_CACHE_DIR", str(tmp_path))
    a = (0.0, 1.0, 2.5, 3.5)
    get_table.cache_clear()
    first = get_table(a)
    assert len(list(tmp_path.iterdir())) == 1
    get_table.cache_clear()
    second = get_table(a)
    np.testing.assert_array_equal(first.b, second.b)
    get_table.cache_clear()


def test_other_parameters():
    a = (-1.0, 0.5, 2.0, 5.0)
    table = OmegaTable(a)
    assert check_breakpoints(table) < 1e-10
    s = np.linspace(-1, 5, 101)
    np.testing.assert_allclose(table.phi(table.omega(s)), s, atol=1e-11)


def test_domain_errors(table):
    with pytest.raises(DomainError):
        table.omega(3.5)
    with pytest.raises(DomainError):
        table.phi(-0.1)
    with pytest.raises(DomainError):
        omega_integral(-1.0)
    with pytest.raises(DomainError):
        omega_weight(np.nan)
