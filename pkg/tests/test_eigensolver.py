import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyclidic.eigensolver import (
    KINDS,
    ParityVector,
    ProblemKind,
    all_parities,
    eval_E,
    get_eigen,
    gram_matrix,
    solve_two_param,
    verify_pruefer,
)
from cyclidic.errors import DomainError, ParameterError
from cyclidic.sturm import init_from_bit

# two-parameter eigenvalues from Runge-Kutta shooting on both equations and
# Brent's method on lambda1 (scripts/oracles.py), a = (0, 1, 2, 3)
SHOOTING = [
    ("I", (0, 0), "000", -0.7330713148327406, 0.6521651814633982),
    ("I", (1, 2), "101", -35.33343207303558, 61.29105925477883),
    ("II", (0, 0), "0000", -0.5625000000000139, 0.24063812991343375),
    ("II", (2, 1), "1010", 6.6368102245835505, -25.629025550038783),
    ("III", (0, 0), "000", -0.39192868516802076, 0.1404512369656706),
    ("III", (1, 2), "011", 30.64628533977562, -25.74356717445901),
]


@pytest.mark.parametrize("kind,n,parity,lam1,lam2", SHOOTING)
def test_matches_shooting_oracle(kind, n, parity, lam1, lam2):
    e = get_eigen(kind, n, parity)
    assert abs(e.lambda1 - lam1) < 1e-9 * max(1, abs(lam1))
    assert abs(e.lambda2 - lam2) < 1e-9 * max(1, abs(lam2))


def test_parity_vector():
    assert ParityVector.parse("1,0,1", "I").bits == (1, 0, 1)
    assert str(ParityVector.parse((0, 1, 1, 0))) == "0110"
    with pytest.raises(ParameterError):
        ParityVector.parse("012")
    with pytest.raises(ParameterError):
        ParityVector.parse("0101", "III")
    assert len(all_parities("II")) == 16
    assert [ProblemKind.of(k).name for k in ("first", 2, "iii")] == list(KINDS)
    with pytest.raises(ParameterError):
        ProblemKind.of("IV")


@settings(max_examples=12)
@given(st.sampled_from(KINDS), st.integers(0, 4), st.integers(0, 4), st.integers(0, 15))
def test_zero_counts_and_boundary_conditions(kind, na, nb, bits):
    pk = ProblemKind.of(kind)
    parity = format(bits % 2**pk.parity_length, f"0{pk.parity_length}b")
    e = get_eigen(kind, (na, nb), parity)
    check = verify_pruefer(e)
    assert check["zero_counts"] == [na, nb]
    assert max(check["residuals"]) < 1e-8


def test_normalisation_against_direct_double_integral(table):
    for kind, n, parity in [("I", (2, 1), "010"), ("II", (1, 3), "1001"), ("III", (2, 2), "110")]:
        e = get_eigen(kind, n, parity)
        ja, jb = e.spectral
        ta, wa = np.polynomial.legendre.leggauss(120)
        tb, wb = np.polynomial.legendre.leggauss(120)
        (la, ha), (lb, hb) = table.interval(ja), table.interval(jb)
        ta = 0.5 * (ha - la) * (ta + 1) + la
        tb = 0.5 * (hb - lb) * (tb + 1) + lb
        wa = wa * 0.5 * (ha - la)
        wb = wb * 0.5 * (hb - lb)
        weight = table.phi(tb)[None, :] - table.phi(ta)[:, None]
        assert np.all(weight > 0)
        integrand = weight * e.u[ja](ta)[:, None] ** 2 * e.u[jb](tb)[None, :] ** 2
        assert abs(wa @ integrand @ wb - 1) < 1e-10
        assert abs(wa @ e.u[ja](ta) ** 2 - 1) < 1e-10
        assert abs(e.diagnostics["norm_check"] - 1) < 1e-12


def test_companion_initial_data():
    for kind in KINDS:
        pk = ProblemKind.of(kind)
        for parity in all_parities(kind)[:4]:
            e = get_eigen(kind, (1, 2), str(parity))
            j, _, at = pk.companion
            end = e.table.interval(j)[0 if at == "left" else 1]
            u0, du0 = init_from_bit(pk.companion_bit(parity))
            assert abs(e.u_t(j, end) - u0) < 1e-12
            assert abs(e.du_t(j, end) - du0) < 1e-10


def test_bracket_and_start_do_not_matter():
    base = solve_two_param("II", (2, 2), "0110")
    for kw in ({"bracket": (base.lambda1 - 7.0, base.lambda1 + 3.0)}, {"start": base.lambda1 + 25.0},
               {"bracket": (base.lambda1 + 1.0, base.lambda1 + 2.0)}):
        other = solve_two_param("II", (2, 2), "0110", **kw)
        assert abs(other.lambda1 - base.lambda1) < 1e-10
        assert abs(other.lambda2 - base.lambda2) < 1e-10


def test_lambda1_decreases_with_zero_counts_kind_one():
    lams = {n: get_eigen("I", n, "000").lambda1 for n in itertools.product(range(4), repeat=2)}
    for (i, j), v in lams.items():
        if i + 1 < 4:
            assert lams[(i + 1, j)] < v
        if j + 1 < 4:
            assert lams[(i, j + 1)] < v


@pytest.mark.parametrize("kind,parity", [("I", "000"), ("II", "0000"), ("III", "101")])
def test_gram_matrix_is_identity(kind, parity):
    g = gram_matrix(kind, parity, 3)
    assert np.max(np.abs(g - np.eye(9))) < 1e-9


def test_eval_E(table):
    e = get_eigen("I", (1, 1), "000")
    s = np.linspace(1.0, 2.0, 7)
    np.testing.assert_allclose(eval_E(e, 2, s), e.u[2](table.omega(s)), rtol=0, atol=1e-15)
    with pytest.raises(DomainError):
        eval_E(e, 2, 2.5)
    with pytest.raises(ParameterError):
        eval_E(e, 4, 0.5)


def test_input_errors():
    with pytest.raises(ParameterError):
        solve_two_param("I", (1, -1), "000")
    with pytest.raises(ParameterError):
        solve_two_param("I", (1, 1, 1), "000")
    with pytest.raises(ParameterError):
        gram_matrix("I", "000", 0)


def test_to_dict():
    d = get_eigen("III", (0, 1), "010").to_dict()
    assert d["kind"] == "III" and d["n"] == [0, 1] and d["parity"] == "010"
