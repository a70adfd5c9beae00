import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cyclidic.errors import (
    BoundaryCoordinateError,
    DegenerateInputError,
    DomainError,
    ParameterError,
    PoleError,
    SingularError,
)
from cyclidic.geometry import (
    DEFAULT_A,
    ParamsA,
    RegionSpec,
    SignProfile,
    all_sign_profiles,
    apply_symmetry,
    apply_word,
    cubic_coefficients,
    cyclide_gaps,
    from_cyclide,
    mesh_to_csv,
    mesh_to_triangles,
    region_contains,
    scale_factors,
    scale_factors_both,
    sphero_conal_forward,
    sphero_conal_inverse,
    sphero_conal_scale_factors,
    stereographic_invert,
    stereographic_project,
    surface_mesh,
    surface_residual,
    to_cyclide,
)

coord = st.floats(-3.0, 3.0, allow_nan=False)
points = st.tuples(coord, coord, coord).filter(lambda p: sum(v * v for v in p) > 1e-6)
fractions = st.floats(0.01, 0.99)


def _interior_s(u):
    a = DEFAULT_A.array
    return a[:-1] + np.asarray(u) * np.diff(a)


# ---- parameters ------------------------------------------------------------

def test_params_validation():
    with pytest.raises(ParameterError):
        ParamsA(0, 2, 1, 3)
    with pytest.raises(ParameterError):
        ParamsA.from_sequence([0, 1, 2])
    with pytest.raises(ParameterError):
        ParamsA(0, 1, 2, float("nan"))


def test_params_json_round_trip(tmp_path):
    a = ParamsA(-1.0, 0.5, 2.0, 7.0)
    assert ParamsA.from_json(a.to_json()) == a
    path = tmp_path / "a.json"
    path.write_text(json.dumps({"a": [0, 1, 2, 3]}))
    assert ParamsA.from_json(str(path)) == DEFAULT_A
    with pytest.raises(ParameterError):
        ParamsA.from_json({"b": [0, 1, 2, 3]})


# ---- anchors ---------------------------------------------------------------

def test_origin_coordinates_are_the_focal_parameters():
    s = to_cyclide(np.zeros(3))
    np.testing.assert_allclose(s, [1.0, 2.0, 3.0], atol=1e-14)


def test_unit_sphere_has_s1_at_a0(rng):
    p = rng.normal(size=(50, 3))
    p /= np.linalg.norm(p, axis=1)[:, None]
    s, lo, _ = cyclide_gaps(p)
    assert np.max(np.abs(s[:, 0])) < 1e-12
    assert np.all(lo[:, 0] >= 0)


def test_plane_z0_has_s3_at_a3(rng):
    p = rng.uniform(-3, 3, size=(50, 3))
    p[:, 2] = 0
    s = to_cyclide(p)
    np.testing.assert_allclose(s[:, 2], 3.0, atol=1e-12)


def test_a1_point():
    s = to_cyclide(np.array([0.0, 1.0 + math.sqrt(2.0), 0.0]))
    np.testing.assert_allclose(s[:2], [1.0, 1.0], atol=1e-9)


# ---- secular equation and round trips -------------------------------------

@given(points)
def test_coordinates_solve_the_secular_equation(p):
    p = np.array(p)
    s, lo, hi = cyclide_gaps(p)
    c = cubic_coefficients(p)
    a = DEFAULT_A.array
    assert np.all(lo >= 0) and np.all(hi >= 0)
    np.testing.assert_allclose(lo + hi, np.diff(a), rtol=0, atol=1e-14)
    assert np.all(np.diff(s) >= 0)
    # cleared form: sum_j c_j prod_{k != j} (s - a_k) = 0 relative to the size of its terms
    for si in s:
        if np.min(np.abs(si - a)) < 1e-9:
            continue
        terms = [c[j] * np.prod([si - a[k] for k in range(4) if k != j]) for j in range(4)]
        assert abs(sum(terms)) <= 1e-12 * sum(abs(t) for t in terms) + 1e-300


@given(st.tuples(fractions, fractions, fractions), st.sampled_from(all_sign_profiles()))
def test_round_trip_every_sheet(u, profile):
    s = _interior_s(u)
    p = from_cyclide(s, profile)
    np.testing.assert_allclose(to_cyclide(p), s, atol=1e-10)
    # the sheet is recorded in the signs of x, y, z and in rho < 1 or > 1
    signs = np.sign(p)
    assert tuple(signs) == profile.eps
    assert (np.dot(p, p) < 1) == profile.inside


@given(points, st.integers(0, 3))
def test_coordinates_invariant_under_symmetries(p, i):
    p = np.array(p)
    q = apply_symmetry(i, p)
    np.testing.assert_allclose(to_cyclide(q), to_cyclide(p), atol=1e-10)


def test_words_and_sheet_ids():
    ids = sorted(pr.sheet_id for pr in all_sign_profiles())
    assert ids == list(range(16))
    pr = SignProfile.from_word((1, 0, 1, 1))
    assert pr.word == (1, 0, 1, 1)
    assert SignProfile.parse("+--", "outside") == pr
    p = from_cyclide(_interior_s([0.3, 0.4, 0.5]))
    q = from_cyclide(_interior_s([0.3, 0.4, 0.5]), pr)
    np.testing.assert_allclose(apply_word(pr.word, p), q, atol=1e-14)


def test_from_cyclide_rejects_endpoints():
    with pytest.raises(BoundaryCoordinateError):
        from_cyclide([0.0, 1.5, 2.5])
    with pytest.raises(BoundaryCoordinateError):
        from_cyclide([0.5, 2.0, 2.5])


def test_inversion_at_origin():
    with pytest.raises(SingularError):
        apply_symmetry(0, np.zeros(3))
    with pytest.raises(ParameterError):
        apply_symmetry(4, np.ones(3))


# ---- sphero-conal and stereographic maps -----------------------------------

@given(st.lists(st.floats(0.05, 3.0), min_size=3, max_size=5))
def test_sphero_conal_round_trip(x):
    x = np.array(x)
    a = np.arange(x.size, dtype=float) * 1.3
    r, s = sphero_conal_forward(x, a)
    np.testing.assert_allclose(r, np.linalg.norm(x))
    assert np.all((s > a[:-1]) & (s < a[1:]))
    np.testing.assert_allclose(sphero_conal_inverse(r, s, a), x, rtol=1e-9, atol=1e-12)


def test_sphero_conal_scale_factors_agree(rng):
    a = np.array([0.0, 1.0, 2.5, 4.0])
    x = rng.uniform(0.1, 2.0, size=(40, 4))
    sum_form, prod_form = sphero_conal_scale_factors(x, a)
    np.testing.assert_allclose(sum_form, prod_form, rtol=1e-9)


def test_sphero_conal_rejects_points_off_the_cone():
    with pytest.raises(DegenerateInputError):
        sphero_conal_forward([1.0, 0.0, 1.0], [0, 1, 2])


@given(points)
def test_stereographic_round_trip(p):
    p = np.array(p)
    x = stereographic_invert(p)
    np.testing.assert_allclose(np.linalg.norm(x), 1.0, atol=1e-14)
    np.testing.assert_allclose(stereographic_project(x), p, rtol=1e-10, atol=1e-12)


def test_stereographic_pole_and_sphere():
    with pytest.raises(PoleError):
        stereographic_project([1.0, 0.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        stereographic_project([0.5, 0.0, 0.0, 0.0])


# ---- scale factors ----------------------------------------------------------

def _fd_jacobian(s, profile, h=1e-6):
    cols = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        cols.append((from_cyclide(s + e, profile) - from_cyclide(s - e, profile)) / (2 * h))
    return np.array(cols)


def test_jacobian_orthogonal_with_scale_factor_norms(rng):
    for profile in all_sign_profiles()[::3]:
        s = _interior_s(rng.uniform(0.1, 0.9, size=3))
        p = from_cyclide(s, profile)
        cols = _fd_jacobian(s, profile)
        norms = np.linalg.norm(cols, axis=1)
        gram = cols @ cols.T / np.outer(norms, norms)
        assert np.max(np.abs(gram - np.eye(3))) < 1e-7
        sum_form, prod_form = scale_factors_both(p)
        np.testing.assert_allclose(sum_form, norms, rtol=1e-7)
        np.testing.assert_allclose(prod_form, norms, rtol=1e-7)


def test_scale_factors_degenerate_points():
    with pytest.raises(DegenerateInputError):
        scale_factors(np.array([0.0, 1.0 + math.sqrt(2.0), 0.0]))
    with pytest.raises(DegenerateInputError):
        scale_factors(np.array([0.3, 0.2, 0.0]))


# ---- regions and meshes ------------------------------------------------------

def test_region_spec():
    assert RegionSpec("I", 0.5).kind == "first"
    assert RegionSpec("3", 2.5).index == 3
    with pytest.raises(ParameterError):
        RegionSpec("fourth", 1.0)
    with pytest.raises(ParameterError):
        RegionSpec("second", 2.5).validate()


def test_region_membership():
    first = RegionSpec("first", 0.5)
    inside = from_cyclide(_interior_s([0.9, 0.5, 0.5]))
    outside = from_cyclide(_interior_s([0.1, 0.5, 0.5]))
    assert region_contains(first, inside) and not region_contains(first, outside)
    third = RegionSpec("third", 2.5)
    q = from_cyclide(_interior_s([0.5, 0.5, 0.2]))
    assert region_contains(third, q)
    assert not region_contains(third, q * np.array([1, 1, -1]))


@pytest.mark.parametrize("i,d", [(1, 0.5), (2, 1.5), (3, 2.5)])
def test_mesh_points_lie_on_surface(i, d):
    mesh = surface_mesh(i, d, (9, 7))
    pts = mesh.points.reshape(-1, 3)
    assert mesh.points.shape == (16, 9, 7, 3)
    assert np.max(surface_residual(pts, d)) < 1e-10
    s = to_cyclide(pts)
    np.testing.assert_allclose(s[:, i - 1], d, atol=1e-9)


def test_mesh_export_formats():
    mesh = surface_mesh(1, 0.5, (4, 4))
    text = mesh_to_csv(mesh)
    lines = text.strip().split("\n")
    assert lines[0] == "x,y,z,sheet"
    assert len(lines) == 1 + 16 * 16
    tri = mesh_to_triangles(mesh).split("\n")
    nv = int(tri[0].split()[1])
    assert tri[nv + 1].startswith("triangles")
    # seams are merged, so there are fewer vertices than grid points
    assert nv < 16 * 16
    with pytest.raises(DegenerateInputError):
        surface_mesh(1, 1.0)


def test_gap_keeps_relative_accuracy_next_to_an_endpoint():
    # y = 0 puts s2 on a2 and a tiny z puts s3 within ~z^2 of a3
    for z in (1e-3, 1e-9, 1e-40):
        _, _, hi = cyclide_gaps(np.array([1.75, 0.0, z]))
        assert hi[1] == 0.0
        _, _, ref = cyclide_gaps(np.array([1.75, 0.0, 1e-3]))
        np.testing.assert_allclose(hi[2] / z**2, ref[2] / 1e-6, rtol=1e-5)
