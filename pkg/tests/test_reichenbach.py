import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_ball, random_rotation
from kinegroup.classic import is_lorentz, lorentz_boost
from kinegroup.errors import InvalidSynchronyError, NotInGroupError
from kinegroup.isotropy import one_way_speed
from kinegroup.reichenbach import (
    ShearK,
    TwoWayParams,
    absolute_simultaneity_map,
    conjugated_rotation,
    decompose_two_way,
    ellipsoid_geometry,
    epsilon_function,
    metric_matrix,
    reichenbach_boost,
    reichenbach_element,
    shear_matrix,
    special_two_way,
    tangherlini,
    two_way_map,
    velocity_in_set,
    velocity_map,
    ver_residual,
)
from kinegroup.spacetime import LinearMap4, rest_decompose, rotation_embed, velocity_of
from kinegroup.special import E1


def random_params(rng, c=1.0, lam=None):
    return TwoWayParams(
        lam=rng.uniform(0.5, 2.0) if lam is None else lam,
        k1=random_ball(rng, 0.8 / c),
        k2=random_ball(rng, 0.8 / c),
        V=random_ball(rng, 0.8 * c),
        S=random_rotation(rng),
        c=c,
        b=rng.normal(size=4),
    )


def random_lorentz(rng, c=1.0):
    return rotation_embed(random_rotation(rng)) @ lorentz_boost(random_ball(rng, 0.8 * c), c)


def test_shear_matrix_examples(rng):
    assert np.array_equal(shear_matrix(ShearK(np.zeros(3))).matrix, np.eye(4))
    with pytest.raises(InvalidSynchronyError):
        ShearK(np.array([0.5, 0.0, 0.0]), c=2.0)
    for _ in range(50):
        c = rng.uniform(0.5, 2)
        lam = rng.uniform(0.2, 3)
        sh = ShearK(random_ball(rng, 0.99 / c), lam, c)
        assert math.isclose(shear_matrix(sh).det(), lam**4, rel_tol=1e-12)


def test_two_way_map_reductions(rng):
    zero = np.zeros(3)
    V = random_ball(rng, 0.9)
    S = random_rotation(rng)
    F = two_way_map(TwoWayParams(1.0, zero, zero, V, S))
    assert is_lorentz(F)
    a = two_way_map(TwoWayParams(1.0, zero, zero, 0.6 * E1)).matrix
    assert np.max(np.abs(a - lorentz_boost(0.6 * E1).matrix)) < 1e-15
    assert np.max(np.abs(special_two_way(0.6, 0.0, 0.0).matrix - lorentz_boost(0.6 * E1).matrix)) < 1e-15


def test_special_two_way_matches_general_family(rng):
    for _ in range(50):
        v, a1, a2, lam = rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9), rng.uniform(0.5, 2)
        F = special_two_way(v, a1, a2, lam)
        G = two_way_map(TwoWayParams(lam, a1 * E1, a2 * E1, v * E1))
        assert np.max(np.abs(F.matrix - G.matrix)) < 1e-12


def test_special_two_way_rest_condition():
    assert rest_decompose(special_two_way(0.0, 0.3, 0.3)).ok
    assert not rest_decompose(special_two_way(0.0, 0.3, -0.2)).ok
    assert not rest_decompose(special_two_way(0.0, 0.3, 0.3, lam=1.5)).ok


def test_decompose_round_trip(rng):
    for _ in range(30):
        P = random_params(rng)
        fit = decompose_two_way(two_way_map(P))
        assert fit.member, fit.reason
        Q = fit.params
        assert abs(Q.lam - P.lam) < 1e-7
        for name in ("k1", "k2", "V", "S", "b"):
            assert np.max(np.abs(getattr(Q, name) - getattr(P, name))) < 1e-7, name


def test_decompose_lorentz_input(rng):
    fit = decompose_two_way(random_lorentz(rng))
    assert fit.member
    assert np.max(np.abs(fit.params.k1)) < 1e-9 and np.max(np.abs(fit.params.k2)) < 1e-9
    assert abs(fit.params.lam - 1.0) < 1e-12


def test_double_tangherlini_leaves_the_minkowski_source_family():
    T = tangherlini(0.5)
    TT = LinearMap4(T.matrix @ T.matrix)
    w = velocity_of(TT)[0]
    assert math.isclose(w, 0.875, rel_tol=1e-14)
    alpha_w = 1.0 / math.sqrt(1.0 - w * w)
    assert math.isclose(alpha_w, 2.066, rel_tol=1e-3)
    assert math.isclose(1.0 / TT.alpha, 4.0 / 3.0, rel_tol=1e-14)
    fit = decompose_two_way(TT, fixed_k1=np.zeros(3))
    assert not fit.member and fit.residual > 1e-4


def test_tangherlini_examples():
    assert np.array_equal(tangherlini(0.0).matrix, np.eye(4))
    T = tangherlini(0.5).matrix
    assert math.isclose(T[0, 0], 1.154701, rel_tol=1e-6)
    assert math.isclose(T[3, 3], 0.866025, rel_tol=1e-6)
    assert np.array_equal(T[3, :3], np.zeros(3))


def test_absolute_simultaneity_time_row(rng):
    for _ in range(100):
        lam = rng.uniform(0.5, 2)
        k1 = random_ball(rng, 0.3)
        V = random_ball(rng, 0.3)
        F = absolute_simultaneity_map(lam, k1, V, random_rotation(rng))
        assert np.max(np.abs(F.matrix[3, :3])) < 1e-12


def test_reichenbach_element_examples(rng):
    L = random_lorentz(rng)
    assert np.max(np.abs(reichenbach_element(ShearK(np.zeros(3)), L).matrix - L.matrix)) < 1e-15
    B = reichenbach_boost(ShearK(0.3 * E1), 0.4).matrix
    alpha = 1.0 / math.sqrt(1.0 - 0.16)
    expected = np.array([
        [alpha * (1 + 0.12), 0, 0, -alpha * 0.4],
        [0, 1, 0, 0],
        [0, 0, 1, 0],
        [-alpha * (1 - 0.09) * 0.4, 0, 0, alpha * (1 - 0.12)],
    ])
    assert np.max(np.abs(B - expected)) < 1e-14
    with pytest.raises(NotInGroupError):
        reichenbach_element(ShearK(0.3 * E1), np.diag([2.0, 1.0, 1.0, 1.0]))


def test_fixed_shear_closure(rng):
    sh = ShearK(random_ball(rng, 0.8))
    for _ in range(10):
        X = reichenbach_element(sh, random_lorentz(rng)) @ reichenbach_element(sh, random_lorentz(rng))
        fit = decompose_two_way(X)
        assert fit.member
        assert np.max(np.abs(fit.params.k1 - sh.k)) < 1e-7
        assert np.max(np.abs(fit.params.k2 - sh.k)) < 1e-7
        Xi = X.inverse()
        assert decompose_two_way(Xi).member
    I = reichenbach_element(sh, LinearMap4.identity())
    assert np.max(np.abs(I.matrix - np.eye(4))) < 1e-15


def test_mixed_shears_are_not_closed(rng):
    worst = math.inf
    for _ in range(10):
        a = reichenbach_element(ShearK(random_ball(rng, 0.7)), random_lorentz(rng))
        b = reichenbach_element(ShearK(random_ball(rng, 0.7)), random_lorentz(rng))
        fit = decompose_two_way(a @ b)
        worst = min(worst, fit.residual)
    assert worst > 1e-4


def test_epsilon_examples(rng):
    assert epsilon_function(ShearK(np.zeros(3)), np.array([0.3, -1.0, 2.0])) == 0.5
    assert math.isclose(epsilon_function(ShearK(0.5 * E1), E1), 0.75)
    for _ in range(1000):
        c = rng.uniform(0.5, 2)
        eps = epsilon_function(ShearK(random_ball(rng, 0.999 / c), c=c), rng.normal(size=3))
        assert 0.0 < eps < 1.0


def test_epsilon_matches_simulated_exchange(rng):
    for _ in range(20):
        sh = ShearK(random_ball(rng, 0.9))
        r = rng.normal(size=3)
        out, back = one_way_speed(shear_matrix(sh), r)
        dist = np.linalg.norm(r)
        t_out, t_back = dist / out, dist / back
        assert abs(t_out / (t_out + t_back) - epsilon_function(sh, r)) < 1e-12


def test_metric_examples(rng):
    assert np.array_equal(metric_matrix(ShearK(np.zeros(3), c=2.0)), np.diag([1.0, 1.0, 1.0, -4.0]))
    for _ in range(50):
        c = rng.uniform(0.5, 2)
        sh = ShearK(random_ball(rng, 0.9 / c), c=c)
        G = metric_matrix(sh)
        assert np.array_equal(G, G.T)
        X = reichenbach_element(sh, random_lorentz(rng, c)).matrix
        assert np.max(np.abs(X.T @ G @ X - G)) < 1e-10 * max(1.0, c * c) * max(1.0, np.max(np.abs(X)) ** 2)
        assert velocity_in_set(sh, np.zeros(3))


def test_ellipsoid_examples(rng):
    geo = ellipsoid_geometry(ShearK(np.zeros(3), c=2.0))
    assert np.array_equal(geo.centre, np.zeros(3))
    assert geo.major == geo.transverse == 2.0
    assert (geo.interval.lower, geo.interval.upper) == (-2.0, 2.0)
    sh = ShearK(0.5 * E1)
    geo = ellipsoid_geometry(sh)
    assert math.isclose(geo.major, 4.0 / 3.0)
    assert math.isclose(geo.transverse, 2.0 / math.sqrt(3.0))
    assert math.isclose(geo.interval.lower, -2.0) and math.isclose(geo.interval.upper, 2.0 / 3.0)
    # the centre sits midway between the axial endpoints
    assert math.isclose(geo.centre[0], 0.5 * (geo.interval.lower + geo.interval.upper))
    pts = geo.boundary_points(np.arccos(rng.uniform(-1, 1, 500)), rng.uniform(0, 2 * np.pi, 500))
    assert np.max(np.abs(ver_residual(sh, pts))) < 1e-10


def test_ellipsoid_axis_follows_k(rng):
    for _ in range(20):
        sh = ShearK(random_ball(rng, 0.9))
        geo = ellipsoid_geometry(sh)
        for s in (geo.interval.lower, geo.interval.upper):
            assert abs(ver_residual(sh, s * geo.axis)) < 1e-10


def test_ellipsoid_endpoints_match_one_way_speeds(rng):
    for _ in range(20):
        c = rng.uniform(0.5, 2)
        sh = ShearK(random_ball(rng, 0.9 / c), c=c)
        geo = ellipsoid_geometry(sh)
        plus, minus = one_way_speed(shear_matrix(sh), sh.unit, c)
        assert abs(plus - geo.interval.upper) < 1e-8
        assert abs(minus + geo.interval.lower) < 1e-8


def test_velocity_map_examples(rng):
    sh = ShearK(0.5 * E1)
    V = np.array([0.0, 0.3, -0.2])
    assert np.array_equal(velocity_map(sh, V), V)
    assert np.allclose(velocity_map(sh, 0.5 * E1), [0.4, 0, 0], atol=1e-15)
    for _ in range(1000):
        sh = ShearK(random_ball(rng, 0.95))
        V = random_ball(rng, 0.999)
        W = velocity_map(sh, V)
        assert velocity_in_set(sh, W)


def test_velocity_map_is_velocity_of_conjugated_boost(rng):
    for _ in range(50):
        sh = ShearK(random_ball(rng, 0.9))
        V = random_ball(rng, 0.9)
        X = reichenbach_element(sh, lorentz_boost(V))
        assert np.max(np.abs(velocity_of(X) - velocity_map(sh, V))) < 1e-12


def test_conjugated_rotation_is_not_at_rest_shape(rng):
    S = random_rotation(rng)
    for k in (np.array([0.2, 0.0, 0.1]), np.array([0.0, -0.4, 0.3])):
        B = conjugated_rotation(ShearK(k), S)
        assert np.max(np.abs(velocity_of(B))) < 1e-14
        assert not rest_decompose(B).ok


def test_two_way_params_json_round_trip(rng):
    P = random_params(rng)
    Q = TwoWayParams.from_dict(P.to_dict())
    assert np.array_equal(two_way_map(P).matrix, two_way_map(Q).matrix)
    assert TwoWayParams.PARAMETER_COUNT == 17


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_two_way_law_for_family_members(seed):
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.5, 2)
    P = random_params(rng, c)
    F = two_way_map(P)
    # the map acts on coordinates synchronised with k1
    source = shear_matrix(ShearK(P.k1, c=c))
    for _ in range(5):
        plus, minus = one_way_speed(F, rng.normal(size=3), c, source)
        assert abs(1 / plus + 1 / minus - 2 / c) < 1e-8
