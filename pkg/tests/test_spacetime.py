import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_ball, random_rotation
from kinegroup.classic import galilei_boost, lorentz_boost
from kinegroup.errors import DegenerateMapError, InvalidRotationError, NotAtRestError
from kinegroup.reichenbach import ShearK, conjugated_rotation
from kinegroup.spacetime import (
    AffineMap4,
    LinearMap4,
    UniformWorldline,
    as_rotation,
    axiom_predicates,
    compose,
    composed_velocity,
    inverse,
    map_worldline,
    max_abs_diff,
    reciprocal_velocity,
    rest_decompose,
    rotation_embed,
    velocity_of,
)
from kinegroup.special import SpecialParams, inverse_special, special_matrix, standard_special

E1 = np.array([1.0, 0.0, 0.0])
speeds = st.floats(-0.95, 0.95)
vec3 = st.tuples(speeds, speeds, speeds).map(np.array).filter(lambda v: np.linalg.norm(v) < 0.95)


def test_rotation_embed_identity():
    assert np.array_equal(rotation_embed(np.eye(3)).matrix, np.eye(4))


def test_rotation_embed_quarter_turn():
    S = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    R = rotation_embed(S)
    assert np.array_equal(R.A, S)
    assert R.alpha == 1.0
    assert np.array_equal(R.k, np.zeros(3))


def test_rotation_velocity_is_zero(rng):
    for _ in range(100):
        assert np.max(np.abs(velocity_of(rotation_embed(random_rotation(rng))))) == 0.0


def test_rotation_validation():
    with pytest.raises(InvalidRotationError):
        as_rotation(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(InvalidRotationError):
        as_rotation(2 * np.eye(3))


def test_velocity_of_basic():
    assert np.array_equal(velocity_of(LinearMap4.identity()), np.zeros(3))
    assert np.allclose(velocity_of(galilei_boost(0.3 * E1)), [0.3, 0, 0], atol=1e-15)


def test_velocity_of_product_matches_composition(rng):
    for _ in range(20):
        B1 = lorentz_boost(random_ball(rng, 0.9))
        B2 = lorentz_boost(random_ball(rng, 0.9))
        lhs = velocity_of(B2 @ B1)
        rhs = composed_velocity(velocity_of(B2), B1)
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_reciprocal_velocity():
    assert np.array_equal(reciprocal_velocity(LinearMap4.identity()), np.zeros(3))
    assert np.allclose(reciprocal_velocity(lorentz_boost(0.6 * E1)), [-0.6, 0, 0], atol=1e-14)
    W = reciprocal_velocity(special_matrix(SpecialParams.power(0.2), E1, 0.5))
    assert abs(np.linalg.norm(W) - 0.5 / 0.9) < 1e-14


def test_compose_and_inverse():
    B = AffineMap4(lorentz_boost(0.3 * E1), np.array([1.0, 2.0, 3.0, 4.0]))
    assert max_abs_diff(compose(B, AffineMap4.identity()), B) == 0.0
    T = AffineMap4(LinearMap4.identity(), np.array([1.0, -2.0, 0.5, 3.0]))
    assert np.array_equal(inverse(T).translation, -T.translation)
    P = SpecialParams.bounded(1.0, 0.3, 0.2, -0.4)
    prod = compose(standard_special(P, 0.4), inverse_special(P, 0.4))
    assert np.max(np.abs(prod.matrix - np.eye(4))) < 1e-12


def test_singular_map_rejected():
    with pytest.raises(DegenerateMapError):
        inverse(LinearMap4(np.zeros((4, 4))))


def test_composed_velocity_examples():
    assert np.allclose(composed_velocity(0.2 * E1, galilei_boost(0.3 * E1)), [0.5, 0, 0])
    U = np.array([0.1, 0.2, 0.3])
    assert np.array_equal(composed_velocity(U, LinearMap4.identity()), U)
    B1, B2 = lorentz_boost(0.5 * E1), lorentz_boost(0.5 * E1)
    assert np.allclose(composed_velocity(velocity_of(B2), B1), [0.8, 0, 0], atol=1e-15)
    assert np.allclose(velocity_of(B2 @ B1), [0.8, 0, 0], atol=1e-15)


def test_axiom_predicates_examples():
    assert axiom_predicates(LinearMap4.identity()).all
    rep = axiom_predicates(LinearMap4(np.diag([1.0, 1.0, 1.0, -1.0])))
    assert rep.causal and not rep.time_oriented
    for v in np.linspace(-0.99, 0.99, 41):
        assert axiom_predicates(lorentz_boost(v * E1)).all


def test_rest_decompose_round_trip(rng):
    S = random_rotation(rng)
    b = rng.normal(size=4)
    res = rest_decompose(AffineMap4(rotation_embed(S), b))
    assert res.ok
    assert np.allclose(res.rotation, S, atol=1e-12)
    assert np.array_equal(res.translation, b)


def test_rest_decompose_rejects_conjugated_rotation(rng):
    B = conjugated_rotation(ShearK(np.array([0.3, 0.1, 0.0])), random_rotation(rng))
    assert np.max(np.abs(velocity_of(B))) < 1e-14
    res = rest_decompose(B)
    assert not res.ok
    assert res.residual > 1e-3
    assert rest_decompose(conjugated_rotation(ShearK(np.zeros(3)), random_rotation(rng))).ok


def test_rest_decompose_moving_map():
    with pytest.raises(NotAtRestError):
        rest_decompose(lorentz_boost(0.4 * E1))


def test_map_worldline_examples():
    w = UniformWorldline(np.array([1.0, 2.0, 3.0, 0.5]), np.array([0.2, -0.1, 0.0]))
    same = map_worldline(AffineMap4.identity(), w)
    assert np.array_equal(same.velocity, w.velocity)
    v = np.array([0.3, 0.1, -0.2])
    assert np.allclose(map_worldline(galilei_boost(v), w).velocity, w.velocity - v, atol=1e-15)
    L = lorentz_boost(np.array([0.5, 0.2, 0.0]))
    img = map_worldline(L, w)
    pred = composed_velocity(w.velocity, inverse(L))
    assert np.max(np.abs(img.velocity - pred)) < 1e-12
    ev = L.apply(w.events([0.0, 1.0]))
    fd = (ev[1, :3] - ev[0, :3]) / (ev[1, 3] - ev[0, 3])
    assert np.max(np.abs(fd - pred)) < 1e-12


@settings(max_examples=200, deadline=None)
@given(vec3, vec3)
def test_velocity_composition_law(V1, V2):
    B1 = lorentz_boost(V1)
    B2 = lorentz_boost(V2)
    assert np.max(np.abs(velocity_of(B2 @ B1) - composed_velocity(velocity_of(B2), B1))) < 1e-10


@settings(max_examples=100, deadline=None)
@given(vec3)
def test_equal_velocity_quotient_is_at_rest(V):
    B1 = lorentz_boost(V)
    B2 = LinearMap4(lorentz_boost(V).matrix.copy())
    assert np.max(np.abs(velocity_of(B2 @ B1.inverse()))) < 1e-10
    G1, G2 = galilei_boost(V), galilei_boost(V)
    assert np.max(np.abs(velocity_of(G2 @ G1.inverse()))) < 1e-12


@settings(max_examples=100, deadline=None)
@given(vec3, vec3, st.floats(-5, 5), st.floats(-5, 5))
def test_worldline_image_is_uniform(V, u, t0, t1):
    F = AffineMap4(lorentz_boost(V), np.array([0.5, -1.0, 2.0, 0.25]))
    w = UniformWorldline(np.array([0.1, 0.2, 0.3, 0.0]), u)
    img = map_worldline(F, w)
    pts = F.apply(w.events(np.linspace(t0, t0 + 1 + abs(t1), 5)))
    on_line = img.events(pts[:, 3])
    assert np.max(np.abs(on_line - pts)) < 1e-9


@settings(max_examples=100, deadline=None)
@given(vec3, vec3, st.integers(0, 2**32 - 1))
def test_axioms_compose_for_group_members(V1, V2, seed):
    rng = np.random.default_rng(seed)
    B1 = rotation_embed(random_rotation(rng)) @ lorentz_boost(V1)
    B2 = lorentz_boost(V2) @ rotation_embed(random_rotation(rng))
    assert axiom_predicates(B1).all and axiom_predicates(B2).all
    assert axiom_predicates(compose(B2, B1)).all


def test_axioms_do_not_compose_in_general():
    # two admissible shears whose product reverses the time orientation
    B1 = LinearMap4.from_blocks(np.eye(3), np.array([-2.0, 0, 0]), np.array([0.9, 0, 0]), 1.0)
    B2 = LinearMap4.from_blocks(np.eye(3), np.array([0.0, 0, 0]), np.array([0.9, 0, 0]), 1.0)
    assert axiom_predicates(B1).causal and axiom_predicates(B2).causal
    assert not axiom_predicates(B2 @ B1).all


def test_affine_map_json_round_trip():
    F = AffineMap4(lorentz_boost(np.array([0.1, 0.2, 0.3])), np.array([1.0, 2.0, 3.0, 4.0]))
    G = AffineMap4.from_dict(F.to_dict())
    assert np.array_equal(G.matrix, F.matrix)
    assert np.array_equal(G.translation, F.translation)
