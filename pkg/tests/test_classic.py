import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_ball, random_rotation
from kinegroup.classic import (
    S0,
    Group,
    classify,
    galilei_boost,
    is_lorentz,
    lorentz_boost,
    lorentz_residual,
    minimal_rotation_to_e1,
    rbr_decompose,
    reflection_test,
)
from kinegroup.errors import AsymmetricDomainError, NotInGroupError, SuperluminalError
from kinegroup.spacetime import LinearMap4, rotation_embed
from kinegroup.special import E1, SpecialParams, domain_interval, special_matrix


def test_boosts_at_rest():
    assert np.array_equal(galilei_boost(np.zeros(3)).matrix, np.eye(4))
    assert np.array_equal(lorentz_boost(np.zeros(3)).matrix, np.eye(4))


def test_lorentz_boost_e1():
    L = lorentz_boost(0.6 * E1)
    expected = np.array([[1.25, 0, 0, -0.75], [0, 1, 0, 0], [0, 0, 1, 0], [-0.75, 0, 0, 1.25]])
    assert np.max(np.abs(L.matrix - expected)) < 1e-15
    with pytest.raises(SuperluminalError):
        lorentz_boost(np.array([0.6, 0.8, 0.0]))


def test_boost_block_identity(rng):
    for _ in range(100):
        c = rng.uniform(0.5, 3)
        V = random_ball(rng, 0.95 * c)
        L = lorentz_boost(V, c)
        res = L.A.T @ L.A - np.eye(3) - (L.alpha**2 / c**2) * np.outer(V, V)
        assert np.max(np.abs(res)) < 1e-12 * max(1.0, L.alpha**2)


def test_rbr_pure_boost():
    d = rbr_decompose(lorentz_boost(0.7 * E1))
    assert np.allclose(d.S1, np.eye(3), atol=1e-15)
    assert np.allclose(d.S2, np.eye(3), atol=1e-15)
    assert math.isclose(d.v, 0.7)


def test_rbr_rotated_boost(rng):
    S = random_rotation(rng)
    B = rotation_embed(S) @ lorentz_boost(0.4 * E1)
    d = rbr_decompose(B)
    assert d.residual < 1e-10
    assert np.allclose(d.S1, S, atol=1e-10)


def test_rbr_random_products(rng):
    for _ in range(20):
        B = LinearMap4.identity()
        for _ in range(3):
            B = rotation_embed(random_rotation(rng)) @ lorentz_boost(random_ball(rng, 0.9)) @ B
        d = rbr_decompose(B)
        rebuilt = rotation_embed(d.S1) @ lorentz_boost(d.v * E1) @ rotation_embed(d.S2)
        assert np.max(np.abs(rebuilt.matrix - B.matrix)) < 1e-9


def test_rbr_galilei_and_rest():
    S = random_rotation(np.random.default_rng(1))
    d = rbr_decompose(rotation_embed(S), Group.GALILEO)
    assert d.v == 0.0 and np.allclose(d.S1, S) and np.array_equal(d.S2, np.eye(3))
    d = rbr_decompose(galilei_boost(np.array([0.0, 2.0, 0.0])), Group.GALILEO)
    assert math.isclose(d.v, 2.0)
    with pytest.raises(NotInGroupError):
        rbr_decompose(galilei_boost(0.3 * E1), Group.LORENTZ)


def test_minimal_rotation():
    for u in (E1, -E1, np.array([0.0, 1.0, 0.0]), np.array([1.0, 1.0, 1.0]) / math.sqrt(3)):
        R = minimal_rotation_to_e1(u)
        assert np.allclose(R @ u, E1, atol=1e-15)
        assert math.isclose(np.linalg.det(R), 1.0)


def test_classify_examples():
    assert classify(SpecialParams.galilean()).tag.group is Group.GALILEO
    assert classify(SpecialParams.bounded(1.0)).tag.group is Group.LORENTZ
    tag = classify(SpecialParams.bounded(1.0, 0.0, 0.0, 0.3)).tag
    assert tag.group is Group.ANISOTROPIC and tag.violations == ("r2",)
    assert str(tag) == "ANISOTROPIC{r2}"
    assert classify(SpecialParams.exp(0.1)).tag.violations == ("a1",)
    assert classify(SpecialParams.power(0.2, 1.0)).tag.violations == ("l",)


def test_classify_numeric_mode():
    P = SpecialParams.bounded(1.0, 1e-14)
    assert classify(P).tag.group is Group.ANISOTROPIC
    assert classify(P, numeric=True).tag.group is Group.LORENTZ


def test_reflection_examples():
    assert reflection_test(SpecialParams.bounded(1.0), 0.5) < 1e-12
    assert reflection_test(SpecialParams.exp(0.1), 0.5) > 0
    P = SpecialParams.bounded(1.0, 0.75)
    assert -0.6 in domain_interval(P) and 0.6 not in domain_interval(P)
    with pytest.raises(AsymmetricDomainError):
        reflection_test(P, 0.6)
    with pytest.raises(AsymmetricDomainError):
        reflection_test(P, -0.6)


def test_group_tags_imply_structure():
    P = SpecialParams.bounded(2.0)
    G = np.diag([1.0, 1.0, 1.0, -4.0])
    rng = np.random.default_rng(3)
    for _ in range(50):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        B = special_matrix(P, u, rng.uniform(-1.9, 1.9)).matrix
        assert np.max(np.abs(B.T @ G @ B - G)) < 1e-10 * max(1.0, np.max(np.abs(B)) ** 2)
    for v in np.linspace(-50, 50, 21):
        row = special_matrix(SpecialParams.galilean(), E1, v).matrix[3]
        assert np.array_equal(row, [0.0, 0.0, 0.0, 1.0])


def test_reflection_over_symmetric_interval():
    for P in (SpecialParams.bounded(1.0), SpecialParams.bounded(3.0), SpecialParams.galilean(), SpecialParams.exp()):
        h = min(10.0, domain_interval(P).symmetric_half_width())
        for v in np.linspace(-0.99 * h, 0.99 * h, 41):
            assert reflection_test(P, v) < 1e-10 * max(1.0, np.max(np.abs(special_matrix(P, E1, v).matrix)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.3, 3.0))
def test_lorentz_group_closed_under_compose_and_inverse(seed, c):
    rng = np.random.default_rng(seed)
    B = LinearMap4.identity()
    for _ in range(10):
        B = rotation_embed(random_rotation(rng)) @ lorentz_boost(random_ball(rng, 0.8 * c), c) @ B
        assert lorentz_residual(B, c) < 1e-10 * max(1.0, np.max(np.abs(B.matrix)) ** 2)
    assert is_lorentz(B.inverse(), c, tol=1e-10 * max(1.0, np.max(np.abs(B.matrix)) ** 2))


def test_s0_is_half_turn():
    assert np.array_equal(S0, np.diag([-1.0, -1.0, 1.0]))
