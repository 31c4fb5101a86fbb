"""Galilei and Lorentz boosts, rotation-boost-rotation factorisation and the
isotropy classifier for special families."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import AsymmetricDomainError, ConsistencyError, DomainError, NotInGroupError, SuperluminalError
from .spacetime import (
    DEFAULT_TOL,
    LinearMap4,
    MapLike,
    _as_linear,
    as_rotation,
    as_vector,
    rotation_embed,
    velocity_of,
)
from .special import Case, E1, SpecialParams, domain_interval, special_matrix

__all__ = [
    "Group",
    "GroupTag",
    "S0",
    "galilei_boost",
    "lorentz_boost",
    "lorentz_metric",
    "lorentz_residual",
    "is_lorentz",
    "is_galilean",
    "minimal_rotation_to_e1",
    "RBRDecomposition",
    "rbr_decompose",
    "ClassifyReport",
    "classify",
    "reflection_test",
]

# rotation by pi about e3; conjugation by it reverses a boost along e1
S0 = np.diag([-1.0, -1.0, 1.0])
S0.setflags(write=False)

NUMERIC_ZERO = 1e-12


class Group(str, Enum):
    GALILEO = "GALILEO"
    LORENTZ = "LORENTZ"
    ANISOTROPIC = "ANISOTROPIC"


@dataclass(frozen=True)
class GroupTag:
    group: Group
    violations: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.group is Group.ANISOTROPIC:
            return f"ANISOTROPIC{{{', '.join(self.violations)}}}"
        return self.group.value


def galilei_boost(V) -> LinearMap4:
    V = as_vector(V, "velocity")
    return LinearMap4.from_blocks(np.eye(3), -V, np.zeros(3), 1.0)


def lorentz_boost(V, c: float = 1.0) -> LinearMap4:
    """Pure Lorentz boost with symmetric spatial block ``I + (gamma - 1) u u^T``."""
    V = as_vector(V, "velocity")
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    speed = float(np.linalg.norm(V))
    if speed >= c:
        raise SuperluminalError(f"|V| = {speed} is not below c = {c}")
    gamma = 1.0 / math.sqrt((1.0 - speed / c) * (1.0 + speed / c))
    if speed == 0.0:
        return LinearMap4.identity()
    u = V / speed
    A = np.eye(3) + (gamma - 1.0) * np.outer(u, u)
    return LinearMap4.from_blocks(A, -gamma * V, -(gamma / c**2) * V, gamma)


def lorentz_metric(c: float = 1.0) -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, -c * c])


def lorentz_residual(B: MapLike, c: float = 1.0) -> float:
    """Max-norm of ``B^T G_c B - G_c``, scaled by ``max(1, c^2)``."""
    m = _as_linear(B).matrix
    G = lorentz_metric(c)
    return float(np.max(np.abs(m.T @ G @ m - G))) / max(1.0, c * c)


def is_lorentz(B: MapLike, c: float = 1.0, tol: float = DEFAULT_TOL) -> bool:
    """Membership in the proper orthochronous Lorentz group (linear part)."""
    L = _as_linear(B)
    return lorentz_residual(L, c) <= tol and L.alpha > 0 and np.linalg.det(L.A) > 0


def is_galilean(B: MapLike, tol: float = DEFAULT_TOL) -> bool:
    L = _as_linear(B)
    A = L.A
    return (
        float(np.max(np.abs(L.k))) <= tol
        and abs(L.alpha - 1.0) <= tol
        and float(np.max(np.abs(A.T @ A - np.eye(3)))) <= tol
        and np.linalg.det(A) > 0
    )


def minimal_rotation_to_e1(u) -> np.ndarray:
    """Smallest-angle rotation taking the unit vector ``u`` to ``e1``.

    For ``u = -e1`` the half-turn about ``e3`` is used.
    """
    u = as_vector(u, "direction")
    u = u / np.linalg.norm(u)
    cos = float(u @ E1)
    if cos < -1.0 + 1e-12:
        return S0.copy()
    w = np.cross(u, E1)
    W = np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])
    return np.eye(3) + W + W @ W / (1.0 + cos)


@dataclass(frozen=True)
class RBRDecomposition:
    """``B = diag(S1,1) . B(v e1) . diag(S2,1)``."""

    S1: np.ndarray
    v: float
    S2: np.ndarray
    residual: float


def rbr_decompose(B: MapLike, group: Group | GroupTag = Group.LORENTZ, c: float = 1.0,
                  tol: float = DEFAULT_TOL) -> RBRDecomposition:
    if isinstance(group, GroupTag):
        group = group.group
    group = Group(group)
    L = _as_linear(B)
    if group is Group.LORENTZ:
        if not is_lorentz(L, c, tol):
            raise NotInGroupError(f"not a proper orthochronous Lorentz map (residual {lorentz_residual(L, c):.3g})")
        boost = lambda V: lorentz_boost(V, c)  # noqa: E731
    elif group is Group.GALILEO:
        if not is_galilean(L, tol):
            raise NotInGroupError("not a proper Galilei map")
        boost = galilei_boost
    else:
        raise NotInGroupError("only GALILEO and LORENTZ maps factor into rotations and a boost")

    V = velocity_of(L)
    v = float(np.linalg.norm(V))
    S2 = np.eye(3) if v == 0.0 else minimal_rotation_to_e1(V / v)
    rest = L @ (boost(v * E1) @ rotation_embed(S2)).inverse()
    try:
        S1 = as_rotation(rest.A, tol=max(1e-9, 10 * tol))
    except Exception as exc:
        raise ConsistencyError(f"left factor is not a rotation: {exc}") from None
    rebuilt = rotation_embed(S1) @ boost(v * E1) @ rotation_embed(S2)
    residual = float(np.max(np.abs(rebuilt.matrix - L.matrix)))
    scale = max(1.0, float(np.max(np.abs(L.matrix))))
    if residual > 100 * tol * scale:
        raise ConsistencyError(f"recomposition residual {residual:.3g} too large")
    return RBRDecomposition(S1=S1, v=v, S2=S2, residual=residual)


def _sample_velocity(P: SpecialParams) -> float:
    return 0.5 * min(1.0, domain_interval(P).symmetric_half_width())


def reflection_test(P: SpecialParams, v: float | None = None) -> float:
    """Max-norm residual of ``S0^T B(v) S0 - B(-v)`` along ``e1``.

    Vanishes exactly for Galilei and Lorentz parameters.  When only one of
    ``v`` and ``-v`` lies in the velocity interval an AsymmetricDomainError
    is raised; the asymmetry itself is evidence of anisotropy.
    """
    if v is None:
        v = _sample_velocity(P)
    v = float(v)
    I = domain_interval(P)
    inside, mirrored = v in I, -v in I
    if not (inside and mirrored):
        if inside or mirrored:
            raise AsymmetricDomainError(
                f"velocity {v} and its reverse are not both in ]{I.lower}, {I.upper}["
            )
        raise DomainError(f"velocity {v} outside ]{I.lower}, {I.upper}[")
    R = rotation_embed(S0)
    lhs = R.matrix.T @ special_matrix(P, E1, v).matrix @ R.matrix
    return float(np.max(np.abs(lhs - special_matrix(P, E1, -v).matrix)))


@dataclass(frozen=True)
class ClassifyReport:
    tag: GroupTag
    sample_velocities: tuple[float, ...] = ()
    reflection_residuals: tuple[float, ...] = field(default=())

    @property
    def violations(self) -> tuple[str, ...]:
        return self.tag.violations

    def to_dict(self) -> dict:
        return {
            "tag": self.tag.group.value,
            "violations": list(self.tag.violations),
            "reflection_residuals": list(self.reflection_residuals),
        }


def classify(P: SpecialParams, numeric: bool = False, samples: int = 5) -> ClassifyReport:
    """Decide whether the family generates the Galilei or Lorentz group.

    The parameter test trusts exact zeros unless ``numeric`` is set, in which
    case magnitudes below 1e-12 count as zero.  The answer is cross-checked
    against :func:`reflection_test` at ``samples`` velocities.
    """
    def nonzero(x: float) -> bool:
        return abs(x) > NUMERIC_ZERO if numeric else x != 0.0

    if P.case is Case.BOUNDED:
        names, group = ("eta", "r1", "r2"), Group.LORENTZ
    elif P.case is Case.POWER:
        names, group = ("l",), Group.GALILEO
    else:
        names, group = ("a1", "lambda1"), Group.GALILEO
    violations = tuple(n for n in names if nonzero(getattr(P, n)))
    tag = GroupTag(Group.ANISOTROPIC, violations) if violations else GroupTag(group)

    h = 0.9 * min(1.0, domain_interval(P).symmetric_half_width())
    vs = tuple(h * (j + 1) / samples for j in range(samples))
    residuals = tuple(reflection_test(P, v) for v in vs)
    if not violations and max(residuals) > DEFAULT_TOL:
        raise ConsistencyError(f"{tag} parameters fail the reflection identity (residual {max(residuals):.3g})")
    return ClassifyReport(tag=tag, sample_velocities=vs, reflection_residuals=residuals)
