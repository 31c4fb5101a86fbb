"""4x4 linear and affine transformations of space-time coordinates.

Coordinates are ordered ``(x1, x2, x3, t)``.  A linear map is stored as a full
4x4 matrix and read through its blocks::

    B = | A      -A V |
        | k^T    alpha|

where ``V`` is the velocity of the matrix, i.e. the velocity in the source
chart of any point at rest in the target chart.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import (
    AxiomViolationError,
    DegenerateMapError,
    DegenerateWorldlineError,
    InvalidRotationError,
    KinegroupError,
    NotAtRestError,
)

__all__ = [
    "DEFAULT_TOL",
    "ROTATION_TOL",
    "LinearMap4",
    "AffineMap4",
    "AxiomReport",
    "RestDecomposition",
    "UniformWorldline",
    "as_vector",
    "as_rotation",
    "rotation_embed",
    "velocity_of",
    "reciprocal_velocity",
    "compose",
    "inverse",
    "composed_velocity",
    "axiom_predicates",
    "rest_decompose",
    "map_worldline",
    "max_abs_diff",
]

DEFAULT_TOL = 1e-10
ROTATION_TOL = 1e-9

# relative threshold below which a block is treated as singular
_SINGULAR_RTOL = 1e-13


def as_vector(x, name: str = "vector") -> np.ndarray:
    """Return ``x`` as a read-only finite float array of shape (3,)."""
    v = np.array(x, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise KinegroupError(f"{name} must have 3 components, got shape {np.shape(x)}")
    if not np.all(np.isfinite(v)):
        raise KinegroupError(f"{name} has non-finite components: {v}")
    v.setflags(write=False)
    return v


def as_rotation(S, tol: float = ROTATION_TOL) -> np.ndarray:
    """Validate a proper rotation matrix and return it as a read-only array.

    Raises InvalidRotationError when ``S^T S`` differs from the identity or
    ``det S`` differs from +1 by more than ``tol``.
    """
    m = np.array(S, dtype=float)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        raise InvalidRotationError(f"rotation must be a finite 3x3 matrix, got shape {m.shape}")
    orth = np.max(np.abs(m.T @ m - np.eye(3)))
    det = np.linalg.det(m)
    if orth > tol or abs(det - 1.0) > tol:
        raise InvalidRotationError(
            f"not a proper rotation: |S^T S - I| = {orth:.3e}, det S = {det:.15g}"
        )
    m.setflags(write=False)
    return m


def _is_singular(m: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(m))))
    return abs(np.linalg.det(m)) <= _SINGULAR_RTOL * scale ** m.shape[0]


class LinearMap4:
    """Immutable 4x4 linear space-time map with block accessors."""

    __slots__ = ("_m",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.shape != (4, 4):
            raise KinegroupError(f"linear map must be 4x4, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise KinegroupError("linear map has non-finite entries")
        m.setflags(write=False)
        self._m = m

    @classmethod
    def identity(cls) -> "LinearMap4":
        return cls(np.eye(4))

    @classmethod
    def from_blocks(cls, A, column, k, alpha: float) -> "LinearMap4":
        m = np.empty((4, 4))
        m[:3, :3] = A
        m[:3, 3] = column
        m[3, :3] = k
        m[3, 3] = alpha
        return cls(m)

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def A(self) -> np.ndarray:
        """Spatial Jacobian block."""
        return self._m[:3, :3]

    @property
    def column(self) -> np.ndarray:
        """Spatial-time column, equal to ``-A V``."""
        return self._m[:3, 3]

    @property
    def k(self) -> np.ndarray:
        """Time-spatial row as a 3-vector."""
        return self._m[3, :3]

    @property
    def alpha(self) -> float:
        return float(self._m[3, 3])

    def det(self) -> float:
        return float(np.linalg.det(self._m))

    def inverse(self) -> "LinearMap4":
        if _is_singular(self._m):
            raise DegenerateMapError("linear map is singular")
        return LinearMap4(np.linalg.inv(self._m))

    def apply(self, x) -> np.ndarray:
        """Map events given as an array of shape (4,) or (n, 4)."""
        x = np.asarray(x, dtype=float)
        return x @ self._m.T

    def __matmul__(self, other):
        if isinstance(other, LinearMap4):
            return LinearMap4(self._m @ other._m)
        if isinstance(other, AffineMap4):
            return compose(AffineMap4(self), other)
        return self._m @ np.asarray(other, dtype=float)

    def allclose(self, other, tol: float = DEFAULT_TOL) -> bool:
        return max_abs_diff(self, other) <= tol

    def __repr__(self) -> str:
        rows = ", ".join("[" + ", ".join(f"{x:.6g}" for x in r) + "]" for r in self._m)
        return f"LinearMap4([{rows}])"


@dataclass(frozen=True)
class AffineMap4:
    """The affine map ``x -> L x + b``."""

    linear: LinearMap4
    translation: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def __post_init__(self):
        lin = self.linear if isinstance(self.linear, LinearMap4) else LinearMap4(self.linear)
        b = np.array(self.translation, dtype=float).reshape(-1)
        if b.shape != (4,) or not np.all(np.isfinite(b)):
            raise KinegroupError(f"translation must be 4 finite numbers, got {self.translation!r}")
        b.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "translation", b)

    @classmethod
    def identity(cls) -> "AffineMap4":
        return cls(LinearMap4.identity())

    @classmethod
    def translation_by(cls, b) -> "AffineMap4":
        return cls(LinearMap4.identity(), b)

    @property
    def matrix(self) -> np.ndarray:
        return self.linear.matrix

    def apply(self, x) -> np.ndarray:
        return self.linear.apply(x) + self.translation

    def __call__(self, x) -> np.ndarray:
        return self.apply(x)

    def to_dict(self) -> dict:
        return {
            "linear": self.linear.matrix.tolist(),
            "translation": self.translation.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict, validate: bool = False) -> "AffineMap4":
        """Build from ``{"linear": 4x4 rows, "translation": [4]}``.

        With ``validate=True`` the causality and orientation predicates must
        all hold, otherwise AxiomViolationError is raised.
        """
        try:
            linear = data["linear"]
        except (KeyError, TypeError):
            raise KinegroupError('affine map JSON needs a "linear" 4x4 array') from None
        out = cls(LinearMap4(linear), data.get("translation", [0.0, 0.0, 0.0, 0.0]))
        if validate:
            report = axiom_predicates(out)
            if not report.all:
                raise AxiomViolationError(f"map violates axiom predicates: {report}")
        return out


MapLike = Union[LinearMap4, AffineMap4, np.ndarray]


def _as_linear(B: MapLike) -> LinearMap4:
    if isinstance(B, LinearMap4):
        return B
    if isinstance(B, AffineMap4):
        return B.linear
    return LinearMap4(B)


def _as_affine(B: MapLike) -> AffineMap4:
    if isinstance(B, AffineMap4):
        return B
    return AffineMap4(_as_linear(B))


def max_abs_diff(a: MapLike, b: MapLike) -> float:
    """Max-norm distance between two maps (linear parts and translations)."""
    if isinstance(a, AffineMap4) or isinstance(b, AffineMap4):
        fa, fb = _as_affine(a), _as_affine(b)
        return float(
            max(
                np.max(np.abs(fa.matrix - fb.matrix)),
                np.max(np.abs(fa.translation - fb.translation)),
            )
        )
    return float(np.max(np.abs(_as_linear(a).matrix - _as_linear(b).matrix)))


def rotation_embed(S) -> LinearMap4:
    """Embed a spatial rotation as ``diag(S, 1)``."""
    m = np.eye(4)
    m[:3, :3] = as_rotation(S)
    return LinearMap4(m)


def velocity_of(B: MapLike) -> np.ndarray:
    """Velocity ``V`` solving ``column = -A V``."""
    L = _as_linear(B)
    if _is_singular(L.A):
        raise DegenerateMapError("spatial block A is singular; velocity undefined")
    return -np.linalg.solve(L.A, L.column)


def reciprocal_velocity(B: MapLike) -> np.ndarray:
    """Velocity of the inverse map (source chart seen from the target chart)."""
    return velocity_of(_as_linear(B).inverse())


def compose(B2: MapLike, B1: MapLike):
    """Return ``B2 o B1`` (apply ``B1`` first).

    Two LinearMap4 arguments give a LinearMap4; anything involving an
    AffineMap4 gives an AffineMap4.
    """
    if isinstance(B2, LinearMap4) and isinstance(B1, LinearMap4):
        return B2 @ B1
    f2, f1 = _as_affine(B2), _as_affine(B1)
    lin = f2.linear @ f1.linear
    return AffineMap4(lin, f2.linear.matrix @ f1.translation + f2.translation)


def inverse(B: MapLike):
    if isinstance(B, AffineMap4):
        inv = B.linear.inverse()
        return AffineMap4(inv, -(inv.matrix @ B.translation))
    return _as_linear(B).inverse()


def composed_velocity(V, B1: MapLike) -> np.ndarray:
    """Velocity of ``B @ B1`` for any map ``B`` whose velocity is ``V``.

    Only the blocks of ``B1`` and the outer velocity enter::

        V_{B B1} = (I - A1^{-1} V k1^T)^{-1} (U + alpha1 A1^{-1} V)

    with ``U`` the velocity of ``B1``.
    """
    V = as_vector(V, "V")
    L1 = _as_linear(B1)
    U = velocity_of(L1)
    AinvV = np.linalg.solve(L1.A, V)
    M = np.eye(3) - np.outer(AinvV, L1.k)
    if _is_singular(M):
        raise DegenerateMapError("I - A1^{-1} V k1^T is singular")
    return np.linalg.solve(M, U + L1.alpha * AinvV)


@dataclass(frozen=True)
class AxiomReport:
    """Causality and orientation predicates of a coordinate change."""

    causal: bool
    time_oriented: bool
    space_oriented: bool
    dt_dt: float
    dt_dt_inverse: float
    det_A: float

    @property
    def all(self) -> bool:
        return self.causal and self.time_oriented and self.space_oriented


def axiom_predicates(B: MapLike) -> AxiomReport:
    """Evaluate causality, time orientation and spatial orientation.

    Both directions of the coordinate change are checked: ``dt'/dt`` at fixed
    position is ``alpha``, and along a point at rest in the target chart it is
    ``alpha + k.V = det B / det A``.  The spatial orientation is ``det A > 0``.
    """
    L = _as_linear(B)
    det_A = float(np.linalg.det(L.A))
    det_B = L.det()
    fwd = L.alpha
    if det_A == 0.0:
        back = np.inf if det_B != 0.0 else np.nan
    else:
        back = det_B / det_A
    causal = fwd != 0.0 and np.isfinite(back) and back != 0.0
    time_oriented = bool(causal and fwd > 0.0 and back > 0.0)
    return AxiomReport(
        causal=bool(causal),
        time_oriented=time_oriented,
        space_oriented=det_A > 0.0,
        dt_dt=fwd,
        dt_dt_inverse=float(back),
        det_A=det_A,
    )


@dataclass(frozen=True)
class RestDecomposition:
    """Outcome of splitting a zero-velocity map into rotation and translation."""

    ok: bool
    rotation: np.ndarray | None
    translation: np.ndarray
    residual: float
    reason: str = ""


def rest_decompose(B: MapLike, tol: float = DEFAULT_TOL) -> RestDecomposition:
    """Split ``B = T_b o diag(S, 1)`` when ``B`` is a Newtonian rest map.

    A map with zero velocity whose linear part is not of the pure rotation
    shape (for instance a rotation conjugated by a synchrony shear) gives
    ``ok=False`` together with the shape residual.
    """
    F = _as_affine(B)
    V = velocity_of(F)
    if np.max(np.abs(V)) > tol:
        raise NotAtRestError(f"map has nonzero velocity {V}")
    L = F.linear
    S = L.A
    shape_res = max(
        float(np.max(np.abs(L.k))),
        abs(L.alpha - 1.0),
        float(np.max(np.abs(L.column))),
    )
    orth_res = float(np.max(np.abs(S.T @ S - np.eye(3))))
    det_res = abs(float(np.linalg.det(S)) - 1.0)
    residual = max(shape_res, orth_res, det_res)
    if residual > tol:
        reason = "time row is not (0, 0, 0, 1)" if shape_res > tol else "spatial block is not a rotation"
        return RestDecomposition(False, None, F.translation, residual, reason)
    return RestDecomposition(True, np.array(S), F.translation, residual)


@dataclass(frozen=True)
class UniformWorldline:
    """Straight worldline through ``base`` with constant 3-velocity."""

    base: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        base = np.array(self.base, dtype=float).reshape(-1)
        if base.shape != (4,) or not np.all(np.isfinite(base)):
            raise KinegroupError("worldline base event must be 4 finite numbers")
        base.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "velocity", as_vector(self.velocity, "velocity"))

    @property
    def tangent(self) -> np.ndarray:
        return np.append(self.velocity, 1.0)

    def events(self, times: Iterable[float]) -> np.ndarray:
        """Events on the line at the given time coordinates, shape (n, 4)."""
        t = np.asarray(list(times) if not isinstance(times, np.ndarray) else times, dtype=float)
        return self.base + np.outer(t - self.base[3], self.tangent)


def map_worldline(F: MapLike, w: UniformWorldline, tol: float = 1e-12) -> UniformWorldline:
    """Image of a uniform worldline under an affine map."""
    F = _as_affine(F)
    d = F.linear.matrix @ w.tangent
    if abs(d[3]) <= tol * float(np.max(np.abs(d))):
        raise DegenerateWorldlineError("image of the worldline is not parametrizable by time")
    return UniformWorldline(F.apply(w.base), d[:3] / d[3])
