"""Synchrony shears and transformations that keep the round-trip light speed.

A shear ``x = lam K xbar`` with ``K = [[I, 0], [k^T, 1]]`` and ``|k| < 1/c``
resynchronises a Minkowski chart without changing two-way light speeds.
Maps between two such charts have the form ``lam K2 Lambda K1^{-1}`` with
``Lambda`` a Lorentz matrix.  For a fixed ``k`` the conjugates
``K Lambda K^{-1}`` form a group isomorphic to the Lorentz group whose
velocity set is an ellipsoid rather than a ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classic import is_lorentz, lorentz_boost, lorentz_residual
from .errors import ConsistencyError, DomainError, InvalidParamsError, InvalidSynchronyError, NotInGroupError, SuperluminalError
from .spacetime import (
    DEFAULT_TOL,
    AffineMap4,
    LinearMap4,
    MapLike,
    _as_affine,
    _as_linear,
    as_rotation,
    as_vector,
    rotation_embed,
)
from .special import Interval

__all__ = [
    "ShearK",
    "shear_matrix",
    "TwoWayParams",
    "lormat_residual",
    "two_way_map",
    "two_way_time_row",
    "special_two_way",
    "TwoWayFit",
    "decompose_two_way",
    "absolute_simultaneity_k2",
    "absolute_simultaneity_map",
    "tangherlini",
    "reichenbach_element",
    "reichenbach_boost",
    "reichenbach_boost_closed_form",
    "conjugated_rotation",
    "epsilon_function",
    "metric_matrix",
    "velocity_in_set",
    "ver_residual",
    "EllipsoidGeometry",
    "ellipsoid_geometry",
    "velocity_map",
]


def _check_c(c: float) -> float:
    c = float(c)
    if not (c > 0 and math.isfinite(c)):
        raise InvalidParamsError(f"c must be a positive finite speed, got {c}")
    return c


def _check_k(k, c: float, name: str = "k") -> np.ndarray:
    k = as_vector(k, name)
    if not np.linalg.norm(k) * c < 1.0:
        raise InvalidSynchronyError(f"|{name}| = {np.linalg.norm(k)!r} must be below 1/c = {1.0 / c!r}")
    return k


def _check_v(V, c: float) -> np.ndarray:
    V = as_vector(V, "velocity")
    if not np.linalg.norm(V) < c:
        raise SuperluminalError(f"|V| = {np.linalg.norm(V)!r} must be below c = {c!r}")
    return V


@dataclass(frozen=True)
class ShearK:
    """Synchrony shear ``lam [[I, 0], [k^T, 1]]`` with ``|k| < 1/c``."""

    k: np.ndarray
    lam: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        c = _check_c(self.c)
        object.__setattr__(self, "c", c)
        k = _check_k(self.k, c)
        k.setflags(write=False)
        object.__setattr__(self, "k", k)
        lam = float(self.lam)
        if not (lam > 0 and math.isfinite(lam)):
            raise InvalidParamsError(f"lambda must be positive, got {lam}")
        object.__setattr__(self, "lam", lam)

    @property
    def unit(self) -> np.ndarray:
        """Direction of ``k``; ``e1`` when ``k = 0``."""
        n = np.linalg.norm(self.k)
        return self.k / n if n > 0 else np.array([1.0, 0.0, 0.0])

    def to_dict(self) -> dict:
        return {"k": self.k.tolist(), "lambda": self.lam, "c": self.c}

    @classmethod
    def from_dict(cls, data: dict) -> "ShearK":
        try:
            return cls(np.asarray(data["k"], dtype=float), float(data.get("lambda", 1.0)), float(data.get("c", 1.0)))
        except (KeyError, TypeError) as exc:
            raise InvalidParamsError(f"bad shear record: {exc}") from None


def _K(k) -> np.ndarray:
    m = np.eye(4)
    m[3, :3] = k
    return m


def _K_inv(k) -> np.ndarray:
    m = np.eye(4)
    m[3, :3] = -np.asarray(k)
    return m


def shear_matrix(sh: ShearK) -> LinearMap4:
    return LinearMap4(sh.lam * _K(sh.k))


def _boost_block(V: np.ndarray, c: float) -> tuple[np.ndarray, float]:
    """Symmetric spatial block of the pure boost with velocity ``V`` and its gamma."""
    L = lorentz_boost(V, c)
    return L.A, L.alpha


def lormat_residual(A, V, c: float) -> float:
    """Max-norm of ``A^T A - I - (alpha^2/c^2) V V^T``."""
    A = np.asarray(A, dtype=float)
    V = as_vector(V, "velocity")
    alpha = 1.0 / math.sqrt(1.0 - (V @ V) / c**2)
    return float(np.max(np.abs(A.T @ A - np.eye(3) - (alpha**2 / c**2) * np.outer(V, V))))


@dataclass(frozen=True)
class TwoWayParams:
    """Parameters of ``lam K2 Lambda K1^{-1}`` plus a translation ``b``.

    ``Lambda`` has spatial block ``A = S A_V`` where ``A_V`` is the
    symmetric boost block and ``S`` a rotation, so 1 + 3 + 3 + 3 + 3 + 4 = 17
    free numbers in all.
    """

    lam: float
    k1: np.ndarray
    k2: np.ndarray
    V: np.ndarray
    S: np.ndarray = field(default_factory=lambda: np.eye(3))
    c: float = 1.0
    b: np.ndarray = field(default_factory=lambda: np.zeros(4))

    PARAMETER_COUNT = 17

    def __post_init__(self):
        c = _check_c(self.c)
        object.__setattr__(self, "c", c)
        lam = float(self.lam)
        if not (lam > 0 and math.isfinite(lam)):
            raise InvalidParamsError(f"lambda must be positive, got {lam}")
        object.__setattr__(self, "lam", lam)
        for name in ("k1", "k2"):
            object.__setattr__(self, name, _check_k(getattr(self, name), c, name))
        object.__setattr__(self, "V", _check_v(self.V, c))
        object.__setattr__(self, "S", as_rotation(self.S))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if b.shape != (4,) or not np.all(np.isfinite(b)):
            raise InvalidParamsError("translation must have 4 finite entries")
        object.__setattr__(self, "b", b)
        for name in ("k1", "k2", "V", "S", "b"):
            getattr(self, name).setflags(write=False)

    @property
    def alpha(self) -> float:
        return _boost_block(self.V, self.c)[1]

    @property
    def A(self) -> np.ndarray:
        return self.S @ _boost_block(self.V, self.c)[0]

    def lorentz(self) -> LinearMap4:
        return rotation_embed(self.S) @ lorentz_boost(self.V, self.c)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "k1": self.k1.tolist(),
            "k2": self.k2.tolist(),
            "V": self.V.tolist(),
            "S": self.S.tolist(),
            "c": self.c,
            "b": self.b.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TwoWayParams":
        """Accepts either a rotation ``S`` or a spatial block ``A`` obeying the Lorentz constraint."""
        try:
            c = float(data.get("c", 1.0))
            V = np.asarray(data.get("V", [0, 0, 0]), dtype=float)
            if "A" in data:
                if "S" in data:
                    raise InvalidParamsError("give either S or A, not both")
                A = np.asarray(data["A"], dtype=float)
                S = A @ np.linalg.inv(_boost_block(_check_v(V, _check_c(c)), c)[0])
            else:
                S = np.asarray(data.get("S", np.eye(3)), dtype=float)
            return cls(
                lam=float(data.get("lambda", 1.0)),
                k1=np.asarray(data.get("k1", [0, 0, 0]), dtype=float),
                k2=np.asarray(data.get("k2", [0, 0, 0]), dtype=float),
                V=V,
                S=S,
                c=c,
                b=np.asarray(data.get("b", [0, 0, 0, 0]), dtype=float),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidParamsError):
                raise
            raise InvalidParamsError(f"bad two-way record: {exc}") from None


def two_way_time_row(P: TwoWayParams) -> np.ndarray:
    """Time row of the map written out in closed form (without ``lam``)."""
    A, alpha, V, k1, k2 = P.A, P.alpha, P.V, P.k1, P.k2
    tt = alpha - k2 @ A @ V
    return np.concatenate([A.T @ k2 - (alpha / P.c**2) * V - tt * k1, [tt]])


def _closed_form_matrix(P: TwoWayParams) -> np.ndarray:
    A, V = P.A, P.V
    m = np.empty((4, 4))
    m[:3, :3] = A @ (np.eye(3) + np.outer(V, P.k1))
    m[:3, 3] = -A @ V
    m[3] = two_way_time_row(P)
    return P.lam * m


def two_way_map(P: TwoWayParams, tol: float = DEFAULT_TOL) -> AffineMap4:
    """``x' = lam K2 Lambda K1^{-1} x + b``, checked entrywise against the closed form."""
    m = P.lam * _K(P.k2) @ P.lorentz().matrix @ _K_inv(P.k1)
    closed = _closed_form_matrix(P)
    if np.max(np.abs(m - closed)) > tol * max(1.0, float(np.max(np.abs(m)))):
        raise ConsistencyError("two-way map disagrees with its closed-form entries")
    return AffineMap4(LinearMap4(m), P.b)


def special_two_way(v: float, a1: float, a2: float, lam: float = 1.0, c: float = 1.0) -> AffineMap4:
    """Two-way map along ``e1`` with ``k1 = a1 e1``, ``k2 = a2 e1`` and ``A = diag(alpha, 1, 1)``."""
    c = _check_c(c)
    if not abs(v) < c:
        raise SuperluminalError(f"|v| = {abs(v)} must be below c = {c}")
    for name, a in (("a1", a1), ("a2", a2)):
        if not abs(a) * c < 1.0:
            raise InvalidSynchronyError(f"|{name}| = {abs(a)} must be below 1/c")
    if not lam > 0:
        raise InvalidParamsError("lambda must be positive")
    alpha = 1.0 / math.sqrt(1.0 - (v / c) ** 2)
    m = np.zeros((4, 4))
    m[0, 0], m[0, 3] = lam * alpha * (1.0 + a1 * v), -lam * alpha * v
    m[1, 1] = m[2, 2] = lam
    m[3, 0] = lam * alpha * (a2 - v / c**2 - (1.0 - a2 * v) * a1)
    m[3, 3] = lam * alpha * (1.0 - a2 * v)
    return AffineMap4(LinearMap4(m))


@dataclass(frozen=True)
class TwoWayFit:
    """Outcome of :func:`decompose_two_way`.

    ``params`` is the best fit found even when ``member`` is false; the
    residual is the max-norm misfit of the linear part.
    """

    member: bool
    residual: float
    params: TwoWayParams | None
    iterations: int
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "member": self.member,
            "residual": self.residual,
            "iterations": self.iterations,
            "reason": self.reason,
            "params": None if self.params is None else self.params.to_dict(),
        }


_INFEASIBLE = 1e3


def _fit_given_k1(B: np.ndarray, k1: np.ndarray, c: float):
    """Best ``(lam, S, V, k2)`` for a fixed ``k1``; returns (pieces, residual matrix)."""
    BK = B @ _K(k1)
    N = BK[:3, :3]
    try:
        V = -np.linalg.solve(N, BK[:3, 3])
    except np.linalg.LinAlgError:
        return None, np.full((4, 4), _INFEASIBLE)
    if not np.linalg.norm(V) < c:
        return None, np.full((4, 4), _INFEASIBLE)
    AV, gamma = _boost_block(V, c)
    U, _, Wt = np.linalg.svd(N @ np.linalg.inv(AV))
    if np.linalg.det(U @ Wt) < 0:
        U[:, -1] = -U[:, -1]
    S = U @ Wt
    lam = float(np.trace(S.T @ N @ np.linalg.inv(AV))) / 3.0
    if not lam > 0:
        return None, np.full((4, 4), _INFEASIBLE)
    A = S @ AV
    q = -(gamma / c**2) * V
    lhs = lam * np.vstack([A.T, -(A @ V)[None, :]])
    rhs = BK[3] - lam * np.concatenate([q, [gamma]])
    k2 = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
    L = rotation_embed(S).matrix @ lorentz_boost(V, c).matrix
    model = lam * _K(k2) @ L @ _K_inv(k1)
    return (lam, S, V, k2), model - B


def _seed_k1(B: np.ndarray, c: float) -> list[np.ndarray]:
    """Closed-form starting points for ``k1``.

    With ``M`` the spatial block and ``n`` the spatial-time column, members
    satisfy ``(M + n k1^T)(M + n k1^T)^T = lam^2 I + n n^T / c^2``.  The part
    orthogonal to ``n`` fixes ``lam^2``, the mixed part puts ``k1`` on a
    line, and the ``n n^T`` part leaves a quadratic along that line.
    """
    M, n = B[:3, :3], B[:3, 3]
    nn = float(np.linalg.norm(n))
    if nn < 1e-14:
        return []
    nh = n / nn
    Pp = np.eye(3) - np.outer(nh, nh)
    MM = M @ M.T
    lam2 = float(np.trace(Pp @ MM @ Pp)) / 2.0
    try:
        Mi = np.linalg.inv(M)
    except np.linalg.LinAlgError:
        return []
    a = Mi @ (-Pp @ MM @ nh / nn)
    b = Mi @ nh
    coeffs = [nn**2 * (b @ b), 2 * nn + 2 * nn**2 * (a @ b), nh @ MM @ nh + nn**2 * (a @ a - 1.0 / c**2) - lam2]
    return [a + float(np.real(t)) * b for t in np.roots(coeffs) if abs(np.imag(t)) < 1e-9]


def decompose_two_way(
    B: MapLike,
    c: float = 1.0,
    tol: float = 1e-8,
    fixed_k1=None,
    max_iter: int = 100,
    damping: float = 0.5,
) -> TwoWayFit:
    """Recover ``(lam, k1, k2, V, S)`` with ``B = lam K2 Lambda K1^{-1}``.

    For fixed ``k1`` the other parameters follow in closed form (velocity,
    polar factor, least squares for ``k2``), so only ``k1`` is iterated, by
    damped Gauss-Newton with step halving.  The iteration starts from the
    best of ``k1 = 0`` and the closed-form seeds.  Passing ``fixed_k1``
    restricts the fit to maps out of a chart with that shear (``0`` for a
    Minkowski source).  A final residual above ``tol`` is evidence that
    ``B`` is not in the family.
    """
    c = _check_c(c)
    F = _as_affine(B)
    m = F.matrix

    def worst(k1):
        pieces, r = _fit_given_k1(m, k1, c)
        return pieces, r, float(np.max(np.abs(r)))

    if fixed_k1 is not None:
        k1 = as_vector(fixed_k1, "k1")
        pieces, _, res = worst(k1)
        it = 0
    else:
        starts = [np.zeros(3)] + _seed_k1(m, c)
        k1 = min(starts, key=lambda s: worst(s)[2])
        pieces, r, res = worst(k1)
        h = 1e-7
        it = 0
        for it in range(1, max_iter + 1):
            if res < 1e-14:
                break
            J = np.empty((16, 3))
            for j in range(3):
                e = np.zeros(3)
                e[j] = h
                J[:, j] = (np.ravel(worst(k1 + e)[1]) - np.ravel(worst(k1 - e)[1])) / (2 * h)
            step = np.linalg.lstsq(J, -np.ravel(r), rcond=None)[0]
            t = damping
            while t > 1e-6 and worst(k1 + t * step)[2] >= res:
                t *= 0.5
            if t <= 1e-6:
                break
            k1 = k1 + t * step
            pieces, r, res = worst(k1)

    if pieces is None:
        return TwoWayFit(False, res, None, it, "no admissible velocity for any tried k1")
    lam, S, V, k2 = pieces
    bound = 1.0 / c
    if not (np.linalg.norm(k1) < bound and np.linalg.norm(k2) < bound):
        return TwoWayFit(False, res, None, it, "synchrony vector outside |k| < 1/c")
    params = TwoWayParams(lam=lam, k1=k1, k2=k2, V=V, S=S, c=c, b=F.translation)
    if res > tol:
        return TwoWayFit(False, res, params, it, f"residual {res:.3g} above {tol:.3g}")
    return TwoWayFit(True, res, params, it)


def absolute_simultaneity_k2(k1, V, S, c: float = 1.0) -> np.ndarray:
    """Solve ``A^T k2 - (alpha/c^2) V = (alpha - k2^T A V) k1`` for ``k2``."""
    c = _check_c(c)
    k1 = _check_k(k1, c, "k1")
    V = _check_v(V, c)
    AV, alpha = _boost_block(V, c)
    A = as_rotation(S) @ AV
    M = A.T + np.outer(k1, A @ V)
    return np.linalg.solve(M, alpha * (V / c**2 + k1))


def absolute_simultaneity_map(lam: float, k1, V, S=None, b=None, c: float = 1.0,
                              tol: float = DEFAULT_TOL) -> AffineMap4:
    """Member of the two-way family whose time coordinate is proportional to ``t``.

    ``k2`` is fixed by the simultaneity constraint; the result is checked
    against ``t' = lam t / (alpha (1 + k1.V))``.
    """
    S = np.eye(3) if S is None else S
    b = np.zeros(4) if b is None else b
    k2 = absolute_simultaneity_k2(k1, V, S, c)
    if not np.linalg.norm(k2) * c < 1.0:
        raise InvalidSynchronyError(f"simultaneity constraint needs |k2| = {np.linalg.norm(k2)!r} >= 1/c")
    P = TwoWayParams(lam=lam, k1=k1, k2=k2, V=V, S=S, c=c, b=b)
    F = two_way_map(P)
    row = F.matrix[3]
    expected = P.lam / (P.alpha * (1.0 + P.k1 @ P.V))
    if np.max(np.abs(row[:3])) > tol * max(1.0, lam) or abs(row[3] - expected) > tol * max(1.0, expected):
        raise ConsistencyError("time row is not proportional to t")
    return F


def tangherlini(v: float, lam: float = 1.0, c: float = 1.0) -> AffineMap4:
    """``x1' = lam alpha (x1 - v t)``, ``x2' = lam x2``, ``x3' = lam x3``, ``t' = lam t / alpha``."""
    c = _check_c(c)
    if not abs(v) < c:
        raise SuperluminalError(f"|v| = {abs(v)} must be below c = {c}")
    if not lam > 0:
        raise InvalidParamsError("lambda must be positive")
    alpha = 1.0 / math.sqrt(1.0 - (v / c) ** 2)
    m = np.diag([lam * alpha, lam, lam, lam / alpha])
    m[0, 3] = -lam * alpha * v
    return AffineMap4(LinearMap4(m))


def reichenbach_element(sh: ShearK, Lam: MapLike, tol: float = DEFAULT_TOL) -> LinearMap4:
    """``K Lambda K^{-1}`` for a proper orthochronous Lorentz ``Lambda`` (``lam`` cancels)."""
    L = _as_linear(Lam)
    if not is_lorentz(L, sh.c, tol):
        raise NotInGroupError(f"not a Lorentz matrix for c = {sh.c} (residual {lorentz_residual(L, sh.c):.3g})")
    return LinearMap4(_K(sh.k) @ L.matrix @ _K_inv(sh.k))


def reichenbach_boost_closed_form(sh: ShearK, v: float) -> LinearMap4:
    """Closed-form entries of ``K Lambda(v u) K^{-1}`` for ``u`` along ``k``."""
    c = sh.c
    if not abs(v) < c:
        raise SuperluminalError(f"|v| = {abs(v)} must be below c = {c}")
    u = sh.unit
    k = float(np.linalg.norm(sh.k))
    alpha = 1.0 / math.sqrt(1.0 - (v / c) ** 2)
    return LinearMap4.from_blocks(
        np.eye(3) + (alpha * (1.0 + k * v) - 1.0) * np.outer(u, u),
        -alpha * v * u,
        -alpha * (1.0 / c**2 - k**2) * v * u,
        alpha * (1.0 - k * v),
    )


def reichenbach_boost(sh: ShearK, v: float, tol: float = DEFAULT_TOL) -> LinearMap4:
    """Conjugated boost along ``k`` (along ``e1`` when ``k = 0``)."""
    out = reichenbach_element(sh, lorentz_boost(v * sh.unit, sh.c))
    closed = reichenbach_boost_closed_form(sh, v)
    if not out.allclose(closed, tol * max(1.0, float(np.max(np.abs(closed.matrix))))):
        raise ConsistencyError("conjugated boost disagrees with its closed form")
    return out


def conjugated_rotation(sh: ShearK, S) -> LinearMap4:
    """``K diag(S,1) K^{-1}``: zero velocity, but not a plain rotation unless ``k = 0``."""
    return LinearMap4(_K(sh.k) @ rotation_embed(S).matrix @ _K_inv(sh.k))


def epsilon_function(sh: ShearK, r) -> float:
    """Fraction of a round trip along ``r`` assigned to the outbound leg."""
    r = as_vector(r, "r")
    n = float(np.linalg.norm(r))
    if n == 0.0:
        raise DomainError("epsilon is undefined at r = 0")
    return 0.5 * (1.0 + sh.c * float(sh.k @ r) / n)


def metric_matrix(sh: ShearK) -> np.ndarray:
    """``(K^{-1})^T G_c K^{-1}``, the form preserved by ``K Lambda K^{-1}``."""
    c2 = sh.c**2
    G = np.empty((4, 4))
    G[:3, :3] = np.eye(3) - c2 * np.outer(sh.k, sh.k)
    G[:3, 3] = G[3, :3] = c2 * sh.k
    G[3, 3] = -c2
    return G


def velocity_in_set(sh: ShearK, v) -> bool:
    x = np.append(as_vector(v, "velocity"), 1.0)
    return bool(x @ metric_matrix(sh) @ x < 0.0)


def ver_residual(sh: ShearK, v) -> np.ndarray | float:
    """``|v|^2 - c^2 (1 - k.v)^2`` for one velocity or a stack of them."""
    v = np.asarray(v, dtype=float)
    out = np.sum(v * v, axis=-1) - sh.c**2 * (1.0 - v @ sh.k) ** 2
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class EllipsoidGeometry:
    """Boundary of the admissible velocity set: a spheroid elongated along ``k``."""

    centre: np.ndarray
    major: float
    transverse: float
    interval: Interval
    axis: np.ndarray

    def boundary_point(self, theta: float, phi: float) -> np.ndarray:
        """Point at polar angle ``theta`` from ``axis`` and azimuth ``phi``."""
        e2, e3 = _orthonormal_complement(self.axis)
        return (
            self.centre
            + self.major * math.cos(theta) * self.axis
            + self.transverse * math.sin(theta) * (math.cos(phi) * e2 + math.sin(phi) * e3)
        )

    def boundary_points(self, theta, phi) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)[:, None]
        phi = np.asarray(phi, dtype=float)[:, None]
        e2, e3 = _orthonormal_complement(self.axis)
        return (
            self.centre
            + self.major * np.cos(theta) * self.axis
            + self.transverse * np.sin(theta) * (np.cos(phi) * e2 + np.sin(phi) * e3)
        )

    def to_dict(self) -> dict:
        return {
            "centre": self.centre.tolist(),
            "major": self.major,
            "transverse": self.transverse,
            "interval": self.interval.to_dict(),
            "axis": self.axis.tolist(),
        }


def _orthonormal_complement(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    seed = np.eye(3)[int(np.argmin(np.abs(u)))]
    e2 = np.cross(u, seed)
    e2 /= np.linalg.norm(e2)
    return e2, np.cross(u, e2)


def ellipsoid_geometry(sh: ShearK) -> EllipsoidGeometry:
    c = sh.c
    kn = float(np.linalg.norm(sh.k))
    s = 1.0 - (c * kn) ** 2
    return EllipsoidGeometry(
        centre=-(c**2) * sh.k / s,
        major=c / s,
        transverse=c / math.sqrt(s),
        interval=Interval(-c / (1.0 - c * kn), c / (1.0 + c * kn)),
        axis=sh.unit,
    )


def velocity_map(sh: ShearK, V) -> np.ndarray:
    """Velocity of ``K Lambda K^{-1}`` when ``Lambda`` has velocity ``V``: ``V / (1 + k.V)``."""
    V = _check_v(V, sh.c)
    return V / (1.0 + float(sh.k @ V))
