"""Measured one-way and round-trip light speeds in a coordinate chart.

A chart is described by a map from Minkowski coordinates (light speed ``c``
in every direction) to the measured coordinates.  Light is propagated in the
Minkowski chart and pushed forward: for an image direction ``d`` the one-way
speed is the ``s > 0`` for which the preimage of the image displacement
``(s d, 1)`` is null.  Nonlinear charts are handled through their local
Jacobian, which is exact for the affine case.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import DegenerateWorldlineError, InvalidParamsError, InvalidPathError, InvalidSynchronyError
from .spacetime import AffineMap4, LinearMap4, MapLike, _as_linear, as_vector

__all__ = [
    "NonlinearResync",
    "CoordinateMap",
    "ClosedPath",
    "TripReport",
    "chart_jacobians",
    "local_speeds",
    "one_way_speed",
    "path_samples",
    "round_trip_speed",
    "round_trip_time",
    "two_way_law_check",
    "trip_report",
    "direction_grid",
    "sine_resync",
]


@dataclass(frozen=True)
class NonlinearResync:
    """``r = lam rbar``, ``t = lam (tbar + g(rbar))`` with ``|grad g| < 1/c``.

    ``grad`` may be supplied; otherwise central differences with step
    ``1e-6 * scale`` are used.  ``g`` and ``grad`` must accept an ``(N, 3)``
    array of points.
    """

    g: Callable[[np.ndarray], np.ndarray]
    lam: float = 1.0
    c: float = 1.0
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    scale: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidParamsError("lambda must be positive")
        if not self.c > 0:
            raise InvalidParamsError("c must be positive")

    def gradient(self, rbar: np.ndarray) -> np.ndarray:
        rbar = np.atleast_2d(np.asarray(rbar, dtype=float))
        if self.grad is not None:
            return np.asarray(self.grad(rbar), dtype=float).reshape(rbar.shape)
        h = 1e-6 * self.scale
        out = np.empty_like(rbar)
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            out[:, j] = (np.asarray(self.g(rbar + e)) - np.asarray(self.g(rbar - e))) / (2 * h)
        return out

    def apply(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = self.lam * x.copy()
        out[:, 3] = self.lam * (x[:, 3] + np.asarray(self.g(x[:, :3])))
        return out

    def jacobians_at_image(self, r: np.ndarray) -> np.ndarray:
        """Jacobians ``lam [[I, 0], [grad g^T, 1]]`` at image points ``r``."""
        w = self.gradient(np.atleast_2d(r) / self.lam)
        J = np.broadcast_to(np.eye(4), (len(w), 4, 4)).copy()
        J[:, 3, :3] = w
        return self.lam * J

    def max_gradient(self, r: np.ndarray) -> float:
        """Largest ``|grad g|`` over image points ``r``; raises when it reaches ``1/c``."""
        w = self.gradient(np.atleast_2d(r) / self.lam)
        worst = float(np.max(np.linalg.norm(w, axis=1)))
        if not worst * self.c < 1.0:
            raise InvalidSynchronyError(f"|grad g| reaches {worst!r} >= 1/c on the sampled points")
        return worst


CoordinateMap = Union[AffineMap4, LinearMap4, NonlinearResync]


def chart_jacobians(chart: CoordinateMap, points: np.ndarray, source: MapLike | None = None) -> np.ndarray:
    """Jacobian of ``chart o source`` at image points, shape ``(N, 4, 4)``.

    ``source`` is the linear map from Minkowski coordinates to the chart the
    map acts on; it defaults to the identity.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(chart, NonlinearResync):
        J = chart.jacobians_at_image(points)
    else:
        J = np.broadcast_to(_as_linear(chart).matrix, (len(points), 4, 4))
    if source is not None:
        J = J @ _as_linear(source).matrix
    return J


def local_speeds(J: np.ndarray, d: np.ndarray, c: float) -> np.ndarray:
    """Light speed along image direction ``d`` for each Jacobian in ``J``."""
    d = np.asarray(d, dtype=float)
    Jinv = np.linalg.inv(J)
    if d.ndim == 1:
        P = Jinv[:, :, :3] @ d
    else:
        P = np.einsum("nij,nj->ni", Jinv[:, :, :3], d)
    Q = Jinv[:, :, 3]
    g = np.array([1.0, 1.0, 1.0, -c * c])
    a = np.einsum("ni,i,ni->n", P, g, P)
    b = np.einsum("ni,i,ni->n", P, g, Q)
    q = np.einsum("ni,i,ni->n", Q, g, Q)
    if np.any(q >= 0) or np.any(a <= 0):
        raise DegenerateWorldlineError("image rest lines or image spatial directions are not of the right causal type")
    s = (-b + np.sqrt(b * b - a * q)) / a
    if np.any(s[:, None] * P[:, 3:4] + Q[:, 3:4] <= 0):
        raise DegenerateWorldlineError("light ray runs backwards in the image time coordinate")
    return s


def _unit(d) -> np.ndarray:
    d = as_vector(d, "direction")
    n = np.linalg.norm(d)
    if n == 0:
        raise InvalidParamsError("direction must be nonzero")
    return d / n


def one_way_speed(chart: CoordinateMap, direction, c: float = 1.0, source: MapLike | None = None,
                  at=None) -> tuple[float, float]:
    """``(c_plus, c_minus)`` along ``+direction`` and ``-direction`` at image point ``at``."""
    d = _unit(direction)
    point = np.zeros(3) if at is None else as_vector(at, "point")
    J = chart_jacobians(chart, point[None, :], source)
    return float(local_speeds(J, d, c)[0]), float(local_speeds(J, -d, c)[0])


@dataclass(frozen=True)
class ClosedPath:
    """Closed polygon in image space; the first vertex is repeated at the end."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3 or not np.all(np.isfinite(v)):
            raise InvalidPathError("vertices must be a finite (N, 3) array")
        if len(v) and not np.array_equal(v[0], v[-1]):
            v = np.vstack([v, v[:1]])
        if len(np.unique(v[:-1], axis=0)) < 3:
            raise InvalidPathError("a closed path needs at least 3 distinct vertices")
        lengths = np.linalg.norm(np.diff(v, axis=0), axis=1)
        if np.any(lengths == 0):
            raise InvalidPathError("consecutive vertices must differ")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)))

    @classmethod
    def named(cls, name: str) -> "ClosedPath":
        if name == "unit-square":
            return cls(np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float))
        if name == "triangle":
            return cls(np.array([[0, 0, 0], [1, 0, 0], [0.5, 1, 0]], dtype=float))
        raise InvalidPathError(f"unknown path {name!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "ClosedPath":
        try:
            return cls(np.asarray(data["vertices"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidPathError):
                raise
            raise InvalidPathError(f"bad path record: {exc}") from None

    def to_dict(self) -> dict:
        return {"vertices": self.vertices[:-1].tolist()}


def path_samples(path: ClosedPath, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Midpoints of ``n`` equal pieces per edge with their unit directions and piece lengths."""
    if n < 2:
        raise InvalidParamsError("need at least 2 samples per edge")
    verts = path.vertices
    starts, ends = verts[:-1], verts[1:]
    seg = ends - starts
    lengths = np.linalg.norm(seg, axis=1)
    frac = (np.arange(n) + 0.5) / n
    points = (starts[:, None, :] + frac[None, :, None] * seg[:, None, :]).reshape(-1, 3)
    dirs = np.repeat(seg / lengths[:, None], n, axis=0)
    return points, dirs, np.repeat(lengths / n, n)


def round_trip_time(chart: CoordinateMap, path: ClosedPath, n: int = 100, c: float = 1.0,
                    source: MapLike | None = None) -> float:
    """Image time for light to run once around ``path``, ``n`` midpoint samples per edge."""
    points, dirs, pieces = path_samples(path, n)
    J = chart_jacobians(chart, points, source)
    if isinstance(chart, NonlinearResync):
        chart.max_gradient(points)
    speeds = local_speeds(J, dirs, c)
    return float(np.sum(pieces / speeds))


def round_trip_speed(chart: CoordinateMap, path: ClosedPath, n: int = 100, c: float = 1.0,
                     source: MapLike | None = None) -> float:
    """Path length divided by the light travel time around it."""
    return path.length / round_trip_time(chart, path, n, c, source)


@dataclass(frozen=True)
class TripReport:
    directions: np.ndarray
    c_plus: np.ndarray
    c_minus: np.ndarray
    c: float

    @property
    def residuals(self) -> np.ndarray:
        return np.abs(1.0 / self.c_plus + 1.0 / self.c_minus - 2.0 / self.c)

    @property
    def round_trip(self) -> np.ndarray:
        """Harmonic mean of the two one-way speeds per direction."""
        return 2.0 / (1.0 / self.c_plus + 1.0 / self.c_minus)

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "rows": [
                {"direction": d.tolist(), "c_plus": float(p), "c_minus": float(m), "residual": float(r)}
                for d, p, m, r in zip(self.directions, self.c_plus, self.c_minus, self.residuals)
            ],
        }


def direction_grid() -> np.ndarray:
    """The 26 unit directions towards the neighbours of a cube cell."""
    dirs = [np.array(v, dtype=float) for v in np.ndindex(3, 3, 3)]
    dirs = [v - 1.0 for v in dirs if not np.array_equal(v, [1.0, 1.0, 1.0])]
    return np.array([v / np.linalg.norm(v) for v in dirs])


def trip_report(chart: CoordinateMap, directions=None, c: float = 1.0, source: MapLike | None = None,
                at=None) -> TripReport:
    dirs = direction_grid() if directions is None else np.atleast_2d(np.asarray(directions, dtype=float))
    dirs = np.array([_unit(d) for d in dirs])
    point = np.zeros(3) if at is None else as_vector(at, "point")
    J = chart_jacobians(chart, np.repeat(point[None, :], len(dirs), axis=0), source)
    return TripReport(dirs, local_speeds(J, dirs, c), local_speeds(J, -dirs, c), float(c))


def two_way_law_check(report, c: float = 1.0) -> float:
    """``|1/c_plus + 1/c_minus - 2/c|``; the maximum over a TripReport."""
    if isinstance(report, TripReport):
        return float(np.max(np.abs(1.0 / report.c_plus + 1.0 / report.c_minus - 2.0 / c)))
    cp, cm = report
    if cp <= 0 or cm <= 0:
        raise InvalidParamsError("speeds must be positive")
    return abs(1.0 / cp + 1.0 / cm - 2.0 / c)


def sine_resync(c: float = 1.0, lam: float = 1.0) -> NonlinearResync:
    """``g(rbar) = sin(xbar1) / (2c)``, with its analytic gradient."""
    def g(r):
        return np.sin(r[..., 0]) / (2 * c)

    def grad(r):
        out = np.zeros_like(r)
        out[..., 0] = np.cos(r[..., 0]) / (2 * c)
        return out

    return NonlinearResync(g=g, lam=lam, c=c, grad=grad)

