"""Acceptance checks shared by ``kinegroup selftest`` and the test suite.

Each check draws its own random samples from a seeded generator and returns a
:class:`CriterionResult` with the worst measured value next to the threshold.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial.transform import Rotation

from .classic import lorentz_boost, reflection_test
from .errors import KinegroupError
from .isotropy import ClosedPath, direction_grid, one_way_speed, round_trip_speed, sine_resync, trip_report, two_way_law_check
from .reichenbach import (
    ShearK,
    TwoWayParams,
    decompose_two_way,
    ellipsoid_geometry,
    reichenbach_element,
    shear_matrix,
    tangherlini,
    two_way_map,
    ver_residual,
)
from .spacetime import (
    AffineMap4,
    LinearMap4,
    UniformWorldline,
    axiom_predicates,
    compose,
    composed_velocity,
    inverse,
    map_worldline,
    reciprocal_velocity,
    rotation_embed,
    velocity_of,
)
from .special import (
    Case,
    E1,
    SpecialParams,
    add_velocity,
    domain_interval,
    inverse_velocity,
    rapidity_inverse,
    special_matrix,
    transcribed_bounded_inverse,
    transcribed_standard_form,
)

DEFAULT_SEED = 20240607
MAX_CONDITION = 100.0
# wall-clock budgets in seconds; exceeding one fails the criterion
RUNTIME_LIMITS = {1: 5.0, 6: 30.0}

__all__ = ["CriterionResult", "CRITERIA", "run_all", "DEFAULT_SEED"]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] criterion {self.number:>2} {self.name}: {self.detail} ({self.seconds:.2f}s)"

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "seconds": self.seconds,
        }


# ---------------------------------------------------------------- samplers


def _signed(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(rng.choice([-1.0, 1.0]) * rng.uniform(lo, hi))


def random_params(rng: np.random.Generator, case: Case) -> SpecialParams:
    """A random member of ``case`` with every free constant drawn."""
    if case is Case.GALILEAN:
        return SpecialParams.galilean()
    if case is Case.EXP:
        return SpecialParams.exp(rng.uniform(-1, 1), rng.uniform(-1, 1))
    if case is Case.POWER:
        return SpecialParams.power(_signed(rng, 0.2, 2.0), rng.uniform(-1, 1), rng.uniform(-1, 1))
    return SpecialParams.bounded(rng.uniform(0.5, 2.0), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))


def random_velocity(rng: np.random.Generator, P: SpecialParams, spread: float = 0.6) -> float:
    """Velocity with additive parameter uniform in ``[-spread, spread]`` (scaled units)."""
    s = rng.uniform(-spread, spread)
    if P.case is Case.BOUNDED or P.l != 0.0:
        return rapidity_inverse(P, s)
    return s


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    return Rotation.random(random_state=rng).as_matrix()


def random_ball(rng: np.random.Generator, radius: float) -> np.ndarray:
    x = rng.normal(size=3)
    return x / np.linalg.norm(x) * radius * rng.uniform() ** (1.0 / 3.0)


def random_lorentz(rng: np.random.Generator, c: float, speed: float = 0.9) -> LinearMap4:
    return rotation_embed(random_rotation(rng)) @ lorentz_boost(random_ball(rng, speed * c), c)


def random_path(rng: np.random.Generator, scale: float = 1.0) -> ClosedPath:
    n = int(rng.integers(3, 7))
    return ClosedPath(rng.uniform(-scale, scale, size=(n, 3)))


def _max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a)))


# ---------------------------------------------------------------- criteria


def closure(rng: np.random.Generator, draws: int = 1000) -> tuple[bool, str]:
    worst = 0.0
    for case in Case:
        for _ in range(draws):
            P = random_params(rng, case)
            v1, v2 = random_velocity(rng, P), random_velocity(rng, P)
            B1, B2 = special_matrix(P, E1, v1), special_matrix(P, E1, v2)
            prod = special_matrix(P, E1, add_velocity(P, v1, v2))
            inv = special_matrix(P, E1, inverse_velocity(P, v1))
            worst = max(worst, _max_norm((B1 @ B2).matrix - prod.matrix), _max_norm(B1.inverse().matrix - inv.matrix))
    return worst < 1e-10, f"max residual {worst:.3g} < 1e-10 over {draws} draws per case"


def velocity_oracle(rng: np.random.Generator, draws: int = 1000) -> tuple[bool, str]:
    worst = 0.0
    for case in Case:
        for _ in range(draws):
            P = random_params(rng, case)
            v1, v2 = random_velocity(rng, P), random_velocity(rng, P)
            V = velocity_of(special_matrix(P, E1, v1) @ special_matrix(P, E1, v2))
            worst = max(worst, _max_norm(V - add_velocity(P, v1, v2) * E1))
    return worst < 1e-10, f"max |add_velocity - matrix velocity| {worst:.3g} < 1e-10"


def reflection_criterion(rng: np.random.Generator, points: int = 100) -> tuple[bool, str]:
    isotropic = [
        SpecialParams.galilean(),
        SpecialParams.exp(0.0, 0.0),
        SpecialParams.power(0.0, rng.uniform(-1, 1), rng.uniform(-1, 1)),
    ] + [SpecialParams.lorentz(rng.uniform(0.5, 2.0)) for _ in range(5)]
    iso_worst = 0.0
    for P in isotropic:
        h = min(1.0, domain_interval(P).symmetric_half_width())
        for v in np.linspace(-0.9, 0.9, 7) * h:
            iso_worst = max(iso_worst, reflection_test(P, v))
    aniso_best = math.inf
    for _ in range(points):
        case = [Case.EXP, Case.POWER, Case.BOUNDED][int(rng.integers(3))]
        names = {Case.EXP: ("a1", "lambda1"), Case.POWER: ("l",), Case.BOUNDED: ("eta", "r1", "r2")}[case]
        chosen = [n for n in names if rng.uniform() < 0.5] or [names[int(rng.integers(len(names)))]]
        vals = {n: (_signed(rng, 0.05, 1.0) if n in chosen else 0.0) for n in names}
        if case is Case.EXP:
            P = SpecialParams.exp(vals["a1"], vals["lambda1"])
        elif case is Case.POWER:
            P = SpecialParams.power(vals["l"], rng.uniform(-1, 1), rng.uniform(-1, 1))
        else:
            P = SpecialParams.bounded(rng.uniform(0.5, 2.0), vals["eta"], vals["r1"], vals["r2"])
        aniso_best = min(aniso_best, reflection_test(P))
    ok = iso_worst < 1e-12 and aniso_best > 1e-6
    return ok, f"isotropic max {iso_worst:.3g} < 1e-12; anisotropic min {aniso_best:.3g} > 1e-6"


def ast_inverse(rng: np.random.Generator, draws: int = 200) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(draws):
        P = random_params(rng, Case.BOUNDED)
        v = random_velocity(rng, P)
        prod = transcribed_bounded_inverse(P, v) @ transcribed_standard_form(P, v)
        worst = max(worst, _max_norm(prod - np.eye(4)))
    return worst < 1e-12, f"max entrywise residual {worst:.3g} < 1e-12 over {draws} draws"


def reciprocity(rng: np.random.Generator, draws: int = 500) -> tuple[bool, str]:
    makers: list[Callable[[], SpecialParams]] = [
        SpecialParams.galilean,
        lambda: SpecialParams.exp(rng.uniform(-1, 1), rng.uniform(-1, 1)),
        lambda: SpecialParams.power(0.0, rng.uniform(-1, 1), rng.uniform(-1, 1)),
        lambda: SpecialParams.power(_signed(rng, 0.2, 2.0), rng.uniform(-1, 1), rng.uniform(-1, 1)),
        lambda: SpecialParams.bounded(rng.uniform(0.5, 2.0), 0.0, rng.uniform(-1, 1), rng.uniform(-1, 1)),
        lambda: SpecialParams.bounded(rng.uniform(0.5, 2.0), _signed(rng, 0.05, 1.0), rng.uniform(-1, 1), rng.uniform(-1, 1)),
    ]
    mismatches = 0
    for i in range(draws):
        P = makers[i % len(makers)]()
        h = min(1.0, domain_interval(P).symmetric_half_width())
        v = _signed(rng, 0.1, 0.9) * h
        W = reciprocal_velocity(special_matrix(P, E1, v))
        reciprocal = abs(np.linalg.norm(W) - abs(v)) <= 1e-10
        if reciprocal != (P.l == 0.0):
            mismatches += 1
    return mismatches == 0, f"{mismatches} of {draws} draws disagree with the l = 0 rule"


def two_way_isotropy(rng: np.random.Generator, maps: int = 10, paths: int = 10) -> tuple[bool, str]:
    affine_worst = 0.0
    for i in range(maps):
        c = rng.uniform(0.5, 2.0)
        P = TwoWayParams(
            lam=rng.uniform(0.5, 2.0),
            k1=random_ball(rng, 0.95 / c),
            k2=random_ball(rng, 0.95 / c),
            V=random_ball(rng, 0.95 * c),
            S=random_rotation(rng),
            c=c,
            b=rng.normal(size=4),
        )
        sh = ShearK(random_ball(rng, 0.95 / c), 1.0, c)
        cases = [
            (two_way_map(P), shear_matrix(ShearK(P.k1, 1.0, c))),
            (tangherlini(rng.uniform(-0.95, 0.95) * c, rng.uniform(0.5, 2.0), c), None),
            (reichenbach_element(sh, random_lorentz(rng, c)), shear_matrix(sh)),
        ]
        for _ in range(paths):
            path = random_path(rng)
            for F, source in cases:
                affine_worst = max(affine_worst, abs(round_trip_speed(F, path, 2, c, source) - c) / c)
    g = sine_resync(1.0)
    nonlinear = max(
        abs(round_trip_speed(g, ClosedPath.named(name), 10_000, 1.0) - 1.0) for name in ("unit-square", "triangle")
    )
    control = 0.0
    while control == 0.0:
        F = AffineMap4(LinearMap4(np.eye(4) + 0.3 * rng.normal(size=(4, 4))))
        try:
            control = max(abs(round_trip_speed(F, random_path(rng), 2, 1.0) - 1.0) for _ in range(paths))
        except KinegroupError:
            control = 0.0
    ok = affine_worst < 1e-10 and nonlinear < 1e-6 and control > 1e-3
    return ok, (
        f"affine max rel. deviation {affine_worst:.3g} < 1e-10; nonlinear {nonlinear:.3g} < 1e-6; "
        f"control {control:.3g} > 1e-3"
    )


def two_way_law(rng: np.random.Generator, shears: int = 20) -> tuple[bool, str]:
    worst = 0.0
    dirs = direction_grid()
    for _ in range(shears):
        c = rng.uniform(0.5, 2.0)
        sh = ShearK(random_ball(rng, 0.99 / c), rng.uniform(0.5, 2.0), c)
        worst = max(worst, two_way_law_check(trip_report(shear_matrix(sh), dirs, c), c))
    sh = ShearK(np.array([0.5, 0.0, 0.0]), 1.0, 1.0)
    cp, cm = one_way_speed(shear_matrix(sh), E1, 1.0)
    interval = ellipsoid_geometry(sh).interval
    speed_err = max(abs(cp - 2.0 / 3.0), abs(cm - 2.0))
    ellipsoid_err = max(abs(cp - interval.upper), abs(cm + interval.lower))
    ok = worst < 1e-10 and speed_err < 1e-10 and ellipsoid_err < 1e-10
    return ok, (
        f"law residual {worst:.3g} < 1e-10 on {len(dirs)} directions; (c+, c-) = ({cp:.12g}, {cm:.12g}); "
        f"ellipsoid mismatch {ellipsoid_err:.3g}"
    )


def reichenbach_groups(rng: np.random.Generator, products: int = 20) -> tuple[bool, str]:
    fixed_worst = 0.0
    for _ in range(products):
        sh = ShearK(random_ball(rng, 0.9), 1.0, 1.0)
        B = reichenbach_element(sh, random_lorentz(rng, 1.0)) @ reichenbach_element(sh, random_lorentz(rng, 1.0))
        fixed_worst = max(fixed_worst, decompose_two_way(B, 1.0).residual)
    mixed_best = math.inf
    made = 0
    while made < products:
        k, kp = random_ball(rng, 0.9), random_ball(rng, 0.9)
        if np.linalg.norm(k - kp) < 0.3:
            continue
        B = reichenbach_element(ShearK(k), random_lorentz(rng, 1.0)) @ reichenbach_element(ShearK(kp), random_lorentz(rng, 1.0))
        mixed_best = min(mixed_best, decompose_two_way(B, 1.0).residual)
        made += 1
    T = tangherlini(0.5, 1.0, 1.0)
    double = decompose_two_way(compose(T, T), 1.0, fixed_k1=np.zeros(3)).residual
    ok = fixed_worst < 1e-7 and mixed_best > 1e-4 and double > 1e-4
    return ok, (
        f"fixed-k max residual {fixed_worst:.3g} < 1e-7; mixed-k min {mixed_best:.3g} > 1e-4; "
        f"double Tangherlini {double:.3g} > 1e-4"
    )


def ellipsoid(rng: np.random.Generator, samples: int = 500) -> tuple[bool, str]:
    sh = ShearK(np.array([0.5, 0.0, 0.0]), 1.0, 1.0)
    geo = ellipsoid_geometry(sh)
    expected = {
        "major": (geo.major, 4.0 / 3.0),
        "transverse": (geo.transverse, 2.0 / math.sqrt(3.0)),
        "centre": (geo.centre, np.array([-1.0 / 3.0, 0.0, 0.0])),
        "interval": (np.array([geo.interval.lower, geo.interval.upper]), np.array([-2.0, 2.0 / 3.0])),
    }
    failed = [name for name, (got, want) in expected.items() if _max_norm(np.asarray(got) - want) >= 1e-12]
    pts = geo.boundary_points(np.arccos(rng.uniform(-1, 1, samples)), rng.uniform(0, 2 * np.pi, samples))
    ver = _max_norm(ver_residual(sh, pts))
    ok = not failed and ver < 1e-10
    got = f"centre {geo.centre[0]:.12g}, major {geo.major:.12g}, transverse {geo.transverse:.12g}"
    return ok, f"{got}; mismatched: {', '.join(failed) or 'none'}; boundary residual {ver:.3g} < 1e-10"


def worldlines(rng: np.random.Generator, draws: int = 1000) -> tuple[bool, str]:
    worst_line = worst_vel = 0.0
    done = 0
    while done < draws:
        m = np.eye(4) + 0.4 * rng.normal(size=(4, 4))
        # admissible, well-conditioned coordinate changes only
        if np.linalg.cond(m) > MAX_CONDITION or not axiom_predicates(m).all:
            continue
        F = AffineMap4(LinearMap4(m), rng.normal(size=4))
        w = UniformWorldline(rng.normal(size=4), rng.uniform(-0.5, 0.5, size=3))
        try:
            img = map_worldline(F, w)
            predicted = composed_velocity(w.velocity, inverse(F))
        except KinegroupError:
            continue
        done += 1
        events = np.array([F.apply(e) for e in w.events(rng.normal(size=5))])
        on_line = img.events(events[:, 3])
        scale = max(1.0, _max_norm(events))
        worst_line = max(worst_line, _max_norm(on_line - events) / scale)
        worst_vel = max(worst_vel, _max_norm(img.velocity - predicted) / max(1.0, _max_norm(predicted)))
    ok = worst_line < 1e-12 and worst_vel < 1e-12
    return ok, f"off-line {worst_line:.3g} < 1e-12; velocity mismatch {worst_vel:.3g} < 1e-12 over {draws} maps"


CRITERIA: list[tuple[int, str, Callable[[np.random.Generator], tuple[bool, str]]]] = [
    (1, "classification closure", closure),
    (2, "velocity-addition oracle", velocity_oracle),
    (3, "reflection criterion", reflection_criterion),
    (4, "bounded form inverse", ast_inverse),
    (5, "reciprocity", reciprocity),
    (6, "two-way isotropy", two_way_isotropy),
    (7, "one-way speed law", two_way_law),
    (8, "Reichenbach group vs non-group", reichenbach_groups),
    (9, "ellipsoid geometry", ellipsoid),
    (10, "worldline affinity", worldlines),
]


def run_criterion(number: int, seed: int = DEFAULT_SEED) -> CriterionResult:
    for num, name, fn in CRITERIA:
        if num == number:
            rng = np.random.default_rng([seed, num])
            start = time.perf_counter()
            try:
                ok, detail = fn(rng)
            except KinegroupError as exc:
                ok, detail = False, f"raised {type(exc).__name__}: {exc}"
            elapsed = time.perf_counter() - start
            limit = RUNTIME_LIMITS.get(num)
            if limit is not None:
                ok = ok and elapsed < limit
                detail = f"{detail}; runtime {elapsed:.2f}s < {limit:g}s"
            return CriterionResult(num, name, bool(ok), detail, elapsed)
    raise KeyError(f"no criterion {number}")


def run_all(seed: int = DEFAULT_SEED) -> list[CriterionResult]:
    return [run_criterion(num, seed) for num, _, _ in CRITERIA]
