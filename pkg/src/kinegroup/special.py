"""One-parameter families of special transformations along a direction.

A special matrix boosts along a unit vector ``u``, scales homothetically
across ``u`` and keeps synchrony on planes orthogonal to ``u``::

    B_u(v) = lam(v) * | I + (a(v) - 1) u u^T     -a(v) v u      |
                      | m a(v) v u^T             a(v) (1 - l v) |

The constants ``m <= 0`` and ``l`` fix the velocity-addition law

    v1 * v2 = (v1 + v2 - l v1 v2) / (1 - m v1 v2)

and the coefficient functions ``a`` and ``lam`` take one of three closed
forms (exponential, power of ``1 - l v``, or the bounded ``c0`` form).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .errors import ConsistencyError, DomainError, InvalidParamsError, KinegroupError
from .spacetime import (
    AffineMap4,
    LinearMap4,
    as_rotation,
    as_vector,
    reciprocal_velocity,
    rotation_embed,
)

__all__ = [
    "Case",
    "SpecialParams",
    "Interval",
    "Coefficients",
    "E1",
    "domain_interval",
    "coefficients",
    "special_matrix",
    "standard_special",
    "inverse_special",
    "inverse_velocity",
    "add_velocity",
    "left_translation",
    "rapidity",
    "rapidity_inverse",
    "conjugate_rotation",
    "reciprocity_check",
    "reciprocity_residual",
    "bogoslovsky",
    "transcribed_standard_form",
    "transcribed_bounded_inverse",
    "transcribed_bogoslovsky",
    "standard_form_mismatches",
]

E1 = np.array([1.0, 0.0, 0.0])
E1.setflags(write=False)

# operations refuse velocities closer than this fraction of the interval width
ENDPOINT_MARGIN = 1e-12
UNIT_TOL = 1e-12


class Case(str, Enum):
    GALILEAN = "galilean"
    EXP = "exp"
    POWER = "power"
    BOUNDED = "bounded"


@dataclass(frozen=True)
class SpecialParams:
    """Classification constants of a special one-parameter family.

    Use the ``galilean``, ``exp``, ``power`` and ``bounded`` constructors.
    The case tag is stored explicitly; ``l`` is derived from ``eta`` in the
    bounded case.
    """

    case: Case
    c0: float = math.inf
    eta: float = 0.0
    l: float = 0.0
    r1: float = 0.0
    r2: float = 0.0
    a1: float = 0.0
    lambda1: float = 0.0

    def __post_init__(self):
        try:
            case = Case(self.case)
        except ValueError:
            raise InvalidParamsError(f"unknown case {self.case!r}") from None
        object.__setattr__(self, "case", case)
        for name in ("c0", "eta", "l", "r1", "r2", "a1", "lambda1"):
            val = float(getattr(self, name))
            if math.isnan(val) or (name != "c0" and math.isinf(val)):
                raise InvalidParamsError(f"{name} must be finite, got {val}")
            object.__setattr__(self, name, val)

        def forbid(*names):
            bad = [n for n in names if getattr(self, n) != 0.0]
            if bad:
                raise InvalidParamsError(f"case {case.value} does not take {', '.join(bad)}")

        if case is Case.BOUNDED:
            if not (0.0 < self.c0 < math.inf):
                raise InvalidParamsError(f"bounded case needs a finite c0 > 0, got {self.c0}")
            forbid("a1", "lambda1")
            object.__setattr__(self, "l", 2.0 * self.eta / self.c0)
        else:
            if self.c0 != math.inf:
                raise InvalidParamsError(f"case {case.value} has m = 0; c0 must be infinite")
            if case is Case.GALILEAN:
                forbid("eta", "l", "r1", "r2", "a1", "lambda1")
            elif case is Case.EXP:
                forbid("eta", "l", "r1", "r2")
            else:
                forbid("eta", "a1", "lambda1")

    @classmethod
    def galilean(cls) -> "SpecialParams":
        return cls(Case.GALILEAN)

    @classmethod
    def exp(cls, a1: float = 0.0, lambda1: float = 0.0) -> "SpecialParams":
        return cls(Case.EXP, a1=a1, lambda1=lambda1)

    @classmethod
    def power(cls, l: float, r1: float = 0.0, r2: float = 0.0) -> "SpecialParams":
        return cls(Case.POWER, l=l, r1=r1, r2=r2)

    @classmethod
    def bounded(cls, c0: float, eta: float = 0.0, r1: float = 0.0, r2: float = 0.0) -> "SpecialParams":
        return cls(Case.BOUNDED, c0=c0, eta=eta, r1=r1, r2=r2)

    @classmethod
    def lorentz(cls, c0: float = 1.0) -> "SpecialParams":
        return cls.bounded(c0)

    @property
    def m(self) -> float:
        return -1.0 / self.c0**2 if self.case is Case.BOUNDED else 0.0

    @property
    def c1(self) -> float:
        """``1/|l|`` in the power case (infinite when ``l = 0``)."""
        return math.inf if self.l == 0.0 else 1.0 / abs(self.l)

    @property
    def p(self) -> float:
        return math.sqrt(1.0 + self.eta**2) + self.eta

    @property
    def pbar(self) -> float:
        return math.sqrt(1.0 + self.eta**2) - self.eta

    def to_dict(self) -> dict:
        d = {"case": self.case.value}
        if self.case is Case.BOUNDED:
            d.update(c0=self.c0, eta=self.eta, r1=self.r1, r2=self.r2)
        elif self.case is Case.POWER:
            d.update(l=self.l, r1=self.r1, r2=self.r2)
        elif self.case is Case.EXP:
            d.update(a1=self.a1, lambda1=self.lambda1)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SpecialParams":
        """Parse the JSON form.

        Accepted keys: ``case``; ``c0`` with ``eta`` or ``l`` (bounded);
        ``l``, or ``c1`` with optional ``sign`` of ``l`` (power); ``r1``,
        ``r2``, ``a1``, ``lambda1``.
        """
        if not isinstance(data, dict) or "case" not in data:
            raise InvalidParamsError('special params need a "case" key')
        known = {"case", "c0", "c1", "eta", "l", "sign", "r1", "r2", "a1", "lambda1"}
        extra = set(data) - known
        if extra:
            raise InvalidParamsError(f"unknown keys: {sorted(extra)}")
        try:
            case = Case(str(data["case"]).lower())
        except ValueError:
            raise InvalidParamsError(f"unknown case {data['case']!r}") from None
        num = {k: float(v) for k, v in data.items() if k not in ("case",) and v is not None}
        if case is Case.BOUNDED:
            if "c0" not in num:
                raise InvalidParamsError("bounded case needs c0")
            eta = num.get("eta")
            if "l" in num:
                eta_from_l = num["l"] * num["c0"] / 2.0
                if eta is not None and not math.isclose(eta, eta_from_l, rel_tol=1e-12, abs_tol=1e-15):
                    raise InvalidParamsError("eta and l disagree")
                eta = eta_from_l
            return cls.bounded(num["c0"], eta or 0.0, num.get("r1", 0.0), num.get("r2", 0.0))
        if case is Case.POWER:
            if "l" in num:
                l = num["l"]
            elif "c1" in num:
                if num["c1"] <= 0:
                    raise InvalidParamsError("c1 must be positive")
                l = math.copysign(1.0, num.get("sign", 1.0)) / num["c1"]
            else:
                raise InvalidParamsError("power case needs l or c1")
            return cls.power(l, num.get("r1", 0.0), num.get("r2", 0.0))
        if case is Case.EXP:
            return cls.exp(num.get("a1", 0.0), num.get("lambda1", 0.0))
        return cls(Case.GALILEAN, **{k: v for k, v in num.items() if k in ("eta", "l", "r1", "r2", "a1", "lambda1")})


@dataclass(frozen=True)
class Interval:
    """Open interval ``]lower, upper[`` with possibly infinite endpoints."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise KinegroupError(f"empty interval ]{self.lower}, {self.upper}[")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def margin(self) -> float:
        """Exclusion band kept free next to each finite endpoint."""
        if math.isfinite(self.width):
            return ENDPOINT_MARGIN * self.width
        finite = [abs(x) for x in (self.lower, self.upper) if math.isfinite(x)]
        return ENDPOINT_MARGIN * max(finite + [1.0])

    def __contains__(self, v: float) -> bool:
        return self.lower + self.margin < v < self.upper - self.margin

    def symmetric_half_width(self) -> float:
        return min(-self.lower, self.upper)

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper}


@dataclass(frozen=True)
class Coefficients:
    a: float
    lam: float
    alpha_hat: float
    b: float

    @property
    def f(self) -> float:
        return self.alpha_hat / self.a

    @property
    def g(self) -> float:
        return self.b / self.a


def domain_interval(P: SpecialParams) -> Interval:
    if P.case is Case.BOUNDED:
        return Interval(-P.c0 * P.p, P.c0 * P.pbar)
    if P.l > 0.0:
        return Interval(-math.inf, 1.0 / P.l)
    if P.l < 0.0:
        return Interval(1.0 / P.l, math.inf)
    return Interval(-math.inf, math.inf)


def _check(P: SpecialParams, v: float) -> float:
    v = float(v)
    I = domain_interval(P)
    if not math.isfinite(v) or v not in I:
        raise DomainError(f"velocity {v!r} outside ]{I.lower}, {I.upper}[ for {P.case.value} case")
    return v


def _bounded_ratio(P: SpecialParams, v: float) -> float:
    beta = v / P.c0
    return (1.0 + P.pbar * beta) / (1.0 - P.p * beta)


def coefficients(P: SpecialParams, v: float) -> Coefficients:
    v = _check(P, v)
    if P.case is Case.BOUNDED:
        beta = v / P.c0
        plus, minus = 1.0 + P.pbar * beta, 1.0 - P.p * beta
        a = plus ** (P.r1 - 0.5) / minus ** (P.r1 + 0.5)
        lam = (plus / minus) ** P.r2
    elif P.case is Case.POWER:
        base = 1.0 - P.l * v
        a, lam = base**P.r1, base**P.r2
    else:
        a, lam = math.exp(P.a1 * v), math.exp(P.lambda1 * v)
    return Coefficients(a=a, lam=lam, alpha_hat=a * (1.0 - P.l * v), b=P.m * a)


def _unit(u) -> np.ndarray:
    u = as_vector(u, "direction")
    if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL:
        raise InvalidParamsError(f"direction must be a unit vector, |u| = {np.linalg.norm(u)!r}")
    return u


def special_matrix(P: SpecialParams, u, v: float) -> LinearMap4:
    u = _unit(u)
    co = coefficients(P, v)
    m = np.empty((4, 4))
    m[:3, :3] = np.eye(3) + (co.a - 1.0) * np.outer(u, u)
    m[:3, 3] = -co.a * v * u
    m[3, :3] = P.m * co.a * v * u
    m[3, 3] = co.alpha_hat
    return LinearMap4(co.lam * m)


def standard_special(P: SpecialParams, v: float) -> AffineMap4:
    """The special transformation along ``e1`` as an affine map with no translation."""
    return AffineMap4(special_matrix(P, E1, v))


def inverse_velocity(P: SpecialParams, v: float) -> float:
    """Group inverse of ``v`` under the addition law of ``P``."""
    v = _check(P, v)
    return -v / (1.0 - P.l * v)


def inverse_special(P: SpecialParams, v: float) -> AffineMap4:
    return standard_special(P, inverse_velocity(P, v))


def add_velocity(P: SpecialParams, v1: float, v2: float) -> float:
    v1, v2 = _check(P, v1), _check(P, v2)
    return (v1 + v2 - P.l * v1 * v2) / (1.0 - P.m * v1 * v2)


def left_translation(P: SpecialParams, v0: float, v: float) -> float:
    """``v0 * v`` evaluated without a domain check on ``v``.

    Used for limits towards (and beyond) the interval endpoints.
    """
    return (v0 + (1.0 - P.l * v0) * v) / (1.0 - P.m * v0 * v)


def rapidity(P: SpecialParams, v: float, r: float = 1.0) -> float:
    """Additive parameter of the one-parameter group.

    ``rapidity(v1 * v2) == rapidity(v1) + rapidity(v2)``.  The normalisation
    is chosen so that for ``r = 1`` the slope at ``v = 0`` is ``1/c0`` in the
    bounded case (``artanh(v/c0)`` when ``eta = 0``), ``l`` in the power case
    and 1 in the Galilean and exponential cases.
    """
    if r == 0:
        raise InvalidParamsError("rapidity scale r must be nonzero")
    v = _check(P, v)
    if P.case is Case.BOUNDED:
        return 0.5 * r * math.log(_bounded_ratio(P, v))
    if P.l != 0.0:
        return -r * math.log1p(-P.l * v)
    return r * v


def rapidity_inverse(P: SpecialParams, s: float, r: float = 1.0) -> float:
    if r == 0:
        raise InvalidParamsError("rapidity scale r must be nonzero")
    x = s / r
    if P.case is Case.BOUNDED:
        q = math.exp(2.0 * x)
        return P.c0 * (q - 1.0) / (P.pbar + q * P.p)
    if P.l != 0.0:
        return -math.expm1(-x) / P.l
    return x


def conjugate_rotation(S, P: SpecialParams, u, v: float, tol: float = 1e-10) -> LinearMap4:
    """Return ``diag(S,1) B_u(v) diag(S,1)^T``, checked against ``B_{Su}(v)``."""
    S = as_rotation(S)
    R = rotation_embed(S)
    out = LinearMap4(R.matrix @ special_matrix(P, u, v).matrix @ R.matrix.T)
    expected = special_matrix(P, S @ _unit(u), v)
    if not out.allclose(expected, tol * max(1.0, np.max(np.abs(expected.matrix)))):
        raise ConsistencyError("rotated special matrix differs from the family member along S u")
    return out


def reciprocity_residual(P: SpecialParams, v: float) -> float:
    """``|W| - |V|`` for ``B_{e1}(v)``, from an explicit matrix inverse."""
    W = reciprocal_velocity(special_matrix(P, E1, v))
    return float(np.linalg.norm(W) - abs(v))


def reciprocity_check(P: SpecialParams, samples: int = 5, tol: float = 1e-10) -> bool:
    """Whether the family obeys ``|W| = |V|``; holds exactly when ``l = 0``.

    The parameter answer is confirmed on sampled velocities and a
    ConsistencyError is raised if the two disagree.
    """
    expected = P.l == 0.0
    I = domain_interval(P)
    span = min(1.0, 0.5 * I.symmetric_half_width())
    vs = [span * x for x in np.linspace(-0.9, 0.9, 2 * samples) if x != 0.0]
    sampled = all(abs(reciprocity_residual(P, v)) <= tol * max(1.0, abs(v)) for v in vs)
    if sampled != expected:
        raise ConsistencyError(f"reciprocity sampling ({sampled}) disagrees with l = {P.l}")
    return expected


def bogoslovsky(s: float, v: float, c0: float) -> AffineMap4:
    """Isotropic-scaling Lorentz boost ``((1+b)/(1-b))^s * Lambda(v e1)``."""
    if not abs(v) < c0:
        raise DomainError(f"|v| = {abs(v)} must be below c0 = {c0}")
    return standard_special(SpecialParams.bounded(c0, 0.0, 0.0, s), v)


def transcribed_standard_form(P: SpecialParams, v: float) -> np.ndarray:
    """Closed-form e1 coordinate equations written out term by term.

    These reproduce the printed equations verbatim, including two misprints
    in the power case (``x'3`` scaled by ``(1 - l v)`` instead of
    ``(1 - l v)^r2``, and ``x1 + v t`` instead of ``x1 - v t``).  They exist
    only to be compared with :func:`standard_special`.
    """
    v = _check(P, v)
    m = np.zeros((4, 4))
    if P.case is Case.BOUNDED:
        beta = v / P.c0
        q = _bounded_ratio(P, v)
        root = math.sqrt(1.0 - 2.0 * P.eta * beta - beta**2)
        s12 = q ** (P.r1 + P.r2) / root
        m[0, 0], m[0, 3] = s12, -s12 * v
        m[1, 1] = m[2, 2] = q**P.r2
        m[3, 0], m[3, 3] = -s12 * v / P.c0**2, s12 * (1.0 - 2.0 * P.eta * beta)
    elif P.case is Case.POWER:
        f = 1.0 - P.l * v
        m[0, 0], m[0, 3] = f ** (P.r1 + P.r2), f ** (P.r1 + P.r2) * v
        m[1, 1] = f**P.r2
        m[2, 2] = f
        m[3, 3] = f ** (1.0 + P.r1 + P.r2)
    else:
        e = math.exp((P.lambda1 + P.a1) * v)
        m[0, 0], m[0, 3] = e, -e * v
        m[1, 1] = m[2, 2] = math.exp(P.lambda1 * v)
        m[3, 3] = e
    return m


def transcribed_bounded_inverse(P: SpecialParams, v: float) -> np.ndarray:
    """Term-by-term inverse of the bounded e1 form (``c`` read as ``c0``)."""
    if P.case is not Case.BOUNDED:
        raise InvalidParamsError("closed-form inverse is given for the bounded case only")
    v = _check(P, v)
    beta = v / P.c0
    q = _bounded_ratio(P, v)
    root = math.sqrt(1.0 - 2.0 * P.eta * beta - beta**2)
    s12 = q ** (-(P.r1 + P.r2)) / root
    m = np.zeros((4, 4))
    m[0, 0], m[0, 3] = s12 * (1.0 - 2.0 * P.eta * beta), s12 * v
    m[1, 1] = m[2, 2] = q ** (-P.r2)
    m[3, 0], m[3, 3] = s12 * v / P.c0**2, s12
    return m


def transcribed_bogoslovsky(s: float, v: float, c0: float) -> np.ndarray:
    if not abs(v) < c0:
        raise DomainError(f"|v| = {abs(v)} must be below c0 = {c0}")
    beta = v / c0
    q = ((1.0 + beta) / (1.0 - beta)) ** s
    g = 1.0 / math.sqrt(1.0 - beta**2)
    m = np.diag([q * g, q, q, q * g])
    m[0, 3] = -q * g * v
    m[3, 0] = -q * g * v / c0**2
    return m


def standard_form_mismatches(P: SpecialParams, v: float, tol: float = 1e-12) -> list[tuple[int, int, float, float]]:
    """Entries where the transcribed closed form disagrees with the generated one.

    Returns ``(row, col, generated, transcribed)`` tuples.
    """
    gen = standard_special(P, v).matrix
    lit = transcribed_standard_form(P, v)
    out = []
    for i, j in zip(*np.nonzero(np.abs(gen - lit) > tol * np.maximum(1.0, np.abs(gen)))):
        out.append((int(i), int(j), float(gen[i, j]), float(lit[i, j])))
    return out


def params_summary(P: SpecialParams) -> dict:
    d = asdict(P)
    d["case"] = P.case.value
    d.update(m=P.m, p=P.p, pbar=P.pbar)
    return d
