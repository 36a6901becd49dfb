"""Scalar objective terms f_n and their derivative machinery.

Every term exposes ``h(x) = -f'(x)`` with limit semantics at the ends of
its domain (so ``h`` may return ``+inf`` or ``0`` at a bound), and, where
one exists, the closed-form inverse ``h^{-1}``.  The four catalog kinds are
strictly convex and strictly decreasing on their whole domain; ``Custom``
wraps user callables and ``Negated`` implements ``y -> f(-y)`` for the
sign-flip transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Optional

import numpy as np

from .errors import DomainError, InvalidProblem

INF = math.inf

# Probe distance used for infinite bounds of Custom terms without
# caller-supplied end slopes.
INFINITE_PROBE = 1e6


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return INF


def _div(a: float, b: float) -> float:
    if b == 0.0:
        return INF if a > 0 else (-INF if a < 0 else math.nan)
    return a / b


class ObjectiveTerm:
    """Base class; subclasses are frozen dataclasses."""

    kind: ClassVar[str] = "abstract"
    # "decreasing" / "increasing" when the sign of f' is known analytically.
    monotone: ClassVar[Optional[str]] = None
    # Closed-form family id used by the kernel; None if x(s) is not affine in
    # a shared transform of s.
    family: ClassVar[Optional[str]] = None

    @property
    def domain(self) -> tuple[float, float]:
        return (-INF, INF)

    @property
    def param(self) -> float:
        return math.nan

    def value(self, x):
        raise NotImplementedError

    def slope(self, x: float) -> float:
        """f'(x)."""
        raise NotImplementedError

    def h(self, x: float) -> float:
        return -self.slope(x)

    def h_limit(self, x: float, side: int) -> float:
        """Limit of h at ``x`` approached from the right (side=+1) or left (-1)."""
        return self.h(x)

    def h_inverse(self, s: float) -> Optional[float]:
        return None

    def affine_coefficients(self) -> Optional[tuple[float, float]]:
        """(A, B) such that h^{-1}(s) = A + B * phi_family(s)."""
        return None

    def validate_box(self, lower: float, upper: float) -> None:
        lo, hi = self.domain
        if lower < lo or upper > hi:
            raise InvalidProblem(
                f"{self.kind}: box [{lower}, {upper}] leaves the domain [{lo}, {hi}]")

    def to_dict(self) -> dict:
        raise DomainError(f"{self.kind} terms cannot be serialized")


@dataclass(frozen=True)
class ScaledExp(ObjectiveTerm):
    """f(x) = w * exp(-x)."""

    w: float
    kind: ClassVar[str] = "ScaledExp"
    monotone: ClassVar[Optional[str]] = "decreasing"
    family: ClassVar[Optional[str]] = "log"

    def __post_init__(self):
        if not (self.w > 0 and math.isfinite(self.w)):
            raise InvalidProblem(f"ScaledExp weight must be positive, got {self.w}")

    @property
    def param(self):
        return self.w

    def value(self, x):
        with np.errstate(over="ignore"):
            return self.w * np.exp(-np.asarray(x, dtype=float))

    def slope(self, x):
        return -self.w * _exp(-x)

    def h(self, x):
        return self.w * _exp(-x)

    def h_inverse(self, s):
        if s <= 0:
            return INF
        return math.log(self.w) - math.log(s)

    @staticmethod
    def h_inverse_array(p, s):
        return np.log(p) - math.log(s)

    def affine_coefficients(self):
        return (math.log(self.w), 1.0)

    def to_dict(self):
        return {"kind": self.kind, "params": {"w": self.w}}


@dataclass(frozen=True)
class NegLogCapacity(ObjectiveTerm):
    """f(x) = -log(1 + gain * x); the per-channel capacity term."""

    gain: float
    kind: ClassVar[str] = "NegLogCapacity"
    monotone: ClassVar[Optional[str]] = "decreasing"
    family: ClassVar[Optional[str]] = "reciprocal"

    def __post_init__(self):
        if not (self.gain > 0 and math.isfinite(self.gain)):
            raise InvalidProblem(f"NegLogCapacity gain must be positive, got {self.gain}")

    @property
    def param(self):
        return self.gain

    @property
    def domain(self):
        return (-1.0 / self.gain, INF)

    def value(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return -np.log1p(self.gain * np.asarray(x, dtype=float))

    def slope(self, x):
        return -self.h(x)

    def h(self, x):
        d = 1.0 + self.gain * x
        if d <= 0:
            return INF
        return self.gain / d

    def h_inverse(self, s):
        if s <= 0:
            return INF
        return 1.0 / s - 1.0 / self.gain

    @staticmethod
    def h_inverse_array(p, s):
        return 1.0 / s - 1.0 / p

    def affine_coefficients(self):
        return (-1.0 / self.gain, 1.0)

    def to_dict(self):
        return {"kind": self.kind, "params": {"gain": self.gain}}


@dataclass(frozen=True)
class InverseLinear(ObjectiveTerm):
    """f(x) = weight / x on x > 0 (MSE-type cost)."""

    weight: float
    kind: ClassVar[str] = "InverseLinear"
    monotone: ClassVar[Optional[str]] = "decreasing"
    family: ClassVar[Optional[str]] = "rsqrt"

    def __post_init__(self):
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise InvalidProblem(f"InverseLinear weight must be positive, got {self.weight}")

    @property
    def param(self):
        return self.weight

    @property
    def domain(self):
        return (0.0, INF)

    def value(self, x):
        with np.errstate(divide="ignore"):
            return self.weight / np.asarray(x, dtype=float)

    def slope(self, x):
        return -self.h(x)

    def h(self, x):
        return _div(self.weight, x * x)

    def h_inverse(self, s):
        if s <= 0:
            return INF
        return math.sqrt(self.weight / s)

    @staticmethod
    def h_inverse_array(p, s):
        return np.sqrt(p / s)

    def affine_coefficients(self):
        return (0.0, math.sqrt(self.weight))

    def to_dict(self):
        return {"kind": self.kind, "params": {"weight": self.weight}}


@dataclass(frozen=True)
class LogInvSnr(ObjectiveTerm):
    """f(x) = log(1 + 1/(x * gain)) on x > 0 (per-hop SNR loss)."""

    gain: float
    kind: ClassVar[str] = "LogInvSnr"
    monotone: ClassVar[Optional[str]] = "decreasing"

    def __post_init__(self):
        if not (self.gain > 0 and math.isfinite(self.gain)):
            raise InvalidProblem(f"LogInvSnr gain must be positive, got {self.gain}")

    @property
    def param(self):
        return self.gain

    @property
    def domain(self):
        return (0.0, INF)

    def value(self, x):
        with np.errstate(divide="ignore"):
            return np.log1p(1.0 / (self.gain * np.asarray(x, dtype=float)))

    def slope(self, x):
        return -self.h(x)

    def h(self, x):
        return _div(1.0, x * (1.0 + self.gain * x))

    def h_inverse(self, s):
        if s <= 0:
            return INF
        # (sqrt(1 + 4g/s) - 1) / (2g), rationalized to avoid cancellation
        return 2.0 / (s * (1.0 + math.sqrt(1.0 + 4.0 * self.gain / s)))

    @staticmethod
    def h_inverse_array(p, s):
        return 2.0 / (s * (1.0 + np.sqrt(1.0 + 4.0 * p / s)))

    def to_dict(self):
        return {"kind": self.kind, "params": {"gain": self.gain}}


@dataclass(frozen=True)
class Custom(ObjectiveTerm):
    """User-supplied strictly convex term.

    ``derivative`` is required; ``inverse_neg_derivative`` (the inverse of
    ``-derivative``) is optional and replaces bisection when given.
    ``end_slopes`` optionally gives the limits of f' at -inf and +inf; when
    absent those limits are probed at a large finite distance.
    """

    value_fn: Callable[[float], float]
    derivative: Optional[Callable[[float], float]]
    inverse_neg_derivative: Optional[Callable[[float], float]] = None
    lo: float = -INF
    hi: float = INF
    end_slopes: tuple = (None, None)
    name: str = field(default="custom", compare=False)
    kind: ClassVar[str] = "Custom"

    @property
    def domain(self):
        return (self.lo, self.hi)

    def value(self, x):
        if np.ndim(x) == 0:
            return self.value_fn(float(x))
        try:
            out = np.asarray(self.value_fn(np.asarray(x, dtype=float)), dtype=float)
            if out.shape == np.shape(x):
                return out
        except (TypeError, ValueError):
            pass
        return np.vectorize(lambda t: float(self.value_fn(t)), otypes=[float])(x)

    def slope(self, x):
        if self.derivative is None:
            raise DomainError(f"{self.name}: no derivative supplied")
        return float(self.derivative(x))

    def h_limit(self, x, side):
        if math.isinf(x):
            idx = 0 if x < 0 else 1
            if self.end_slopes[idx] is not None:
                return -float(self.end_slopes[idx])
            return -self.slope(math.copysign(INFINITE_PROBE, x))
        try:
            v = -self.slope(x)
        except (ArithmeticError, ValueError):
            v = math.nan
        if math.isfinite(v):
            return v
        return -self.slope(x + side * 1e-8 * max(1.0, abs(x)))

    def h_inverse(self, s):
        if self.inverse_neg_derivative is None:
            return None
        return float(self.inverse_neg_derivative(s))


@dataclass(frozen=True)
class Negated(ObjectiveTerm):
    """g(y) = f(-y); the image of a term under the sign-flip transform."""

    inner: ObjectiveTerm
    kind: ClassVar[str] = "Negated"

    @property
    def monotone(self):
        return {"decreasing": "increasing", "increasing": "decreasing"}.get(
            self.inner.monotone)

    @property
    def domain(self):
        lo, hi = self.inner.domain
        return (-hi, -lo)

    def value(self, x):
        return self.inner.value(-np.asarray(x, dtype=float) if np.ndim(x) else -x)

    def slope(self, x):
        return -self.inner.slope(-x)

    def h(self, x):
        return -self.inner.h(-x)

    def h_limit(self, x, side):
        return -self.inner.h_limit(-x, -side)


def negate(term: ObjectiveTerm) -> ObjectiveTerm:
    """Return the term y -> f(-y); an involution on term objects."""
    if isinstance(term, Negated):
        return term.inner
    if isinstance(term, Custom) and term.derivative is None:
        raise DomainError(f"{term.name}: cannot flip a term without a derivative")
    return Negated(term)


CATALOG = {cls.kind: cls for cls in (ScaledExp, NegLogCapacity, InverseLinear, LogInvSnr)}

PARAM_NAMES = {"ScaledExp": "w", "NegLogCapacity": "gain",
               "InverseLinear": "weight", "LogInvSnr": "gain"}


def term_from_dict(data: dict) -> ObjectiveTerm:
    kind = data["kind"]
    if kind not in CATALOG:
        raise InvalidProblem(f"unknown term kind {kind!r}; expected one of {sorted(CATALOG)}")
    params = data.get("params", {})
    name = PARAM_NAMES[kind]
    if name not in params:
        raise InvalidProblem(f"{kind} requires parameter {name!r}")
    return CATALOG[kind](float(params[name]))
