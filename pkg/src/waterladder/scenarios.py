"""Constructors for the power-allocation problem families.

Each returns a plain ``Problem``; solving it with ``solve`` yields the
familiar closed-form shapes:

* capacity_waterfilling: x_n = min{max{1/sigma - 1/lambda_n, 0}, u_n}
  (cave-filling; classical water-filling when u = inf).
* inverse_mse_allocation: x_n = min{max{sqrt(lambda_n / sigma_n), 0}, 1}.
* exp_power_min: x_n = min{ln lambda_n - ln sigma_n, 0}.
* af_multihop_snr: x_n = min{(sqrt(1 + 4 lambda_n / sigma) - 1) / (2 lambda_n), u_n}.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import InvalidProblem, NonPositiveGain, NonPositivePower
from .model import Problem, Sense
from .terms import InverseLinear, LogInvSnr, NegLogCapacity, ScaledExp

INF = math.inf


def _gains(lam: Sequence[float]) -> list[float]:
    lam = [float(v) for v in lam]
    if not lam:
        raise InvalidProblem("at least one channel is required")
    bad = [k + 1 for k, v in enumerate(lam) if not (v > 0 and math.isfinite(v))]
    if bad:
        raise NonPositiveGain(f"gains must be positive and finite; offending indices {bad}")
    return lam


def _power(P: float) -> float:
    P = float(P)
    if not (P > 0 and math.isfinite(P)):
        raise NonPositivePower(f"total power must be positive, got {P}")
    return P


def _caps(u, n: int) -> list[float]:
    if u is None:
        return [INF] * n
    u = [float(v) for v in u]
    if len(u) != n:
        raise InvalidProblem(f"expected {n} caps, got {len(u)}")
    return u


def capacity_waterfilling(lam: Sequence[float], u=None, P: float = 1.0) -> Problem:
    """Maximize sum log(1 + lambda_n x_n) under a total power budget P and
    per-channel caps u_n (u=None means uncapped)."""
    lam = _gains(lam)
    n = len(lam)
    return Problem(tuple(NegLogCapacity(v) for v in lam), [0.0] * n, _caps(u, n),
                   {n: _power(P)}, Sense.LE)


def inverse_mse_allocation(lam: Sequence[float], rho: Sequence[float]) -> Problem:
    """Minimize sum lambda_n / x_n over 0 <= x_n <= 1 with every prefix
    constrained: sum_{n<=j} x_n <= rho_j."""
    lam = _gains(lam)
    n = len(lam)
    rho = [float(r) for r in rho]
    if len(rho) != n:
        raise InvalidProblem(f"expected {n} right-hand sides, got {len(rho)}")
    if any(not r > 0 for r in rho):
        raise InvalidProblem("right-hand sides must be positive (x > 0 on the objective domain)")
    return Problem(tuple(InverseLinear(v) for v in lam), [0.0] * n, [1.0] * n,
                   {j + 1: r for j, r in enumerate(rho)}, Sense.LE)


def exp_power_min(lam: Sequence[float], rho: Sequence[float]) -> Problem:
    """Minimize sum lambda_n exp(-x_n) over x_n <= 0 with every prefix
    constrained."""
    lam = _gains(lam)
    n = len(lam)
    rho = [float(r) for r in rho]
    if len(rho) != n:
        raise InvalidProblem(f"expected {n} right-hand sides, got {len(rho)}")
    return Problem(tuple(ScaledExp(v) for v in lam), [-INF] * n, [0.0] * n,
                   {j + 1: r for j, r in enumerate(rho)}, Sense.LE)


def af_multihop_snr(lam: Sequence[float], u=None, P: float = 1.0) -> Problem:
    """Maximize the end-to-end SNR of an amplify-and-forward chain, written
    as minimizing sum log(1 + 1/(lambda_n x_n)) under a power budget P."""
    lam = _gains(lam)
    n = len(lam)
    return Problem(tuple(LogInvSnr(v) for v in lam), [0.0] * n, _caps(u, n),
                   {n: _power(P)}, Sense.LE)


def water_level(sigma: float) -> float:
    """eta = 1/sigma; infinite when the multiplier is zero."""
    return INF if sigma == 0 else 1.0 / sigma
