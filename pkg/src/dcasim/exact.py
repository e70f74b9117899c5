"""Closed-form initial conditions and reference solutions for the test cases.

case1: constant kernels K = C = 1 with initial profile x*exp(-x).  The weak
       form with test function x forces the mass integral to stay at its
       initial value 2, so the transport velocity int y*f dy is the constant
       2 and the number count obeys N' = -N^2 from N(0) = 1.  Solving along
       characteristics gives (x-2t)*exp(-(x-2t))/(1+t) for x > 2t, extended
       by zero behind the wave.
case2: C = lam * K with K = 1 and the case1 initial profile; closed form only
       at lam = 1 (same as case1).
case3: pure forward aggregation (C = 0, K = 1) started from the uniform
       profile (2/M) on [0, M]; reference 2/(M (1+t)^2) on x <= M (1+t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CASE_IDS = ("case1", "case2", "case3")


@dataclass(frozen=True)
class ExactCase:
    id: str
    M: float = 3.0
    lam: float | None = None

    def __post_init__(self):
        if self.id not in CASE_IDS:
            raise ValueError(f"unknown case {self.id!r}")
        if self.M <= 0:
            raise ValueError("support length M must be positive")
        if self.lam is not None and not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")


def initial_profile(case: ExactCase):
    """Initial number-density profile as a vectorized callable."""
    if case.id in ("case1", "case2"):
        return lambda x: np.asarray(x, dtype=float) * np.exp(-np.asarray(x, dtype=float))
    M = case.M
    def uniform(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0.0) & (x <= M), 2.0 / M, 0.0)
    return uniform


def has_closed_form(case: ExactCase) -> bool:
    if case.id == "case2":
        return case.lam == 1.0
    return True


def exact_solution(case: ExactCase, t: float, x):
    """Reference solution value(s) at time ``t``; ``None`` without closed form.

    case2 with lam < 1 has no closed form.  The case1 wave has travelled a
    distance 2t (the conserved mass integral of x*exp(-x) is 2, and the
    transport velocity equals that mass); extension by zero is used behind
    the wave.
    """
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    if case.id == "case2":
        if case.lam != 1.0:
            return None
        case = ExactCase("case1")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("size must be nonnegative")
    if case.id == "case1":
        u = x - 2.0 * t
        out = np.where(u > 0.0, u * np.exp(-np.clip(u, 0.0, None)) / (1.0 + t), 0.0)
    else:
        scale = 2.0 / (case.M * (1.0 + t) ** 2)
        out = np.where(x / (1.0 + t) <= case.M, scale, 0.0)
    return float(out) if out.ndim == 0 else out


def breakpoints(case: ExactCase, t: float) -> tuple[float, ...]:
    """Locations where the reference solution is non-smooth at time ``t``."""
    if case.id == "case2" and case.lam != 1.0:
        return ()
    if case.id in ("case1", "case2"):
        return (2.0 * t,)
    return (case.M * (1.0 + t),)
