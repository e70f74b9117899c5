"""Error measurement, convergence-order estimation, moment diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .exact import ExactCase, breakpoints, exact_solution, has_closed_form
from .kernels import KernelSpec
from .state import MomentSeries, StepFunction

_ROOT_TOL = 1e-10


@dataclass(frozen=True)
class ErrorReport:
    epsilon: float
    t: float
    E1: float
    numerator: float
    denominator: float


@dataclass
class ConvergenceTable:
    """(epsilon, relative L1 error) rows at a fixed comparison time."""

    t: float
    rows: list = field(default_factory=list)  # (epsilon, E1) pairs

    def add(self, report: ErrorReport):
        self.rows.append((report.epsilon, report.E1))


@dataclass
class MomentBoundReport:
    number_nonincreasing: bool
    mass_conserved: bool
    riccati_bound: np.ndarray | None
    riccati_checked_mask: np.ndarray | None
    gelation_envelope: np.ndarray | None
    violations: list


def _simpson(f, a: float, b: float, panels: int) -> float:
    xs = np.linspace(a, b, panels + 1)
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return (b - a) / (3.0 * panels) * float(w @ f(xs))


def _split_points(f, a: float, b: float, probes: int = 8) -> list[float]:
    """Roots of f inside (a, b), located by bisection between sampled nodes."""
    xs = np.linspace(a, b, probes + 1)
    vals = np.array([f(x) for x in xs])
    roots = []
    for lo, hi, vlo, vhi in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
        if vlo == 0.0 or vlo * vhi >= 0.0:
            continue
        roots.append(float(brentq(f, lo, hi, xtol=_ROOT_TOL)))
    return roots


def _abs_integral(f_exact, value: float, a: float, b: float,
                  hard_breaks: tuple[float, ...], panels: int) -> float:
    """Integral of |f_exact - value| over [a, b].

    The interval is split at reference-solution breakpoints and at sign
    changes of the difference, so each Simpson panel integrates a smooth,
    single-signed integrand and the absolute value can be taken outside.
    """
    diff = lambda x: f_exact(x) - value
    cuts = [a, b]
    cuts += [p for p in hard_breaks if a < p < b]
    cuts = sorted(cuts)
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        pieces = [lo] + _split_points(diff, lo, hi) + [hi]
        for p, q in zip(pieces[:-1], pieces[1:]):
            if q > p:
                total += abs(_simpson(np.vectorize(diff, otypes=[float]), p, q, panels))
    return total


def rel_l1_error(sf: StepFunction, case: ExactCase, t: float,
                 panels: int = 8) -> ErrorReport:
    """Relative L1 distance between a step function and the reference solution.

    Both norms are taken over [0, x_max]; the step function is zero on the
    dust region and beyond the last cell, and those stretches contribute to
    the numerator.
    """
    if not has_closed_form(case):
        raise ValueError(f"{case.id} with lambda={case.lam} has no closed form")
    grid = sf.grid
    f_ex_vec = lambda xs: exact_solution(case, t, xs)
    f_ex = lambda x: float(exact_solution(case, t, float(x)))
    hard = breakpoints(case, t)

    segments = [(0.0, grid.lower, 0.0)]
    left = grid.left_edges()
    right = grid.right_edges()
    segments += [(float(a), float(b), float(v)) for a, b, v in zip(left, right, sf.values)]
    if grid.x_max > grid.upper:
        segments.append((grid.upper, grid.x_max, 0.0))

    numerator = 0.0
    denominator = 0.0
    for a, b, v in segments:
        numerator += _abs_integral(f_ex, v, a, b, hard, panels)
        cuts = sorted([a, b] + [p for p in hard if a < p < b])
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            denominator += _simpson(f_ex_vec, lo, hi, panels)
    if denominator <= 0.0:
        raise ValueError(f"reference solution has no mass on [0, {grid.x_max}] at t={t}")
    return ErrorReport(epsilon=grid.epsilon, t=t, E1=numerator / denominator,
                       numerator=numerator, denominator=denominator)


def estimate_order(table: ConvergenceTable) -> float:
    """Least-squares slope of log(error) against log(epsilon)."""
    rows = [(e, err) for e, err in table.rows if err > 0.0]
    if len(rows) < 2:
        raise ValueError("need at least 2 rows with positive error")
    eps = np.log([r[0] for r in rows])
    err = np.log([r[1] for r in rows])
    return float(np.polyfit(eps, err, 1)[0])


def moment_diagnostics(series: MomentSeries, spec: KernelSpec, epsilon: float,
                       rtol: float = 1e-6) -> MomentBoundReport:
    """Check the moment identities and declared growth bounds along a run.

    Checks: monotone decay of the particle count M0; constancy of the interior
    mass M1 up to the integrated boundary defect; the second-moment Riccati
    bound when product-growth constants A1/A2 are declared; and the mass-decay
    envelope when the product lower bound K1 is declared.  The envelope is a
    diagnostic only: it concerns the untruncated system, whose mass loss shows
    up here as boundary-defect activation instead.
    """
    if not series.times:
        raise ValueError("empty moment series")
    times = np.asarray(series.times)
    M0 = np.asarray(series.M0)
    M1 = np.asarray(series.M1)
    M2 = np.asarray(series.M2)
    Y1 = np.asarray(series.Y1)
    defect = np.asarray(series.defect_integral)
    violations = []

    slack = 10.0 * rtol * max(M0[0], 1e-300)
    number_ok = bool(np.all(np.diff(M0) <= slack))
    if not number_ok:
        for tm, d in zip(times[1:], np.diff(M0)):
            if d > slack:
                violations.append(("M0_increase", float(tm)))

    # interior mass: M1(t) - M1(0) should equal eps^2 * integral of the defect
    drift = np.abs(M1 - M1[0] - epsilon**2 * defect)
    mass_ok = bool(np.all(drift <= 100.0 * rtol * max(M1[0], 1e-300)))
    if not mass_ok:
        for tm, d in zip(times, drift):
            if d > 100.0 * rtol * max(M1[0], 1e-300):
                violations.append(("mass_defect_mismatch", float(tm)))

    riccati = None
    mask = None
    a1 = spec.declared_bounds.get("A1")
    a2 = spec.declared_bounds.get("A2")
    if a1 is not None and a2 is not None and M2[0] > 0.0:
        A = 2.0 * max(a1, a2)
        growth = np.exp(A * M1[0] * (times - times[0]))
        denom = A * M1[0] + 2.0 * A * M2[0] * (1.0 - growth)
        mask = denom > 0.0
        riccati = np.full_like(times, np.nan)
        riccati[mask] = A * M1[0] * M2[0] * growth[mask] / denom[mask]
        for tm, m2, bound, ok in zip(times, M2, riccati, mask):
            if ok and m2 > bound * (1.0 + 1e-9):
                violations.append(("second_moment_bound", float(tm)))

    envelope = None
    k1 = spec.declared_bounds.get("K1")
    if k1 is not None:
        n0 = series.N_count[0]
        envelope = np.full_like(times, np.inf)
        pos = times > times[0]
        # discrete-index lower bound constant for the stored eps-scaled kernel
        k1_eff = k1 * epsilon**3
        envelope[pos] = np.sqrt(2.0 * n0 / (k1_eff * (times[pos] - times[0])))
        for tm, y1, env in zip(times[pos], Y1[pos], envelope[pos]):
            if y1 > env * (1.0 + 1e-9):
                violations.append(("mass_decay_envelope", float(tm)))

    return MomentBoundReport(
        number_nonincreasing=number_ok,
        mass_conserved=mass_ok,
        riccati_bound=riccati,
        riccati_checked_mask=mask,
        gelation_envelope=envelope,
        violations=violations,
    )
