"""Right-hand side of the truncated aggregation system and its functionals.

Row i of the system (1-based, ``c_0 = 0``) reads

    dc_i/dt = c_{i-1} * A_{i-1} - c_i * A_i - c_i * W_i
            + c_{i-1} * G_{i-1} - c_i * G_i - c_i * Z_i

with the four per-row sums

    A_i = sum_{j<=i} j * Kd[i,j] * c_j      (growth by absorbing smaller)
    W_i = sum_{j>=i}     Kd[i,j] * c_j      (depletion by larger partners)
    G_i = sum_{j>=i} j * Cd[i,j] * c_j      (inverse-aggregation growth)
    Z_i = sum_{j<=i}     Cd[i,j] * c_j      (depletion by smaller partners)

The stored matrices already carry the factor eps (``Kd = eps * K(eps i, eps j)``
under the point rule) so no outer eps is applied here; a unit test pins this
convention.  Generic kernels cost O(m^2) per evaluation via row-cumulative
sums; constant kernels collapse to O(m) prefix/suffix sums.
"""

from __future__ import annotations

import numpy as np

from .kernels import DiscreteKernel
from .state import DiscreteState


def _sums_generic(c: np.ndarray, Kd: np.ndarray, Cd: np.ndarray):
    m = c.size
    j1 = np.arange(1, m + 1, dtype=float)
    jc = j1 * c
    idx = np.arange(m)

    csA = np.cumsum(Kd * jc[None, :], axis=1)
    A = csA[idx, idx]

    csW = np.cumsum(Kd * c[None, :], axis=1)
    W = csW[:, -1] - np.where(idx > 0, csW[idx, np.maximum(idx - 1, 0)], 0.0)

    csG = np.cumsum(Cd * jc[None, :], axis=1)
    G = csG[:, -1] - np.where(idx > 0, csG[idx, np.maximum(idx - 1, 0)], 0.0)

    csZ = np.cumsum(Cd * c[None, :], axis=1)
    Z = csZ[idx, idx]
    return A, W, G, Z


def _sums_constant(c: np.ndarray, kval: float, cval: float):
    m = c.size
    j1 = np.arange(1, m + 1, dtype=float)
    jc = j1 * c
    pre_jc = np.cumsum(jc)
    pre_c = np.cumsum(c)
    A = kval * pre_jc
    W = kval * (pre_c[-1] - pre_c + c)
    G = cval * (pre_jc[-1] - pre_jc + jc)
    Z = cval * pre_c
    return A, W, G, Z


def rhs_vector(c: np.ndarray, dk: DiscreteKernel) -> np.ndarray:
    """Time derivative of the concentration vector (no state wrapper)."""
    if dk.k_const is not None and dk.c_const is not None:
        A, W, G, Z = _sums_constant(c, dk.k_const, dk.c_const)
    else:
        A, W, G, Z = _sums_generic(c, dk.Kd, dk.Cd)
    flux = c * (A + G)
    Q = np.empty_like(c)
    Q[0] = -flux[0]
    Q[1:] = flux[:-1] - flux[1:]
    Q -= c * (W + Z)
    return Q


def eval_rhs(state: DiscreteState, dk: DiscreteKernel) -> np.ndarray:
    """Evaluate the system right-hand side for a state on the same grid."""
    if state.grid is not dk.grid and state.grid != dk.grid:
        raise ValueError("state and discrete kernel live on different grids")
    return rhs_vector(state.c, dk)


def mass_defect_rate(state_or_c, dk: DiscreteKernel) -> float:
    """Exact boundary correction to discrete-mass conservation.

    Returns ``D = -(m+1) c_m A_m - m (m+1) Cd[m,m] c_m^2``; the telescoping of
    the weighted sums gives ``sum_i i * Q_i = D`` identically for symmetric
    kernels, so interior mass is conserved exactly whenever the boundary cell
    is empty.
    """
    c = state_or_c.c if isinstance(state_or_c, DiscreteState) else np.asarray(state_or_c)
    m = c.size
    if m != dk.grid.m:
        raise ValueError("state and discrete kernel live on different grids")
    j1 = np.arange(1, m + 1, dtype=float)
    if dk.k_const is not None:
        A_m = dk.k_const * float(np.sum(j1 * c))
    else:
        A_m = float(np.sum(j1 * dk.Kd[-1, :] * c))
    C_mm = dk.c_const if dk.c_const is not None else float(dk.Cd[-1, -1])
    cm = float(c[-1])
    return -(m + 1) * cm * A_m - m * (m + 1) * C_mm * cm * cm


def weak_form_rate(state_or_c, dk: DiscreteKernel, phi: np.ndarray) -> float:
    """Truncated moment-equation right side for a test sequence ``phi``.

    ``phi`` needs ``m + 1`` entries since the forward difference
    ``phi_{i+1} - phi_i`` is taken at the last row.  For ``phi_i = i`` the
    bracket ``j * (phi_{i+1} - phi_i) - phi_j`` vanishes identically.
    """
    c = state_or_c.c if isinstance(state_or_c, DiscreteState) else np.asarray(state_or_c)
    m = c.size
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (m + 1,):
        raise ValueError(f"phi must have {m + 1} entries, got {phi.shape}")
    j1 = np.arange(1, m + 1, dtype=float)
    dphi = phi[1:] - phi[:-1]
    bracket = dphi[:, None] * j1[None, :] - phi[:-1][None, :]
    cc = np.outer(c, c)
    lower = np.tril(np.ones((m, m)))           # j <= i
    upper = np.triu(np.ones((m, m)))           # j >= i
    rate = np.sum(bracket * dk.Kd * cc * lower) + np.sum(bracket * dk.Cd * cc * upper)
    return float(rate)
