import numpy as np
import pytest

from dcasim.grid import build_grid
from dcasim.kernels import DiscreteKernel, KernelSpec, discretize
from dcasim.rhs import eval_rhs, mass_defect_rate, rhs_vector, weak_form_rate
from dcasim.state import DiscreteState

from oracle import (ORACLE_KERNELS, naive_rhs, naive_weak_form, small_grid)


def _dk(spec, epsilon, m):
    return discretize(spec, small_grid(epsilon, m))


CONST = KernelSpec(family_K="constant", K_value=1.0, lam=1.0)


def test_hand_computed_two_cell_example():
    dk = _dk(CONST, 0.1, 2)
    q = rhs_vector(np.array([1.0, 1.0]), dk)
    np.testing.assert_allclose(q, [-0.7, -0.4], atol=1e-15)


def test_zero_state_gives_zero():
    dk = _dk(CONST, 0.1, 5)
    np.testing.assert_array_equal(rhs_vector(np.zeros(5), dk), 0.0)


def test_eval_rhs_grid_mismatch():
    dk = _dk(CONST, 0.1, 5)
    other = DiscreteState(small_grid(0.1, 4), np.zeros(4))
    with pytest.raises(ValueError):
        eval_rhs(other, dk)


def test_constant_fast_path_matches_generic():
    # strip the constant markers to force the cumulative-sum path
    rng = np.random.default_rng(7)
    for m in (2, 5, 17):
        dk = _dk(CONST, 0.1, m)
        slow = DiscreteKernel(grid=dk.grid, Kd=dk.Kd, Cd=dk.Cd, rule=dk.rule)
        c = rng.random(m)
        np.testing.assert_allclose(rhs_vector(c, dk), rhs_vector(c, slow),
                                   rtol=1e-13, atol=1e-16)


def test_matches_naive_oracle_all_kernels():
    rng = np.random.default_rng(11)
    for spec in ORACLE_KERNELS:
        for m in (2, 3, 9, 24):
            eps = float(rng.uniform(0.05, 0.4))
            dk = _dk(spec, eps, m)
            c = rng.random(m)
            ref = naive_rhs(list(c), spec, eps)
            scale = max(1.0, float(np.max(np.abs(ref))))
            assert np.max(np.abs(rhs_vector(c, dk) - ref)) <= 1e-13 * scale


def test_lambda_zero_is_pure_forward_part():
    # with C = 0 only the K bracket survives
    spec0 = KernelSpec(family_K="constant", K_value=1.0, lam=0.0)
    dk0 = _dk(spec0, 0.1, 8)
    assert np.all(dk0.Cd == 0.0)
    rng = np.random.default_rng(3)
    c = rng.random(8)
    ref = naive_rhs(list(c), spec0, 0.1)
    np.testing.assert_allclose(rhs_vector(c, dk0), ref, atol=1e-15)


def test_lambda_decomposition_is_affine():
    # Q(lam) = Q(0) + lam * (Q(1) - Q(0)) entrywise
    rng = np.random.default_rng(5)
    c = rng.random(12)
    qs = {}
    for lam in (0.0, 0.35, 1.0):
        dk = _dk(KernelSpec(family_K="constant", K_value=1.0, lam=lam), 0.1, 12)
        qs[lam] = rhs_vector(c, dk)
    expect = qs[0.0] + 0.35 * (qs[1.0] - qs[0.0])
    np.testing.assert_allclose(qs[0.35], expect, rtol=1e-12, atol=1e-15)


def test_lambda_one_equals_independent_C_equals_K():
    spec_ind = KernelSpec(family_K="constant", K_value=1.0, lam=None,
                          family_C="constant", C_value=1.0)
    dk_lam = _dk(CONST, 0.1, 8)
    dk_ind = _dk(spec_ind, 0.1, 8)
    c = np.linspace(0.1, 1.0, 8)
    np.testing.assert_array_equal(rhs_vector(c, dk_lam), rhs_vector(c, dk_ind))


def test_mass_defect_hand_example():
    dk = _dk(CONST, 0.1, 2)
    c = np.array([1.0, 1.0])
    assert mass_defect_rate(c, dk) == pytest.approx(-1.5)
    q = rhs_vector(c, dk)
    assert 1.0 * q[0] + 2.0 * q[1] == pytest.approx(-1.5)


def test_mass_defect_zero_cases():
    dk = _dk(CONST, 0.1, 4)
    assert mass_defect_rate(np.zeros(4), dk) == 0.0
    # empty boundary cell: interior mass conserved exactly
    c = np.array([0.3, 0.7, 0.2, 0.0])
    assert mass_defect_rate(c, dk) == 0.0
    q = rhs_vector(c, dk)
    i1 = np.arange(1, 5, dtype=float)
    assert float(i1 @ q) == pytest.approx(0.0, abs=1e-15)


def test_mass_defect_size_guard():
    dk = _dk(CONST, 0.1, 4)
    with pytest.raises(ValueError):
        mass_defect_rate(np.zeros(5), dk)


def test_weak_form_identity_phi_linear():
    rng = np.random.default_rng(13)
    for spec in ORACLE_KERNELS:
        m = 9
        dk = _dk(spec, 0.2, m)
        c = rng.random(m)
        phi = np.arange(1, m + 2, dtype=float)
        assert weak_form_rate(c, dk, phi) == pytest.approx(0.0, abs=1e-14)


def test_weak_form_phi_one_nonpositive():
    rng = np.random.default_rng(17)
    dk = _dk(CONST, 0.1, 10)
    for _ in range(20):
        c = rng.random(10)
        assert weak_form_rate(c, dk, np.ones(11)) <= 0.0


def test_weak_form_matches_direct_double_loop():
    rng = np.random.default_rng(19)
    for spec in ORACLE_KERNELS:
        m = int(rng.integers(2, 9))
        eps = 0.15
        dk = _dk(spec, eps, m)
        c = rng.random(m)
        phi = rng.normal(size=m + 1)
        ref = naive_weak_form(list(c), spec, eps, list(phi))
        assert weak_form_rate(c, dk, phi) == pytest.approx(ref, abs=1e-12)


def test_weak_form_phi_length_guard():
    dk = _dk(CONST, 0.1, 4)
    with pytest.raises(ValueError):
        weak_form_rate(np.zeros(4), dk, np.ones(4))
