"""Schur reduction onto the 2D free eigenspace: entries, labels, guards."""
import math
import warnings

import numpy as np
import pytest

from diraclab.bc import per_plus
from diraclab.errors import ComplementSingular
from diraclab.feshbach import feshbach_reduce, theorem3_ratio, vacuous_floor
from diraclab.galerkin import assemble_galerkin
from diraclab.pipeline import LabRun, basic_equation_residual
from diraclab.potential import generate_potential
from diraclab.spectral import build_spectral_table


def test_free_reduction_vanishes_identically(V_zero):
    gm = assemble_galerkin(V_zero, 0, 32)
    for z in (0.0, 0.2, 0.1 + 0.3j):
        S = feshbach_reduce(gm, 4, z)
        assert abs(S.alpha) < 1e-14
        assert abs(S.beta_minus) < 1e-14 and abs(S.beta_plus) < 1e-14
        assert S.diag_asymmetry < 1e-14
        assert not S.retried


def test_basic_equation_residual_at_the_located_pair(V_nsa):
    # z_n^+- solve (z - alpha(z))^2 = beta_minus(z) beta_plus(z): with the
    # pair taken from the same truncation the Schur identity is near-exact
    for n in (5, 10):
        res = basic_equation_residual(V_nsa, n)
        assert res["residual_plus"] < 1e-12
        assert res["residual_minus"] < 1e-12


def test_beta_labels_follow_the_eigenvector_linear_system(run_asym_pos):
    # the '+' eigenvector's free components satisfy
    # (z - alpha) f0_1 = beta_minus f0_2; with the asymmetric potential the
    # two couplings differ by ~100x, so swapped labels cannot pass
    n = 12
    run = run_asym_pos
    row = run.table().row(n)
    jp = run.jordan(n)
    S = run.smatrix_at(n, row.z_plus)
    f1, f2 = jp.f0_components
    resid = abs((row.z_plus - S.alpha) * f1 - S.beta_minus * f2)
    swapped = abs((row.z_plus - S.alpha) * f1 - S.beta_plus * f2)
    assert resid < 1e-10
    assert swapped > 100.0 * max(resid, 1e-14)


def test_diagonal_asymmetry_is_a_truncation_null_for_band_potentials(V_nsa):
    gm = assemble_galerkin(V_nsa, 0, 48)
    with warnings.catch_warnings():
        warnings.simplefilter("error")  # converged truncation: no warning
        S = feshbach_reduce(gm, 6, 0.1)
    assert S.diag_asymmetry < 1e-12


def test_reduction_guards(V_nsa):
    gm = assemble_galerkin(V_nsa, 0, 48)
    with pytest.raises(ValueError, match=r"\|z\| < 1/2"):
        feshbach_reduce(gm, 6, 0.5)
    with pytest.raises(ValueError, match="trust"):
        feshbach_reduce(gm, 40, 0.1)


def test_theorem3_needs_a_general_bc_row(V_nsa):
    table = build_spectral_table(V_nsa, per_plus(), (6, 6), K=48)
    gm = assemble_galerkin(V_nsa, 0, 48)
    with pytest.raises(ValueError, match="general"):
        theorem3_ratio(gm, table.row(6))


def test_singular_complement_is_retried_with_a_nudge():
    # p(0) = q(0) = sqrt(12) parks a complementary-block eigenvalue exactly
    # at 4 (the k=2 block gives sqrt(4 + 12)), so z = 0 hits it head on
    V = generate_potential("trig_poly",
                           p={0: math.sqrt(12.0)}, q={0: math.sqrt(12.0)})
    gm = assemble_galerkin(V, 0, 48)
    S = feshbach_reduce(gm, 4, 0.0)
    assert S.retried
    assert S.z_used == 1e-8
    assert np.isfinite(S.alpha)


def test_singular_complement_propagates_when_not_nudgable():
    V = generate_potential("trig_poly",
                           p={0: math.sqrt(12.0)}, q={0: math.sqrt(12.0)})
    gm = assemble_galerkin(V, 0, 48)
    with pytest.raises(ComplementSingular):
        feshbach_reduce(gm, 4, 0.0, retry_shift=0.0)


def test_beta_maps_satisfy_cauchy_riemann_in_z(V_mix):
    gm = assemble_galerkin(V_mix, 1, 32)
    h = 1e-5
    z0 = 0.1 + 0.05j
    for pick in (lambda S: S.alpha, lambda S: S.beta_minus,
                 lambda S: S.beta_plus):
        fx = (pick(feshbach_reduce(gm, 5, z0 + h))
              - pick(feshbach_reduce(gm, 5, z0 - h))) / (2 * h)
        fy = (pick(feshbach_reduce(gm, 5, z0 + 1j * h))
              - pick(feshbach_reduce(gm, 5, z0 - 1j * h))) / (2 * h)
        dbar = 0.5 * (fx + 1j * fy)
        assert abs(dbar) < 1e-6 * (abs(fx) + 1.0)


def test_theorem3_row_is_vacuous_for_the_free_operator(V_zero, bcd):
    run = LabRun(V_zero, bcd, (6, 6), K=32)
    t3 = run.theorem3(6)
    assert t3.vacuous
    assert t3.ratio is None
    assert t3.num < vacuous_floor(6) and t3.den < vacuous_floor(6)


def test_theorem3_row_carries_both_sides_for_a_live_potential(V_nsa, bcd):
    run = LabRun(V_nsa, bcd, (5, 5), K=48)
    t3 = run.theorem3(5)
    assert not t3.vacuous
    assert t3.ratio is not None and t3.ratio > 0
    assert t3.ratio == pytest.approx(t3.num / t3.den)
    # B_plus/B_minus are the couplings at z_plus, beta_star_* at z_star
    assert np.isfinite(t3.B_plus) and np.isfinite(t3.B_minus)
