"""Matrix backend: entry formulas against quadrature, spectra, projections."""
import math
import random

import numpy as np
import pytest
import scipy.linalg

from oracles import quad_operator_entry

from diraclab.errors import ContourHitsSpectrum, TruncationTooSmall, WrongRootCount
from diraclab.galerkin import (
    assemble_galerkin,
    plus_first,
    projection_rank,
    riesz_projection_numeric,
    trust_limit,
    wavenumbers,
)
from diraclab.potential import FourierPotential, generate_potential


def test_wavenumber_classes_and_trust_window():
    ks0 = wavenumbers(0, 4)
    assert ks0[0] == -8 and ks0[-1] == 8 and all(k % 2 == 0 for k in ks0)
    ks1 = wavenumbers(1, 4)
    assert ks1[0] == -9 and ks1[-1] == 9 and np.all(ks1 % 2 == 1)
    assert trust_limit(64) == 48
    with pytest.raises(ValueError):
        wavenumbers(2, 4)


def test_entries_match_direct_quadrature():
    # every coefficient placement is checked against (1/pi) int <L e_k^s, e_j^r>
    # computed by quadrature, before anything downstream trusts the assembly
    V = generate_potential(
        "trig_poly", p={0: 0.25 + 0.1j, 1: -0.15, -2: 0.05j}, q={0: 0.2, -2: 0.3j, 1: 0.07})
    for parity in (0, 1):
        gm = assemble_galerkin(V, parity, 8)
        rng = random.Random(parity)
        ks = list(gm.ks)
        checked = 0
        for _ in range(60):
            j, k = rng.choice(ks), rng.choice(ks)
            r, s = rng.choice((1, 2)), rng.choice((1, 2))
            want = quad_operator_entry(V, j, r, k, s)
            got = gm.matrix[gm.index_of(j, r), gm.index_of(k, s)]
            assert abs(got - want) < 1e-12, (parity, j, r, k, s)
            checked += 1
        assert checked == 60


def test_free_matrix_is_diagonal_wavenumbers():
    V = FourierPotential(0, {}, {})
    gm = assemble_galerkin(V, 1, 6)
    want = np.repeat(gm.ks, 2).astype(complex)
    assert np.max(np.abs(gm.matrix - np.diag(want))) == 0.0
    assert gm.hermitian


def test_truncation_below_potential_band_is_rejected():
    V = generate_potential("analytic", c=0.3, r=0.5, K=12)
    with pytest.raises(TruncationTooSmall):
        assemble_galerkin(V, 0, 8)


def test_index_of_rejects_foreign_wavenumbers():
    gm = assemble_galerkin(FourierPotential(0, {}, {}), 0, 4)
    assert gm.index_of(2, 1) == 2 * np.searchsorted(gm.ks, 2)
    with pytest.raises(KeyError):
        gm.index_of(3, 1)  # wrong parity
    assert gm.trusted(2) and not gm.trusted(3) and not gm.trusted(100)


def test_constant_potential_blocks_give_exact_double_pairs():
    # p = q = 0.4 couples k with -k: each 2x2 block [[-k, .4], [.4, k]] has
    # eigenvalues +-sqrt(k^2 + 0.16), and the two blocks (k,-k), (-k,k) make
    # every such value a double eigenvalue of the full matrix
    V = generate_potential("trig_poly", p={0: 0.4}, q={0: 0.4})
    gm = assemble_galerkin(V, 1, 16)
    for n in (5, 9, -7):
        lm, lp, vm, vp = gm.pair_near(n)
        want = math.copysign(math.sqrt(n * n + 0.16), n)
        assert abs(lm - want) < 1e-12
        assert abs(lp - want) < 1e-12
        # semisimple double: two independent eigenvectors
        overlap = abs(np.vdot(vm, vp)) / (np.linalg.norm(vm) * np.linalg.norm(vp))
        assert overlap < 1.0 - 1e-6


def test_pair_near_raises_on_wrong_count():
    V = generate_potential("trig_poly", p={0: 3.0}, q={0: 3.0})
    gm = assemble_galerkin(V, 1, 16)
    # the true pair near n=1 sits at +-sqrt(1+9), far outside the disc
    with pytest.raises(WrongRootCount):
        gm.pair_near(1)


def test_plus_first_orders_by_real_part_with_imaginary_tiebreak():
    assert plus_first(5.2, 5.1, 5)
    assert not plus_first(5.1, 5.2, 5)
    assert plus_first(5.0 + 1j, 5.0 - 1j, 5)


def test_eigendecomposition_is_cached_and_sorted():
    V = generate_potential("trig_poly", p={1: 0.2}, q={-1: 0.2})
    gm = assemble_galerkin(V, 0, 8)
    vals1, vecs1 = gm.eig()
    vals2, _ = gm.eig()
    assert vals1 is vals2  # cached
    assert np.all(np.diff(vals1.real) > -1e-9)


def test_riesz_projection_rank_idempotency_and_locality():
    V = generate_potential("trig_poly", p={1: 0.15, 0: 0.1}, q={-1: 0.15})
    gm = assemble_galerkin(V, 0, 12)
    P = riesz_projection_numeric(gm.matrix, 6.0, 0.25)
    assert projection_rank(P) == 2
    assert np.linalg.norm(P @ P - P, 2) < 1e-8
    assert np.linalg.norm(gm.matrix @ P - P @ gm.matrix, 2) < 1e-7


def test_riesz_projection_approaches_free_projection_as_coupling_fades():
    n, K = 6, 12
    V0 = FourierPotential(0, {}, {})
    gm0 = assemble_galerkin(V0, 0, K)
    P0 = np.zeros((gm0.dim, gm0.dim), dtype=complex)
    for comp in (1, 2):
        i = gm0.index_of(n, comp)
        P0[i, i] = 1.0
    dists = []
    for eps in (1.0, 0.5, 0.25, 0.1):
        V = generate_potential("trig_poly", p={1: 0.3 * eps, 0: 0.2 * eps}, q={-1: 0.25 * eps})
        gm = assemble_galerkin(V, 0, K)
        P = riesz_projection_numeric(gm.matrix, float(n), 0.25)
        dists.append(np.linalg.norm(P - P0, 2))
    assert all(a > b for a, b in zip(dists, dists[1:]))
    assert dists[-1] < 0.1


def test_riesz_projection_rejects_contour_through_spectrum():
    gm = assemble_galerkin(FourierPotential(0, {}, {}), 0, 8)
    with pytest.raises((ContourHitsSpectrum, scipy.linalg.LinAlgError, ValueError)):
        riesz_projection_numeric(gm.matrix, 6.0, 2.0 + 1e-13, nodes=64, max_doublings=1)


def test_hermitian_flag_follows_selfadjointness():
    V = generate_potential("selfadjoint_wrap",
                           inner=generate_potential("trig_poly", p={1: 0.2 - 0.1j}, q={}))
    assert assemble_galerkin(V, 0, 6).hermitian
    Vn = FourierPotential(1, {1: 0.2}, {})
    assert not assemble_galerkin(Vn, 0, 6).hermitian
