"""Shared fixtures: the standing test potentials and the expensive lab runs.

The LabRun fixtures are session-scoped because a full deviation table plus
row bundles over thirty modes costs seconds; every test that needs rows from
the same (potential, bc, range) triple shares one run.
"""
from __future__ import annotations

import random

import pytest

from diraclab import (
    FourierPotential,
    LabRun,
    dirichlet_plus,
    generate_potential,
)


def _seeded_table(seed: int, K: int, scale: float) -> dict:
    rng = random.Random(seed)
    return {k: scale * complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            for k in range(-K, K + 1)}


@pytest.fixture(scope="session")
def V_zero():
    return FourierPotential(0, {}, {})


@pytest.fixture(scope="session")
def V_sa():
    """Self-adjoint trig polynomial (q(k) = conj(p(-k)))."""
    inner = generate_potential("trig_poly", p={0: 0.3, 1: 0.2, -1: 0.1, 2: 0.05}, q={})
    return generate_potential("selfadjoint_wrap", inner=inner)


@pytest.fixture(scope="session")
def V_nsa():
    """Non-self-adjoint trig polynomial with dense complex tables."""
    return generate_potential(
        "trig_poly", p=_seeded_table(7, 3, 0.12), q=_seeded_table(8, 3, 0.12))


@pytest.fixture(scope="session")
def V_mix():
    """Small mixed table: complex constant part plus one-sided modes."""
    return generate_potential(
        "trig_poly", p={0: 0.25 + 0.1j, 1: -0.15}, q={0: 0.2, -2: 0.3j})


@pytest.fixture(scope="session")
def V_an06():
    return generate_potential("analytic", c=0.35, r=0.6, K=40)


@pytest.fixture(scope="session")
def V_an04():
    return generate_potential("analytic", c=0.35, r=0.4, K=40)


@pytest.fixture(scope="session")
def V_sob2():
    return generate_potential("sobolev", c=0.3, m=2, K=40)


@pytest.fixture(scope="session")
def V_asym():
    """Strongly lopsided coupling: q = 0.01 * p, drives the case_i/ii regimes."""
    base = generate_potential("analytic", c=0.35, r=0.6, K=40)
    return FourierPotential(base.K, dict(base.p), {k: 0.01 * v for k, v in base.p.items()})


@pytest.fixture(scope="session")
def V_const():
    return generate_potential("trig_poly", p={0: 0.4}, q={0: 0.4})


@pytest.fixture(scope="session")
def V_ponly():
    """Triangular single-mode potential (q = 0): defective pairs, gamma = 0."""
    return generate_potential("trig_poly", p={1: 0.3}, q={})


@pytest.fixture(scope="session")
def V_real():
    """Real even tables (real-valued, reflection-symmetric functions), not
    self-adjoint: spectrum closed under conjugation."""
    return generate_potential("trig_poly",
                              p={1: 0.15, -1: 0.15, 0: 0.2},
                              q={1: 0.125, -1: 0.125, 0: 0.1})


@pytest.fixture(scope="session")
def bcd():
    return dirichlet_plus()


def _run(V, bc, n_range, **kw):
    return LabRun(V, bc, n_range, K=kw.pop("K", 64), **kw)


@pytest.fixture(scope="session")
def run_an_pos(V_an06, bcd):
    return _run(V_an06, bcd, (10, 40))


@pytest.fixture(scope="session")
def run_an_neg(V_an06, bcd):
    return _run(V_an06, bcd, (-40, -10))


@pytest.fixture(scope="session")
def run_an04_pos(V_an04, bcd):
    return _run(V_an04, bcd, (10, 40))


@pytest.fixture(scope="session")
def run_nsa_pos(V_nsa, bcd):
    return _run(V_nsa, bcd, (10, 40))


@pytest.fixture(scope="session")
def run_nsa_neg(V_nsa, bcd):
    return _run(V_nsa, bcd, (-40, -10))


@pytest.fixture(scope="session")
def run_sob_pos(V_sob2, bcd):
    return _run(V_sob2, bcd, (10, 40))


@pytest.fixture(scope="session")
def run_sob_neg(V_sob2, bcd):
    return _run(V_sob2, bcd, (-40, -10))


@pytest.fixture(scope="session")
def run_asym_pos(V_asym, bcd):
    return _run(V_asym, bcd, (10, 40))
