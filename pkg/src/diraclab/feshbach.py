"""Schur (Feshbach) reduction onto the 2D free eigenspace at n.

For the truncated matrix M of a parity class and lambda = n + z,

    S(z) = V_PP + V_PQ ((n+z) I - M_QQ)^{-1} V_QP

on span{e_n^1, e_n^2}, so that det(z I - S(z)) = 0 exactly when n + z is an
eigenvalue of M.  In the untruncated limit the diagonal entries coincide
(both equal alpha_n(z)); we report their mean as alpha and the asymmetry as a
truncation diagnostic.  Labeling is pinned by the linear system the '+' root
eigenvector satisfies,

    (z - alpha) f0_1 = beta_minus f0_2,   (z - alpha) f0_2 = beta_plus f0_1,

i.e. beta_minus is the upper-right entry (couples component 2 into
component 1), beta_plus the lower-left.

The basic equation (z - alpha(z))^2 = beta_minus(z) beta_plus(z) has the pair
roots z_n^± as its only solutions in the disc; its residual at the computed
roots ties the matrix backend to the characteristic-function backend.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ComplementSingular
from .galerkin import GalerkinMatrix
from .spectral import SpectralTriple

VACUOUS_FLOOR_BASE = 1e-9


@dataclass(frozen=True)
class SMatrix:
    n: int
    z: complex
    alpha: complex
    beta_minus: complex
    beta_plus: complex
    diag_asymmetry: float
    z_used: complex  # equals z unless a singular complement forced a nudge

    @property
    def retried(self) -> bool:
        return self.z_used != self.z

    def basic_equation_residual(self) -> float:
        """|(z - alpha)^2 - beta_minus*beta_plus| at this matrix's own z."""
        return abs((self.z - self.alpha) ** 2 - self.beta_minus * self.beta_plus)


def _schur(gm: GalerkinMatrix, n: int, z: complex):
    i1 = gm.index_of(n, 1)
    i2 = gm.index_of(n, 2)
    dim = gm.dim
    qidx = np.array([i for i in range(dim) if i not in (i1, i2)])
    pidx = np.array([i1, i2])
    M = gm.matrix
    V_PP = M[np.ix_(pidx, pidx)].astype(complex)
    V_PP[0, 0] -= n
    V_PP[1, 1] -= n
    V_PQ = M[np.ix_(pidx, qidx)]
    V_QP = M[np.ix_(qidx, pidx)]
    A = (n + z) * np.eye(dim - 2, dtype=complex) - M[np.ix_(qidx, qidx)]
    lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    udiag = np.abs(np.diag(lu))
    if udiag.min() < 1e-12 * max(udiag.max(), 1.0):
        raise ComplementSingular(
            f"complementary block nearly singular at n={n}, z={z}"
        )
    Y = scipy.linalg.lu_solve((lu, piv), V_QP, check_finite=False)
    return V_PP + V_PQ @ Y


def feshbach_reduce(gm: GalerkinMatrix, n: int, z: complex,
                    retry_shift: complex = 1e-8) -> SMatrix:
    """S-matrix at z; |z| < 1/2 required (the reduction's validity disc)."""
    z = complex(z)
    if abs(z) >= 0.5:
        raise ValueError(f"Feshbach reduction needs |z| < 1/2, got |z|={abs(z):.3f}")
    if not gm.trusted(n):
        raise ValueError(f"n={n} outside the trust window of this matrix")
    z_used = z
    try:
        S = _schur(gm, n, z)
    except ComplementSingular:
        z_used = z + retry_shift
        S = _schur(gm, n, z_used)  # a second hit propagates
    alpha = 0.5 * (S[0, 0] + S[1, 1])
    asym = abs(S[0, 0] - S[1, 1])
    if asym > 1e-6 * (1.0 + abs(alpha)):
        warnings.warn(
            f"Feshbach diagonal asymmetry {asym:.3e} at n={n}, z={z}: "
            "truncation not converged",
            stacklevel=2,
        )
    return SMatrix(n, z, complex(alpha), complex(S[0, 1]), complex(S[1, 0]),
                   float(asym), z_used)


def basic_equation_residual(gm: GalerkinMatrix, row: SpectralTriple) -> dict:
    """Residual of (z-alpha)^2 = beta_minus*beta_plus at z_n^+ and z_n^-."""
    out = {}
    for tag, z in (("plus", row.z_plus), ("minus", row.z_minus)):
        out[f"residual_{tag}"] = float(
            feshbach_reduce(gm, row.n, z).basic_equation_residual())
    return out


def vacuous_floor(n: int) -> float:
    return VACUOUS_FLOOR_BASE * max(1.0, abs(n))


@dataclass(frozen=True)
class Theorem3Row:
    n: int
    num: float            # |beta_minus(z*)| + |beta_plus(z*)|
    den: float            # |gamma| + |delta|
    ratio: float | None   # num/den, None when vacuous or den below floor
    vacuous: bool
    B_plus: complex       # beta_plus(z_plus)
    B_minus: complex      # beta_minus(z_plus)
    beta_star_minus: complex
    beta_star_plus: complex


def theorem3_ratio(gm: GalerkinMatrix, row: SpectralTriple) -> Theorem3Row:
    """Both sides of the two-sided deviation estimate for one row.

    num and den vanish together exactly for V=0; rows where both fall below
    the noise floor are flagged vacuous rather than divided.
    """
    if row.delta is None:
        raise ValueError("theorem3_ratio needs a general-bc table row (no mu here)")
    S_star = feshbach_reduce(gm, row.n, row.z_star)
    S_plus = feshbach_reduce(gm, row.n, row.z_plus)
    num = float(abs(S_star.beta_minus) + abs(S_star.beta_plus))
    den = float(abs(row.gamma) + abs(row.delta))
    floor = vacuous_floor(row.n)
    vac = num < floor and den < floor
    ratio = None if (vac or den < floor) else num / den
    return Theorem3Row(row.n, num, den, ratio, vac, S_plus.beta_plus,
                       S_plus.beta_minus, S_star.beta_minus, S_star.beta_plus)
