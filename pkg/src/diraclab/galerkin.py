"""Truncated Fourier (Galerkin) matrices on one parity class.

The free operator diagonalizes over {e_k^1 = (e^{-ikx}, 0), e_k^2 = (0, e^{ikx})}
with eigenvalue k on both, and the potential only couples wavenumbers of equal
parity, so the matrix splits into an even class (periodic) and an odd class
(antiperiodic).  With ks the class wavenumbers and interleaved ordering
(2i -> (ks[i], comp 1), 2i+1 -> (ks[i], comp 2)):

    M[(j,1),(j,1)] = M[(j,2),(j,2)] = j
    M[(j,1),(m,2)] = p(-(j+m)/2)
    M[(j,2),(m,1)] = q((j+m)/2)

The matrix is Hermitian exactly when the potential is formally self-adjoint
(q(k) = conj(p(-k))).  Eigenvalues near the truncation edge are junk; only
rows with |n| <= K - K//4 are trusted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ContourHitsSpectrum, TruncationTooSmall, WrongRootCount
from .potential import FourierPotential


def wavenumbers(parity: int, K: int) -> np.ndarray:
    """Class wavenumbers: k = parity (mod 2), |k| <= 2K + parity."""
    if parity not in (0, 1):
        raise ValueError("parity must be 0 or 1")
    hi = 2 * K + parity
    return np.arange(-hi, hi + 1, 2)


def trust_limit(K: int) -> int:
    return K - K // 4


@dataclass
class GalerkinMatrix:
    parity: int
    K: int
    ks: np.ndarray
    matrix: np.ndarray
    hermitian: bool
    _eig: tuple | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def index_of(self, k: int, comp: int) -> int:
        """Row index of basis vector e_k^comp (comp in {1, 2})."""
        i = int(np.searchsorted(self.ks, k))
        if i >= self.ks.size or self.ks[i] != k:
            raise KeyError(f"wavenumber {k} not in parity-{self.parity} class at K={self.K}")
        return 2 * i + (comp - 1)

    def trusted(self, n: int) -> bool:
        return abs(n) <= trust_limit(self.K) and (n - self.parity) % 2 == 0

    def eig(self):
        """Eigenvalues (sorted by real part, then imaginary) and eigenvectors."""
        if self._eig is None:
            if self.hermitian:
                vals, vecs = scipy.linalg.eigh(self.matrix)
                vals = vals.astype(complex)
            else:
                vals, vecs = scipy.linalg.eig(self.matrix)
            order = np.lexsort((vals.imag, vals.real))
            self._eig = (vals[order], vecs[:, order])
        return self._eig

    def eigenvalues(self) -> np.ndarray:
        return self.eig()[0]

    def pair_near(self, n: int, radius: float = 0.5):
        """The two eigenvalues in |z - n| < radius, ordered (minus, plus).

        Returns (lam_minus, lam_plus, vec_minus, vec_plus).  Raises
        WrongRootCount when the disc does not hold exactly two eigenvalues —
        that happens outside the trust window or for discs hitting a third
        branch, and callers are expected to have checked trusted(n).
        """
        vals, vecs = self.eig()
        sel = np.nonzero(np.abs(vals - n) < radius)[0]
        if sel.size != 2:
            raise WrongRootCount(2, int(sel.size), complex(n), radius)
        z1, z2 = vals[sel[0]], vals[sel[1]]
        if plus_first(z1, z2, n):
            sel = sel[::-1]
        return vals[sel[0]], vals[sel[1]], vecs[:, sel[0]], vecs[:, sel[1]]


def plus_first(z1: complex, z2: complex, n: int) -> bool:
    """True when z1 is the '+' member: larger real part, imaginary tie-break."""
    tol = 1e-12 * max(1.0, abs(n))
    if abs(z1.real - z2.real) > tol:
        return z1.real > z2.real
    return z1.imag > z2.imag


def assemble_galerkin(V: FourierPotential, parity: int, K: int) -> GalerkinMatrix:
    if K < V.K:
        raise TruncationTooSmall(
            f"truncation K={K} drops couplings of a potential with K={V.K}"
        )
    ks = wavenumbers(parity, K)
    n = ks.size
    half = 2 * K + 2
    parr = V.coeff_array("p", half)
    qarr = V.coeff_array("q", half)
    s = (ks[:, None] + ks[None, :]) // 2  # j+m is even within a class
    M = np.zeros((2 * n, 2 * n), dtype=complex)
    idx = np.arange(n)
    M[2 * idx, 2 * idx] = ks
    M[2 * idx + 1, 2 * idx + 1] = ks
    M[0::2, 1::2] = parr[-s + half]
    M[1::2, 0::2] = qarr[s + half]
    return GalerkinMatrix(parity, K, ks, M, hermitian=V.is_selfadjoint)


def riesz_projection_numeric(M: np.ndarray, center: complex, radius: float,
                             nodes: int = 128, tol: float = 1e-8,
                             max_doublings: int = 3) -> np.ndarray:
    """Spectral projection (1/2pi i) * contour integral of the resolvent.

    Trapezoid rule on the circle is spectrally accurate; the node count is
    doubled until ||P^2 - P|| <= tol, and a contour passing too close to an
    eigenvalue shows up as a persistent defect.
    """
    dim = M.shape[0]
    eye = np.eye(dim, dtype=complex)
    m = nodes
    for _ in range(max_doublings + 1):
        theta = 2.0 * math.pi * np.arange(m) / m
        zs = center + radius * np.exp(1j * theta)
        P = np.zeros((dim, dim), dtype=complex)
        for z in zs:
            P += scipy.linalg.lu_solve(scipy.linalg.lu_factor(z * eye - M), eye) * (z - center)
        P /= m
        defect = np.linalg.norm(P @ P - P, 2)
        if defect <= tol:
            return P
        m *= 2
    raise ContourHitsSpectrum(
        f"projection defect {defect:.3e} > {tol:.1e} at {m // 2} nodes "
        f"(center={center}, r={radius})"
    )


def projection_rank(P: np.ndarray) -> int:
    return int(round(float(np.trace(P).real)))
