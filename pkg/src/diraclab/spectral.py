"""Eigenvalue localization and the deviation sequences.

Per row n the laboratory tracks the periodic/antiperiodic pair near n
(periodic for even n, antiperiodic for odd) and the general-bc eigenvalue:

    gamma  = lambda_plus - lambda_minus        (spectral gap)
    delta  = mu - lambda_plus                  (general-bc deviation)
    Delta  = |gamma| + |delta|
    z_star = (z_plus + z_minus)/2 for a simple pair, z_plus for a double one

lambda_plus is the member with larger real part (imaginary part breaks ties).

Pair localization is adaptive: contours of radius 1/4, 1/8, 0.45 around n are
scanned until the winding number matches the expected count, seeds come from
the argument-principle moments, and Newton (with Muller fallback) polishes
each root.  Roots closer than 1e-9*max(1,|n|) are merged into a double
eigenvalue.  A characteristic-function root pass cannot split pairs tighter
than about sqrt(eps) in relative terms, so build_spectral_table swaps in the
Galerkin pair whenever the matrix pair is closer than 1e-3 (recorded in
pair_source); mu always comes from the characteristic function, which is the
only backend that knows general boundary conditions.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .bc import BCKind, BoundaryCondition, per_minus, per_plus
from .errors import DiracLabError, WrongRootCount, ZeroOnContour, NonIntegerWinding
from .galerkin import assemble_galerkin, plus_first
from .potential import FourierPotential
from . import shooting

RADII = (0.25, 0.125, 0.45)
CLUSTER_TOL_BASE = 1e-9
GALERKIN_PAIR_GAP = 1e-3
PARTNER_FLOOR = 1.5e-7  # deflated-root acceptance; see comment in _locate


def cluster_tol(n: int) -> float:
    return CLUSTER_TOL_BASE * max(1.0, abs(n))


def pair_bc(n: int) -> BoundaryCondition:
    return per_plus() if n % 2 == 0 else per_minus()


@dataclass
class LocateResult:
    roots: list
    radius_used: float
    double_flag: bool
    chi_abs: list
    method: str


def _locate(bc: BoundaryCondition, V: FourierPotential, n: int, expected: int,
            tol: float, contour_nodes: int, scan_steps: int, refine_steps: int) -> LocateResult:
    """Find the expected number of characteristic roots near integer n."""

    def chi_scan(lams):
        return shooting.characteristic_values(bc, V, lams, scan_steps)

    def chi_fine(lams):
        return shooting.characteristic_values(bc, V, lams, refine_steps)

    last = None
    for radius in RADII:
        try:
            scan = shooting.contour_scan(chi_scan, complex(n), radius, contour_nodes)
        except (ZeroOnContour, NonIntegerWinding) as exc:
            last = exc
            continue
        if scan.winding != expected:
            last = WrongRootCount(expected, scan.winding, complex(n), radius)
            continue
        seeds = scan.root_seeds(expected)
        roots, chis = [], []
        for s in seeds:
            res = shooting.newton_refine(chi_fine, s, tol)
            roots.append(res.lam)
            chis.append(res.chi_abs)
        floor = max(PARTNER_FLOOR, 10.0 * cluster_tol(n))
        if expected == 2 and abs(roots[0] - roots[1]) <= floor:
            # collided (or unresolvably close) iterates: either a genuine
            # double zero, or both Newton runs slid into the same simple zero
            # and stalled at roundoff-separated points -- near a double the
            # stall scatter reaches the same ~1.3e-7 scale as the deflation
            # noise, so any split below the floor is not evidence of two
            # roots.  The contour moments know the root sum, so chase the
            # partner through a deflated iteration; at a true double it just
            # converges back and the merge stands.
            r0 = 0.5 * (roots[0] + roots[1])
            partner = seeds[0] + seeds[1] - r0
            if abs(partner - r0) > floor:
                def chi_defl(lams):
                    return chi_fine(lams) / (np.asarray(lams) - r0)

                try:
                    res2 = shooting.newton_refine(chi_defl, partner, tol)
                except DiracLabError:
                    res2 = None
                # at an exact double the deflated iterate still lands up to
                # ~1.3e-7 away (roundoff of chi near a double zero, measured
                # over constant/triangular potentials, |n| <= 40), so a
                # partner is only trusted above that scale
                if (res2 is not None and res2.converged
                        and abs(res2.lam - r0) > floor
                        and abs(res2.lam - n) < radius + 0.05):
                    return LocateResult([r0, res2.lam], radius, False,
                                        [chis[0], res2.chi_abs], "ode")
            return LocateResult([r0, r0], radius, True, chis, "ode")
        return LocateResult(roots, radius, False, chis, "ode")
    raise last if last is not None else WrongRootCount(expected, 0, complex(n), RADII[-1])


def locate_pair(V: FourierPotential, n: int, tol: float = 1e-12,
                contour_nodes: int = 256, steps: int | None = None):
    """Periodic/antiperiodic pair near n: (lambda_plus, lambda_minus, double_flag).

    Pure characteristic-function route; see build_spectral_table for the
    gap-resolution crossover to the Galerkin pair.
    """
    bc = pair_bc(n)
    scan_steps = steps or shooting.default_steps(V, abs(n) + 1.0, shooting.SCAN_FACTOR)
    refine_steps = steps or shooting.default_steps(V, abs(n) + 1.0)
    loc = _locate(bc, V, n, 2, tol, contour_nodes, scan_steps, refine_steps)
    r0, r1 = loc.roots
    if loc.double_flag:
        return r0, r1, True, loc
    if plus_first(r0, r1, n):
        return r0, r1, False, loc
    return r1, r0, False, loc


def locate_general(V: FourierPotential, bc: BoundaryCondition, n: int, tol: float = 1e-12,
                   contour_nodes: int = 256, steps: int | None = None):
    """The single general-bc eigenvalue mu near n."""
    if bc.kind is not BCKind.GENERAL:
        raise ValueError("locate_general needs a general boundary condition")
    scan_steps = steps or shooting.default_steps(V, abs(n) + 1.0, shooting.SCAN_FACTOR)
    refine_steps = steps or shooting.default_steps(V, abs(n) + 1.0)
    loc = _locate(bc, V, n, 1, tol, contour_nodes, scan_steps, refine_steps)
    return loc.roots[0], loc


@dataclass
class SpectralTriple:
    n: int
    lambda_plus: complex
    lambda_minus: complex
    mu: complex | None            # None on pair-only (periodic bc) tables
    radius_used: float
    double_flag: bool
    pair_source: str = "ode"
    z_star_alt: complex | None = None
    error: str | None = None

    @property
    def gamma(self) -> complex:
        return self.lambda_plus - self.lambda_minus

    @property
    def delta(self) -> complex | None:
        if self.mu is None:
            return None
        return self.mu - self.lambda_plus

    @property
    def Delta(self) -> float:
        d = self.delta
        return abs(self.gamma) + (abs(d) if d is not None else 0.0)

    @property
    def z_plus(self) -> complex:
        return self.lambda_plus - self.n

    @property
    def z_minus(self) -> complex:
        return self.lambda_minus - self.n

    @property
    def z_star(self) -> complex:
        if self.double_flag:
            return self.z_plus
        return 0.5 * (self.z_plus + self.z_minus)

    def to_jsonable(self) -> dict:
        dl = self.delta
        d = {
            "n": self.n,
            "lambda_plus": [self.lambda_plus.real, self.lambda_plus.imag],
            "lambda_minus": [self.lambda_minus.real, self.lambda_minus.imag],
            "mu": None if self.mu is None else [self.mu.real, self.mu.imag],
            "gamma": [self.gamma.real, self.gamma.imag],
            "delta": None if dl is None else [dl.real, dl.imag],
            "Delta": self.Delta,
            "z_star": [self.z_star.real, self.z_star.imag],
            "radius_used": self.radius_used,
            "double_flag": self.double_flag,
            "pair_source": self.pair_source,
            "error": self.error,
        }
        if self.z_star_alt is not None:
            d["z_star_alt"] = [self.z_star_alt.real, self.z_star_alt.imag]
        return d


CSV_COLUMNS = (
    "n,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus,"
    "re_mu,im_mu,re_gamma,im_gamma,re_delta,im_delta,abs_Delta,"
    "radius,double_flag,pair_source,error"
)


@dataclass
class SpectralTable:
    bc: BoundaryCondition
    potential_digest: str
    n_range: tuple
    rows: list = field(default_factory=list)
    config_digest: str = ""

    def row(self, n: int) -> SpectralTriple:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(f"no row for n={n}")

    def ok_rows(self):
        return [r for r in self.rows if r.error is None]

    def to_csv(self) -> str:
        lines = [CSV_COLUMNS]
        for r in sorted(self.rows, key=lambda r: r.n):
            mu = ("," if r.mu is None
                  else f"{r.mu.real!r},{r.mu.imag!r}")
            dl = ("," if r.delta is None
                  else f"{r.delta.real!r},{r.delta.imag!r}")
            lines.append(
                f"{r.n},{r.lambda_plus.real!r},{r.lambda_plus.imag!r},"
                f"{r.lambda_minus.real!r},{r.lambda_minus.imag!r},"
                f"{mu},{r.gamma.real!r},{r.gamma.imag!r},"
                f"{dl},{r.Delta!r},"
                f"{r.radius_used!r},{int(r.double_flag)},{r.pair_source},"
                f"{r.error or ''}"
            )
        return "\n".join(lines) + "\n"

    def to_jsonable(self) -> dict:
        return {
            "bc": self.bc.to_jsonable(),
            "potential_digest": self.potential_digest,
            "n_range": list(self.n_range),
            "config_digest": self.config_digest,
            "rows": [r.to_jsonable() for r in sorted(self.rows, key=lambda r: r.n)],
        }


def _row_worker(args):
    V, bc, n, tol, contour_nodes, ode_steps, gal_pair = args
    try:
        lp, lm, dbl, loc = locate_pair(V, n, tol, contour_nodes, ode_steps)
        pair_source = "ode"
        radius = loc.radius_used
        z_alt = None
        if gal_pair is not None:
            glm, glp = gal_pair
            if abs(glp - glm) < GALERKIN_PAIR_GAP:
                # below the characteristic-function resolution crossover the
                # matrix pair is the sharper estimate -- in particular when
                # the contour route collapsed a tight-but-open pair
                lp, lm = glp, glm
                pair_source = "galerkin"
                dbl = abs(lp - lm) <= cluster_tol(n)
                if dbl:
                    lp = lm = 0.5 * (lp + lm)
        if not dbl and abs(lp - lm) < 10.0 * cluster_tol(n):
            # ambiguous branch: record the midpoint alternative
            z_alt = lp - n
        if bc.is_general:
            mu, _ = locate_general(V, bc, n, tol, contour_nodes, ode_steps)
            mu = complex(mu)
        else:
            mu = None  # pair-only table: no third eigenvalue to track
        return SpectralTriple(n, complex(lp), complex(lm), mu, float(radius),
                              bool(dbl), pair_source,
                              None if z_alt is None else complex(z_alt))
    except Exception as exc:  # per-row failures are data, not crashes
        nan = complex(float("nan"), float("nan"))
        return SpectralTriple(n, nan, nan, nan, 0.0, False, "none",
                              error=f"{type(exc).__name__}: {exc}")


def build_spectral_table(V: FourierPotential, bc: BoundaryCondition, n_range,
                         K: int | None = None, tol: float = 1e-12,
                         contour_nodes: int = 256, workers: int = 1,
                         galerkin_pairs: dict | None = None,
                         ode_steps: int | None = None) -> SpectralTable:
    """Full deviation table over n_range = (n_min, n_max).

    galerkin_pairs may carry precomputed {n: (lam_minus, lam_plus)} from the
    matrix backend; otherwise they are assembled here when K is given.  Rows
    that fail localization carry an error marker instead of aborting the run.
    """
    n_min, n_max = int(n_range[0]), int(n_range[1])
    ns = list(range(n_min, n_max + 1))
    if galerkin_pairs is None and K is not None:
        galerkin_pairs = galerkin_pair_map(V, ns, K)
    galerkin_pairs = galerkin_pairs or {}
    jobs = [(V, bc, n, tol, contour_nodes, ode_steps, galerkin_pairs.get(n))
            for n in ns]
    if workers > 1 and len(jobs) > 1 and hasattr(os, "fork"):
        import multiprocessing

        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            rows = pool.map(_row_worker, jobs)
    else:
        rows = [_row_worker(j) for j in jobs]
    rows.sort(key=lambda r: r.n)
    return SpectralTable(bc, V.digest(), (n_min, n_max), rows)


def galerkin_pair_map(V: FourierPotential, ns, K: int) -> dict:
    """(lam_minus, lam_plus) per n from the parity-class matrices."""
    mats = {}
    out = {}
    for n in ns:
        p = abs(n) % 2
        if p not in mats:
            mats[p] = assemble_galerkin(V, p, K)
        gm = mats[p]
        if not gm.trusted(n):
            continue
        try:
            lm, lp, _, _ = gm.pair_near(n)
        except WrongRootCount:
            continue
        out[n] = (lm, lp)
    return out
