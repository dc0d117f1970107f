"""Riesz-basis diagnostics from the deviation table.

The criterion under test: the root system is a Riesz basis iff
sup over gamma_n != 0 of |delta_n| / |gamma_n| is finite, with the companion
two-sided proxy 0 < liminf |beta^-(z*)| / |beta^+(z*)| <= limsup < infinity.
A finite sweep cannot decide an asymptotic statement, so the report carries a
verdict *hint* (bounded / growing / vacuous) plus the raw per-n ratios for
inspection, never a categorical claim.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .feshbach import feshbach_reduce, vacuous_floor
from .galerkin import assemble_galerkin
from .potential import FourierPotential
from .spectral import SpectralTable, cluster_tol

VERDICT_BOUNDED = "criterion-bounded"
VERDICT_GROWING = "criterion-growing"
VERDICT_VACUOUS = "vacuous"

GROWTH_FACTOR = 2.0


def default_gamma_floor(n: int) -> float:
    # matches the spectral cluster tolerance: a gamma below root-finder
    # resolution cannot support a meaningful ratio
    return 1e-9 * max(1.0, abs(n))


@dataclass
class RieszReport:
    sup_ratio: float | None       # None iff vacuous
    sup_arg: int | None
    nonzero_gamma_count: int
    excluded_count: int
    total_count: int
    per_n: list = field(default_factory=list)   # (n, ratio or None, gamma_abs, delta_abs)
    verdict_hint: str = VERDICT_VACUOUS
    beta_ratio_min: float | None = None
    beta_ratio_max: float | None = None

    def running_sup(self) -> list:
        """(|n|-ordered) prefix maxima over included rows; exactly monotone."""
        out = []
        cur = 0.0
        for n, ratio, _, _ in sorted(self.per_n, key=lambda t: (abs(t[0]), t[0])):
            if ratio is None:
                continue
            cur = max(cur, ratio)
            out.append((n, cur))
        return out

    def to_jsonable(self) -> dict:
        return {
            "sup_ratio": self.sup_ratio,
            "sup_arg": self.sup_arg,
            "nonzero_gamma_count": self.nonzero_gamma_count,
            "excluded_count": self.excluded_count,
            "total_count": self.total_count,
            "verdict_hint": self.verdict_hint,
            "beta_ratio_min": self.beta_ratio_min,
            "beta_ratio_max": self.beta_ratio_max,
            "per_n": [
                {"n": n, "ratio": r, "abs_gamma": g, "abs_delta": d}
                for n, r, g, d in sorted(self.per_n, key=lambda t: t[0])
            ],
        }


def riesz_criterion(table: SpectralTable, gamma_floor: float | None = None,
                    beta: "BetaRatioResult | None" = None) -> RieszReport:
    """sup |delta_n|/|gamma_n| over rows with gamma effectively nonzero.

    gamma_floor: fixed threshold, or None for the per-row default
    1e-9*max(1,|n|).  Rows at or below the floor are excluded and counted,
    so excluded + included = total always holds.
    """
    per_n = []
    sup: float | None = None
    sup_arg = None
    included = 0
    rows = [r for r in table.rows if r.error is None]
    for r in rows:
        floor = default_gamma_floor(r.n) if gamma_floor is None else gamma_floor
        g = abs(r.gamma)
        d = abs(r.delta) if r.delta is not None else None
        if g <= floor or d is None:
            # below-resolution gamma, or a pair-only table with no mu at all
            per_n.append((r.n, None, g, d))
            continue
        ratio = d / g
        per_n.append((r.n, ratio, g, d))
        included += 1
        if sup is None or ratio > sup:
            sup, sup_arg = ratio, r.n
    excluded = len(rows) - included
    rep = RieszReport(sup, sup_arg, included, excluded, len(rows), per_n)
    if beta is not None:
        rep.beta_ratio_min = beta.ratio_min
        rep.beta_ratio_max = beta.ratio_max
    rep.verdict_hint = _verdict(rep)
    return rep


def _verdict(rep: RieszReport) -> str:
    if rep.nonzero_gamma_count == 0:
        return VERDICT_VACUOUS
    run = rep.running_sup()
    half = len(run) // 2
    if half == 0:
        return VERDICT_BOUNDED
    sup_lower = run[half - 1][1]
    sup_full = run[-1][1]
    if sup_lower > 0 and sup_full > GROWTH_FACTOR * sup_lower:
        return VERDICT_GROWING
    return VERDICT_BOUNDED


@dataclass
class BetaRatioResult:
    ratio_min: float | None
    ratio_max: float | None
    included_count: int
    zero_denominator_count: int
    below_floor_count: int
    per_n: list = field(default_factory=list)   # (n, ratio or None, |b-|, |b+|)

    def to_jsonable(self) -> dict:
        return {
            "ratio_min": self.ratio_min,
            "ratio_max": self.ratio_max,
            "included_count": self.included_count,
            "zero_denominator_count": self.zero_denominator_count,
            "below_floor_count": self.below_floor_count,
            "per_n": [
                {"n": n, "ratio": r, "abs_beta_minus": bm, "abs_beta_plus": bp}
                for n, r, bm, bp in sorted(self.per_n, key=lambda t: t[0])
            ],
        }


def _default_K(n_max: int) -> int:
    # keep every requested n inside the matrix trust window
    return max(48, (4 * n_max) // 3 + 6)


def beta_ratio_test(V: FourierPotential, n_range, K: int | None = None,
                    table: SpectralTable | None = None) -> BetaRatioResult:
    """Finite-range proxies for liminf/limsup of |beta^-(z*)|/|beta^+(z*)|.

    z* is a pair quantity, so no general boundary condition enters.  When a
    deviation table is supplied its z* values are reused; otherwise the pair
    comes from the matrix backend.  Rows with both couplings under the noise
    floor are skipped (below_floor_count); rows with a vanishing denominator
    but a live numerator are the interesting degenerate ones and are flagged.
    """
    n_min, n_max = int(n_range[0]), int(n_range[1])
    ns = list(range(n_min, n_max + 1))
    K = K or _default_K(max(abs(n_min), abs(n_max)))
    gms = {}
    per_n = []
    rmin = rmax = None
    included = zero_den = below = 0
    for n in ns:
        p = abs(n) % 2
        if p not in gms:
            gms[p] = assemble_galerkin(V, p, K)
        gm = gms[p]
        if table is not None:
            try:
                row = table.row(n)
            except KeyError:
                row = None
            z_star = row.z_star if row is not None and row.error is None else None
        else:
            z_star = None
        if z_star is None:
            lm, lp, _, _ = gm.pair_near(n)
            z_star = (0.5 * (lp + lm) - n if abs(lp - lm) > cluster_tol(n)
                      else lp - n)
        S = feshbach_reduce(gm, n, z_star)
        bm, bp = abs(S.beta_minus), abs(S.beta_plus)
        floor = vacuous_floor(n)
        if bm < floor and bp < floor:
            below += 1
            per_n.append((n, None, bm, bp))
            continue
        if bp == 0.0:
            zero_den += 1
            per_n.append((n, None, bm, bp))
            continue
        ratio = bm / bp
        included += 1
        per_n.append((n, ratio, bm, bp))
        rmin = ratio if rmin is None else min(rmin, ratio)
        rmax = ratio if rmax is None else max(rmax, ratio)
    return BetaRatioResult(rmin, rmax, included, zero_den, below, per_n)
