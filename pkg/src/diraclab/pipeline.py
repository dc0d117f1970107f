"""Run orchestration: one shared context per (potential, bc, range, K).

LabRun memoizes the expensive intermediates (parity matrices, the deviation
table, per-row reductions) so the command layer and the one-shot convenience
wrappers below never recompute them.  Per-row work is distributed over a
fork pool when workers > 1; results are reduced in n-order, so worker count
never changes output bytes.
"""
from __future__ import annotations

import os

from .bc import BoundaryCondition
from .config import RunConfig
from .errors import ConfigError
from .feshbach import Theorem3Row
from .feshbach import basic_equation_residual as _basic_residual_row
from .feshbach import feshbach_reduce
from .feshbach import theorem3_ratio as _theorem3_row
from .galerkin import assemble_galerkin, trust_limit
from .potential import FourierPotential, decay_fit, h_omega_norm, make_weight, \
    check_submultiplicative
from .prooflab import JordanPair, PairingReport, SuiteReport, default_M, \
    evaluate_row, jordan_pair as _jordan_pair_row, m_threshold, \
    pairing_report as _pairing_row
from .riesz import BetaRatioResult, RieszReport, beta_ratio_test as _beta_test, \
    riesz_criterion
from .spectral import SpectralTable, build_spectral_table, galerkin_pair_map

# eigenvalue localization bottoms out near 1e-12 (rootfinding tol, matrix
# eigensolve noise); deviations below this are flat instrument noise and are
# excluded from decay fits by default
DECAY_FIT_FLOOR = 1e-11

# fork-pool context: set in the parent right before the fork so workers see it
_POOL_CTX: dict = {}


def _suite_worker(n):
    run: LabRun = _POOL_CTX["run"]
    return run._row_bundle(n)


class LabRun:
    def __init__(self, V: FourierPotential, bc: BoundaryCondition, n_range,
                 K: int = 64, tol: float = 1e-12, contour_nodes: int = 256,
                 ode_steps: int | None = None, workers: int = 1,
                 M: float | None = None, gamma_floor: float | None = None,
                 grid_n: int = 4096):
        n_min, n_max = int(n_range[0]), int(n_range[1])
        worst = max(abs(n_min), abs(n_max))
        if worst > trust_limit(K):
            raise ConfigError(
                f"trust window violated: max |n| = {worst} exceeds "
                f"K - K//4 = {trust_limit(K)} for K = {K}"
            )
        self.V = V
        self.bc = bc
        self.n_range = (n_min, n_max)
        self.K = K
        self.tol = tol
        self.contour_nodes = contour_nodes
        self.ode_steps = ode_steps
        self.workers = workers
        self.M = M if M is not None else (default_M(bc) if bc.is_general else None)
        self.gamma_floor = gamma_floor
        self.grid_n = grid_n
        self._gms: dict = {}
        self._table: SpectralTable | None = None
        self._bundles: dict = {}
        self._beta: BetaRatioResult | None = None

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "LabRun":
        return cls(cfg.potential, cfg.bc, cfg.n_range, K=cfg.K, tol=cfg.tol,
                   contour_nodes=cfg.contour_nodes, ode_steps=cfg.ode_steps,
                   workers=cfg.workers, M=cfg.M, gamma_floor=cfg.gamma_floor,
                   grid_n=cfg.grid_n)

    @property
    def ns(self) -> list:
        return list(range(self.n_range[0], self.n_range[1] + 1))

    def gm(self, parity: int):
        if parity not in self._gms:
            self._gms[parity] = assemble_galerkin(self.V, parity, self.K)
        return self._gms[parity]

    def table(self) -> SpectralTable:
        if self._table is None:
            pairs = galerkin_pair_map(self.V, self.ns, self.K)
            self._table = build_spectral_table(
                self.V, self.bc, self.n_range, K=None, tol=self.tol,
                contour_nodes=self.contour_nodes, workers=self.workers,
                galerkin_pairs=pairs, ode_steps=self.ode_steps,
            )
        return self._table

    # -- per-row reductions ----------------------------------------------------

    def smatrix_at(self, n: int, z: complex):
        return feshbach_reduce(self.gm(abs(n) % 2), n, z)

    def basic_residuals(self, n: int) -> dict:
        row = self.table().row(n)
        if row.error is not None:
            raise ValueError(f"row n={n} failed: {row.error}")
        return _basic_residual_row(self.gm(abs(n) % 2), row)

    def theorem3(self, n: int) -> Theorem3Row:
        row = self.table().row(n)
        if row.error is not None:
            raise ValueError(f"row n={n} failed: {row.error}")
        return _theorem3_row(self.gm(abs(n) % 2), row)

    def jordan(self, n: int) -> JordanPair:
        return self._bundle(n)["jordan"]

    def pairing(self, n: int) -> PairingReport:
        bundle = self._bundle(n)
        if bundle["pairing"] is None:
            raise ValueError("pairing_report needs a general bc")
        return bundle["pairing"]

    def _row_bundle(self, n: int) -> dict:
        """Everything per-row the suite needs; runs inside pool workers."""
        row = self.table().row(n)
        if row.error is not None:
            return {"n": n, "error": row.error}
        gm = self.gm(abs(n) % 2)
        out: dict = {"n": n, "error": None}
        try:
            jp = _jordan_pair_row(gm, row)
            out["jordan"] = jp
            if self.bc.is_general:
                out["t3"] = _theorem3_row(gm, row)
                out["pairing"] = _pairing_row(self.V, self.bc, gm, row, jp,
                                              self.grid_n)
                out["ineq"] = evaluate_row(self.bc, self.M, row, out["t3"],
                                           jp, out["pairing"])
            else:
                out["t3"] = None
                out["pairing"] = None
                out["ineq"] = None
            out["basic"] = _basic_residual_row(gm, row)
        except Exception as exc:
            return {"n": n, "error": f"{type(exc).__name__}: {exc}"}
        return out

    def _bundle(self, n: int) -> dict:
        if n not in self._bundles:
            b = self._row_bundle(n)
            if b["error"] is not None:
                raise ValueError(f"row n={n} failed: {b['error']}")
            self._bundles[n] = b
        return self._bundles[n]

    def bundles(self) -> list:
        """Row bundles for the whole range, fanned out over the pool."""
        missing = [n for n in self.ns if n not in self._bundles]
        if missing:
            self.table()  # materialize before forking so workers inherit it
            for p in set(abs(n) % 2 for n in missing):
                self.gm(p)
            if self.workers > 1 and len(missing) > 1 and hasattr(os, "fork"):
                import multiprocessing

                _POOL_CTX["run"] = self
                try:
                    ctx = multiprocessing.get_context("fork")
                    with ctx.Pool(self.workers) as pool:
                        results = pool.map(_suite_worker, missing)
                finally:
                    _POOL_CTX.clear()
                for b in results:
                    self._bundles[b["n"]] = b
            else:
                for n in missing:
                    self._bundles[n] = self._row_bundle(n)
        return [self._bundles[n] for n in self.ns]

    # -- aggregate reports -------------------------------------------------------

    def suite(self) -> SuiteReport:
        if not self.bc.is_general:
            raise ValueError("the inequality suite needs a general bc")
        rep = SuiteReport(self.bc.label(), self.M, m_threshold(self.bc))
        for b in self.bundles():
            if b.get("error") is None and b.get("ineq") is not None:
                rep.rows.append(b["ineq"])
        return rep

    def beta(self) -> BetaRatioResult:
        if self._beta is None:
            self._beta = _beta_test(self.V, self.n_range, K=self.K,
                                    table=self.table())
        return self._beta

    def riesz(self) -> RieszReport:
        return riesz_criterion(self.table(), self.gamma_floor, beta=self.beta())

    def deviation_sequence(self) -> dict:
        return {r.n: r.Delta for r in self.table().ok_rows()}

    def decay_report(self, floor: float = DECAY_FIT_FLOOR) -> dict:
        """decay_fit over the positive-n deviations (needs >= 8 live rows)."""
        seq = {n: d for n, d in self.deviation_sequence().items() if n > 0}
        fit = decay_fit(seq, floor=floor)
        return {
            "class": fit.klass,
            "rate": fit.rate,
            "residual": fit.residual,
            "residual_other": fit.residual_other,
            "n_used": fit.n_used,
            "n_dropped": fit.n_dropped,
        }

    def weight_report(self, weight_specs) -> list:
        """Theorem-1-direction diagnostics per weight: potential norm vs
        weighted deviation partial sums (V in H(Omega) => (Delta_n) in l2(Omega))."""
        out = []
        seq = self.deviation_sequence()
        for spec in weight_specs:
            w = make_weight(spec["class"], **{k: v for k, v in spec.items()
                                              if k != "class"})
            ok, witness = check_submultiplicative(w, 64)
            vnorm = h_omega_norm(self.V, w)
            partial = 0.0
            partials = []
            for n in sorted(seq, key=lambda n: (abs(n), n)):
                partial += float(w(abs(n))) ** 2 * seq[n] ** 2
                partials.append((n, partial))
            out.append({
                "weight": spec,
                "submultiplicative": ok,
                "witness": witness,
                "potential_norm": vnorm,
                "weighted_sum_final": partial,
                "weighted_partials": partials[-8:],
                "direction": "V in H(Omega) => weighted deviations square-summable",
            })
        return out


# -- one-shot wrappers with catalogue signatures ---------------------------------


def _mini_run(V, bc, n, K=None) -> LabRun:
    K = K or max(48, (4 * abs(n)) // 3 + 6)
    return LabRun(V, bc, (n, n), K=K)


def basic_equation_residual(V: FourierPotential, n: int, K: int | None = None,
                            run: LabRun | None = None) -> dict:
    """Residuals of (z - alpha)^2 = b+ b- at z+ and z- for one n."""
    from .bc import per_minus, per_plus

    if run is None:
        bc = per_plus() if n % 2 == 0 else per_minus()
        run = _mini_run(V, bc, n, K)
    return run.basic_residuals(n)


def theorem3_ratio(V: FourierPotential, bc: BoundaryCondition, n: int,
                   K: int | None = None, run: LabRun | None = None) -> Theorem3Row:
    if run is None:
        run = _mini_run(V, bc, n, K)
    return run.theorem3(n)


def jordan_pair(V: FourierPotential, n: int, K: int | None = None,
                run: LabRun | None = None) -> JordanPair:
    from .bc import per_minus, per_plus

    if run is None:
        bc = per_plus() if n % 2 == 0 else per_minus()
        run = _mini_run(V, bc, n, K)
    return run.jordan(n)


def pairing_report(V: FourierPotential, bc: BoundaryCondition, n: int,
                   K: int | None = None, run: LabRun | None = None) -> PairingReport:
    if run is None:
        run = _mini_run(V, bc, n, K)
    return run.pairing(n)


def inequality_suite(V: FourierPotential, bc: BoundaryCondition, n_range,
                     M: float | None = None, K: int = 64, workers: int = 1,
                     **kw) -> SuiteReport:
    run = LabRun(V, bc, n_range, K=K, M=M, workers=workers, **kw)
    return run.suite()
