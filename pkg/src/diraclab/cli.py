"""Command-line front end.

    diraclab <command> --config cfg.json [--out DIR] [--workers K] [--no-cache]

Commands: spectrum, deviations, feshbach, theorem3, riesz, prooflab,
smoothness.  Every command writes <command>.json (payload + metadata),
<command>.csv, the echoed effective config, and a figure where one is
defined.  Exit status: 0 success, 1 configuration error, 2 partial per-row
failures (failures.json lists them).

Results are deterministic for a given config: payloads are cached under
<out>/.cache keyed by a digest of the effective config, and a cache hit
re-emits byte-identical artifacts.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import RunConfig, load_config_file
from .errors import ConfigError, DiracLabError, PartialFailure
from .pipeline import LabRun
from .reporting import ResultCache, write_json
from . import plots

COMMANDS = ("spectrum", "deviations", "feshbach", "theorem3", "riesz",
            "prooflab", "smoothness")

# deviations tolerates per± (the delta column just stays empty); these
# three are meaningless without a bc-relative eigenvalue
_GENERAL_ONLY = {"theorem3", "prooflab", "riesz"}


def _fmt(x) -> str:
    if x is None:
        return ""
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        x = x.item()  # numpy scalars repr as np.float64(...), unusable in CSV
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _re_im(pair):
    if pair is None:
        return ("", "")
    return (repr(float(pair[0])), repr(float(pair[1])))


def _table_failures(table_json) -> list:
    return [{"n": r["n"], "error": r["error"]}
            for r in table_json["rows"] if r["error"] is not None]


# -- payload builders (cold path only) -------------------------------------------


def _cmd_spectrum(run: LabRun, cfg: RunConfig) -> dict:
    table = run.table()
    tj = table.to_jsonable()
    return {
        "rows": tj["rows"],
        "csv": table.to_csv(),
        "failures": _table_failures(tj),
        "plot": "deviation_magnitudes",
    }


def _cmd_deviations(run: LabRun, cfg: RunConfig) -> dict:
    table = run.table()
    tj = table.to_jsonable()
    header = ["n", "re_gamma", "im_gamma", "re_delta", "im_delta", "abs_Delta",
              "re_z_star", "im_z_star", "pair_source", "double_flag", "error"]
    rows = []
    for r in sorted(tj["rows"], key=lambda r: r["n"]):
        g = _re_im(r["gamma"])
        d = _re_im(r["delta"])
        z = _re_im(r["z_star"])
        rows.append([r["n"], g[0], g[1], d[0], d[1], _fmt(r["Delta"]),
                     z[0], z[1], r["pair_source"], int(r["double_flag"]),
                     r["error"] or ""])
    return {
        "rows": tj["rows"],
        "csv": _csv_text(header, rows),
        "failures": _table_failures(tj),
        "plot": "deviation_magnitudes",
    }


def _cmd_feshbach(run: LabRun, cfg: RunConfig) -> dict:
    table = run.table()
    rows, failures = [], []
    for r in table.rows:
        if r.error is not None:
            failures.append({"n": r.n, "error": r.error})
            continue
        try:
            S = run.smatrix_at(r.n, r.z_star)
            res = run.basic_residuals(r.n)
        except DiracLabError as exc:
            failures.append({"n": r.n, "error": f"{type(exc).__name__}: {exc}"})
            continue
        rows.append({
            "n": r.n,
            "z_star": [r.z_star.real, r.z_star.imag],
            "z_used": [S.z_used.real, S.z_used.imag],
            "alpha": [S.alpha.real, S.alpha.imag],
            "beta_minus": [S.beta_minus.real, S.beta_minus.imag],
            "beta_plus": [S.beta_plus.real, S.beta_plus.imag],
            "diag_asymmetry": S.diag_asymmetry,
            "retried": S.retried,
            "residual_plus": res["residual_plus"],
            "residual_minus": res["residual_minus"],
        })
    header = ["n", "re_z_star", "im_z_star", "re_alpha", "im_alpha",
              "re_beta_minus", "im_beta_minus", "re_beta_plus", "im_beta_plus",
              "diag_asymmetry", "retried", "residual_plus", "residual_minus"]
    csv_rows = []
    for r in sorted(rows, key=lambda r: r["n"]):
        z = _re_im(r["z_star"])
        a = _re_im(r["alpha"])
        bm = _re_im(r["beta_minus"])
        bp = _re_im(r["beta_plus"])
        csv_rows.append([r["n"], z[0], z[1], a[0], a[1], bm[0], bm[1],
                         bp[0], bp[1], _fmt(r["diag_asymmetry"]),
                         int(r["retried"]), _fmt(r["residual_plus"]),
                         _fmt(r["residual_minus"])])
    return {"rows": rows, "csv": _csv_text(header, csv_rows),
            "failures": failures, "plot": None}


def _cmd_theorem3(run: LabRun, cfg: RunConfig) -> dict:
    table = run.table()
    rows, failures = [], []
    for r in table.rows:
        if r.error is not None:
            failures.append({"n": r.n, "error": r.error})
            continue
        try:
            t3 = run.theorem3(r.n)
        except DiracLabError as exc:
            failures.append({"n": r.n, "error": f"{type(exc).__name__}: {exc}"})
            continue
        rows.append({
            "n": t3.n, "num": t3.num, "den": t3.den, "ratio": t3.ratio,
            "vacuous": t3.vacuous,
            "abs_B_plus": abs(t3.B_plus), "abs_B_minus": abs(t3.B_minus),
        })
    defined = [r["ratio"] for r in rows if r["ratio"] is not None]
    summary = {
        "rows_total": len(rows),
        "rows_defined": len(defined),
        "rows_vacuous": sum(1 for r in rows if r["vacuous"]),
        "ratio_min": min(defined) if defined else None,
        "ratio_max": max(defined) if defined else None,
        "window": (max(defined) / min(defined)) if defined else None,
    }
    header = ["n", "num", "den", "ratio", "vacuous", "abs_B_plus", "abs_B_minus"]
    csv_rows = [[r["n"], _fmt(r["num"]), _fmt(r["den"]), _fmt(r["ratio"]),
                 int(r["vacuous"]), _fmt(r["abs_B_plus"]), _fmt(r["abs_B_minus"])]
                for r in sorted(rows, key=lambda r: r["n"])]
    return {"rows": rows, "summary": summary,
            "csv": _csv_text(header, csv_rows), "failures": failures,
            "plot": "theorem3_ratios"}


def _cmd_riesz(run: LabRun, cfg: RunConfig) -> dict:
    table = run.table()
    rep = run.riesz()
    rj = rep.to_jsonable()
    bj = run.beta().to_jsonable()
    header = ["n", "abs_delta_over_abs_gamma", "abs_gamma", "abs_delta"]
    csv_rows = [[e["n"], _fmt(e["ratio"]), _fmt(e["abs_gamma"]),
                 _fmt(e["abs_delta"])] for e in rj["per_n"]]
    return {"report": rj, "beta_ratio": bj,
            "csv": _csv_text(header, csv_rows),
            "failures": _table_failures(table.to_jsonable()),
            "plot": "riesz_ratios"}


def _cmd_prooflab(run: LabRun, cfg: RunConfig) -> dict:
    bundles = run.bundles()
    suite = run.suite()
    rows, failures = [], []
    for b in bundles:
        if b.get("error") is not None:
            failures.append({"n": b["n"], "error": b["error"]})
            continue
        jp = b["jordan"]
        pr = b["pairing"]
        rows.append({
            "n": b["n"],
            "jordan_residual": jp.residual,
            "subspace_source": jp.subspace_source,
            "abs_xi": abs(jp.xi),
            "kappa": jp.kappa,
            "kappa_g": pr.kappa_g,
            "abs_ell0_G": abs(pr.ell0_G),
            "abs_ell1_G": abs(pr.ell1_G),
            "ilker6_residual": pr.ilker6_residual,
            "tau_inv_pairing": [pr.tau_inv_pairing.real, pr.tau_inv_pairing.imag],
            "C_target": [pr.C_target.real, pr.C_target.imag],
            "lemma_det": [pr.lemma_det.real, pr.lemma_det.imag],
            "regime": b["ineq"].regime,
            "checks_hold": b["ineq"].all_hold,
        })
    header = ["n", "regime", "checks_hold", "jordan_residual", "abs_xi",
              "kappa", "kappa_g", "abs_ell0_G", "abs_ell1_G",
              "ilker6_residual", "re_tau_inv", "im_tau_inv", "re_C", "im_C"]
    csv_rows = []
    for r in sorted(rows, key=lambda r: r["n"]):
        ti = _re_im(r["tau_inv_pairing"])
        cc = _re_im(r["C_target"])
        csv_rows.append([r["n"], r["regime"], int(r["checks_hold"]),
                         _fmt(r["jordan_residual"]), _fmt(r["abs_xi"]),
                         _fmt(r["kappa"]), _fmt(r["kappa_g"]),
                         _fmt(r["abs_ell0_G"]), _fmt(r["abs_ell1_G"]),
                         _fmt(r["ilker6_residual"]), ti[0], ti[1], cc[0], cc[1]])
    return {"rows": rows, "suite": suite.to_jsonable(),
            "csv": _csv_text(header, csv_rows), "failures": failures,
            "plot": None}


def _cmd_smoothness(run: LabRun, cfg: RunConfig) -> dict:
    table = run.table()
    tj = table.to_jsonable()
    seq = run.deviation_sequence()
    try:
        fit = run.decay_report()
    except DiracLabError as exc:
        fit = {"error": f"{type(exc).__name__}: {exc}"}
    weights = run.weight_report(cfg.weights) if cfg.weights else []
    header = ["n", "abs_Delta"]
    csv_rows = [[n, _fmt(seq[n])] for n in sorted(seq)]
    return {
        "deltas": [{"n": n, "abs_Delta": seq[n]} for n in sorted(seq)],
        "decay_fit": fit,
        "weights": weights,
        "csv": _csv_text(header, csv_rows),
        "failures": _table_failures(tj),
        "plot": "decay",
    }


_BUILDERS = {
    "spectrum": _cmd_spectrum,
    "deviations": _cmd_deviations,
    "feshbach": _cmd_feshbach,
    "theorem3": _cmd_theorem3,
    "riesz": _cmd_riesz,
    "prooflab": _cmd_prooflab,
    "smoothness": _cmd_smoothness,
}


def _emit_plot(payload: dict, command: str, out_dir: str) -> str | None:
    import os

    kind = payload.get("plot")
    if kind is None:
        return None
    path = os.path.join(out_dir, f"{command}.svg")
    if kind == "deviation_magnitudes":
        rows = [r for r in payload["rows"] if r["error"] is None]
        for r in rows:
            r.setdefault("abs_Delta", r["Delta"])
        return plots.plot_deviation_magnitudes(rows, path)
    if kind == "theorem3_ratios":
        return plots.plot_theorem3_ratios(payload["rows"], path)
    if kind == "riesz_ratios":
        return plots.plot_riesz_ratios(payload["report"]["per_n"], path)
    if kind == "decay":
        fit = payload["decay_fit"]
        ns = [d["n"] for d in payload["deltas"]]
        ds = [d["abs_Delta"] for d in payload["deltas"]]
        return plots.plot_decay_fit(ns, ds, None if "error" in fit else fit, path)
    return None


def execute(command: str, cfg: RunConfig) -> int:
    """Run one command against a validated config; returns the exit status."""
    import os

    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; choose from {COMMANDS}")
    if command in _GENERAL_ONLY and not cfg.bc.is_general:
        raise ConfigError(
            f"command '{command}' needs a general boundary condition "
            f"(got {cfg.bc.label()}): the deviation delta is bc-relative"
        )
    os.makedirs(cfg.out, exist_ok=True)
    cache = ResultCache(cfg.out, cfg.cache)
    key = cfg.digest(command)
    payload = cache.get(key)
    if payload is None:
        run = LabRun.from_config(cfg)
        payload = _BUILDERS[command](run, cfg)
        payload["meta"] = {
            "command": command,
            "config_digest": key,
            "potential_digest": cfg.potential.digest(),
            "version": __version__,
        }
        cache.put(key, payload)

    json_path = os.path.join(cfg.out, f"{command}.json")
    write_json(json_path, payload)
    written = [json_path]
    csv_path = os.path.join(cfg.out, f"{command}.csv")
    with open(csv_path + ".tmp", "w") as fh:
        fh.write(payload["csv"])
    os.replace(csv_path + ".tmp", csv_path)
    written.append(csv_path)
    cfg_path = os.path.join(cfg.out, "config.effective.json")
    write_json(cfg_path, {"command": command, "digest": key, **cfg.effective()})
    written.append(cfg_path)
    plot_path = _emit_plot(payload, command, cfg.out)
    if plot_path:
        written.append(plot_path)

    failures = payload.get("failures") or []
    if failures:
        fail_path = os.path.join(cfg.out, "failures.json")
        write_json(fail_path, {"command": command, "count": len(failures),
                               "rows": failures})
        written.append(fail_path)
    for p in written:
        print(f"wrote {p}")
    if failures:
        print(f"{command}: {len(failures)} row(s) failed; see failures.json",
              file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="diraclab",
        description="spectral laboratory for 1D Dirac operators "
                    "with periodic, antiperiodic, and general two-point "
                    "boundary conditions",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--no-cache", action="store_true")
    parser.add_argument("--version", action="version", version=__version__)
    args = parser.parse_args(argv)
    try:
        cfg = load_config_file(args.config, out=args.out, workers=args.workers,
                               cache=False if args.no_cache else None)
        return execute(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except PartialFailure as exc:
        print(f"partial failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
