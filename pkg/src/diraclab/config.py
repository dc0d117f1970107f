"""Run configuration: JSON parsing, validation, digests.

One JSON document drives a run.  Complex numbers are written as a plain
number or a two-element [re, im] array.  Example:

    {
      "command_defaults": {"M": null},
      "potential": {"family": "analytic", "c": 0.35, "r": 0.6, "K": 40},
      "bc": {"a": 1, "b": 0, "d": 1},
      "n_range": [10, 40],
      "K": 64
    }
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .bc import BoundaryCondition, general_bc, per_minus, per_plus
from .errors import ConfigError, DiracLabError
from .galerkin import trust_limit
from .potential import FourierPotential, generate_potential


def _as_complex(v, where: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, complex):
        return v
    raise ConfigError(f"{where}: expected number or [re, im], got {v!r}")


def parse_bc(spec) -> BoundaryCondition:
    if isinstance(spec, BoundaryCondition):
        return spec
    if isinstance(spec, str):
        tag = spec.strip().lower()
        if tag in ("per+", "periodic"):
            return per_plus()
        if tag in ("per-", "antiperiodic"):
            return per_minus()
        raise ConfigError(f"unknown bc name {spec!r} (use per+, per-, or parameters)")
    if isinstance(spec, (list, tuple)):
        if len(spec) == 3:
            a, b, d = (_as_complex(v, "bc") for v in spec)
            c = -b
        elif len(spec) == 4:
            a, b, c, d = (_as_complex(v, "bc") for v in spec)
        else:
            raise ConfigError("bc list must be [a, b, d] or [a, b, c, d]")
    elif isinstance(spec, dict):
        try:
            a = _as_complex(spec["a"], "bc.a")
            b = _as_complex(spec["b"], "bc.b")
            d = _as_complex(spec["d"], "bc.d")
        except KeyError as exc:
            raise ConfigError(f"bc spec missing field {exc}") from None
        c = _as_complex(spec["c"], "bc.c") if "c" in spec else -b
    else:
        raise ConfigError(f"cannot parse bc from {spec!r}")
    try:
        return general_bc(a, b, c, d)
    except DiracLabError as exc:
        raise ConfigError(f"invalid bc parameters: {exc}") from None


def _coeff_table(obj, where: str) -> dict:
    out = {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected {{k: coeff}} table")
    for k, v in obj.items():
        try:
            ik = int(k)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: non-integer index {k!r}") from None
        out[ik] = _as_complex(v, f"{where}[{k}]")
    return out


def parse_potential(spec) -> FourierPotential:
    if isinstance(spec, FourierPotential):
        return spec
    if spec is None or spec == 0 or spec == {}:
        return FourierPotential(0, {}, {})
    if not isinstance(spec, dict):
        raise ConfigError(f"cannot parse potential from {spec!r}")
    if "file" in spec:
        with open(spec["file"]) as fh:
            return parse_potential(json.load(fh))
    if "family" in spec:
        params = {k: v for k, v in spec.items() if k != "family"}
        for key in ("p", "q"):
            if key in params:
                params[key] = _coeff_table(params[key], f"potential.{key}")
        try:
            return generate_potential(spec["family"], **params)
        except (DiracLabError, TypeError) as exc:
            raise ConfigError(f"potential generator failed: {exc}") from None
    if "p" in spec or "q" in spec:
        p = _coeff_table(spec.get("p", {}), "potential.p")
        q = _coeff_table(spec.get("q", {}), "potential.q")
        K = max([abs(k) for k in list(p) + list(q)], default=0)
        return FourierPotential(K, p, q)
    raise ConfigError("potential spec needs 'family', 'p'/'q', or 'file'")


DEFAULTS = {
    "K": 64,
    "tol": 1e-12,
    "contour_nodes": 256,
    "ode_steps": None,
    "workers": 1,
    "grid_n": 4096,
    "M": None,
    "gamma_floor": None,
    "cache": True,
}


@dataclass
class RunConfig:
    potential: FourierPotential
    bc: BoundaryCondition
    n_range: tuple
    K: int = 64
    tol: float = 1e-12
    contour_nodes: int = 256
    ode_steps: int | None = None
    workers: int = 1
    grid_n: int = 4096
    M: float | None = None
    gamma_floor: float | None = None
    cache: bool = True
    weights: list = field(default_factory=list)
    out: str = "diraclab-out"
    raw: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        n_min, n_max = self.n_range
        if n_min > n_max:
            raise ConfigError(f"n_range [{n_min}, {n_max}]: n_min exceeds n_max")
        lim = trust_limit(self.K)
        worst = max(abs(n_min), abs(n_max))
        if worst > lim:
            raise ConfigError(
                f"trust window violated: max |n| = {worst} exceeds "
                f"K - K//4 = {lim} for K = {self.K}; raise K or shrink n_range"
            )
        for name in ("tol",):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("K", "contour_nodes", "grid_n"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be a positive integer")
        if self.ode_steps is not None and self.ode_steps < 16:
            raise ConfigError("ode_steps must be >= 16 when given")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.M is not None and self.M <= 1:
            raise ConfigError("M must exceed 1")
        if self.grid_n % 2 != 0:
            raise ConfigError("grid_n must be even (composite Simpson rule)")
        return self

    def effective(self) -> dict:
        """Canonical, JSON-ready view of everything that affects results."""
        return {
            "potential": self.potential.to_jsonable(),
            "potential_digest": self.potential.digest(),
            "bc": self.bc.to_jsonable(),
            "n_range": [int(self.n_range[0]), int(self.n_range[1])],
            "K": self.K,
            "tol": self.tol,
            "contour_nodes": self.contour_nodes,
            "ode_steps": self.ode_steps,
            "grid_n": self.grid_n,
            "M": self.M,
            "gamma_floor": self.gamma_floor,
            "weights": self.weights,
        }

    def digest(self, command: str = "") -> str:
        blob = json.dumps({"command": command, **self.effective()},
                          sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(doc, out: str | None = None, workers: int | None = None,
                cache: bool | None = None) -> RunConfig:
    """Build a validated RunConfig from a parsed JSON document (a dict)."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    known = {"potential", "bc", "n_range", "weights", "out"} | set(DEFAULTS)
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "n_range" not in doc:
        raise ConfigError("config needs n_range: [n_min, n_max]")
    nr = doc["n_range"]
    if not (isinstance(nr, (list, tuple)) and len(nr) == 2):
        raise ConfigError("n_range must be a two-element [n_min, n_max]")
    V = parse_potential(doc.get("potential"))
    bc = parse_bc(doc.get("bc", "per+"))
    kw = {}
    for key, dflt in DEFAULTS.items():
        val = doc.get(key, dflt)
        if val is not None and key in ("K", "contour_nodes", "ode_steps",
                                       "workers", "grid_n"):
            if not isinstance(val, int) or isinstance(val, bool):
                raise ConfigError(f"{key} must be an integer")
        if val is not None and key in ("tol", "M", "gamma_floor"):
            if not isinstance(val, (int, float)) or isinstance(val, bool) \
                    or not math.isfinite(val):
                raise ConfigError(f"{key} must be a finite number")
            val = float(val)
        kw[key] = val
    weights = doc.get("weights", [])
    if not isinstance(weights, list):
        raise ConfigError("weights must be a list of weight specs")
    cfg = RunConfig(V, bc, (int(nr[0]), int(nr[1])), weights=weights,
                    out=doc.get("out", "diraclab-out"), raw=doc, **kw)
    if out is not None:
        cfg.out = out
    if workers is not None:
        cfg.workers = workers
    if cache is not None:
        cfg.cache = cache
    return cfg.validate()


def load_config_file(path: str, **overrides) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    return load_config(doc, **overrides)
