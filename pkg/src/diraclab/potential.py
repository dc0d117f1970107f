"""Fourier potentials, weight sequences, and decay-rate fits.

Coefficient convention
----------------------
A potential entry v is pi-periodic and expanded as

    v(x) = sum_k v(k) * exp(2i*k*x),
    v(k) = (1/pi) * integral_0^pi v(x) * exp(-2i*k*x) dx.

A FourierPotential stores the two coefficient tables p (upper-right entry)
and q (lower-left entry) on |k| <= K; all coefficients beyond K are zero by
construction, so every potential handled numerically is a trigonometric
polynomial.  The adjoint operator carries the tables
p*(k) = conj(q(-k)), q*(k) = conj(p(-k)).
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, GridTooCoarse, TooFewPoints


def _canon_table(table):
    out = {}
    for k, v in table.items():
        v = complex(v)
        if v != 0:
            out[int(k)] = v
    return out


@dataclass(frozen=True)
class FourierPotential:
    """Off-diagonal matrix potential given by two coefficient tables."""

    K: int
    p: dict = field(default_factory=dict)
    q: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "p", _canon_table(self.p))
        object.__setattr__(self, "q", _canon_table(self.q))
        if self.K < 0:
            raise BadParams("K must be nonnegative")
        for name, tab in (("p", self.p), ("q", self.q)):
            for k in tab:
                if abs(k) > self.K:
                    raise BadParams(f"{name}({k}) outside truncation |k| <= {self.K}")

    # -- basic queries ---------------------------------------------------

    def pk(self, k: int) -> complex:
        return self.p.get(int(k), 0j)

    def qk(self, k: int) -> complex:
        return self.q.get(int(k), 0j)

    @property
    def is_zero(self) -> bool:
        return not self.p and not self.q

    @property
    def is_selfadjoint(self) -> bool:
        """True when q(k) = conj(p(-k)) within 1e-12 for all k."""
        ks = set(self.p) | {-k for k in self.q}
        return all(abs(self.qk(-k) - self.pk(k).conjugate()) <= 1e-12 for k in ks)

    def adjoint(self) -> "FourierPotential":
        """Coefficient tables of the adjoint operator's potential."""
        p_adj = {-k: v.conjugate() for k, v in self.q.items()}
        q_adj = {-k: v.conjugate() for k, v in self.p.items()}
        return FourierPotential(self.K, p_adj, q_adj)

    def coeff_array(self, which: str, half_range: int) -> np.ndarray:
        """Dense coefficient lookup on [-half_range, half_range]."""
        tab = self.p if which == "p" else self.q
        out = np.zeros(2 * half_range + 1, dtype=complex)
        for k, v in tab.items():
            if abs(k) <= half_range:
                out[k + half_range] = v
        return out

    # -- synthesis --------------------------------------------------------

    def sample_p(self, xs: np.ndarray) -> np.ndarray:
        return _synth(self.p, xs)

    def sample_q(self, xs: np.ndarray) -> np.ndarray:
        return _synth(self.q, xs)

    # -- identity ----------------------------------------------------------

    def digest(self) -> str:
        payload = {
            "K": self.K,
            "p": [[k, repr(v.real), repr(v.imag)] for k, v in sorted(self.p.items())],
            "q": [[k, repr(v.real), repr(v.imag)] for k, v in sorted(self.q.items())],
        }
        blob = json.dumps(payload, separators=(",", ":"), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_jsonable(self) -> dict:
        return {
            "K": self.K,
            "p": [[k, v.real, v.imag] for k, v in sorted(self.p.items())],
            "q": [[k, v.real, v.imag] for k, v in sorted(self.q.items())],
        }

    @staticmethod
    def from_jsonable(obj: dict) -> "FourierPotential":
        p = {int(k): complex(re, im) for k, re, im in obj.get("p", [])}
        q = {int(k): complex(re, im) for k, re, im in obj.get("q", [])}
        return FourierPotential(int(obj["K"]), p, q)


def _synth(table: dict, xs: np.ndarray) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if not table:
        return np.zeros(xs.shape, dtype=complex)
    ks = np.array(sorted(table))
    vals = np.array([table[k] for k in ks])
    return np.exp(2j * xs[..., None] * ks) @ vals


def fourier_coeffs_from_samples(samples: np.ndarray, K: int) -> dict:
    """Recover coefficients with |k| <= K from uniform samples of one entry.

    samples[j] = v(j*pi/N) for j = 0..N-1 (the right endpoint is omitted;
    the entry is pi-periodic).  Requires N >= 4K + 4 so the band |k| <= K is
    alias-free with margin.
    """
    samples = np.asarray(samples, dtype=complex)
    N = samples.size
    if N < 4 * K + 4:
        raise GridTooCoarse(f"need at least {4 * K + 4} samples for K={K}, got {N}")
    spec = np.fft.fft(samples) / N
    out = {}
    for k in range(-K, K + 1):
        out[k] = complex(spec[k % N])
    return out


# -- weights ----------------------------------------------------------------


@dataclass(frozen=True)
class Weight:
    """Even submultiplicative-candidate weight sequence Omega(n) >= 1."""

    klass: str
    params: tuple

    def __call__(self, n):
        n = np.abs(np.asarray(n, dtype=float))
        if self.klass == "polynomial":
            (m,) = self.params
            return (1.0 + n) ** m
        if self.klass == "exponential":
            (eps,) = self.params
            return np.exp(eps * n)
        if self.klass == "subexponential":
            c, gamma = self.params
            return np.exp(c * n ** gamma)
        raise BadParams(f"unknown weight class {self.klass!r}")

    def label(self) -> str:
        pieces = ",".join(repr(p) for p in self.params)
        return f"{self.klass}({pieces})"


def make_weight(klass: str, **kw) -> Weight:
    if klass == "polynomial":
        m = float(kw["m"])
        if m < 0:
            raise BadParams("polynomial weight needs m >= 0")
        return Weight("polynomial", (m,))
    if klass == "exponential":
        eps = float(kw["eps"])
        if eps < 0:
            raise BadParams("exponential weight needs eps >= 0")
        return Weight("exponential", (eps,))
    if klass == "subexponential":
        c = float(kw["c"])
        gamma = float(kw["gamma"])
        if c < 0 or not (0 < gamma < 1):
            raise BadParams("subexponential weight needs c >= 0 and 0 < gamma < 1")
        return Weight("subexponential", (c, gamma))
    raise BadParams(f"unknown weight class {klass!r}")


def check_submultiplicative(weight, N: int):
    """Exhaustively test Omega(n+m) <= Omega(n)*Omega(m) for |n|,|m| <= N.

    Returns (True, None) or (False, (n, m)) with the first witness found.
    A relative slack of 1e-12 absorbs roundoff.
    """
    idx = np.arange(-2 * N, 2 * N + 1)
    om = np.asarray(weight(idx), dtype=float)

    def get(n):
        return om[n + 2 * N]

    for n in range(-N, N + 1):
        lhs = get(np.arange(-N, N + 1) + n)
        rhs = get(n) * get(np.arange(-N, N + 1))
        bad = lhs > rhs * (1 + 1e-12)
        if bad.any():
            m = int(np.arange(-N, N + 1)[bad][0])
            return False, (n, m)
    return True, None


def weighted_seq_norm(values: dict, weight) -> float:
    """l^2(Omega) norm of a coefficient table: sqrt(sum |x_n|^2 Omega(n)^2)."""
    if not values:
        return 0.0
    ks = np.array(sorted(values))
    xs = np.array([values[k] for k in ks])
    om = np.asarray(weight(ks), dtype=float)
    return float(np.sqrt(np.sum(np.abs(xs) ** 2 * om ** 2)))


def h_omega_norm(V: FourierPotential, weight) -> float:
    """Weighted potential norm: both tables combined in quadrature."""
    return math.hypot(weighted_seq_norm(V.p, weight), weighted_seq_norm(V.q, weight))


# -- generators ---------------------------------------------------------------


def generate_potential(family: str, **params) -> FourierPotential:
    """Build a named test potential.

    Families:
      trig_poly   -- explicit tables: p={k: coeff}, q={k: coeff}, K inferred
      analytic    -- p(k) = q(k) = c * r**|k| on |k| <= K (0 < r < 1)
      sobolev     -- p(k) = q(k) = c * (1+|k|)**(-m-1) on |k| <= K (m >= 0)
      selfadjoint_wrap -- q(k) := conj(p(-k)) applied to an inner family
    """
    if family == "trig_poly":
        p = {int(k): complex(v) for k, v in params.get("p", {}).items()}
        q = {int(k): complex(v) for k, v in params.get("q", {}).items()}
        ks = [abs(k) for k in list(p) + list(q)] or [0]
        K = int(params.get("K", max(ks)))
        return FourierPotential(K, p, q)
    if family == "analytic":
        r, c, K = float(params["r"]), complex(params["c"]), int(params["K"])
        if not 0 < r < 1:
            raise BadParams("analytic family needs 0 < r < 1")
        tab = {k: c * r ** abs(k) for k in range(-K, K + 1)}
        return FourierPotential(K, tab, dict(tab))
    if family == "sobolev":
        m, c, K = float(params["m"]), complex(params["c"]), int(params["K"])
        if m < 0:
            raise BadParams("sobolev family needs m >= 0")
        tab = {k: c * (1.0 + abs(k)) ** (-m - 1) for k in range(-K, K + 1)}
        return FourierPotential(K, tab, dict(tab))
    if family == "selfadjoint_wrap":
        inner = params["inner"]
        V = inner if isinstance(inner, FourierPotential) else generate_potential(**inner)
        q = {-k: v.conjugate() for k, v in V.p.items()}
        return FourierPotential(V.K, dict(V.p), q)
    raise BadParams(f"unknown potential family {family!r}")


# -- decay classification -----------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """Result of classifying a positive sequence as exponential or polynomial."""

    klass: str            # "exponential" | "polynomial"
    rate: float           # decay rate: x_n ~ exp(-rate*n) or n**rate (rate < 0)
    residual: float       # rms residual of the winning log-fit
    residual_other: float
    n_used: int
    n_dropped: int


def decay_fit(values, n_start=None, floor: float | None = None) -> DecayFit:
    """Fit log|x_n| against n (exponential) and log n (polynomial).

    values: mapping n -> x_n or sequence of (n, x_n).  Zero entries are
    dropped (gamma_n may vanish identically) and counted, as are entries at
    or below `floor` when one is given -- measured sequences flatten at the
    instrument's resolution and the flat tail would otherwise dominate the
    fit.  Needs at least 8 surviving entries.
    """
    if isinstance(values, dict):
        items = sorted(values.items())
    else:
        items = sorted((int(n), v) for n, v in values)
    if n_start is not None:
        items = [(n, v) for n, v in items if n >= n_start]
    cut = max(0.0, floor or 0.0)
    pts = [(n, abs(v)) for n, v in items if abs(v) > cut and n > 0]
    dropped = len(items) - len(pts)
    if len(pts) < 8:
        raise TooFewPoints(f"need >= 8 positive points, have {len(pts)}")
    ns = np.array([n for n, _ in pts], dtype=float)
    ys = np.log(np.array([v for _, v in pts]))

    def lsq(xs):
        A = np.vstack([xs, np.ones_like(xs)]).T
        coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
        res = ys - A @ coef
        return coef[0], float(np.sqrt(np.mean(res ** 2)))

    slope_e, res_e = lsq(ns)
    slope_p, res_p = lsq(np.log(ns))
    if res_e <= res_p:
        return DecayFit("exponential", -slope_e, res_e, res_p, len(pts), dropped)
    return DecayFit("polynomial", slope_p, res_p, res_e, len(pts), dropped)
