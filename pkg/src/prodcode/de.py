"""Density evolution for product codes under iBDD and iBDD-SR.

The state is a single scalar, the probability that a message bit passed
between row and column decoders is wrong. Component behaviour beyond the
decoding radius enters through a :class:`TransferModel` holding, for each
error weight ``e`` of the mother code, the miscorrection probability and
the mean number of errors fixed and correct bits flipped by a
miscorrection.

Shortened codes are analysed on their mother code: a shortened code whose
bits are wrong with probability ``x`` behaves like a mother code with error
probability ``x * n / (2^v - 1)`` because the removed positions are known
to be correct.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import gammaln
from scipy.stats import norm

from . import _kernels
from .bch import CodeParams, construct_bch

IDEAL = "ideal"
MC_ESTIMATED = "mc-estimated"
ANALYTIC_WE = "analytic-we"
MODEL_VARIANTS = (IDEAL, MC_ESTIMATED, ANALYTIC_WE)

TRANSFER_FORMAT = "prodcode-transfer-model"
TRANSFER_VERSION = 1


class DeError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    """Raised when a threshold bisection has no valid bracket."""


# ---------------------------------------------------------------- channel

@dataclass(frozen=True)
class ChannelModel:
    """BI-AWGN with unit-energy antipodal symbols and noise std ``sigma``."""
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DeError(f"sigma must be positive and finite, got {self.sigma}")

    @classmethod
    def from_p(cls, p: float) -> "ChannelModel":
        if not 0 < p < 0.5:
            raise DeError(f"hard-decision error probability must lie in (0, 1/2), got {p}")
        return cls(float(-1.0 / norm.ppf(p)))

    @property
    def p(self) -> float:
        return float(norm.cdf(-1.0 / self.sigma))

    @property
    def llr_mean(self) -> float:
        return 2.0 / self.sigma**2

    @property
    def llr_std(self) -> float:
        return 2.0 / self.sigma


BELOW_NEG_W = "below_neg_w"
BELOW_ZERO = "below_zero"
BELOW_POS_W = "below_pos_w"


def llr_tail(w, chan: ChannelModel, side: str = BELOW_NEG_W):
    """P(L < -w), P(L < 0) or P(L < +w) for L ~ N(2/sigma^2, 4/sigma^2)."""
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < 0):
        raise DeError("weights must be non-negative")
    mu, sd = chan.llr_mean, chan.llr_std
    if side == BELOW_NEG_W:
        out = norm.cdf((-w - mu) / sd)
    elif side == BELOW_ZERO:
        out = np.full_like(w, chan.p)
    elif side == BELOW_POS_W:
        out = norm.cdf((w - mu) / sd)
    else:
        raise DeError(f"unknown tail side {side!r}")
    return out if out.ndim else float(out)


# ---------------------------------------------------------------- basic transfers

@lru_cache(maxsize=64)
def _log_binom_coef(n: int) -> np.ndarray:
    e = np.arange(n + 1)
    return gammaln(n + 1) - gammaln(e + 1) - gammaln(n - e + 1)


def binom_pmf(n: int, x: float) -> np.ndarray:
    """Binomial(n, x) pmf over 0..n, evaluated in log-space."""
    e = np.arange(n + 1)
    if x <= 0.0:
        return (e == 0).astype(np.float64)
    if x >= 1.0:
        return (e == n).astype(np.float64)
    return np.exp(_log_binom_coef(n) + e * math.log(x) + (n - e) * math.log1p(-x))

def f_bdd_ideal(n: int, t: int, x: float) -> float:
    """P(at least t of the other n-1 bits are wrong), summed in log-space."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0 if t <= n - 1 else 0.0
    if t <= 0:
        return 1.0
    if x * (n - 1) < t:
        # Upper tail is the small side: sum it directly.
        return min(1.0, math.fsum(binom_pmf(n - 1, x)[t:].tolist()))
    return max(0.0, 1.0 - math.fsum(binom_pmf(n - 1, x)[:t].tolist()))


def shorten_adapt(p: float, v: int, s: int) -> float:
    """Convert a mother-code error probability to the shortened code."""
    N = (1 << v) - 1
    if not 0 <= s < N:
        raise DeError(f"shortening s={s} outside 0..{N - 1}")
    out = p * (N / (N - s))   # factor first so s=0 is exactly the identity
    if out > 1.0:
        raise DeError(f"shortened probability {out} exceeds 1")
    return out


def we_approx(v: int, t: int, mother_n: int, w) -> np.ndarray | float:
    """Binomial approximation of the number of weight-``w`` codewords."""
    w = np.asarray(w)
    d = 2 * t + 1
    logA = -v * t * math.log(2) + gammaln(mother_n + 1) - gammaln(w + 1) - gammaln(mother_n - w + 1)
    out = np.where((w >= d) & (w <= mother_n - d), np.exp(logA), 0.0)
    out = np.where(w == 0, 1.0, out)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------- transfer model

@dataclass(frozen=True, eq=False)
class TransferModel:
    """Weight-conditioned behaviour of a mother-code BDD.

    ``q_mc[e]`` is the miscorrection probability for an error pattern of
    weight ``e``; ``fixed[e]`` and ``broken[e]`` are the mean numbers of
    erroneous bits corrected and of correct bits flipped, given a
    miscorrection. Weights above ``e_max`` reuse the last entry.
    """
    variant: str
    v: int
    t: int
    q_mc: np.ndarray
    fixed: np.ndarray
    broken: np.ndarray
    counts: np.ndarray | None = None      # samples per weight (mc-estimated only)
    x_grid: tuple[float, ...] = ()
    x_tables: dict = field(default_factory=dict)
    seed: int | None = None
    trials: int | None = None

    def __post_init__(self):
        if self.variant not in MODEL_VARIANTS:
            raise DeError(f"unknown transfer model {self.variant!r}")
        if not (len(self.q_mc) == len(self.fixed) == len(self.broken)):
            raise DeError("weight tables must have equal length")
        if np.any(self.q_mc < 0) or np.any(self.q_mc > 1):
            raise DeError("miscorrection probabilities must lie in [0, 1]")

    @property
    def mother_n(self) -> int:
        return (1 << self.v) - 1

    @property
    def e_max(self) -> int:
        return len(self.q_mc) - 1

    def stats(self, e) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(q_mc, fixed, broken) at integer weights ``e`` (clamped)."""
        idx = np.minimum(np.asarray(e), self.e_max)
        return self.q_mc[idx], self.fixed[idx], self.broken[idx]

    def table(self, x_grid: Sequence[float]) -> dict[str, list[float]]:
        """Model-implied rates for Binomial(N, x) error patterns.

        Keys: p_succ (decoded to the transmitted word), p_fail, p_mc,
        wrong_flip (mean fraction of positions flipped from right to wrong
        by a miscorrection) and wrong_left (fraction of errors a
        miscorrection leaves in place).
        """
        N, t = self.mother_n, self.t
        E = np.arange(N + 1)
        q, fx, br = self.stats(E)
        out = {k: [] for k in ("p_succ", "p_fail", "p_mc", "wrong_flip", "wrong_left")}
        for x in x_grid:
            pmf = binom_pmf(N, x)
            ps = float(pmf[: t + 1].sum())
            pmc = float((pmf * q).sum())
            out["p_succ"].append(ps)
            out["p_mc"].append(pmc)
            out["p_fail"].append(max(0.0, 1.0 - ps - pmc))
            out["wrong_flip"].append(float((pmf * q * br).sum() / N))
            out["wrong_left"].append(float((pmf * q * np.maximum(E - fx, 0)).sum() / N))
        return out

    # -- serialization
    def to_json(self) -> dict:
        doc = {
            "format": TRANSFER_FORMAT, "version": TRANSFER_VERSION,
            "variant": self.variant, "v": self.v, "t": self.t,
            "q_mc": self.q_mc.tolist(), "fixed": self.fixed.tolist(),
            "broken": self.broken.tolist(),
            "counts": None if self.counts is None else self.counts.tolist(),
            "x_grid": list(self.x_grid), "x_tables": self.x_tables,
            "seed": self.seed, "trials": self.trials,
        }
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "TransferModel":
        if doc.get("format") != TRANSFER_FORMAT:
            raise DeError("not a transfer-model document")
        if doc.get("version") != TRANSFER_VERSION:
            raise DeError(f"unsupported transfer-model version {doc.get('version')}")
        counts = doc.get("counts")
        return cls(
            variant=doc["variant"], v=int(doc["v"]), t=int(doc["t"]),
            q_mc=np.asarray(doc["q_mc"], float), fixed=np.asarray(doc["fixed"], float),
            broken=np.asarray(doc["broken"], float),
            counts=None if counts is None else np.asarray(counts, np.int64),
            x_grid=tuple(doc.get("x_grid", ())), x_tables=doc.get("x_tables", {}),
            seed=doc.get("seed"), trials=doc.get("trials"),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path) -> "TransferModel":
        return cls.from_json(json.loads(Path(path).read_text()))


@lru_cache(maxsize=None)
def ideal_model(v: int, t: int) -> TransferModel:
    z = np.zeros(t + 2)
    return TransferModel(IDEAL, v, t, z, z.copy(), z.copy())


@lru_cache(maxsize=None)
def analytic_we_model(v: int, t: int, e_max: int = 160) -> TransferModel:
    """Miscorrection statistics from the binomial weight-enumerator approximation.

    A pattern of weight e miscorrects onto a weight-w codeword c when it
    equals c with i of its ones cleared and j zeros set, i + j <= t; the
    decoder then corrects j errors and flips i correct bits.
    """
    N = (1 << v) - 1
    e_max = min(e_max, N)
    e = np.arange(e_max + 1)
    logCe = gammaln(N + 1) - gammaln(e + 1) - gammaln(N - e + 1)
    q = np.zeros(e_max + 1)
    sj = np.zeros(e_max + 1)
    si = np.zeros(e_max + 1)
    for i in range(t + 1):
        for j in range(t + 1 - i):
            w = e + i - j
            A = we_approx(v, t, N, np.clip(w, 0, N))
            valid = (w >= 1) & (w <= N) & (A > 0)
            wc = np.clip(w, 0, N)
            with np.errstate(divide="ignore"):
                logt = (np.log(np.where(valid, A, 1.0)) + gammaln(wc + 1) - gammaln(i + 1)
                        - gammaln(wc - i + 1) + gammaln(N - wc + 1) - gammaln(j + 1)
                        - gammaln(np.maximum(N - wc - j, 0) + 1) - logCe)
            term = np.where(valid & (wc >= i) & (N - wc >= j), np.exp(logt), 0.0)
            q += term
            sj += term * j
            si += term * i
    q[: t + 1] = 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        fixed = np.where(q > 0, sj / q, 0.0)
        broken = np.where(q > 0, si / q, 0.0)
    return TransferModel(ANALYTIC_WE, v, t, np.minimum(q, 1.0), fixed, broken)


# ---------------------------------------------------------------- Monte Carlo estimation

def _sample_positions(rng: np.random.Generator, N: int, e: int, count: int) -> np.ndarray:
    """``count`` rows of ``e`` distinct positions in 0..N-1."""
    out = np.empty((count, e), dtype=np.int64)
    chunk = max(1, (1 << 22) // N)
    for a in range(0, count, chunk):
        b = min(count, a + chunk)
        keys = rng.random((b - a, N))
        out[a:b] = np.argpartition(keys, e - 1, axis=1)[:, :e] if e else keys[:, :0]
    return out


def _estimate_point(args) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-weight (trials, miscorrections, fixed sum, broken sum) for one x."""
    v, t, x, trials, seed, idx, strict = args
    code = construct_bch(CodeParams(v, t), strict=strict)
    N = code.n
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(v, t, idx))))
    weights = rng.binomial(N, x, trials)
    n_e = np.zeros(N + 1, np.int64)
    mc_e = np.zeros(N + 1, np.int64)
    fx_e = np.zeros(N + 1, np.int64)
    br_e = np.zeros(N + 1, np.int64)
    for e in np.unique(weights):
        cnt = int(np.count_nonzero(weights == e))
        n_e[e] += cnt
        if e <= t:
            continue
        pos = _sample_positions(rng, N, int(e), cnt)
        res = np.empty((cnt, 3), np.int64)
        _kernels.error_pattern_stats(pos, N, code.field.exp, code.field.log, N, t, res)
        mc = res[:, 0] != _kernels.FAILURE
        mc_e[e] += int(mc.sum())
        fx_e[e] += int(res[mc, 1].sum())
        br_e[e] += int(res[mc, 2].sum())
    return n_e, mc_e, fx_e, br_e


def mc_transfer_estimate(params: CodeParams, x_grid: Sequence[float], trials: int = 10_000,
                         seed: int = 0, workers: int = 1, min_count: int = 200,
                         strict: bool = True) -> TransferModel:
    """Estimate miscorrection statistics of the mother code of ``params``.

    At each grid point ``trials`` Binomial(N, x) error patterns are decoded
    (on the all-zero word, which is representative for a linear code).
    Samples are pooled by error weight into the model tables, and the
    per-point empirical rates are stored in ``x_tables``. Each grid point
    draws from its own counter-based stream, so the result does not depend
    on ``workers``. ``strict=False`` admits toy codes whose generator
    degree is below v*t.
    """
    if trials < 1:
        raise DeError("trials must be positive")
    v, t = params.v, params.t
    N = (1 << v) - 1
    xs = [float(x) for x in x_grid]
    if any(not 0.0 <= x <= 1.0 for x in xs):
        raise DeError("x_grid values must lie in [0, 1]")
    jobs = [(v, t, x, trials, seed, i, strict) for i, x in enumerate(xs)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_estimate_point, jobs))
    else:
        parts = [_estimate_point(j) for j in jobs]

    x_tables = {k: [] for k in ("p_succ", "p_fail", "p_mc", "wrong_flip", "wrong_left")}
    n_e = np.zeros(N + 1, np.int64)
    mc_e = np.zeros(N + 1, np.int64)
    fx_e = np.zeros(N + 1, np.int64)
    br_e = np.zeros(N + 1, np.int64)
    E = np.arange(N + 1)
    for a, b, c, d in parts:
        n_e += a
        mc_e += b
        fx_e += c
        br_e += d
        ok_small = a[: t + 1].sum()
        x_tables["p_mc"].append(b.sum() / trials)
        x_tables["p_succ"].append(ok_small / trials)
        x_tables["p_fail"].append(1.0 - (ok_small + b.sum()) / trials)
        x_tables["wrong_flip"].append(d.sum() / (trials * N))
        # errors left by miscorrections: weight minus fixed, summed over mc trials
        x_tables["wrong_left"].append(float((b * E).sum() - c.sum()) / (trials * N))
    x_tables = {k: [float(u) for u in vals] for k, vals in x_tables.items()}

    good = n_e >= min_count
    good[: t + 1] = True
    e_max = int(np.flatnonzero(good).max())
    keep = np.flatnonzero(good[: e_max + 1])
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(n_e > 0, mc_e / np.maximum(n_e, 1), 0.0)
        fx = np.where(mc_e > 0, fx_e / np.maximum(mc_e, 1), 0.0)
        br = np.where(mc_e > 0, br_e / np.maximum(mc_e, 1), 0.0)
    q[: t + 1] = fx[: t + 1] = br[: t + 1] = 0.0
    grid = np.arange(e_max + 1)
    q = np.interp(grid, keep, q[keep])
    fx = np.interp(grid, keep, fx[keep])
    br = np.interp(grid, keep, br[keep])
    return TransferModel(MC_ESTIMATED, v, t, q, fx, br, counts=n_e[: e_max + 1],
                         x_grid=tuple(xs), x_tables=x_tables, seed=seed, trials=trials)


def default_x_grid(v: int, points: int = 32, max_mean_errors: float = 80.0) -> list[float]:
    """Grid whose mean error count N*x spans 0.5 .. ``max_mean_errors``."""
    N = (1 << v) - 1
    return [float(x) for x in np.geomspace(0.5 / N, min(0.5, max_mean_errors / N), points)]


def shipped_model_path(v: int, t: int) -> Path:
    return Path(str(resources.files("prodcode") / "data" / f"transfer_v{v}_t{t}.json"))


@lru_cache(maxsize=None)
def shipped_model(v: int, t: int) -> TransferModel:
    path = shipped_model_path(v, t)
    if not path.exists():
        raise DeError(f"no precomputed transfer table for v={v}, t={t}")
    return TransferModel.load(path)


def get_model(variant: str, v: int, t: int) -> TransferModel:
    if variant == IDEAL:
        return ideal_model(v, t)
    if variant == ANALYTIC_WE:
        return analytic_we_model(v, t)
    if variant == MC_ESTIMATED:
        return shipped_model(v, t)
    raise DeError(f"unknown transfer model {variant!r}")


# ---------------------------------------------------------------- configuration

@dataclass(frozen=True)
class DeConfig:
    """DE settings. The weight grid runs from 0 to ``weight_max`` * mu_L in
    steps of ``weight_step`` * mu_L, where mu_L is the channel LLR mean."""
    max_half_iters: int = 200
    convergence_target: float = 1e-15
    bisection_tol: float = 1e-6
    weight_max: float = 6.0
    weight_step: float = 1.0 / 50

    def __post_init__(self):
        if self.max_half_iters < 1:
            raise DeError("max_half_iters must be positive")
        if not (self.convergence_target > 0 and self.bisection_tol > 0):
            raise DeError("convergence_target and bisection_tol must be positive")
        if not (self.weight_max >= 0 and self.weight_step > 0):
            raise DeError("weight grid must be non-empty")

    def weight_grid(self, chan: ChannelModel) -> np.ndarray:
        mu = chan.llr_mean
        steps = int(round(self.weight_max / self.weight_step))
        return np.arange(steps + 1) * (self.weight_step * mu)


@dataclass
class ThresholdResult:
    params: CodeParams
    kind: str
    threshold_p: float
    model: str
    threshold_sigma: float | None = None
    weights: list[float] = field(default_factory=list)
    iterations: int = 0
    mother_threshold_p: float | None = None

    def __post_init__(self):
        if not 0 < self.threshold_p < 0.5:
            raise DeError(f"threshold {self.threshold_p} outside (0, 1/2)")

    @property
    def rate(self) -> float:
        return (self.params.k / self.params.n) ** 2

    @property
    def threshold_ebn0_db(self) -> float:
        sigma = self.threshold_sigma or ChannelModel.from_p(self.threshold_p).sigma
        return sigma_to_ebn0_db(sigma, self.rate)


def sigma_to_ebn0_db(sigma: float, rate: float) -> float:
    return 10.0 * math.log10(1.0 / (2.0 * rate * sigma**2))


# ---------------------------------------------------------------- iBDD

def de_ibdd_step(x: float, p: float, model: TransferModel) -> float:
    """One half-iteration of iBDD DE on the mother code.

    Outgoing bit wrong = channel bit wrong and not corrected, or channel bit
    right and flipped by a miscorrection. ``x`` is the incoming message
    error probability; the reference bit's other N-1 positions are
    Binomial(N-1, x).
    """
    N, t = model.mother_n, model.t
    E = np.arange(N)
    pmf = binom_pmf(N - 1, x)
    if model.variant == IDEAL:
        A = float(pmf[t:].sum())
        B = 0.0
    else:
        q1, fx1, _ = model.stats(E + 1)
        A = float((pmf[t:] * (1.0 - q1[t:] * fx1[t:] / (E[t:] + 1))).sum())
        q0, _, br0 = model.stats(E)
        B = float((pmf * q0 * br0 / (N - E)).sum())
    return min(1.0, max(0.0, p * A + (1.0 - p) * B))


def _ibdd_converges(p: float, model: TransferModel, cfg: DeConfig) -> tuple[bool, int]:
    x = p
    for it in range(1, cfg.max_half_iters + 1):
        nxt = de_ibdd_step(x, p, model)
        if nxt <= cfg.convergence_target:
            return True, it
        if nxt >= x:
            return False, it
        x = nxt
    return False, cfg.max_half_iters


@lru_cache(maxsize=256)
def _mother_ibdd_threshold(model: TransferModel, cfg: DeConfig) -> tuple[float, int]:
    lo, hi = 1e-7, 0.25
    if not _ibdd_converges(lo, model, cfg)[0]:
        raise ConvergenceError(f"iBDD DE does not converge even at p={lo}")
    if _ibdd_converges(hi, model, cfg)[0]:
        raise ConvergenceError(f"iBDD DE converges at p={hi}; bracket too small")
    while hi - lo > cfg.bisection_tol:
        mid = 0.5 * (lo + hi)
        if _ibdd_converges(mid, model, cfg)[0]:
            lo = mid
        else:
            hi = mid
    return lo, _ibdd_converges(lo, model, cfg)[1]


def de_ibdd_threshold(params: CodeParams, cfg: DeConfig | None = None,
                      model: TransferModel | None = None) -> ThresholdResult:
    """Largest pre-FEC BER for which iBDD DE reaches the target.

    DE runs on the mother code; the shortened threshold follows by scaling
    with N / (N - s).
    """
    cfg = cfg or DeConfig()
    model = model or get_model(MC_ESTIMATED, params.v, params.t)
    _check_model(params, model)
    p_m, iters = _mother_ibdd_threshold(model, cfg)
    p_s = shorten_adapt(p_m, params.v, params.s)
    return ThresholdResult(params, "ibdd", p_s, model.variant, iterations=iters,
                           mother_threshold_p=p_m)


def _check_model(params: CodeParams, model: TransferModel) -> None:
    if (model.v, model.t) != (params.v, params.t):
        raise DeError(f"transfer model for (v={model.v}, t={model.t}) used with {params}")


# ---------------------------------------------------------------- iBDD-SR

def _sr_parts(x: float, params: CodeParams, model: TransferModel) -> tuple[float, float, float]:
    """(P_succ, P_mc, mean fraction of wrong bits after a miscorrection)."""
    N, t = model.mother_n, model.t
    xm = min(1.0, x * params.n / N)
    E = np.arange(N + 1)
    pmf = binom_pmf(N, xm)
    ps = float(pmf[: t + 1].sum())
    if model.variant == IDEAL:
        return ps, 0.0, 0.0
    q, fx, br = model.stats(E)
    pmc = float((pmf * q).sum())
    dist = np.minimum((E - fx + br) / params.n, 1.0)
    wrong = float((pmf * q * dist).sum())
    return ps, pmc, wrong


def de_ibdd_sr_step(x: float, w, chan: ChannelModel, params: CodeParams,
                    model: TransferModel):
    """Outgoing message error probability of one iBDD-SR half-iteration.

    Success: the bit is right iff the combined value w + L stays positive.
    Failure: the channel bit decides. Miscorrection: bits flipped to the
    wrong value need L > w to survive, all others behave as on success.
    Accepts an array of weights.
    """
    _check_model(params, model)
    ps, pmc, wrong = _sr_parts(x, params, model)
    pf = max(0.0, 1.0 - ps - pmc)
    neg = llr_tail(w, chan, BELOW_NEG_W)
    pos = llr_tail(w, chan, BELOW_POS_W)
    out = ps * neg + pf * chan.p + wrong * pos + (pmc - wrong) * neg
    return np.clip(out, 0.0, 1.0)


@dataclass
class WeightSchedule:
    weights: list[float]
    trajectory: list[float]   # x before each half-iteration, then the final x
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.weights)


def _pick(vals: np.ndarray, grid: np.ndarray) -> tuple[float, float]:
    best = float(vals.min())
    tol = 1e-12 * best + 1e-300
    i = int(np.flatnonzero(vals <= best + tol)[0])   # ties resolve to the smallest w
    return float(grid[i]), float(vals[i])


def optimize_weights(params: CodeParams, chan: ChannelModel, cfg: DeConfig | None = None,
                     model: TransferModel | None = None,
                     half_iters: int | None = None) -> WeightSchedule:
    """Greedy per-half-iteration weight choice minimizing the DE output.

    Runs until the target is reached, the trajectory stops decreasing, or
    ``cfg.max_half_iters``. With ``half_iters`` set, exactly that many
    weights are produced (a fixed schedule, e.g. for simulation); after
    convergence the last weight is repeated.
    """
    cfg = cfg or DeConfig()
    model = model or get_model(MC_ESTIMATED, params.v, params.t)
    _check_model(params, model)
    grid = cfg.weight_grid(chan)
    neg = norm.cdf((-grid - chan.llr_mean) / chan.llr_std)
    pos = norm.cdf((grid - chan.llr_mean) / chan.llr_std)
    p = chan.p
    x = p
    traj = [x]
    weights: list[float] = []
    limit = half_iters if half_iters is not None else cfg.max_half_iters
    converged = False
    while len(weights) < limit:
        if converged:
            weights.append(weights[-1] if weights else float(grid[-1]))
            continue
        ps, pmc, wrong = _sr_parts(x, params, model)
        pf = max(0.0, 1.0 - ps - pmc)
        vals = np.clip(ps * neg + pf * p + wrong * pos + (pmc - wrong) * neg, 0.0, 1.0)
        w, nxt = _pick(vals, grid)
        weights.append(w)
        traj.append(nxt)
        if nxt <= cfg.convergence_target:
            converged = True
            if half_iters is None:
                break
        elif nxt >= x and half_iters is None:
            break
        x = nxt
    return WeightSchedule(weights, traj, converged)


def de_ibdd_sr_threshold(params: CodeParams, cfg: DeConfig | None = None,
                         model: TransferModel | None = None) -> ThresholdResult:
    """Bisect on sigma for the noisiest channel at which iBDD-SR DE,
    with greedily optimized weights, reaches the target."""
    cfg = cfg or DeConfig()
    model = model or get_model(MC_ESTIMATED, params.v, params.t)
    _check_model(params, model)

    def ok(sigma):
        return optimize_weights(params, ChannelModel(sigma), cfg, model).converged

    lo, hi = 0.25, 1.5      # p from ~3e-5 to ~0.25
    if not ok(lo):
        raise ConvergenceError(f"iBDD-SR DE does not converge for {params} at sigma={lo}")
    if ok(hi):
        raise ConvergenceError(f"iBDD-SR DE converges for {params} at sigma={hi}")
    while ChannelModel(hi).p - ChannelModel(lo).p > cfg.bisection_tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    chan = ChannelModel(lo)
    sched = optimize_weights(params, chan, cfg, model)
    return ThresholdResult(params, "ibdd-sr", chan.p, model.variant, threshold_sigma=lo,
                           weights=sched.weights, iterations=sched.iterations)


def threshold(params: CodeParams, kind: str, cfg: DeConfig | None = None,
              model: TransferModel | None = None) -> ThresholdResult:
    if kind == "ibdd":
        return de_ibdd_threshold(params, cfg, model)
    if kind == "ibdd-sr":
        return de_ibdd_sr_threshold(params, cfg, model)
    raise DeError(f"no DE for decoder kind {kind!r}")
