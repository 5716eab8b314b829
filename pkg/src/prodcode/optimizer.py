"""Component-code parameter search per target overhead, and the
minimal-stall-pattern error-floor estimate."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .bch import CodeError, CodeParams
from .de import MC_ESTIMATED, DeConfig, ThresholdResult, get_model, threshold

SEARCH_V = (8, 9, 10, 11, 12)
SEARCH_T = (3, 4)
DECODERS = ("ibdd-sr", "ibdd")
# A candidate whose realized overhead misses the target by more than this
# (absolute, as a ratio) is not a code for that overhead.
OH_TOLERANCE = Fraction(1, 100)

CSV_COLUMNS = ("oh_label", "decoder", "v", "t", "s", "n", "k", "n_c", "realized_oh",
               "threshold_p", "threshold_ebn0_db")


class OptimizerError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class OhTarget:
    denominator: int

    def __post_init__(self):
        if self.denominator < 1:
            raise OptimizerError("overhead denominator must be positive")

    @property
    def value(self) -> Fraction:
        return Fraction(1, self.denominator)

    @property
    def label(self) -> str:
        return f"1/{self.denominator}"

    @property
    def percent(self) -> float:
        return 100.0 / self.denominator


DEFAULT_TARGETS = tuple(OhTarget(i) for i in range(3, 17))


def oh_of(params: CodeParams) -> Fraction:
    return Fraction(params.n ** 2, params.k ** 2) - 1


def s_max(v: int, t: int) -> int:
    return (1 << v) - v * t - 2


def s_for_oh(v: int, t: int, target: OhTarget, rule: str = "closest") -> int:
    """Shortening for a target overhead.

    ``closest`` minimizes |OH(s) - target| (ties to the smaller s);
    ``at-least`` takes the smallest s with OH(s) >= target.
    """
    oh = lambda s: oh_of(CodeParams(v, t, s))
    hi = s_max(v, t)
    if rule == "at-least":
        if oh(hi) < target.value:
            raise OptimizerError(f"(v={v}, t={t}) cannot reach OH {target.label}")
        lo_s, hi_s = 0, hi
        while lo_s < hi_s:                       # OH is increasing in s
            mid = (lo_s + hi_s) // 2
            if oh(mid) >= target.value:
                hi_s = mid
            else:
                lo_s = mid + 1
        return lo_s
    if rule != "closest":
        raise OptimizerError(f"unknown shortening rule {rule!r}")
    if oh(hi) < target.value:
        return hi
    s = s_for_oh(v, t, target, "at-least")
    if s > 0 and abs(oh(s - 1) - target.value) <= abs(oh(s) - target.value):
        return s - 1
    return s


def candidates(target: OhTarget, rule: str = "closest") -> list[CodeParams]:
    """Search-space codes whose realized overhead lies within tolerance."""
    out = []
    for v in SEARCH_V:
        for t in SEARCH_T:
            s = s_for_oh(v, t, target, rule)
            params = CodeParams(v, t, s)
            if abs(oh_of(params) - target.value) <= OH_TOLERANCE:
                out.append(params)
    return out


@dataclass
class OptimizationEntry:
    target: OhTarget
    decoder: str
    winner: ThresholdResult
    runners_up: list[ThresholdResult] = field(default_factory=list)

    @property
    def params(self) -> CodeParams:
        return self.winner.params

    def row(self) -> dict:
        p = self.params
        return {
            "oh_label": self.target.label, "decoder": self.decoder,
            "v": p.v, "t": p.t, "s": p.s, "n": p.n, "k": p.k, "n_c": p.n ** 2,
            "realized_oh": float(oh_of(p)), "threshold_p": self.winner.threshold_p,
            "threshold_ebn0_db": self.winner.threshold_ebn0_db,
        }


@dataclass
class OptimizationReport:
    entries: list[OptimizationEntry] = field(default_factory=list)

    def winner(self, target: OhTarget, decoder: str) -> CodeParams:
        for e in self.entries:
            if e.target == target and e.decoder == decoder:
                return e.params
        raise KeyError((target, decoder))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for e in self.entries:
            row = e.row()
            row["realized_oh"] = f"{row['realized_oh']:.6f}"
            row["threshold_p"] = f"{row['threshold_p']:.6e}"
            row["threshold_ebn0_db"] = f"{row['threshold_ebn0_db']:.4f}"
            w.writerow(row)
        return buf.getvalue()

    def to_json(self) -> list[dict]:
        out = []
        for e in self.entries:
            d = e.row()
            d["runners_up"] = [
                {"v": r.params.v, "t": r.params.t, "s": r.params.s,
                 "threshold_p": r.threshold_p} for r in e.runners_up]
            out.append(d)
        return out

    def dumps_json(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _evaluate(job) -> ThresholdResult:
    params, kind, cfg, variant = job
    return threshold(params, kind, cfg, get_model(variant, params.v, params.t))


def _rank_key(r: ThresholdResult):
    # Highest threshold first; ties to smaller t, then smaller v.
    return (-r.threshold_p, r.params.t, r.params.v, r.params.s)


def optimize(targets=DEFAULT_TARGETS, decoders=DECODERS, cfg: DeConfig | None = None,
             model: str = MC_ESTIMATED, workers: int = 1, rule: str = "closest"
             ) -> OptimizationReport:
    """Pick, per target overhead and decoder, the candidate with the best
    DE threshold."""
    cfg = cfg or DeConfig()
    targets = list(targets)
    if not targets:
        raise OptimizerError("no overhead targets given")
    for d in decoders:
        if d not in DECODERS:
            raise OptimizerError(f"unknown decoder {d!r}")
    plan = [(tg, d, candidates(tg, rule)) for tg in targets for d in decoders]
    jobs = sorted({(p, d, cfg, model) for _, d, cands in plan for p in cands},
                  key=lambda j: (j[1], j[0]))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = dict(zip(jobs, ex.map(_evaluate, jobs)))
    else:
        results = {j: _evaluate(j) for j in jobs}
    report = OptimizationReport()
    for tg, d, cands in plan:
        if not cands:
            raise OptimizerError(f"no admissible candidate for OH {tg.label}")
        ranked = sorted((results[(p, d, cfg, model)] for p in cands), key=_rank_key)
        report.entries.append(OptimizationEntry(tg, d, ranked[0], ranked[1:]))
    return report


# ---------------------------------------------------------------- error floor

def stall_floor(params: CodeParams, p) -> np.ndarray | float:
    """BER floor from minimal (t+1) x (t+1) stall patterns.

    There are C(n, t+1)^2 such patterns, each occurring with probability
    about p^((t+1)^2) and leaving (t+1)^2 of the n^2 bits wrong.
    """
    p = np.asarray(p, dtype=np.float64)
    if np.any((p < 0) | (p >= 1)):
        raise OptimizerError("p must lie in [0, 1)")
    n, m = params.n, params.t + 1
    log_count = 2 * (gammaln(n + 1) - gammaln(m + 1) - gammaln(n - m + 1))
    with np.errstate(divide="ignore"):
        logf = math.log(m * m / (n * n)) + log_count + m * m * np.log(p)
    out = np.where(p > 0, np.exp(logf), 0.0)
    return out if out.ndim else float(out)


def stall_pattern_count(params: CodeParams) -> int:
    return math.comb(params.n, params.t + 1) ** 2
