"""Product codes and their iterative BDD decoders (iBDD, ideal iBDD, iBDD-SR).

All rows (or all columns) of one half-iteration read the same input matrix
and their results are committed together, so a half-pass does not depend
on the order in which component words are decoded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .bch import CodeParams, ComponentCode, bdd_decode_batch, codeword_mask, construct_bch, encode

IBDD = "ibdd"
IDEAL_IBDD = "ideal-ibdd"
IBDD_SR = "ibdd-sr"
DECODER_KINDS = (IBDD, IDEAL_IBDD, IBDD_SR)


class DecoderError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ProductCodeSpec:
    component: ComponentCode

    @classmethod
    def from_params(cls, params: CodeParams) -> "ProductCodeSpec":
        return cls(construct_bch(params))

    @property
    def n(self) -> int:
        return self.component.n

    @property
    def k(self) -> int:
        return self.component.k

    @property
    def n_c(self) -> int:
        return self.n * self.n

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k * self.k, self.n * self.n)

    @property
    def oh(self) -> Fraction:
        return Fraction(self.n * self.n, self.k * self.k) - 1


@dataclass(frozen=True)
class DecoderSchedule:
    """Iteration plan for one decoder.

    One full iteration is a row half-pass followed by a column half-pass.
    For iBDD-SR the first ``sr_iters`` full iterations use scaled
    reliability with ``weights[h]`` on half-pass ``h``; the remaining
    ``final_ibdd_iters`` are plain iBDD on the message matrix.
    """
    kind: str
    total_iters: int
    sr_iters: int = 0
    final_ibdd_iters: int = 0
    weights: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in DECODER_KINDS:
            raise DecoderError(f"unknown decoder kind {self.kind!r}")
        if self.total_iters < 0:
            raise DecoderError("total_iters must be non-negative")
        if self.kind == IBDD_SR:
            if self.sr_iters + self.final_ibdd_iters != self.total_iters:
                raise DecoderError("total_iters must equal sr_iters + final_ibdd_iters")
            if len(self.weights) != 2 * self.sr_iters:
                raise DecoderError(
                    f"iBDD-SR needs {2 * self.sr_iters} half-iteration weights, "
                    f"got {len(self.weights)}")
            if any(not np.isfinite(w) or w < 0 for w in self.weights):
                raise DecoderError("weights must be finite and non-negative")

    @classmethod
    def ibdd(cls, iters: int = 12) -> "DecoderSchedule":
        return cls(IBDD, iters)

    @classmethod
    def ideal(cls, iters: int = 12) -> "DecoderSchedule":
        return cls(IDEAL_IBDD, iters)

    @classmethod
    def sr(cls, weights: Sequence[float], sr_iters: int = 10,
           final_ibdd_iters: int = 2) -> "DecoderSchedule":
        """iBDD-SR schedule. ``weights`` holds one value per half-iteration,
        or one per full iteration (then shared by its row and column pass)."""
        w = [float(x) for x in weights]
        if len(w) == sr_iters:
            w = [x for x in w for _ in range(2)]
        return cls(IBDD_SR, sr_iters + final_ibdd_iters, sr_iters, final_ibdd_iters, tuple(w))

    @classmethod
    def sr_constant(cls, weight: float, sr_iters: int = 10,
                    final_ibdd_iters: int = 2) -> "DecoderSchedule":
        return cls.sr([weight] * (2 * sr_iters), sr_iters, final_ibdd_iters)

    @property
    def label(self) -> str:
        return self.kind

    def half_passes(self) -> list[float | None]:
        """Weight per half-pass; None marks a plain BDD half-pass."""
        if self.kind == IBDD_SR:
            return list(self.weights) + [None] * (2 * self.final_ibdd_iters)
        return [None] * (2 * self.total_iters)


@dataclass(eq=False)
class DecodeReport:
    decoded: np.ndarray
    converged: bool
    half_iterations: int
    successes: list[int] = field(default_factory=list)
    failures: list[int] = field(default_factory=list)
    miscorrections: list[int] = field(default_factory=list)
    bit_errors: list[int] = field(default_factory=list)  # vs genie, after each half-pass

    @property
    def iterations_used(self) -> int:
        return (self.half_iterations + 1) // 2


def pc_encode(spec: ProductCodeSpec, info, order: str = "rows") -> np.ndarray:
    """Encode a k x k information block; it lands in the bottom-right corner."""
    info = np.asarray(info, dtype=np.uint8)
    k = spec.k
    if info.shape != (k, k):
        raise DecoderError(f"information block must be {k}x{k}, got {info.shape}")
    code = spec.component
    if order == "rows":
        rows = encode(code, info)              # k x n
        return np.ascontiguousarray(encode(code, rows.T).T)
    if order == "cols":
        cols = encode(code, info.T)            # k x n, one column per row
        return np.ascontiguousarray(encode(code, cols.T))
    raise DecoderError(f"order must be 'rows' or 'cols', not {order!r}")


def info_bits(spec: ProductCodeSpec, matrix: np.ndarray) -> np.ndarray:
    r = spec.n - spec.k
    return matrix[r:, r:]


def is_product_codeword(spec: ProductCodeSpec, matrix) -> bool:
    m = np.ascontiguousarray(matrix, dtype=np.uint8)
    code = spec.component
    return bool(codeword_mask(code, m).all() and codeword_mask(code, np.ascontiguousarray(m.T)).all())


def hard_decision(llr) -> np.ndarray:
    """B(.): negative -> 1, positive -> 0, exact zero -> 0."""
    return (np.asarray(llr) < 0).astype(np.uint8)


def _check_square(spec: ProductCodeSpec, m, name: str) -> np.ndarray:
    if m.shape != (spec.n, spec.n):
        raise DecoderError(f"{name} must be {spec.n}x{spec.n}, got {m.shape}")
    return m


def _decode(spec: ProductCodeSpec, start: np.ndarray, passes: list[float | None],
            llr: np.ndarray | None, genie: np.ndarray | None,
            genie_overrides: bool, first: str) -> DecodeReport:
    if first not in ("rows", "cols"):
        raise DecoderError("first must be 'rows' or 'cols'")
    code = spec.component
    n = spec.n
    # Work in "current axis as rows" orientation; swap views each half-pass.
    msg = np.ascontiguousarray(start, dtype=np.uint8)
    llr_t = None if llr is None else np.ascontiguousarray(llr.T)
    genie_t = None if genie is None else np.ascontiguousarray(genie.T)
    if first == "cols":
        msg = np.ascontiguousarray(msg.T)
        cur_llr, other_llr, cur_genie, other_genie = llr_t, llr, genie_t, genie
    else:
        cur_llr, other_llr, cur_genie, other_genie = llr, llr_t, genie, genie_t

    report = DecodeReport(decoded=start, converged=False, half_iterations=0)
    valid = False  # msg (in current orientation) known to be a product codeword
    h = 0
    while h < len(passes):
        w = passes[h]
        if valid and _settled(msg, passes[h:], cur_llr, other_llr):
            break
        out, status = bdd_decode_batch(code, msg)
        ok = status != _kernels.FAILURE
        mc = np.zeros(n, dtype=bool)
        if cur_genie is not None:
            mc = ok & (out != cur_genie).any(axis=1)
            if genie_overrides:
                out[mc] = msg[mc]
        accepted = ok & ~mc if genie_overrides else ok
        report.successes.append(int(ok.sum()))
        report.failures.append(int(n - ok.sum()))
        report.miscorrections.append(int(mc.sum()))

        if w is None:
            new = out
        else:
            mu = np.where(accepted[:, None], 1.0 - 2.0 * out, 0.0)
            new = hard_decision(w * mu + cur_llr)
        if cur_genie is not None:
            report.bit_errors.append(int(np.count_nonzero(new != cur_genie)))
        # After this pass every word is a codeword iff all were accepted
        # and (for SR) re-slicing reproduced the decoded words.
        rows_ok = bool(accepted.all()) and (w is None or np.array_equal(new, out))
        # Flip orientation for the next half-pass.
        msg = np.ascontiguousarray(new.T)
        cur_llr, other_llr = other_llr, cur_llr
        cur_genie, other_genie = other_genie, cur_genie
        h += 1
        valid = False
        if rows_ok:
            # Every previous-axis word is a codeword; check the other axis.
            valid = bool(codeword_mask(code, msg).all())
        if valid and all(p is None for p in passes[h:]):
            break

    final = msg if (h % 2 == 0) == (first == "rows") else msg.T
    final = np.ascontiguousarray(final)
    report.decoded = final
    report.half_iterations = h
    report.converged = valid or is_product_codeword(spec, final)
    return report


def _settled(msg, remaining, cur_llr, other_llr) -> bool:
    """True when msg is a product codeword that no remaining half-pass alters.

    On a product codeword every BDD succeeds without flips, so an SR
    half-pass reduces to re-slicing w * (1 - 2 msg) + L.
    """
    for i, w in enumerate(remaining):
        if w is None:
            continue
        # Orientation alternates: even offsets use msg as-is.
        if i % 2 == 0:
            m, L = msg, cur_llr
        else:
            m, L = msg.T, other_llr
        if not np.array_equal(hard_decision(w * (1.0 - 2.0 * m) + L), m):
            return False
    return True


def ibdd_decode(spec: ProductCodeSpec, hard, schedule: DecoderSchedule | None = None,
                genie=None, first: str = "rows") -> DecodeReport:
    """Plain iBDD on a hard-decision matrix. A ``genie`` only enables the
    miscorrection counters; it does not alter decoding."""
    schedule = schedule or DecoderSchedule.ibdd()
    if schedule.kind != IBDD:
        raise DecoderError(f"ibdd_decode needs an {IBDD!r} schedule, got {schedule.kind!r}")
    hard = _check_square(spec, np.asarray(hard, dtype=np.uint8), "input")
    if genie is not None:
        genie = _check_square(spec, np.asarray(genie, dtype=np.uint8), "genie")
    return _decode(spec, hard, schedule.half_passes(), None, genie, False, first)


def ideal_ibdd_decode(spec: ProductCodeSpec, hard, schedule: DecoderSchedule | None,
                      genie, first: str = "rows") -> DecodeReport:
    """Genie-aided iBDD: a component decision that disagrees with the
    transmitted word is discarded and the input kept."""
    schedule = schedule or DecoderSchedule.ideal()
    if schedule.kind not in (IDEAL_IBDD, IBDD):
        raise DecoderError(f"ideal_ibdd_decode cannot run a {schedule.kind!r} schedule")
    hard = _check_square(spec, np.asarray(hard, dtype=np.uint8), "input")
    if genie is None:
        raise DecoderError("ideal iBDD needs the transmitted codeword as genie")
    genie = _check_square(spec, np.asarray(genie, dtype=np.uint8), "genie")
    return _decode(spec, hard, schedule.half_passes(), None, genie, True, first)


def ibdd_sr_decode(spec: ProductCodeSpec, llr, schedule: DecoderSchedule,
                   genie=None, first: str = "rows") -> DecodeReport:
    """iBDD with scaled reliability on channel LLRs.

    The message matrix starts at B(L). In SR half-pass h each component
    word is bounded-distance decoded; decoded bits map to +1/-1 (0 on
    failure), are scaled by ``weights[h]``, added to the channel LLR and
    re-sliced. The trailing iterations are plain iBDD on the messages.
    """
    if schedule.kind != IBDD_SR:
        raise DecoderError(f"ibdd_sr_decode needs an {IBDD_SR!r} schedule, got {schedule.kind!r}")
    llr = _check_square(spec, np.asarray(llr, dtype=np.float64), "LLR matrix")
    if genie is not None:
        genie = _check_square(spec, np.asarray(genie, dtype=np.uint8), "genie")
    return _decode(spec, hard_decision(llr), schedule.half_passes(), llr, genie, False, first)


def decode(spec: ProductCodeSpec, schedule: DecoderSchedule, llr, genie=None) -> DecodeReport:
    """Dispatch on ``schedule.kind`` starting from channel LLRs."""
    if schedule.kind == IBDD:
        return ibdd_decode(spec, hard_decision(llr), schedule, genie=genie)
    if schedule.kind == IDEAL_IBDD:
        return ideal_ibdd_decode(spec, hard_decision(llr), schedule, genie)
    return ibdd_sr_decode(spec, llr, schedule, genie=genie)
