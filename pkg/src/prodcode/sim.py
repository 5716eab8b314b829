"""Seeded Monte Carlo BER simulation over the BI-AWGN channel.

Every frame draws from its own counter-based stream keyed by
(master seed, Eb/N0 index, frame index), and frames are processed in
rounds of fixed size, so results do not depend on the worker count.
All decoders see the same channel realization of each frame.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from .bch import CodeParams
from .de import (ANALYTIC_WE, MC_ESTIMATED, ChannelModel, DeConfig, DeError, get_model,
                 optimize_weights)
from .product import (IBDD, IBDD_SR, IDEAL_IBDD, DecoderSchedule, ProductCodeSpec,
                      decode, info_bits, pc_encode)

RNG_NAME = f"numpy.random.Philox/SeedSequence (numpy {np.__version__})"
CSV_COLUMNS = ("ebn0_db", "sigma", "decoder", "frames", "bit_errors", "frame_errors",
               "pre_fec_ber", "ber", "ci_low", "ci_high", "seed")


class SimError(ValueError):
    pass


def map_bits(bits) -> np.ndarray:
    """0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def ebn0_to_sigma(ebn0_db: float, rate: float) -> float:
    if not 0 < rate <= 1:
        raise SimError(f"rate must lie in (0, 1], got {rate}")
    return (2.0 * rate * 10 ** (ebn0_db / 10)) ** -0.5


def frame_rng(master_seed: int, ebn0_index: int, frame_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=(ebn0_index, frame_index))
    return np.random.Generator(np.random.Philox(ss))


def transmit(codeword, sigma: float, rng) -> np.ndarray:
    """Channel LLRs 2y/sigma^2 for y = map_bits(c) + N(0, sigma^2).

    ``rng`` is a Generator or an integer seed.
    """
    if not sigma > 0:
        raise SimError("sigma must be positive")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(rng)))
    x = map_bits(codeword)
    y = x + rng.normal(0.0, sigma, x.shape)
    return 2.0 * y / sigma**2


@dataclass(frozen=True)
class StopRule:
    """Stop a grid point once every decoder has ``min_bit_errors`` errors,
    or at ``max_frames``. The wall-clock bound is checked between rounds and
    makes the result depend on machine speed; leave it None for
    reproducible runs."""
    min_bit_errors: int = 100
    max_frames: int | None = 1000
    max_wall_seconds: float | None = None
    round_frames: int = 8

    def __post_init__(self):
        if self.max_frames is None and self.max_wall_seconds is None:
            raise SimError("StopRule needs max_frames or max_wall_seconds")
        if self.round_frames < 1:
            raise SimError("round_frames must be positive")


@dataclass
class SimPoint:
    ebn0_db: float
    sigma: float
    decoder: str
    frames: int
    bits_per_frame: int
    bit_errors: int
    frame_errors: int
    pre_fec_errors: int
    seed: int
    stopped_by: str = ""
    ci_low: float = field(init=False)
    ci_high: float = field(init=False)

    def __post_init__(self):
        self.ci_low, self.ci_high = clopper_pearson(self.bit_errors, self.total_bits)

    @property
    def total_bits(self) -> int:
        return self.frames * self.bits_per_frame

    @property
    def ber(self) -> float:
        return self.bit_errors / self.total_bits if self.total_bits else float("nan")

    @property
    def pre_fec_ber(self) -> float:
        return self.pre_fec_errors / self.total_bits if self.total_bits else float("nan")

    def row(self) -> dict:
        return {
            "ebn0_db": f"{self.ebn0_db:.4f}", "sigma": f"{self.sigma:.8f}",
            "decoder": self.decoder, "frames": self.frames, "bit_errors": self.bit_errors,
            "frame_errors": self.frame_errors, "pre_fec_ber": f"{self.pre_fec_ber:.6e}",
            "ber": f"{self.ber:.6e}", "ci_low": f"{self.ci_low:.6e}",
            "ci_high": f"{self.ci_high:.6e}", "seed": self.seed,
        }


def clopper_pearson(errors: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    ci = binomtest(errors, trials).proportion_ci(level, method="exact")
    return float(ci.low), float(ci.high)


# ---------------------------------------------------------------- decoder setup

def sr_schedule_for(spec: ProductCodeSpec, sigma: float, sr_iters: int = 10,
                    final_ibdd_iters: int = 2, cfg: DeConfig | None = None,
                    model: str = MC_ESTIMATED) -> DecoderSchedule:
    """iBDD-SR schedule with DE-optimized weights for channel ``sigma``."""
    params = spec.component.params
    try:
        tm = get_model(model, params.v, params.t)
    except DeError:
        tm = get_model(ANALYTIC_WE, params.v, params.t)
    ws = optimize_weights(params, ChannelModel(sigma), cfg, tm, half_iters=2 * sr_iters)
    return DecoderSchedule.sr(ws.weights, sr_iters, final_ibdd_iters)


def resolve_schedules(spec: ProductCodeSpec, decoders: Sequence, sigma: float,
                      cfg: DeConfig | None = None) -> list[DecoderSchedule]:
    """Decoder kinds given as strings get default schedules; iBDD-SR gets
    DE weights for ``sigma``. DecoderSchedule instances pass through."""
    out = []
    for d in decoders:
        if isinstance(d, DecoderSchedule):
            out.append(d)
        elif d == IBDD:
            out.append(DecoderSchedule.ibdd())
        elif d == IDEAL_IBDD:
            out.append(DecoderSchedule.ideal())
        elif d == IBDD_SR:
            out.append(sr_schedule_for(spec, sigma, cfg=cfg))
        else:
            raise SimError(f"unknown decoder {d!r}")
    return out


# ---------------------------------------------------------------- frames

def _run_frames(job) -> np.ndarray:
    """Counts (bit errors, frame errors, pre-FEC errors) per decoder."""
    spec, schedules, sigma, seed, ebn0_idx, frames, all_zero, whole_block = job
    counts = np.zeros((len(schedules), 3), dtype=np.int64)
    k = spec.k
    for f in frames:
        rng = frame_rng(seed, ebn0_idx, f)
        if all_zero:
            c = np.zeros((spec.n, spec.n), np.uint8)
        else:
            c = pc_encode(spec, rng.integers(0, 2, (k, k), dtype=np.uint8))
        llr = transmit(c, sigma, rng)
        hard = (llr < 0).astype(np.uint8)
        view = (lambda m: m) if whole_block else (lambda m: info_bits(spec, m))
        pre = int(np.count_nonzero(view(hard) != view(c)))
        for i, sch in enumerate(schedules):
            genie = c if sch.kind == IDEAL_IBDD else None
            rep = decode(spec, sch, llr, genie)
            err = int(np.count_nonzero(view(rep.decoded) != view(c)))
            counts[i] += (err, err > 0, pre)
    return counts


def _label(s: DecoderSchedule) -> str:
    return s.kind


def run_ber(spec: ProductCodeSpec, decoders: Sequence, ebn0_grid: Sequence[float],
            stop: StopRule | None = None, master_seed: int = 0, workers: int = 1,
            all_zero: bool = False, whole_block: bool = False,
            de_cfg: DeConfig | None = None) -> list[SimPoint]:
    """Paired BER simulation of every decoder over an Eb/N0 grid.

    ``decoders`` holds decoder kinds or explicit schedules. BER counts the
    k^2 information bits unless ``whole_block`` is set.
    """
    if not decoders:
        raise SimError("no decoders given")
    stop = stop or StopRule()
    rate = float(spec.rate)
    bits = spec.n_c if whole_block else spec.k ** 2
    points: list[SimPoint] = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for gi, ebn0 in enumerate(ebn0_grid):
            sigma = ebn0_to_sigma(ebn0, rate)
            schedules = resolve_schedules(spec, decoders, sigma, de_cfg)
            counts = np.zeros((len(schedules), 3), dtype=np.int64)
            frames = 0
            reason = ""
            t0 = time.monotonic()
            while True:
                batch = stop.round_frames
                if stop.max_frames is not None:
                    batch = min(batch, stop.max_frames - frames)
                idx = list(range(frames, frames + batch))
                if pool is None:
                    counts += _run_frames((spec, schedules, sigma, master_seed, gi, idx,
                                           all_zero, whole_block))
                else:
                    chunks = [idx[i::workers] for i in range(workers) if idx[i::workers]]
                    jobs = [(spec, schedules, sigma, master_seed, gi, ch, all_zero,
                             whole_block) for ch in chunks]
                    for part in pool.map(_run_frames, jobs):
                        counts += part
                frames += batch
                if (counts[:, 0] >= stop.min_bit_errors).all():
                    reason = "min_bit_errors"
                elif stop.max_frames is not None and frames >= stop.max_frames:
                    reason = "max_frames"
                elif (stop.max_wall_seconds is not None
                      and time.monotonic() - t0 >= stop.max_wall_seconds):
                    reason = "max_wall_seconds"
                if reason:
                    break
            for sch, (be, fe, pre) in zip(schedules, counts):
                points.append(SimPoint(float(ebn0), sigma, _label(sch), frames, bits,
                                       int(be), int(fe), int(pre), master_seed, reason))
    finally:
        if pool is not None:
            pool.shutdown()
    return points


# ---------------------------------------------------------------- output

def points_csv(points: Sequence[SimPoint]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for p in points:
        w.writerow(p.row())
    return buf.getvalue()


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def run_manifest(spec: ProductCodeSpec, points: Sequence[SimPoint], config: dict) -> dict:
    p = spec.component.params
    return {
        "code": {"v": p.v, "t": p.t, "s": p.s, "n": spec.n, "k": spec.k},
        "rng": RNG_NAME,
        "config": config,
        "config_hash": config_hash(config),
        "points": [{**asdict(pt), "ber": pt.ber} for pt in points],
    }


def crossing_ebn0(points: Sequence[SimPoint], decoder: str, target_ber: float) -> float:
    """Eb/N0 where the BER curve of ``decoder`` crosses ``target_ber``
    (log-linear interpolation between the bracketing points)."""
    pts = sorted((p for p in points if p.decoder == decoder), key=lambda p: p.ebn0_db)
    for a, b in zip(pts, pts[1:]):
        if a.ber >= target_ber > b.ber:
            if b.ber <= 0:
                return b.ebn0_db
            la, lb, lt = math.log10(a.ber), math.log10(b.ber), math.log10(target_ber)
            return a.ebn0_db + (la - lt) / (la - lb) * (b.ebn0_db - a.ebn0_db)
    raise SimError(f"{decoder} BER does not cross {target_ber} on the simulated grid")
