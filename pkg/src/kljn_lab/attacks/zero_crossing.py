"""Zero-crossing attack.

Whenever the wire current is zero the wire voltage equals both generator
voltages. Eve samples the wire voltage at those instants and compares the
resulting mean-square, U^2_zc, between the two secure situations.
"""
from __future__ import annotations

from functools import partial
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import signal

from ..errors import InvalidArgument
from ..kljn import SECURE_SITUATIONS, BitSituation, WireRecord, mean_square
from ..noise import NoiseTrace, next_power_of_two
from ..stats import batch_sigma
from .deterministic import AttackOutcome

DEFAULT_OVERSAMPLE = 16


@dataclass(frozen=True, eq=False)
class CrossingSet:
    times: np.ndarray
    sampled_voltages: np.ndarray

    def __len__(self):
        return self.times.size

    @property
    def mean_square(self) -> Optional[float]:
        if self.times.size == 0:
            return None
        return float(np.mean(self.sampled_voltages**2))


def oversample(trace: NoiseTrace, factor: int) -> NoiseTrace:
    """Band-limited (Fourier) interpolation to ``factor`` times the sample rate."""
    if factor < 1:
        raise InvalidArgument("factor must be >= 1")
    if factor == 1:
        return trace
    n = len(trace)
    dense = signal.resample(trace.samples, n * int(factor))
    return NoiseTrace(dense, trace.dt / factor, trace.bandwidth)


def _crossings(
    i: np.ndarray, u: np.ndarray, dt: float, min_time: Optional[float], max_time: Optional[float]
) -> CrossingSet:
    neg = i < 0
    k = np.flatnonzero(neg[:-1] != neg[1:])
    i0, i1 = i[k], i[k + 1]
    frac = i0 / (i0 - i1)
    times = (k + frac) * dt
    volts = u[k] + frac * (u[k + 1] - u[k])
    keep = np.ones(times.size, dtype=bool)
    if min_time is not None:
        keep &= times >= min_time
    if max_time is not None:
        keep &= times < max_time
    return CrossingSet(times[keep], volts[keep])


def find_zero_crossings(
    i: NoiseTrace,
    u: NoiseTrace,
    factor: int = DEFAULT_OVERSAMPLE,
    min_time: Optional[float] = None,
    max_time: Optional[float] = None,
) -> CrossingSet:
    """Zero crossings of the current and the wire voltage at those instants.

    Both traces are oversampled first; each crossing is located by linear
    interpolation between the bracketing dense samples, and the voltage is
    interpolated linearly at the same instant. Only crossings with
    ``min_time <= t < max_time`` are kept; the interpolation treats the
    traces as periodic, so callers analysing a window of a longer record
    pass margins on both sides and restrict the times to the window.
    """
    if len(i) != len(u) or i.dt != u.dt:
        raise InvalidArgument("current and voltage traces must be aligned")
    di = oversample(i, factor)
    du = oversample(u, factor)
    return _crossings(di.samples, du.samples, di.dt, min_time, max_time)


def record_crossings(
    record: WireRecord,
    bandwidth: float,
    factor: int = DEFAULT_OVERSAMPLE,
    min_time: Optional[float] = None,
    max_time: Optional[float] = None,
) -> CrossingSet:
    i = NoiseTrace(record.i_w, record.dt, bandwidth)
    u = NoiseTrace(record.u_w, record.dt, bandwidth)
    return find_zero_crossings(i, u, factor, min_time, max_time)


def analysis_window(samples_per_bep: int, margin: int = 256) -> tuple:
    """``(record_samples, offset)`` for a BEP analysed with interpolation margins.

    The record is a power of two at least ``samples_per_bep + 2 * margin``
    long and the BEP sits in its middle.
    """
    if samples_per_bep < 1 or margin < 0:
        raise InvalidArgument("need samples_per_bep >= 1 and margin >= 0")
    total = next_power_of_two(samples_per_bep + 2 * margin)
    return total, (total - samples_per_bep) // 2


@dataclass
class ZcRun:
    truth: BitSituation
    u2_zc: Optional[float]
    u2_w: float
    i2_w: float
    p_mean: float
    n_crossings: int


@dataclass
class ZcResult:
    calibration_means: dict
    p: float
    sigma: float
    outcomes: list
    attack_runs: list = field(repr=False)
    calibration_runs: list = field(repr=False)
    discarded: int = 0

    def situation_stats(self, runs=None) -> dict:
        """Per-situation means of U^2_zc, U^2_w, I^2_w and <P_w> (plus U^2_zc standard error)."""
        runs = self.attack_runs + self.calibration_runs if runs is None else runs
        out = {}
        for s in SECURE_SITUATIONS:
            sel = [r for r in runs if r.truth == s and r.u2_zc is not None]
            if not sel:
                continue
            zc = np.array([r.u2_zc for r in sel])
            out[s.value] = {
                "runs": len(sel),
                "u2_zc": float(zc.mean()),
                "u2_zc_se": float(zc.std(ddof=1) / np.sqrt(len(sel))) if len(sel) > 1 else 0.0,
                "u2_w": float(np.mean([r.u2_w for r in sel])),
                "i2_w": float(np.mean([r.i2_w for r in sel])),
                "p_w": float(np.mean([r.p_mean for r in sel])),
                "crossings": float(np.mean([r.n_crossings for r in sel])),
            }
        return out


def measure_run(
    record: WireRecord,
    truth: BitSituation,
    bandwidth: float,
    samples_per_bep: int,
    factor: int = DEFAULT_OVERSAMPLE,
    offset: int = 0,
) -> ZcRun:
    """U^2_zc and wire statistics of the BEP ``record[offset : offset + samples_per_bep]``."""
    if offset < 0 or offset + samples_per_bep > len(record):
        raise InvalidArgument("BEP window exceeds the record")
    sl = slice(offset, offset + samples_per_bep)
    head = WireRecord(record.u_w[sl], record.i_w[sl], record.p_w[sl], record.dt)
    cs = record_crossings(
        record, bandwidth, factor, offset * record.dt, (offset + samples_per_bep) * record.dt
    )
    return ZcRun(
        truth=truth,
        u2_zc=cs.mean_square,
        u2_w=mean_square(head.u_w),
        i2_w=mean_square(head.i_w),
        p_mean=float(np.mean(head.p_w)),
        n_crossings=len(cs),
    )


def nearest_mean_guess(u2_zc: float, calibration_means: dict) -> BitSituation:
    """Secure situation whose calibrated mean U^2_zc is nearest; ties go to HL."""
    best = None
    for s in SECURE_SITUATIONS:
        d = abs(u2_zc - calibration_means[s])
        if best is None or d < best[1]:
            best = (s, d)
    return best[0]


def _measure_key(scheme_runner, total, bandwidth, samples_per_bep, factor, offset, key):
    record, truth = scheme_runner(key, total)
    return measure_run(record, truth, bandwidth, samples_per_bep, factor, offset)


def zc_attack(
    scheme_runner: Callable,
    runs: int,
    samples_per_bep: int,
    seed: int,
    bandwidth: float,
    factor: int = DEFAULT_OVERSAMPLE,
    calibration_runs: Optional[int] = None,
    mapper: Callable = map,
) -> ZcResult:
    """Calibrated nearest-mean zero-crossing attack.

    ``scheme_runner(seed_key, n_samples)`` returns ``(record, truth)`` for
    one bit exchange with a secure ground truth; the record is
    ``analysis_window(samples_per_bep)[0]`` samples long and the BEP is its
    centred window. Calibration runs (keyed ``(seed, "calibration", r)``)
    give the mean U^2_zc per situation; attack runs (keyed ``(seed, r)``)
    are classified by the nearer calibrated mean.
    Runs without any crossing are discarded and counted.
    """
    if runs < 1:
        raise InvalidArgument("runs must be >= 1")
    n_cal = runs if calibration_runs is None else calibration_runs
    total, offset = analysis_window(samples_per_bep)

    # Module-level partial rather than a closure so process pools can pickle it.
    one = partial(_measure_key, scheme_runner, total, bandwidth, samples_per_bep, factor, offset)
    cal = list(mapper(one, [(seed, "calibration", r) for r in range(n_cal)]))
    means = {}
    for s in SECURE_SITUATIONS:
        vals = [c.u2_zc for c in cal if c.truth == s and c.u2_zc is not None]
        if not vals:
            raise InvalidArgument(f"calibration produced no usable {s.value} runs")
        means[s] = float(np.mean(vals))

    attack = list(mapper(one, [(seed, r) for r in range(runs)]))
    outcomes, correct = [], []
    discarded = 0
    for run in attack:
        if run.u2_zc is None:
            discarded += 1
            outcomes.append(AttackOutcome(None, None, False, {"discarded": True}))
            continue
        guess = nearest_mean_guess(run.u2_zc, means)
        ok = guess == run.truth
        correct.append(ok)
        outcomes.append(AttackOutcome(guess, samples_per_bep, ok, {"u2_zc": run.u2_zc}))
    used = np.array(correct, dtype=float)
    p = float(used.mean()) if used.size else 0.0
    return ZcResult(
        calibration_means={s.value: v for s, v in means.items()},
        p=p,
        sigma=batch_sigma(used),
        outcomes=outcomes,
        attack_runs=attack,
        calibration_runs=cal,
        discarded=discarded,
    )
