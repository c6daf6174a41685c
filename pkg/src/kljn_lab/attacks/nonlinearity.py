"""Polynomial generator nonlinearity and the power-sign attack.

A slightly nonlinear amplifier, U* = A (U + B U^2 + C U^3), raises the
mean-square output of the hotter-looking (higher-resistance) generator by
more than that of the other one. The resulting net power flow from the
H side to the L side tells Eve which secure situation is on the wire.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import DegenerateInput, InvalidArgument
from ..kljn import DEFAULT_RECORD_LENGTH, BitSituation, KljnConfig, WireRecord, solve_wire
from ..noise import NoiseTrace, SeedLike, derive_seed, make_rng, rms
from ..stats import batch_sigma


@dataclass(frozen=True)
class DistortionSpec:
    a: float = 1.0
    b: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidArgument("the linear gain a must be positive")

    @property
    def linear(self) -> bool:
        return self.b == 0.0 and self.c == 0.0


@dataclass(frozen=True)
class SweepPoint:
    gamma: int
    t_eff: float
    u_w_eff: float
    i_w_eff: float
    p: float
    epsilon: float
    sigma: float

    def __post_init__(self):
        if self.epsilon != 1.0 - self.p:
            raise InvalidArgument("epsilon must equal 1 - p")


def apply_distortion(trace: NoiseTrace, spec: DistortionSpec) -> NoiseTrace:
    u = trace.samples
    u2 = u * u
    # Products rather than ** keep the odd part exactly odd (SIMD pow is not sign-symmetric).
    return trace.with_samples(spec.a * (u + spec.b * u2 + spec.c * (u2 * u)))


def total_distortion(trace: NoiseTrace, spec: DistortionSpec) -> float:
    """sqrt(<(B u^2)^2> + <(C u^3)^2>) / <u^2> on the undistorted trace.

    The denominator is the mean-square itself, not its root; with that
    normalization a Gaussian input gives sqrt(3) B for the quadratic term
    and sqrt(15) C sigma for the cubic one.
    """
    u = trace.samples
    ms = float(np.mean(u**2))
    if ms == 0.0:
        raise DegenerateInput("total distortion of a zero-RMS trace")
    num = spec.b**2 * np.mean(u**4) + spec.c**2 * np.mean(u**6)
    return float(math.sqrt(num) / ms)


def total_distortion_gaussian(sigma: float, spec: DistortionSpec) -> float:
    """Expected total distortion for a zero-mean Gaussian input of RMS ``sigma``."""
    if sigma <= 0:
        raise DegenerateInput("sigma must be positive")
    s2 = sigma**2
    return math.sqrt(3.0 * spec.b**2 * s2**2 + 15.0 * spec.c**2 * s2**3) / s2


def power_sign_attack(record: WireRecord, gamma: int) -> BitSituation:
    """Guess HL for a positive (or exactly zero) mean power over ``gamma`` samples, else LH."""
    if gamma < 1 or gamma > len(record):
        raise InvalidArgument("gamma must lie in [1, len(record)]")
    mean_p = float(np.mean(record.p_w[:gamma]))
    return BitSituation.LH if mean_p < 0 else BitSituation.HL


def distorted_bep(
    config: KljnConfig,
    spec: DistortionSpec,
    situation: BitSituation,
    n_samples: int,
    seed_key: SeedLike,
    ensemble_count: int = 4,
    record_length: Optional[int] = DEFAULT_RECORD_LENGTH,
):
    """One bit exchange with every source passed through the same distortion.

    Returns ``(record, sources)`` where ``sources`` are the distorted traces.
    """
    raw = config.levels().generate(n_samples, seed_key, ensemble_count, record_length=record_length)
    sources = {label: apply_distortion(t, spec) for label, t in raw.items()}
    a = f"{situation.alice},A"
    b = f"{situation.bob},B"
    record = solve_wire(sources[a], sources[b], config.resistor(situation.alice), config.resistor(situation.bob))
    return record, sources


def secure_truth(seed_key: SeedLike) -> BitSituation:
    """Random secure situation drawn from its own labelled stream."""
    key = (seed_key,) if isinstance(seed_key, int) else tuple(seed_key)
    rng = make_rng(derive_seed(*key, "truth"))
    return BitSituation.HL if rng.integers(2) == 0 else BitSituation.LH


@dataclass
class NonlinearRun:
    truth: BitSituation
    guesses: dict  # gamma -> BitSituation
    u_w_eff: float
    i_w_eff: float
    p_mean: float


def nonlinear_run(
    config: KljnConfig,
    spec: DistortionSpec,
    gammas: Sequence[int],
    seed_key: SeedLike,
    ensemble_count: int = 4,
) -> NonlinearRun:
    """Fresh record for one run; each gamma is evaluated on its prefix."""
    n = max(gammas)
    truth = secure_truth(seed_key)
    record, _ = distorted_bep(config, spec, truth, n, seed_key, ensemble_count)
    return NonlinearRun(
        truth=truth,
        guesses={g: power_sign_attack(record, g) for g in gammas},
        u_w_eff=rms(record.u_w),
        i_w_eff=rms(record.i_w),
        p_mean=float(np.mean(record.p_w)),
    )


def _sweep_run(cfg, spec, gammas, seed, k, ensemble_count, r):
    return nonlinear_run(cfg, spec, gammas, (seed, k, r), ensemble_count)


def temperature_sweep(
    config: KljnConfig,
    spec: DistortionSpec,
    t_eff_list: Sequence[float],
    gamma_list: Sequence[int],
    runs: int,
    seed: int,
    ensemble_count: int = 4,
    mapper: Callable = map,
    keep_runs: Optional[list] = None,
) -> list:
    """Power-sign attack success over a (temperature, gamma) grid.

    ``config`` supplies the resistors and bandwidth; its temperature is
    replaced by each entry of ``t_eff_list``. Run ``r`` at temperature index
    ``k`` uses the stream ``(seed, k, r)``. When ``keep_runs`` is a list, the
    per-run records of every temperature are appended to it.
    """
    if not t_eff_list or not gamma_list:
        raise InvalidArgument("temperature and gamma lists must be nonempty")
    if runs < 1:
        raise InvalidArgument("runs must be >= 1")
    gammas = sorted(set(int(g) for g in gamma_list))
    if gammas[0] < 1:
        raise InvalidArgument("gamma must be >= 1")

    points = []
    for k, t in enumerate(t_eff_list):
        cfg = KljnConfig(config.r_h, config.r_l, t, config.bandwidth, max(gammas), config.boltzmann)
        results = list(mapper(partial(_sweep_run, cfg, spec, gammas, seed, k, ensemble_count), range(runs)))
        if keep_runs is not None:
            keep_runs.append((t, results))
        u_eff = float(np.mean([x.u_w_eff for x in results]))
        i_eff = float(np.mean([x.i_w_eff for x in results]))
        for g in gamma_list:
            correct = np.array([x.guesses[int(g)] == x.truth for x in results], dtype=float)
            p = float(correct.mean())
            points.append(SweepPoint(int(g), float(t), u_eff, i_eff, p, 1.0 - p, batch_sigma(correct)))
    return points
