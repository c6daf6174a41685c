"""Cross-correlation attacks with partially correlated noise knowledge.

Eve's copies of the generator outputs are diluted by independent noise
(see :func:`kljn_lab.noise.mix_eve_noise`). She either simulates the wire
for every bit situation and correlates the simulated channel quantity with
the measured one, or reconstructs a party's generator from the measured
voltage and current and correlates it with her copies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from ..errors import ClassificationError, DegenerateInput, InvalidArgument
from ..kljn import (
    DEFAULT_RECORD_LENGTH,
    BitSituation,
    KljnConfig,
    WireRecord,
    classify_level,
    level_of,
    mean_square,
    parallel,
    solve_wire,
)
from ..noise import BOLTZMANN, NoiseTrace, SeedLike, derive_seed, johnson_trace


def ccc(x, y) -> float:
    """Cross-correlation coefficient <xy> / (rms(x) rms(y)), no mean removal."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise InvalidArgument("ccc needs two equal-length sequences of length >= 2")
    sxx = float(np.dot(x, x))
    syy = float(np.dot(y, y))
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("ccc of a zero-RMS sequence")
    return float(np.dot(x, y) / math.sqrt(sxx * syy))


@dataclass(frozen=True)
class CccTable:
    quantity: str
    coefficients: Mapping[BitSituation, float]

    def __post_init__(self):
        for s, c in self.coefficients.items():
            if not -1.0 - 1e-12 <= c <= 1.0 + 1e-12:
                raise InvalidArgument(f"coefficient for {s.value} outside [-1, 1]: {c}")

    def argmax(self, candidates=None) -> BitSituation:
        """Situation with the largest coefficient; ties go to the earliest of HH, LL, HL, LH.

        ``candidates`` limits the choice to a subset of the tabulated situations.
        """
        best = None
        for s in BitSituation:
            if s not in self.coefficients or (candidates is not None and s not in candidates):
                continue
            if best is None or self.coefficients[s] > self.coefficients[best]:
                best = s
        return best

    def as_dict(self) -> dict:
        return {s.value: self.coefficients[s] for s in BitSituation if s in self.coefficients}


@dataclass(frozen=True)
class HypothesisResult:
    side: str
    chosen_resistor: str  # "L" or "H"
    ccc_low: float
    ccc_high: float


def build_probes(
    alice: Mapping[str, NoiseTrace],
    bob: Mapping[str, NoiseTrace],
    r_l: float,
    r_h: float,
) -> dict:
    """Eve's simulated wire records for all four situations.

    ``alice``/``bob`` map ``"L"``/``"H"`` to Eve's versions of the generators.
    """
    r = {"L": r_l, "H": r_h}
    return {
        s: solve_wire(alice[s.alice], bob[s.bob], r[s.alice], r[s.bob]) for s in BitSituation
    }


def channel_ccc_attack(
    measured: WireRecord,
    probes: Mapping[BitSituation, WireRecord],
    quantity: str = "U",
    candidates=None,
):
    """Correlate the measured U, I or P with each probe; guess the best match.

    The table always covers every probe. ``candidates`` restricts the guess,
    typically to the situations consistent with the measured mean-square
    level (see :func:`level_candidates`).
    """
    q = quantity.upper()
    if q not in ("U", "I", "P"):
        raise InvalidArgument("quantity must be one of U, I, P")
    target = measured.quantity(q)
    table = CccTable(q, {s: ccc(target, probes[s].quantity(q)) for s in BitSituation if s in probes})
    guess = table.argmax(candidates)
    if guess is None:
        raise InvalidArgument("no probe matches the candidate situations")
    return table, guess


def level_candidates(measured: WireRecord, config: KljnConfig) -> tuple:
    """Situations sharing the mean-square level Eve reads off the wire."""
    level = classify_level(mean_square(measured.u_w), config)
    return tuple(s for s in BitSituation if level_of(s) == level)


def reconstruct_source(measured: WireRecord, r: float, side: str) -> np.ndarray:
    """Hypothetical generator voltage behind resistor ``r`` on ``side`` (Kirchhoff loop)."""
    if side == "alice":
        return measured.u_w + measured.i_w * r
    if side == "bob":
        return measured.u_w - measured.i_w * r
    raise InvalidArgument("side must be 'alice' or 'bob'")


def source_ccc_attack(
    measured: WireRecord,
    eve_low: NoiseTrace,
    eve_high: NoiseTrace,
    side: str,
    r_l: float,
    r_h: float,
) -> HypothesisResult:
    """Test "the party chose R_L" by correlating the reconstruction with Eve's copies."""
    u_star = reconstruct_source(measured, r_l, side)
    c_low = ccc(u_star, eve_low.samples)
    c_high = ccc(u_star, eve_high.samples)
    return HypothesisResult(side, "L" if c_low >= c_high else "H", c_low, c_high)


def dummy_bob_noises(
    config: KljnConfig,
    n_samples: int,
    seed_key: SeedLike,
    ensemble_count: int = 4,
    record_length: Optional[int] = DEFAULT_RECORD_LENGTH,
) -> dict:
    key = (seed_key,) if isinstance(seed_key, int) else tuple(seed_key)
    return {
        c: johnson_trace(
            n_samples,
            config.resistor(c),
            config.t_eff,
            config.bandwidth,
            derive_seed(*key, f"dummy,{c},B"),
            ensemble_count,
            record_length,
        )
        for c in ("L", "H")
    }


def unilateral_channel_attack(
    measured: WireRecord,
    eve_alice: Mapping[str, NoiseTrace],
    m: float,
    config: KljnConfig,
    dummy_seeds: SeedLike,
    quantity: str = "U",
    ensemble_count: int = 4,
    candidates=None,
):
    """Channel attack with Bob's generators replaced by fresh independent dummies.

    ``m`` is the mixing multiplier behind ``eve_alice``; it is not used in
    the computation and is accepted for bookkeeping only.
    """
    dummies = dummy_bob_noises(config, len(measured), dummy_seeds, ensemble_count)
    probes = build_probes(eve_alice, dummies, config.r_l, config.r_h)
    return channel_ccc_attack(measured, probes, quantity, candidates)


def unilateral_finish(measured_ms: float, known_r: float, config: KljnConfig) -> float:
    """The other party's resistor from the wire mean-square and one known resistor.

    The measurement is compared on a logarithmic axis with the two levels
    reachable from ``known_r``; this is the nearest-resistor snap of the
    R_P inversion, measured in the mean-square domain where the levels are
    evenly spaced.
    """
    if known_r not in (config.r_l, config.r_h):
        raise InvalidArgument("known_r must be one of the configured resistors")
    if not measured_ms > 0:
        raise ClassificationError("mean-square must be positive to infer a resistance")
    four_ktb = 4.0 * BOLTZMANN * config.t_eff * config.bandwidth
    x = math.log(measured_ms)
    best = min(
        (config.r_l, config.r_h),
        key=lambda r: abs(x - math.log(four_ktb * parallel(known_r, r))),
    )
    return best


def implied_other_resistance(measured_ms: float, known_r: float, config: KljnConfig) -> Optional[float]:
    """Unsnapped R_P inversion; ``None`` when the measurement exceeds the reachable range."""
    r_p = measured_ms / (4.0 * BOLTZMANN * config.t_eff * config.bandwidth)
    if r_p <= 0 or r_p >= known_r:
        return None
    return known_r * r_p / (known_r - r_p)
