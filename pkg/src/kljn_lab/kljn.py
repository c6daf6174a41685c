"""The ideal KLJN channel.

Alice and Bob each connect one of two resistors, driven by its own noise
generator, to a shared wire. Positive current and power flow from Alice to
Bob.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .errors import InvalidArgument
from .noise import BOLTZMANN, NoiseTrace, SeedLike, derive_seed, johnson_trace, rms


class BitSituation(enum.Enum):
    """Resistor pair; the first letter is Alice's choice.

    Definition order (HH, LL, HL, LH) is the documented tie-break order.
    """

    HH = "HH"
    LL = "LL"
    HL = "HL"
    LH = "LH"

    @property
    def alice(self) -> str:
        return self.value[0]

    @property
    def bob(self) -> str:
        return self.value[1]

    @property
    def secure(self) -> bool:
        return self.value[0] != self.value[1]

    @classmethod
    def from_choices(cls, alice: str, bob: str) -> "BitSituation":
        return cls(alice + bob)

    @classmethod
    def parse(cls, value) -> "BitSituation":
        if isinstance(value, cls):
            return value
        return cls(str(value).upper())


SITUATIONS = tuple(BitSituation)
SECURE_SITUATIONS = (BitSituation.HL, BitSituation.LH)


class Level(enum.Enum):
    HH = "HH"
    SECURE = "SECURE"
    LL = "LL"


def level_of(situation: BitSituation) -> Level:
    if situation.secure:
        return Level.SECURE
    return Level(situation.value)


@dataclass(frozen=True)
class KljnConfig:
    r_h: float
    r_l: float
    t_eff: float
    bandwidth: float
    samples_per_bep: int = 1000
    boltzmann: float = BOLTZMANN

    def __post_init__(self):
        if not (self.r_h > self.r_l > 0):
            raise InvalidArgument("need r_h > r_l > 0")
        if self.t_eff <= 0 or self.bandwidth <= 0:
            raise InvalidArgument("t_eff and bandwidth must be positive")
        if self.samples_per_bep < 1:
            raise InvalidArgument("samples_per_bep must be >= 1")

    def resistor(self, choice: str) -> float:
        return self.r_h if choice == "H" else self.r_l

    def levels(self) -> "SourceLevels":
        ms = {
            label: 4.0 * self.boltzmann * self.t_eff * self.resistor(label[0]) * self.bandwidth
            for label in SOURCE_LABELS
        }
        return SourceLevels(
            resistors={label: self.resistor(label[0]) for label in SOURCE_LABELS},
            mean_square=ms,
            bandwidth=self.bandwidth,
        )


SOURCE_LABELS = ("H,A", "L,A", "H,B", "L,B")

# Every bit exchange is a window cut from a record this long, normalized as a whole.
DEFAULT_RECORD_LENGTH = 1 << 14


@dataclass(frozen=True)
class SourceLevels:
    """Resistance and generator mean-square voltage of all four sources.

    Covers the original scheme (equal temperatures, shared resistor values)
    and the four-resistor generalization alike.
    """

    resistors: Mapping[str, float]
    mean_square: Mapping[str, float]
    bandwidth: float

    def alice_label(self, s: BitSituation) -> str:
        return f"{s.alice},A"

    def bob_label(self, s: BitSituation) -> str:
        return f"{s.bob},B"

    def pair(self, s: BitSituation) -> tuple:
        return self.resistors[self.alice_label(s)], self.resistors[self.bob_label(s)]

    def wire_mean_square(self, s: BitSituation) -> float:
        """Expected <U_w^2> from the voltage-divider superposition."""
        r_a, r_b = self.pair(s)
        a = self.mean_square[self.alice_label(s)]
        b = self.mean_square[self.bob_label(s)]
        return (a * r_b**2 + b * r_a**2) / (r_a + r_b) ** 2

    def wire_current_square(self, s: BitSituation) -> float:
        r_a, r_b = self.pair(s)
        a = self.mean_square[self.alice_label(s)]
        b = self.mean_square[self.bob_label(s)]
        return (a + b) / (r_a + r_b) ** 2

    def net_power(self, s: BitSituation) -> float:
        """Expected <P_w> (Alice to Bob)."""
        r_a, r_b = self.pair(s)
        a = self.mean_square[self.alice_label(s)]
        b = self.mean_square[self.bob_label(s)]
        return (a * r_b - b * r_a) / (r_a + r_b) ** 2

    def generate(
        self,
        n_samples: int,
        seed_key: SeedLike,
        ensemble_count: int = 4,
        labels=SOURCE_LABELS,
        record_length: Optional[int] = DEFAULT_RECORD_LENGTH,
    ) -> dict:
        """Independent Johnson-level traces for the requested source labels.

        Each label draws from its own stream ``seed_key + (crc32(label),)``;
        see :func:`kljn_lab.noise.johnson_trace` for ``record_length``.
        """
        key = tuple(seed_key) if not isinstance(seed_key, int) else (seed_key,)
        out = {}
        for label in labels:
            r = self.resistors[label]
            # Express the level as an equivalent temperature so johnson_trace applies.
            t = self.mean_square[label] / (4.0 * BOLTZMANN * r * self.bandwidth)
            out[label] = johnson_trace(
                n_samples, r, t, self.bandwidth, derive_seed(*key, label), ensemble_count, record_length
            )
        return out


@dataclass(frozen=True, eq=False)
class WireRecord:
    u_w: np.ndarray
    i_w: np.ndarray
    p_w: np.ndarray
    dt: float

    def __post_init__(self):
        if not (len(self.u_w) == len(self.i_w) == len(self.p_w)):
            raise InvalidArgument("wire sequences must have equal length")

    def __len__(self):
        return len(self.u_w)

    def head(self, n: int) -> "WireRecord":
        return WireRecord(self.u_w[:n], self.i_w[:n], self.p_w[:n], self.dt)

    def quantity(self, name: str) -> np.ndarray:
        return {"U": self.u_w, "I": self.i_w, "P": self.p_w}[name.upper()]


@dataclass(frozen=True)
class SpectralPrediction:
    s_u: float
    s_i: float
    r_p: float
    r_s: float


def solve_wire(u_a: NoiseTrace, u_b: NoiseTrace, r_a: float, r_b: float) -> WireRecord:
    """Wire voltage, current and instantaneous power for one bit exchange.

    ``u_w`` is evaluated in the symmetric divider form
    ``(u_a r_b + u_b r_a) / (r_a + r_b)``, which equals ``i_w r_b + u_b`` and
    is exactly invariant under swapping the parties.
    """
    if len(u_a) != len(u_b) or u_a.dt != u_b.dt:
        raise InvalidArgument("Alice's and Bob's traces must have equal length and dt")
    r_s = r_a + r_b
    if r_s <= 0:
        raise InvalidArgument("r_a + r_b must be positive")
    a = u_a.samples
    b = u_b.samples
    i_w = (a - b) / r_s
    u_w = (a * r_b + b * r_a) / r_s
    return WireRecord(u_w, i_w, u_w * i_w, u_a.dt)


def mean_square(x) -> float:
    return rms(x) ** 2


def parallel(r_a: float, r_b: float) -> float:
    return r_a * r_b / (r_a + r_b)


def expected_mean_square(config: KljnConfig, situation: BitSituation) -> float:
    """4 k T_eff R_P df for the situation's resistor pair."""
    r_p = parallel(config.resistor(situation.alice), config.resistor(situation.bob))
    return 4.0 * config.boltzmann * config.t_eff * r_p * config.bandwidth


def classify_level(measured_ms: float, config: KljnConfig) -> Level:
    """Nearest of the three mean-square levels on a logarithmic axis.

    Exact ties go to SECURE.
    """
    if measured_ms < 0:
        raise InvalidArgument("mean-square must be non-negative")
    if measured_ms == 0:
        return Level.LL
    x = math.log(measured_ms)
    candidates = [
        (Level.SECURE, expected_mean_square(config, BitSituation.HL)),
        (Level.HH, expected_mean_square(config, BitSituation.HH)),
        (Level.LL, expected_mean_square(config, BitSituation.LL)),
    ]
    best = min(candidates, key=lambda c: abs(x - math.log(c[1])))
    d_best = abs(x - math.log(best[1]))
    d_secure = abs(x - math.log(candidates[0][1]))
    if math.isclose(d_secure, d_best, rel_tol=1e-12, abs_tol=1e-15):
        return Level.SECURE
    return best[0]


def predicted_spectra(config: KljnConfig, situation: BitSituation) -> SpectralPrediction:
    r_a = config.resistor(situation.alice)
    r_b = config.resistor(situation.bob)
    r_p = parallel(r_a, r_b)
    r_s = r_a + r_b
    four_kt = 4.0 * config.boltzmann * config.t_eff
    return SpectralPrediction(s_u=four_kt * r_p, s_i=four_kt / r_s, r_p=r_p, r_s=r_s)


def net_power(record: WireRecord) -> float:
    if len(record) == 0:
        raise InvalidArgument("empty wire record")
    return float(np.mean(record.p_w))


def simulate_bep(
    levels: SourceLevels,
    situation: BitSituation,
    n_samples: int,
    seed_key: SeedLike,
    ensemble_count: int = 4,
    record_length: Optional[int] = DEFAULT_RECORD_LENGTH,
):
    """Generate all four sources and solve the wire for ``situation``.

    Returns ``(record, sources)``.
    """
    sources = levels.generate(n_samples, seed_key, ensemble_count, record_length=record_length)
    r_a, r_b = levels.pair(situation)
    record = solve_wire(
        sources[levels.alice_label(situation)], sources[levels.bob_label(situation)], r_a, r_b
    )
    return record, sources
