"""Four-resistor (VMG) generalization and its zero-power FCK1 variant.

With ``U^2_{L,A}`` chosen freely, the remaining three generator levels are
fixed by requiring equal wire mean-square voltage and current in the two
secure situations. Net power flow is generally nonzero.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidArgument, SingularConfiguration, UnphysicalConfiguration
from .kljn import SOURCE_LABELS, SourceLevels
from .noise import BOLTZMANN, SeedLike


@dataclass(frozen=True)
class VmgConfig:
    r_ha: float
    r_la: float
    r_hb: float
    r_lb: float
    u2_la: float
    bandwidth: float = 500.0

    def __post_init__(self):
        if min(self.r_ha, self.r_la, self.r_hb, self.r_lb) <= 0:
            raise InvalidArgument("all resistors must be positive")
        if self.u2_la <= 0:
            raise InvalidArgument("u2_la must be positive")
        if self.bandwidth <= 0:
            raise InvalidArgument("bandwidth must be positive")

    @property
    def resistors(self) -> dict:
        return {"H,A": self.r_ha, "L,A": self.r_la, "H,B": self.r_hb, "L,B": self.r_lb}


@dataclass(frozen=True)
class VmgDerived:
    u2_hb: float
    u2_ha: float
    u2_lb: float
    t_la: float
    t_hb: float
    t_ha: float
    t_lb: float


def _ratio(num: float, den: float, name: str) -> float:
    if den == 0:
        raise SingularConfiguration(f"denominator of the {name} level vanishes")
    return num / den


def temperature_for(u2: float, r: float, bandwidth: float) -> float:
    return u2 / (4.0 * BOLTZMANN * r * bandwidth)


def vmg_levels(config: VmgConfig, printed_hb: bool = False) -> VmgDerived:
    """Dependent generator mean-square levels and equivalent temperatures.

    ``U^2_HB`` is the unique level giving equal wire mean-square voltage,
    current and net power in LH and HL. The commonly printed closed form
    carries ``+R_HB^2`` in its numerator where the solution has ``-R_HB^2``;
    ``printed_hb=True`` evaluates that variant instead (0.468 V^2 rather
    than 0.477 V^2 for the 46.4 kOhm example).
    """
    rha, rla, rhb, rlb = config.r_ha, config.r_la, config.r_hb, config.r_lb
    u2la = config.u2_la

    hb_sq = rhb**2 if printed_hb else -(rhb**2)
    u2_hb = u2la * _ratio(
        rlb * (rha + rhb) - rha * rhb + hb_sq,
        rla**2 + rlb * (rla - rha) - rha * rla,
        "U^2_HB",
    )
    u2_ha = u2la * _ratio(
        rlb * (rha + rhb) + rha * rhb + rha**2,
        rla**2 + rlb * (rla + rhb) + rhb * rla,
        "U^2_HA",
    )
    u2_lb = u2la * _ratio(
        rlb * (rha - rhb) - rha * rhb + rlb**2,
        rla**2 + rla * (rhb - rha) - rha * rhb,
        "U^2_LB",
    )
    for name, value in (("U^2_HB", u2_hb), ("U^2_HA", u2_ha), ("U^2_LB", u2_lb)):
        if not value > 0:
            raise UnphysicalConfiguration(f"{name} = {value:.6g} V^2 is not positive")

    bw = config.bandwidth
    return VmgDerived(
        u2_hb=u2_hb,
        u2_ha=u2_ha,
        u2_lb=u2_lb,
        t_la=temperature_for(u2la, rla, bw),
        t_hb=temperature_for(u2_hb, rhb, bw),
        t_ha=temperature_for(u2_ha, rha, bw),
        t_lb=temperature_for(u2_lb, rlb, bw),
    )


def fck1_fourth_resistor(r_hb: float, r_la: float, r_ha: float) -> float:
    """R_LB giving equal geometric means of the two secure pairs (zero net power)."""
    if min(r_hb, r_la, r_ha) <= 0:
        raise InvalidArgument("resistors must be positive")
    return r_hb * r_la / r_ha


def source_levels(config: VmgConfig, derived: VmgDerived | None = None) -> SourceLevels:
    derived = derived or vmg_levels(config)
    ms = {"L,A": config.u2_la, "H,A": derived.u2_ha, "H,B": derived.u2_hb, "L,B": derived.u2_lb}
    return SourceLevels(resistors=config.resistors, mean_square=ms, bandwidth=config.bandwidth)


def vmg_source_traces(
    config: VmgConfig,
    derived: VmgDerived,
    seed_key: SeedLike,
    n_samples: int = 1000,
    ensemble_count: int = 4,
) -> dict:
    """Four independent traces, each at the RMS of its derived level."""
    if n_samples < 1:
        raise InvalidArgument("n_samples must be >= 1")
    return source_levels(config, derived).generate(n_samples, seed_key, ensemble_count, SOURCE_LABELS)
