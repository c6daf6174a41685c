"""Attacks by an eavesdropper who knows the exact generator outputs.

Eve holds the noise traces of one or both parties (a compromised RNG seed),
measures the wire, and either identifies a resistor with Ohm's law, tracks
the one-bit direction of the power flow against her simulated hypotheses,
or eliminates Alice's candidate resistor by reconstructing her generator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from ..errors import InconsistentKnowledge, InvalidArgument
from ..kljn import BitSituation, KljnConfig, WireRecord, mean_square
from ..noise import NoiseTrace, rms
from .statistical import ccc, unilateral_finish

CURRENT_GUARD = 1e-6
FLATNESS_THRESHOLD = 1e-3
FULL_RESOLUTION_RTOL = 1e-9


@dataclass(frozen=True)
class EveKnowledge:
    knows_alice: bool
    knows_bob: bool
    resolution_bits: Optional[int] = None
    alice_traces: Optional[Mapping[str, NoiseTrace]] = None
    bob_traces: Optional[Mapping[str, NoiseTrace]] = None

    def __post_init__(self):
        if not (self.knows_alice or self.knows_bob):
            raise InvalidArgument("Eve must know at least one party's generators")
        if self.resolution_bits is not None and self.resolution_bits < 1:
            raise InvalidArgument("resolution_bits must be >= 1")


@dataclass
class AttackOutcome:
    """Result of one attack on one bit exchange.

    ``decision_step`` is the 1-based sample index at which the guess became
    unique; ``None`` together with ``guess is None`` marks an undecided run.
    """

    guess: Optional[BitSituation]
    decision_step: Optional[int]
    correct: Optional[bool] = None
    aux: dict = field(default_factory=dict)

    @property
    def undecided(self) -> bool:
        return self.guess is None


@dataclass
class OhmsLawResult:
    choice: Optional[str]  # "H", "L", or None when undecided
    resistance: Optional[float]
    relative_spread: dict
    median: dict
    within_1pct: dict
    flat: dict

    @property
    def undecided(self) -> bool:
        return self.choice is None


def quantize(x, bits: int, full_scale: float) -> np.ndarray:
    """Map values to one of 2**bits uniform levels spanning +-full_scale."""
    levels = 1 << int(bits)
    step = 2.0 * full_scale / levels
    idx = np.floor((np.asarray(x, dtype=float) + full_scale) / step)
    return np.clip(idx, 0, levels - 1).astype(np.int64)


def waiting_time_prob(delta_bits: int, n_steps: int) -> float:
    """Probability that two independent noises agree for ``n_steps`` at Δ-bit resolution."""
    if delta_bits < 1 or n_steps < 0:
        raise InvalidArgument("need delta_bits >= 1 and n_steps >= 0")
    return float(2.0 ** (-delta_bits * n_steps))


def _resistance_estimate(record: WireRecord, u_hyp: np.ndarray, side: str) -> np.ndarray:
    i = record.i_w
    guard = CURRENT_GUARD * rms(i)
    keep = np.abs(i) > guard
    if side == "bob":
        est = (record.u_w[keep] - u_hyp[keep]) / i[keep]
    else:
        est = (u_hyp[keep] - record.u_w[keep]) / i[keep]
    return est


def ohms_law_identify(
    record: WireRecord,
    u_hb: NoiseTrace,
    u_lb: NoiseTrace,
    r_h: float,
    r_l: float,
    side: str = "bob",
) -> OhmsLawResult:
    """Identify a party's resistor from R(t) = (U_w - U_B)/I_w.

    For the correct generator hypothesis the ratio is a flat line at the
    connected resistance; for the wrong one it is noise with spikes where
    the current nearly vanishes. ``side="alice"`` uses Alice's traces and
    R(t) = (U_A - U_w)/I_w instead.
    """
    if side not in ("bob", "alice"):
        raise InvalidArgument("side must be 'bob' or 'alice'")
    if not np.any(record.i_w):
        raise InvalidArgument("wire current is identically zero")
    if len(u_hb) != len(record) or len(u_lb) != len(record):
        raise InvalidArgument("hypothesis traces must be aligned with the record")

    spread, med, within, flat = {}, {}, {}, {}
    for label, trace in (("H", u_hb), ("L", u_lb)):
        est = _resistance_estimate(record, trace.samples, side)
        m = float(np.median(est))
        q75, q25 = np.percentile(est, [75, 25])
        rel = float((q75 - q25) / abs(m)) if m != 0 else float("inf")
        spread[label] = rel
        med[label] = m
        within[label] = float(np.mean(np.abs(est - m) <= 0.01 * abs(m))) if m != 0 else 0.0
        flat[label] = rel < FLATNESS_THRESHOLD

    if flat["H"] and flat["L"]:
        choice = None
    elif flat["H"]:
        choice = "H"
    elif flat["L"]:
        choice = "L"
    else:
        raise InconsistentKnowledge("neither generator hypothesis yields a constant resistance")
    return OhmsLawResult(
        choice=choice,
        resistance=med[choice] if choice else None,
        relative_spread=spread,
        median=med,
        within_1pct=within,
        flat=flat,
    )


def power_signs(p) -> np.ndarray:
    """One-bit power direction: +1 Alice to Bob, -1 otherwise; exact zero maps to +1."""
    return np.where(np.asarray(p) >= 0, 1, -1).astype(np.int8)


def one_bit_power_attack(
    measured_sign,
    hypothetical_powers: Mapping[BitSituation, np.ndarray],
    truth: Optional[BitSituation] = None,
) -> AttackOutcome:
    """Eliminate hypotheses whose power direction ever disagrees with the measurement.

    ``hypothetical_powers`` maps each candidate situation to Eve's simulated
    P_w(t); any number of candidates from two to four may be supplied.
    """
    measured = np.asarray(measured_sign)
    if len(hypothetical_powers) < 1:
        raise InvalidArgument("need at least one hypothesis")
    order = [s for s in BitSituation if s in hypothetical_powers]
    alive = []
    for s in order:
        p = np.asarray(hypothetical_powers[s])
        if p.shape != measured.shape:
            raise InvalidArgument("hypothetical powers must match the measured length")
        alive.append(np.cumprod(power_signs(p) == measured) == 1)
    alive = np.array(alive)
    counts = alive.sum(axis=0)
    survival = counts >= 2

    if counts.size and counts[-1] == 0:
        first_empty = int(np.argmax(counts == 0)) + 1
        raise InconsistentKnowledge(f"all hypotheses eliminated by step {first_empty}")
    unique = np.flatnonzero(counts == 1)
    aux = {"survivors": counts}
    if unique.size == 0:
        guess = order[0] if len(order) == 1 else None
        step = 1 if len(order) == 1 else None
    else:
        step = int(unique[0]) + 1
        guess = order[int(np.flatnonzero(alive[:, unique[0]])[0])]
    aux["undecided_through"] = int(np.sum(survival))
    correct = None if truth is None else guess == truth
    return AttackOutcome(guess=guess, decision_step=step, correct=correct, aux=aux)


def _match(a: np.ndarray, b: np.ndarray, bits: Optional[int], scale: float) -> np.ndarray:
    if bits is None:
        return np.abs(a - b) <= FULL_RESOLUTION_RTOL * scale
    return quantize(a, bits, 4 * scale) == quantize(b, bits, 4 * scale)


def elimination_attack(
    record: WireRecord,
    u_la: NoiseTrace,
    u_ha: NoiseTrace,
    r_l: float,
    r_h: float,
    config: KljnConfig,
    resolution_bits: Optional[int] = None,
    truth: Optional[BitSituation] = None,
) -> AttackOutcome:
    """Process of elimination with Alice's two generator traces known.

    Eve reconstructs Alice's generator as U_w + I_w R for R in {R_L, R_H}
    and keeps the hypothesis whose reconstruction reproduces the matching
    known trace. A hypothesis counts as decided only once the reconstruction
    also differs from the other known trace, so identical traces leave Eve
    waiting. Bob's resistor then follows from the wire mean-square.
    """
    n = len(record)
    if len(u_la) != n or len(u_ha) != n:
        raise InvalidArgument("Alice's traces must be aligned with the record")
    la, ha = u_la.samples, u_ha.samples
    u_star = {"L": record.u_w + record.i_w * r_l, "H": record.u_w + record.i_w * r_h}
    own = {"L": la, "H": ha}
    other = {"L": ha, "H": la}
    scale = max(rms(la), rms(ha))
    if scale == 0.0:
        raise InvalidArgument("Alice's traces are identically zero")

    alive, ambiguous = {}, {}
    for c in ("L", "H"):
        alive[c] = np.cumprod(_match(u_star[c], own[c], resolution_bits, scale)) == 1
        ambiguous[c] = np.cumprod(_match(u_star[c], other[c], resolution_bits, scale)) == 1

    decided = {c: alive[c] & ~ambiguous[c] & ~alive["H" if c == "L" else "L"] for c in ("L", "H")}
    steps = {c: (int(np.argmax(decided[c])) + 1 if decided[c].any() else None) for c in ("L", "H")}
    aux = {
        "ccc_l_vs_la": ccc(u_star["L"], la),
        "ccc_l_vs_ha": ccc(u_star["L"], ha),
    }

    choices = [c for c in ("L", "H") if steps[c] is not None]
    if not choices:
        if not alive["L"][-1] and not alive["H"][-1]:
            if resolution_bits is None:
                raise InconsistentKnowledge("neither reconstruction reproduces Alice's traces")
            # Quantization boundary effects: fall back to maximal correlation.
            c_l = ccc(u_star["L"], la)
            c_h = ccc(u_star["H"], ha)
            choices = ["L" if c_l >= c_h else "H"]
            steps[choices[0]] = n
            aux["fallback"] = "ccc"
        else:
            return AttackOutcome(guess=None, decision_step=None, correct=None if truth is None else False, aux=aux)
    alice = min(choices, key=lambda c: steps[c])
    r_a = r_l if alice == "L" else r_h
    r_other = unilateral_finish(mean_square(record.u_w), r_a, config)
    bob = "L" if r_other == config.r_l else "H"
    guess = BitSituation.from_choices(alice, bob)
    correct = None if truth is None else guess == truth
    return AttackOutcome(guess=guess, decision_step=steps[alice], correct=correct, aux=aux)


def ohms_law_attack(
    record: WireRecord,
    knowledge: EveKnowledge,
    config: KljnConfig,
    truth: Optional[BitSituation] = None,
) -> AttackOutcome:
    """Full Ohm's-law attack: Bob by flatness, Alice by flatness or the mean-square level."""
    if not knowledge.knows_bob or knowledge.bob_traces is None:
        raise InvalidArgument("the Ohm's-law attack needs Bob's generator traces")
    bob_res = ohms_law_identify(
        record, knowledge.bob_traces["H"], knowledge.bob_traces["L"], config.r_h, config.r_l
    )
    aux = {"bob_spread": bob_res.relative_spread}
    if bob_res.undecided:
        return AttackOutcome(None, None, None if truth is None else False, aux)
    r_b = config.resistor(bob_res.choice)
    if knowledge.knows_alice and knowledge.alice_traces is not None:
        alice_res = ohms_law_identify(
            record,
            knowledge.alice_traces["H"],
            knowledge.alice_traces["L"],
            config.r_h,
            config.r_l,
            side="alice",
        )
        aux["alice_spread"] = alice_res.relative_spread
        if alice_res.undecided:
            return AttackOutcome(None, None, None if truth is None else False, aux)
        alice = alice_res.choice
    else:
        r_a = unilateral_finish(mean_square(record.u_w), r_b, config)
        alice = "L" if r_a == config.r_l else "H"
    guess = BitSituation.from_choices(alice, bob_res.choice)
    correct = None if truth is None else guess == truth
    return AttackOutcome(guess=guess, decision_step=1, correct=correct, aux=aux)


__all__ = [
    "AttackOutcome",
    "EveKnowledge",
    "OhmsLawResult",
    "elimination_attack",
    "ohms_law_attack",
    "ohms_law_identify",
    "one_bit_power_attack",
    "power_signs",
    "quantize",
    "waiting_time_prob",
]
