"""Monte-Carlo experiment runner and report serialization.

An :class:`ExperimentSpec` names an attack, the scheme and its parameters.
:func:`run_experiment` repeats the attack ``runs`` times, each run drawing
from the random streams keyed ``(master_seed, run)``, so a report does not
depend on how runs are scheduled across workers. A spec may sweep one
parameter; every sweep value becomes one report point.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Optional

import numpy as np

from .attacks.deterministic import (
    AttackOutcome,
    EveKnowledge,
    elimination_attack,
    ohms_law_attack,
    one_bit_power_attack,
    power_signs,
)
from .attacks.nonlinearity import DistortionSpec, nonlinear_run, total_distortion_gaussian
from .attacks.statistical import (
    build_probes,
    channel_ccc_attack,
    level_candidates,
    source_ccc_attack,
    unilateral_channel_attack,
    unilateral_finish,
)
from .attacks.zero_crossing import DEFAULT_OVERSAMPLE, zc_attack
from .errors import InvalidArgument, ValidationError
from .kljn import (
    SECURE_SITUATIONS,
    BitSituation,
    KljnConfig,
    SourceLevels,
    classify_level,
    level_of,
    mean_square,
    simulate_bep,
    solve_wire,
)
from .noise import derive_seed, johnson_rms, johnson_trace, make_rng, mix_eve_noise
from .stats import batch_sigma
from .vmg import VmgConfig, fck1_fourth_resistor, source_levels

ATTACKS = (
    "det-ohm",
    "det-onebit",
    "det-eliminate",
    "stat-channel",
    "stat-source",
    "zero-crossing",
    "nonlinearity",
)
SCHEMES = ("KLJN", "VMG", "FCK1")
KLJN_PARAMS = ("r_h", "r_l", "t_eff", "bandwidth")
VMG_PARAMS = ("r_ha", "r_la", "r_hb", "r_lb", "u2_la", "bandwidth")
FCK1_PARAMS = ("r_ha", "r_la", "r_hb", "u2_la", "bandwidth")

# Situation each attack draws per run unless ExperimentSpec.truth fixes one.
DEFAULT_TRUTH = {
    "det-ohm": "random",
    "det-onebit": "secure",
    "det-eliminate": "random",
    "stat-channel": "LH",
    "stat-source": "LH",
    "zero-crossing": "secure",
    "nonlinearity": "secure",
}
SWEEPABLE = ("m", "t_eff", "delta_bits", "b", "c", "samples_per_bep")
THREADS_ENV = "KLJN_LAB_THREADS"

_INT_FIELDS = {"delta_bits", "runs", "samples_per_bep", "master_seed", "ensemble_count", "oversample"}
_STR_FIELDS = {"attack_id", "scheme", "knowledge", "quantity", "truth", "sweep_param",
               "output_path", "output_format"}


@dataclass(frozen=True)
class ExperimentSpec:
    attack_id: str
    scheme: str = "KLJN"
    r_h: Optional[float] = None
    r_l: Optional[float] = None
    t_eff: Optional[float] = None
    bandwidth: Optional[float] = None
    r_ha: Optional[float] = None
    r_la: Optional[float] = None
    r_hb: Optional[float] = None
    r_lb: Optional[float] = None
    u2_la: Optional[float] = None
    m: Optional[float] = None
    delta_bits: Optional[int] = None
    b: float = 0.0
    c: float = 0.0
    gamma: tuple = ()
    oversample: int = DEFAULT_OVERSAMPLE
    knowledge: str = "bilateral"
    quantity: str = "U"
    truth: Optional[str] = None
    runs: int = 200
    samples_per_bep: int = 1000
    master_seed: int = 0
    ensemble_count: int = 4
    sweep_param: Optional[str] = None
    sweep_values: tuple = ()
    output_path: Optional[str] = None
    output_format: str = "csv"

    # -- validation -------------------------------------------------------

    def required_fields(self) -> tuple:
        if self.attack_id == "zero-crossing":
            base = {"KLJN": KLJN_PARAMS, "VMG": VMG_PARAMS, "FCK1": FCK1_PARAMS}.get(self.scheme, ())
        elif self.attack_id == "nonlinearity":
            base = KLJN_PARAMS
        else:
            base = KLJN_PARAMS
        if self.attack_id in ("stat-channel", "stat-source"):
            base = base + ("m",)
        return base

    def validate(self) -> "ExperimentSpec":
        problems = []
        if self.attack_id not in ATTACKS:
            raise ValidationError(f"unknown attack {self.attack_id!r}; choose from {', '.join(ATTACKS)}")
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if self.scheme != "KLJN" and self.attack_id != "zero-crossing":
            problems.append(f"scheme {self.scheme} is only supported by the zero-crossing attack")
        swept = {self.sweep_param} if self.sweep_param else set()
        missing = [f for f in self.required_fields() if getattr(self, f) is None and f not in swept]
        if self.attack_id == "nonlinearity" and not self.gamma:
            missing.append("gamma")
        if missing:
            raise ValidationError("missing required parameters: " + ", ".join(missing), missing)
        if self.runs < 1:
            problems.append("runs must be >= 1")
        if self.samples_per_bep < 2:
            problems.append("samples_per_bep must be >= 2")
        if self.ensemble_count < 1:
            problems.append("ensemble_count must be >= 1")
        if self.oversample < 1:
            problems.append("oversample must be >= 1")
        if self.knowledge not in ("bilateral", "unilateral"):
            problems.append("knowledge must be 'bilateral' or 'unilateral'")
        if self.quantity.upper() not in ("U", "I", "P"):
            problems.append("quantity must be U, I or P")
        if self.output_format not in ("csv", "json"):
            problems.append("output_format must be csv or json")
        if self.m is not None and self.m < 0:
            problems.append("m must be >= 0")
        if self.delta_bits is not None and self.delta_bits < 1:
            problems.append("delta_bits must be >= 1")
        if self.gamma and min(self.gamma) < 1:
            problems.append("gamma values must be >= 1")
        if self.gamma and max(self.gamma) > self.samples_per_bep:
            problems.append("gamma cannot exceed samples_per_bep")
        if self.truth is not None:
            if self.truth not in ("random", "secure"):
                try:
                    t = BitSituation.parse(self.truth)
                except ValueError:
                    problems.append(f"truth must be random, secure or a bit situation, got {self.truth!r}")
                else:
                    if self.attack_id in ("zero-crossing", "nonlinearity") and not t.secure:
                        problems.append("this attack needs a secure ground truth")
            elif self.truth == "random" and self.attack_id in ("zero-crossing", "nonlinearity"):
                problems.append("this attack needs a secure ground truth")
            if self.attack_id == "nonlinearity" and self.truth != "secure":
                problems.append("the nonlinearity experiment draws a random secure situation per run")
        if self.sweep_param is not None:
            if self.sweep_param not in SWEEPABLE:
                problems.append(f"sweep_param must be one of {', '.join(SWEEPABLE)}")
            if not self.sweep_values:
                problems.append("sweep_values must be nonempty")
        elif self.sweep_values:
            problems.append("sweep_values given without sweep_param")
        if problems:
            raise ValidationError("; ".join(problems))
        return self

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["gamma"] = list(self.gamma)
        d["sweep_values"] = list(self.sweep_values)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError("unknown spec fields: " + ", ".join(sorted(unknown)))
        if "attack_id" not in data:
            raise ValidationError("missing required parameters: attack_id", ("attack_id",))
        kw = {}
        for k, v in data.items():
            kw[k] = _coerce(k, v)
        return cls(**kw)

    def with_value(self, name: str, value) -> "ExperimentSpec":
        return dataclasses.replace(self, **{name: _coerce(name, value)})

    @property
    def effective_truth(self) -> str:
        return self.truth if self.truth is not None else DEFAULT_TRUTH[self.attack_id]


def _coerce(name: str, value):
    if value is None or value == "":
        return None if name not in ("gamma", "sweep_values") else ()
    if name == "gamma":
        if isinstance(value, str):
            value = [v for v in value.split(",") if v.strip()]
        elif not isinstance(value, (list, tuple)):
            value = [value]
        return tuple(int(float(v)) for v in value)
    if name == "sweep_values":
        if isinstance(value, str):
            value = [v for v in value.split(",") if v.strip()]
        elif not isinstance(value, (list, tuple)):
            value = [value]
        return tuple(float(v) for v in value)
    if name in _STR_FIELDS:
        return str(value)
    if name in _INT_FIELDS:
        f = float(value)
        if f != int(f):
            raise ValidationError(f"{name} must be an integer, got {value!r}")
        return int(f)
    return float(value)


# Config files use the CLI flag names.
FLAG_TO_FIELD = {
    "attack": "attack_id",
    "scheme": "scheme",
    "rh": "r_h",
    "rl": "r_l",
    "teff": "t_eff",
    "bandwidth": "bandwidth",
    "samples": "samples_per_bep",
    "runs": "runs",
    "seed": "master_seed",
    "out": "output_path",
    "format": "output_format",
    "m": "m",
    "delta-bits": "delta_bits",
    "b": "b",
    "c": "c",
    "gamma": "gamma",
    "oversample": "oversample",
    "rha": "r_ha",
    "rla": "r_la",
    "rhb": "r_hb",
    "rlb": "r_lb",
    "u2la": "u2_la",
    "knowledge": "knowledge",
    "quantity": "quantity",
    "truth": "truth",
    "ensemble": "ensemble_count",
    "sweep": "sweep_param",
    "values": "sweep_values",
}


def read_config_file(path) -> dict:
    """Flat ``key = value`` file keyed by CLI flag names; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("_", "-")
        if key not in FLAG_TO_FIELD:
            raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
        out[FLAG_TO_FIELD[key]] = value
    return out


# -- report types -------------------------------------------------------------


@dataclass(frozen=True)
class RunSummary:
    run: int
    truth: Optional[str]
    guess: Optional[str]
    correct: bool
    decision_step: Optional[int]


@dataclass
class ReportPoint:
    params: dict
    runs: int
    p: float
    sigma: float
    per_run: list = field(default_factory=list)


@dataclass
class MonteCarloReport:
    spec: ExperimentSpec
    points: list
    diagnostics: dict = field(default_factory=dict)

    @property
    def p(self) -> float:
        """Success probability of the first (for unswept specs, the only) point."""
        return self.points[0].p

    @property
    def sigma(self) -> float:
        return self.points[0].sigma

    @property
    def per_run(self) -> list:
        return self.points[0].per_run


# -- per-run experiments --------------------------------------------------------


def resolve_truth(truth: str, key: tuple) -> BitSituation:
    if truth == "random":
        return list(BitSituation)[int(make_rng(derive_seed(*key, "truth")).integers(4))]
    if truth == "secure":
        return SECURE_SITUATIONS[int(make_rng(derive_seed(*key, "truth")).integers(2))]
    return BitSituation.parse(truth)


def kljn_config(spec: ExperimentSpec) -> KljnConfig:
    return KljnConfig(spec.r_h, spec.r_l, spec.t_eff, spec.bandwidth, spec.samples_per_bep)


def scheme_levels(spec: ExperimentSpec) -> SourceLevels:
    if spec.scheme == "KLJN":
        return kljn_config(spec).levels()
    r_lb = spec.r_lb
    if spec.scheme == "FCK1" and r_lb is None:
        r_lb = fck1_fourth_resistor(spec.r_hb, spec.r_la, spec.r_ha)
    return source_levels(VmgConfig(spec.r_ha, spec.r_la, spec.r_hb, r_lb, spec.u2_la, spec.bandwidth))


def _record_for(levels: SourceLevels, truth: BitSituation, sources: dict):
    r_a, r_b = levels.pair(truth)
    return solve_wire(sources[levels.alice_label(truth)], sources[levels.bob_label(truth)], r_a, r_b)


def _eve_copies(spec: ExperimentSpec, sources: dict, key: tuple, labels) -> dict:
    """Eve's partially correlated versions of the given sources (keyed by label)."""
    out = {}
    for label in labels:
        r = spec.r_h if label[0] == "H" else spec.r_l
        extra = johnson_trace(
            spec.samples_per_bep, r, spec.t_eff, spec.bandwidth,
            derive_seed(*key, "eve," + label), spec.ensemble_count,
        )
        out[label] = mix_eve_noise(sources[label], extra, spec.m, r, spec.t_eff, spec.bandwidth)
    return out


def _run_det_ohm(spec, cfg, levels, truth, sources, record, key):
    alice = {c: sources[f"{c},A"] for c in "HL"}
    bob = {c: sources[f"{c},B"] for c in "HL"}
    bilateral = spec.knowledge == "bilateral"
    knowledge = EveKnowledge(bilateral, True, spec.delta_bits, alice if bilateral else None, bob)
    return ohms_law_attack(record, knowledge, cfg, truth)


def _run_det_onebit(spec, cfg, levels, truth, sources, record, key):
    level = classify_level(mean_square(record.u_w), cfg)
    candidates = [s for s in BitSituation if level_of(s) == level]
    powers = {s: _record_for(levels, s, sources).p_w for s in candidates}
    outcome = one_bit_power_attack(power_signs(record.p_w), powers, truth)
    outcome.aux["level"] = level.value
    return outcome


def _run_det_eliminate(spec, cfg, levels, truth, sources, record, key):
    return elimination_attack(
        record, sources["L,A"], sources["H,A"], cfg.r_l, cfg.r_h, cfg, spec.delta_bits, truth
    )


def _run_stat_channel(spec, cfg, levels, truth, sources, record, key):
    if spec.knowledge == "bilateral":
        eve = _eve_copies(spec, sources, key, ("H,A", "L,A", "H,B", "L,B"))
        probes = build_probes(
            {c: eve[f"{c},A"] for c in "HL"}, {c: eve[f"{c},B"] for c in "HL"}, cfg.r_l, cfg.r_h
        )
        table, guess = channel_ccc_attack(record, probes, spec.quantity, level_candidates(record, cfg))
    else:
        eve = _eve_copies(spec, sources, key, ("H,A", "L,A"))
        table, guess = unilateral_channel_attack(
            record, {c: eve[f"{c},A"] for c in "HL"}, spec.m, cfg, key, spec.quantity,
            spec.ensemble_count,
            level_candidates(record, cfg),
        )
    return AttackOutcome(guess, spec.samples_per_bep, guess == truth, {"ccc": table.as_dict()})


def _run_stat_source(spec, cfg, levels, truth, sources, record, key):
    labels = ("H,A", "L,A", "H,B", "L,B") if spec.knowledge == "bilateral" else ("H,A", "L,A")
    eve = _eve_copies(spec, sources, key, labels)
    a = source_ccc_attack(record, eve["L,A"], eve["H,A"], "alice", cfg.r_l, cfg.r_h)
    aux = {"alice_ccc_low": a.ccc_low, "alice_ccc_high": a.ccc_high}
    if spec.knowledge == "bilateral":
        b = source_ccc_attack(record, eve["L,B"], eve["H,B"], "bob", cfg.r_l, cfg.r_h)
        bob = b.chosen_resistor
        aux.update(bob_ccc_low=b.ccc_low, bob_ccc_high=b.ccc_high)
    else:
        r_other = unilateral_finish(mean_square(record.u_w), cfg.resistor(a.chosen_resistor), cfg)
        bob = "L" if r_other == cfg.r_l else "H"
    guess = BitSituation.from_choices(a.chosen_resistor, bob)
    aux["alice_correct"] = a.chosen_resistor == truth.alice
    aux["bob_correct"] = bob == truth.bob
    return AttackOutcome(guess, spec.samples_per_bep, guess == truth, aux)


_RUNNERS = {
    "det-ohm": _run_det_ohm,
    "det-onebit": _run_det_onebit,
    "det-eliminate": _run_det_eliminate,
    "stat-channel": _run_stat_channel,
    "stat-source": _run_stat_source,
}


def run_once(spec: ExperimentSpec, run: int):
    """One bit exchange and attack for the KLJN-only attacks; returns ``(truth, outcome)``."""
    key = (spec.master_seed, run)
    cfg = kljn_config(spec)
    levels = cfg.levels()
    truth = resolve_truth(spec.effective_truth, key)
    record, sources = simulate_bep(levels, truth, spec.samples_per_bep, key, spec.ensemble_count)
    return truth, _RUNNERS[spec.attack_id](spec, cfg, levels, truth, sources, record, key)


def zc_scheme_run(spec: ExperimentSpec, key: tuple, n_samples: int):
    levels = scheme_levels(spec)
    truth = resolve_truth(spec.effective_truth, key)
    record, _ = simulate_bep(levels, truth, n_samples, key, spec.ensemble_count)
    return record, truth


def nonlinear_once(spec: ExperimentSpec, run: int):
    cfg = kljn_config(spec)
    dist = DistortionSpec(1.0, spec.b, spec.c)
    return nonlinear_run(cfg, dist, spec.gamma, (spec.master_seed, run), spec.ensemble_count)


# -- orchestration ---------------------------------------------------------------


def worker_count(workers: Optional[int] = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


class _Mapper:
    """Ordered map, in-process or over a process pool."""

    def __init__(self, workers: int):
        self.workers = workers
        self.pool = ProcessPoolExecutor(workers) if workers > 1 else None

    def __call__(self, fn, items):
        items = list(items)
        if self.pool is None:
            return list(map(fn, items))
        chunk = max(1, len(items) // (4 * self.workers))
        return list(self.pool.map(fn, items, chunksize=chunk))

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def _summary(run: int, truth, outcome) -> RunSummary:
    return RunSummary(
        run=run,
        truth=truth.value if truth is not None else None,
        guess=outcome.guess.value if outcome.guess is not None else None,
        correct=bool(outcome.correct),
        decision_step=outcome.decision_step,
    )


def _point(params: dict, summaries: list) -> ReportPoint:
    correct = np.array([s.correct for s in summaries], dtype=float)
    runs = len(summaries)
    return ReportPoint(params, runs, float(correct.sum() / runs), batch_sigma(correct), summaries)


def _params(spec: ExperimentSpec) -> dict:
    names = list(spec.required_fields())
    extra = {
        "det-ohm": ("knowledge",),
        "det-onebit": (),
        "det-eliminate": ("delta_bits",),
        "stat-channel": ("knowledge", "quantity"),
        "stat-source": ("knowledge",),
        "zero-crossing": ("oversample",),
        "nonlinearity": ("b", "c"),
    }[spec.attack_id]
    if spec.scheme == "FCK1" and spec.r_lb is not None and "r_lb" not in names:
        names.append("r_lb")
    names += [n for n in extra if n not in names]
    names += ["truth", "samples_per_bep", "master_seed", "ensemble_count"]
    out = {}
    for n in names:
        v = spec.effective_truth if n == "truth" else getattr(spec, n)
        out[n] = v
    return out


def _mean_tables(tables: list) -> dict:
    keys = tables[0].keys() if tables else ()
    return {k: float(np.mean([t[k] for t in tables])) for k in keys}


def _run_kljn_point(spec: ExperimentSpec, mapper) -> tuple:
    results = mapper(partial(run_once, spec), range(spec.runs))
    summaries = [_summary(r, t, o) for r, (t, o) in enumerate(results)]
    diag = {}
    outcomes = [o for _, o in results]
    if spec.attack_id == "det-onebit":
        through = np.array([o.aux["undecided_through"] for o in outcomes])
        n_max = int(min(spec.samples_per_bep, max(through.max(initial=0), 1) + 1))
        diag["undecided_fraction"] = [float(np.mean(through >= n)) for n in range(0, n_max + 1)]
    elif spec.attack_id in ("stat-channel",):
        diag["mean_ccc"] = _mean_tables([o.aux["ccc"] for o in outcomes])
    elif spec.attack_id == "stat-source":
        keys = [k for k in outcomes[0].aux if k.endswith(("_low", "_high"))]
        diag["mean_ccc"] = {k: float(np.mean([o.aux[k] for o in outcomes])) for k in keys}
        diag["sd_ccc"] = {
            k: float(np.std([o.aux[k] for o in outcomes], ddof=1)) if len(outcomes) > 1 else 0.0
            for k in keys
        }
        diag["p_alice"] = float(np.mean([o.aux["alice_correct"] for o in outcomes]))
        diag["p_bob"] = float(np.mean([o.aux["bob_correct"] for o in outcomes]))
    diag["undecided"] = int(sum(o.undecided for o in outcomes))
    return [_point(_params(spec), summaries)], diag


def _run_zc_point(spec: ExperimentSpec, mapper) -> tuple:
    res = zc_attack(
        partial(zc_scheme_run, spec),
        spec.runs,
        spec.samples_per_bep,
        spec.master_seed,
        spec.bandwidth,
        spec.oversample,
        mapper=mapper,
    )
    summaries = [
        _summary(r, run.truth, o) for r, (run, o) in enumerate(zip(res.attack_runs, res.outcomes))
    ]
    diag = {
        "calibration_means": res.calibration_means,
        "attack_stats": res.situation_stats(res.attack_runs),
        "calibration_stats": res.situation_stats(res.calibration_runs),
        "discarded": res.discarded,
        "crossings_min": int(min(r.n_crossings for r in res.attack_runs)),
    }
    return [_point(_params(spec), summaries)], diag


def _run_nonlinear_point(spec: ExperimentSpec, mapper) -> tuple:
    results = mapper(partial(nonlinear_once, spec), range(spec.runs))
    points = []
    for g in spec.gamma:
        summaries = [
            RunSummary(r, x.truth.value, x.guesses[g].value, x.guesses[g] == x.truth, g)
            for r, x in enumerate(results)
        ]
        params = _params(spec)
        params["gamma"] = g
        points.append(_point(params, summaries))
    sigma_h = johnson_rms(spec.r_h, spec.t_eff, spec.bandwidth)
    diag = {
        "u_w_eff": float(np.mean([x.u_w_eff for x in results])),
        "i_w_eff": float(np.mean([x.i_w_eff for x in results])),
        "mean_power": {
            s.value: float(np.mean([x.p_mean for x in results if x.truth == s] or [float("nan")]))
            for s in SECURE_SITUATIONS
        },
        "td_gaussian_rh": total_distortion_gaussian(sigma_h, DistortionSpec(1.0, spec.b, spec.c)),
    }
    return points, diag


def run_experiment(spec: ExperimentSpec, workers: Optional[int] = None) -> MonteCarloReport:
    """Run every sweep point of ``spec``; see the module docstring for seeding."""
    spec.validate()
    mapper = _Mapper(worker_count(workers))
    try:
        values = spec.sweep_values if spec.sweep_param else (None,)
        points, diagnostics = [], []
        for v in values:
            sub = spec if v is None else spec.with_value(spec.sweep_param, v).validate()
            if spec.attack_id == "zero-crossing":
                pts, diag = _run_zc_point(sub, mapper)
            elif spec.attack_id == "nonlinearity":
                pts, diag = _run_nonlinear_point(sub, mapper)
            else:
                pts, diag = _run_kljn_point(sub, mapper)
            points.extend(pts)
            diagnostics.append(diag)
    finally:
        mapper.close()
    diag = diagnostics[0] if len(diagnostics) == 1 else {"points": diagnostics}
    return MonteCarloReport(spec, points, diag)


# -- serialization ---------------------------------------------------------------

RUN_COLUMNS = ("run", "truth", "guess", "correct", "decision_step")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _point_columns(report: MonteCarloReport) -> list:
    names = []
    for pt in report.points:
        for k in pt.params:
            if k not in names:
                names.append(k)
    return names


def report_table_csv(report: MonteCarloReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = _point_columns(report)
    w.writerow(["attack", "scheme", *names, "runs", "p", "sigma"])
    for pt in report.points:
        w.writerow(
            [report.spec.attack_id, report.spec.scheme]
            + [_fmt(pt.params.get(n)) for n in names]
            + [pt.runs, _fmt(pt.p), _fmt(pt.sigma)]
        )
    return buf.getvalue()


def report_runs_csv(report: MonteCarloReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUN_COLUMNS)
    for pt in report.points:
        for s in pt.per_run:
            w.writerow([s.run, _fmt(s.truth), _fmt(s.guess), _fmt(s.correct), _fmt(s.decision_step)])
    return buf.getvalue()


def _json_ready(x):
    if isinstance(x, dict):
        return {str(k): _json_ready(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_ready(v) for v in x]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def report_to_dict(report: MonteCarloReport) -> dict:
    return {
        "spec": report.spec.to_dict(),
        "points": [
            {
                "params": _json_ready(pt.params),
                "runs": pt.runs,
                "p": pt.p,
                "sigma": pt.sigma,
                "per_run": [dataclasses.asdict(s) for s in pt.per_run],
            }
            for pt in report.points
        ],
        "diagnostics": _json_ready(report.diagnostics),
    }


def emit_report(report: MonteCarloReport, fmt: str = "csv") -> bytes:
    """Serialized report; CSV gives the point table only (see :func:`write_report`)."""
    if fmt == "csv":
        return report_table_csv(report).encode()
    if fmt == "json":
        return (json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n").encode()
    raise InvalidArgument("format must be csv or json")


def runs_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".runs.csv")


def write_report(report: MonteCarloReport, path, fmt: str = "csv") -> list:
    """Write the report; CSV also writes the per-run sibling ``<name>.runs.csv``."""
    path = Path(path)
    written = [path]
    path.write_bytes(emit_report(report, fmt))
    if fmt == "csv":
        rp = runs_path(path)
        rp.write_text(report_runs_csv(report))
        written.append(rp)
    return written


def _parse_cell(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_report_csv(path) -> MonteCarloReport:
    """Rebuild a report (without diagnostics) from a CSV table and its runs file."""
    path = Path(path)
    rows = list(csv.reader(io.StringIO(path.read_text())))
    header, body = rows[0], rows[1:]
    if header[:2] != ["attack", "scheme"] or header[-3:] != ["runs", "p", "sigma"]:
        raise InvalidArgument(f"{path} is not a report table")
    names = header[2:-3]
    run_rows = list(csv.DictReader(io.StringIO(runs_path(path).read_text())))
    points, pos = [], 0
    for row in body:
        params = {n: _parse_cell(v) for n, v in zip(names, row[2:-3])}
        params = {k: v for k, v in params.items() if v is not None or k in names}
        runs = int(row[-3])
        per_run = []
        for rr in run_rows[pos: pos + runs]:
            per_run.append(
                RunSummary(
                    run=int(rr["run"]),
                    truth=rr["truth"] or None,
                    guess=rr["guess"] or None,
                    correct=rr["correct"] == "true",
                    decision_step=int(rr["decision_step"]) if rr["decision_step"] else None,
                )
            )
        pos += runs
        points.append(ReportPoint(params, runs, float(row[-2]), float(row[-1]), per_run))
    first = points[0].params if points else {}
    spec_fields = {f.name for f in dataclasses.fields(ExperimentSpec)}
    data = {"attack_id": body[0][0], "scheme": body[0][1]}
    for k, v in first.items():
        if k in spec_fields and v is not None:
            data[k] = v
    spec = ExperimentSpec.from_dict(data)
    return MonteCarloReport(spec, points, {})
