"""Command-line interface: ``kljn-lab <command> ...``.

Exit codes: 0 success, 2 usage or validation error, 1 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateInput,
    InvalidArgument,
    KljnLabError,
    SingularConfiguration,
    UnphysicalConfiguration,
    ValidationError,
)
from .harness import (
    ATTACKS,
    FLAG_TO_FIELD,
    SWEEPABLE,
    ExperimentSpec,
    emit_report,
    read_config_file,
    run_experiment,
    write_report,
)
from .kljn import BitSituation, KljnConfig, classify_level, mean_square, simulate_bep
from .noise import johnson_trace, quality_report, rms
from .vmg import VmgConfig, vmg_levels

# Values used when neither the config file nor a flag supplies one.
DEFAULTS = {
    "r_h": 100e3,
    "r_l": 10e3,
    "t_eff": 1e18,
    "bandwidth": 500.0,
    "samples_per_bep": 1000,
    "runs": 200,
    "master_seed": 0,
    "output_format": "csv",
}
ZC_KLJN_DEFAULTS = {"r_h": 10e3, "r_l": 1e3}
NONLINEAR_DEFAULT_GAMMA = "10,20,100,1000"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(f"{self.prog}: {message}")


def _add_common(p: argparse.ArgumentParser):
    g = p.add_argument_group("common")
    g.add_argument("--rh", type=float, help="high resistance, ohm (default 100e3)")
    g.add_argument("--rl", type=float, help="low resistance, ohm (default 10e3)")
    g.add_argument("--teff", type=float, help="effective noise temperature, K (default 1e18)")
    g.add_argument("--bandwidth", type=float, help="noise bandwidth, Hz (default 500)")
    g.add_argument("--samples", type=int, help="samples per bit exchange (default 1000)")
    g.add_argument("--runs", type=int, help="Monte-Carlo runs (default 200)")
    g.add_argument("--seed", type=int, help="master seed (default 0)")
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")


def _add_attack_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("attack parameters")
    g.add_argument("--config", help="flat key = value file using these flag names")
    g.add_argument("--scheme", choices=("KLJN", "VMG", "FCK1"), help="scheme (zero-crossing only)")
    g.add_argument("--knowledge", choices=("bilateral", "unilateral"))
    g.add_argument("--quantity", choices=("U", "I", "P"), help="channel quantity for stat-channel")
    g.add_argument("--truth", help="random, secure, or a fixed situation HH/LL/HL/LH")
    g.add_argument("--m", type=float, help="mixing multiplier M of Eve's noise")
    g.add_argument("--delta-bits", type=int, dest="delta_bits", help="Eve's resolution bits")
    g.add_argument("--b", type=float, help="second-order distortion coefficient, 1/V")
    g.add_argument("--c", type=float, help="third-order distortion coefficient, 1/V^2")
    g.add_argument("--gamma", help="comma-separated samples per guess (nonlinearity)")
    g.add_argument("--oversample", type=int, help="zero-crossing oversampling factor (default 16)")
    g.add_argument("--rha", type=float)
    g.add_argument("--rla", type=float)
    g.add_argument("--rhb", type=float)
    g.add_argument("--rlb", type=float)
    g.add_argument("--u2la", type=float, help="U^2_LA, V^2")
    g.add_argument("--ensemble", type=int, help="noise ensemble count (default 4)")
    g.add_argument("--threads", type=int, help="worker processes (default: $KLJN_LAB_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kljn-lab", description="KLJN key exchange simulation and attack lab")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("noise-gen", help="generate Johnson-scaled GBLWN and report its quality")
    _add_common(p)
    p.add_argument("--r", type=float, help="resistance to scale to (default --rh)")
    p.add_argument("--ensemble", type=int, default=4)

    p = sub.add_parser("kljn-run", help="simulate one bit exchange")
    _add_common(p)
    p.add_argument("--situation", default="LH", help="HH, LL, HL or LH (default LH)")
    p.add_argument("--ensemble", type=int, default=4)

    p = sub.add_parser("vmg-derive", help="derive the VMG generator levels and temperatures")
    for flag in ("--rha", "--rla", "--rhb", "--rlb", "--u2la"):
        p.add_argument(flag, type=float, required=True)
    p.add_argument("--bandwidth", type=float, default=500.0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--printed-hb", action="store_true", help="use the uncorrected U^2_HB numerator")

    p = sub.add_parser("attack", help="run one Monte-Carlo attack experiment")
    p.add_argument("attack", choices=ATTACKS)
    _add_common(p)
    _add_attack_flags(p)

    p = sub.add_parser("sweep", help="run an attack over a list of parameter values")
    p.add_argument("attack", choices=ATTACKS)
    p.add_argument("--param", required=True, choices=[_field_flag(f) for f in SWEEPABLE])
    p.add_argument("--values", required=True, help="comma-separated values")
    _add_common(p)
    _add_attack_flags(p)
    return parser


def _field_flag(field: str) -> str:
    for flag, f in FLAG_TO_FIELD.items():
        if f == field:
            return flag
    return field


def spec_from_args(args) -> ExperimentSpec:
    """Defaults, then the config file, then explicit flags."""
    data = {}
    if getattr(args, "config", None):
        data.update(read_config_file(args.config))
    if getattr(args, "command", None) == "sweep":
        data["sweep_param"] = FLAG_TO_FIELD.get(args.param, args.param)
        data["sweep_values"] = args.values
    for flag, field in FLAG_TO_FIELD.items():
        dest = flag.replace("-", "_")
        if dest in ("attack", "sweep", "values"):
            continue
        value = getattr(args, dest, None)
        if value is not None:
            data[field] = value
    data["attack_id"] = args.attack
    scheme = data.get("scheme", "KLJN")
    defaults = dict(DEFAULTS)
    if data["attack_id"] == "zero-crossing" and scheme == "KLJN":
        defaults.update(ZC_KLJN_DEFAULTS)
    if data["attack_id"] == "nonlinearity":
        defaults["gamma"] = NONLINEAR_DEFAULT_GAMMA
    for k, v in defaults.items():
        data.setdefault(k, v)
    return ExperimentSpec.from_dict(data).validate()


def _write(text: str, out: Optional[str]):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_noise_gen(args) -> int:
    r = args.r or args.rh or DEFAULTS["r_h"]
    t = args.teff or DEFAULTS["t_eff"]
    bw = args.bandwidth or DEFAULTS["bandwidth"]
    n = args.samples or 1 << 14
    trace = johnson_trace(n, r, t, bw, args.seed or 0, args.ensemble)
    rep = quality_report(trace)
    summary = {
        "samples": len(trace),
        "rms": trace.rms,
        "mean": rep.mean,
        "skewness": rep.skewness,
        "excess_kurtosis": rep.excess_kurtosis,
        "lag1_autocorr": rep.lag1_autocorr,
        "in_band_psd_mean": rep.in_band_psd_mean(),
    }
    if args.format == "json":
        summary["samples_v"] = trace.samples.tolist()
        _write(json.dumps(summary, indent=2) + "\n", args.out)
        return 0
    t_axis = np.arange(len(trace)) * trace.dt
    lines = ["t,u"] + [f"{a!r},{b!r}" for a, b in zip(t_axis.tolist(), trace.samples.tolist())]
    _write("\n".join(lines) + "\n", args.out)
    print(json.dumps(summary), file=sys.stderr)
    return 0


def _cmd_kljn_run(args) -> int:
    cfg = KljnConfig(
        args.rh or DEFAULTS["r_h"],
        args.rl or DEFAULTS["r_l"],
        args.teff or DEFAULTS["t_eff"],
        args.bandwidth or DEFAULTS["bandwidth"],
        args.samples or DEFAULTS["samples_per_bep"],
    )
    try:
        situation = BitSituation.parse(args.situation)
    except ValueError:
        raise ValidationError(f"unknown situation {args.situation!r}") from None
    record, _ = simulate_bep(cfg.levels(), situation, cfg.samples_per_bep, args.seed or 0, args.ensemble)
    ms = mean_square(record.u_w)
    summary = {
        "situation": situation.value,
        "u_w_mean_square": ms,
        "i_w_mean_square": mean_square(record.i_w),
        "net_power": float(np.mean(record.p_w)),
        "level": classify_level(ms, cfg).value,
        "u_w_rms": rms(record.u_w),
    }
    if args.format == "json":
        summary.update(u_w=record.u_w.tolist(), i_w=record.i_w.tolist(), p_w=record.p_w.tolist())
        _write(json.dumps(summary, indent=2) + "\n", args.out)
        return 0
    t_axis = np.arange(len(record)) * record.dt
    lines = ["t,u_w,i_w,p_w"] + [
        f"{t!r},{u!r},{i!r},{p!r}"
        for t, u, i, p in zip(t_axis.tolist(), record.u_w.tolist(), record.i_w.tolist(), record.p_w.tolist())
    ]
    _write("\n".join(lines) + "\n", args.out)
    print(json.dumps(summary), file=sys.stderr)
    return 0


def _cmd_vmg_derive(args) -> int:
    cfg = VmgConfig(args.rha, args.rla, args.rhb, args.rlb, args.u2la, args.bandwidth)
    d = vmg_levels(cfg, printed_hb=args.printed_hb)
    rows = [
        ("L,A", cfg.r_la, cfg.u2_la, d.t_la),
        ("H,A", cfg.r_ha, d.u2_ha, d.t_ha),
        ("L,B", cfg.r_lb, d.u2_lb, d.t_lb),
        ("H,B", cfg.r_hb, d.u2_hb, d.t_hb),
    ]
    if args.format == "json":
        out = {label: {"r": r, "u2": u2, "t_eff": t} for label, r, u2, t in rows}
        print(json.dumps(out, indent=2))
        return 0
    print(f"{'source':<7}{'R [ohm]':>12}{'U^2 [V^2]':>16}{'T_eff [K]':>16}")
    for label, r, u2, t in rows:
        print(f"{label:<7}{r:>12.6g}{u2:>16.6g}{t:>16.6g}")
    return 0


def _cmd_attack(args) -> int:
    spec = spec_from_args(args)
    report = run_experiment(spec, workers=args.threads)
    if spec.output_path:
        for path in write_report(report, spec.output_path, spec.output_format):
            print(f"wrote {path}", file=sys.stderr)
        for pt in report.points:
            label = ", ".join(f"{k}={v}" for k, v in pt.params.items() if k in ("m", "gamma", "t_eff", "b", "c"))
            print(f"{spec.attack_id} {label} p={pt.p:.4f} sigma={pt.sigma:.4f}")
    else:
        sys.stdout.write(emit_report(report, spec.output_format).decode())
    return 0


COMMANDS = {
    "noise-gen": _cmd_noise_gen,
    "kljn-run": _cmd_kljn_run,
    "vmg-derive": _cmd_vmg_derive,
    "attack": _cmd_attack,
    "sweep": _cmd_attack,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if not argv:
            parser.print_usage(sys.stderr)
            return 2
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 2
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ValidationError, InvalidArgument, SingularConfiguration, UnphysicalConfiguration,
            DegenerateInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KljnLabError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
