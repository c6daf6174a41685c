"""Simulation lab for Kirchhoff-Law-Johnson-Noise key exchange and its attacks."""
from .errors import KljnLabError
from .kljn import BitSituation, KljnConfig, WireRecord, simulate_bep, solve_wire
from .noise import NoiseTrace, gen_gblwn, johnson_trace
from .vmg import VmgConfig, vmg_levels

__version__ = "0.1.0"

__all__ = [
    "BitSituation",
    "KljnConfig",
    "KljnLabError",
    "NoiseTrace",
    "VmgConfig",
    "WireRecord",
    "gen_gblwn",
    "johnson_trace",
    "simulate_bep",
    "solve_wire",
    "vmg_levels",
]
