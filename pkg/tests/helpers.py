"""Shared builders for the attack tests."""
from kljn_lab.kljn import KljnConfig, simulate_bep
from kljn_lab.noise import derive_seed, johnson_trace, mix_eve_noise

BW = 500.0
CH2 = KljnConfig(100e3, 10e3, 1e18, BW)


def bep(situation, key, config=CH2, n=1000):
    """Record plus the four sources split per party: ``(record, alice, bob)``."""
    record, src = simulate_bep(config.levels(), situation, n, key)
    alice = {"L": src["L,A"], "H": src["H,A"]}
    bob = {"L": src["L,B"], "H": src["H,B"]}
    return record, alice, bob


def eve_copies(traces, m, key, config=CH2):
    out = {}
    for c, t in traces.items():
        ind = johnson_trace(len(t), config.resistor(c), config.t_eff, config.bandwidth, derive_seed(*key, "eve", c))
        out[c] = mix_eve_noise(t, ind, m, config.resistor(c), config.t_eff, config.bandwidth)
    return out
