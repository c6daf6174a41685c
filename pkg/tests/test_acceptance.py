"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run with ``pytest -v tests/test_acceptance.py`` or directly as a script.
All criteria share one master seed fixed before any result was seen.
"""
from __future__ import annotations

import math
import sys
import time

import numpy as np
import pytest

from kljn_lab.harness import ExperimentSpec, emit_report, run_experiment
from kljn_lab.kljn import BitSituation, KljnConfig, mean_square, simulate_bep, solve_wire
from kljn_lab.attacks.statistical import ccc
from kljn_lab.noise import derive_seed, gen_gblwn, lag1_autocorr, scale_johnson
from kljn_lab.vmg import VmgConfig, vmg_levels
from scipy import stats

SEED = 1
CH2 = dict(r_h=100e3, r_l=10e3, t_eff=1e18, bandwidth=500.0, master_seed=SEED)
M_GRID = (0.0, 0.1, 0.5, 1.0, 1.5, 5.0, 10.0)
TABLE_CCC_LA = (1.0, 0.995, 0.894, 0.707, 0.554, 0.195, 0.0995)

_printer = {"capsys": None}


@pytest.fixture(autouse=True)
def _grab_capsys(capsys):
    _printer["capsys"] = capsys
    yield
    _printer["capsys"] = None


def verdict(n: int, ok: bool, detail: str):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    cap = _printer["capsys"]
    if cap is not None:
        with cap.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


def binom_se(p, n):
    return math.sqrt(p * (1 - p) / n)


def test_criterion_1_survival_law():
    t0 = time.perf_counter()
    rep = run_experiment(ExperimentSpec("det-onebit", runs=1000, samples_per_bep=1000, **CH2))
    frac = rep.diagnostics["undecided_fraction"]
    elapsed = time.perf_counter() - t0
    rows, ok = [], True
    for n in range(1, 9):
        q = 2.0**-n
        got = frac[n] if n < len(frac) else 0.0
        good = abs(got - q) <= 4 * binom_se(q, 1000)
        ok &= good
        rows.append(f"n={n}:{got:.4f}/{q:.4f}{'' if good else '!'}")
    ok &= rep.p == 1.0 and elapsed < 30
    verdict(1, ok, f"undecided vs 2^-n {' '.join(rows)}; p={rep.p:.3f}; {elapsed:.1f}s (<30s)")


def test_criterion_2_ccc_mixing_law():
    t0 = time.perf_counter()
    runs = 200
    rep = run_experiment(
        ExperimentSpec("stat-source", m=0.0, runs=runs, sweep_param="m", sweep_values=M_GRID, **CH2)
    )
    elapsed = time.perf_counter() - t0
    rows, ok = [], True
    for m, table, diag in zip(M_GRID, TABLE_CCC_LA, rep.diagnostics["points"]):
        mean = diag["mean_ccc"]["alice_ccc_low"]
        se = diag["sd_ccc"]["alice_ccc_low"] / math.sqrt(runs)
        law = 1 / math.sqrt(1 + m * m)
        good = abs(mean - law) <= 4 * se + 1e-12 and abs(mean - table) <= 0.03
        ok &= good
        rows.append(f"M={m:g}:{mean:.4f}(law {law:.4f}, se {se:.1e}){'' if good else '!'}")
    ok &= elapsed < 60
    verdict(2, ok, f"{' '.join(rows)}; {elapsed:.1f}s (<60s)")


def test_criterion_3_statistical_success_rates():
    t0 = time.perf_counter()
    src = run_experiment(
        ExperimentSpec("stat-source", m=0.0, runs=1000, sweep_param="m", sweep_values=M_GRID, **CH2)
    )
    chan = run_experiment(ExperimentSpec("stat-channel", m=10.0, quantity="U", runs=1000, **CH2))
    uni = run_experiment(
        ExperimentSpec("stat-channel", m=10.0, quantity="P", knowledge="unilateral", runs=1000, **CH2)
    )
    elapsed = time.perf_counter() - t0
    ps = [pt.p for pt in src.points]
    ok_low = all(p >= 0.99 for m, p in zip(M_GRID, ps) if m <= 5)
    ok_10 = abs(ps[-1] - 0.894) <= 0.03
    ok_chan = abs(chan.p - 0.977) <= 0.02
    ok_uni = abs(uni.p - 0.523) <= 0.03
    ok = ok_low and ok_10 and ok_chan and ok_uni and elapsed < 300
    detail = (
        f"source p(M<=5)={['%.3f' % p for p in ps[:-1]]} (>=0.99 {ok_low}); "
        f"source p(M=10)={ps[-1]:.3f} (0.894+-0.03 {ok_10}); "
        f"bilateral channel U p(M=10)={chan.p:.3f} (0.977+-0.02 {ok_chan}); "
        f"unilateral channel P p(M=10)={uni.p:.3f} (0.523+-0.03 {ok_uni}); {elapsed:.1f}s (<300s)"
    )
    verdict(3, ok, detail)


def test_criterion_4_vmg_fixture():
    d = vmg_levels(VmgConfig(46416, 278, 278, 100, 1.0, 500.0))
    checks = [
        ("u2_ha", d.u2_ha, 1.03e4, 0.01),
        ("u2_lb", d.u2_lb, 0.323, 0.01),
        ("u2_hb", d.u2_hb, 0.477, 0.025),
        ("t_la", d.t_la, 1.3033e17, 0.01),
        ("t_ha", d.t_ha, 8.0671e18, 0.01),
        ("t_lb", d.t_lb, 1.1694e17, 0.01),
    ]
    rows, ok = [], True
    for name, got, want, tol in checks:
        good = abs(got / want - 1) <= tol
        ok &= good
        rows.append(f"{name}={got:.5g}({(got / want - 1) * 100:+.2f}% of {want:g}){'' if good else '!'}")
    verdict(4, ok, " ".join(rows))


def _zc(scheme, **params):
    spec = ExperimentSpec("zero-crossing", scheme=scheme, runs=1000, master_seed=SEED, **params)
    return run_experiment(spec)


def test_criterion_5_zero_crossing():
    t0 = time.perf_counter()
    kljn = _zc("KLJN", r_h=10e3, r_l=1e3, t_eff=1e18, bandwidth=500.0)
    fck = _zc("FCK1", r_ha=100e3, r_la=10e3, r_hb=10e3, r_lb=1e3, u2_la=1.0, bandwidth=500.0)
    vmg = _zc("VMG", r_ha=46416.0, r_la=278.0, r_hb=278.0, r_lb=100.0, u2_la=1.0, bandwidth=500.0)
    elapsed = time.perf_counter() - t0

    def ratios(rep):
        st = {}
        for phase in ("calibration_stats", "attack_stats"):
            for s, v in rep.diagnostics[phase].items():
                st.setdefault(s, []).append(v)
        out = {}
        for s, vs in st.items():
            n = sum(v["runs"] for v in vs)
            zc = sum(v["u2_zc"] * v["runs"] for v in vs) / n
            uw = sum(v["u2_w"] * v["runs"] for v in vs) / n
            out[s] = zc / uw
        return out

    r_vmg = ratios(vmg)
    want_lh, want_hl = 0.301 / 0.368, 0.576 / 0.368
    ok_k = abs(kljn.p - 0.5) <= 0.02
    ok_f = abs(fck.p - 0.5) <= 0.02
    ok_v = abs(vmg.p - 0.70) <= 0.02
    ok_lh = abs(r_vmg["LH"] / want_lh - 1) <= 0.10
    ok_hl = abs(r_vmg["HL"] / want_hl - 1) <= 0.10
    ok = ok_k and ok_f and ok_v and ok_lh and ok_hl and elapsed < 180
    detail = (
        f"KLJN p={kljn.p:.3f} ({ok_k}); FCK1 p={fck.p:.3f} ({ok_f}); VMG p={vmg.p:.3f} (0.70+-0.02 {ok_v}); "
        f"VMG U2zc/U2w LH={r_vmg['LH']:.3f} (want {want_lh:.3f} {ok_lh}) HL={r_vmg['HL']:.3f} "
        f"(want {want_hl:.3f} {ok_hl}); {elapsed:.1f}s (<180s)"
    )
    verdict(5, ok, detail)


def test_criterion_6_nonlinearity():
    t0 = time.perf_counter()
    cases = {"D2": (6e-3, 0.0, 0.9869), "D3": (0.0, 5e-5, 0.9831), "D2,3": (1e-6, 5e-5, 0.9855)}
    gammas = (10, 20, 100, 1000)
    rows, ok = [], True
    for name, (b, c, want) in cases.items():
        hot = run_experiment(
            ExperimentSpec("nonlinearity", b=b, c=c, gamma=gammas, runs=1000,
                           sweep_param="t_eff", sweep_values=(1e18, 1e14), **CH2)
        )
        p_hot = [pt.p for pt in hot.points[:4]]
        p_cold = hot.points[7].p
        tol_mono = binom_se(0.5, 1000)
        mono = all(p_hot[k + 1] >= p_hot[k] - tol_mono for k in range(3))
        near = abs(p_hot[-1] - want) <= 0.015
        cold = abs(p_cold - 0.5) <= 0.03
        ok &= mono and near and cold
        rows.append(
            f"{name}: p(gamma)={['%.3f' % p for p in p_hot]} (1000: want {want}+-0.015 {near}; "
            f"monotone {mono}); p(T=1e14, gamma=1000)={p_cold:.3f} ({cold})"
        )
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 180
    verdict(6, ok, "; ".join(rows) + f"; {elapsed:.1f}s (<180s)")


def test_criterion_7_property_suites():
    t0 = time.perf_counter()
    results = {}
    rng = np.random.default_rng(SEED)

    # KVL residuals and party-swap symmetry on random traces and resistors.
    kvl, swap = 0.0, True
    for k in range(50):
        a = gen_gblwn(1024, 500.0, derive_seed(SEED, k, 0))
        b = gen_gblwn(1024, 500.0, derive_seed(SEED, k, 1))
        a = a.with_samples(a.samples * rng.uniform(0.1, 100))
        b = b.with_samples(b.samples * rng.uniform(0.1, 100))
        ra, rb = rng.uniform(10, 1e6, 2)
        w = solve_wire(a, b, ra, rb)
        scale = max(np.abs(a.samples).max(), np.abs(b.samples).max())
        kvl = max(kvl, np.abs(w.u_w - w.i_w * rb - b.samples).max() / scale,
                  np.abs(w.u_w + w.i_w * ra - a.samples).max() / scale)
        s = solve_wire(b, a, rb, ra)
        swap &= np.array_equal(s.u_w, w.u_w) and np.array_equal(s.i_w, -w.i_w) and np.array_equal(s.p_w, -w.p_w)
    results["kvl<=1e-12"] = kvl <= 1e-12
    results["party-swap"] = swap

    # CCC identities.
    x = gen_gblwn(1024, 500.0, derive_seed(SEED, "x")).samples
    y = gen_gblwn(1024, 500.0, derive_seed(SEED, "y")).samples
    results["ccc(x,x)=1"] = abs(ccc(x, x) - 1) <= 1e-12
    results["|ccc|<=1"] = all(abs(ccc(x, y * s + x * t)) <= 1 + 1e-12 for s, t in rng.normal(size=(50, 2)))

    # Johnson scaling.
    t = scale_johnson(gen_gblwn(1024, 500.0, SEED), 1e4, 1e18, 500.0)
    want = 4 * 1.380649e-23 * 1e18 * 1e4 * 500
    results["johnson 1e-10"] = abs(float(np.mean(t.samples**2)) / want - 1) <= 1e-10

    # GBLWN Gaussianity and whiteness.
    g = gen_gblwn(16384, 500.0, derive_seed(SEED, "gauss")).samples
    skew, kurt, lag = stats.skew(g), stats.kurtosis(g), lag1_autocorr(g)
    results[f"skew {skew:+.3f}"] = abs(skew) < 0.2
    results[f"exkurt {kurt:+.3f}"] = abs(kurt) < 0.3
    results[f"lag1 {lag:+.4f}"] = abs(lag) < 3 / math.sqrt(16384)

    # Ideal KLJN: LH and HL wire mean-squares indistinguishable.
    levels = KljnConfig(**{k: CH2[k] for k in ("r_h", "r_l", "t_eff", "bandwidth")}).levels()
    ms = {s: [] for s in (BitSituation.LH, BitSituation.HL)}
    for r in range(200):
        for s in ms:
            rec, _ = simulate_bep(levels, s, 1000, (SEED, "ms", s.value, r))
            ms[s].append(mean_square(rec.u_w))
    a, b = (np.array(v) for v in ms.values())
    pooled = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
    z = abs(a.mean() - b.mean()) / pooled
    results[f"LH/HL ms z={z:.2f}"] = z < 4

    # Determinism: same seed gives identical bytes, also with two workers.
    spec = ExperimentSpec("stat-channel", m=1.0, runs=40, **CH2)
    b1 = emit_report(run_experiment(spec), "json")
    b2 = emit_report(run_experiment(spec), "json")
    b3 = emit_report(run_experiment(spec, workers=2), "json")
    results["determinism"] = b1 == b2 == b3

    elapsed = time.perf_counter() - t0
    results[f"{elapsed:.1f}s<60s"] = elapsed < 60
    ok = all(results.values())
    verdict(7, ok, " ".join(f"{k}:{'ok' if v else 'FAIL'}" for k, v in results.items()) + f" (kvl {kvl:.1e})")


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
