"""Gaussian band-limited white noise and Johnson-noise scaling.

Every random trace in the lab comes from :func:`gen_gblwn`. A trace is
keyed by an integer seed or a tuple of integers, so that independent named
sources (``"H,A"``, ``"L,B"``, Eve's additives, ...) can be drawn from
streams derived from one master seed without depending on evaluation order.
"""
from __future__ import annotations

import warnings
import zlib
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import signal, stats

from .errors import DegenerateInput, InvalidArgument

BOLTZMANN = 1.380649e-23  # J/K, exact SI value

SeedLike = Union[int, Sequence[int]]


@dataclass(frozen=True, eq=False)
class NoiseTrace:
    """Uniformly sampled real voltage sequence.

    ``dt`` is the Nyquist time step ``1 / (2 * bandwidth)``.
    """

    samples: np.ndarray
    dt: float
    bandwidth: float

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1:
            raise InvalidArgument("samples must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgument("samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    @property
    def rms(self) -> float:
        return rms(self.samples)

    def with_samples(self, samples) -> "NoiseTrace":
        return NoiseTrace(samples, self.dt, self.bandwidth)

    def head(self, n: int) -> "NoiseTrace":
        return self.with_samples(self.samples[:n])


@dataclass(frozen=True)
class NoiseQualityReport:
    mean: float
    std: float
    skewness: float
    excess_kurtosis: float
    lag1_autocorr: float
    psd_freqs: np.ndarray = field(repr=False)
    psd: np.ndarray = field(repr=False)

    @property
    def psd_bins(self):
        return list(zip(self.psd_freqs.tolist(), self.psd.tolist()))

    def in_band_psd_mean(self, guard: float = 0.1) -> float:
        """Mean PSD over the band, excluding ``guard`` fractions at both edges."""
        f_max = self.psd_freqs[-1]
        sel = (self.psd_freqs > guard * f_max) & (self.psd_freqs < (1 - guard) * f_max)
        return float(np.mean(self.psd[sel]))


@dataclass(frozen=True)
class EveMix:
    """Mixing parameters for Eve's partially correlated copies."""

    m: float
    master_seed: int
    per_source_seeds: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.m < 0:
            raise InvalidArgument("mixing multiplier m must be >= 0")


def rms(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(np.mean(x * x)))


def johnson_rms(r: float, t_eff: float, bandwidth: float) -> float:
    """RMS voltage of a resistor's thermal noise, sqrt(4 k T R df)."""
    return float(np.sqrt(4.0 * BOLTZMANN * t_eff * r * bandwidth))


def label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def derive_seed(master_seed: int, *keys) -> tuple:
    """Seed tuple for an independent stream keyed by ``keys``.

    String keys are hashed with CRC-32, integers are used as-is.
    """
    out = [int(master_seed)]
    for k in keys:
        out.append(label_key(k) if isinstance(k, str) else int(k))
    return tuple(out)


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, (int, np.integer)):
        entropy = int(seed)
    else:
        entropy = [int(s) for s in seed]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    return 1 << max(1, int(n - 1).bit_length())


def gen_gblwn(
    n_samples: int,
    bandwidth: float,
    seed: SeedLike,
    ensemble_count: int = 4,
) -> NoiseTrace:
    """Unit-RMS Gaussian band-limited white noise at the Nyquist rate.

    Procedure: ``ensemble_count`` independent normal series are averaged and
    renormalized to unit RMS; the series is transformed, its spectrum is
    zero-padded to twice the length (real and imaginary parts alike), and the
    real part of the inverse transform is decimated back to ``dt = 1/(2B)``.
    The bin at exactly half the sample rate is cleared, since band-limited
    interpolation cannot represent it. The result is renormalized to zero
    mean and unit RMS.
    """
    if not _is_power_of_two(int(n_samples)):
        raise InvalidArgument(f"n_samples must be a power of two >= 2, got {n_samples}")
    if ensemble_count < 1:
        raise InvalidArgument("ensemble_count must be >= 1")
    if bandwidth <= 0:
        raise InvalidArgument("bandwidth must be positive")
    n = int(n_samples)
    rng = make_rng(seed)
    raw = rng.standard_normal((int(ensemble_count), n)).mean(axis=0)
    scale = rms(raw)
    if scale == 0.0:
        raise DegenerateInput("raw source stream is identically zero")
    raw /= scale

    spec = np.fft.fft(raw)
    spec[n // 2] = 0.0
    padded = np.zeros(2 * n, dtype=complex)
    padded[: n // 2] = spec[: n // 2]
    padded[-(n // 2):] = spec[n // 2:]
    dense = 2.0 * np.fft.ifft(padded).real
    x = dense[::2]

    x = x - x.mean()
    x /= rms(x)
    return NoiseTrace(x, 1.0 / (2.0 * bandwidth), float(bandwidth))


def johnson_trace(
    n_samples: int,
    r: float,
    t_eff: float,
    bandwidth: float,
    seed: SeedLike,
    ensemble_count: int = 4,
    record_length: Optional[int] = None,
) -> NoiseTrace:
    """Johnson-scaled GBLWN of arbitrary length.

    The noise is generated and normalized as one record of
    ``max(n_samples, record_length)`` samples (rounded up to a power of two)
    and its first ``n_samples`` are returned. A long record leaves the
    mean-square of a short window free to fluctuate, as for a window cut
    from a long noise file; without it the window's RMS is nearly exact.
    """
    if n_samples < 1:
        raise InvalidArgument("n_samples must be >= 1")
    if record_length is not None and record_length < 1:
        raise InvalidArgument("record_length must be >= 1")
    n_gen = next_power_of_two(max(n_samples, record_length or 1))
    base = gen_gblwn(n_gen, bandwidth, seed, ensemble_count)
    return scale_johnson(base, r, t_eff, bandwidth).head(n_samples)


def scale_to_rms(trace: NoiseTrace, target_rms: float) -> NoiseTrace:
    s = trace.rms
    if s == 0.0:
        raise DegenerateInput("cannot rescale a zero-RMS trace")
    return trace.with_samples(trace.samples * (target_rms / s))


def scale_johnson(trace: NoiseTrace, r: float, t_eff: float, bandwidth: float) -> NoiseTrace:
    """Rescale ``trace`` so its RMS equals sqrt(4 k T_eff R df) exactly."""
    if r <= 0 or t_eff <= 0 or bandwidth <= 0:
        raise InvalidArgument("r, t_eff and bandwidth must all be positive")
    return scale_to_rms(trace, johnson_rms(r, t_eff, bandwidth))


def mix_eve_noise(
    base: NoiseTrace,
    independent: NoiseTrace,
    m: float,
    r: float,
    t_eff: float,
    bandwidth: float,
) -> NoiseTrace:
    """Eve's copy of a party's noise, diluted by ``m`` times an independent noise.

    The independent noise is brought to the Johnson level of ``r`` before
    mixing, and the sum is renormalized to that same level. The correlation
    with ``base`` is then 1/sqrt(1 + m^2) in expectation.
    """
    if len(base) != len(independent) or base.dt != independent.dt:
        raise InvalidArgument("base and independent traces must have equal length and dt")
    if m < 0:
        raise InvalidArgument("m must be >= 0")
    level = johnson_rms(r, t_eff, bandwidth)
    extra = scale_to_rms(independent, level).samples if m else 0.0
    mixed = base.samples + m * extra
    return scale_to_rms(base.with_samples(mixed), level)


def lag1_autocorr(x) -> float:
    x = np.asarray(x, dtype=float)
    denom = float(np.dot(x, x))
    if denom == 0.0:
        return float("nan")
    return float(np.dot(x[:-1], x[1:]) / denom)


def quality_report(trace: NoiseTrace, n_psd_segments: int = 8) -> NoiseQualityReport:
    """Moments, lag-1 autocorrelation and a segment-averaged periodogram."""
    n = len(trace)
    if n_psd_segments < 1 or n < 4 * n_psd_segments:
        raise InvalidArgument("trace too short for the requested number of PSD segments")
    x = trace.samples
    std = float(np.std(x))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if std == 0.0:
            skew = kurt = float("nan")
        else:
            skew = float(stats.skew(x))
            kurt = float(stats.kurtosis(x))
    freqs, psd = signal.welch(
        x,
        fs=1.0 / trace.dt,
        nperseg=n // n_psd_segments,
        noverlap=0,
        window="hann",
        detrend=False,
        scaling="density",
    )
    return NoiseQualityReport(
        mean=float(np.mean(x)),
        std=std,
        skewness=skew,
        excess_kurtosis=kurt,
        lag1_autocorr=lag1_autocorr(x),
        psd_freqs=freqs,
        psd=psd,
    )
