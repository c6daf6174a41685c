"""Small Monte-Carlo summary helpers."""
from __future__ import annotations

import math

import numpy as np

N_BATCHES = 10


def batch_sigma(correct, batches: int = N_BATCHES) -> float:
    """Sample standard deviation of the success rate across equal consecutive batches.

    Batches come from ``np.array_split`` in run order. Fewer runs than
    batches gives 0.
    """
    correct = np.asarray(correct, dtype=float)
    if batches < 2 or correct.size < batches:
        return 0.0
    rates = [b.mean() for b in np.array_split(correct, batches)]
    return float(np.std(rates, ddof=1))


def binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n) if n > 0 else float("inf")
