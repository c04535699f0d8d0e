"""Sampling oracle for the analytic TPM statistics."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ..measurement import MeasurementChannel
from ..tpm import Process, _check_channel, initial_populations, nonideal_joint, work_values


class Estimate(NamedTuple):
    value: float
    stderr: float


class MonteCarloResult(NamedTuple):
    mean_w: Estimate
    jarzynski: Estimate
    energy_change: Estimate
    samples: int
    frequencies: np.ndarray


def generator(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based Philox stream keyed by ``seed XOR index``."""
    return np.random.Generator(np.random.Philox((int(seed) ^ int(index)) & (2 ** 64 - 1)))


def _estimate(x: np.ndarray) -> Estimate:
    return Estimate(float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size)))


def _inverse_cdf(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf, u * cdf[-1], side="right")
    return np.minimum(idx, cdf.size - 1)


def monte_carlo_tpm(
    process: Process,
    beta: float,
    channel0: MeasurementChannel,
    channelf: MeasurementChannel,
    samples: int,
    seed: int,
    index: int = 0,
) -> MonteCarloResult:
    """Sample ``(n, m)`` from the non-ideal joint table and ``k`` from ``qf[:, m]``.

    Returns estimates of ``<W>``, ``<exp(-beta W)>`` and the system energy
    change ``E_k^f - E_n^0``, each with its standard error.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    _check_channel(channelf, process.hf, "second")
    joint = nonideal_joint(process, beta, channel0).p
    d = process.d
    rng = generator(seed, index)

    pair = _inverse_cdf(np.cumsum(joint.reshape(-1)), rng.random(samples))
    n, m = np.divmod(pair, d)
    w = work_values(process.h0, process.hf)[n, m]

    col_cdf = np.cumsum(channelf.q, axis=0)  # [k, m]
    u = rng.random(samples) * col_cdf[-1, m]
    k = np.minimum(np.sum(u[:, None] >= col_cdf[:, m].T, axis=1), d - 1)
    de = process.hf.eigenvalues[k] - process.h0.eigenvalues[n]

    freq = np.bincount(pair, minlength=d * d).reshape(d, d) / samples
    return MonteCarloResult(_estimate(w), _estimate(np.exp(-beta * w)), _estimate(de), samples, freq)
