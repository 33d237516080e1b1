"""Aliasing-filter encoder: shift, subsample, small DFT, with sample accounting.

Shifting by tau rotates the signal (x'[i] = x[(i - tau) mod N], i.e. the
spectrum picks up a factor w^(tau*i)); subsampling by L folds the spectrum so
frequency f lands in bucket f mod B, B = N/L.  A bucket value after both steps
is the alias sum

    y_B_tau[i] = sum_j  X[j*B + i] * w^(tau*(j*B + i)),   w = exp(-2j*pi/N).

The SampleLedger records exactly which time-domain indices were read at the
subsampling step (the only place an algorithm touches the input signal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SampleLedger:
    """Counts time-domain reads: raw total and deduplicated index set.

    The one mutable object in the encoding path; give each concurrent run its
    own ledger.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("signal size must be >= 1")
        self.n = n
        self.count = 0
        self._mask = np.zeros(n, dtype=bool)

    def record(self, indices: np.ndarray) -> None:
        indices = np.asarray(indices)
        self.count += int(indices.size)
        self._mask[indices] = True

    @property
    def unique_count(self) -> int:
        return int(self._mask.sum())

    @property
    def touched(self) -> set[int]:
        return set(np.flatnonzero(self._mask).tolist())

    @property
    def sampled_fraction(self) -> float:
        return self.unique_count / self.n


@dataclass
class FilteredSpectrum:
    """One round of bucketized measurements: B bucket values at shift tau."""

    b: int
    tau: int
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != self.b:
            raise ValueError("values length must equal bucket count")


def shift(x: np.ndarray, tau: int) -> np.ndarray:
    """Rotated signal x'[i] = x[(i - tau) mod N]."""
    return np.roll(np.asarray(x), tau)


def downsample(x: np.ndarray, step: int, ledger: SampleLedger | None = None) -> np.ndarray:
    """Every step-th sample, x[0], x[step], ...; step must divide len(x)."""
    x = np.asarray(x)
    n = x.size
    if step < 1 or n % step:
        raise ValueError(f"subsampling step {step} does not divide signal size {n}")
    idx = np.arange(0, n, step)
    if ledger is not None:
        ledger.record(idx)
    return x[idx]


def bucketize(
    x: np.ndarray, b: int, tau: int, ledger: SampleLedger | None = None
) -> FilteredSpectrum:
    """Shift by tau, subsample to b points, and take the size-b forward DFT.

    Reads exactly b samples of x (indices (j*L - tau) mod N); the shift itself
    is an index map, not a copy.
    """
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    if b < 1 or n % b:
        raise ValueError(f"bucket count {b} does not divide signal size {n}")
    step = n // b
    idx = (np.arange(b) * step - tau) % n
    if ledger is not None:
        ledger.record(idx)
    return FilteredSpectrum(b=b, tau=tau, values=np.fft.fft(x[idx]) / b)


def bucketize_set(
    x: np.ndarray, b: int, shifts, ledger: SampleLedger | None = None
) -> list[FilteredSpectrum]:
    """One FilteredSpectrum per shift, in order; ledger grows by len(shifts)*b."""
    return [bucketize(x, b, int(tau), ledger) for tau in shifts]
