"""Signal model, dense transform oracle, synthetic test cases, recovery metrics.

Transform convention used throughout this package: the *forward* transform is
normalized by 1/N,

    X[i] = (1/N) * sum_j x[j] * exp(-2j*pi*i*j / N)

so that a frequency coefficient of magnitude 1 stays magnitude 1 regardless of
signal length.  Most FFT libraries (numpy included) put the 1/N on the inverse
instead; ``dense_dft``/``inverse_dft`` absorb the scale factor, and every other
module in this package builds on them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SparseSpectrum:
    """A set of frequency coefficients: position in [0, n) -> complex value."""

    n: int
    entries: dict[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("signal size must be >= 1")
        if len(self.entries) > self.n:
            raise ValueError("more entries than frequency positions")
        for f in self.entries:
            if not 0 <= f < self.n:
                raise ValueError(f"frequency position {f} outside [0, {self.n})")

    @property
    def support(self) -> list[int]:
        return sorted(self.entries)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.complex128)
        for f, v in self.entries.items():
            out[f] = v
        return out


@dataclass(frozen=True)
class ErrorMetrics:
    """Support/L1/L2 discrepancy between a true and an estimated spectrum."""

    l0: int
    l1: float
    l2: float


@dataclass
class TestCase:
    """A synthetic sparse signal plus its ground-truth spectrum."""

    signal: np.ndarray
    truth: SparseSpectrum
    snr_db: float | str
    seed: int


def dense_dft(x: np.ndarray) -> np.ndarray:
    """Full spectrum of ``x`` under the 1/N-forward convention."""
    x = np.asarray(x, dtype=np.complex128)
    return np.fft.fft(x) / x.size


def inverse_dft(spectrum: np.ndarray | SparseSpectrum) -> np.ndarray:
    """Time-domain signal whose ``dense_dft`` is ``spectrum``."""
    if isinstance(spectrum, SparseSpectrum):
        spectrum = spectrum.to_dense()
    spectrum = np.asarray(spectrum, dtype=np.complex128)
    return np.fft.ifft(spectrum) * spectrum.size


def generate_test_case(
    n: int,
    k: int,
    snr_db: float | str = "exact",
    seed: int = 0,
    positions=None,
) -> TestCase:
    """Draw a k-sparse spectrum of unit-magnitude, random-phase tones.

    Positions are uniform without replacement (or fixed via ``positions``),
    each coefficient is exp(1j*theta) with theta uniform in [0, 2pi).  For a
    finite ``snr_db``, circular complex white Gaussian noise is added in the
    time domain with per-sample variance  P_sig / 10^(snr_db/10), where P_sig
    is the mean squared magnitude of the clean signal.  Deterministic for
    fixed (n, k, snr_db, seed, positions).
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    if positions is None:
        positions = np.sort(rng.choice(n, size=k, replace=False))
    else:
        positions = np.asarray(sorted(int(f) for f in positions))
        if positions.size != k or np.unique(positions).size != k:
            raise ValueError("positions must be k distinct values")
        if positions.min() < 0 or positions.max() >= n:
            raise ValueError("positions outside [0, n)")
    phases = rng.uniform(0.0, 2.0 * np.pi, size=k)
    coeffs = np.exp(1j * phases)
    truth = SparseSpectrum(n, {int(f): complex(c) for f, c in zip(positions, coeffs)})
    signal = inverse_dft(truth)
    if snr_db != "exact":
        p_sig = float(np.mean(np.abs(signal) ** 2))
        var = p_sig / 10.0 ** (float(snr_db) / 10.0)
        noise = rng.normal(scale=np.sqrt(var / 2.0), size=(n, 2))
        signal = signal + noise[:, 0] + 1j * noise[:, 1]
    return TestCase(signal=signal, truth=truth, snr_db=snr_db, seed=seed)


def evaluate(truth: SparseSpectrum, estimate: SparseSpectrum, tol: float = 0.1) -> ErrorMetrics:
    """Compare two sparse spectra over the union of their supports.

    l0 counts positions where |truth - estimate| > tol; l1/l2 are the usual
    norms of the coefficient differences.
    """
    if truth.n != estimate.n:
        raise ValueError(f"size mismatch: {truth.n} != {estimate.n}")
    support = set(truth.entries) | set(estimate.entries)
    diffs = np.array(
        [truth.entries.get(f, 0.0) - estimate.entries.get(f, 0.0) for f in sorted(support)],
        dtype=np.complex128,
    )
    mags = np.abs(diffs)
    return ErrorMetrics(
        l0=int(np.sum(mags > tol)),
        l1=float(np.sum(mags)),
        l2=float(np.sqrt(np.sum(mags**2))),
    )
