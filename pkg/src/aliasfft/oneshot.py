"""One-shot recovery: sFFT-DT1.0/2.0/3.0.

Per bucket, the shifted measurements form power sums m_t = sum_j p_j * z_j^t
over the tones aliased into that bucket (z_j = w^{f_j}).  Recovery runs in
three steps: a Hankel-SVD vote decides how many tones each bucket holds, a
moment solve plus one of three localizers (polynomial roots, grid enumeration,
matrix pencil) finds the positions, and subspace pursuit over the random-shift
measurements refines positions to grid neighbors and estimates the values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bucketize import SampleLedger, bucketize_set
from .signals import SparseSpectrum
from .smallnum import pencil_eigenvalues, poly_roots, solve_linear

VARIANTS = ("dt1", "dt2", "dt3")

_SP_MAX_ITERS = 10
_TIE_QUANTUM = 1e-12


@dataclass
class OneShotConfig:
    """Bucketization and pursuit parameters for one one-shot run."""

    b: int
    a_m: int = 4
    p: int = 12
    variant: str = "dt3"
    seed: int = 0

    @classmethod
    def default(cls, n: int, k: int, variant: str = "dt3", seed: int = 0) -> "OneShotConfig":
        """B = 32K rounded up to a power of two, raised until N/B <= 1000."""
        if k < 1:
            raise ValueError("k must be >= 1")
        b = 1 << max(0, int(np.ceil(np.log2(32 * k))))
        while n // b > 1000:
            b *= 2
        b = min(b, n)
        return cls(b=b, variant=variant, seed=seed)

    def validate(self, n: int) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not 1 <= self.a_m <= 4:
            raise ValueError("a_m must be in 1..4")
        if self.b < 1 or n % self.b:
            raise ValueError(f"bucket count {self.b} does not divide {n}")
        step = n // self.b
        floor = self.a_m * np.log10(max(step, 1))
        if self.p < floor:
            raise ValueError(
                f"p={self.p} is below the measurement floor a_m*log10(L)={floor:.2f}"
            )


@dataclass
class BucketMoments:
    """One bucket's measurements: structured shifts for the moment equations,
    random shifts for the pursuit stage.  Keys are the shift values."""

    bucket: int
    structured: dict[int, complex]
    random: dict[int, complex] = field(default_factory=dict)


@dataclass
class BucketSolution:
    bucket: int
    a: int
    positions: list[int]
    values: list[complex]


def structured_shifts(a_m: int) -> list[int]:
    """The 3*a_m consecutive shifts -a_m .. 2*a_m - 1."""
    return list(range(-a_m, 2 * a_m))


def collect_moments(
    x: np.ndarray, config: OneShotConfig, ledger: SampleLedger | None = None
) -> list[BucketMoments]:
    """Bucketize over the structured and random shift sets; (3*a_m + p) rounds."""
    n = len(x)
    config.validate(n)
    shifts = structured_shifts(config.a_m)
    rng = np.random.default_rng(config.seed)
    random_shifts = [int(t) for t in rng.choice(n, size=config.p, replace=False)]
    spectra = bucketize_set(x, config.b, shifts, ledger)
    random_spectra = bucketize_set(x, config.b, random_shifts, ledger)
    out = []
    for i in range(config.b):
        out.append(
            BucketMoments(
                bucket=i,
                structured={t: complex(sp.values[i]) for t, sp in zip(shifts, spectra)},
                random={t: complex(sp.values[i]) for t, sp in zip(random_shifts, random_spectra)},
            )
        )
    return out


def _hankel(moments: BucketMoments, size: int, start: int = 0) -> np.ndarray:
    m = moments.structured
    return np.array(
        [[m[start + r + c] for c in range(size)] for r in range(size)], dtype=np.complex128
    )


def detect_sparsity(moments: list[BucketMoments], k: int, a_m: int) -> np.ndarray:
    """Per-bucket tone counts via a global vote over Hankel singular values.

    Each bucket contributes the a_m singular values of its moment Hankel; the
    k largest values across all buckets mark their buckets, and a bucket's
    count is how many of its values were marked.  Near-ties (within 1e-12) go
    to the lower bucket index.
    """
    b = len(moments)
    counts = np.zeros(b, dtype=int)
    if k <= 0:
        return counts
    sigmas = np.empty((b, a_m))
    for pos, m in enumerate(moments):
        sigmas[pos] = np.linalg.svd(_hankel(m, a_m), compute_uv=False)
    flat = sigmas.ravel()
    # position in the input list stands in for the bucket index, so subsets of
    # a bucketization work too (ties then prefer the lower bucket)
    buckets = np.repeat(np.arange(b), a_m)
    slots = np.tile(np.arange(a_m), b)
    quantized = np.round(flat / _TIE_QUANTUM).astype(np.int64)
    order = np.lexsort((slots, buckets, -quantized))
    chosen = order[: min(k, flat.size)]
    np.add.at(counts, buckets[chosen], 1)
    return counts


def _unit_root(f: np.ndarray | int, n: int, exponent: np.ndarray | int = 1) -> np.ndarray:
    # w^(e*f) with the product reduced mod n first, keeping phases accurate
    # for large n.
    prod = (np.asarray(exponent, dtype=np.int64) * np.asarray(f, dtype=np.int64)) % n
    return np.exp(-2j * np.pi * prod / n)


def _snap_to_grid(z: complex, bucket: int, b: int, n: int) -> int:
    """Nearest on-grid frequency f = bucket + j*b to the root's phase."""
    step = n // b
    f_est = (-np.angle(z) * n / (2.0 * np.pi)) % n
    d = (f_est - bucket) / b
    j = int(np.floor(d + 0.5))
    if abs(d - np.floor(d) - 0.5) < 1e-12:
        j = int(np.floor(d))  # exact tie: prefer the smaller frequency
    return (bucket + (j % step) * b) % n


def locate(
    moments: BucketMoments, a: int, method: str, b: int, n: int
) -> list[int] | None:
    """Candidate frequencies for a bucket holding ``a`` tones, or None when
    the moment system is too degenerate to trust."""
    if a < 1:
        return []
    bucket = moments.bucket
    step = n // b
    if method == "dt3":
        size = a + 1
        pencil = np.array(
            [[moments.structured[r - c] for c in range(size)] for r in range(size)],
            dtype=np.complex128,
        )
        result = pencil_eigenvalues(pencil[:, :-1], pencil[:, 1:], a)
        roots = result.values
        if roots.size == 0 or not np.all(np.isfinite(roots)):
            return None
        positions = [_snap_to_grid(z, bucket, b, n) for z in roots]
        return sorted(set(positions))
    # dt1/dt2 share the moment-coefficient solve
    hank = _hankel(moments, a)
    rhs = -np.array([moments.structured[a + r] for r in range(a)], dtype=np.complex128)
    sol = solve_linear(hank, rhs)
    coeffs = sol.x
    if not np.all(np.isfinite(coeffs)):
        return None
    if method == "dt1":
        roots = poly_roots(coeffs)
        positions = [_snap_to_grid(z, bucket, b, n) for z in roots]
        return sorted(set(positions))
    if method == "dt2":
        cands = (bucket + b * np.arange(step)) % n
        z = _unit_root(cands, n)
        pvals = np.polyval(np.concatenate(([1.0 + 0j], coeffs[::-1])), z)
        take = min(a, step)
        best = np.argsort(np.abs(pvals), kind="stable")[:take]
        return sorted(int(cands[j]) for j in best)
    raise ValueError(f"unknown localization method {method!r}")


def estimate_values(
    moments: BucketMoments, candidates: list[int], b: int, n: int
) -> BucketSolution:
    """Subspace pursuit over the random-shift measurements.

    The dictionary holds, for every candidate f, the atoms at f and its two
    grid neighbors f+-b (all in the same residue class), so a localizer that
    landed one grid step off is corrected here.  Iterates select/least-squares
    until the residual stops improving.
    """
    bucket = moments.bucket
    shifts = np.array(list(moments.random), dtype=np.int64)
    y = np.array([moments.random[int(t)] for t in shifts], dtype=np.complex128)
    empty = BucketSolution(bucket=bucket, a=0, positions=[], values=[])
    candidates = sorted(set(int(f) for f in candidates))
    if not candidates or np.linalg.norm(y) == 0.0:
        return empty
    freqs: list[int] = []
    for f in candidates:
        for g in (f, (f + b) % n, (f - b) % n):
            if g not in freqs:
                freqs.append(g)
    freqs_arr = np.array(freqs, dtype=np.int64)
    atoms = _unit_root(freqs_arr[None, :], n, shifts[:, None])
    want = min(len(candidates), len(freqs), len(shifts))
    tol = 1e-10 * max(1.0, float(np.linalg.norm(y)))

    def refit(support: np.ndarray):
        coef, *_ = np.linalg.lstsq(atoms[:, support], y, rcond=None)
        res = float(np.linalg.norm(y - atoms[:, support] @ coef))
        return coef, res

    support = np.argsort(-np.abs(atoms.conj().T @ y), kind="stable")[:want]
    coef, res = refit(support)
    best = (support, coef, res)
    for _ in range(_SP_MAX_ITERS):
        if best[2] <= tol:
            break
        residual = y - atoms[:, best[0]] @ best[1]
        fresh = np.argsort(-np.abs(atoms.conj().T @ residual), kind="stable")[:want]
        merged = np.union1d(best[0], fresh)
        coef_m, _ = refit(merged)
        pruned = merged[np.argsort(-np.abs(coef_m), kind="stable")[:want]]
        coef, res = refit(np.sort(pruned))
        if res >= best[2]:
            break
        best = (np.sort(pruned), coef, res)
    support, coef, _ = best
    positions = [int(freqs_arr[j]) for j in support]
    return BucketSolution(
        bucket=bucket,
        a=len(positions),
        positions=positions,
        values=[complex(v) for v in coef],
    )


def truncate_spectrum(entries: dict[int, complex], n: int, k: int) -> SparseSpectrum:
    """Keep the k largest-magnitude coefficients (ties toward lower frequency)."""
    ranked = sorted(entries.items(), key=lambda item: (-abs(item[1]), item[0]))
    return SparseSpectrum(n, dict(ranked[:k]))


def sfft_dt(
    x: np.ndarray, k: int, config: OneShotConfig | None = None, ledger: SampleLedger | None = None
) -> SparseSpectrum:
    """Full one-shot pipeline: collect, detect, locate, estimate, truncate."""
    n = len(x)
    if k <= 0:
        return SparseSpectrum(n, {})
    if config is None:
        config = OneShotConfig.default(n, k)
    config.validate(n)
    moments = collect_moments(x, config, ledger)
    counts = detect_sparsity(moments, k, config.a_m)
    entries: dict[int, complex] = {}
    for pos, m in enumerate(moments):
        a = int(counts[pos])
        if a == 0:
            continue
        candidates = locate(m, a, config.variant, config.b, n)
        if candidates is None:
            continue  # degenerate bucket: contributes nothing
        solution = estimate_values(m, candidates, config.b, n)
        for f, v in zip(solution.positions, solution.values):
            entries[f] = v
    return truncate_spectrum(entries, n, k)
