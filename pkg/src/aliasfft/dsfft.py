"""Deterministic binary-tree search: selective layer expansion and leaf decode.

Layer d buckets the spectrum into 2^d alias sums at shift 0.  A bucket's two
children at layer d+1 split its alias set, so only children of active buckets
ever need computing; a layer is computed wholesale by FFT only when that is
cheaper than the per-candidate direct sums.  Expansion stops once the active
count reaches a fraction of the target sparsity (or the tree bottoms out), and
the surviving buckets are decoded in place: 3-shift phase decoding for
single-tons, the one-shot pencil + pursuit path for leftover aliased buckets.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .bucketize import SampleLedger, bucketize, bucketize_set
from .oneshot import (
    OneShotConfig,
    collect_moments,
    detect_sparsity,
    estimate_values,
    locate,
    truncate_spectrum,
)
from .peeling import (
    BucketNode,
    NodeState,
    SearchPlan,
    UnsupportedSizeError,
    classify_exact,
    classify_noisy,
    exact_thresholds,
    kay_weights,
    robust_thresholds,
)
from .signals import SparseSpectrum


@dataclass
class TreeLayer:
    """One layer of the search tree: computed bucket values and the active set."""

    depth: int
    values: dict[int, complex]
    active: set[int] = field(default_factory=set)

    @property
    def b(self) -> int:
        return 1 << self.depth

    @property
    def m_d(self) -> int:
        return len(self.active)


@dataclass
class DsfftConfig:
    theta: float = 0.75
    mode: str = "exact"
    a_m: int = 4
    seed: int = 0
    noise_std: float = 0.0  # time-domain noise std hint; scales thresholds
    activity_floor: float = 1e-6


def _threshold(config: DsfftConfig, depth: int) -> float:
    return max(config.activity_floor, 3.0 * config.noise_std / np.sqrt(1 << depth))


def initial_layer(
    x: np.ndarray, depth: int, ledger: SampleLedger | None, threshold: float
) -> TreeLayer:
    spectrum = bucketize(x, 1 << depth, 0, ledger)
    values = {i: complex(v) for i, v in enumerate(spectrum.values)}
    active = {i for i, v in values.items() if abs(v) > threshold}
    return TreeLayer(depth=depth, values=values, active=active)


def expand_layer(
    x: np.ndarray, prev: TreeLayer, ledger: SampleLedger | None, threshold: float
) -> TreeLayer:
    """Compute layer prev.depth+1, selectively when few buckets are active.

    Candidates are the two children {i, i + 2^(d-1)} of each active bucket.
    When 2*m_{d-1} <= d the candidates are evaluated by direct alias sums
    (each reading the 2^d subsample positions); otherwise the whole layer
    comes from one size-2^d bucketization.
    """
    n = len(x)
    depth = prev.depth + 1
    b = 1 << depth
    if b > n:
        raise ValueError("layer depth exceeds log2 of the signal size")
    half = 1 << (prev.depth)
    candidates = sorted({child for i in prev.active for child in (i, i + half)})
    if 2 * prev.m_d <= depth:
        step = n // b
        idx = np.arange(b) * step
        sub = np.asarray(x, dtype=np.complex128)[idx]
        values = {}
        for i in candidates:
            if ledger is not None:
                ledger.record(idx)
            twiddle = np.exp(-2j * np.pi * i * np.arange(b) / b)
            values[i] = complex(np.dot(sub, twiddle) / b)
        computed = candidates
    else:
        spectrum = bucketize(x, b, 0, ledger)
        values = {i: complex(v) for i, v in enumerate(spectrum.values)}
        computed = list(values)
    active = {i for i in computed if abs(values[i]) > threshold}
    return TreeLayer(depth=depth, values=values, active=active)


def _classify_active(
    x: np.ndarray, layer: TreeLayer, config: DsfftConfig, ledger: SampleLedger | None
) -> tuple[dict[int, complex], list[int]]:
    """Classify every active bucket at this layer's bucket count.

    Measurements (3 consecutive shifts exactly, the full search plan under
    noise) are taken here, at resolution time.  Returns the decoded
    single-tons and the bucket indices still holding several tones.
    """
    n = len(x)
    b = layer.b
    entries: dict[int, complex] = {}
    multitons: list[int] = []
    if config.mode == "exact":
        spectra = bucketize_set(x, b, [0, 1, 2], ledger)
        eps = exact_thresholds(x)
        for i in sorted(layer.active):
            node = BucketNode(0, i, np.array([sp.values[i] for sp in spectra]))
            state = classify_exact(node, eps, eps, b, n)
            if state is NodeState.SINGLE_TON:
                entries[node.f0] = node.value
            elif state is NodeState.MULTI_TON:
                multitons.append(i)
        return entries, multitons
    c = int(np.ceil(np.log2(n)))
    m = max(2, int(np.ceil(np.log2(n) ** (1.0 / 3.0))))
    rng = np.random.default_rng(config.seed)
    plan = SearchPlan(
        c=c,
        m=m,
        anchors=[int(t) for t in rng.integers(0, n, size=c)],
        weights=kay_weights(m),
    )
    shifts = plan.shifts
    spectra = bucketize_set(x, b, shifts, ledger)
    stacked = np.stack([sp.values for sp in spectra], axis=1)
    energies = np.sum(np.abs(stacked) ** 2, axis=1)
    # the stop layer is chosen so tones fill most buckets: a global median is
    # not noise-dominated here, so prefer the noise hint, else measure the
    # inactive (tone-free) buckets
    if config.noise_std > 0.0:
        base = config.noise_std / np.sqrt(b) * np.sqrt(len(shifts))
        floor = 1e-8 * np.sqrt(float(energies.max(initial=0.0)))
        plan.t0 = max(1.5 * base, floor)
        plan.t1 = max(2.5 * base, floor)
    else:
        quiet = [i for i in range(b) if i not in layer.active]
        reference = energies[quiet] if quiet else energies
        plan.t0, plan.t1 = robust_thresholds(reference, len(shifts), scale=energies)
    for i in sorted(layer.active):
        node = BucketNode(0, i, stacked[i])
        state = classify_noisy(node, plan, b, n)
        if state is NodeState.SINGLE_TON:
            entries[node.f0] = node.value
        elif state is NodeState.MULTI_TON:
            multitons.append(i)
    return entries, multitons


def _resolve_leaves(
    x: np.ndarray, layer: TreeLayer, k: int, config: DsfftConfig, ledger: SampleLedger | None
) -> dict[int, complex]:
    """Decode the stop layer's active buckets.

    Exact mode hands leftover aliased buckets to the pencil + pursuit path at
    the stop bucket count.  Under noise that path cannot separate grid points
    much finer than the phase noise, so noisy mode instead keeps splitting
    multi-ton buckets (collisions halve per layer; the bottom layer has none).
    """
    n = len(x)
    max_depth = n.bit_length() - 1
    entries, multitons = _classify_active(x, layer, config, ledger)
    while config.mode != "exact" and multitons and layer.depth < max_depth:
        layer = expand_layer(x, layer, ledger, _threshold(config, layer.depth + 1))
        entries, multitons = _classify_active(x, layer, config, ledger)
    remaining = k - len(entries)
    if multitons and remaining > 0:
        entries.update(
            _resolve_aliased(x, layer.b, multitons, remaining, config, ledger)
        )
    return entries


def _resolve_aliased(
    x: np.ndarray,
    b: int,
    buckets: list[int],
    k_remaining: int,
    config: DsfftConfig,
    ledger: SampleLedger | None,
) -> dict[int, complex]:
    """Pencil + pursuit recovery for buckets still holding several tones."""
    n = len(x)
    step = n // b
    p = max(12, int(np.ceil(config.a_m * np.log10(max(step, 10)))))
    oneshot_cfg = OneShotConfig(b=b, a_m=config.a_m, p=p, variant="dt3", seed=config.seed)
    moments = collect_moments(x, oneshot_cfg, ledger)
    chosen = [moments[i] for i in buckets]
    counts = detect_sparsity(chosen, min(k_remaining, config.a_m * len(buckets)), config.a_m)
    entries: dict[int, complex] = {}
    for pos, m in enumerate(chosen):
        a = min(int(counts[pos]), config.a_m)
        if a == 0:
            continue
        candidates = locate(m, a, "dt3", b, n)
        if candidates is None:
            continue
        solution = estimate_values(m, candidates, b, n)
        for f, v in zip(solution.positions, solution.values):
            entries[f] = v
    return entries


def _calibrate_noise(x: np.ndarray, k: int, ledger: SampleLedger | None) -> float:
    """Estimate the time-domain noise std from one wide bucketization.

    At b ~ 32k buckets the tones occupy a few percent of them, so the median
    bucket energy is an exponential-noise median (sigma_b^2 * ln 2).
    """
    n = len(x)
    b = min(n, 1 << max(0, int(np.ceil(np.log2(32 * k)))))
    values = bucketize(x, b, 0, ledger).values
    median_energy = float(np.median(np.abs(values) ** 2))
    return float(np.sqrt(b * median_energy / np.log(2.0)))


def dsfft(
    x: np.ndarray,
    k: int,
    config: DsfftConfig | None = None,
    ledger: SampleLedger | None = None,
) -> SparseSpectrum:
    """Binary-tree sparse transform for power-of-two signal sizes."""
    n = len(x)
    if n & (n - 1):
        raise UnsupportedSizeError(f"binary-tree search needs a power-of-two size, got {n}")
    if k <= 0:
        return SparseSpectrum(n, {})
    if k > 64:
        warnings.warn(f"binary-tree search degrades for large sparsity (k={k})", stacklevel=2)
    config = config or DsfftConfig()
    max_depth = n.bit_length() - 1
    if config.mode != "exact" and config.noise_std <= 0.0:
        config = replace(config, noise_std=_calibrate_noise(x, k, ledger))
    depth = min(max(0, int(np.ceil(np.log2(k)))), max_depth)
    layer = initial_layer(x, depth, ledger, _threshold(config, depth))
    while layer.m_d < config.theta * k and layer.depth < max_depth:
        layer = expand_layer(x, layer, ledger, _threshold(config, layer.depth + 1))
    entries = _resolve_leaves(x, layer, k, config, ledger)
    return truncate_spectrum(entries, n, k)


def non_aliasing_probability(n: int, k: int, b: int) -> float:
    """Probability that k uniform distinct tones land in k distinct buckets.

    Exact finite-n product: prod_{j=1..k-1} (n - j*L) / (n - j) with L = n/b.
    """
    if b < 1 or n % b:
        raise ValueError(f"bucket count {b} does not divide {n}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}")
    if k > b:
        return 0.0
    step = n // b
    prob = 1.0
    for j in range(1, k):
        prob *= (n - j * step) / (n - j)
    return prob


def non_aliasing_probability_limit(k: int, b: int) -> float:
    """Large-n limit of ``non_aliasing_probability``: prod_{j=1..k-1} (1 - j/b)."""
    if k < 1 or b < 1:
        raise ValueError("k and b must be positive")
    if k > b:
        return 0.0
    prob = 1.0
    for j in range(1, k):
        prob *= 1.0 - j / b
    return prob
