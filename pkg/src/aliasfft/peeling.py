"""Peeling recovery over co-prime bucketization cycles: FFAST and R-FFAST.

The signal size must split into pairwise co-prime cycle sizes B_1..B_d (each
dividing N), so a frequency's residues across cycles identify it uniquely.
Buckets are classified as zero-ton / single-ton / multi-ton; single-tons are
decoded (3-shift phase ratio in the exact case, a Kay-weighted multi-stride
phase search in the noisy case) and their contribution subtracted from every
other cycle, round after round, until the graph empties.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .bucketize import SampleLedger, bucketize_set
from .signals import SparseSpectrum
from .smallnum import least_squares
from .oneshot import truncate_spectrum


class UnsupportedSizeError(ValueError):
    """Raised when a signal size cannot be split into co-prime cycles."""


class NodeState(Enum):
    UNKNOWN = "unknown"
    ZERO_TON = "zero-ton"
    SINGLE_TON = "single-ton"
    MULTI_TON = "multi-ton"
    RESOLVED = "resolved"


@dataclass
class CyclePlan:
    """Pairwise co-prime bucket counts plus the shift set shared by cycles."""

    factors: list[int]
    shifts: list[int]

    @property
    def r(self) -> int:
        return len(self.shifts)


@dataclass
class SearchPlan:
    """Noisy singleton-search layout: c iterations of m rounds at stride 2^j."""

    c: int
    m: int
    anchors: list[int]
    weights: np.ndarray
    t0: float | None = None
    t1: float | None = None

    @property
    def shifts(self) -> list[int]:
        return [int(self.anchors[j] + (1 << j) * t) for j in range(self.c) for t in range(self.m)]


class BucketNode:
    """One bucket of one cycle: its measurement vector and live residual."""

    def __init__(self, cycle: int, index: int, vec: np.ndarray):
        self.cycle = cycle
        self.index = index
        self.vec = np.asarray(vec, dtype=np.complex128)
        self.residual = self.vec.copy()
        self.state = NodeState.UNKNOWN
        self.f0: int | None = None
        self.value: complex | None = None


@dataclass
class PeelingGraph:
    n: int
    factors: list[int]
    shifts: list[int]
    cycles: list[list[BucketNode]]
    recovered: dict[int, complex] = field(default_factory=dict)


@dataclass
class DecodeResult:
    spectrum: SparseSpectrum
    unresolved_multitons: int
    rounds: int


def kay_weights(m: int) -> np.ndarray:
    """Parabolic weights over the m-1 phase differences; they sum to 1."""
    if m < 2:
        raise ValueError("need at least two rounds per iteration")
    t = np.arange(m - 1)
    return 1.5 * m / (m * m - 1.0) * (1.0 - 4.0 * ((2.0 * t - m + 2.0) / (2.0 * m)) ** 2)


def coprime_factors(n: int) -> list[int]:
    """Prime-power factorization of n (pairwise co-prime by construction)."""
    factors = []
    rem = n
    p = 2
    while p * p <= rem:
        if rem % p == 0:
            q = 1
            while rem % p == 0:
                rem //= p
                q *= p
            factors.append(q)
        p += 1
    if rem > 1:
        factors.append(rem)
    return sorted(factors)


def _group_factors(powers: list[int], k: int) -> list[int]:
    """Merge prime powers into pairwise co-prime cycle sizes.

    Prefers as many cycles as possible while keeping every cycle at least
    2k buckets (so the expected per-bucket load stays below one half); when
    even two cycles cannot reach that, falls back to the raw prime powers.
    """
    target = max(2, 2 * k)
    for d in range(len(powers), 1, -1):
        groups = [1] * d
        for q in sorted(powers, reverse=True):
            groups[groups.index(min(groups))] *= q
        if min(groups) >= target:
            return sorted(groups)
    return list(powers)


def plan_cycles(
    n: int, k: int, mode: str = "exact", seed: int = 0
) -> tuple[CyclePlan, SearchPlan | None]:
    """Choose cycle sizes and the shift set for a peeling run.

    Exact mode uses the three consecutive shifts 0,1,2.  Noisy mode returns a
    SearchPlan with c = ceil(log2 n) iterations of m = max(2, ceil(cbrt(log2
    n))) rounds and seeded random anchors.  Raises UnsupportedSizeError when n
    has fewer than two co-prime divisors.
    """
    powers = coprime_factors(n)
    if len(powers) < 2:
        raise UnsupportedSizeError(
            f"signal size {n} has a single prime-power factor; need two or more co-prime cycles"
        )
    if k**3 >= n:
        warnings.warn(
            f"peeling works best when k < n^(1/3); got k={k}, n={n}", stacklevel=2
        )
    factors = _group_factors(powers, k)
    if mode == "exact":
        return CyclePlan(factors=factors, shifts=[0, 1, 2]), None
    if mode != "noisy":
        raise ValueError(f"unknown mode {mode!r}")
    c = int(np.ceil(np.log2(n)))
    m = max(2, int(np.ceil(np.log2(n) ** (1.0 / 3.0))))
    rng = np.random.default_rng(seed)
    anchors = [int(t) for t in rng.integers(0, n, size=c)]
    plan = SearchPlan(c=c, m=m, anchors=anchors, weights=kay_weights(m))
    return CyclePlan(factors=factors, shifts=plan.shifts), plan


def build_graph(
    x: np.ndarray, plan: CyclePlan, ledger: SampleLedger | None = None
) -> PeelingGraph:
    n = len(x)
    cycles = []
    for j, b in enumerate(plan.factors):
        spectra = bucketize_set(x, b, plan.shifts, ledger)
        stacked = np.stack([sp.values for sp in spectra], axis=1)  # (b, r)
        cycles.append([BucketNode(j, i, stacked[i]) for i in range(b)])
    return PeelingGraph(n=n, factors=list(plan.factors), shifts=list(plan.shifts), cycles=cycles)


def _tone_vector(f: int, shifts: np.ndarray, n: int) -> np.ndarray:
    prod = (shifts.astype(np.int64) * int(f)) % n
    return np.exp(-2j * np.pi * prod / n)


def subtract(node: BucketNode, f: int, value: complex, shifts, n: int, b: int) -> None:
    """Remove one recovered tone's contribution from a node's residual."""
    if f % b != node.index:
        raise ValueError(f"frequency {f} does not belong to bucket {node.index} mod {b}")
    node.residual = node.residual - value * _tone_vector(f, np.asarray(shifts), n)


def classify_exact(
    node: BucketNode, eps_zero: float, eps_ratio: float, b: int, n: int, shifts=(0, 1, 2)
) -> NodeState:
    """Zero/single/multi decision from three consecutive-shift measurements.

    A single tone makes the residual a geometric sequence; the common ratio's
    phase encodes the frequency and the tau=0 entry is its value.
    """
    if tuple(shifts) != (0, 1, 2):
        raise ValueError("exact classification expects the shift set (0, 1, 2)")
    r = node.residual
    if np.linalg.norm(r) <= eps_zero:
        node.state = NodeState.ZERO_TON
        return node.state
    r0, r1, r2 = r
    node.state = NodeState.MULTI_TON
    if min(abs(r0), abs(r1)) > eps_zero and abs(r1 / r0 - r2 / r1) <= eps_ratio:
        f0 = int(np.round(np.angle(r1 / r0) * (-n / (2.0 * np.pi)))) % n
        if f0 % b == node.index:
            node.state = NodeState.SINGLE_TON
            node.f0 = f0
            node.value = complex(r0)
    return node.state


def _wrap(phase: np.ndarray) -> np.ndarray:
    return (phase + np.pi) % (2.0 * np.pi) - np.pi


def singleton_search_noisy(
    node: BucketNode, plan: SearchPlan, b: int, n: int
) -> tuple[int, complex, float]:
    """Locate and estimate the dominant tone of a bucket under noise.

    Iteration j measures at stride 2^j; the Kay-weighted mean of consecutive
    phase differences estimates the tone's phase step at that stride.  Each
    residue-class candidate is scored by squared circular distance to all c
    estimates and the best one wins; the value is a least-squares fit and the
    post-fit residual norm is returned for thresholding.
    """
    y = node.residual
    c, m = plan.c, plan.m
    if y.size != c * m:
        raise ValueError("node does not carry a full search measurement set")
    step = n // b
    cands = (node.index + b * np.arange(step, dtype=np.int64)) % n
    score = np.zeros(step)
    for j in range(c):
        seg = y[j * m : (j + 1) * m]
        diffs = np.angle(seg[1:] * np.conj(seg[:-1]))
        diffs = diffs[0] + _wrap(diffs - diffs[0])  # re-center to dodge wrap splits
        est = float(np.dot(plan.weights, diffs))
        target = -2.0 * np.pi * (((1 << j) * cands) % n) / n
        score += _wrap(est - target) ** 2
    f0 = int(cands[int(np.argmin(score))])
    atom = _tone_vector(f0, np.asarray(plan.shifts), n)
    fit = least_squares(atom[:, None], y)
    return f0, complex(fit.x[0]), fit.residual


def classify_noisy(node: BucketNode, plan: SearchPlan, b: int, n: int) -> NodeState:
    """Threshold-based zero/single/multi decision for the noisy search plan."""
    if plan.t0 is None or plan.t1 is None:
        raise ValueError("search plan thresholds are not set")
    if np.linalg.norm(node.residual) <= plan.t0:
        node.state = NodeState.ZERO_TON
        return node.state
    f0, value, resnorm = singleton_search_noisy(node, plan, b, n)
    if resnorm <= plan.t1:
        node.state = NodeState.SINGLE_TON
        node.f0 = f0
        node.value = value
    else:
        node.state = NodeState.MULTI_TON
    return node.state


def peel_decode(
    graph: PeelingGraph,
    mode: str = "exact",
    eps_zero: float = 0.0,
    eps_ratio: float = 0.0,
    search_plan: SearchPlan | None = None,
    max_rounds: int | None = None,
) -> DecodeResult:
    """Synchronous peeling: classify every live node, harvest single-tons,
    subtract them from all cycles, repeat.  Non-convergence is reported via
    the unresolved multi-ton count, not an error."""
    if max_rounds is None:
        max_rounds = len(graph.recovered) + 8
    shifts = np.asarray(graph.shifts)
    rounds = 0
    for _ in range(max_rounds):
        rounds += 1
        found: dict[int, complex] = {}
        for nodes, b in zip(graph.cycles, graph.factors):
            for node in nodes:
                if node.state in (NodeState.RESOLVED, NodeState.ZERO_TON):
                    continue
                if mode == "exact":
                    state = classify_exact(node, eps_zero, eps_ratio, b, graph.n)
                else:
                    state = classify_noisy(node, search_plan, b, graph.n)
                if (
                    state is NodeState.SINGLE_TON
                    and node.f0 not in graph.recovered
                    and node.f0 not in found
                ):
                    found[node.f0] = node.value
                    node.state = NodeState.RESOLVED
        if not found:
            break
        for f, v in found.items():
            for nodes, b in zip(graph.cycles, graph.factors):
                subtract(nodes[f % b], f, v, shifts, graph.n, b)
        graph.recovered.update(found)
    unresolved = sum(
        node.state is NodeState.MULTI_TON for nodes in graph.cycles for node in nodes
    )
    spectrum = SparseSpectrum(graph.n, dict(graph.recovered))
    return DecodeResult(spectrum=spectrum, unresolved_multitons=unresolved, rounds=rounds)


def exact_thresholds(x: np.ndarray) -> float:
    """Scale-aware zero/ratio tolerance for exact-case classification."""
    return 1e-6 * float(np.linalg.norm(x)) / np.sqrt(len(x))


def ffast(
    x: np.ndarray, k: int, ledger: SampleLedger | None = None, max_rounds: int | None = None
) -> SparseSpectrum:
    """Exact-case peeling decoder; reads 3*(B_1+...+B_d) samples."""
    n = len(x)
    plan, _ = plan_cycles(n, k, "exact")
    graph = build_graph(x, plan, ledger)
    eps = exact_thresholds(x)
    result = peel_decode(
        graph, "exact", eps_zero=eps, eps_ratio=eps, max_rounds=max_rounds or k + 4
    )
    return truncate_spectrum(result.spectrum.entries, n, k) if k else SparseSpectrum(n, {})


def robust_thresholds(
    energies: np.ndarray, r: int, scale: np.ndarray | None = None
) -> tuple[float, float]:
    """Zero-ton gate T0 and singleton-residual gate T1 from bucket energies.

    The noise scale comes from the median bucket energy (zero-tons dominate at
    the planned per-bucket load); a pure-noise bucket has norm ~sigma*sqrt(r),
    so the gates sit at 1.5x and 2.5x that.  A floating-point floor (relative
    to ``scale``, default the same energies) keeps exact-arithmetic residuals
    classifiable when there is no noise at all.
    """
    energies = np.asarray(energies, dtype=float)
    scale = energies if scale is None else np.asarray(scale, dtype=float)
    sigma = np.sqrt(max(float(np.median(energies)), 0.0) / r)
    floor = 1e-8 * np.sqrt(float(scale.max(initial=0.0)))
    base = sigma * np.sqrt(r)
    return max(1.5 * base, floor), max(2.5 * base, floor)


def noisy_thresholds(graph: PeelingGraph) -> tuple[float, float]:
    energies = [
        float(np.linalg.norm(node.vec) ** 2) for nodes in graph.cycles for node in nodes
    ]
    return robust_thresholds(np.array(energies), len(graph.shifts))


def r_ffast(
    x: np.ndarray,
    k: int,
    ledger: SampleLedger | None = None,
    seed: int = 0,
    snr_hint: float | None = None,
    max_rounds: int | None = None,
) -> SparseSpectrum:
    """Noise-robust peeling decoder; reads c*m*(B_1+...+B_d) samples.

    ``snr_hint`` (dB) optionally widens the search: below 5 dB one extra
    round per iteration is used.
    """
    n = len(x)
    plan, search = plan_cycles(n, k, "noisy", seed)
    if snr_hint is not None and snr_hint < 5.0:
        search = SearchPlan(
            c=search.c, m=search.m + 1, anchors=search.anchors, weights=kay_weights(search.m + 1)
        )
        plan = CyclePlan(factors=plan.factors, shifts=search.shifts)
    graph = build_graph(x, plan, ledger)
    search.t0, search.t1 = noisy_thresholds(graph)
    result = peel_decode(
        graph, "noisy", search_plan=search, max_rounds=max_rounds or k + 4
    )
    return truncate_spectrum(result.spectrum.entries, n, k) if k else SparseSpectrum(n, {})
