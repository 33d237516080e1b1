"""Benchmark harness: run the in-repo algorithms over a parameter grid to CSV.

One row per (algo, n, k, snr, seed): wall-clock runtime, raw and deduplicated
sample counts, and L0/L1/L2 recovery error against the generated ground truth.
Cells an algorithm cannot run (wrong size structure) are emitted as skip rows,
never dropped.  Identical configs produce identical CSVs except runtime_ns.
"""

from __future__ import annotations

import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bucketize import SampleLedger
from .dsfft import DsfftConfig, dsfft
from .oneshot import OneShotConfig, sfft_dt
from .peeling import coprime_factors, ffast, r_ffast
from .signals import SparseSpectrum, dense_dft, evaluate, generate_test_case
from .oneshot import truncate_spectrum

ALGORITHMS = ("dt1", "dt2", "dt3", "ffast", "rffast", "dsfft", "dense")

CSV_HEADER = "algo,n,k,snr,seed,runtime_ns,samples_raw,samples_unique,sampled_pct,l0,l1,l2,success"

THREADS_ENV = "ALIASFFT_THREADS"


@dataclass
class ExperimentConfig:
    algos: list[str]
    n_list: list[int]
    k_list: list[int]
    snr_list: list[float | str]
    trials: int = 1
    seed_base: int = 0
    out_path: str = "results.csv"

    def validate(self) -> None:
        if not self.algos or not self.n_list or not self.k_list or not self.snr_list:
            raise ValueError("algo/n/k/snr lists must be nonempty")
        for algo in self.algos:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for k in self.k_list:
            if k < 1:
                raise ValueError("k values must be >= 1")


@dataclass
class ExperimentRecord:
    algo: str
    n: int
    k: int
    snr: float | str
    seed: int
    runtime_ns: int
    samples_raw: int
    samples_unique: int
    sampled_pct: float
    l0: int
    l1: float
    l2: float
    success: bool

    def to_csv_row(self) -> str:
        return ",".join(
            [
                self.algo,
                str(self.n),
                str(self.k),
                _format_snr(self.snr),
                str(self.seed),
                str(self.runtime_ns),
                str(self.samples_raw),
                str(self.samples_unique),
                f"{self.sampled_pct:.9g}",
                str(self.l0),
                f"{self.l1:.9g}",
                f"{self.l2:.9g}",
                "true" if self.success else "false",
            ]
        )


@dataclass
class SkippedCell:
    algo: str
    n: int
    k: int
    snr: float | str
    reason: str

    def to_csv_row(self) -> str:
        reason = self.reason.replace(",", ";")
        return ",".join(
            [self.algo, str(self.n), str(self.k), _format_snr(self.snr), "-1"]
            + ["0"] * 7
            + [f"skipped({reason})"]
        )


def _format_snr(snr: float | str) -> str:
    return "exact" if snr == "exact" else f"{float(snr):.9g}"


def _incompatibility(algo: str, n: int, k: int) -> str | None:
    if k > n:
        return "k exceeds n"
    if algo in ("dt1", "dt2", "dt3", "dsfft") and n & (n - 1):
        return "needs power-of-two n"
    if algo in ("ffast", "rffast") and len(coprime_factors(n)) < 2:
        return "needs >=2 co-prime factors of n"
    return None


def _case_seed(n: int, k: int, snr: float | str, seed_base: int, trial: int) -> int:
    # stable across runs/platforms; shared by all algorithms so each trial of a
    # cell sees the same test signal
    tag = f"{n}|{k}|{_format_snr(snr)}|{seed_base}|{trial}"
    return zlib.crc32(tag.encode()) ^ (seed_base << 1)


def _run_algorithm(
    algo: str, x: np.ndarray, k: int, snr: float | str, seed: int, ledger: SampleLedger
) -> SparseSpectrum:
    n = len(x)
    if algo in ("dt1", "dt2", "dt3"):
        config = OneShotConfig.default(n, k, variant=algo, seed=seed)
        return sfft_dt(x, k, config, ledger)
    if algo == "ffast":
        return ffast(x, k, ledger)
    if algo == "rffast":
        hint = None if snr == "exact" else float(snr)
        return r_ffast(x, k, ledger, seed=seed, snr_hint=hint)
    if algo == "dsfft":
        noise_std = 0.0
        if snr != "exact":
            noise_std = float(np.sqrt(k * 10.0 ** (-float(snr) / 10.0)))
        config = DsfftConfig(mode="exact" if snr == "exact" else "noisy",
                             seed=seed, noise_std=noise_std)
        return dsfft(x, k, config, ledger)
    if algo == "dense":
        ledger.record(np.arange(n))
        spectrum = dense_dft(x)
        order = np.argsort(-np.abs(spectrum), kind="stable")[:k]
        return truncate_spectrum({int(f): complex(spectrum[f]) for f in order}, n, k)
    raise ValueError(f"unknown algorithm {algo!r}")


def run_cell(
    algo: str,
    n: int,
    k: int,
    snr: float | str,
    trials: int,
    seed_base: int,
) -> list[ExperimentRecord] | SkippedCell:
    """All trial records for one grid cell, or the reason it cannot run."""
    reason = _incompatibility(algo, n, k)
    if reason is not None:
        return SkippedCell(algo=algo, n=n, k=k, snr=snr, reason=reason)
    records = []
    for trial in range(trials):
        seed = _case_seed(n, k, snr, seed_base, trial)
        case = generate_test_case(n, k, snr, seed)
        ledger = SampleLedger(n)
        start = time.perf_counter_ns()
        estimate = _run_algorithm(algo, case.signal, k, snr, seed, ledger)
        elapsed = time.perf_counter_ns() - start
        metrics = evaluate(case.truth, estimate)
        records.append(
            ExperimentRecord(
                algo=algo,
                n=n,
                k=k,
                snr=snr,
                seed=seed,
                runtime_ns=int(elapsed),
                samples_raw=ledger.count,
                samples_unique=ledger.unique_count,
                sampled_pct=ledger.sampled_fraction,
                l0=metrics.l0,
                l1=metrics.l1,
                l2=metrics.l2,
                success=metrics.l0 == 0,
            )
        )
    return records


def _worker_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def run_suite(config: ExperimentConfig) -> list[ExperimentRecord | SkippedCell]:
    """Run the full Cartesian grid and write the CSV; returns the row objects."""
    config.validate()
    cells = [
        (algo, n, k, snr)
        for algo in config.algos
        for n in config.n_list
        for k in config.k_list
        for snr in config.snr_list
    ]
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    lambda cell: run_cell(*cell, config.trials, config.seed_base), cells
                )
            )
    else:
        results = [run_cell(*cell, config.trials, config.seed_base) for cell in cells]
    rows: list[ExperimentRecord | SkippedCell] = []
    for result in results:
        if isinstance(result, SkippedCell):
            rows.append(result)
        else:
            rows.extend(result)
    with open(config.out_path, "w", encoding="utf-8") as handle:
        handle.write(CSV_HEADER + "\n")
        for row in rows:
            handle.write(row.to_csv_row() + "\n")
    return rows
