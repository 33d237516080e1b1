"""Sparse FFT algorithms built on the aliasing filter.

Six recovery algorithms over one bucketization core (shift, subsample, small
DFT): the one-shot family sfft_dt (dt1/dt2/dt3), the peeling pair
ffast/r_ffast over co-prime cycles, and the binary-tree dsfft.  All use the
1/N-normalized forward transform (see ``signals``).
"""

from .bucketize import FilteredSpectrum, SampleLedger, bucketize, bucketize_set, downsample, shift
from .dsfft import (
    DsfftConfig,
    TreeLayer,
    dsfft,
    expand_layer,
    initial_layer,
    non_aliasing_probability,
    non_aliasing_probability_limit,
)
from .oneshot import BucketMoments, BucketSolution, OneShotConfig, sfft_dt
from .peeling import (
    CyclePlan,
    DecodeResult,
    NodeState,
    PeelingGraph,
    SearchPlan,
    UnsupportedSizeError,
    ffast,
    kay_weights,
    peel_decode,
    plan_cycles,
    r_ffast,
)
from .signals import (
    ErrorMetrics,
    SparseSpectrum,
    TestCase,
    dense_dft,
    evaluate,
    generate_test_case,
    inverse_dft,
)

__all__ = [
    "BucketMoments",
    "BucketSolution",
    "CyclePlan",
    "DecodeResult",
    "DsfftConfig",
    "ErrorMetrics",
    "FilteredSpectrum",
    "NodeState",
    "OneShotConfig",
    "PeelingGraph",
    "SampleLedger",
    "SearchPlan",
    "SparseSpectrum",
    "TestCase",
    "TreeLayer",
    "UnsupportedSizeError",
    "bucketize",
    "bucketize_set",
    "dense_dft",
    "downsample",
    "dsfft",
    "evaluate",
    "expand_layer",
    "ffast",
    "generate_test_case",
    "initial_layer",
    "inverse_dft",
    "kay_weights",
    "non_aliasing_probability",
    "non_aliasing_probability_limit",
    "peel_decode",
    "plan_cycles",
    "r_ffast",
    "sfft_dt",
    "shift",
]

__version__ = "0.1.0"
