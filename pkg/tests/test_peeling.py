"""Peeling decoder: planning, classification, singleton search, full runs."""

import numpy as np
import pytest

from aliasfft import (
    CyclePlan,
    NodeState,
    SampleLedger,
    SparseSpectrum,
    UnsupportedSizeError,
    dense_dft,
    evaluate,
    ffast,
    generate_test_case,
    inverse_dft,
    kay_weights,
    peel_decode,
    plan_cycles,
    r_ffast,
)
from aliasfft.peeling import (
    BucketNode,
    build_graph,
    classify_exact,
    classify_noisy,
    exact_thresholds,
    singleton_search_noisy,
    subtract,
)


def tone_signal(n, entries):
    return inverse_dft(SparseSpectrum(n, entries))


class TestPlanning:
    def test_n20_uses_4_and_5(self):
        with pytest.warns(UserWarning):
            plan, _ = plan_cycles(20, 5, "exact")
        assert plan.factors == [4, 5]
        assert plan.shifts == [0, 1, 2]

    def test_n504_uses_prime_powers(self):
        plan, _ = plan_cycles(504, 6, "exact")
        assert plan.factors == [7, 8, 9]

    def test_prime_size_rejected(self):
        with pytest.raises(UnsupportedSizeError):
            plan_cycles(31, 2, "exact")

    def test_prime_power_size_rejected(self):
        with pytest.raises(UnsupportedSizeError):
            plan_cycles(64, 2, "exact")

    def test_small_k_keeps_many_cycles(self):
        plan, _ = plan_cycles(4095, 1, "exact")
        assert plan.factors == [5, 7, 9, 13]

    def test_larger_k_merges_cycles_to_limit_load(self):
        plan, _ = plan_cycles(4095, 8, "exact")
        assert plan.factors == [63, 65]
        assert all(b >= 16 for b in plan.factors)

    def test_noisy_plan_shape(self):
        _, search = plan_cycles(4095, 4, "noisy", seed=9)
        assert search.c == 12
        assert search.m == 3
        assert len(search.shifts) == search.c * search.m
        expected = [search.anchors[j] + (1 << j) * t for j in range(search.c) for t in range(search.m)]
        assert search.shifts == expected


class TestKayWeights:
    def test_three_rounds_gives_half_half(self):
        assert np.allclose(kay_weights(3), [0.5, 0.5])

    def test_weights_sum_to_one(self):
        for m in range(2, 65):
            assert abs(kay_weights(m).sum() - 1.0) < 1e-12


class TestExactClassification:
    def test_five_tone_n20_bucket_states(self, five_tone_n20):
        with pytest.warns(UserWarning):
            plan, _ = plan_cycles(20, 5, "exact")
        graph = build_graph(five_tone_n20.signal, plan)
        eps = exact_thresholds(five_tone_n20.signal)
        states = {}
        for nodes, b in zip(graph.cycles, graph.factors):
            for node in nodes:
                states[(b, node.index)] = classify_exact(node, eps, eps, b, 20)
        assert states[(4, 0)] is NodeState.ZERO_TON
        assert states[(4, 1)] is NodeState.MULTI_TON  # tones 1, 5, 13
        assert states[(4, 2)] is NodeState.SINGLE_TON  # tone 10
        assert states[(4, 3)] is NodeState.SINGLE_TON  # tone 3
        assert states[(5, 0)] is NodeState.MULTI_TON  # tones 5, 10
        assert states[(5, 1)] is NodeState.SINGLE_TON  # tone 1
        assert states[(5, 2)] is NodeState.ZERO_TON
        assert states[(5, 3)] is NodeState.MULTI_TON  # tones 3, 13
        assert states[(5, 4)] is NodeState.ZERO_TON
        counted = list(states.values())
        assert counted.count(NodeState.ZERO_TON) == 3
        assert counted.count(NodeState.SINGLE_TON) == 3
        assert counted.count(NodeState.MULTI_TON) == 3

    def test_zero_vector_is_zero_ton(self):
        node = BucketNode(0, 0, np.zeros(3, dtype=complex))
        assert classify_exact(node, 1e-9, 1e-9, 4, 20) is NodeState.ZERO_TON

    def test_two_tone_bucket_is_multi_ton(self):
        n, b = 20, 4
        x = tone_signal(n, {1: 1.0, 5: np.exp(0.7j)})
        graph = build_graph(x, CyclePlan(factors=[b], shifts=[0, 1, 2]))
        node = graph.cycles[0][1]
        eps = exact_thresholds(x)
        assert classify_exact(node, eps, eps, b, n) is NodeState.MULTI_TON

    def test_singleton_phase_decodes_position_and_value(self):
        n, b = 36, 6
        for f in (0, 7, 23, 35):
            value = np.exp(0.3j) * 1.7
            x = tone_signal(n, {f: value})
            graph = build_graph(x, CyclePlan(factors=[b], shifts=[0, 1, 2]))
            node = graph.cycles[0][f % b]
            eps = exact_thresholds(x)
            assert classify_exact(node, eps, eps, b, n) is NodeState.SINGLE_TON
            assert node.f0 == f
            assert abs(node.value - value) < 1e-9

    def test_exact_phase_identity(self):
        n = 240
        for f in (1, 119, 120, 239):
            x = tone_signal(n, {f: np.exp(1.1j)})
            graph = build_graph(x, CyclePlan(factors=[n], shifts=[0, 1, 2]))
            node = graph.cycles[0][f]
            r = node.residual
            decoded = (np.angle(r[1] / r[0]) * (-n / (2 * np.pi))) % n
            wrap_error = min(abs(decoded - f), n - abs(decoded - f))
            assert wrap_error < 1e-9


class TestSubtract:
    def test_only_tone_leaves_zero_residual(self):
        n, b, f = 20, 4, 13
        x = tone_signal(n, {f: 2.0 - 1j})
        graph = build_graph(x, CyclePlan(factors=[b], shifts=[0, 1, 2]))
        node = graph.cycles[0][f % b]
        subtract(node, f, 2.0 - 1j, [0, 1, 2], n, b)
        assert np.linalg.norm(node.residual) < 1e-9

    def test_one_of_two_tones_leaves_the_other(self):
        n, b = 20, 4
        f1, f2 = 1, 13
        x = tone_signal(n, {f1: 1.0, f2: np.exp(0.2j)})
        graph = build_graph(x, CyclePlan(factors=[b], shifts=[0, 1, 2]))
        node = graph.cycles[0][1]
        subtract(node, f1, 1.0, [0, 1, 2], n, b)
        lone = build_graph(tone_signal(n, {f2: np.exp(0.2j)}),
                           CyclePlan(factors=[b], shifts=[0, 1, 2]))
        assert np.allclose(node.residual, lone.cycles[0][1].residual, atol=1e-9)

    def test_zero_value_is_noop(self):
        node = BucketNode(0, 2, np.ones(3, dtype=complex))
        subtract(node, 6, 0.0, [0, 1, 2], 20, 4)
        assert np.allclose(node.residual, node.vec)

    def test_wrong_residue_rejected(self):
        node = BucketNode(0, 2, np.ones(3, dtype=complex))
        with pytest.raises(ValueError):
            subtract(node, 5, 1.0, [0, 1, 2], 20, 4)


class TestNoisySingletonSearch:
    def test_exact_tone_recovered_exactly(self):
        n = 4095
        _, search = plan_cycles(n, 2, "noisy", seed=4)
        plan_shifts = search.shifts
        for f in (17, 2000, 4094):
            x = tone_signal(n, {f: np.exp(0.9j)})
            graph = build_graph(x, CyclePlan(factors=[63], shifts=plan_shifts))
            node = graph.cycles[0][f % 63]
            f0, value, resnorm = singleton_search_noisy(node, search, 63, n)
            assert f0 == f
            assert abs(value - np.exp(0.9j)) < 1e-9
            assert resnorm < 1e-9

    def test_zero_db_monte_carlo(self):
        # criterion scale: single tone at 0 dB, plan with c=9, m=3
        n, b = 512, 16
        from aliasfft.peeling import SearchPlan

        hits = 0
        trials = 200
        for seed in range(trials):
            rng = np.random.default_rng(seed)
            f = int(rng.integers(0, n))
            case = generate_test_case(n, 1, 0.0, seed=seed, positions=[f])
            anchors = [int(t) for t in rng.integers(0, n, size=9)]
            search = SearchPlan(c=9, m=3, anchors=anchors, weights=kay_weights(3))
            graph = build_graph(case.signal,
                                CyclePlan(factors=[b], shifts=search.shifts))
            node = graph.cycles[0][f % b]
            f0, _, _ = singleton_search_noisy(node, search, b, n)
            hits += f0 == f
        assert hits >= 0.90 * trials


class TestNoisyClassification:
    def test_zero_vector_is_zero_ton(self):
        n = 4095
        _, search = plan_cycles(n, 2, "noisy", seed=1)
        search.t0, search.t1 = 1e-6, 1e-6
        node = BucketNode(0, 0, np.zeros(len(search.shifts), dtype=complex))
        assert classify_noisy(node, search, 63, n) is NodeState.ZERO_TON

    def test_exact_tone_is_single_ton(self):
        n, b, f = 4095, 63, 1234
        _, search = plan_cycles(n, 2, "noisy", seed=1)
        search.t0 = search.t1 = 1e-6
        x = tone_signal(n, {f: 1.0})
        graph = build_graph(x, CyclePlan(factors=[b], shifts=search.shifts))
        node = graph.cycles[0][f % b]
        assert classify_noisy(node, search, b, n) is NodeState.SINGLE_TON
        assert node.f0 == f

    def test_two_strong_tones_are_multi_ton(self):
        n, b = 4095, 63
        f = 130
        _, search = plan_cycles(n, 2, "noisy", seed=1)
        x = tone_signal(n, {f: 1.0, f + 7 * b: 1.0})
        graph = build_graph(x, CyclePlan(factors=[b], shifts=search.shifts))
        search.t0 = search.t1 = 1e-3
        node = graph.cycles[0][f % b]
        assert classify_noisy(node, search, b, n) is NodeState.MULTI_TON


class TestPeelDecode:
    def test_five_tone_n20_full_recovery(self, five_tone_n20):
        with pytest.warns(UserWarning):
            plan, _ = plan_cycles(20, 5, "exact")
        graph = build_graph(five_tone_n20.signal, plan)
        eps = exact_thresholds(five_tone_n20.signal)
        result = peel_decode(graph, "exact", eps_zero=eps, eps_ratio=eps, max_rounds=9)
        metrics = evaluate(five_tone_n20.truth, result.spectrum)
        assert metrics.l2 < 1e-9
        assert result.unresolved_multitons == 0
        assert result.rounds <= 3 + 1  # three productive rounds, one to notice quiescence

    def test_conservation_through_decode(self, five_tone_n20):
        with pytest.warns(UserWarning):
            plan, _ = plan_cycles(20, 5, "exact")
        graph = build_graph(five_tone_n20.signal, plan)
        eps = exact_thresholds(five_tone_n20.signal)
        peel_decode(graph, "exact", eps_zero=eps, eps_ratio=eps, max_rounds=9)
        shifts = np.array(plan.shifts)
        for nodes, b in zip(graph.cycles, graph.factors):
            for node in nodes:
                expected = node.vec.copy()
                for f, v in graph.recovered.items():
                    if f % b == node.index:
                        expected -= v * np.exp(-2j * np.pi * (shifts * f % 20) / 20)
                assert np.linalg.norm(node.residual - expected) < 1e-8

    def test_zero_signal_decodes_empty_in_one_round(self):
        plan, _ = plan_cycles(504, 3, "exact")
        graph = build_graph(np.zeros(504, dtype=complex), plan)
        result = peel_decode(graph, "exact", eps_zero=1e-12, eps_ratio=1e-12, max_rounds=7)
        assert result.spectrum.entries == {}
        assert result.rounds == 1
        assert all(
            node.state is NodeState.ZERO_TON for nodes in graph.cycles for node in nodes
        )

    def test_saturated_graph_reports_unresolved_multitons(self):
        # ten tones fill every bucket of both cycles with at least two tones,
        # so no peeling step can start; that is a reported outcome, not an error
        n = 20
        x = tone_signal(n, {f: np.exp(0.1j * f) for f in range(10)})
        with pytest.warns(UserWarning):
            plan, _ = plan_cycles(20, 10, "exact")
        graph = build_graph(x, plan)
        eps = exact_thresholds(x)
        result = peel_decode(graph, "exact", eps_zero=eps, eps_ratio=eps, max_rounds=14)
        assert result.spectrum.entries == {}
        assert result.unresolved_multitons == 9
        assert result.rounds == 1

    def test_same_bucket_pair_resolved_through_other_cycle(self):
        # two tones colliding in the first cycle but separated in the second
        n = 20
        f1, f2 = 1, 13  # 1 mod 4 == 13 mod 4, but 1 mod 5 != 13 mod 5
        x = tone_signal(n, {f1: 1.0, f2: np.exp(0.4j)})
        with pytest.warns(UserWarning):
            plan, _ = plan_cycles(20, 5, "exact")
        graph = build_graph(x, plan)
        eps = exact_thresholds(x)
        result = peel_decode(graph, "exact", eps_zero=eps, eps_ratio=eps, max_rounds=9)
        assert set(result.spectrum.entries) == {f1, f2}
        assert result.rounds <= 3


class TestEndToEnd:
    def test_fixture_recovery_and_sample_count(self, five_tone_n20):
        ledger = SampleLedger(20)
        with pytest.warns(UserWarning):
            out = ffast(five_tone_n20.signal, 5, ledger)
        assert evaluate(five_tone_n20.truth, out).l2 < 1e-9
        assert ledger.count == 3 * (4 + 5)

    def test_zero_sparsity(self):
        out = ffast(np.zeros(20, dtype=complex), 0)
        assert out.entries == {}

    def test_decoder_soundness_against_dense_oracle(self):
        for seed in range(25):
            case = generate_test_case(504, 6, "exact", seed=seed)
            out = ffast(case.signal, 6)
            dense = dense_dft(case.signal)
            for f, v in out.entries.items():
                assert abs(v - dense[f]) < 1e-6
            assert set(out.entries) <= set(case.truth.entries)

    def test_noisy_end_to_end_sample_law(self):
        n, k = 4095, 4
        ledger = SampleLedger(n)
        case = generate_test_case(n, k, 10.0, seed=0)
        out = r_ffast(case.signal, k, ledger, seed=0)
        plan, search = plan_cycles(n, k, "noisy", seed=0)
        assert ledger.count == search.c * search.m * sum(plan.factors)
        assert len(out.entries) <= k

    def test_noisy_recovery_rate(self):
        n, k = 4095, 4
        good = 0
        for seed in range(25):
            case = generate_test_case(n, k, 15.0, seed=seed)
            out = r_ffast(case.signal, k, seed=seed, snr_hint=15.0)
            good += set(out.entries) == set(case.truth.entries)
        assert good >= 22
