"""Statevector gates, circuit construction, oracle paths, sampling."""

import itertools
import math

import numpy as np
import pytest

from multikey_bv import (
    CapacityError,
    ClassicalOracle,
    InputError,
    KeySet,
    SecretKey,
    build_circuit,
    exact_distribution,
    measure_data_register,
    run_circuit,
)
from multikey_bv.simulator import StateVector, chi_square_vs_exact, control_width


def keyset(*texts: str) -> KeySet:
    return KeySet.from_strings(texts)


def random_keyset(rng: np.random.Generator, n: int, k: int) -> KeySet:
    values = rng.integers(1 << n, size=k)
    return KeySet(tuple(SecretKey(int(v), n) for v in values))


class TestGates:
    def test_hadamard_on_zero(self):
        st = StateVector(1, 0)
        st.apply_hadamard(0)
        # data qubit 0: |0> -> (|0> + |1>)/sqrt(2)
        assert st.amps[0] == pytest.approx(1 / math.sqrt(2))
        assert st.amps[1] == pytest.approx(1 / math.sqrt(2))

    def test_hadamard_on_one(self):
        st = StateVector(1, 0)
        st.apply_x(0)
        st.apply_hadamard(0)
        assert st.amps[0] == pytest.approx(1 / math.sqrt(2))
        assert st.amps[1] == pytest.approx(-1 / math.sqrt(2))

    def test_hadamard_involution_random_state(self):
        rng = np.random.default_rng(5)
        amps = rng.normal(size=16) + 1j * rng.normal(size=16)
        amps /= np.linalg.norm(amps)
        st = StateVector(2, 1, amps.copy())
        for q in range(st.total_qubits):
            st.apply_hadamard(q).apply_hadamard(q)
        assert np.allclose(st.amps, amps, atol=1e-12)

    def test_norm_preserved_by_every_gate(self):
        rng = np.random.default_rng(11)
        keys = keyset("0110", "1011", "0001")
        spec = build_circuit(keys)
        st = StateVector(spec.n, spec.r)
        from multikey_bv.simulator import _apply_gate

        for gate in spec.gates:
            _apply_gate(st, spec, gate)
            assert abs(st.norm() - 1.0) < 1e-10

    def test_index_out_of_range(self):
        st = StateVector(2, 0)
        with pytest.raises(InputError):
            st.apply_hadamard(3)


class TestControlledKeyUnitary:
    def test_zero_key_is_identity(self):
        rng = np.random.default_rng(3)
        amps = rng.normal(size=32) + 1j * rng.normal(size=32)
        amps /= np.linalg.norm(amps)
        st = StateVector(2, 2, amps.copy())
        st.apply_controlled_key_unitary(1, SecretKey(0, 2))
        assert np.array_equal(st.amps, amps)

    def test_direct_flip_action(self):
        # n=1, key=1, no controls: |x=1, y=0> -> |x=1, y=1>
        st = StateVector(1, 0, np.array([0, 1, 0, 0], dtype=complex))
        st.apply_controlled_key_unitary(0, SecretKey(1, 1))
        assert np.array_equal(st.amps, np.array([0, 0, 0, 1], dtype=complex))

    def test_only_selected_branch_touched(self):
        # amplitude sitting in control branch 0 must ignore a branch-1 unitary
        st = StateVector(1, 1, np.array([0, 1, 0, 0, 0, 0, 0, 0], dtype=complex))
        st.apply_controlled_key_unitary(1, SecretKey(1, 1))
        assert np.array_equal(
            st.amps, np.array([0, 1, 0, 0, 0, 0, 0, 0], dtype=complex)
        )

    def test_bad_control_index(self):
        st = StateVector(1, 1)
        with pytest.raises(InputError):
            st.apply_controlled_key_unitary(2, SecretKey(1, 1))


class TestPrepareUniform:
    def control_amps(self, st: StateVector) -> np.ndarray:
        return st.amps.reshape(1 << st.r, -1)[:, 0]

    def test_power_of_two(self):
        st = StateVector(1, 2)
        st.prepare_uniform(4)
        assert np.allclose(self.control_amps(st), 0.5)

    def test_power_of_two_bit_identical_to_hadamards(self):
        direct = StateVector(1, 2).prepare_uniform(4)
        gates = StateVector(1, 2)
        gates.apply_hadamard(2).apply_hadamard(3)
        assert np.array_equal(direct.amps, gates.amps)

    def test_k_three(self):
        st = StateVector(1, 2)
        st.prepare_uniform(3)
        expected = np.array([1, 1, 1, 0]) / math.sqrt(3)
        assert np.allclose(self.control_amps(st), expected, atol=1e-12)

    def test_k_one_unchanged(self):
        st = StateVector(2, 0)
        before = st.amps.copy()
        st.prepare_uniform(1)
        assert np.array_equal(st.amps, before)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            StateVector(1, 1).prepare_uniform(3)

    def test_requires_zeroed_control(self):
        st = StateVector(1, 2)
        st.apply_x(2)
        with pytest.raises(InputError):
            st.prepare_uniform(3)


class TestBuildCircuit:
    def test_register_sizes(self):
        assert build_circuit(keyset("011", "101")).total_qubits == 5
        assert build_circuit(keyset("101")).total_qubits == 4
        assert build_circuit(keyset("001", "010", "011", "101")).total_qubits == 6

    def test_control_width(self):
        assert [control_width(k) for k in (1, 2, 3, 4, 5, 8)] == [0, 1, 2, 2, 3, 3]

    def test_single_key_has_no_control_prep(self):
        spec = build_circuit(keyset("101"))
        assert spec.r == 0
        ops = [g[0] for g in spec.gates]
        assert "prepare_uniform" not in ops
        assert ops.count("cku") == 1

    def test_non_power_of_two_uses_uniform_prep(self):
        spec = build_circuit(keyset("001", "010", "111"))
        assert ("prepare_uniform", 3) in spec.gates

    def test_power_of_two_uses_hadamards(self):
        spec = build_circuit(keyset("001", "010", "011", "101"))
        assert all(g[0] != "prepare_uniform" for g in spec.gates)
        assert ("h", 4) in spec.gates and ("h", 5) in spec.gates

    def test_qubit_cap(self):
        ks = KeySet.from_strings(["0" * 23 + "1"])
        with pytest.raises(CapacityError, match="qubits"):
            build_circuit(ks)


class TestRunCircuit:
    def test_two_distinct_keys(self):
        dist = exact_distribution(run_circuit(keyset("011", "101")))
        assert dist == pytest.approx({"011": 0.5, "101": 0.5}, abs=1e-10)

    def test_single_key_deterministic(self):
        dist = exact_distribution(run_circuit(keyset("101")))
        assert dist == pytest.approx({"101": 1.0}, abs=1e-10)

    def test_four_distinct_keys(self):
        dist = exact_distribution(run_circuit(keyset("001", "010", "011", "101")))
        assert dist == pytest.approx(
            {"001": 0.25, "010": 0.25, "011": 0.25, "101": 0.25}, abs=1e-10
        )

    def test_duplicate_keys_weighted(self):
        # occurrence-weighted statistics, the normalization-critical case
        dist = exact_distribution(run_circuit(keyset("010", "011", "011", "101")))
        assert dist == pytest.approx(
            {"010": 0.25, "011": 0.5, "101": 0.25}, abs=1e-9
        )

    def test_weights_match_multiplicity_everywhere(self):
        # independent oracle: P(t) = occurrences(t) / k for any multiset
        rng = np.random.default_rng(17)
        for _ in range(25):
            n = int(rng.integers(1, 5))
            k = int(rng.integers(1, min(6, 1 << n) + 1))
            ks = random_keyset(rng, n, k)
            dist = exact_distribution(run_circuit(ks))
            expected = {}
            for v in ks.values():
                s = format(v, f"0{n}b")
                expected[s] = expected.get(s, 0.0) + 1.0 / k
            assert dist == pytest.approx(expected, abs=1e-10)

    def test_key_superposition_amplitudes(self):
        # distinct keys: dropped-ancilla state has amplitude 1/sqrt(k)
        # on each key and 0 elsewhere
        for texts in (("011", "101"), ("001", "010", "011", "101"), ("1101",)):
            ks = keyset(*texts)
            reduced = run_circuit(ks).data_register_state()
            expected = np.zeros(1 << ks.n, dtype=complex)
            for v in ks.values():
                expected[v] = 1 / math.sqrt(ks.k)
            phase = reduced[np.argmax(np.abs(reduced))]
            phase /= abs(phase)
            assert np.allclose(reduced / phase, expected, atol=1e-10)

    def test_oracle_paths_agree_exhaustive_small(self):
        for n in (1, 2):
            for k in (1, 2, 3):
                if k > (1 << n):
                    continue
                for values in itertools.combinations_with_replacement(
                    range(1 << n), k
                ):
                    ks = KeySet(tuple(SecretKey(v, n) for v in values))
                    g = run_circuit(ks, oracle_path="gate")
                    f = run_circuit(ks, oracle_path="fast")
                    assert np.max(np.abs(g.amps - f.amps)) < 1e-10

    def test_oracle_paths_agree_randomized(self):
        rng = np.random.default_rng(23)
        for case in range(40):
            k = case % 8 + 1
            n_lo = max(1, control_width(k))
            n = int(rng.integers(n_lo, 6))
            ks = random_keyset(rng, n, k)
            g = run_circuit(ks, oracle_path="gate")
            f = run_circuit(ks, oracle_path="fast")
            assert np.max(np.abs(g.amps - f.amps)) < 1e-10

    def test_unknown_path(self):
        with pytest.raises(InputError):
            run_circuit(keyset("01"), oracle_path="magic")

    def test_wide_data_register(self):
        # 16 data qubits, 2^18 amplitudes
        a = format(0b1010101010101010, "016b")
        b = format(0b0101010101010101, "016b")
        ks = keyset(a, b)
        gate = run_circuit(ks)
        dist = exact_distribution(gate)
        assert dist == pytest.approx({a: 0.5, b: 0.5}, abs=1e-10)
        fast = run_circuit(ks, oracle_path="fast")
        assert np.max(np.abs(gate.amps - fast.amps)) < 1e-10


class TestExactDistribution:
    def test_sums_to_one(self):
        dist = exact_distribution(run_circuit(keyset("0110", "1001", "1111")))
        assert abs(sum(dist.values()) - 1.0) < 1e-10

    def test_uniform_data_register(self):
        st = StateVector(3, 0)
        for q in range(3):
            st.apply_hadamard(q)
        dist = exact_distribution(st)
        assert len(dist) == 8
        for p in dist.values():
            assert p == pytest.approx(1 / 8, abs=1e-12)


class TestMeasurement:
    def test_deterministic_outcome(self):
        st = run_circuit(keyset("101"))
        hist = measure_data_register(st, 100, np.random.default_rng(0))
        assert hist.counts == {"101": 100}

    def test_conservation(self):
        st = run_circuit(keyset("011", "101"))
        for shots in (1, 7, 1024):
            hist = measure_data_register(st, shots, np.random.default_rng(1))
            assert sum(hist.counts.values()) == shots
            assert hist.shots == shots

    def test_two_key_histogram_within_three_sigma(self):
        st = run_circuit(keyset("011", "101"))
        hist = measure_data_register(st, 1024, np.random.default_rng(99))
        sigma = math.sqrt(0.25 / 1024)
        for outcome in ("011", "101"):
            p_hat = hist.counts.get(outcome, 0) / 1024
            assert abs(p_hat - 0.5) <= 3 * sigma

    def test_seeded_determinism(self):
        st = run_circuit(keyset("0011", "0101", "1001", "1111"))
        a = measure_data_register(st, 512, np.random.default_rng(1234))
        b = measure_data_register(st, 512, np.random.default_rng(1234))
        assert a == b

    def test_rejects_zero_shots(self):
        with pytest.raises(InputError):
            measure_data_register(run_circuit(keyset("01")), 0, np.random.default_rng(0))

    def test_serialization_records(self):
        st = run_circuit(keyset("011", "101"))
        hist = measure_data_register(st, 64, np.random.default_rng(5))
        records = hist.to_records(exact=exact_distribution(st))
        assert [r["outcome"] for r in records] == sorted(r["outcome"] for r in records)
        for rec in records:
            assert set(rec) == {"outcome", "count", "probability", "exact_probability"}


class TestChiSquare:
    def test_reasonable_fit(self):
        st = run_circuit(keyset("011", "101"))
        hist = measure_data_register(st, 1024, np.random.default_rng(3))
        chi = chi_square_vs_exact(hist, exact_distribution(st))
        assert chi["dof"] == 1
        assert chi["p_value"] > 0.001

    def test_single_shot_omitted(self):
        st = run_circuit(keyset("011", "101"))
        hist = measure_data_register(st, 1, np.random.default_rng(3))
        assert chi_square_vs_exact(hist, exact_distribution(st)) is None

    def test_single_outcome_omitted(self):
        st = run_circuit(keyset("101"))
        hist = measure_data_register(st, 100, np.random.default_rng(3))
        assert chi_square_vs_exact(hist, exact_distribution(st)) is None


class TestClassicalOracle:
    def test_single_key_deterministic(self):
        oracle = ClassicalOracle(keyset("101"), np.random.default_rng(0))
        x = SecretKey(0b100, 3)
        assert all(oracle.query(x) == 1 for _ in range(20))

    def test_zero_input_always_zero(self):
        oracle = ClassicalOracle(keyset("00", "11"), np.random.default_rng(0))
        x = SecretKey(0, 2)
        assert all(oracle.query(x) == 0 for _ in range(20))

    def test_output_frequency_converges(self):
        # three of the four keys answer 1 on x = 0001
        oracle = ClassicalOracle(
            keyset("0001", "0011", "1011", "1110"), np.random.default_rng(8)
        )
        x = SecretKey(1, 4)
        trials = 20_000
        freq = sum(oracle.query(x) for _ in range(trials)) / trials
        sigma = math.sqrt(0.75 * 0.25 / trials)
        assert abs(freq - 0.75) <= 3 * sigma

    def test_query_count_charged(self):
        oracle = ClassicalOracle(keyset("01", "10"), np.random.default_rng(0))
        for _ in range(7):
            oracle.query(SecretKey(1, 2))
        assert oracle.queries == 7

    def test_length_mismatch(self):
        oracle = ClassicalOracle(keyset("01"), np.random.default_rng(0))
        with pytest.raises(InputError):
            oracle.query(SecretKey(1, 3))
