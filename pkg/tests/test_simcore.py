import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state, random_unitary
from rcslab import oracle
from rcslab.circuits import Circuit, Topology, gate_unitary, generate_random_circuit
from rcslab.errors import CapacityError, SizeError
from rcslab.simcore import (
    DEFAULT_MAX_QUBITS,
    StateVector,
    apply_1q,
    apply_2q,
    check_capacity,
    check_unitary,
    get_max_qubits,
    ideal_probability,
    init_zero_state,
    probabilities,
    run_circuit,
    set_max_qubits,
    statevector_bytes,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def basis(n, k):
    a = np.zeros(1 << n, dtype=complex)
    a[k] = 1
    return StateVector(n, a)


def test_init_zero_state_single_qubit():
    np.testing.assert_array_equal(init_zero_state(1).amps, [1, 0])


def test_init_zero_state_three_qubits():
    s = init_zero_state(3)
    assert s.amps.shape == (8,)
    assert s.amps[0] == 1
    assert np.count_nonzero(s.amps) == 1


@pytest.mark.parametrize("n", [0, -1, DEFAULT_MAX_QUBITS + 1])
def test_init_zero_state_out_of_range(n):
    with pytest.raises(SizeError):
        init_zero_state(n)


def test_capacity_error_carries_memory_estimate():
    with pytest.raises(CapacityError) as exc:
        check_capacity(30)
    assert exc.value.bytes_required == statevector_bytes(30) == 16 * 2**30
    assert "GiB" in str(exc.value)


def test_set_max_qubits_roundtrip():
    previous = set_max_qubits(4)
    try:
        with pytest.raises(SizeError):
            init_zero_state(5)
    finally:
        set_max_qubits(previous)
    assert get_max_qubits() == DEFAULT_MAX_QUBITS


def test_x_flips_zero_to_one():
    s = apply_1q(init_zero_state(1), X, 0)
    np.testing.assert_allclose(s.amps, [0, 1])


def test_sqrt_x_twice_is_bit_flip():
    sx = gate_unitary("sx")
    s = apply_1q(apply_1q(init_zero_state(1), sx, 0), sx, 0)
    assert abs(s.amps[1]) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_qubit_zero_is_least_significant_bit():
    s = apply_1q(init_zero_state(3), X, 0)
    assert abs(s.amps[1]) == 1
    s = apply_1q(init_zero_state(3), X, 2)
    assert abs(s.amps[4]) == 1


def test_cz_negates_only_11():
    cz = gate_unitary("cz")
    for k in range(4):
        s = apply_2q(basis(2, k), cz, 0, 1)
        expected = -1 if k == 3 else 1
        np.testing.assert_allclose(s.amps[k], expected)
        assert np.count_nonzero(s.amps) == 1


@pytest.mark.parametrize("q", range(6))
def test_apply_1q_matches_dense_oracle(q):
    rng = np.random.default_rng(q)
    psi = random_state(6, rng)
    u = random_unitary(2, rng)
    out = apply_1q(StateVector(6, psi.copy()), u, q)
    np.testing.assert_allclose(out.amps, oracle.embed_1q(u, q, 6) @ psi, atol=1e-12)
    assert abs(out.norm() - 1) < 1e-12


@pytest.mark.parametrize("q_low,q_high", [(0, 1), (1, 0), (2, 5), (5, 3), (0, 5)])
def test_fsim_matches_dense_oracle(q_low, q_high):
    rng = np.random.default_rng(10 * q_low + q_high)
    psi = random_state(6, rng)
    u = gate_unitary("fsim", (0.7, 2.1))
    out = apply_2q(StateVector(6, psi.copy()), u, q_low, q_high)
    np.testing.assert_allclose(out.amps, oracle.embed_2q(u, q_low, q_high, 6) @ psi, atol=1e-10)


def test_generic_2q_matches_dense_oracle():
    rng = np.random.default_rng(3)
    psi = random_state(5, rng)
    u = random_unitary(4, rng)
    out = apply_2q(StateVector(5, psi.copy()), u, 3, 1)
    np.testing.assert_allclose(out.amps, oracle.embed_2q(u, 3, 1, 5) @ psi, atol=1e-12)


def test_norm_drift_per_application():
    rng = np.random.default_rng(11)
    s = StateVector(6, random_state(6, rng))
    for _ in range(200):
        before = s.norm()
        if rng.random() < 0.5:
            s = apply_1q(s, random_unitary(2, rng), int(rng.integers(6)))
        else:
            a, b = rng.choice(6, size=2, replace=False)
            s = apply_2q(s, random_unitary(4, rng), int(a), int(b))
        assert abs(s.norm() - before) < 1e-12


def test_apply_rejects_bad_qubits_and_matrices():
    s = init_zero_state(3)
    with pytest.raises(IndexError):
        apply_1q(s, X, 3)
    with pytest.raises(IndexError):
        apply_2q(s, np.eye(4), 1, 1)
    with pytest.raises(IndexError):
        apply_2q(s, np.eye(4), 0, 7)
    with pytest.raises(ValueError):
        apply_1q(s, np.array([[1, 1], [0, 1]]), 0)
    with pytest.raises(ValueError):
        apply_2q(s, np.eye(2), 0, 1)
    with pytest.raises(ValueError):
        check_unitary(np.ones((2, 3)))


def test_empty_circuit_is_zero_state():
    c = Circuit(4, ())
    p = probabilities(run_circuit(c))
    assert p[0] == 1.0
    assert ideal_probability(c, 0) == 1.0
    assert ideal_probability(c, 1) == 0.0


def test_one_cycle_two_qubits_matches_oracle():
    c = generate_random_circuit(2, Topology.chain(2), 1, seed=4)
    np.testing.assert_allclose(run_circuit(c).amps, oracle.dense_state(c), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(2, 6),
    cycles=st.integers(0, 8),
    seed=st.integers(0, 2**32),
    gate=st.sampled_from(["cz", "fsim"]),
)
def test_run_circuit_matches_oracle(n, cycles, seed, gate):
    c = generate_random_circuit(n, Topology.chain(n), cycles, seed, two_qubit_gate=gate)
    np.testing.assert_allclose(run_circuit(c).amps, oracle.dense_state(c), atol=1e-10, rtol=0)


def test_run_circuit_is_bit_identical_on_rerun(grid12):
    a = run_circuit(grid12).amps
    b = run_circuit(grid12).amps
    assert a.tobytes() == b.tobytes()


def test_probabilities_of_plus_state():
    s = apply_1q(init_zero_state(1), H, 0)
    np.testing.assert_allclose(probabilities(s), [0.5, 0.5], atol=1e-12)


def test_probabilities_sum_to_one_for_long_circuit():
    c = generate_random_circuit(8, Topology.chain(8), 60, seed=1)
    assert sum(1 for _ in c.ops()) <= 1000
    assert abs(probabilities(run_circuit(c)).sum() - 1) <= 1e-9


def _shuffle_moments(circuit, rng, two_qubit_only=False):
    out = []
    for m in circuit.moments:
        if two_qubit_only and not m[0].is_two_qubit:
            out.append(m)
        else:
            out.append(tuple(m[i] for i in rng.permutation(len(m))))
    return Circuit(circuit.n_qubits, tuple(out))


def test_moment_order_within_rounding():
    c = generate_random_circuit(12, Topology.grid(3, 4), 3, seed=2)
    a = run_circuit(c).amps
    b = run_circuit(_shuffle_moments(c, np.random.default_rng(0))).amps
    np.testing.assert_allclose(b, a, atol=1e-15, rtol=0)


def test_diagonal_moment_order_is_bit_exact():
    c = generate_random_circuit(12, Topology.grid(3, 4), 6, seed=2)
    a = run_circuit(c).amps
    b = run_circuit(_shuffle_moments(c, np.random.default_rng(1), two_qubit_only=True)).amps
    assert a.tobytes() == b.tobytes()


def test_ideal_probability_mean_over_all_bitstrings(chain10):
    mean = sum(ideal_probability(chain10, b) for b in range(1024)) / 1024
    assert mean == pytest.approx(1 / 1024, abs=1e-12)


def test_ideal_probability_rejects_out_of_range(chain10):
    with pytest.raises(IndexError):
        ideal_probability(chain10, 1024)


def test_two_qubit_matrix_index_convention():
    # k = bit(q_low) + 2 bit(q_high): a gate swapping |01> and |10> is a SWAP either way,
    # but a controlled-X with control on the high index bit is not symmetric.
    cx_high_controls = np.eye(4)[[0, 1, 3, 2]]
    for q_low, q_high in itertools.permutations(range(3), 2):
        s = basis(3, 1 << q_high)
        out = apply_2q(s, cx_high_controls, q_low, q_high)
        assert abs(out.amps[(1 << q_high) | (1 << q_low)]) == pytest.approx(1)
