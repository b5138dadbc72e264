import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcslab.circuits import (
    FSIM_PHI,
    FSIM_THETA,
    Circuit,
    Op,
    Topology,
    gate_unitary,
    generate_random_circuit,
    make_patch,
    parse,
    restrict,
    serialize,
)
from rcslab.errors import CircuitParseError
from rcslab.simcore import probabilities, run_circuit

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
W = (X + Y) / math.sqrt(2)


def test_cz_matrix():
    np.testing.assert_array_equal(gate_unitary("cz"), np.diag([1, 1, 1, -1]))


def test_fsim_zero_pi_is_cz():
    np.testing.assert_allclose(gate_unitary("fsim", (0, math.pi)), gate_unitary("cz"), atol=1e-12)


@pytest.mark.parametrize("name,target", [("sx", X), ("sy", Y), ("sw", W)])
def test_single_qubit_gates_square_to_pauli(name, target):
    u = gate_unitary(name)
    np.testing.assert_allclose(u @ u, target, atol=1e-12)


def test_fsim_against_explicit_matrix():
    theta, phi = 0.3, 1.1
    c, s = math.cos(theta), math.sin(theta)
    expected = np.array(
        [[1, 0, 0, 0], [0, c, -1j * s, 0], [0, -1j * s, c, 0], [0, 0, 0, np.exp(-1j * phi)]]
    )
    np.testing.assert_allclose(gate_unitary("fsim", (theta, phi)), expected, atol=1e-15)


def test_gate_unitary_is_read_only():
    with pytest.raises(ValueError):
        gate_unitary("sx")[0, 0] = 0


@pytest.mark.parametrize(
    "args",
    [("cz", (0, 0)), ("sx", (0, 1)), ("bogus", (0,)), ("fsim", (0, 1)), ("fsim", (0, 1), (math.nan, 0.0))],
)
def test_op_validation(args):
    with pytest.raises(ValueError):
        Op(*args)


def test_circuit_rejects_overlapping_moment():
    with pytest.raises(ValueError):
        Circuit(2, ((Op("sx", (0,)), Op("cz", (0, 1))),))


def test_circuit_rejects_gate_off_coupler():
    with pytest.raises(ValueError):
        Circuit(3, ((Op("cz", (0, 2)),),), Topology.chain(3))


def test_cycles_zero_is_one_single_qubit_moment():
    c = generate_random_circuit(5, Topology.chain(5), 0, seed=1)
    assert c.depth == 1
    assert all(not op.is_two_qubit for op in c.moments[0])
    assert len(c.moments[0]) == 5


def test_generation_is_deterministic():
    topo = Topology.grid(3, 4)
    a = generate_random_circuit(12, topo, 14, seed=7)
    b = generate_random_circuit(12, topo, 14, seed=7)
    assert serialize(a) == serialize(b)
    assert serialize(a) != serialize(generate_random_circuit(12, topo, 14, seed=8))


def test_moment_structure(grid12):
    assert grid12.depth == 2 * 14 + 1
    for k, m in enumerate(grid12.moments):
        assert all(op.is_two_qubit == (k % 2 == 1) for op in m)


@pytest.mark.parametrize("seed", range(100))
def test_no_single_qubit_gate_repeats(seed):
    c = generate_random_circuit(12, Topology.grid(3, 4), 14, seed)
    one_q = [{op.qubits[0]: op.name for op in m} for m in c.moments[::2]]
    assert all(len(m) == 12 for m in one_q)
    for prev, cur in zip(one_q, one_q[1:]):
        assert all(prev[q] != cur[q] for q in range(12))


@pytest.mark.parametrize("topo", [Topology.grid(3, 4), Topology.grid(4, 5), Topology.chain(7)])
def test_two_qubit_moments_use_exactly_the_active_layer(topo):
    c = generate_random_circuit(topo.n_qubits, topo, 16, seed=3)
    for k, m in enumerate(c.moments[1::2]):
        assert sorted(op.qubits for op in m) == sorted(topo.layer(k))


def test_grid_layers_are_disjoint_matchings_covering_all_couplers():
    topo = Topology.grid(4, 5)
    layers = topo.labeled_couplers()
    assert set(layers) == {"A", "B", "C", "D"}
    seen = []
    for couplers in layers.values():
        qubits = [q for c in couplers for q in c]
        assert len(qubits) == len(set(qubits))
        seen += couplers
    horizontal = 4 * 4
    vertical = 3 * 5
    assert len(seen) == len(set(seen)) == horizontal + vertical
    assert [topo.layer(k) for k in range(8)] == [layers[x] for x in "ABCDCDAB"]


def test_chain_layers():
    layers = Topology.chain(6).labeled_couplers()
    assert layers["A"] == ((0, 1), (2, 3), (4, 5))
    assert layers["B"] == ((1, 2), (3, 4))


def test_make_patch_on_chain():
    c = generate_random_circuit(4, Topology.chain(4), 4, seed=0)
    p = make_patch(c, {0, 1})
    two_q = {op.qubits for op in p.ops() if op.is_two_qubit}
    assert (1, 2) not in two_q
    assert {(0, 1), (2, 3)} <= two_q
    assert p.depth == c.depth
    removed = sum(op.qubits == (1, 2) for op in c.ops())
    assert c.gate_counts()[1] - p.gate_counts()[1] == removed
    assert p.gate_counts()[0] == c.gate_counts()[0]


def test_make_patch_without_crossing_gates_is_identity():
    c = generate_random_circuit(4, Topology.chain(4), 1, seed=0)  # only layer A
    assert make_patch(c, {0, 1}) == c


@pytest.mark.parametrize("partition", [set(), {0, 1, 2, 3}, {5}])
def test_make_patch_rejects_bad_partition(partition):
    c = generate_random_circuit(4, Topology.chain(4), 2, seed=0)
    with pytest.raises(ValueError):
        make_patch(c, partition)


def test_patch_distribution_factorizes(grid12):
    left, right = (0, 1, 4, 5, 8, 9), (2, 3, 6, 7, 10, 11)
    patched = make_patch(grid12, left)
    p = probabilities(run_circuit(patched))
    pl = probabilities(run_circuit(restrict(patched, left)))
    pr = probabilities(run_circuit(restrict(patched, right)))
    x = np.arange(4096)
    xl = sum(((x >> q) & 1) << i for i, q in enumerate(left))
    xr = sum(((x >> q) & 1) << i for i, q in enumerate(right))
    assert np.max(np.abs(p - pl[xl] * pr[xr])) < 1e-10


def test_restrict_rejects_crossing_gate(grid12):
    with pytest.raises(ValueError):
        restrict(grid12, (0, 1, 4, 5, 8, 9))


def test_serialize_format():
    c = Circuit(
        3,
        ((Op("sx", (0,)), Op("sw", (2,))), (Op("fsim", (1, 2), (FSIM_THETA, FSIM_PHI)),)),
        Topology.chain(3),
    )
    assert serialize(c) == (
        "qubits 3\n"
        "topology chain 3\n"
        "moment\n"
        "sx 0\n"
        "sw 2\n"
        "moment\n"
        "fsim 1 2 1.5707963267948966 0.52359877559829882\n"
    )


def test_parse_accepts_comments_and_blank_lines():
    text = "# header\nqubits 2\n\nmoment  # first\nsx 0\nsy 1\nmoment\ncz 0 1\n"
    c = parse(text)
    assert c.n_qubits == 2
    assert c.depth == 2
    assert serialize(c) == "qubits 2\nmoment\nsx 0\nsy 1\nmoment\ncz 0 1\n"


@settings(max_examples=100, deadline=None)
@given(
    rows=st.integers(1, 4),
    cols=st.integers(2, 4),
    cycles=st.integers(0, 10),
    seed=st.integers(0, 2**64 - 1),
    gate=st.sampled_from(["cz", "fsim"]),
)
def test_round_trip_random_circuits(rows, cols, cycles, seed, gate):
    topo = Topology.grid(rows, cols)
    c = generate_random_circuit(topo.n_qubits, topo, cycles, seed, two_qubit_gate=gate)
    text = serialize(c)
    back = parse(text)
    assert back == c
    assert serialize(back) == text


@given(theta=st.floats(-10, 10), phi=st.floats(-10, 10))
def test_angles_round_trip_exactly(theta, phi):
    c = Circuit(2, ((Op("fsim", (0, 1), (theta, phi)),),))
    assert parse(serialize(c)).moments[0][0].params == (theta, phi)


@pytest.mark.parametrize(
    "text,line",
    [
        ("qubits 2\nmoment\nsx 0\nhadamard 1\n", 4),
        ("qubits 2\nmoment\nsx 0\nsy 0\n", 4),
        ("qubits 2\nmoment\nsx 2\n", 3),
        ("qubits 3\ntopology chain 3\nmoment\ncz 0 2\n", 4),
        ("qubits 2\nmoment\nqubits 2\n", 3),
        ("qubits 2\nmoment\nfsim 0 1 0.5\n", 3),
        ("qubits x\n", 1),
        ("sx 0\n", 1),
    ],
)
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(CircuitParseError) as exc:
        parse(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")
