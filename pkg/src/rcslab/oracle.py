"""Dense-matrix reference simulator for small circuits.

Builds the full 2**n x 2**n matrix of each gate straight from its
definition and multiplies matrices; shares no code with the kernels in
:mod:`rcslab.simcore`. Only meant for n <= ~8.
"""

from __future__ import annotations

import numpy as np

from rcslab.circuits import Circuit, op_unitary


def embed_1q(u: np.ndarray, q: int, n: int) -> np.ndarray:
    """Kronecker expansion ``I (x) u (x) I`` with qubit 0 as the last factor."""
    return np.kron(np.kron(np.eye(1 << (n - q - 1)), u), np.eye(1 << q))


def embed_2q(u: np.ndarray, q_low: int, q_high: int, n: int) -> np.ndarray:
    """Full matrix of a two-qubit gate: ``<i'|U|i> = u[k(i'), k(i)]`` when the other bits agree."""
    i = np.arange(1 << n)
    k = ((i >> q_low) & 1) | (((i >> q_high) & 1) << 1)
    rest = i & ~((1 << q_low) | (1 << q_high))
    return np.asarray(u)[k[:, None], k[None, :]] * (rest[:, None] == rest[None, :])


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    n = circuit.n_qubits
    total = np.eye(1 << n, dtype=complex)
    for op in circuit.ops():
        u = op_unitary(op)
        if op.is_two_qubit:
            full = embed_2q(u, op.qubits[0], op.qubits[1], n)
        else:
            full = embed_1q(u, op.qubits[0], n)
        total = full @ total
    return total


def dense_state(circuit: Circuit) -> np.ndarray:
    """Final state of ``circuit`` from |0...0>, via the dense unitary."""
    return circuit_unitary(circuit)[:, 0]
