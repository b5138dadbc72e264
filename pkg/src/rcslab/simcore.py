"""Dense statevector simulation.

Amplitudes live in one complex128 array of length ``2**n``; index ``i``
holds the amplitude of the bitstring whose bit ``q`` is qubit ``q`` (qubit
0 is the least-significant bit). Gates are applied in place by compiled
kernels that visit each group of amplitudes a gate mixes exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from rcslab.circuits import Circuit, op_unitary
from rcslab.errors import CapacityError, SizeError

DEFAULT_MAX_QUBITS = 26
BYTES_PER_AMPLITUDE = 16

_max_qubits = DEFAULT_MAX_QUBITS


def get_max_qubits() -> int:
    return _max_qubits


def set_max_qubits(n: int) -> int:
    """Change the qubit limit; returns the previous value."""
    global _max_qubits
    if n < 1:
        raise ValueError("max qubits must be positive")
    previous, _max_qubits = _max_qubits, int(n)
    return previous


def statevector_bytes(n_qubits: int) -> int:
    return BYTES_PER_AMPLITUDE << n_qubits


def check_capacity(n_qubits: int, max_qubits: int | None = None) -> None:
    """Raise :class:`CapacityError` if ``n_qubits`` cannot be simulated."""
    limit = _max_qubits if max_qubits is None else max_qubits
    if n_qubits > limit:
        raise CapacityError(n_qubits, limit, statevector_bytes(n_qubits))


@dataclass
class StateVector:
    """An n-qubit pure state. Gate functions mutate ``amps`` in place."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if self.amps.shape != (1 << self.n_qubits,):
            raise SizeError(f"expected {1 << self.n_qubits} amplitudes, got shape {self.amps.shape}")

    def copy(self) -> StateVector:
        return StateVector(self.n_qubits, self.amps.copy())

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)


def init_zero_state(n_qubits: int, max_qubits: int | None = None) -> StateVector:
    limit = _max_qubits if max_qubits is None else max_qubits
    if not 1 <= n_qubits <= limit:
        raise SizeError(f"n_qubits must be in [1, {limit}], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def check_unitary(u: np.ndarray, atol: float = 1e-12) -> None:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"gate matrix must be square, got shape {u.shape}")
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if not dev <= atol:
        raise ValueError(f"gate matrix is not unitary (max |U^dag U - I| = {dev:.3g})")


def apply_1q(state: StateVector, u: np.ndarray, q: int, check: bool = True) -> StateVector:
    """Apply a 2x2 unitary to qubit ``q`` in place and return ``state``."""
    if not 0 <= q < state.n_qubits:
        raise IndexError(f"qubit {q} out of range for {state.n_qubits} qubits")
    if check:
        if np.shape(u) != (2, 2):
            raise ValueError("single-qubit gate must be 2x2")
        check_unitary(u)
    (u00, u01), (u10, u11) = u
    if u01 == 0 and u10 == 0:
        _kernel_diag_1q(state.amps, q, complex(u00), complex(u11))
    else:
        _kernel_1q(state.amps, q, complex(u00), complex(u01), complex(u10), complex(u11))
    return state


def apply_2q(state: StateVector, u: np.ndarray, q_low: int, q_high: int, check: bool = True) -> StateVector:
    """Apply a 4x4 unitary in place and return ``state``.

    Row/column ``k`` of ``u`` is the basis state with bit(q_low) = ``k & 1``
    and bit(q_high) = ``k >> 1``. ``q_low`` need not be the smaller index.
    """
    n = state.n_qubits
    if not (0 <= q_low < n and 0 <= q_high < n):
        raise IndexError(f"qubits ({q_low}, {q_high}) out of range for {n} qubits")
    if q_low == q_high:
        raise IndexError(f"two-qubit gate needs distinct qubits, got {q_low} twice")
    if check:
        if np.shape(u) != (4, 4):
            raise ValueError("two-qubit gate must be 4x4")
        check_unitary(u)
    u = np.ascontiguousarray(u, dtype=np.complex128)
    d = np.diag(u)
    if not np.any(u - np.diag(d)) and d[0] == 1 and d[1] == 1 and d[2] == 1:
        _kernel_phase_11(state.amps, q_low, q_high, complex(d[3]))
    else:
        _kernel_2q(state.amps, q_low, q_high, u)
    return state


# Kernels loop over the 2**(n-k) groups of amplitudes that a k-qubit gate
# mixes. Each group is computed from its own inputs only, so the result is
# independent of evaluation order.


@njit(inline="always")
def _insert_zero(g, q):
    low = g & ((1 << q) - 1)
    return ((g >> q) << (q + 1)) | low


@njit(nogil=True, cache=True)
def _kernel_1q(amps, q, u00, u01, u10, u11):
    step = 1 << q
    for g in range(amps.size >> 1):
        i0 = _insert_zero(g, q)
        i1 = i0 | step
        a0 = amps[i0]
        a1 = amps[i1]
        amps[i0] = u00 * a0 + u01 * a1
        amps[i1] = u10 * a0 + u11 * a1


@njit(nogil=True, cache=True)
def _kernel_diag_1q(amps, q, d0, d1):
    step = 1 << q
    for g in range(amps.size >> 1):
        i0 = _insert_zero(g, q)
        amps[i0] = d0 * amps[i0]
        amps[i0 | step] = d1 * amps[i0 | step]


@njit(nogil=True, cache=True)
def _kernel_phase_11(amps, q_low, q_high, phase):
    lo = min(q_low, q_high)
    hi = max(q_low, q_high)
    both = (1 << q_low) | (1 << q_high)
    for g in range(amps.size >> 2):
        i = _insert_zero(_insert_zero(g, lo), hi) | both
        amps[i] = phase * amps[i]


@njit(nogil=True, cache=True)
def _kernel_2q(amps, q_low, q_high, u):
    lo = min(q_low, q_high)
    hi = max(q_low, q_high)
    bl = 1 << q_low
    bh = 1 << q_high
    idx = np.empty(4, dtype=np.int64)
    old = np.empty(4, dtype=np.complex128)
    for g in range(amps.size >> 2):
        base = _insert_zero(_insert_zero(g, lo), hi)
        idx[0] = base
        idx[1] = base | bl
        idx[2] = base | bh
        idx[3] = base | bl | bh
        for k in range(4):
            old[k] = amps[idx[k]]
        for k in range(4):
            amps[idx[k]] = u[k, 0] * old[0] + u[k, 1] * old[1] + u[k, 2] * old[2] + u[k, 3] * old[3]


def apply_op(state: StateVector, op) -> StateVector:
    u = op_unitary(op)
    if op.is_two_qubit:
        return apply_2q(state, u, op.qubits[0], op.qubits[1], check=False)
    return apply_1q(state, u, op.qubits[0], check=False)


def run_circuit(circuit: Circuit, max_qubits: int | None = None) -> StateVector:
    """Simulate ``circuit`` from |0...0> and return the final state."""
    check_capacity(circuit.n_qubits, max_qubits)
    state = init_zero_state(circuit.n_qubits, max_qubits=circuit.n_qubits)
    for moment in circuit.moments:
        for op in moment:
            apply_op(state, op)
    return state


def probabilities(state: StateVector) -> np.ndarray:
    """Return ``|amps|**2`` as a float64 array of length ``2**n``."""
    a = state.amps
    return a.real * a.real + a.imag * a.imag


@lru_cache(maxsize=4)
def _cached_probabilities(circuit: Circuit) -> np.ndarray:
    p = probabilities(run_circuit(circuit))
    p.setflags(write=False)
    return p


def ideal_probability(circuit: Circuit, bitstring: int) -> float:
    """Noiseless output probability of ``bitstring``.

    The full distribution is cached for the last few circuits, so repeated
    calls on one circuit cost a single simulation.
    """
    check_capacity(circuit.n_qubits)
    if not 0 <= bitstring < (1 << circuit.n_qubits):
        raise IndexError(f"bitstring {bitstring} out of range for {circuit.n_qubits} qubits")
    return float(_cached_probabilities(circuit)[bitstring])
