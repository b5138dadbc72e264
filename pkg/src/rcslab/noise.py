"""Noise injection and digital-error-model fidelity prediction."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from rcslab import rng
from rcslab.circuits import Circuit
from rcslab.simcore import StateVector, apply_1q, apply_op, check_capacity, init_zero_state, probabilities
from rcslab.xeb import SampleSet, cumulative, draw

DEFAULT_SAMPLES_PER_TRAJECTORY = 100

# Keep per-moment snapshots of the noiseless run only while they fit in this many bytes.
SNAPSHOT_BUDGET = 1 << 28

_PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class NoiseModel:
    """Pauli error rates per gate and bit-flip rate per measured qubit.

    Attributes:
        e1: Probability of a random non-identity Pauli after each single-qubit gate.
        e2: Probability of a random non-identity two-qubit Pauli after each two-qubit gate.
        em: Probability that each measured bit is flipped.
    """

    e1: float = 0.0
    e2: float = 0.0
    em: float = 0.0

    def __post_init__(self):
        for name in ("e1", "e2", "em"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @classmethod
    def parse(cls, text: str) -> NoiseModel:
        """Parse ``"e1,e2,em"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"noise must be 'e1,e2,em', got {text!r}")
        return cls(*(float(p) for p in parts))

    @property
    def is_noiseless(self) -> bool:
        return self.e1 == 0 and self.e2 == 0 and self.em == 0

    def to_dict(self) -> dict:
        return {"e1": self.e1, "e2": self.e2, "em": self.em}


def white_noise_mix(ideal: np.ndarray, f: float) -> np.ndarray:
    """Return ``f * ideal + (1 - f) / 2**n``: weight ``f`` on the ideal distribution."""
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"mixture weight must lie in [0, 1], got {f}")
    ideal = np.asarray(ideal, dtype=np.float64)
    if abs(ideal.sum() - 1.0) > 1e-9:
        raise ValueError("ideal distribution must sum to 1")
    return f * ideal + (1.0 - f) / ideal.size


def predict_fidelity(circuit: Circuit, noise: NoiseModel) -> float:
    """Digital error model: product of per-gate and per-qubit success probabilities.

    This is the usual approximation for chaotic circuits, where any error
    decorrelates the output from the ideal distribution.
    """
    n1, n2 = circuit.gate_counts()
    return (1 - noise.e1) ** n1 * (1 - noise.e2) ** n2 * (1 - noise.em) ** circuit.n_qubits


def _block_sizes(n_samples: int, per_block: int) -> list[int]:
    if n_samples < 0:
        raise ValueError("n_samples must be non-negative")
    if per_block < 1:
        raise ValueError("samples per trajectory must be positive")
    return [min(per_block, n_samples - s) for s in range(0, n_samples, per_block)]


def _assemble(n_qubits: int, parts: list[np.ndarray], seed: int) -> SampleSet:
    if parts:
        bits = np.concatenate(parts)
        groups = np.repeat(np.arange(len(parts)), [p.size for p in parts])
    else:
        bits = groups = np.zeros(0, dtype=np.int64)
    return SampleSet(n_qubits, bits, groups, seed)


def _map(fn, count: int, workers: int) -> list:
    if workers > 1 and count > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, range(count)))
    return [fn(t) for t in range(count)]


def sample_circuit(
    circuit: Circuit,
    n_samples: int,
    seed: int,
    samples_per_trajectory: int = DEFAULT_SAMPLES_PER_TRAJECTORY,
    workers: int = 1,
) -> SampleSet:
    """Noiseless sampling in blocks laid out like :func:`pauli_trajectory_sample`.

    Block ``t`` draws from substream ``(seed, TRAJECTORY_DRAW, t)``, so the
    bitstrings are identical to the trajectory sampler's with all rates
    zero. The draws are i.i.d., so no group ids are attached.
    """
    check_capacity(circuit.n_qubits)
    sizes = _block_sizes(n_samples, samples_per_trajectory)
    state = init_zero_state(circuit.n_qubits, max_qubits=circuit.n_qubits)
    for op in circuit.ops():
        apply_op(state, op)
    cdf = cumulative(probabilities(state))
    parts = _map(lambda t: draw(cdf, sizes[t], rng.substream(seed, rng.TRAJECTORY_DRAW, t)), len(sizes), workers)
    grouped = _assemble(circuit.n_qubits, parts, seed)
    return SampleSet(grouped.n_qubits, grouped.bitstrings, None, seed)


class _Trajectories:
    """Shared, read-only data for running many noisy trajectories of one circuit."""

    def __init__(self, circuit: Circuit, noise: NoiseModel):
        self.circuit = circuit
        self.noise = noise
        self.moment_ops = [list(m) for m in circuit.moments]
        self.ops = [op for m in self.moment_ops for op in m]
        self.moment_of = np.repeat(np.arange(len(self.moment_ops)), [len(m) for m in self.moment_ops])
        self.rates = np.array([noise.e2 if op.is_two_qubit else noise.e1 for op in self.ops])
        self.has_gate_noise = bool(np.any(self.rates > 0))

        state = init_zero_state(circuit.n_qubits, max_qubits=circuit.n_qubits)
        keep = (len(self.moment_ops) + 1) * state.amps.nbytes <= SNAPSHOT_BUDGET
        self.snapshots = [state.amps.copy()] if keep else None
        for m in self.moment_ops:
            for op in m:
                apply_op(state, op)
            if keep:
                self.snapshots.append(state.amps.copy())
        self.ideal_cdf = cumulative(probabilities(state))

    def final_cdf(self, gen: np.random.Generator) -> np.ndarray:
        state = self.final_state(gen)
        return self.ideal_cdf if state is None else cumulative(probabilities(state))

    def final_state(self, gen: np.random.Generator) -> StateVector | None:
        """Run one trajectory; ``None`` means no error occurred (state is ideal)."""
        if not self.has_gate_noise:
            return None
        hits = np.flatnonzero(gen.random(len(self.ops)) < self.rates)
        if hits.size == 0:
            return None
        # Pauli choices are drawn in gate order, before any simulation.
        errors: dict[int, list] = {}
        for i in hits:
            op = self.ops[i]
            if op.is_two_qubit:
                k = int(gen.integers(1, 16))
                errors.setdefault(int(self.moment_of[i]), []).append(((op.qubits[0], k & 3), (op.qubits[1], k >> 2)))
            else:
                errors.setdefault(int(self.moment_of[i]), []).append(((op.qubits[0], int(gen.integers(1, 4))),))

        # Gates within a moment act on disjoint qubits, so inserting each
        # Pauli right after its gate equals inserting them after the moment.
        first = min(errors)
        n = self.circuit.n_qubits
        if self.snapshots is not None:
            state = init_zero_state(n, max_qubits=n)
            state.amps[:] = self.snapshots[first + 1]
            start = first + 1
            self._apply_errors(state, errors[first])
        else:
            state = init_zero_state(n, max_qubits=n)
            start = 0
        for m in range(start, len(self.moment_ops)):
            for op in self.moment_ops[m]:
                apply_op(state, op)
            if m in errors:
                self._apply_errors(state, errors[m])
        return state

    @staticmethod
    def _apply_errors(state, error_list) -> None:
        for paulis in error_list:
            for q, k in paulis:
                if k:
                    apply_1q(state, _PAULIS[k], q, check=False)


def pauli_trajectory_sample(
    circuit: Circuit,
    noise: NoiseModel,
    n_samples: int,
    seed: int,
    samples_per_trajectory: int = DEFAULT_SAMPLES_PER_TRAJECTORY,
    workers: int = 1,
) -> SampleSet:
    """Sample a noisy circuit by stochastic Pauli trajectories.

    Each trajectory inserts, after every gate, a uniformly random
    non-identity Pauli with probability ``e1`` (one qubit, 3 choices) or
    ``e2`` (two qubits, 15 choices), simulates the resulting pure state,
    draws ``samples_per_trajectory`` bitstrings from it and flips each
    measured bit with probability ``em``. Trajectory ``t`` takes its error
    and readout decisions from substream ``(seed, TRAJECTORY_NOISE, t)`` and
    its bitstring draws from ``(seed, TRAJECTORY_DRAW, t)``; results do not
    depend on ``workers``.

    Args:
        circuit: Circuit to run.
        noise: Error rates.
        n_samples: Total number of bitstrings.
        seed: Non-negative 64-bit seed.
        samples_per_trajectory: Bitstrings drawn per trajectory; the last
            trajectory may draw fewer.
        workers: Threads used to run trajectories.

    Returns:
        A :class:`SampleSet` whose group ids are trajectory indices.
    """
    check_capacity(circuit.n_qubits)
    sizes = _block_sizes(n_samples, samples_per_trajectory)
    traj = _Trajectories(circuit, noise)
    n = circuit.n_qubits
    weights = np.left_shift(1, np.arange(n, dtype=np.int64))

    def one(t: int) -> np.ndarray:
        gen = rng.substream(seed, rng.TRAJECTORY_NOISE, t)
        cdf = traj.final_cdf(gen)
        bits = draw(cdf, sizes[t], rng.substream(seed, rng.TRAJECTORY_DRAW, t))
        if noise.em > 0:
            flips = gen.random((sizes[t], n)) < noise.em
            bits ^= flips.astype(np.int64) @ weights
        return bits

    return _assemble(n, _map(one, len(sizes), workers), seed)


def trajectory_fidelities(circuit: Circuit, noise: NoiseModel, n_trajectories: int, seed: int) -> np.ndarray:
    """State fidelity ``|<ideal|trajectory>|**2`` of each noisy trajectory (before readout).

    Uses the same error stream as :func:`pauli_trajectory_sample`, so
    trajectory ``t`` here is trajectory ``t`` there.
    """
    check_capacity(circuit.n_qubits)
    traj = _Trajectories(circuit, noise)
    ideal = init_zero_state(circuit.n_qubits, max_qubits=circuit.n_qubits)
    for op in circuit.ops():
        apply_op(ideal, op)
    out = np.empty(n_trajectories)
    for t in range(n_trajectories):
        state = traj.final_state(rng.substream(seed, rng.TRAJECTORY_NOISE, t))
        out[t] = abs(np.vdot(ideal.amps, state.amps)) ** 2 if state is not None else 1.0
    return out

