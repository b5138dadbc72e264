"""Random circuit family, patch circuits, and the circuit text format.

A generated circuit has ``cycles`` cycles. Each cycle is one moment of
single-qubit gates (every qubit gets one of sqrt(X), sqrt(Y), sqrt(W))
followed by one moment of two-qubit gates on the couplers of the cycle's
pattern label. One more single-qubit moment closes the circuit, so a
generated circuit always has ``2 * cycles + 1`` moments.

Qubit 0 is the least-significant bit of every bitstring.

Text format, one item per line (``#`` starts a comment)::

    qubits 12
    topology grid 3 4
    cycles 14
    seed 7
    moment
    sx 0
    sw 1
    ...
    moment
    cz 0 1
    fsim 2 3 1.5707963267948966 0.52359877559829882

``cycles`` and ``seed`` are present only for generated circuits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from rcslab import rng
from rcslab.errors import CircuitParseError

SINGLE_QUBIT_GATES = ("sx", "sy", "sw")
TWO_QUBIT_GATES = ("cz", "fsim")
GATE_ARITY = {"sx": 1, "sy": 1, "sw": 1, "cz": 2, "fsim": 2}
GATE_NPARAMS = {"sx": 0, "sy": 0, "sw": 0, "cz": 0, "fsim": 2}

# Sycamore-like fSim option.
FSIM_THETA = math.pi / 2
FSIM_PHI = math.pi / 6

CHAIN_SEQUENCE = "AB"
GRID_SEQUENCE = "ABCDCDAB"


@dataclass(frozen=True)
class Op:
    """One gate applied to specific qubits.

    For two-qubit gates the first listed qubit is the low bit of the 4x4
    matrix index and the second is the high bit.
    """

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.name not in GATE_ARITY:
            raise ValueError(f"unknown gate {self.name!r}")
        if len(self.qubits) != GATE_ARITY[self.name]:
            raise ValueError(f"{self.name} acts on {GATE_ARITY[self.name]} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.name} repeats a qubit: {self.qubits}")
        if len(self.params) != GATE_NPARAMS[self.name]:
            raise ValueError(f"{self.name} takes {GATE_NPARAMS[self.name]} parameter(s)")
        if not all(math.isfinite(p) for p in self.params):
            raise ValueError(f"{self.name} parameters must be finite")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2


Moment = tuple[Op, ...]


@dataclass(frozen=True)
class Topology:
    """Qubit layout: ``Topology.chain(n)`` or ``Topology.grid(rows, cols)``.

    Grid qubit ``(r, c)`` has index ``r * cols + c``. Couplers join nearest
    neighbours and are partitioned into pattern labels, each a matching:

    * chain: A = couplers ``(i, i+1)`` with even ``i``, B = odd ``i``;
    * grid: A/B = horizontal couplers starting in an even/odd column,
      C/D = vertical couplers starting in an even/odd row.
    """

    kind: str
    rows: int
    cols: int

    def __post_init__(self):
        if self.kind not in ("chain", "grid"):
            raise ValueError(f"unknown topology {self.kind!r}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("topology dimensions must be positive")
        if self.kind == "chain" and self.rows != 1:
            raise ValueError("a chain has a single row")

    @classmethod
    def chain(cls, n: int) -> Topology:
        return cls("chain", 1, n)

    @classmethod
    def grid(cls, rows: int, cols: int) -> Topology:
        return cls("grid", rows, cols)

    @property
    def n_qubits(self) -> int:
        return self.rows * self.cols

    @property
    def sequence(self) -> str:
        return CHAIN_SEQUENCE if self.kind == "chain" else GRID_SEQUENCE

    def labeled_couplers(self) -> dict[str, tuple[tuple[int, int], ...]]:
        return _labeled_couplers(self)

    @property
    def couplers(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(c for layer in self.labeled_couplers().values() for c in layer))

    def layer(self, cycle: int) -> tuple[tuple[int, int], ...]:
        """Couplers active in ``cycle`` (0-based)."""
        seq = self.sequence
        return self.labeled_couplers()[seq[cycle % len(seq)]]

    def describe(self) -> str:
        if self.kind == "chain":
            return f"chain {self.cols}"
        return f"grid {self.rows} {self.cols}"


@lru_cache(maxsize=None)
def _labeled_couplers(topo: Topology) -> dict[str, tuple[tuple[int, int], ...]]:
    if topo.kind == "chain":
        n = topo.cols
        return {
            "A": tuple((i, i + 1) for i in range(0, n - 1, 2)),
            "B": tuple((i, i + 1) for i in range(1, n - 1, 2)),
        }
    r, c = topo.rows, topo.cols
    idx = lambda i, j: i * c + j  # noqa: E731
    return {
        "A": tuple((idx(i, j), idx(i, j + 1)) for i in range(r) for j in range(0, c - 1, 2)),
        "B": tuple((idx(i, j), idx(i, j + 1)) for i in range(r) for j in range(1, c - 1, 2)),
        "C": tuple((idx(i, j), idx(i + 1, j)) for i in range(0, r - 1, 2) for j in range(c)),
        "D": tuple((idx(i, j), idx(i + 1, j)) for i in range(1, r - 1, 2) for j in range(c)),
    }


@dataclass(frozen=True)
class Circuit:
    """An immutable circuit: ordered moments of gates on ``n_qubits`` qubits.

    ``cycles`` and ``seed`` record how a generated circuit was made and are
    ``None`` for hand-built ones. When a topology is given, every two-qubit
    gate must sit on one of its couplers.
    """

    n_qubits: int
    moments: tuple[Moment, ...]
    topology: Topology | None = None
    cycles: int | None = None
    seed: int | None = None
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        if self.topology is not None and self.topology.n_qubits != self.n_qubits:
            raise ValueError(
                f"topology {self.topology.describe()} has {self.topology.n_qubits} qubits, "
                f"circuit has {self.n_qubits}"
            )
        moments = tuple(tuple(m) for m in self.moments)
        object.__setattr__(self, "moments", moments)
        couplers = set(self.topology.couplers) if self.topology is not None else None
        for k, moment in enumerate(moments):
            _check_moment(moment, self.n_qubits, couplers, k)
        object.__setattr__(self, "_hash", hash((self.n_qubits, moments, self.topology, self.cycles, self.seed)))

    def __hash__(self) -> int:
        return self._hash

    @property
    def depth(self) -> int:
        return len(self.moments)

    def ops(self) -> Iterable[Op]:
        for moment in self.moments:
            yield from moment

    def gate_counts(self) -> tuple[int, int]:
        """Return ``(single_qubit_gates, two_qubit_gates)``."""
        n2 = sum(op.is_two_qubit for op in self.ops())
        return sum(1 for _ in self.ops()) - n2, n2


def _check_moment(moment: Moment, n_qubits: int, couplers: set | None, k: int) -> None:
    seen: set[int] = set()
    for op in moment:
        for q in op.qubits:
            if not 0 <= q < n_qubits:
                raise ValueError(f"moment {k}: qubit {q} out of range for {n_qubits} qubits")
            if q in seen:
                raise ValueError(f"moment {k}: qubit {q} used twice")
            seen.add(q)
        if couplers is not None and op.is_two_qubit and tuple(sorted(op.qubits)) not in couplers:
            raise ValueError(f"moment {k}: {op.name} on {op.qubits} is not on a coupler")


def gate_unitary(name: str, params: Sequence[float] = ()) -> np.ndarray:
    """Return the matrix of a gate (read-only).

    The single-qubit gates are principal square roots of the involutions
    X, Y and W = (X + Y)/sqrt(2), each given by ``((1+i) I + (1-i) G) / 2``::

        sqrt(X) = 1/2 [[1+i, 1-i], [1-i, 1+i]]
        sqrt(Y) = 1/2 [[1+i, -1-i], [1+i, 1+i]]
        sqrt(W) = 1/2 [[1+i, -i sqrt(2)], [sqrt(2), 1+i]]

    ``fsim(theta, phi)`` is the identity on |00>, ``[[cos, -i sin], [-i sin, cos]]``
    on {|01>, |10>} and ``exp(-i phi)`` on |11>, so ``fsim(0, pi)`` equals CZ.
    """
    return _gate_unitary(name, tuple(float(p) for p in params))


@lru_cache(maxsize=256)
def _gate_unitary(name: str, params: tuple[float, ...]) -> np.ndarray:
    if name not in GATE_ARITY:
        raise ValueError(f"unknown gate {name!r}")
    if len(params) != GATE_NPARAMS[name]:
        raise ValueError(f"{name} takes {GATE_NPARAMS[name]} parameter(s)")
    if name in SINGLE_QUBIT_GATES:
        s = 1 / math.sqrt(2)
        g = {
            "sx": np.array([[0, 1], [1, 0]], dtype=complex),
            "sy": np.array([[0, -1j], [1j, 0]]),
            "sw": np.array([[0, (1 - 1j) * s], [(1 + 1j) * s, 0]]),
        }[name]
        u = ((1 + 1j) * np.eye(2) + (1 - 1j) * g) / 2
    elif name == "cz":
        u = np.diag([1, 1, 1, -1]).astype(complex)
    else:
        theta, phi = params
        c, s = math.cos(theta), math.sin(theta)
        u = np.array(
            [
                [1, 0, 0, 0],
                [0, c, -1j * s, 0],
                [0, -1j * s, c, 0],
                [0, 0, 0, np.exp(-1j * phi)],
            ],
            dtype=complex,
        )
    u.setflags(write=False)
    return u


def op_unitary(op: Op) -> np.ndarray:
    return _gate_unitary(op.name, op.params)


def generate_random_circuit(
    n_qubits: int,
    topology: Topology | None,
    cycles: int,
    seed: int,
    two_qubit_gate: str = "cz",
) -> Circuit:
    """Build a random circuit, deterministically in ``seed``.

    Qubit ``q`` in cycle ``k`` draws its gate from the substream
    ``(seed, CIRCUIT_GATES, k, q)``: uniformly among the three gates in the
    first cycle, afterwards uniformly among the two gates that differ from
    its previous one (drawn as a single integer each time). The closing
    single-qubit moment counts as cycle ``cycles``.

    Args:
        n_qubits: Number of qubits.
        topology: Layout; ``None`` means ``Topology.chain(n_qubits)``.
        cycles: Number of cycles, at least 0.
        seed: Non-negative 64-bit seed.
        two_qubit_gate: ``"cz"`` (default) or ``"fsim"`` for fsim(pi/2, pi/6).

    Returns:
        The generated circuit with ``2 * cycles + 1`` moments.
    """
    if cycles < 0:
        raise ValueError("cycles must be non-negative")
    if topology is None:
        topology = Topology.chain(n_qubits)
    if topology.n_qubits != n_qubits:
        raise ValueError(f"topology {topology.describe()} does not have {n_qubits} qubits")
    seed = rng.check_seed(seed)
    if two_qubit_gate == "cz":
        make_2q = lambda a, b: Op("cz", (a, b))  # noqa: E731
    elif two_qubit_gate == "fsim":
        make_2q = lambda a, b: Op("fsim", (a, b), (FSIM_THETA, FSIM_PHI))  # noqa: E731
    else:
        raise ValueError(f"unknown two-qubit gate {two_qubit_gate!r}")

    previous = [-1] * n_qubits
    moments: list[Moment] = []
    for k in range(cycles + 1):
        layer = []
        for q in range(n_qubits):
            gen = rng.substream(seed, rng.CIRCUIT_GATES, k, q)
            if previous[q] < 0:
                g = int(gen.integers(3))
            else:
                g = [i for i in range(3) if i != previous[q]][int(gen.integers(2))]
            previous[q] = g
            layer.append(Op(SINGLE_QUBIT_GATES[g], (q,)))
        moments.append(tuple(layer))
        if k < cycles:
            moments.append(tuple(make_2q(a, b) for a, b in topology.layer(k)))
    return Circuit(n_qubits, tuple(moments), topology, cycles, seed)


def make_patch(circuit: Circuit, partition: Iterable[int]) -> Circuit:
    """Delete every two-qubit gate that crosses the boundary of ``partition``.

    Moment count, single-qubit gates and the remaining two-qubit gates are
    unchanged; the output distribution then factorizes over the two sides.
    """
    part = frozenset(int(q) for q in partition)
    if not part or len(part) >= circuit.n_qubits or not part <= set(range(circuit.n_qubits)):
        raise ValueError("partition must be a nonempty proper subset of the circuit's qubits")
    moments = tuple(
        tuple(op for op in m if not (op.is_two_qubit and (op.qubits[0] in part) != (op.qubits[1] in part)))
        for m in circuit.moments
    )
    return replace(circuit, moments=moments)


def restrict(circuit: Circuit, qubits: Sequence[int]) -> Circuit:
    """Return the sub-circuit on ``qubits``, relabelled so ``qubits[i]`` becomes ``i``.

    No gate may act both inside and outside ``qubits``; apply ``make_patch``
    first. The result has no topology.
    """
    index = {q: i for i, q in enumerate(qubits)}
    if len(index) != len(qubits):
        raise ValueError("qubits must be distinct")
    moments = []
    for m in circuit.moments:
        kept = []
        for op in m:
            inside = [q in index for q in op.qubits]
            if all(inside):
                kept.append(replace(op, qubits=tuple(index[q] for q in op.qubits)))
            elif any(inside):
                raise ValueError(f"{op.name} on {op.qubits} crosses the restriction boundary")
        moments.append(tuple(kept))
    return Circuit(len(qubits), tuple(moments), None, circuit.cycles, circuit.seed)


def serialize(circuit: Circuit) -> str:
    """Render ``circuit`` in canonical text form (LF line endings)."""
    lines = [f"qubits {circuit.n_qubits}"]
    if circuit.topology is not None:
        lines.append(f"topology {circuit.topology.describe()}")
    if circuit.cycles is not None:
        lines.append(f"cycles {circuit.cycles}")
    if circuit.seed is not None:
        lines.append(f"seed {circuit.seed}")
    for moment in circuit.moments:
        lines.append("moment")
        for op in moment:
            fields = [op.name, *map(str, op.qubits), *(format(p, ".17g") for p in op.params)]
            lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def parse(text: str) -> Circuit:
    """Parse circuit text; raises :class:`CircuitParseError` with the line number."""
    n_qubits = topology = cycles = seed = None
    moments: list[list[Op]] = []
    used: list[set[int]] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        head, args = tokens[0], tokens[1:]
        try:
            if head == "qubits":
                _expect_header(n_qubits, moments, head)
                (n_qubits,) = _ints(args, 1)
                if n_qubits < 1:
                    raise ValueError("qubit count must be positive")
            elif head == "topology":
                _expect_header(topology, moments, head)
                if args[:1] == ["chain"]:
                    topology = Topology.chain(*_ints(args[1:], 1))
                elif args[:1] == ["grid"]:
                    topology = Topology.grid(*_ints(args[1:], 2))
                else:
                    raise ValueError("topology must be 'chain <n>' or 'grid <rows> <cols>'")
            elif head == "cycles":
                _expect_header(cycles, moments, head)
                (cycles,) = _ints(args, 1)
                if cycles < 0:
                    raise ValueError("cycles must be non-negative")
            elif head == "seed":
                _expect_header(seed, moments, head)
                (seed,) = _ints(args, 1)
                rng.check_seed(seed)
            elif head == "moment":
                if args:
                    raise ValueError("'moment' takes no arguments")
                moments.append([])
                used.append(set())
            elif head in GATE_ARITY:
                if n_qubits is None:
                    raise ValueError("gate before the 'qubits' line")
                if not moments:
                    raise ValueError("gate before the first 'moment' line")
                arity, nparams = GATE_ARITY[head], GATE_NPARAMS[head]
                if len(args) != arity + nparams:
                    raise ValueError(f"{head} expects {arity} qubit(s) and {nparams} angle(s)")
                qubits = tuple(_ints(args[:arity], arity))
                params = tuple(float(a) for a in args[arity:])
                op = Op(head, qubits, params)
                for q in qubits:
                    if not 0 <= q < n_qubits:
                        raise ValueError(f"qubit {q} out of range")
                    if q in used[-1]:
                        raise ValueError(f"qubit {q} already used in this moment")
                    used[-1].add(q)
                if topology is not None and len(qubits) == 2 and tuple(sorted(qubits)) not in topology.couplers:
                    raise ValueError(f"{qubits} is not a coupler of {topology.describe()}")
                moments[-1].append(op)
            else:
                raise ValueError(f"unknown gate or directive {head!r}")
        except ValueError as exc:
            raise CircuitParseError(lineno, str(exc)) from None
    if n_qubits is None:
        raise CircuitParseError(1, "missing 'qubits' line")
    try:
        return Circuit(n_qubits, tuple(tuple(m) for m in moments), topology, cycles, seed)
    except ValueError as exc:
        raise CircuitParseError(1, str(exc)) from None


def _expect_header(current, moments, name: str) -> None:
    if current is not None:
        raise ValueError(f"duplicate '{name}' line")
    if moments:
        raise ValueError(f"'{name}' must precede the first moment")


def _ints(args: Sequence[str], count: int) -> list[int]:
    if len(args) != count:
        raise ValueError(f"expected {count} integer(s), got {len(args)}")
    return [int(a) for a in args]
