"""Exception types shared across the package."""

from __future__ import annotations


class RcsError(Exception):
    """Base class for errors raised by rcslab."""


class SizeError(RcsError, ValueError):
    """A qubit count is outside the allowed range."""


class CapacityError(SizeError):
    """A circuit is too large to simulate under the current qubit limit.

    Attributes:
        n_qubits: Requested qubit count.
        max_qubits: Limit in force when the request was made.
        bytes_required: Memory a dense statevector of that size would need.
    """

    def __init__(self, n_qubits: int, max_qubits: int, bytes_required: int):
        self.n_qubits = n_qubits
        self.max_qubits = max_qubits
        self.bytes_required = bytes_required
        super().__init__(
            f"{n_qubits} qubits exceeds the limit of {max_qubits}: a dense statevector "
            f"needs {bytes_required} bytes ({bytes_required / 2**30:.3g} GiB)"
        )


class CircuitParseError(RcsError, ValueError):
    """Malformed circuit text. ``line`` is 1-based."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class UnachievableTargetError(RcsError, ValueError):
    """Requested XEB target exceeds what the circuit's distribution allows."""

    def __init__(self, target: float, maximum: float):
        self.target = target
        self.maximum = maximum
        super().__init__(
            f"target fidelity {target} is unachievable; the maximum for this circuit is {maximum:.6g}"
        )
