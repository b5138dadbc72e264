"""Classical spoofers and the cost of verifying samples.

Both spoofers reach the simulator only through :func:`rcslab.xeb.ideal_table`,
the same entry point scoring uses: any sample set whose XEB can be
computed can also be faked at that XEB.
"""

from __future__ import annotations

import math
import statistics
import time
import tracemalloc
from dataclasses import dataclass, field

import numpy as np

from rcslab import rng
from rcslab.circuits import Circuit, Topology, generate_random_circuit
from rcslab.errors import CapacityError, UnachievableTargetError
from rcslab.noise import white_noise_mix
from rcslab.simcore import check_capacity, statevector_bytes
from rcslab.xeb import SampleSet, exact_xeb, ideal_table, sample_from_distribution, score_samples

SECONDS_PER_YEAR = 365.25 * 24 * 3600


def coin_toss_sampler(n_qubits: int, count: int, seed: int) -> SampleSet:
    """Uniform n-bit strings: n fair coins per sample."""
    if count < 1:
        raise ValueError("count must be at least 1")
    if n_qubits < 1 or n_qubits > 62:
        raise ValueError("n_qubits must be in [1, 62]")
    gen = rng.substream(seed, rng.COIN_TOSS)
    return SampleSet(n_qubits, gen.integers(0, 1 << n_qubits, size=count, dtype=np.int64), None, seed)


def spoof_weight(ideal: np.ndarray, target_f: float) -> float:
    """Mixture weight whose expected linear XEB equals ``target_f``."""
    if target_f < 0:
        raise ValueError("target fidelity must be non-negative")
    ceiling = exact_xeb(ideal)
    if target_f > ceiling:
        raise UnachievableTargetError(target_f, ceiling)
    if target_f == 0:
        return 0.0
    return min(1.0, max(0.0, target_f / ceiling))


def targeted_spoofer(circuit: Circuit, target_f: float, count: int, seed: int, workers: int = 1) -> SampleSet:
    """Sample from a white-noise mixture tuned so the expected XEB is ``target_f``.

    Sampling from ``f' * p + (1 - f') / 2**n`` gives expected XEB
    ``f' * (2**n sum(p**2) - 1)``; ``f'`` is solved from that. Raises
    :class:`UnachievableTargetError` above ``2**n sum(p**2) - 1``.
    """
    ideal = ideal_table(circuit)
    weight = spoof_weight(ideal, target_f)
    return sample_from_distribution(white_noise_mix(ideal, weight), count, seed, workers=workers)


@dataclass
class CostRow:
    n: int
    median_seconds: float | None
    bytes: int
    ratio_vs_prev: float | None
    note: str = ""


@dataclass
class CostReport:
    """Timing and memory of ``score_samples`` as a function of qubit count.

    ``extrapolation`` holds the log-linear fit of time against n projected
    to a larger n; it is a model projection, not a measurement.
    """

    rows: list[CostRow]
    cycles: int
    repetitions: int
    extrapolation: dict = field(default_factory=dict)

    def measured(self) -> list[CostRow]:
        return [r for r in self.rows if r.median_seconds is not None]

    def csv_text(self) -> str:
        lines = ["n,median_seconds,bytes,ratio_vs_prev"]
        for r in self.rows:
            t = "" if r.median_seconds is None else format(r.median_seconds, ".6g")
            ratio = "" if r.ratio_vs_prev is None else format(r.ratio_vs_prev, ".6g")
            lines.append(f"{r.n},{t},{r.bytes},{ratio}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "cycles": self.cycles,
            "repetitions": self.repetitions,
            "rows": [
                {
                    "n": r.n,
                    "median_seconds": r.median_seconds,
                    "bytes": r.bytes,
                    "ratio_vs_prev": r.ratio_vs_prev,
                    "note": r.note,
                }
                for r in self.rows
            ],
            "extrapolation": self.extrapolation,
        }


def _peak_bytes(fn) -> int:
    tracemalloc.start()
    try:
        tracemalloc.reset_peak()
        fn()
        return tracemalloc.get_traced_memory()[1]
    finally:
        tracemalloc.stop()


def verification_cost_probe(
    n_list,
    cycles: int,
    repetitions: int,
    n_samples: int = 1000,
    seed: int = 0,
    extrapolate_to: int = 53,
) -> CostReport:
    """Time and size the scoring of ``n_samples`` coin-toss samples per qubit count.

    For each n a chain circuit with ``cycles`` cycles is scored
    ``repetitions`` times and the median wall time recorded; ``bytes`` is
    the peak traced allocation of one extra (untimed) scoring pass. Counts
    beyond the simulator limit become rows with a note and the bytes a
    statevector would need. ``ratio_vs_prev`` compares with the previous
    measured row.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    rows: list[CostRow] = []
    prev: float | None = None
    for n in n_list:
        try:
            check_capacity(n)
        except CapacityError as exc:
            rows.append(CostRow(n, None, exc.bytes_required, None, "capacity: " + str(exc)))
            prev = None
            continue
        circuit = generate_random_circuit(n, Topology.chain(n), cycles, seed)
        samples = coin_toss_sampler(n, n_samples, seed)
        times = []
        for _ in range(repetitions):
            t0 = time.perf_counter()
            score_samples(circuit, samples)
            times.append(time.perf_counter() - t0)
        median = statistics.median(times)
        peak = _peak_bytes(lambda: score_samples(circuit, samples))
        rows.append(CostRow(n, median, peak, None if prev is None else median / prev))
        prev = median

    report = CostReport(rows, cycles, repetitions)
    measured = report.measured()
    if len(measured) >= 2:
        ns = np.array([r.n for r in measured], dtype=float)
        slope, intercept = np.polyfit(ns, np.log2([r.median_seconds for r in measured]), 1)
        seconds = 2.0 ** (intercept + slope * extrapolate_to)
        report.extrapolation = {
            "label": "EXTRAPOLATION from a log-linear fit of measured times; not a measurement",
            "fit_growth_per_qubit": float(2.0**slope),
            "n": extrapolate_to,
            "seconds": float(seconds),
            "years": float(seconds / SECONDS_PER_YEAR),
            "statevector_bytes": statevector_bytes(extrapolate_to),
            "log10_years": float(math.log10(seconds / SECONDS_PER_YEAR)),
        }
    return report
