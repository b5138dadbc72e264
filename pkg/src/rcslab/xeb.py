"""Linear cross-entropy benchmarking and Porter-Thomas statistics.

The linear XEB fidelity of a set of observed bitstrings is

    F = 2**n * <P> - 1

where ``<P>`` is the mean *ideal* (noiseless) probability of the observed
bitstrings. Ideal sampling from a Porter-Thomas distribution gives
``<P> = 2/2**n`` (F = 1); uniform sampling gives ``<P> = 1/2**n`` (F = 0).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from rcslab import rng
from rcslab.circuits import Circuit
from rcslab.simcore import check_capacity, probabilities, run_circuit

SAMPLE_BLOCK_SIZE = 1 << 16


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Observed bitstrings, optionally tagged with independence groups.

    ``groups[i]`` identifies the trajectory (or other independence unit)
    that produced ``bitstrings[i]``; ``None`` means every sample is
    independent.
    """

    n_qubits: int
    bitstrings: np.ndarray
    groups: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        b = np.asarray(self.bitstrings, dtype=np.int64).reshape(-1)
        object.__setattr__(self, "bitstrings", b)
        if b.size and (b.min() < 0 or b.max() >= (1 << self.n_qubits)):
            raise ValueError(f"bitstrings must lie in [0, 2**{self.n_qubits})")
        if self.groups is not None:
            g = np.asarray(self.groups, dtype=np.int64).reshape(-1)
            if g.shape != b.shape:
                raise ValueError("groups must align with bitstrings")
            object.__setattr__(self, "groups", g)

    def __len__(self) -> int:
        return self.bitstrings.size


@dataclass(frozen=True, eq=False)
class ScoredSamples:
    samples: SampleSet
    ideal_p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.ideal_p, dtype=np.float64).reshape(-1)
        if p.shape != self.samples.bitstrings.shape:
            raise ValueError("ideal_p must align with bitstrings")
        if p.size and (p.min() < 0 or p.max() > 1):
            raise ValueError("ideal probabilities must lie in [0, 1]")
        object.__setattr__(self, "ideal_p", p)

    @property
    def n_qubits(self) -> int:
        return self.samples.n_qubits


@dataclass(frozen=True)
class XebEstimate:
    """Linear XEB estimate; ``f == 2**n_qubits * mean_p - 1`` by construction."""

    n_qubits: int
    n_samples: int
    mean_p: float
    f: float
    stderr: float
    n_groups: int

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "n_samples": self.n_samples,
            "mean_p": self.mean_p,
            "f": self.f,
            "stderr": self.stderr,
        }


@dataclass(frozen=True, eq=False)
class PTStats:
    """Porter-Thomas comparison of scaled probabilities ``x = 2**n p``."""

    ks_distance: float
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    n_points: int

    def to_dict(self) -> dict:
        return {
            "ks_distance": self.ks_distance,
            "n_points": self.n_points,
            "hist_edges": [float(e) for e in self.hist_edges],
            "hist_counts": [int(c) for c in self.hist_counts],
        }


def ideal_table(circuit: Circuit) -> np.ndarray:
    """Full noiseless output distribution of ``circuit``.

    Raises :class:`~rcslab.errors.CapacityError` (carrying the memory a
    statevector would need) when the circuit is beyond the qubit limit.
    """
    check_capacity(circuit.n_qubits)
    return probabilities(run_circuit(circuit))


def score_samples(circuit: Circuit, samples: SampleSet) -> ScoredSamples:
    """Attach the ideal probability of each observed bitstring (one simulation)."""
    if samples.n_qubits != circuit.n_qubits:
        raise ValueError(f"samples have {samples.n_qubits} qubits, circuit has {circuit.n_qubits}")
    table = ideal_table(circuit)
    return ScoredSamples(samples, table[samples.bitstrings])


def linear_xeb(scored: ScoredSamples) -> XebEstimate:
    """Estimate F = 2**n <P> - 1 with a group-aware standard error.

    The standard error is the sample standard deviation of the per-sample
    values ``2**n p_i - 1`` divided by the square root of the number of
    independence groups (or of samples, when there are no groups).
    """
    n = scored.n_qubits
    count = scored.ideal_p.size
    if count < 2:
        raise ValueError("linear XEB needs at least two samples")
    mean_p = float(np.mean(scored.ideal_p))
    f = math.ldexp(mean_p, n) - 1.0
    sd = float(np.std(np.ldexp(scored.ideal_p, n) - 1.0, ddof=1))
    groups = scored.samples.groups
    n_eff = count if groups is None else int(np.unique(groups).size)
    return XebEstimate(n, count, mean_p, f, sd / math.sqrt(n_eff), n_eff)


def xeb_endpoints(n_qubits: int) -> tuple[float, float]:
    """Return ``(p_best, p_worst) = (2/2**n, 1/2**n)``."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    return math.ldexp(2.0, -n_qubits), math.ldexp(1.0, -n_qubits)


def exact_xeb(ideal: np.ndarray) -> float:
    """XEB expected under exact sampling: ``2**n sum(p**2) - 1``."""
    return float(ideal.size * np.dot(ideal, ideal) - 1.0)


def expected_xeb(ideal: np.ndarray, sampled: np.ndarray) -> float:
    """XEB expected when sampling from ``sampled`` and scoring against ``ideal``."""
    return float(ideal.size * np.dot(ideal, sampled) - 1.0)


def _ks_exponential(x: np.ndarray) -> float:
    x = np.sort(x)
    m = x.size
    cdf = -np.expm1(-x)
    upper = np.arange(1, m + 1) / m - cdf
    lower = cdf - np.arange(m) / m
    return float(max(upper.max(), lower.max()))


def _histogram(x: np.ndarray, width: float = 0.25) -> tuple[np.ndarray, np.ndarray]:
    top = max(width, math.ceil(float(x.max()) / width) * width + width) if x.size else width
    edges = np.arange(0.0, top + width / 2, width)
    counts, edges = np.histogram(x, bins=edges)
    return edges, counts


def pt_test(ideal_dist: np.ndarray) -> PTStats:
    """Kolmogorov-Smirnov distance between ``{2**n p_i}`` and Exp(1).

    Runs on the full enumerated distribution: every outcome contributes one
    point, so there is no sampling noise beyond the finite dimension.
    """
    p = np.asarray(ideal_dist, dtype=np.float64)
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("distribution must sum to 1")
    x = p * p.size
    edges, counts = _histogram(x)
    return PTStats(_ks_exponential(x), edges, counts, x.size)


def pt_test_sampled(probs: np.ndarray, n_qubits: int) -> PTStats:
    """KS distance to Exp(1) for ideal probabilities of uniformly chosen bitstrings."""
    x = np.ldexp(np.asarray(probs, dtype=np.float64), n_qubits)
    edges, counts = _histogram(x)
    return PTStats(_ks_exponential(x), edges, counts, x.size)


def cumulative(dist: np.ndarray) -> np.ndarray:
    p = np.asarray(dist, dtype=np.float64)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("distribution must be non-negative and sum to 1")
    cdf = np.cumsum(p)
    return cdf / cdf[-1]


def draw(cdf: np.ndarray, count: int, gen: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws; zero-probability outcomes are never returned."""
    return np.searchsorted(cdf, gen.random(count), side="right").astype(np.int64)


def sample_from_distribution(dist: np.ndarray, count: int, seed: int, workers: int = 1) -> SampleSet:
    """Draw ``count`` i.i.d. outcomes from ``dist``.

    Block ``b`` of ``SAMPLE_BLOCK_SIZE`` draws uses substream
    ``(seed, SAMPLE_BLOCK, b)``, so the output does not depend on
    ``workers``.
    """
    cdf = cumulative(dist)
    n_qubits = int(cdf.size).bit_length() - 1
    if 1 << n_qubits != cdf.size:
        raise ValueError("distribution length must be a power of two")
    sizes = [min(SAMPLE_BLOCK_SIZE, count - start) for start in range(0, count, SAMPLE_BLOCK_SIZE)]

    def block(b: int) -> np.ndarray:
        return draw(cdf, sizes[b], rng.substream(seed, rng.SAMPLE_BLOCK, b))

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(block, range(len(sizes))))
    else:
        parts = [block(b) for b in range(len(sizes))]
    bits = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    return SampleSet(n_qubits, bits, None, seed)


def normalized_fidelity(estimate: XebEstimate, ideal: np.ndarray) -> tuple[float, float]:
    """Divide an estimate (and its stderr) by its exact-sampling value ``2**n sum(p**2) - 1``.

    Maps exact sampling to 1 regardless of how far the circuit's
    distribution is from Porter-Thomas; useful for small patches.
    """
    scale = exact_xeb(ideal)
    if scale <= 0:
        raise ValueError("distribution is uniform; normalized fidelity is undefined")
    return estimate.f / scale, estimate.stderr / scale


def extract_bits(bitstrings: np.ndarray, qubits) -> np.ndarray:
    """Marginal bitstrings: bit ``i`` of the result is bit ``qubits[i]`` of the input."""
    bitstrings = np.asarray(bitstrings, dtype=np.int64)
    out = np.zeros_like(bitstrings)
    for i, q in enumerate(qubits):
        out |= ((bitstrings >> q) & 1) << i
    return out


def marginal_samples(samples: SampleSet, qubits) -> SampleSet:
    return SampleSet(len(qubits), extract_bits(samples.bitstrings, qubits), samples.groups, samples.seed)
