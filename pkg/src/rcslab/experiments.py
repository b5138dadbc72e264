"""Scaled-down verification experiments.

Each ``check_*`` function runs one experiment at the given size and
returns a :class:`CheckResult` with the measured numbers and a verdict
against its tolerance. ``rcslab suite`` writes these results to disk; the
acceptance tests call the same functions and re-check the numbers.
"""

from __future__ import annotations

import math
import os
import shutil
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rcslab.circuits import Topology, generate_random_circuit, make_patch, restrict
from rcslab.noise import NoiseModel, pauli_trajectory_sample, predict_fidelity, trajectory_fidelities, white_noise_mix
from rcslab.oracle import dense_state
from rcslab.simcore import run_circuit
from rcslab.spoof import coin_toss_sampler, targeted_spoofer, verification_cost_probe
from rcslab.xeb import (
    ScoredSamples,
    SampleSet,
    exact_xeb,
    extract_bits,
    ideal_table,
    linear_xeb,
    marginal_samples,
    normalized_fidelity,
    pt_test,
    sample_from_distribution,
    score_samples,
)

GRID = Topology.grid(3, 4)
CYCLES = 14
# Columns 0-1 and 2-3 of the 3x4 grid.
PATCH_A = (0, 1, 4, 5, 8, 9)
PATCH_B = (2, 3, 6, 7, 10, 11)


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    metrics: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.key}: {self.title}"

    def to_dict(self) -> dict:
        return {"key": self.key, "title": self.title, "passed": self.passed, "metrics": self.metrics}


def reference_circuit(seed: int = 0, cycles: int = CYCLES):
    return generate_random_circuit(GRID.n_qubits, GRID, cycles, seed)


def within(value: float, target: float, sigma: float, k: float = 3.0) -> bool:
    return abs(value - target) <= k * sigma


def check_xeb_endpoints(circuit_seeds=range(20), uniform_per_circuit: int = 5000, sample_seed: int = 1001) -> CheckResult:
    """Mean exact-sampling XEB over seeds lies in [0.95, 1.05]; uniform samples give 0."""
    exact, pooled = [], []
    for s in circuit_seeds:
        c = reference_circuit(s)
        p = ideal_table(c)
        exact.append(exact_xeb(p))
        pooled.append(p[coin_toss_sampler(c.n_qubits, uniform_per_circuit, sample_seed + s).bitstrings])
    bits = np.zeros(sum(x.size for x in pooled), dtype=np.int64)
    est = linear_xeb(ScoredSamples(SampleSet(GRID.n_qubits, bits), np.concatenate(pooled)))
    mean_exact = float(np.mean(exact))
    return CheckResult(
        "C1",
        "XEB endpoints: mean 2^n sum p^2 - 1 in [0.95, 1.05]; uniform sampling f = 0 +- 3 stderr",
        0.95 <= mean_exact <= 1.05 and within(est.f, 0.0, est.stderr),
        {
            "n_circuits": len(exact),
            "mean_exact_xeb": mean_exact,
            "exact_xeb": exact,
            "uniform_f": est.f,
            "uniform_stderr": est.stderr,
            "uniform_samples": est.n_samples,
        },
    )


def check_porter_thomas(circuit_seeds=range(10), deep_cycles=(14, 20), shallow_cycles: int = 1) -> CheckResult:
    """KS distance to Porter-Thomas below 0.02 at full depth and above 0.1 at one cycle."""
    deep = {cyc: [pt_test(ideal_table(reference_circuit(s, cyc))).ks_distance for s in circuit_seeds] for cyc in deep_cycles}
    shallow = [pt_test(ideal_table(reference_circuit(s, shallow_cycles))).ks_distance for s in circuit_seeds]
    deep_max = max(max(v) for v in deep.values())
    return CheckResult(
        "C2",
        "Porter-Thomas: KS < 0.02 for cycles >= 14, KS > 0.1 for 1 cycle (n = 12)",
        deep_max < 0.02 and min(shallow) > 0.1,
        {"deep_ks": {str(k): v for k, v in deep.items()}, "deep_max": deep_max, "shallow_ks": shallow, "shallow_min": min(shallow)},
    )


def check_estimator(n_draws: int = 10**5, circuit_seed: int = 0, sample_seed: int = 2002) -> CheckResult:
    """Exact samples give f equal to the enumerated 2^n sum p^2 - 1 (about 1) within 3 stderr."""
    c = reference_circuit(circuit_seed)
    p = ideal_table(c)
    est = linear_xeb(score_samples(c, sample_from_distribution(p, n_draws, sample_seed)))
    oracle = exact_xeb(p)
    return CheckResult(
        "C3",
        "Estimator: exact sampling gives f = enumerated value (~1) +- 3 stderr",
        within(est.f, oracle, est.stderr) and within(est.f, 1.0, est.stderr),
        {"f": est.f, "stderr": est.stderr, "enumerated": oracle, "n_samples": est.n_samples},
    )


def check_white_noise(n_samples: int = 10**6, mixes=(0.0, 0.25, 0.5, 1.0), circuit_seed: int = 0, sample_seed: int = 3003) -> CheckResult:
    """XEB of white-noise mixtures is affine in the mixture weight."""
    c = reference_circuit(circuit_seed)
    p = ideal_table(c)
    z = exact_xeb(p)
    points = []
    for i, f_mix in enumerate(mixes):
        est = linear_xeb(score_samples(c, sample_from_distribution(white_noise_mix(p, f_mix), n_samples, sample_seed + i)))
        points.append({"mix": f_mix, "f": est.f, "stderr": est.stderr, "expected": f_mix * z})
    return CheckResult(
        "C4",
        "White-noise affinity: f = f_mix (2^n sum p^2 - 1) +- 3 stderr",
        all(within(pt["f"], pt["expected"], pt["stderr"]) for pt in points),
        {"points": points, "n_samples": n_samples},
    )


def check_spoof(n_samples: int = 10**7, target: float = 0.002, circuit_seed: int = 0, sample_seed: int = 4004) -> CheckResult:
    """A classical mixture sampler reaches the target XEB."""
    c = reference_circuit(circuit_seed)
    est = linear_xeb(score_samples(c, targeted_spoofer(c, target, n_samples, sample_seed)))
    return CheckResult(
        "C5",
        f"Targeted spoofer reaches f = {target} +- 3 stderr",
        within(est.f, target, est.stderr),
        {"target": target, "f": est.f, "stderr": est.stderr, "n_samples": est.n_samples},
    )


def check_noise_prediction(
    n_trajectories: int = 2000,
    samples_per_trajectory: int = 100,
    rate: float = 0.002,
    circuit_seed: int = 0,
    sample_seed: int = 5005,
    workers: int = 1,
) -> CheckResult:
    """Trajectory XEB agrees with the digital error model within 25 % relative."""
    c = reference_circuit(circuit_seed)
    noise = NoiseModel(rate, rate, 0.0)
    samples = pauli_trajectory_sample(c, noise, n_trajectories * samples_per_trajectory, sample_seed, samples_per_trajectory, workers)
    est = linear_xeb(score_samples(c, samples))
    predicted = predict_fidelity(c, noise)
    rel = est.f / predicted - 1.0
    return CheckResult(
        "C6",
        "Noise model: trajectory XEB within 25% of predicted fidelity",
        abs(rel) <= 0.25,
        {"f": est.f, "stderr": est.stderr, "predicted": predicted, "relative_error": rel, "trajectories": est.n_groups, "noise": noise.to_dict()},
    )


def patch_distribution_deviation(circuit, part_a, part_b) -> float:
    """Max |P(x) - P_a(x_a) P_b(x_b)| over all outcomes of a patched circuit."""
    full = ideal_table(circuit)
    pa = ideal_table(restrict(circuit, part_a))
    pb = ideal_table(restrict(circuit, part_b))
    x = np.arange(full.size)
    return float(np.max(np.abs(full - pa[extract_bits(x, part_a)] * pb[extract_bits(x, part_b)])))


def check_patch(
    n_trajectories: int = 2000,
    samples_per_trajectory: int = 100,
    noise: NoiseModel = NoiseModel(0.004, 0.01, 0.0),
    circuit_seed: int = 0,
    sample_seed: int = 6006,
) -> CheckResult:
    """Patch circuits: exact factorization, and product of patch fidelities vs. the whole.

    The patch fidelities are linear XEB of the marginal samples normalized
    by each patch's exact-sampling value. Their product is compared with
    the state fidelity of the whole patched circuit averaged over the same
    trajectories. The raw 12-qubit linear XEB of the patched circuit obeys
    ``1 + F = (1 + F_a)(1 + F_b)`` instead, and is reported for reference.
    """
    c = reference_circuit(circuit_seed)
    patched = make_patch(c, PATCH_A)
    deviation = patch_distribution_deviation(patched, PATCH_A, PATCH_B)

    samples = pauli_trajectory_sample(patched, noise, n_trajectories * samples_per_trajectory, sample_seed, samples_per_trajectory)
    parts = {}
    for name, qubits in (("a", PATCH_A), ("b", PATCH_B)):
        sub = restrict(patched, qubits)
        raw = linear_xeb(score_samples(sub, marginal_samples(samples, qubits)))
        f, se = normalized_fidelity(raw, ideal_table(sub))
        parts[name] = {"raw_f": raw.f, "f": f, "stderr": se}
    product = parts["a"]["f"] * parts["b"]["f"]
    product_se = math.hypot(parts["a"]["f"] * parts["b"]["stderr"], parts["b"]["f"] * parts["a"]["stderr"])

    fid = trajectory_fidelities(patched, noise, n_trajectories, sample_seed)
    whole, whole_se = float(fid.mean()), float(fid.std(ddof=1) / math.sqrt(fid.size))
    sigma = math.hypot(product_se, whole_se)
    raw_whole = linear_xeb(score_samples(patched, samples))
    return CheckResult(
        "C7",
        "Patch circuits: factorization within 1e-10; F_a F_b matches whole patched-circuit fidelity within 3 sigma",
        deviation <= 1e-10 and within(product, whole, sigma),
        {
            "factorization_max_deviation": deviation,
            "patch_a": parts["a"],
            "patch_b": parts["b"],
            "product": product,
            "product_stderr": product_se,
            "whole_fidelity": whole,
            "whole_fidelity_stderr": whole_se,
            "sigma": sigma,
            "predicted_patched": predict_fidelity(patched, noise),
            "predicted_full_circuit": predict_fidelity(c, noise),
            "raw_whole_xeb": raw_whole.f,
            "raw_whole_from_parts": (1 + parts["a"]["raw_f"]) * (1 + parts["b"]["raw_f"]) - 1,
            "removed_two_qubit_gates": c.gate_counts()[1] - patched.gate_counts()[1],
            "noise": noise.to_dict(),
        },
    )


def check_cost(n_min: int = 16, n_max: int = 24, cycles: int = 2, repetitions: int = 5):
    """Scoring cost doubles per qubit; returns ``(CheckResult, CostReport)``."""
    report = verification_cost_probe(range(n_min, n_max + 1), cycles, repetitions)
    rows = {r.n: r for r in report.measured()}
    step2 = {n: rows[n + 2].median_seconds / rows[n].median_seconds for n in rows if n + 2 in rows}
    mem = {n: rows[n + 1].bytes / rows[n].bytes for n in rows if n + 1 in rows}
    growth = report.extrapolation.get("fit_growth_per_qubit", float("nan"))
    passed = (
        1.7 <= growth <= 2.4
        and all(2.0 <= r <= 6.0 for r in step2.values())
        and all(1.8 <= r <= 2.2 for r in mem.values())
        and "EXTRAPOLATION" in report.extrapolation.get("label", "")
    )
    result = CheckResult(
        "C8",
        "Verification cost: time x[1.7, 2.4] per qubit (x4 +- 50% per 2 qubits), memory x2 +- 10% per qubit",
        passed,
        {
            "fit_growth_per_qubit": growth,
            "time_ratio_per_2_qubits": {str(k): v for k, v in step2.items()},
            "memory_ratio_per_qubit": {str(k): v for k, v in mem.items()},
            "report": report.to_dict(),
        },
    )
    return result, report


def check_oracle(n_circuits: int = 100, seed: int = 7007) -> CheckResult:
    """Kernel simulator equals the dense-matrix oracle on random small circuits."""
    gen = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_circuits):
        n = int(gen.integers(1, 7))
        if n >= 4 and gen.random() < 0.5:
            rows = 2
            topo = Topology.grid(rows, n // rows) if n % 2 == 0 else Topology.chain(n)
        else:
            topo = Topology.chain(n)
        gate = "fsim" if gen.random() < 0.5 else "cz"
        c = generate_random_circuit(n, topo, int(gen.integers(0, 9)), int(gen.integers(2**32)), gate)
        worst = max(worst, float(np.max(np.abs(run_circuit(c).amps - dense_state(c)))))
    return CheckResult(
        "C10",
        "Oracle equivalence: max amplitude deviation <= 1e-10 over random circuits with n <= 6",
        worst <= 1e-10,
        {"n_circuits": n_circuits, "max_deviation": worst},
    )


def check_determinism(workdir, thread_counts=(1, 3)) -> CheckResult:
    """Run a small CLI pipeline under different thread counts and compare every output byte.

    Every run uses the same output paths so the embedded command lines match.
    The cost probe is left out: it reports wall-clock timings.
    """
    from rcslab import cli

    runs = Path(workdir) / "runs"
    steps = [
        ["generate", "--qubits", "8", "--topology", "grid", "2x4", "--cycles", "8", "--seed", "7", "--out", str(runs / "c.txt")],
        ["run", "--circuit", str(runs / "c.txt"), "--samples", "20000", "--seed", "3", "--noise", "0.01,0.02,0.01", "--score", "--out", str(runs / "noisy")],
        ["run", "--circuit", str(runs / "c.txt"), "--samples", "300000", "--seed", "4", "--mix", "0.5", "--score", "--out", str(runs / "mix")],
        ["spoof", "--circuit", str(runs / "c.txt"), "--target", "0.1", "--samples", "200000", "--seed", "5", "--out", str(runs / "spoof.csv")],
        ["verify", "--circuit", str(runs / "c.txt"), "--samples-csv", str(runs / "spoof.csv"), "--out", str(runs / "spoof.json")],
        ["pt", "--circuit", str(runs / "c.txt"), "--out", str(runs / "pt.json")],
        ["report", "--dir", str(runs), "--out", str(runs / "report.json")],
    ]
    outputs = []
    for threads in thread_counts:
        if runs.exists():
            shutil.rmtree(runs)
        runs.mkdir(parents=True)
        previous = os.environ.get(cli.THREADS_ENV)
        os.environ[cli.THREADS_ENV] = str(threads)
        try:
            for argv in steps:
                code = cli.main(argv)
                if code != 0:
                    return CheckResult("C9", "Determinism across thread counts", False, {"failed_command": argv, "exit_code": code})
        finally:
            if previous is None:
                os.environ.pop(cli.THREADS_ENV, None)
            else:
                os.environ[cli.THREADS_ENV] = previous
        outputs.append({p.relative_to(runs).as_posix(): p.read_bytes() for p in sorted(runs.rglob("*")) if p.is_file()})
    names = sorted(set().union(*outputs))
    differing = [k for k in names if any(o.get(k) != outputs[0].get(k) for o in outputs[1:])]
    return CheckResult(
        "C9",
        "Determinism: identical flags and seeds give byte-identical CSV/JSON across thread counts",
        not differing and bool(names),
        {"thread_counts": list(thread_counts), "files": names, "differing": differing},
    )
