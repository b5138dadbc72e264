"""The scaled-down experiment suite behind ``rcslab suite``."""

from __future__ import annotations

import tempfile
from pathlib import Path

from rcslab import experiments, records
from rcslab.circuits import serialize
from rcslab.noise import NoiseModel, pauli_trajectory_sample, predict_fidelity, white_noise_mix
from rcslab.spoof import coin_toss_sampler, targeted_spoofer
from rcslab.xeb import exact_xeb, ideal_table, linear_xeb, pt_test, sample_from_distribution, score_samples

FULL = {
    "c1": {"circuit_seeds": range(20), "uniform_per_circuit": 5000},
    "c2": {"circuit_seeds": range(10)},
    "c3": {"n_draws": 10**5},
    "c4": {"n_samples": 10**6},
    "c5": {"n_samples": 10**7},
    "c6": {"n_trajectories": 2000},
    "c7": {"n_trajectories": 2000},
    "c8": {"n_min": 16, "n_max": 24, "repetitions": 5},
    "c10": {"n_circuits": 100},
    "trajectories": 2000,
    "mix_samples": 10**5,
}
QUICK = {
    "c1": {"circuit_seeds": range(5), "uniform_per_circuit": 4000},
    "c2": {"circuit_seeds": range(3)},
    "c3": {"n_draws": 10**5},
    "c4": {"n_samples": 10**5},
    "c5": {"n_samples": 10**6},
    "c6": {"n_trajectories": 300},
    "c7": {"n_trajectories": 300},
    "c8": {"n_min": 14, "n_max": 20, "repetitions": 3},
    "c10": {"n_circuits": 20},
    "trajectories": 200,
    "mix_samples": 20000,
}

CYCLE_SWEEP = (2, 4, 6, 8, 10, 12, 14)
NOISE_SWEEP = (0.0, 0.001, 0.002, 0.005, 0.01)
MIX_SWEEP = (0.0, 0.25, 0.5, 1.0)
SWEEP_SEED = 9009


def _estimate(out: Path, name: str, circuit, samples, command, seeds, **extra) -> None:
    est = linear_xeb(score_samples(circuit, samples))
    extra.setdefault("exact_xeb", exact_xeb(ideal_table(circuit)))
    records.write_json(out / "estimates" / f"{name}.json", records.estimate_record(est, command, seeds, circuit, **extra))


def run_suite(out: Path, command: list[str], quick: bool = False, workers: int = 1) -> bool:
    """Write sweeps, Porter-Thomas stats, a cost probe and all checks under ``out``.

    Returns whether every check passed.
    """
    size = QUICK if quick else FULL
    out.mkdir(parents=True, exist_ok=True)
    ref = experiments.reference_circuit(0)
    records.write_text(out / "circuits" / "grid3x4_c14_s0.txt", serialize(ref))
    per = 100

    base_noise = NoiseModel(0.002, 0.002, 0.0)
    for cyc in CYCLE_SWEEP:
        c = experiments.reference_circuit(0, cyc)
        s = pauli_trajectory_sample(c, base_noise, size["trajectories"] * per, SWEEP_SEED + cyc, per, workers)
        sampler = {"kind": "pauli_trajectories", "noise": base_noise.to_dict(), "samples_per_trajectory": per}
        _estimate(out, f"cycles_{cyc:02d}", c, s, command, {"sample_seed": SWEEP_SEED + cyc, "circuit_seed": 0},
                  sampler=sampler, predicted_f=predict_fidelity(c, base_noise))
    for i, e in enumerate(NOISE_SWEEP):
        noise = NoiseModel(e, e, 0.0)
        s = pauli_trajectory_sample(ref, noise, size["trajectories"] * per, SWEEP_SEED + 100 + i, per, workers)
        sampler = {"kind": "pauli_trajectories", "noise": noise.to_dict(), "samples_per_trajectory": per}
        _estimate(out, f"noise_{e:g}", ref, s, command, {"sample_seed": SWEEP_SEED + 100 + i, "circuit_seed": 0},
                  sampler=sampler, predicted_f=predict_fidelity(ref, noise))
    ideal = ideal_table(ref)
    for i, f_mix in enumerate(MIX_SWEEP):
        s = sample_from_distribution(white_noise_mix(ideal, f_mix), size["mix_samples"], SWEEP_SEED + 200 + i, workers)
        _estimate(out, f"mix_{f_mix:g}", ref, s, command, {"sample_seed": SWEEP_SEED + 200 + i, "circuit_seed": 0},
                  sampler={"kind": "white_noise_mix", "mix": f_mix}, expected_f=f_mix * exact_xeb(ideal))
    _estimate(out, "spoof_coin", ref, coin_toss_sampler(ref.n_qubits, size["mix_samples"], SWEEP_SEED + 300),
              command, {"sample_seed": SWEEP_SEED + 300}, sampler={"kind": "coin_toss"})
    _estimate(out, "spoof_target_0.002", ref, targeted_spoofer(ref, 0.002, size["c5"]["n_samples"], SWEEP_SEED + 301, workers),
              command, {"sample_seed": SWEEP_SEED + 301, "circuit_seed": 0}, sampler={"kind": "targeted_spoofer", "target": 0.002})

    for cyc in (1, 14, 20):
        c = experiments.reference_circuit(0, cyc)
        rec = {"kind": "pt_stats", **pt_test(ideal_table(c)).to_dict(), "circuit": records.circuit_info(c)}
        rec.update(records.provenance(command, {"circuit_seed": 0}, records.circuit_hash(c)))
        records.write_json(out / "pt" / f"cycles_{cyc:02d}.json", rec)

    checks = [
        experiments.check_xeb_endpoints(**size["c1"]),
        experiments.check_porter_thomas(**size["c2"]),
        experiments.check_estimator(**size["c3"]),
        experiments.check_white_noise(**size["c4"]),
        experiments.check_spoof(**size["c5"]),
        experiments.check_noise_prediction(**size["c6"], workers=workers),
        experiments.check_patch(**size["c7"]),
    ]
    cost_check, cost = experiments.check_cost(**size["c8"])
    checks.append(cost_check)
    records.write_text(out / "cost.csv", cost.csv_text())
    cost_rec = {"kind": "cost_probe", **cost.to_dict()}
    cost_rec.update(records.provenance(command, {"seed": 0}, None))
    records.write_json(out / "cost.json", cost_rec)
    with tempfile.TemporaryDirectory() as tmp:
        checks.append(experiments.check_determinism(tmp))
    checks.append(experiments.check_oracle(**size["c10"]))

    acceptance = {"kind": "acceptance", "quick": quick, "checks": [c.to_dict() for c in checks]}
    acceptance.update(records.provenance(command, {"reference_circuit_seed": 0}, records.circuit_hash(ref)))
    records.write_json(out / "acceptance.json", acceptance)
    for c in checks:
        print(c.line())
    return all(c.passed for c in checks)
