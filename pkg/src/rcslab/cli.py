"""Command-line harness.

Exit codes: 0 success, 2 usage or input error, 3 capacity error.
Internal thread count comes from the ``RCSLAB_THREADS`` environment
variable; it never changes any output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from rcslab import records
from rcslab.circuits import Circuit, Topology, generate_random_circuit, parse, serialize
from rcslab.errors import CapacityError
from rcslab.noise import (
    DEFAULT_SAMPLES_PER_TRAJECTORY,
    NoiseModel,
    pauli_trajectory_sample,
    predict_fidelity,
    sample_circuit,
    white_noise_mix,
)
from rcslab.simcore import set_max_qubits
from rcslab.spoof import coin_toss_sampler, targeted_spoofer, verification_cost_probe
from rcslab.xeb import exact_xeb, ideal_table, linear_xeb, pt_test, sample_from_distribution, score_samples

THREADS_ENV = "RCSLAB_THREADS"
PROG = "rcslab"


class UsageError(Exception):
    pass


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _load_circuit(path) -> Circuit:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read circuit file {path}: {exc.strerror or exc}") from None
    return parse(text)


def _parse_topology(tokens: list[str], n_qubits: int) -> Topology:
    kind = tokens[0]
    if kind == "chain":
        if len(tokens) == 2 and int(tokens[1]) != n_qubits:
            raise UsageError(f"chain {tokens[1]} does not match --qubits {n_qubits}")
        if len(tokens) > 2:
            raise UsageError("use '--topology chain' or '--topology chain N'")
        return Topology.chain(n_qubits)
    if kind == "grid":
        if len(tokens) != 2 or "x" not in tokens[1]:
            raise UsageError("use '--topology grid RxC'")
        try:
            rows, cols = (int(t) for t in tokens[1].split("x"))
        except ValueError:
            raise UsageError(f"bad grid size {tokens[1]!r}") from None
        if rows * cols != n_qubits:
            raise UsageError(f"grid {rows}x{cols} has {rows * cols} qubits, --qubits is {n_qubits}")
        return Topology.grid(rows, cols)
    raise UsageError(f"unknown topology {kind!r}; expected chain or grid")


def cmd_generate(args, command) -> int:
    topo = _parse_topology(args.topology, args.qubits)
    circuit = generate_random_circuit(args.qubits, topo, args.cycles, args.seed, args.gate)
    text = serialize(circuit)
    if args.out:
        records.write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


RUN_KEYS = ("circuit", "samples", "seed", "noise", "mix", "per_trajectory", "score", "out")


def _merge_config(args) -> None:
    """Fill unset ``run`` flags from ``--config``; flags win."""
    if not args.config:
        return
    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
    unknown = set(config) - set(RUN_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in RUN_KEYS:
        if key in config and getattr(args, key) in (None, False):
            value = config[key]
            if key == "noise" and isinstance(value, dict):
                value = f"{value.get('e1', 0)},{value.get('e2', 0)},{value.get('em', 0)}"
            setattr(args, key, value)


def cmd_run(args, command) -> int:
    _merge_config(args)
    for key in ("circuit", "samples", "seed", "out"):
        if getattr(args, key) is None:
            raise UsageError(f"run needs --{key} (flag or config)")
    if args.noise is not None and args.mix is not None:
        raise UsageError("--noise and --mix are mutually exclusive")
    per = args.per_trajectory or DEFAULT_SAMPLES_PER_TRAJECTORY
    circuit = _load_circuit(args.circuit)
    workers = _workers()
    samples_n, seed = int(args.samples), int(args.seed)
    extra: dict = {"sampler": {"samples_per_trajectory": per}}

    if args.mix is not None:
        f_mix = float(args.mix)
        ideal = ideal_table(circuit)
        samples = sample_from_distribution(white_noise_mix(ideal, f_mix), samples_n, seed, workers=workers)
        extra["sampler"] = {"kind": "white_noise_mix", "mix": f_mix}
        extra["expected_f"] = f_mix * exact_xeb(ideal)
    else:
        noise = NoiseModel.parse(args.noise) if args.noise is not None else NoiseModel()
        if noise.is_noiseless:
            samples = sample_circuit(circuit, samples_n, seed, per, workers)
        else:
            samples = pauli_trajectory_sample(circuit, noise, samples_n, seed, per, workers)
        extra["sampler"] = {"kind": "pauli_trajectories", "noise": noise.to_dict(), "samples_per_trajectory": per}
        extra["predicted_f"] = predict_fidelity(circuit, noise)

    out = Path(args.out)
    records.write_text(out / "samples.csv", records.samples_csv(samples))
    if args.score:
        scored = score_samples(circuit, samples)
        estimate = linear_xeb(scored)
        extra["exact_xeb"] = exact_xeb(ideal_table(circuit))
        records.write_text(out / "scored.csv", records.scored_csv(scored))
        records.write_json(
            out / "estimate.json",
            records.estimate_record(estimate, command, {"sample_seed": seed, "circuit_seed": circuit.seed}, circuit, **extra),
        )
    return 0


def cmd_verify(args, command) -> int:
    circuit = _load_circuit(args.circuit)
    try:
        text = Path(args.samples_csv).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read samples file {args.samples_csv}: {exc.strerror or exc}") from None
    samples = records.read_samples_csv(text, circuit.n_qubits)
    estimate = linear_xeb(score_samples(circuit, samples))
    record = records.estimate_record(
        estimate,
        command,
        {"circuit_seed": circuit.seed},
        circuit,
        sampler={"kind": "external", "source": str(args.samples_csv)},
        exact_xeb=exact_xeb(ideal_table(circuit)),
    )
    if args.out:
        records.write_json(args.out, record)
    else:
        sys.stdout.write(records.dumps(record))
    return 0


def cmd_spoof(args, command) -> int:
    if args.coin:
        if args.qubits is None and args.circuit is None:
            raise UsageError("--coin needs --qubits or --circuit")
        n = args.qubits if args.qubits is not None else _load_circuit(args.circuit).n_qubits
        samples = coin_toss_sampler(n, args.samples, args.seed)
    else:
        if args.circuit is None or args.target is None:
            raise UsageError("targeted spoofing needs --circuit and --target (or use --coin)")
        samples = targeted_spoofer(_load_circuit(args.circuit), args.target, args.samples, args.seed, _workers())
    records.write_text(args.out, records.samples_csv(samples))
    return 0


def cmd_pt(args, command) -> int:
    circuit = _load_circuit(args.circuit)
    stats = pt_test(ideal_table(circuit))
    record = {"kind": "pt_stats", **stats.to_dict(), "circuit": records.circuit_info(circuit)}
    record.update(records.provenance(command, {"circuit_seed": circuit.seed}, records.circuit_hash(circuit)))
    records.write_json(args.out, record)
    return 0


def cmd_probe(args, command) -> int:
    report = verification_cost_probe(range(args.n_min, args.n_max + 1), args.cycles, args.repetitions, args.samples, args.seed)
    if args.out_csv:
        records.write_text(args.out_csv, report.csv_text())
    record = {"kind": "cost_probe", **report.to_dict()}
    record.update(records.provenance(command, {"seed": args.seed}, None))
    records.write_json(args.out, record)
    return 0


def cmd_report(args, command) -> int:
    from rcslab.report import build_report

    report = build_report(Path(args.dir), command, exclude=Path(args.out))
    records.write_json(args.out, report)
    return 0


def cmd_suite(args, command) -> int:
    from rcslab.suite import run_suite

    ok = run_suite(Path(args.out), command, quick=args.quick, workers=_workers())
    return 0 if ok or not args.strict else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description="Random circuit sampling and XEB verification at desk scale.")
    parser.add_argument("--max-qubits", type=int, default=None, help="simulator qubit limit (default 26)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random circuit")
    p.add_argument("--qubits", type=int, required=True)
    p.add_argument("--topology", nargs="+", default=["chain"], metavar="KIND", help="chain | grid RxC")
    p.add_argument("--cycles", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--gate", choices=("cz", "fsim"), default="cz")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="sample a circuit (noiseless, Pauli noise or white-noise mix) and score")
    p.add_argument("--config")
    p.add_argument("--circuit")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise", metavar="E1,E2,EM")
    p.add_argument("--mix", type=float)
    p.add_argument("--per-trajectory", dest="per_trajectory", type=int)
    p.add_argument("--score", action="store_true", default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="score an external samples CSV")
    p.add_argument("--circuit", required=True)
    p.add_argument("--samples-csv", dest="samples_csv", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("spoof", help="classically produce samples (coin toss or targeted XEB)")
    p.add_argument("--coin", action="store_true")
    p.add_argument("--qubits", type=int)
    p.add_argument("--circuit")
    p.add_argument("--target", type=float)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spoof)

    p = sub.add_parser("pt", help="Porter-Thomas statistics of a circuit's output distribution")
    p.add_argument("--circuit", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pt)

    p = sub.add_parser("probe", help="measure scoring cost against qubit count (timings vary run to run)")
    p.add_argument("--n-min", dest="n_min", type=int, default=16)
    p.add_argument("--n-max", dest="n_max", type=int, default=24)
    p.add_argument("--cycles", type=int, default=2)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-csv", dest="out_csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("report", help="aggregate results under a directory into one JSON")
    p.add_argument("--dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("suite", help="run the scaled-down experiment suite into a directory")
    p.add_argument("--out", required=True)
    p.add_argument("--quick", action="store_true", help="smaller sample counts (smoke run)")
    p.add_argument("--strict", action="store_true", help="exit 1 if any check fails")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    command = [PROG, *argv]
    previous = None
    if args.max_qubits is not None:
        previous = set_max_qubits(args.max_qubits)
    try:
        return args.func(args, command)
    except CapacityError as exc:
        print(f"{PROG}: capacity error: {exc}", file=sys.stderr)
        return 3
    except (UsageError, ValueError) as exc:
        print(f"{PROG} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    finally:
        if previous is not None:
            set_max_qubits(previous)


if __name__ == "__main__":
    sys.exit(main())
