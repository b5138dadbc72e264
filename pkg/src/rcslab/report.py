"""Aggregate result files under a directory into one JSON report."""

from __future__ import annotations

import json
from pathlib import Path

from rcslab import records

SECTIONS = ("estimates", "pt_stats", "cost_probes", "acceptance")


def _noise_key(rec: dict) -> tuple:
    sampler = rec.get("sampler") or {}
    noise = sampler.get("noise") or {}
    return (
        sampler.get("kind") or "",
        noise.get("e1", -1.0),
        noise.get("e2", -1.0),
        noise.get("em", -1.0),
        sampler.get("mix", -1.0) if sampler.get("mix") is not None else -1.0,
    )


def _estimate_row(rel: str, rec: dict) -> dict:
    circuit = rec.get("circuit") or {}
    return {
        "file": rel,
        "n_qubits": rec.get("n_qubits"),
        "n_samples": rec.get("n_samples"),
        "mean_p": rec.get("mean_p"),
        "f": rec.get("f"),
        "stderr": rec.get("stderr"),
        "cycles": circuit.get("cycles"),
        "topology": circuit.get("topology"),
        "circuit_hash": circuit.get("hash"),
        "sampler": rec.get("sampler"),
        "predicted_f": rec.get("predicted_f"),
        "expected_f": rec.get("expected_f"),
        "exact_xeb": rec.get("exact_xeb"),
    }


def _collect(rec: dict, seeds: set, hashes: set) -> None:
    for v in (rec.get("seeds") or {}).values():
        if isinstance(v, int):
            seeds.add(v)
    h = rec.get("circuit_hash")
    for x in h if isinstance(h, list) else [h]:
        if isinstance(x, str):
            hashes.add(x)


def build_report(directory: Path, command: list[str], exclude: Path | None = None) -> dict:
    """Read every rcslab JSON under ``directory`` (sorted by path) and summarize.

    Unknown or unreadable JSON files are listed under ``skipped``; empty
    sections are listed under ``missing``. Nothing here is fatal.
    """
    directory = Path(directory)
    excluded = exclude.resolve() if exclude is not None else None
    sections: dict[str, list] = {name: [] for name in SECTIONS}
    skipped: list[dict] = []
    seeds: set = set()
    hashes: set = set()
    files = sorted(directory.rglob("*.json")) if directory.is_dir() else []
    for path in files:
        if excluded is not None and path.resolve() == excluded:
            continue
        rel = path.relative_to(directory).as_posix()
        try:
            rec = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            skipped.append({"file": rel, "reason": str(exc)})
            continue
        kind = rec.get("kind") if isinstance(rec, dict) else None
        if kind == "xeb_estimate":
            sections["estimates"].append(_estimate_row(rel, rec))
        elif kind == "pt_stats":
            circuit = rec.get("circuit") or {}
            sections["pt_stats"].append(
                {
                    "file": rel,
                    "ks_distance": rec.get("ks_distance"),
                    "n_points": rec.get("n_points"),
                    "n_qubits": circuit.get("n_qubits"),
                    "cycles": circuit.get("cycles"),
                    "circuit_hash": circuit.get("hash"),
                }
            )
        elif kind == "cost_probe":
            sections["cost_probes"].append({"file": rel, "rows": rec.get("rows"), "extrapolation": rec.get("extrapolation")})
        elif kind == "acceptance":
            sections["acceptance"].append({"file": rel, "checks": rec.get("checks")})
        else:
            skipped.append({"file": rel, "reason": f"unrecognized kind {kind!r}"})
            continue
        _collect(rec, seeds, hashes)

    estimates = sections["estimates"]
    trajectory = [e for e in estimates if (e["sampler"] or {}).get("kind") in ("pauli_trajectories", "white_noise_mix")]
    by_cycles = sorted(trajectory, key=lambda e: (_noise_key({"sampler": e["sampler"]}), e["n_qubits"] or 0, e["topology"] or "", e["cycles"] or 0, e["file"]))
    by_noise = sorted(trajectory, key=lambda e: (e["n_qubits"] or 0, e["topology"] or "", e["cycles"] or 0, _noise_key({"sampler": e["sampler"]}), e["file"]))
    cols = ("file", "n_qubits", "topology", "cycles", "sampler", "f", "stderr", "predicted_f", "expected_f")

    report = {
        "kind": "report",
        "directory_exists": directory.is_dir(),
        **sections,
        "f_vs_cycles": [{k: e[k] for k in cols} for e in by_cycles],
        "f_vs_noise": [{k: e[k] for k in cols} for e in by_noise],
        "missing": [name for name in SECTIONS if not sections[name]],
        "skipped": skipped,
    }
    report.update(records.provenance(command, {f"seed_{i}": s for i, s in enumerate(sorted(seeds))}, sorted(hashes)))
    return report
