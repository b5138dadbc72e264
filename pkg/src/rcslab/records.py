"""On-disk formats: sample CSVs, scored CSVs and JSON records.

CSV headers are fixed:

* samples: ``bitstring_hex,group`` (``group`` empty when samples are independent)
* scored samples: ``bitstring_hex,ideal_p``
* cost probe: ``n,median_seconds,bytes,ratio_vs_prev``

Bitstrings are lower-case hex without prefix, zero-padded to ``ceil(n/4)``
digits; qubit 0 is the least-significant bit. Probabilities are written
with 17 significant digits. JSON is written with sorted keys and a
trailing newline so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from rcslab import __version__
from rcslab.circuits import Circuit, serialize
from rcslab.xeb import SampleSet, ScoredSamples, XebEstimate

SAMPLES_HEADER = ("bitstring_hex", "group")
SCORED_HEADER = ("bitstring_hex", "ideal_p")


class RowError(ValueError):
    """Bad data row in a CSV file; ``row`` counts data rows from 1."""

    def __init__(self, row: int, reason: str):
        self.row = row
        super().__init__(f"row {row}: {reason}")


def hex_width(n_qubits: int) -> int:
    return max(1, -(-n_qubits // 4))


def samples_csv(samples: SampleSet) -> str:
    w = hex_width(samples.n_qubits)
    lines = [",".join(SAMPLES_HEADER)]
    if samples.groups is None:
        lines += [f"{b:0{w}x}," for b in samples.bitstrings.tolist()]
    else:
        lines += [f"{b:0{w}x},{g}" for b, g in zip(samples.bitstrings.tolist(), samples.groups.tolist())]
    return "\n".join(lines) + "\n"


def read_samples_csv(text: str, n_qubits: int) -> SampleSet:
    """Parse a samples CSV for an ``n_qubits`` circuit.

    Only ``bitstring_hex`` is required; ``group`` is used when every row
    has one. Scored CSVs are accepted too (``ideal_p`` is ignored).
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ValueError("empty samples file") from None
    if "bitstring_hex" not in header:
        raise ValueError("samples file needs a 'bitstring_hex' column")
    col = header.index("bitstring_hex")
    gcol = header.index("group") if "group" in header else None
    bits, groups = [], []
    limit = 1 << n_qubits
    for row, fields in enumerate(reader, start=1):
        if not fields:
            continue
        try:
            b = int(fields[col], 16)
        except (ValueError, IndexError):
            raise RowError(row, f"bad bitstring {fields[col] if col < len(fields) else ''!r}") from None
        if not 0 <= b < limit:
            raise RowError(row, f"bitstring {fields[col]} out of range for {n_qubits} qubits")
        bits.append(b)
        if gcol is not None and gcol < len(fields) and fields[gcol].strip():
            try:
                groups.append(int(fields[gcol]))
            except ValueError:
                raise RowError(row, f"bad group {fields[gcol]!r}") from None
    use_groups = gcol is not None and bits and len(groups) == len(bits)
    return SampleSet(n_qubits, np.array(bits, dtype=np.int64), np.array(groups) if use_groups else None)


def scored_csv(scored: ScoredSamples) -> str:
    w = hex_width(scored.n_qubits)
    lines = [",".join(SCORED_HEADER)]
    lines += [f"{b:0{w}x},{p:.17g}" for b, p in zip(scored.samples.bitstrings.tolist(), scored.ideal_p.tolist())]
    return "\n".join(lines) + "\n"


def circuit_hash(circuit: Circuit) -> str:
    return "sha256:" + hashlib.sha256(serialize(circuit).encode()).hexdigest()


def circuit_info(circuit: Circuit) -> dict:
    return {
        "hash": circuit_hash(circuit),
        "n_qubits": circuit.n_qubits,
        "topology": None if circuit.topology is None else circuit.topology.describe(),
        "cycles": circuit.cycles,
        "seed": circuit.seed,
        "depth": circuit.depth,
    }


def provenance(command: list[str], seeds: dict, circuit_hashes) -> dict:
    """Fields every output JSON carries so a run can be reproduced."""
    return {
        "tool": {"name": "rcslab", "version": __version__},
        "command": list(command),
        "seeds": seeds,
        "circuit_hash": circuit_hashes,
    }


def estimate_record(estimate: XebEstimate, command: list[str], seeds: dict, circuit: Circuit, **extra) -> dict:
    """JSON record of an XEB estimate: the estimate fields at top level plus provenance."""
    record = {"kind": "xeb_estimate", **estimate.to_dict(), "n_groups": estimate.n_groups}
    record["circuit"] = circuit_info(circuit)
    record.update(extra)
    record.update(provenance(command, seeds, circuit_hash(circuit)))
    return record


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_json(path, obj) -> None:
    write_text(path, dumps(obj))
