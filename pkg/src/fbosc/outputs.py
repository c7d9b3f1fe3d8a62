"""CSV and binary output with run manifests."""

from __future__ import annotations

import hashlib
import json
import struct
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

CONVENTION = ("symmetrized double-sided spectra; vacuum = 1/2 per quadrature; "
              "Fourier kernel exp(+i Omega t)")
BINARY_MAGIC = b"FBOSCTS1"


@dataclass
class RunManifest:
    """Provenance of one CLI invocation.

    The hash covers configuration, command, parameters, seed and tool
    version, but not output paths or ``wall_time``, so repeating a run
    reproduces it.
    """

    config_hash: str
    command: str
    parameters: dict
    seed: int | None = None
    outputs: list[str] = field(default_factory=list)
    tool_version: str = __version__
    wall_time: float = 0.0

    @property
    def hash(self) -> str:
        d = asdict(self)
        d.pop("wall_time")
        d.pop("outputs")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def write(self, path: str | Path) -> None:
        d = asdict(self)
        d["hash"] = self.hash
        with open(path, "w") as fh:
            json.dump(d, fh, indent=2, default=str)
            fh.write("\n")


def write_csv(path: str | Path, columns: list[str], data, manifest: RunManifest,
              units: str, notes: list[str] | None = None, timestamp: bool = True) -> None:
    """Write ``data`` (sequence of equal-length columns) with a ``#`` header.

    The header records tool version, manifest hash, column units and the
    spectral convention; a trailing timestamp line is the only part that
    changes between identical runs.
    """
    cols = [np.asarray(c) for c in data]
    lines = [
        f"# fbosc {manifest.tool_version}",
        f"# manifest {manifest.hash} config {manifest.config_hash} command {manifest.command}",
        f"# units: {units}",
        f"# convention: {CONVENTION}",
    ]
    lines += [f"# {n}" for n in notes or []]
    if timestamp:
        lines.append(f"# generated {time.strftime('%Y-%m-%dT%H:%M:%S%z')}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray, list[str]]:
    """Return ``(columns, data, comments)`` of a file written by :func:`write_csv`."""
    comments, rows, cols = [], [], None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                comments.append(line)
            elif cols is None:
                cols = line.split(",")
            elif line:
                rows.append([float(x) for x in line.split(",")])
    return cols or [], np.array(rows), comments


def write_binary(path: str | Path, dt: float, q=None, p=None) -> None:
    """Time-series dump: magic, uint8 presence flags (q=1, p=2), uint64 length,
    float64 dt, then the present quadratures as little-endian float64."""
    n = len(q) if q is not None else len(p)
    flags = (1 if q is not None else 0) | (2 if p is not None else 0)
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<BQd", flags, n, dt))
        for x in (q, p):
            if x is not None:
                fh.write(np.asarray(x, dtype="<f8").tobytes())


def read_binary(path: str | Path) -> tuple[float, np.ndarray | None, np.ndarray | None]:
    with open(path, "rb") as fh:
        if fh.read(8) != BINARY_MAGIC:
            raise ValueError("not an fbosc time-series file")
        flags, n, dt = struct.unpack("<BQd", fh.read(struct.calcsize("<BQd")))
        q = np.frombuffer(fh.read(8 * n), dtype="<f8") if flags & 1 else None
        p = np.frombuffer(fh.read(8 * n), dtype="<f8") if flags & 2 else None
    return dt, q, p
