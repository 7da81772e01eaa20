"""CSV/JSON writers and the run manifest.

CSV files carry ``#``-prefixed metadata lines followed by a one-line header.
Floats are written with ``repr`` so reruns produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, complex):
        return repr(x)
    return str(x)


def write_csv(path: Path, header, rows, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for key, val in (meta or {}).items():
            fh.write(f"# {key}: {val}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    return path


def read_csv(path: Path) -> tuple[dict, list[str], list[list[str]]]:
    """Inverse of write_csv: (metadata, header, rows as strings)."""
    meta, lines = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = val
        else:
            lines.append(line)
    rows = list(csv.reader(lines))
    return meta, rows[0], rows[1:]


def _default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(path: Path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_default) + "\n")
    return path


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def versions() -> dict:
    import mpmath
    import numba
    import numpy
    import scipy

    from . import __version__
    return {"python": sys.version.split()[0], "platform": platform.platform(),
            "skewlab": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "mpmath": mpmath.__version__}


@dataclass
class RunManifest:
    argv: list[str]
    command: str
    config: dict
    seeds: dict
    threads: int
    versions: dict = field(default_factory=versions)
    wall_seconds: float = 0.0
    outputs: dict = field(default_factory=dict)

    def add_output(self, path: Path):
        path = Path(path)
        self.outputs[path.name] = sha256(path)

    def write(self, out_dir: Path) -> Path:
        return write_json(Path(out_dir) / "manifest.json", asdict(self))

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        data = json.loads(Path(path).read_text())
        return cls(**data)
