"""Plain-text artifact formats.

Floats are written with ``repr`` (shortest string that parses back to the
same double), so every file round-trips exactly.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import os
from dataclasses import asdict, is_dataclass

import numpy as np

from .sampler import LatentSample


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _rows(M) -> list[str]:
    if np.issubdtype(M.dtype, np.integer):
        return [" ".join(str(int(v)) for v in row) for row in M]
    return [" ".join(repr(float(v)) for v in row) for row in M]


def write_matrix(path, M) -> None:
    """First line n, then n rows of n space-separated entries."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("only square matrices are stored")
    with open(path, "w") as fh:
        fh.write(f"{M.shape[0]}\n")
        for line in _rows(M):
            fh.write(line + "\n")


def read_matrix(path, dtype=float) -> np.ndarray:
    with open(path) as fh:
        head = fh.readline().strip()
        try:
            n = int(head)
        except ValueError:
            raise ValueError(f"{path}: first line must be the matrix size, got {head!r}") from None
        rows = [line.split() for line in fh if line.strip()]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"{path}: expected {n} rows of {n} entries")
    return np.array([[dtype(v) for v in r] for r in rows])


def write_latents(path, xi: LatentSample) -> None:
    with open(path, "w") as fh:
        fh.write(f"# seed={xi.seed} stream={xi.stream}\n")
        for v in xi.xi:
            fh.write(repr(float(v)) + "\n")


def read_latents(path) -> LatentSample:
    seed = stream = None
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    if key in ("seed", "stream") and val not in ("", "None"):
                        if key == "seed":
                            seed = int(val)
                        else:
                            stream = int(val)
            elif line:
                vals.append(float(line))
    return LatentSample(np.array(vals), seed=seed, stream=stream)


def write_frames(path, frames) -> None:
    """Header ``frames SIZE M K`` then one m x k block per frame, blank-line separated."""
    F = np.asarray(frames, dtype=float)
    size, m, k = F.shape
    with open(path, "w") as fh:
        fh.write(f"frames {size} {m} {k}\n")
        for V in F:
            fh.write("\n")
            for row in V:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_frames(path) -> np.ndarray:
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 4 or head[0] != "frames":
            raise ValueError(f"{path}: missing 'frames SIZE M K' header")
        size, m, k = (int(v) for v in head[1:])
        vals = [float(v) for line in fh for v in line.split()]
    if len(vals) != size * m * k:
        raise ValueError(f"{path}: expected {size * m * k} entries, found {len(vals)}")
    return np.array(vals).reshape(size, m, k)


def _plain(obj):
    if is_dataclass(obj):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_plain(obj), fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_manifest(out_dir, command: str, config: dict, seed: int, version: str,
                   complete: bool, artifacts=()) -> str:
    """Manifest JSON; the timestamp is the only varying field and sits on its own line."""
    path = os.path.join(out_dir, "manifest.json")
    doc = {"command": command, "config": config, "seed": seed, "code_version": version,
           "complete": complete, "artifacts": sorted(artifacts),
           "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}
    write_json(path, doc)
    return path
