"""Canonical on-disk formats: trajectory files and result documents.

Trajectories are plain comma-separated text with a commented header, one row
per sample in the fixed column order

    t, px, py, pz, qw, qx, qy, qz, vx, vy, vz, wx, wy, wz

with world-frame velocities, z up, the table at z = 0 and gravity along -z.
Floats are written with 17 significant digits so a save/load round trip is
exact. The loader validates uniform sampling and finiteness and repairs
nothing except quaternion normalization (which it logs).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._version import __version__
from .trajectory import Trajectory

log = logging.getLogger(__name__)

COLUMNS = ("t", "px", "py", "pz", "qw", "qx", "qy", "qz", "vx", "vy", "vz", "wx", "wy", "wz")
FORMAT_TAG = "cubetoss-trajectory-v1"
QUAT_NORM_TOLERANCE = 1e-3
TIME_TOLERANCE = 1e-6


class TrajectoryFileError(ValueError):
    """A trajectory file failed to parse or violated its invariants."""


def save_trajectory(traj: Trajectory, path) -> None:
    path = Path(path)
    lines = [f"# {FORMAT_TAG}", f"# rate_hz: {traj.rate_hz!r}"]
    for key in sorted(traj.meta):
        lines.append(f"# {key}: {traj.meta[key]!r}")
    lines.append("# columns: " + ",".join(COLUMNS))
    times = traj.times
    mat = traj.as_matrix()
    for i in range(len(traj)):
        row = [times[i], *mat[i]]
        lines.append(",".join(f"{x:.17g}" for x in row))
    path.write_text("\n".join(lines) + "\n")


def _parse_meta(value: str):
    value = value.strip()
    if value.startswith("'") and value.endswith("'") and len(value) >= 2:
        return value[1:-1]
    try:
        f = float(value)
        return f
    except ValueError:
        return value


def load_trajectory(path) -> Trajectory:
    """Load a canonical trajectory file, enforcing its invariants.

    Rejects malformed rows, non-finite values and non-uniform timestamps,
    naming the offending row. Quaternions off unit norm by at most 1e-3
    (measurement tolerance) are renormalized and the repair is logged; worse
    deviations are rejected.
    """
    path = Path(path)
    if not path.exists():
        raise TrajectoryFileError(f"{path}: no such file")
    meta: dict = {}
    rows: list[list[float]] = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                meta[key.strip()] = _parse_meta(value)
            continue
        parts = line.split(",")
        if len(parts) != len(COLUMNS):
            raise TrajectoryFileError(f"{path}: row {lineno} has {len(parts)} fields, expected {len(COLUMNS)}")
        try:
            vals = [float(x) for x in parts]
        except ValueError as err:
            raise TrajectoryFileError(f"{path}: row {lineno}: {err}") from None
        if not all(np.isfinite(vals)):
            raise TrajectoryFileError(f"{path}: row {lineno} contains a non-finite value")
        rows.append(vals)
    if not rows:
        raise TrajectoryFileError(f"{path}: no data rows")
    rate = meta.pop("rate_hz", None)
    if rate is None or not (isinstance(rate, float) and rate > 0.0):
        raise TrajectoryFileError(f"{path}: header is missing a positive rate_hz")
    meta.pop("columns", None)

    data = np.array(rows)
    t = data[:, 0]
    dt = 1.0 / rate
    if len(t) > 1:
        steps = np.diff(t)
        bad = np.flatnonzero((steps <= 0.0) | (np.abs(steps - dt) > TIME_TOLERANCE))
        if bad.size:
            raise TrajectoryFileError(
                f"{path}: row {bad[0] + 2}: timestamps are not uniform at {rate} Hz"
            )
    quats = data[:, 4:8]
    norms = np.linalg.norm(quats, axis=1)
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > QUAT_NORM_TOLERANCE:
        row = int(np.argmax(np.abs(norms - 1.0))) + 1
        raise TrajectoryFileError(
            f"{path}: row {row}: quaternion norm deviates from 1 by {worst:.2e} (> {QUAT_NORM_TOLERANCE})"
        )
    if worst > 1e-12:
        quats = quats / norms[:, None]
        log.info("%s: renormalized quaternions (worst deviation %.2e)", path.name, worst)

    return Trajectory(rate, data[:, 1:4], quats, data[:, 8:11], data[:, 11:14], meta)


def import_cube_dataset(directory, side_m: float = 0.1, mass_kg: float = 0.37) -> list[Trajectory]:
    """Load every converted cube-toss file under a directory, sorted by name.

    Each trajectory gets the cube metadata (side length, mass) attached;
    files already carrying a side_m header must agree with it. An empty
    directory produces an empty list with a warning rather than an error.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise TrajectoryFileError(f"{directory}: not a directory")
    paths = sorted(directory.glob("*.csv"))
    if not paths:
        log.warning("%s: no trajectory files found", directory)
        return []
    out = []
    for p in paths:
        traj = load_trajectory(p)
        have = traj.meta.get("side_m")
        if have is not None and abs(float(have) - side_m) > 1e-9:
            raise TrajectoryFileError(f"{p}: side_m {have} conflicts with expected {side_m}")
        traj.meta.setdefault("body", "cube")
        traj.meta["side_m"] = side_m
        traj.meta["mass_kg"] = mass_kg
        out.append(traj)
    return out


@dataclass
class ResultsDocument:
    """Self-describing JSON result of one command, reloadable for later runs.

    config echoes every semantically relevant setting of the run (dataset,
    parameters, seeds, rates); worker count is deliberately excluded since
    results are independent of it.
    """

    command: str
    config: dict
    results: dict
    tool: str = "cubetoss"
    version: str = __version__

    def to_json(self) -> str:
        doc = {
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "config": self.config,
            "results": self.results,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "ResultsDocument":
        doc = json.loads(Path(path).read_text())
        return cls(
            command=doc["command"],
            config=doc["config"],
            results=doc["results"],
            tool=doc.get("tool", "cubetoss"),
            version=doc.get("version", "unknown"),
        )
