"""Run output: per-step scalars, strided snapshots, physical series, manifest.

All files are plain CSV with LF line endings, ``.`` decimal separator and
full double precision (17 significant digits), so identical runs produce
bitwise-identical bytes.  An accompanying ``manifest.json`` indexes the files
together with the configuration hash and terminal outcome.
"""

from __future__ import annotations

import json
import os

from .coupler import PhysicalTrajectory, Trajectory, back_transform
from .errors import OutputError

PACKAGE_NAME = "biofilmfront"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_text(path: str, lines) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path!r}: {exc}") from None


def scalars_rows(traj: Trajectory):
    """Yield scalars.csv rows (header first), one per accepted step."""
    yield "t,R,v1,energy,picard_iters,residual,flags"
    for r in traj.reports:
        flags = ";".join(sorted(r.invariant_flags))
        residual = r.residual_history[-1] if r.residual_history else 0.0
        yield ",".join([
            _fmt(r.t), _fmt(r.R), _fmt(r.v1), _fmt(r.energy),
            str(r.picard_iterations), _fmt(residual), flags,
        ])


def snapshot_rows(traj: Trajectory, index: int):
    """Yield snapshot CSV rows for stored state ``index``: z, Y*, C*, v."""
    s = traj.states[index]
    n, m = s.Y.shape[0], s.C.shape[0]
    header = ["z"] + [f"Y{i + 1}" for i in range(n)] + [f"C{j + 1}" for j in range(m)] + ["v"]
    yield ",".join(header)
    for k in range(s.grid.N + 1):
        vals = [s.grid.nodes[k]] + [s.Y[i, k] for i in range(n)] \
            + [s.C[j, k] for j in range(m)] + [s.v[k]]
        yield ",".join(_fmt(v) for v in vals)


def physical_rows(phys: PhysicalTrajectory):
    """Yield physical_scalars.csv rows: physical time, thickness, surface speed."""
    yield "t_phys,L,u1"
    for k in range(len(phys.t_phys)):
        yield ",".join([_fmt(phys.t_phys[k]), _fmt(phys.L[k]), _fmt(phys.u1[k])])


def write_timeseries(traj: Trajectory, out_dir: str, config_hash: str | None = None,
                     formats=("csv",)) -> dict:
    """Write the full output set for a run into ``out_dir``.

    Files: ``scalars.csv`` (one row per step), ``snapshot_<k>.csv`` per stored
    state, ``physical_scalars.csv`` (moving-domain series including t = 0) and
    ``manifest.json``.  Returns the manifest dictionary.

    Raises
    ------
    OutputError
        Code ``IO_ERROR`` on any filesystem failure.
    """
    for f in formats:
        if f != "csv":
            raise OutputError(f"unsupported output format {f!r}")
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out_dir!r}: {exc}") from None

    files = []
    _write_text(os.path.join(out_dir, "scalars.csv"), scalars_rows(traj))
    files.append("scalars.csv")

    for idx in range(len(traj.states)):
        name = f"snapshot_{idx}.csv"
        _write_text(os.path.join(out_dir, name), snapshot_rows(traj, idx))
        files.append(name)

    phys = back_transform(traj)
    _write_text(os.path.join(out_dir, "physical_scalars.csv"), physical_rows(phys))
    files.append("physical_scalars.csv")

    manifest = {
        "package": PACKAGE_NAME,
        "config_hash": config_hash,
        "outcome": traj.outcome,
        "n_steps": len(traj.reports),
        "snapshot_steps": list(traj.state_steps),
        "files": files,
    }
    if traj.failure is not None:
        manifest["failure"] = {k: v for k, v in traj.failure.items()
                               if k in ("code", "message", "step", "thickness")}
    path = os.path.join(out_dir, "manifest.json")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path!r}: {exc}") from None
    files.append("manifest.json")
    return manifest
