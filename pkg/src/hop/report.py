"""Figures rendered from run logs, written next to the delimited output.

Everything goes through the Agg backend so reports work headless.  The
parsers only rely on the log header line, so columns can move around as
long as their names stay put.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import InvalidArgumentError

# joints worth a panel each in the default report
_REPORT_JOINTS = ("l_hip_pitch", "l_knee_pitch", "l_ankle_pitch", "l_shoulder_pitch")


def parse_log(text: str) -> Dict[str, np.ndarray]:
    """Columns of a run log keyed by header name; comment lines skipped."""
    rows = []
    header = None
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise InvalidArgumentError(
                f"row has {len(cells)} cells, header has {len(header)}"
            )
        rows.append([float(c) for c in cells])
    if header is None or not rows:
        raise InvalidArgumentError("log has no data rows")
    data = np.array(rows)
    return {name: data[:, i] for i, name in enumerate(header)}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def write_attitude_figure(columns: Dict[str, np.ndarray], path: Path) -> Path:
    t = columns["t"]
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    for ax, axis_name in zip(axes, ("pitch", "roll")):
        ax.plot(t, np.degrees(columns[f"truth_{axis_name}"]), label="truth", lw=1.2)
        ax.plot(t, np.degrees(columns[f"est_{axis_name}"]), label="estimate", lw=1.0)
        ax.set_ylabel(f"{axis_name} [deg]")
        ax.grid(True, alpha=0.3)
    axes[0].legend(loc="upper right")
    axes[1].set_xlabel("time [s]")
    fig.suptitle("attitude: truth vs estimate")
    fig.tight_layout()
    return _save(fig, path)


def write_joint_figure(columns: Dict[str, np.ndarray], path: Path) -> Path:
    t = columns["t"]
    joints = [j for j in _REPORT_JOINTS if f"target_{j}" in columns]
    if not joints:
        raise InvalidArgumentError("log carries no joint columns")
    fig, axes = plt.subplots(len(joints), 1, sharex=True, figsize=(8, 2.2 * len(joints)))
    if len(joints) == 1:
        axes = [axes]
    for ax, joint in zip(axes, joints):
        ax.plot(t, columns[f"target_{joint}"], label="target", lw=1.2)
        ax.plot(t, columns[f"actual_{joint}"], label="actual", lw=1.0)
        ax.set_ylabel(joint, fontsize=8)
        ax.grid(True, alpha=0.3)
    axes[0].legend(loc="upper right")
    axes[-1].set_xlabel("time [s]")
    fig.suptitle("joint tracking")
    fig.tight_layout()
    return _save(fig, path)


def write_run_report(log_text: str, out_dir, stem: str) -> List[Path]:
    """Render the standard figures for a run log; returns the files written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    columns = parse_log(log_text)
    written = [
        write_attitude_figure(columns, out_dir / f"{stem}_attitude.png"),
        write_joint_figure(columns, out_dir / f"{stem}_joints.png"),
    ]
    return written


def write_replay_report(rows, out_dir, stem: str) -> List[Path]:
    """Pitch/roll estimate figure for a filter replay; rows = (t, FusedAngles)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t = np.array([r[0] for r in rows])
    pitch = np.array([r[1].fused_pitch for r in rows])
    roll = np.array([r[1].fused_roll for r in rows])
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.plot(t, np.degrees(pitch), label="pitch")
    ax.plot(t, np.degrees(roll), label="roll")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("angle [deg]")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right")
    fig.suptitle("replayed attitude estimate")
    fig.tight_layout()
    return [_save(fig, out_dir / f"{stem}_attitude.png")]
