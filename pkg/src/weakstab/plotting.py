"""Figure rendering: the Cherry asymptotic motion and the unbounded variation-like orbit.

Figures are written as SVG with a fixed hash salt and no date stamp, so the
same inputs produce byte-identical files. Each figure gets a CSV sidecar with
the plotted data in the trajectory format.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from weakstab.core import catalog_build
from weakstab.integrate import IntegratorConfig, Trajectory, integrate
from weakstab.probe import cherry_motion, witness_state

COORD_NAMES = ("q1", "q2", "p1", "p2")
SVG_RC = {"svg.hashsalt": "weakstab", "svg.fonttype": "path", "path.simplify": False}


def parse_coords(text: str) -> tuple[int, int]:
    names = [c.strip() for c in text.split(",")]
    if len(names) != 2 or any(c not in COORD_NAMES for c in names) or names[0] == names[1]:
        raise ValueError(f"coords must be two distinct names from {COORD_NAMES}, got {text!r}")
    return COORD_NAMES.index(names[0]), COORD_NAMES.index(names[1])


def cherry_curve(sigma: float, t0: float, t1: float, samples: int = 4000) -> Trajectory:
    """The closed-form asymptotic motion sampled on ``[t0, t1]`` (``t0 < t1 < 0``)."""
    if not t0 < t1 < 0:
        raise ValueError("need t0 < t1 < 0 for the Cherry asymptotic motion")
    sys = catalog_build("cherry", {"sigma": sigma})
    motion = cherry_motion(sigma)
    times = np.linspace(t0, t1, samples)
    states = np.array([motion.state(t) for t in times])
    energies = np.array([sys.hamiltonian(x) for x in states])
    return Trajectory(times, states, energies)


def variation_run(sigma: float, t_max: float, h: float = 1e-2) -> Trajectory:
    """Orbit of ``p1 p2 + q1 q2 + sigma q1^2 q2`` from the default witness state."""
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    sys = catalog_build("variation_like", {"sigma": sigma})
    return integrate(sys, witness_state(sys), 0.0, t_max, IntegratorConfig(h=h))


def _save_svg(fig: Figure, path: Path) -> None:
    FigureCanvasSVG(fig)
    fig.savefig(path, format="svg", metadata={"Date": None})


def render_projection(x, y, xlabel: str, ylabel: str, title: str, path, *, mark_start: bool = True) -> Path:
    path = Path(path)
    with matplotlib.rc_context(SVG_RC):
        fig = Figure(figsize=(6.0, 5.0))
        ax = fig.add_subplot(1, 1, 1)
        ax.plot(x, y, lw=0.8, color="k")
        if mark_start:
            ax.plot([x[0]], [y[0]], "o", ms=3, color="tab:red")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        fig.tight_layout()
        _save_svg(fig, path)
    return path


def _write_sidecar(tr: Trajectory, svg_path: Path) -> Path:
    csv_path = svg_path.with_suffix(".csv")
    csv_path.write_text(tr.to_csv())
    return csv_path


def plot_cherry_asymptotic(path, sigma: float = 1.0, t0: float = -60.0, t1: float = -1.0,
                           coords: str = "q1,q2") -> dict:
    i, j = parse_coords(coords)
    tr = cherry_curve(sigma, t0, t1)
    path = Path(path)
    render_projection(tr.states[:, i], tr.states[:, j], COORD_NAMES[i], COORD_NAMES[j],
                      f"Asymptotic motion, Cherry Hamiltonian (sigma={sigma:g})", path)
    csv_path = _write_sidecar(tr, path)
    radius = tr.norms()
    return {
        "figure": "cherry-asymptotic",
        "svg": str(path),
        "csv": str(csv_path),
        "coords": [COORD_NAMES[i], COORD_NAMES[j]],
        "t0": t0,
        "t1": t1,
        "radius_first": float(radius[0]),
        "radius_last": float(radius[-1]),
        "radius_monotone": bool(np.all(np.diff(radius) > 0)),
    }


def plot_variation_unbounded(path, sigma: float = 1.0, t_max: float = 200.0, h: float = 1e-2) -> dict:
    tr = variation_run(sigma, t_max, h)
    path = Path(path)
    q1, q2 = tr.states[:, 0], tr.states[:, 1]
    render_projection(q1, q2, "q1", "q2",
                      f"Unbounded orbit, H = p1 p2 + q1 q2 + {sigma:g} q1^2 q2", path)
    csv_path = _write_sidecar(tr, path)
    transverse = tr.norms((1, 2))
    return {
        "figure": "variation-unbounded",
        "svg": str(path),
        "csv": str(csv_path),
        "initial": tr.states[0].tolist(),
        "t_max": t_max,
        "q1_extent": float(np.ptp(q1)),
        "q2_extent": float(np.ptp(q2)),
        "transverse_growth": float(transverse.max() / transverse[0]),
        "subsystem_max": float(np.max(np.abs(tr.states[:, [0, 3]]))),
    }
