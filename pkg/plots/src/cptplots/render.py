"""Render cptsim CSV/JSON artifacts into figures.

Strictly a read-only consumer of the simulator's files: no physics beyond
axis arithmetic happens here.  Every renderer validates its input against
the simulator's documented column set before drawing and writes both a PNG
and an SVG next to the requested output path.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

ATOM_COLUMNS = [
    "t", "p_gminus", "p_g0", "p_gplus", "p_eminus", "p_e0", "p_eplus",
    "p_sink", "fid_target", "theta_inst",
]
PAIR_COLUMNS = ["t", "p00", "p01", "p10", "p11", "re_c01_10", "im_c01_10", "phase_accum"]

FIGURE_KINDS = ("populations", "theta_ramp", "level_diagram", "phase")

POPULATION_LABELS = {
    "p_gminus": "g-", "p_g0": "g0", "p_gplus": "g+",
    "p_eminus": "e-", "p_e0": "e0", "p_eplus": "e+", "p_sink": "sink",
}


class SpecError(ValueError):
    """Plot spec or input file fails validation."""


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    input_path: Path
    output_path: Path
    style: dict = field(default_factory=dict)
    reproducible: bool = True

    @staticmethod
    def from_file(path: str | Path) -> "PlotSpec":
        raw = json.loads(Path(path).read_text())
        if not isinstance(raw, dict):
            raise SpecError("plot spec must be a JSON object")
        unknown = set(raw) - {"kind", "input", "output", "style", "reproducible"}
        if unknown:
            raise SpecError(f"unknown spec key {sorted(unknown)[0]!r}")
        for key in ("kind", "input", "output"):
            if key not in raw:
                raise SpecError(f"missing spec key {key!r}")
        if raw["kind"] not in FIGURE_KINDS:
            raise SpecError(
                f"unknown figure kind {raw['kind']!r}; choose from {FIGURE_KINDS}"
            )
        style = raw.get("style", {})
        if not isinstance(style, dict):
            raise SpecError("'style' must be a JSON object")
        return PlotSpec(
            kind=raw["kind"],
            input_path=Path(raw["input"]),
            output_path=Path(raw["output"]),
            style=style,
            reproducible=bool(raw.get("reproducible", True)),
        )


def read_timeseries(path: Path, expected_columns: list[str]) -> dict[str, np.ndarray]:
    """Load a simulator CSV and check its header column by column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SpecError(f"{path} is empty") from None
        rows = [row for row in reader if row]
    for column in expected_columns:
        if column not in header:
            raise SpecError(f"{path} is missing required column {column!r}")
    extra = [c for c in header if c not in expected_columns]
    if extra:
        raise SpecError(f"{path} has unexpected column {extra[0]!r}")
    data = np.array([[float(v) for v in row] for row in rows])
    if data.size == 0:
        raise SpecError(f"{path} has no data rows")
    return {name: data[:, k] for k, name in enumerate(header)}


def check_population_sums(columns: dict[str, np.ndarray], tol: float = 1e-9) -> float:
    """The seven level populations must sum to one at every abscissa."""
    total = sum(columns[name] for name in POPULATION_LABELS)
    worst = float(np.max(np.abs(total - 1.0)))
    if worst > tol:
        k = int(np.argmax(np.abs(total - 1.0)))
        raise SpecError(
            f"population rows do not sum to 1: worst deviation {worst:.3e} "
            f"at t = {columns['t'][k]:.6g}"
        )
    return worst


def _new_figure(style: dict):
    figsize = style.get("figsize", [7.0, 4.2])
    return plt.subplots(figsize=tuple(figsize), dpi=style.get("dpi", 120))


def _render_populations(spec: PlotSpec):
    columns = read_timeseries(spec.input_path, ATOM_COLUMNS)
    check_population_sums(columns)
    fig, ax = _new_figure(spec.style)
    for name, label in POPULATION_LABELS.items():
        ax.plot(columns["t"], columns[name], label=label, linewidth=1.2)
    ax.plot(columns["t"], columns["fid_target"], "k--", label="target fidelity",
            linewidth=1.0)
    ax.set_xlabel("time (model units)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(ncol=4, fontsize=8, loc="center right")
    ax.set_title(spec.style.get("title", "level populations"))
    return fig


def _render_theta_ramp(spec: PlotSpec):
    columns = read_timeseries(spec.input_path, ATOM_COLUMNS)
    fig, ax = _new_figure(spec.style)
    ax.plot(columns["t"], columns["theta_inst"], color="tab:purple")
    ax.set_xlabel("time (model units)")
    ax.set_ylabel("mixing angle (rad)")
    ax.set_yticks([0, math.pi / 2, math.pi])
    ax.set_yticklabels(["0", "pi/2", "pi"])
    ax.set_title(spec.style.get("title", "drive mixing angle along the ramp"))
    return fig


def _read_pair_summary(path: Path) -> tuple[float, float]:
    summary = json.loads(Path(path).read_text())
    for key in ("inputs",):
        if key not in summary:
            raise SpecError(f"{path} is missing required key {key!r}")
    params = summary["inputs"].get("params", {})
    if "omega_larmor" not in params:
        raise SpecError(f"{path} is missing required key 'omega_larmor'")
    if "omega_dd" not in params:
        raise SpecError(f"{path} is missing required key 'omega_dd'")
    return float(params["omega_larmor"]), float(params["omega_dd"])


def _render_level_diagram(spec: PlotSpec):
    """Two-panel pair-level diagram, bare versus dipole-shifted, with the
    doubled shift annotated and the rf-dark combination marked."""
    omega, shift = _read_pair_summary(spec.input_path)
    fig, (left, right) = plt.subplots(
        1, 2, figsize=tuple(spec.style.get("figsize", [7.5, 4.6])),
        dpi=spec.style.get("dpi", 120), sharey=True,
    )

    def level(ax, y, x0, x1, label, color="k", dashed=False):
        ax.hlines(y, x0, x1, color=color, linestyle="--" if dashed else "-",
                  linewidth=1.6)
        ax.text(x1 + 0.03, y, label, va="center", fontsize=9)

    level(left, 0.0, 0.1, 0.7, "|00>")
    level(left, omega, 0.1, 0.7, "|01>, |10>")
    level(left, 2 * omega, 0.1, 0.7, "|11>")
    left.set_title("bare pair")

    level(right, 0.0, 0.1, 0.7, "|00>")
    level(right, omega, 0.1, 0.7, "(|01>-|10>)/sqrt2   rf-dark", color="tab:red")
    level(right, omega, 0.1, 0.7, "", dashed=True)
    level(right, omega + 2 * shift, 0.1, 0.7, "(|01>+|10>)/sqrt2",
          color="tab:blue")
    level(right, 2 * omega, 0.1, 0.7, "|11>")
    right.annotate(
        "", xy=(0.85, omega + 2 * shift), xytext=(0.85, omega),
        arrowprops=dict(arrowstyle="<->", color="tab:blue"),
    )
    right.text(0.88, omega + shift, "2*coupling", fontsize=9, color="tab:blue",
               va="center")
    right.set_title("with dipole coupling")

    for ax in (left, right):
        ax.set_xlim(0, 1.6)
        ax.set_xticks([])
    left.set_ylabel("energy (model units)")
    fig.suptitle(spec.style.get("title", "pair energy levels"))
    return fig


def _render_phase(spec: PlotSpec):
    columns = read_timeseries(spec.input_path, PAIR_COLUMNS)
    fig, ax = _new_figure(spec.style)
    ax.plot(columns["t"], columns["phase_accum"], color="tab:green")
    ax.axhline(math.pi, color="gray", linestyle=":", linewidth=1.0)
    ax.text(columns["t"][0], math.pi, " pi", va="bottom", fontsize=9, color="gray")
    terminal = columns["phase_accum"][-1]
    ax.plot([columns["t"][-1]], [terminal], "o", color="tab:green")
    ax.annotate(
        f"{terminal:.6f} rad",
        xy=(columns["t"][-1], terminal),
        xytext=(-80, -15), textcoords="offset points", fontsize=9,
    )
    ax.set_xlabel("time (model units)")
    ax.set_ylabel("accumulated phase (rad)")
    ax.set_title(spec.style.get("title", "phase accumulation"))
    return fig


_RENDERERS = {
    "populations": _render_populations,
    "theta_ramp": _render_theta_ramp,
    "level_diagram": _render_level_diagram,
    "phase": _render_phase,
}


def render(spec: PlotSpec) -> list[Path]:
    """Draw the figure and write <output>.png and <output>.svg.

    In reproducible mode the embedded SVG ids are salted deterministically
    and date/software metadata is suppressed.
    """
    if spec.kind not in _RENDERERS:
        raise SpecError(f"unknown figure kind {spec.kind!r}")
    if spec.reproducible:
        plt.rcParams["svg.hashsalt"] = "cptsim-plots"
    fig = _RENDERERS[spec.kind](spec)
    spec.output_path.parent.mkdir(parents=True, exist_ok=True)
    written = []
    base = spec.output_path
    if base.suffix in (".png", ".svg"):
        base = base.with_suffix("")
    png = base.with_suffix(".png")
    svg = base.with_suffix(".svg")
    metadata_png = {"Software": None} if spec.reproducible else None
    metadata_svg = {"Date": None} if spec.reproducible else None
    fig.savefig(png, format="png", metadata=metadata_png)
    fig.savefig(svg, format="svg", metadata=metadata_svg)
    plt.close(fig)
    written.extend([png, svg])
    return written
