"""Figure data files: potential and state columns for the built-in panels.

Each figure is a set of panels, each panel one CSV with columns x, m(x),
v_plus(x) and, where the panel shows states, one column per level.
Output is byte-deterministic: fixed parameter sets, shortest round-trip
float formatting, LF endings, no timestamps.  A PNG rendering of every
figure is written next to the CSVs.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import mass, shapeinv
from .domain import (
    AlgebraicMass,
    Branch,
    Grid,
    HyperbolicMass,
    MassProfile,
    OrderingParams,
    SIParams,
    SpectrumEntry,
)

PLOT_HALF_WIDTH = 6.0
PLOT_POINTS = 1201

# States are normalized on a window padded by this many grid steps per
# side, wide enough that every built-in panel's states decay below the
# flag threshold before the edge.
PAD_POINTS = 4200


@dataclass(frozen=True)
class PanelSpec:
    name: str
    profile: MassProfile
    params: SIParams
    state_levels: tuple[int, ...] = ()
    state_kind: str = ""


def _fig1() -> list[PanelSpec]:
    return [
        PanelSpec(
            name=f"fig1_alpha{a:g}",
            profile=HyperbolicMass(alpha=a, beta=1.0),
            params=SIParams(lam=4.0, k3=4.0, l1=5.0, gamma=1.0),
        )
        for a in (1.2, 2.0, 5.0, 10.0)
    ]


def _fig2() -> list[PanelSpec]:
    return [
        PanelSpec(
            name=f"fig2_beta{b:g}",
            profile=HyperbolicMass(alpha=1.0, beta=b),
            params=SIParams(lam=4.0, k3=4.0, l1=5.0, gamma=1.0),
            state_levels=(0, 1, 2),
            state_kind="psi",
        )
        for b in (0.9, 0.001)
    ]


def _fig3() -> list[PanelSpec]:
    return [
        PanelSpec(
            name=f"fig3_lambda{lam:g}",
            profile=HyperbolicMass(alpha=2.0, beta=1.0),
            params=SIParams(lam=lam, k3=4.0, l1=5.0, gamma=1.0),
            state_levels=(0, 1, 2),
            state_kind="prob",
        )
        for lam in (4.0, 6.0)
    ]


def _fig4() -> list[PanelSpec]:
    return [
        PanelSpec(
            name=f"fig4_alpha{a:g}",
            profile=AlgebraicMass(alpha=a),
            params=SIParams(lam=4.0, k3=4.0, l1=5.0, gamma=1.0),
        )
        for a in (0.3, 0.6, 1.0, 10.0)
    ]


def _fig5() -> list[PanelSpec]:
    return [
        PanelSpec(
            name="fig5",
            profile=AlgebraicMass(alpha=2.0),
            params=SIParams(lam=2.0, k3=4.0, l1=5.0, gamma=1.0),
            state_levels=(1, 2, 3),
            state_kind="prob",
        )
    ]


FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5")


def panels_for(figure_id: str) -> list[PanelSpec]:
    builders = {
        "fig1": _fig1,
        "fig2": _fig2,
        "fig3": _fig3,
        "fig4": _fig4,
        "fig5": _fig5,
    }
    if figure_id not in builders:
        raise ValueError(f"unknown figure id {figure_id!r}")
    return builders[figure_id]()


def default_plot_grid() -> Grid:
    return Grid.symmetric(PLOT_HALF_WIDTH, PLOT_POINTS)


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    """Write columns as CSV with shortest round-trip float formatting."""
    rows = len(columns[0])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(rows):
            fh.write(",".join(repr(float(col[i])) for col in columns) + "\n")


def _wide_grid(plot: Grid) -> tuple[Grid, slice]:
    wide = Grid(plot.x0 - PAD_POINTS * plot.h, plot.h, plot.n + 2 * PAD_POINTS)
    return wide, slice(PAD_POINTS, PAD_POINTS + plot.n)


def _state_entry(model: shapeinv.SIModel, entry: SpectrumEntry) -> SpectrumEntry:
    # Boundary-regime states above the deleted band are rebuilt on the
    # other branch, whose seed is smooth at the node.
    if (
        model.regime is shapeinv.Regime.BOUNDARY
        and model.kappa is not None
        and entry.branch is Branch.J2
        and entry.ladder_power >= model.kappa
    ):
        return boundary_swap(model, entry)
    return entry


def boundary_swap(model: shapeinv.SIModel, entry: SpectrumEntry) -> SpectrumEntry:
    """Equivalent representation of a boundary-regime state on the other branch."""
    if model.regime is not shapeinv.Regime.BOUNDARY or model.kappa is None:
        raise ValueError("model is not in the boundary regime")
    if entry.branch is not Branch.J2 or entry.ladder_power < model.kappa:
        raise ValueError("entry lies in the deleted band")
    return SpectrumEntry(
        n=entry.n,
        energy=entry.energy,
        branch=Branch.J1,
        ladder_power=entry.ladder_power - model.kappa,
        regular=entry.regular,
    )


@dataclass(frozen=True, eq=False)
class PanelData:
    name: str
    header: list[str]
    columns: list[np.ndarray]
    energies: list[float]


def _build_panel(
    panel: PanelSpec,
    plot: Grid,
    ordering: OrderingParams | None = None,
    shift_epsilon: float = 0.0,
) -> PanelData:
    model = shapeinv.build_model(panel.profile, panel.params, plot)
    x = plot.x
    m = mass.evaluate(panel.profile, x).m
    header = ["x", "m", "v_plus"]
    columns: list[np.ndarray] = [x, m, model.v_si.values + shift_epsilon]
    if ordering is not None:
        header.append("v_em")
        rho = mass.pseudo_potential(panel.profile, ordering, x)
        columns.append(columns[2] - rho)
    energies: list[float] = []
    if panel.state_levels:
        wide, window = _wide_grid(plot)
        entries = shapeinv.spectrum(model, max(panel.state_levels))
        for n in panel.state_levels:
            entry = _state_entry(model, entries[n])
            state = shapeinv.closed_form_state(model, entry, wide)
            vals = state.values[window]
            if panel.state_kind == "prob":
                header.append(f"prob_{n}")
                columns.append(vals * vals)
            else:
                header.append(f"psi_{n}")
                columns.append(vals.copy())
            energies.append(entries[n].energy + shift_epsilon)
    return PanelData(name=panel.name, header=header, columns=columns, energies=energies)


def _max_workers() -> int:
    env = os.environ.get("SSUSY_EM_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def _render_png(figure_id: str, panels: list[PanelData], out_dir: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(
        1, len(panels), figsize=(4.2 * len(panels), 3.4), squeeze=False
    )
    for ax, panel in zip(axes[0], panels):
        x = panel.columns[0]
        ax.plot(x, panel.columns[2], color="black", lw=1.2, label="v_plus")
        states = [
            (name, col)
            for name, col in zip(panel.header, panel.columns)
            if name.startswith(("psi_", "prob_"))
        ]
        for (name, col), energy in zip(states, panel.energies):
            ax.plot(x, energy + 3.0 * col, lw=0.9, label=name)
            ax.axhline(energy, color="gray", lw=0.4, ls=":")
        v = panel.columns[2]
        finite = v[np.isfinite(v)]
        top = max(panel.energies) + 6.0 if panel.energies else float(np.percentile(finite, 95))
        ax.set_ylim(float(np.min(finite)) - 2.0, top)
        ax.set_xlabel("x")
        ax.set_title(panel.name)
        ax.legend(fontsize=6)
    fig.tight_layout()
    path = out_dir / f"{figure_id}.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_figure(
    figure_id: str,
    out_dir: Path | str,
    plot_grid: Grid | None = None,
    profile: MassProfile | None = None,
    params: SIParams | None = None,
    ordering: OrderingParams | None = None,
    shift_epsilon: float = 0.0,
) -> list[Path]:
    """Write the CSV panels and the PNG for one figure id.

    Passing ``profile`` and ``params`` replaces the built-in panel set
    with a single custom panel using the same column layout as the
    figure's first panel.  An ordering adds a converted local-potential
    column; the shift is added to every potential column and energy.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plot = plot_grid or default_plot_grid()
    specs = panels_for(figure_id)
    if profile is not None and params is not None:
        first = specs[0]
        specs = [
            PanelSpec(
                name=f"{figure_id}_custom",
                profile=profile,
                params=params,
                state_levels=first.state_levels,
                state_kind=first.state_kind,
            )
        ]
    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        panels = list(
            pool.map(lambda p: _build_panel(p, plot, ordering, shift_epsilon), specs)
        )
    written: list[Path] = []
    for panel in panels:
        path = out / f"{panel.name}.csv"
        write_csv(path, panel.header, panel.columns)
        written.append(path)
    written.append(_render_png(figure_id, panels, out))
    return written
