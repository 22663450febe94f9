"""Command-line surface: spectrum tables, figure data, verification runs.

Every subcommand is a thin delegation to the library; the only logic
here is config parsing, flag precedence, and exit-code mapping.  Exit
codes: 0 success, 1 verification failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import figures, shapeinv, verify
from .domain import (
    Grid,
    MassProfile,
    OrderingParams,
    SIParams,
    SpectrumEntry,
    SsusyError,
    mass_profile_from_dict,
    ordering_params_from_dict,
    si_params_from_dict,
    spectrum_entry_to_dict,
    validate,
)

DEFAULT_NMAX = 4
DEFAULT_LEVELS = 5
DEFAULT_TOL = 2e-3


class ValidationFailure(SsusyError):
    """Bad config or parameters; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    profile: MassProfile
    params: SIParams
    ordering: OrderingParams | None
    grid_L: float
    grid_N: int
    outputs: tuple[str, ...]
    shift_epsilon: float
    nmax: int | None
    levels: int | None
    tol: float | None
    figure: str | None


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a JSON run config.

    Raises :class:`ValidationFailure` with a message naming the offending
    field for anything malformed or out of range.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationFailure(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"config: invalid JSON: {exc}") from exc

    try:
        profile = mass_profile_from_dict(data["profile"])
    except KeyError as exc:
        raise ValidationFailure(f"profile: missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ValidationFailure(f"profile: {exc}") from exc
    try:
        params = si_params_from_dict(data["params"])
    except KeyError as exc:
        raise ValidationFailure(f"params: missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ValidationFailure(f"params: {exc}") from exc

    ordering = None
    if "ordering" in data:
        try:
            ordering = ordering_params_from_dict(data["ordering"])
        except (TypeError, ValueError) as exc:
            raise ValidationFailure(f"ordering: {exc}") from exc

    grid = data.get("grid", {})
    try:
        grid_L = float(grid.get("L", verify.DEFAULT_L))
        grid_N = int(grid.get("N", verify.DEFAULT_N))
    except (TypeError, ValueError) as exc:
        raise ValidationFailure(f"grid: {exc}") from exc
    if grid_N < 50:
        raise ValidationFailure(f"grid.N: must be at least 50, got {grid_N}")
    if not grid_L > 0:
        raise ValidationFailure(f"grid.L: must be positive, got {grid_L}")

    result = validate(profile, params)
    if not result.ok:
        first = result.violations[0]
        raise ValidationFailure(f"{first.field}: {first.message}")

    return RunConfig(
        profile=profile,
        params=params,
        ordering=ordering,
        grid_L=grid_L,
        grid_N=grid_N,
        outputs=tuple(data.get("outputs", ())),
        shift_epsilon=float(data.get("shift_epsilon", 0.0)),
        nmax=int(data["nmax"]) if "nmax" in data else None,
        levels=int(data["levels"]) if "levels" in data else None,
        tol=float(data["tol"]) if "tol" in data else None,
        figure=data.get("figure"),
    )


def _model_grid(config: RunConfig) -> Grid:
    return Grid.symmetric(config.grid_L, config.grid_N)


def cmd_spectrum(config: RunConfig, n_max: int, out_dir: Path | None = None) -> int:
    """Print the algebraic spectrum table; optionally write it as JSON."""
    model = shapeinv.build_model(config.profile, config.params, _model_grid(config))
    entries = shapeinv.spectrum(model, n_max)
    eps = config.shift_epsilon
    print(f"{'n':>3}  {'energy':>18}  {'branch':>6}  {'power':>5}  {'regular':>7}")
    for e in entries:
        print(
            f"{e.n:>3}  {e.energy + eps:>18.12g}  {e.branch.value:>6}  "
            f"{e.ladder_power:>5}  {'yes' if e.regular else 'no':>7}"
        )
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = []
        for e in entries:
            d = spectrum_entry_to_dict(e)
            d["energy"] = e.energy + eps
            payload.append(d)
        path = out_dir / "spectrum.json"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {path}")
    return 0


def cmd_figure(config: RunConfig | None, figure_id: str, out_dir: Path) -> int:
    """Write the figure's CSV panels (and a PNG rendering) to out_dir."""
    try:
        kwargs = {}
        if config is not None:
            kwargs["profile"] = config.profile
            kwargs["params"] = config.params
            kwargs["ordering"] = config.ordering
            kwargs["shift_epsilon"] = config.shift_epsilon
        paths = figures.render_figure(figure_id, out_dir, **kwargs)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(f"wrote {p}")
    return 0


def _oracle_inputs(
    config: RunConfig, model: shapeinv.SIModel
) -> verify.Discretization:
    profile, params = config.profile, config.params
    L, N = config.grid_L, config.grid_N
    report = model.singularity
    node = report.node
    one_sided = (
        node is not None
        and not params.tied
        and -L < node < L
    )
    if one_sided and not report.admissible:
        raise ValidationFailure(
            f"params: singularity strength {report.strength!r} is outside the "
            "admissible range; no comparable eigensolver domain"
        )
    if one_sided:
        a, b = (node, L) if L - node >= node + L else (-L, node)
    else:
        a, b = -L, L
    grid = verify.interval_interior_grid(a, b, N)
    v = shapeinv.si_potential(profile, params, grid)
    if config.shift_epsilon:
        v = v.with_values(v.values + config.shift_epsilon)
    return verify.discretize_interval(profile, v, a, b, N)


def cmd_verify(
    config: RunConfig, n_levels: int, tol: float, out_dir: Path | None = None
) -> int:
    """Compare predicted levels against the independent eigensolver."""
    model = shapeinv.build_model(config.profile, config.params, _model_grid(config))
    n_max = 2 * n_levels + 4
    family = shapeinv.oracle_family(model, shapeinv.spectrum(model, n_max))
    while len(family) < n_levels:
        n_max *= 2
        family = shapeinv.oracle_family(model, shapeinv.spectrum(model, n_max))
        if n_max > 10_000:
            raise ValidationFailure(f"levels: cannot assemble {n_levels} regular levels")
    family = family[:n_levels]
    disc = _oracle_inputs(config, model)
    computed = verify.lowest_eigenpairs(disc, n_levels)
    eps = config.shift_epsilon
    if eps:
        family = [
            SpectrumEntry(e.n, e.energy + eps, e.branch, e.ladder_power, e.regular)
            for e in family
        ]
    report = verify.compare(family, computed, tol)
    for entry in report.entries:
        status = "ok" if entry.ok else "FAIL"
        print(
            f"level n={entry.n}: predicted {entry.predicted:.10g}, "
            f"computed {entry.computed:.10g}, delta {entry.delta:.3e}  [{status}]"
        )
    print(f"{'PASS' if report.passed else 'FAIL'} at tol {tol:g}")
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "verify.json"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {path}")
    return 0 if report.passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssusy-em",
        description="Exactly solvable effective-mass models: spectra, figures, checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="print the algebraic spectrum")
    sp.add_argument("--config", required=True, help="JSON run config")
    sp.add_argument("--nmax", type=int, default=None, help="highest level index")
    sp.add_argument("--out", default=None, help="directory for spectrum.json")

    fg = sub.add_parser("figure", help="write figure CSV panels and a PNG")
    fg.add_argument("--figure", required=True, help="figure id (fig1..fig5)")
    fg.add_argument("--config", default=None, help="optional custom model config")
    fg.add_argument("--out", default=".", help="output directory")

    vf = sub.add_parser("verify", help="compare against the eigensolver")
    vf.add_argument("--config", required=True, help="JSON run config")
    vf.add_argument("--levels", type=int, default=None, help="levels to compare")
    vf.add_argument("--tol", type=float, default=None, help="energy tolerance")
    vf.add_argument("--out", default=None, help="directory for verify.json")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "spectrum":
            config = load_config(args.config)
            n_max = args.nmax if args.nmax is not None else (
                config.nmax if config.nmax is not None else DEFAULT_NMAX
            )
            out = Path(args.out) if args.out else None
            return cmd_spectrum(config, n_max, out)
        if args.command == "figure":
            config = load_config(args.config) if args.config else None
            fig_id = args.figure or (config.figure if config else None)
            if not fig_id:
                raise ValidationFailure("figure: no figure id given")
            return cmd_figure(config, fig_id, Path(args.out))
        if args.command == "verify":
            config = load_config(args.config)
            levels = args.levels if args.levels is not None else (
                config.levels if config.levels is not None else DEFAULT_LEVELS
            )
            tol = args.tol if args.tol is not None else (
                config.tol if config.tol is not None else DEFAULT_TOL
            )
            out = Path(args.out) if args.out else None
            return cmd_verify(config, levels, tol, out)
        raise ValidationFailure(f"command: unknown {args.command!r}")
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SsusyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
