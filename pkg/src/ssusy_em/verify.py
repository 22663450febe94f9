"""Independent eigensolver used to check the algebraic predictions.

The operator -d/dx((1/m) d/dx) + v is discretized with a symmetric
flux-conservative scheme on a truncated interval with Dirichlet ends.
This module deliberately consumes nothing but a mass profile and a
sampled potential; none of the ladder formulas appear here, so an
agreement between the two routes is evidence, not bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import fd, mass
from .domain import (
    ConvergenceFailure,
    Grid,
    GridFunction,
    GridTooSmall,
    LengthMismatch,
    MassProfile,
    SingularInDomain,
    SpectrumEntry,
)

DEFAULT_L = 12.0
DEFAULT_N = 6000

# Bisection stops when the bracket shrinks below this times the matrix scale.
EIG_TOL = 1e-10

_SEED = 171717


@dataclass(frozen=True, eq=False)
class Discretization:
    """Symmetric tridiagonal form of the truncated operator.

    ``grid`` holds the N interior points; the Dirichlet endpoints are one
    step outside at both ends.
    """

    grid: Grid
    diag: np.ndarray
    offdiag: np.ndarray


def interior_grid(L: float, N: int) -> Grid:
    return interval_interior_grid(-L, L, N)


def interval_interior_grid(a: float, b: float, N: int) -> Grid:
    h = (b - a) / (N + 1)
    return Grid(x0=a + h, h=h, n=N)


def discretize_interval(
    profile: MassProfile,
    v: GridFunction,
    a: float,
    b: float,
    N: int,
) -> Discretization:
    """Flux-conservative discretization on (a, b) with Dirichlet walls.

    The inverse mass is evaluated in closed form at cell midpoints, which
    keeps the matrix exactly symmetric and the scheme second order.
    """
    if N < 50:
        raise GridTooSmall(f"oracle needs at least 50 interior points, got {N}")
    grid = interval_interior_grid(a, b, N)
    if v.n != N or abs(v.x0 - grid.x0) > 1e-12 * (1.0 + abs(grid.x0)) or abs(v.h - grid.h) > 1e-12 * grid.h:
        raise ValueError("potential was sampled on a different interior grid")
    if not np.all(np.isfinite(v.values)):
        bad = int(np.argmax(~np.isfinite(v.values)))
        raise SingularInDomain(f"potential non-finite at x = {grid.x[bad]!r}")
    h = grid.h
    midpoints = a + h * (0.5 + np.arange(N + 1))
    inv_m = 1.0 / mass.evaluate(profile, midpoints).m
    diag = (inv_m[:-1] + inv_m[1:]) / (h * h) + v.values
    offdiag = -inv_m[1:-1] / (h * h)
    return Discretization(grid=grid, diag=diag, offdiag=offdiag)


def discretize(profile: MassProfile, v: GridFunction, L: float, N: int) -> Discretization:
    return discretize_interval(profile, v, -L, L, N)


def _sturm_count(diag: np.ndarray, offdiag: np.ndarray, sigma: float, pivmin: float) -> int:
    # Number of eigenvalues strictly below sigma, by LDL^T pivot signs.
    count = 0
    d = diag
    e = offdiag
    n = d.shape[0]
    q = d[0] - sigma
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count = 1
    for i in range(1, n):
        q = d[i] - sigma - e[i - 1] * e[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


def _gershgorin(diag: np.ndarray, offdiag: np.ndarray) -> tuple[float, float]:
    n = diag.shape[0]
    radius = np.zeros(n)
    radius[:-1] += np.abs(offdiag)
    radius[1:] += np.abs(offdiag)
    return float(np.min(diag - radius)), float(np.max(diag + radius))


def _inverse_iteration(
    d: Discretization,
    sigma: float,
    previous: list[np.ndarray],
    index: int,
    max_iterations: int,
) -> np.ndarray:
    n = d.diag.shape[0]
    h = d.grid.h
    ab = np.zeros((3, n))
    shift = sigma + 1e-11 * (1.0 + abs(sigma))
    ab[0, 1:] = d.offdiag
    ab[1, :] = d.diag - shift
    ab[2, :-1] = d.offdiag
    rng = np.random.default_rng(_SEED + index)
    vec = rng.standard_normal(n)
    vec /= fd.l2_norm(vec, h)
    for _ in range(max_iterations):
        try:
            new = solve_banded((1, 1), ab, vec)
        except np.linalg.LinAlgError:
            ab[1, :] = d.diag - (shift + 1e-9 * (1.0 + abs(shift)))
            new = solve_banded((1, 1), ab, vec)
        for prev in previous:
            new -= fd.inner(new, prev, h) * prev
        norm = fd.l2_norm(new, h)
        if norm == 0.0:
            break
        new /= norm
        if abs(abs(fd.inner(new, vec, h)) - 1.0) < 1e-13:
            return new
        vec = new
    raise ConvergenceFailure(index)


def lowest_eigenpairs(
    d: Discretization, k: int, max_iterations: int = 50
) -> list[tuple[float, GridFunction]]:
    """The k smallest eigenpairs of the discretized operator.

    Eigenvalues come from bisection on the Sturm pivot count, each level
    bracketed individually; eigenvectors from shifted inverse iteration,
    orthogonalized against the levels already found and normalized to
    unit discrete L2 with the grid weight.
    """
    if not 1 <= k <= 20:
        raise ValueError(f"k must be between 1 and 20, got {k}")
    diag, offdiag = d.diag, d.offdiag
    scale = max(1.0, float(np.max(np.abs(diag))), float(np.max(np.abs(offdiag))))
    pivmin = (np.finfo(float).eps * scale) ** 2
    lo0, hi0 = _gershgorin(diag, offdiag)
    tol = EIG_TOL * scale
    energies: list[float] = []
    lo = lo0
    for j in range(k):
        a, b = lo, hi0
        while b - a > tol:
            mid = 0.5 * (a + b)
            if _sturm_count(diag, offdiag, mid, pivmin) >= j + 1:
                b = mid
            else:
                a = mid
        energies.append(0.5 * (a + b))
        lo = a  # eigenvalues are sorted; reuse the bracket floor
    pairs: list[tuple[float, GridFunction]] = []
    found: list[np.ndarray] = []
    for j, energy in enumerate(energies):
        vec = _inverse_iteration(d, energy, found, j, max_iterations)
        idx = int(np.argmax(np.abs(vec)))
        if vec[idx] < 0.0:
            vec = -vec
        found.append(vec)
        pairs.append((energy, GridFunction(d.grid.x0, d.grid.h, vec)))
    return pairs


def count_nodes(values: np.ndarray, rel: float = 1e-8) -> int:
    """Sign changes of a sampled function, ignoring near-zero samples."""
    v = np.asarray(values, dtype=float)
    peak = float(np.max(np.abs(v)))
    if peak == 0.0:
        return 0
    kept = v[np.abs(v) > rel * peak]
    if kept.size < 2:
        return 0
    signs = np.sign(kept)
    return int(np.sum(signs[1:] != signs[:-1]))


@dataclass(frozen=True)
class ComparisonEntry:
    n: int
    predicted: float
    computed: float
    delta: float
    overlap: float | None
    ok: bool


@dataclass(frozen=True)
class ComparisonReport:
    entries: tuple[ComparisonEntry, ...]
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "passed": self.passed,
            "entries": [
                {
                    "n": e.n,
                    "predicted": e.predicted,
                    "computed": e.computed,
                    "delta": e.delta,
                    "overlap": e.overlap,
                    "ok": e.ok,
                }
                for e in self.entries
            ],
        }


def compare(
    predicted: list[SpectrumEntry],
    computed: list[tuple[float, GridFunction]],
    tol: float,
    predicted_states: list[GridFunction] | None = None,
) -> ComparisonReport:
    """Check computed eigenpairs against regular predicted levels.

    ``predicted_states``, when given, must align with the regular subset
    of ``predicted`` and be unit L2 on the oracle grid; overlaps are then
    reported alongside the energy errors.  A level passes on its energy
    error alone.
    """
    regular = [e for e in predicted if e.regular]
    if len(computed) < len(regular):
        raise LengthMismatch(
            f"need {len(regular)} computed levels, got {len(computed)}"
        )
    entries: list[ComparisonEntry] = []
    for i, pred in enumerate(regular):
        energy, state = computed[i]
        delta = abs(energy - pred.energy)
        overlap: float | None = None
        if predicted_states is not None:
            overlap = abs(fd.inner(predicted_states[i].values, state.values, state.h))
        entries.append(
            ComparisonEntry(
                n=pred.n,
                predicted=pred.energy,
                computed=energy,
                delta=delta,
                overlap=overlap,
                ok=delta <= tol,
            )
        )
    return ComparisonReport(
        entries=tuple(entries),
        tol=tol,
        passed=all(e.ok for e in entries),
    )
