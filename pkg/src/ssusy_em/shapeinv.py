"""Shape-invariant family: potential, spectrum, ladder states, singularity.

The partner pair built in susy2 becomes exactly solvable once the
superpotential is tied to the mass through the increasing phase.  This
module classifies the spacing regime, assembles the full spectrum from
the two zero-mode branches, generates excited states by repeated
raising, and reports the strength of the inverse-square term at the
phase node.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import fd, mass, susy2
from .domain import (
    AlgebraicMass,
    Branch,
    Classification,
    ConstantMass,
    Grid,
    GridFunction,
    HyperbolicMass,
    MassProfile,
    SequenceTerminated,
    SIParams,
    SingularityReport,
    SpectrumEntry,
    UnderResolved,
)

# Relative tolerance for detecting the commensurate spacing cases.
REGIME_TOL = 1e-12

# A level whose classically allowed region reaches this close to a grid
# end cannot be trusted on that grid.
EDGE_MARGIN = 20


class Regime(enum.Enum):
    LARGE = "large"
    INTERIOR = "interior"
    BOUNDARY = "boundary"


def classify_regime(params: SIParams) -> tuple[Regime, int | None]:
    """Spacing regime of the family and the band index when applicable.

    The large regime holds for spacing above half the branch splitting.
    Below that, the ratio of splitting to twice the spacing either hits
    a positive integer exactly (boundary) or falls strictly between two
    integers (interior band).  A vanishing splitting degenerates the two
    branches into one and is classified as large.
    """
    lam, k3 = params.lam, params.k3
    if k3 <= REGIME_TOL * max(1.0, lam):
        return Regime.LARGE, None
    ratio = k3 / (2.0 * lam)
    kappa = int(round(ratio))
    if kappa >= 1 and abs(2.0 * kappa * lam - k3) <= REGIME_TOL * (1.0 + abs(k3)):
        return Regime.BOUNDARY, kappa
    if ratio < 1.0:
        return Regime.LARGE, None
    return Regime.INTERIOR, int(np.floor(ratio))


@dataclass(frozen=True, eq=False)
class SIModel:
    """A fully classified shape-invariant model on a working grid."""

    scheme: susy2.SecondOrderScheme
    v_si: GridFunction
    singularity: SingularityReport
    regime: Regime
    kappa: int | None

    @property
    def profile(self) -> MassProfile:
        return self.scheme.profile

    @property
    def params(self) -> SIParams:
        return self.scheme.params

    @property
    def grid(self) -> Grid:
        return self.scheme.grid


def _mass_term(profile: MassProfile, x: np.ndarray) -> np.ndarray:
    # Expanded per-profile form of m''/(4 m^2) - (7/16) m'^2 / m^3.
    if isinstance(profile, ConstantMass):
        return np.zeros_like(x)
    if isinstance(profile, HyperbolicMass):
        a, b = profile.alpha, profile.beta
        t = np.tanh(x)
        s2 = 1.0 - t * t
        u = a + b * t
        return b * s2 * (b * t * t - 4.0 * a * t - 5.0 * b) / (4.0 * u**4)
    if isinstance(profile, AlgebraicMass):
        a = profile.alpha
        q = a + x * x
        return (a - 1.0) * (3.0 * x * x - 1.0) / q**3 - 5.0 * (a - 1.0) ** 2 * x * x / q**4
    raise TypeError(f"unknown mass profile {type(profile).__name__}")


def si_potential(profile: MassProfile, params: SIParams, grid: Grid) -> GridFunction:
    """The exactly solvable potential of the family on a grid.

    Evaluation at a phase node yields signed infinity when the rate
    constants differ; when they tie the singular term cancels exactly
    and is skipped before evaluation.
    """
    x = grid.x
    g = mass.g_function(profile, params, x)
    lam, k3 = params.lam, params.k3
    out = 0.25 * g * g + _mass_term(profile, x) - (lam + 0.5 * params.l1)
    if not params.tied:
        with np.errstate(divide="ignore"):
            out = out - (lam * lam - k3 * k3) / (4.0 * g * g)
    return GridFunction(grid.x0, grid.h, out)


def cm_limit_potential(params: SIParams, grid: Grid) -> GridFunction:
    """Constant-mass limit of the family potential."""
    x = grid.x
    lam, k3 = params.lam, params.k3
    g = params.gamma + lam * x
    out = 0.25 * g * g - (lam + 0.5 * params.l1)
    if not params.tied:
        with np.errstate(divide="ignore"):
            out = out - (lam * lam - k3 * k3) / (4.0 * g * g)
    return GridFunction(grid.x0, grid.h, out)


def _singularity_report(profile: MassProfile, params: SIParams) -> SingularityReport:
    node = mass.find_g_node(profile, params)
    if node is None:
        return SingularityReport(
            node=None,
            strength=None,
            classification=Classification.NON_SINGULAR,
            admissible=True,
        )
    m_at = float(mass.evaluate(profile, np.asarray(node)).m)
    ratio = params.k3 / params.lam
    strength = (ratio * ratio - 1.0) / (4.0 * m_at)
    if params.tied:
        return SingularityReport(
            node=node,
            strength=0.0,
            classification=Classification.NON_SINGULAR,
            admissible=True,
        )
    cls = Classification.ATTRACTIVE if strength < 0.0 else Classification.REPULSIVE
    return SingularityReport(
        node=node,
        strength=strength,
        classification=cls,
        admissible=-0.25 < strength < 0.75,
    )


def build_model(profile: MassProfile, params: SIParams, grid: Grid) -> SIModel:
    """Assemble scheme, potential, singularity data, and regime label."""
    scheme = susy2.build_scheme(profile, params, grid)
    regime, kappa = classify_regime(params)
    return SIModel(
        scheme=scheme,
        v_si=si_potential(profile, params, grid),
        singularity=_singularity_report(profile, params),
        regime=regime,
        kappa=kappa,
    )


def singularity(model: SIModel) -> SingularityReport:
    return model.singularity


def _node_in_grid(model: SIModel) -> bool:
    node = model.singularity.node
    if node is None:
        return False
    grid = model.grid
    return grid.x0 <= node <= grid.x_end


def spectrum(model: SIModel, n_max: int) -> list[SpectrumEntry]:
    """Algebraic energy levels n = 0..n_max with branch and power labels.

    The regular flag goes false exactly for states whose closed form
    carries a negative power of the phase at a node inside the working
    grid.  Only the branch seeded on the smaller phase exponent can be
    singular, and only when the splitting exceeds the spacing rate.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    params = model.params
    lam, k3 = params.lam, params.k3
    eta1, eta2 = params.eta1, params.eta2
    singular_node = _node_in_grid(model) and not params.tied and lam < k3

    # a vanishing splitting merges the two seeds into one state, so the
    # interleaved double sequence would list every level twice
    merged = k3 <= REGIME_TOL * max(1.0, abs(lam))

    entries: list[SpectrumEntry] = []
    regime, kappa = model.regime, model.kappa
    for n in range(n_max + 1):
        if merged:
            branch, power = Branch.J2, n
            energy = eta2 + 2.0 * n * lam
        elif regime is Regime.LARGE:
            power, rem = divmod(n, 2)
            if rem == 0:
                branch, energy = Branch.J2, eta2 + 2.0 * power * lam
            else:
                branch, energy = Branch.J1, eta1 + 2.0 * power * lam
        elif regime is Regime.BOUNDARY:
            branch, power = Branch.J2, n
            energy = eta2 + 2.0 * n * lam
        else:
            assert kappa is not None
            if n <= kappa:
                branch, power = Branch.J2, n
                energy = eta2 + 2.0 * n * lam
            elif (n - kappa) % 2 == 1:
                power = (n - kappa - 1) // 2
                branch, energy = Branch.J1, eta1 + 2.0 * power * lam
            else:
                power = (n + kappa) // 2
                branch, energy = Branch.J2, eta2 + 2.0 * power * lam
        if branch is Branch.J1:
            regular = True
        elif regime is Regime.BOUNDARY and kappa is not None and power >= kappa:
            regular = True
        else:
            regular = not singular_node
        entries.append(
            SpectrumEntry(
                n=n, energy=energy, branch=branch, ladder_power=power, regular=regular
            )
        )
    return entries


def _seed(scheme: susy2.SecondOrderScheme, branch: Branch) -> GridFunction:
    modes = susy2.zero_modes(scheme)
    return modes.psi_plus[0] if branch is Branch.J1 else modes.psi_plus[1]


def ladder_step(scheme: susy2.SecondOrderScheme, f: GridFunction) -> GridFunction:
    """One application of the raising operator, renormalized.

    Raises :class:`SequenceTerminated` when the image collapses, which
    happens exactly when the input lies in the kernel of the adjoint.
    """
    raised = susy2.apply_A_dagger(scheme, f)
    scale = fd.l2_norm(raised.values, f.h)
    in_scale = fd.l2_norm(f.values, f.h)
    params = scheme.params
    floor = 1e-9 * in_scale * (1.0 + abs(params.l1) + abs(params.l2))
    if not np.isfinite(scale) or scale <= floor:
        raise SequenceTerminated("raising operator annihilated the state")
    return raised.with_values(raised.values / scale)


def _edge_skip(model: SIModel, grid: Grid) -> tuple[bool, bool]:
    # A grid end sitting on the declared node is a singular wall; the
    # resolution check does not apply there.
    node = model.singularity.node
    if node is None:
        return False, False
    near = 2.0 * grid.h
    return abs(grid.x0 - node) <= near, abs(grid.x_end - node) <= near


def _check_resolved(model: SIModel, grid: Grid, energy: float) -> None:
    v = si_potential(model.profile, model.params, grid).values
    allowed = np.flatnonzero(v <= energy)
    if allowed.size == 0:
        return
    skip_left, skip_right = _edge_skip(model, grid)
    if not skip_left and allowed[0] < EDGE_MARGIN:
        raise UnderResolved(
            f"allowed region reaches within {EDGE_MARGIN} points of the left edge"
        )
    if not skip_right and allowed[-1] >= grid.n - EDGE_MARGIN:
        raise UnderResolved(
            f"allowed region reaches within {EDGE_MARGIN} points of the right edge"
        )


def ladder_state(model: SIModel, entry: SpectrumEntry, grid: Grid) -> GridFunction:
    """Wavefunction of one spectrum entry by repeated raising on a grid.

    In the boundary regime the states above the deleted band coincide
    with raisings of the other branch's seed, which is smooth at the
    node; those are generated from that seed so that no stencil ever
    straddles a singular factor.
    """
    _check_resolved(model, grid, entry.energy)
    scheme = susy2.build_scheme(model.profile, model.params, grid)
    branch, power = entry.branch, entry.ladder_power
    if (
        model.regime is Regime.BOUNDARY
        and model.kappa is not None
        and branch is Branch.J2
        and power >= model.kappa
        and _node_in_grid(model)
    ):
        branch, power = Branch.J1, power - model.kappa
    state = _seed(scheme, branch)
    for _ in range(power):
        state = ladder_step(scheme, state)
    values = state.values
    norm = fd.l2_norm(values, grid.h)
    if np.isfinite(norm) and norm > 0.0:
        values = values / norm
    idx = int(np.argmax(np.abs(values)))
    if values[idx] < 0.0:
        values = -values
    return GridFunction(grid.x0, grid.h, values)


def closed_form_state(model: SIModel, entry: SpectrumEntry, grid: Grid) -> GridFunction:
    """Closed form of a ladder state for powers up to two.

    The raised states are polynomial multiples of the seed; the other
    branch uses the same polynomials with the sign of the splitting
    constant flipped.
    """
    power = entry.ladder_power
    if power > 2:
        raise ValueError(f"no closed form for power {power}")
    params = model.params
    lam = params.lam
    k3 = params.k3 if entry.branch is Branch.J2 else -params.k3
    scheme = susy2.build_scheme(model.profile, model.params, grid)
    seed = _seed(scheme, entry.branch)
    g = mass.g_function(model.profile, params, grid.x)
    if power == 0:
        values = seed.values.copy()
    elif power == 1:
        values = (g * g + k3 - 2.0 * lam) * seed.values
    else:
        values = ((g * g + k3 - 4.0 * lam) ** 2 + 2.0 * lam * (k3 - 4.0 * lam)) * seed.values
    norm = fd.l2_norm(values, grid.h)
    if np.isfinite(norm) and norm > 0.0:
        values = values / norm
    idx = int(np.argmax(np.abs(values)))
    if values[idx] < 0.0:
        values = -values
    return GridFunction(grid.x0, grid.h, values)


def oracle_family(model: SIModel, entries: list[SpectrumEntry]) -> list[SpectrumEntry]:
    """Entries reproducible by a Dirichlet eigensolver on the model domain.

    Without a singular node every regular entry qualifies.  With one, a
    one-sided Dirichlet wall realizes the extension whose states carry
    the larger phase exponent, so only that branch's entries (including
    boundary-regime states that coincide with it) are comparable.
    """
    regular = [e for e in entries if e.regular]
    if not _node_in_grid(model) or model.params.tied:
        return regular
    merged = model.params.k3 <= REGIME_TOL * max(1.0, abs(model.params.lam))
    if merged:
        # coincident exponents at the node make the wall condition
        # logarithmically slow, so no level is reproducible
        return []
    keep: list[SpectrumEntry] = []
    for e in regular:
        if e.branch is Branch.J1:
            keep.append(e)
        elif (
            model.regime is Regime.BOUNDARY
            and model.kappa is not None
            and e.ladder_power >= model.kappa
        ):
            keep.append(e)
    return keep
