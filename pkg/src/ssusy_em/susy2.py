"""Second-order partner construction for effective-mass Hamiltonians.

The lowering operator is ``A = (1/m) d2 + W d1 + c`` and its formal
adjoint raises.  The pair of partner potentials is assembled so that the
two share one array for every common term; their difference then cancels
to roundoff even where the individual potentials are large.

All coefficient functions are analytic in the mass profile and the phase
``g``.  Finite differences enter only when an operator is applied to a
sampled function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fd, mass
from .domain import (
    Grid,
    GridFunction,
    MassProfile,
    SIParams,
    SuperpotentialNode,
)

# Endpoint decay threshold, relative to the peak, below which a sampled
# state counts as normalizable on the window.
DECAY_RTOL = 1e-8

# Powers this close to an integer are evaluated with the sign of the
# phase carried through, keeping the state smooth across a phase node.
_INT_POWER_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SIEval:
    """Superpotential data on a set of points.

    ``wm`` is the combination whose square and derivative build both
    partner potentials; its derivatives are closed-form.
    """

    mass: mass.MassEval
    g: np.ndarray
    wm: np.ndarray
    wm_d1: np.ndarray
    wm_d2: np.ndarray


def si_wm(profile: MassProfile, params: SIParams, x: np.ndarray) -> SIEval:
    """Evaluate the shape-invariant superpotential ``g / sqrt(m)`` at ``x``."""
    x = np.asarray(x, dtype=float)
    ev = mass.evaluate(profile, x)
    lam = params.lam
    g = params.gamma + lam * ev.int_sqrt_m
    m, dm, d2m, root = ev.m, ev.dm, ev.d2m, ev.sqrt_m
    wm = g / root
    half_ratio = g * dm / (2.0 * m * root)
    wm_d1 = lam - half_ratio
    wm_d2 = (
        -lam * dm / (2.0 * m)
        - g * d2m / (2.0 * m * root)
        + 0.75 * g * dm * dm / (m * m * root)
    )
    return SIEval(mass=ev, g=g, wm=wm, wm_d1=wm_d1, wm_d2=wm_d2)


def _c_coefficient(params: SIParams, ev: SIEval) -> np.ndarray:
    """Zeroth-order coefficient of the lowering operator.

    The inverse-square term drops out exactly when the two rate constants
    tie, so the tied branch skips it instead of evaluating 0/0 noise.
    """
    lam, k3 = params.lam, params.k3
    m, dm, d2m, root = ev.mass.m, ev.mass.dm, ev.mass.d2m, ev.mass.sqrt_m
    g = ev.g
    out = (
        0.5 * lam
        + 0.25 * g * g
        - g * dm / (4.0 * m * root)
        - d2m / (4.0 * m * m)
        + (7.0 / 16.0) * dm * dm / (m * m * m)
    )
    if not params.tied:
        with np.errstate(divide="ignore"):
            out = out + (lam * lam - k3 * k3) / (4.0 * g * g)
    return out


@dataclass(frozen=True, eq=False)
class SecondOrderScheme:
    """Partner pair plus every coefficient needed to apply the operators."""

    profile: MassProfile
    params: SIParams
    grid: Grid
    mass: mass.MassEval
    g: np.ndarray
    wm: np.ndarray
    wm_d1: np.ndarray
    w_coeff: np.ndarray
    c: np.ndarray
    v_plus: GridFunction
    v_minus: GridFunction

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def wm_at(self, x: np.ndarray) -> np.ndarray:
        return si_wm(self.profile, self.params, x).wm

    def w_at(self, x: np.ndarray) -> np.ndarray:
        ev = si_wm(self.profile, self.params, x)
        return ev.wm - ev.mass.dm / (ev.mass.m * ev.mass.m)

    def c_at(self, x: np.ndarray) -> np.ndarray:
        return _c_coefficient(self.params, si_wm(self.profile, self.params, x))


def build_scheme(
    profile: MassProfile,
    params: SIParams,
    grid: Grid,
    strict: bool = False,
) -> SecondOrderScheme:
    """Assemble the partner pair on a grid.

    Parameters
    ----------
    profile, params, grid
        Mass profile, family constants, and evaluation grid.
    strict : bool
        When True, refuse a grid containing a node of the phase by
        raising :class:`SuperpotentialNode`.  The default keeps any
        resulting pole as infinities in the sampled arrays; when the
        two rate constants tie the arrays stay finite either way.
    """
    x = grid.x
    ev = si_wm(profile, params, x)
    if strict:
        node = mass.find_g_node_in(profile, params, grid.x0, grid.x_end)
        if node is not None:
            raise SuperpotentialNode(node)
    c = _c_coefficient(params, ev)
    m, dm = ev.mass.m, ev.mass.dm
    ratio = dm * ev.wm / (2.0 * m)
    shared = 0.5 * ev.g * ev.g - c - 0.5 * params.l1
    v_plus = -0.5 * ev.wm_d1 - ratio + shared
    v_minus = 1.5 * ev.wm_d1 + ratio + shared
    return SecondOrderScheme(
        profile=profile,
        params=params,
        grid=grid,
        mass=ev.mass,
        g=ev.g,
        wm=ev.wm,
        wm_d1=ev.wm_d1,
        w_coeff=ev.wm - dm / (m * m),
        c=c,
        v_plus=GridFunction(grid.x0, grid.h, v_plus),
        v_minus=GridFunction(grid.x0, grid.h, v_minus),
    )


def apply_A(scheme: SecondOrderScheme, f: GridFunction) -> GridFunction:
    """Apply the second-order lowering operator to a sampled function."""
    v = f.values
    h = f.h
    out = fd.d2(v, h) / scheme.mass.m + scheme.w_coeff * fd.d1(v, h) + scheme.c * v
    return f.with_values(out)


def apply_A_dagger(scheme: SecondOrderScheme, f: GridFunction) -> GridFunction:
    """Apply the formal adjoint of the lowering operator."""
    v = f.values
    h = f.h
    m, dm = scheme.mass.m, scheme.mass.dm
    first = scheme.w_coeff + 2.0 * dm / (m * m)
    zeroth = scheme.c - scheme.wm_d1
    out = fd.d2(v, h) / m - first * fd.d1(v, h) + zeroth * v
    return f.with_values(out)


def _apply_h(mass_ev: mass.MassEval, v: np.ndarray, f: GridFunction) -> GridFunction:
    vals = f.values
    h = f.h
    m, dm = mass_ev.m, mass_ev.dm
    out = -fd.d2(vals, h) / m + dm / (m * m) * fd.d1(vals, h) + v * vals
    return f.with_values(out)


def apply_h_plus(scheme: SecondOrderScheme, f: GridFunction) -> GridFunction:
    return _apply_h(scheme.mass, scheme.v_plus.values, f)


def apply_h_minus(scheme: SecondOrderScheme, f: GridFunction) -> GridFunction:
    return _apply_h(scheme.mass, scheme.v_minus.values, f)


def identity_residual(
    scheme: SecondOrderScheme,
    f: GridFunction,
    trim: int = fd.INTERIOR_TRIM,
) -> tuple[float, float]:
    """Residuals of the two defining operator relations on a test function.

    The first number measures how far the raise-after-lower product is
    from the quadratic polynomial of the plus Hamiltonian; the second
    measures the second-order intertwining.  Both are interior-trimmed
    norms relative to the norm of ``f`` itself.
    """
    l1, l2 = scheme.params.l1, scheme.params.l2
    h = f.h

    af = apply_A(scheme, f)
    lhs_plus = apply_A_dagger(scheme, af).values
    hp = apply_h_plus(scheme, f)
    rhs_plus = apply_h_plus(scheme, hp).values + l1 * hp.values + l2 * f.values

    lhs_twine = apply_A(scheme, apply_h_plus(scheme, f)).values
    rhs_twine = apply_h_minus(scheme, af).values

    r_plus = fd.rel_residual(lhs_plus - rhs_plus, f.values, h, trim)
    r_minus = fd.rel_residual(lhs_twine - rhs_twine, f.values, h, trim)
    return r_plus, r_minus


def product_residual(
    scheme: SecondOrderScheme,
    f: GridFunction,
    trim: int = fd.INTERIOR_TRIM,
) -> float:
    """Residual of the lower-after-raise product against the minus polynomial."""
    l1, l2 = scheme.params.l1, scheme.params.l2
    adf = apply_A_dagger(scheme, f)
    lhs = apply_A(scheme, adf).values
    hm = apply_h_minus(scheme, f)
    rhs = apply_h_minus(scheme, hm).values + l1 * hm.values + l2 * f.values
    return fd.rel_residual(lhs - rhs, f.values, f.h, trim)


def _signed_power(g: np.ndarray, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Log magnitude and sign of ``g**p`` with integer powers kept signed."""
    k = round(p)
    if abs(p - k) < _INT_POWER_TOL:
        k = int(k)
        if k == 0:
            return np.zeros_like(g), np.ones_like(g)
        with np.errstate(divide="ignore"):
            logpart = k * np.log(np.abs(g))
        sign = np.where(g < 0.0, -1.0, 1.0) ** k
        return logpart, sign
    with np.errstate(divide="ignore"):
        return p * np.log(np.abs(g)), np.ones_like(g)


def _mode_values(ev: SIEval, lam: float, power: float, side: float) -> np.ndarray:
    # side = -1 builds the decaying family, +1 the growing one.
    logpart, sign = _signed_power(ev.g, power)
    logpsi = 0.25 * np.log(ev.mass.m) + logpart + side * ev.g * ev.g / (4.0 * lam)
    finite = logpsi[np.isfinite(logpsi)]
    peak = float(np.max(finite)) if finite.size else 0.0
    return sign * np.exp(logpsi - peak)


def _is_normalizable(values: np.ndarray) -> bool:
    if not np.all(np.isfinite(values)):
        return False
    peak = float(np.max(np.abs(values)))
    if peak == 0.0:
        return False
    return bool(
        abs(values[0]) < DECAY_RTOL * peak and abs(values[-1]) < DECAY_RTOL * peak
    )


def _finalize(values: np.ndarray, h: float, x0: float) -> tuple[GridFunction, bool]:
    ok = _is_normalizable(values)
    if ok:
        values = values / fd.l2_norm(values, h)
    idx = int(np.argmax(np.abs(values)))
    if values[idx] < 0.0:
        values = -values
    return GridFunction(x0, h, values), ok


@dataclass(frozen=True, eq=False)
class ZeroModes:
    """Kernel states of the lowering and raising operators on a grid.

    Index 0 of each pair is the branch whose splitting constant enters
    with a minus sign, index 1 the one with a plus sign.  ``f1`` and
    ``f2`` evaluate the corresponding log-derivative combinations at
    arbitrary points.  Normalizable states are unit L2 on the grid,
    the rest are scaled to unit peak.
    """

    psi_plus: tuple[GridFunction, GridFunction]
    psi_minus: tuple[GridFunction, GridFunction]
    f1: Callable[[np.ndarray], np.ndarray]
    f2: Callable[[np.ndarray], np.ndarray]
    eta: tuple[float, float]
    plus_normalizable: tuple[bool, bool]
    minus_normalizable: tuple[bool, bool]


def _f_handle(
    profile: MassProfile, params: SIParams, j: int
) -> Callable[[np.ndarray], np.ndarray]:
    sgn = -1.0 if j == 1 else 1.0

    def handle(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ev = mass.evaluate(profile, x)
        g = params.gamma + params.lam * ev.int_sqrt_m
        with np.errstate(divide="ignore", invalid="ignore"):
            return (g * g + sgn * params.k3) * ev.sqrt_m / (2.0 * g)

    return handle


def zero_modes(scheme: SecondOrderScheme) -> ZeroModes:
    """Closed-form kernel states of both second-order supercharges.

    The exponent of the phase factor differs between the two branches by
    the ratio of the splitting constant to the level spacing; integer
    exponents keep the sign of the phase so the state stays smooth
    through a phase node.
    """
    params = scheme.params
    lam, k3 = params.lam, params.k3
    ev = si_wm(scheme.profile, params, scheme.grid.x)
    h, x0 = scheme.grid.h, scheme.grid.x0

    p_minus_branch = (lam - k3) / (2.0 * lam)
    p_plus_branch = (lam + k3) / (2.0 * lam)

    plus_1, ok_p1 = _finalize(_mode_values(ev, lam, p_plus_branch, -1.0), h, x0)
    plus_2, ok_p2 = _finalize(_mode_values(ev, lam, p_minus_branch, -1.0), h, x0)
    minus_1, ok_m1 = _finalize(_mode_values(ev, lam, p_minus_branch, +1.0), h, x0)
    minus_2, ok_m2 = _finalize(_mode_values(ev, lam, p_plus_branch, +1.0), h, x0)

    return ZeroModes(
        psi_plus=(plus_1, plus_2),
        psi_minus=(minus_1, minus_2),
        f1=_f_handle(scheme.profile, params, 1),
        f2=_f_handle(scheme.profile, params, 2),
        eta=(params.eta1, params.eta2),
        plus_normalizable=(ok_p1, ok_p2),
        minus_normalizable=(ok_m1, ok_m2),
    )


def formal_eigencheck(
    scheme: SecondOrderScheme,
    j: int,
    trim: int = fd.INTERIOR_TRIM,
) -> float:
    """Residual of the formal eigenvalue relation for kernel state ``j``.

    Applies the plus Hamiltonian to its kernel state ``j`` (1 or 2) and
    returns the interior-trimmed norm of the defect against ``eta_j``
    times the state, relative to the state's norm.
    """
    if j not in (1, 2):
        raise ValueError(f"branch index must be 1 or 2, got {j}")
    modes = zero_modes(scheme)
    eta = modes.eta[j - 1]
    psi = modes.psi_plus[j - 1]
    res = apply_h_plus(scheme, psi).values - eta * psi.values
    return fd.rel_residual(res, psi.values, scheme.grid.h, trim)
