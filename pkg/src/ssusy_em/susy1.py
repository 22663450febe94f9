"""First-order ladder machinery and reductions of the second-order scheme.

A first-order superpotential W defines the pair of partner potentials
and, after multiplying by the mass factor, the two candidate ground
states.  The two reductions of the second-order scheme each produce a
pair (W1, W2) together with additive constants; both divide by the
phase, so they refuse grids on which the phase changes sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fd, mass, susy2
from .domain import (
    Grid,
    GridFunction,
    MassProfile,
    NodeInDomain,
    ReductionType,
    SIParams,
    SuperpotentialNode,
    WLabel,
    is_tie,
)

DECAY_RTOL = susy2.DECAY_RTOL


@dataclass(frozen=True, eq=False)
class FirstOrderSuperpotential:
    """Sampled superpotential with a tag recording how it was built."""

    W: GridFunction
    label: WLabel


@dataclass(frozen=True, eq=False)
class ReductionResult:
    W1: FirstOrderSuperpotential
    W2: FirstOrderSuperpotential
    K1: float
    K2: float
    type: ReductionType


def _pole_coefficient(params: SIParams, label: WLabel) -> float:
    lam, k3 = params.lam, params.k3
    if label in (WLabel.TYPE_I_W1, WLabel.TYPE_II_W1):
        return lam + k3
    if label == WLabel.TYPE_I_W2:
        return -(lam + k3)
    if label == WLabel.TYPE_II_W2:
        return k3 - lam
    raise ValueError(f"no closed form for label {label!r}")


def _si_w_values(
    profile: MassProfile,
    params: SIParams,
    grid: Grid,
    pole_coefficient: float,
) -> np.ndarray:
    ev = mass.evaluate(profile, grid.x)
    g = params.gamma + params.lam * ev.int_sqrt_m
    base = 0.5 * g - ev.dm / (4.0 * ev.m * ev.sqrt_m)
    if abs(pole_coefficient) <= 1e-12 * (1.0 + abs(params.lam) + abs(params.k3)):
        return base
    node = mass.find_g_node_in(profile, params, grid.x0, grid.x_end)
    if node is not None:
        raise SuperpotentialNode(node)
    return base + pole_coefficient / (2.0 * g)


def first_order_superpotential(
    profile: MassProfile,
    params: SIParams,
    grid: Grid,
    label: WLabel,
) -> FirstOrderSuperpotential:
    """Closed-form superpotential of one reduction branch on a grid.

    Every branch shares the same smooth part; they differ only in the
    coefficient of the inverse-phase term.  A branch whose coefficient
    vanishes is evaluated without it and works across a phase node; any
    other branch raises :class:`SuperpotentialNode` when the phase
    changes sign inside the grid.
    """
    values = _si_w_values(profile, params, grid, _pole_coefficient(params, label))
    return FirstOrderSuperpotential(W=GridFunction(grid.x0, grid.h, values), label=label)


def recursion_superpotential(
    profile: MassProfile,
    params: SIParams,
    grid: Grid,
    a0: float,
) -> FirstOrderSuperpotential:
    """Superpotential of the reduced recursion at parameter value ``a0``."""
    if is_tie(params.lam, a0):
        coeff = 0.0
    else:
        coeff = a0 - params.lam
    values = _si_w_values(profile, params, grid, coeff)
    return FirstOrderSuperpotential(W=GridFunction(grid.x0, grid.h, values), label=WLabel.GENERIC)


def _check_same_grid(w: FirstOrderSuperpotential, grid: Grid) -> None:
    f = w.W
    if f.n != grid.n or f.x0 != grid.x0 or f.h != grid.h:
        raise ValueError("superpotential was sampled on a different grid")


def partner_potentials_1(
    w: FirstOrderSuperpotential,
    profile: MassProfile,
    grid: Grid,
) -> tuple[GridFunction, GridFunction]:
    """First-order partner pair built from a sampled superpotential.

    The derivative of W is numerical because W may have no closed form;
    every mass derivative is analytic.  Both potentials are assembled
    from the same term arrays, so their difference carries no extra
    cancellation noise.
    """
    _check_same_grid(w, grid)
    values = w.W.values
    if not np.all(np.isfinite(values)):
        bad = int(np.argmax(~np.isfinite(values)))
        raise NodeInDomain(f"superpotential non-finite at x = {grid.x[bad]!r}")
    ev = mass.evaluate(profile, grid.x)
    dw = fd.d1(values, grid.h)
    wsq = values * values
    slope = dw / ev.sqrt_m
    drag = values * mass.inv_sqrt_m_d1(ev)
    curvature = (3.0 * ev.dm * ev.dm - 2.0 * ev.m * ev.d2m) / (4.0 * ev.m**3)
    v_plus = wsq - slope - drag
    v_minus = wsq + slope - drag - curvature
    return (
        GridFunction(grid.x0, grid.h, v_plus),
        GridFunction(grid.x0, grid.h, v_minus),
    )


def apply_a(
    w: FirstOrderSuperpotential, profile: MassProfile, f: GridFunction
) -> GridFunction:
    """Apply the first-order lowering operator."""
    ev = mass.evaluate(profile, f.x)
    out = fd.d1(f.values, f.h) / ev.sqrt_m + w.W.values * f.values
    return f.with_values(out)


def apply_a_dagger(
    w: FirstOrderSuperpotential, profile: MassProfile, f: GridFunction
) -> GridFunction:
    """Apply the adjoint of the first-order lowering operator."""
    ev = mass.evaluate(profile, f.x)
    out = (
        -fd.d1(f.values, f.h) / ev.sqrt_m
        - mass.inv_sqrt_m_d1(ev) * f.values
        + w.W.values * f.values
    )
    return f.with_values(out)


def apply_h(profile: MassProfile, v: GridFunction, f: GridFunction) -> GridFunction:
    """Apply the effective-mass Hamiltonian with potential ``v``."""
    ev = mass.evaluate(profile, f.x)
    out = (
        -fd.d2(f.values, f.h) / ev.m
        + ev.dm / (ev.m * ev.m) * fd.d1(f.values, f.h)
        + v.values * f.values
    )
    return f.with_values(out)


def _finalize(values: np.ndarray, h: float, x0: float) -> tuple[GridFunction, bool]:
    ok = bool(np.all(np.isfinite(values)))
    peak = float(np.max(np.abs(values))) if ok else 0.0
    ok = bool(ok and peak > 0.0 and abs(values[0]) < DECAY_RTOL * peak and abs(values[-1]) < DECAY_RTOL * peak)
    if ok:
        values = values / fd.l2_norm(values, h)
    idx = int(np.argmax(np.abs(values)))
    if values[idx] < 0.0:
        values = -values
    return GridFunction(x0, h, values), ok


def ground_states_1(
    w: FirstOrderSuperpotential,
    profile: MassProfile,
    grid: Grid,
) -> tuple[GridFunction, GridFunction, tuple[bool, bool]]:
    """Candidate zero modes of the first-order pair, with decay flags.

    Integration runs from the grid midpoint so that neither tail
    accumulates the other's quadrature error.  At most one of the two
    flags can be true for any superpotential on the full line.
    """
    _check_same_grid(w, grid)
    ev = mass.evaluate(profile, grid.x)
    phase = fd.antiderivative(ev.sqrt_m * w.W.values, grid.h, anchor=grid.n // 2)
    log_plus = -phase
    log_minus = phase + 0.5 * np.log(ev.m)
    psi_plus = np.exp(log_plus - np.max(log_plus))
    psi_minus = np.exp(log_minus - np.max(log_minus))
    gf_plus, ok_plus = _finalize(psi_plus, grid.h, grid.x0)
    gf_minus, ok_minus = _finalize(psi_minus, grid.h, grid.x0)
    return gf_plus, gf_minus, (ok_plus, ok_minus)


def _reduce(
    profile: MassProfile,
    params: SIParams,
    grid: Grid,
    rtype: ReductionType,
) -> ReductionResult:
    node = mass.find_g_node_in(profile, params, grid.x0, grid.x_end)
    if node is not None:
        raise SuperpotentialNode(node)
    if rtype is ReductionType.TYPE_I:
        l1we, l2we = WLabel.TYPE_I_W1, WLabel.TYPE_I_W2
        k1 = -(params.k3 + params.l1) / 2.0
        k2 = (params.k3 - params.l1) / 2.0
    else:
        l1we, l2we = WLabel.TYPE_II_W1, WLabel.TYPE_II_W2
        k1 = k2 = -(params.k3 + params.l1) / 2.0
    return ReductionResult(
        W1=first_order_superpotential(profile, params, grid, l1we),
        W2=first_order_superpotential(profile, params, grid, l2we),
        K1=k1,
        K2=k2,
        type=rtype,
    )


def reduce_type1(profile: MassProfile, params: SIParams, grid: Grid) -> ReductionResult:
    """Split the second-order charge into a product of two first-order ones."""
    return _reduce(profile, params, grid, ReductionType.TYPE_I)


def reduce_type2(profile: MassProfile, params: SIParams, grid: Grid) -> ReductionResult:
    """Factor both partner Hamiltonians through one intermediate level."""
    return _reduce(profile, params, grid, ReductionType.TYPE_II)


def reduced_partners(
    red: ReductionResult,
    profile: MassProfile,
    grid: Grid,
) -> tuple[GridFunction, GridFunction]:
    """The two intermediate potentials produced by a reduction.

    Returns the shifted plus partner of W1 and the shifted minus partner
    of W2.  The outer two members of the chains reproduce the
    second-order pair and are available from partner_potentials_1.
    """
    vp1, _ = partner_potentials_1(red.W1, profile, grid)
    _, vm2 = partner_potentials_1(red.W2, profile, grid)
    return (
        vp1.with_values(vp1.values + red.K1),
        vm2.with_values(vm2.values + red.K2),
    )


def reduced_si_recursion(
    params: SIParams, n_levels: int
) -> list[tuple[float, float, float]]:
    """Parameter orbit and cumulative shifts of the reduced recursion.

    Row k holds (a_k, R(a_k), eps_k) where the parameter map alternates
    between its two fixed images, R is the shift consumed at step k, and
    eps accumulates R from step 1 onward (eps_0 = 0).
    """
    if n_levels < 0:
        raise ValueError(f"n_levels must be nonnegative, got {n_levels}")
    lam = params.lam
    rows: list[tuple[float, float, float]] = []
    a = params.k3
    eps = 0.0
    rows.append((a, 2.0 * lam - a, eps))
    for _ in range(n_levels):
        a = 2.0 * lam - a
        r = 2.0 * lam - a
        eps += r
        rows.append((a, r, eps))
    return rows
